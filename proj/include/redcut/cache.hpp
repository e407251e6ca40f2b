#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "redcut/dataset.hpp"
#include "redcut/infotheory.hpp"

namespace redcut {

/// FNV-1a over the code matrix, labels and the flags that shaped them.
/// Stable across runs; keys the similarity cache.
std::uint64_t dataset_hash(const DiscretizedDataset& dd, std::span<const int> labels,
                           bool normalized_q);

/// File name `<hex hash>.simcache` inside the cache directory.
std::string cache_path(const std::string& cache_dir, std::uint64_t key);

/// Little-endian binary layout: magic "RCSM", version, M, then Q (M*M
/// doubles, column-major), s, q_bar, m_bar, theta.
void save_similarity(const std::string& path, const SimilarityModel& sm);

/// Empty optional when the file is missing; DataError when it is corrupt.
std::optional<SimilarityModel> load_similarity(const std::string& path);

}  // namespace redcut
