#include "redcut/cache.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

namespace redcut {

namespace {

constexpr char kMagic[4] = {'R', 'C', 'S', 'M'};
constexpr std::uint32_t kVersion = 1;

struct Fnv {
  std::uint64_t h = 1469598103934665603ull;
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  }
  template <typename T>
  void value(const T& v) {
    bytes(&v, sizeof(T));
  }
};

}  // namespace

std::uint64_t dataset_hash(const DiscretizedDataset& dd, std::span<const int> labels,
                           bool normalized_q) {
  Fnv f;
  const std::int64_t m = dd.n_features();
  const std::int64_t n = dd.n_instances();
  f.value(m);
  f.value(n);
  f.bytes(dd.codes.data(), static_cast<std::size_t>(m * n));
  for (int y : labels) f.value(y);
  f.value(normalized_q);
  return f.h;
}

std::string cache_path(const std::string& cache_dir, std::uint64_t key) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(key));
  return (std::filesystem::path(cache_dir) / (std::string(buf) + ".simcache")).string();
}

void save_similarity(const std::string& path, const SimilarityModel& sm) {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write cache file: " + path);
  out.write(kMagic, 4);
  const std::uint32_t version = kVersion;
  const std::uint64_t m = static_cast<std::uint64_t>(sm.size());
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  out.write(reinterpret_cast<const char*>(&m), sizeof m);
  out.write(reinterpret_cast<const char*>(sm.Q.data()),
            static_cast<std::streamsize>(sizeof(double) * m * m));
  out.write(reinterpret_cast<const char*>(sm.s.data()),
            static_cast<std::streamsize>(sizeof(double) * m));
  out.write(reinterpret_cast<const char*>(&sm.q_bar), sizeof sm.q_bar);
  out.write(reinterpret_cast<const char*>(&sm.m_bar), sizeof sm.m_bar);
  out.write(reinterpret_cast<const char*>(&sm.theta), sizeof sm.theta);
  if (!out) throw DataError("short write to cache file: " + path);
}

std::optional<SimilarityModel> load_similarity(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[4];
  std::uint32_t version = 0;
  std::uint64_t m = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&m), sizeof m);
  if (!in || std::memcmp(magic, kMagic, 4) != 0 || version != kVersion)
    throw DataError("corrupt or incompatible cache file: " + path);
  if (m == 0 || m > (1ull << 24)) throw DataError("implausible cache header: " + path);
  SimilarityModel sm;
  sm.Q.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  sm.s.resize(static_cast<Eigen::Index>(m));
  in.read(reinterpret_cast<char*>(sm.Q.data()),
          static_cast<std::streamsize>(sizeof(double) * m * m));
  in.read(reinterpret_cast<char*>(sm.s.data()), static_cast<std::streamsize>(sizeof(double) * m));
  in.read(reinterpret_cast<char*>(&sm.q_bar), sizeof sm.q_bar);
  in.read(reinterpret_cast<char*>(&sm.m_bar), sizeof sm.m_bar);
  in.read(reinterpret_cast<char*>(&sm.theta), sizeof sm.theta);
  if (!in) throw DataError("truncated cache file: " + path);
  return sm;
}

}  // namespace redcut
