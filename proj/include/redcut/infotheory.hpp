#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <utility>

#include "redcut/dataset.hpp"

namespace redcut {

/// Empirical Shannon entropy in bits over a finite alphabet.
double entropy(std::span<const int> x);

/// Entropy of the paired sequence; throws DataError on length mismatch.
double joint_entropy(std::span<const int> a, std::span<const int> b);

/// H(a) + H(b) - H(a,b), clamped at 0 from below.
double mutual_information(std::span<const int> a, std::span<const int> b);

/// Normalized information distance 1 - MI/max(H(a), H(b)), a metric in [0,1].
/// Two constant sequences are informationally identical: distance 0.
double mi_distance(std::span<const int> a, std::span<const int> b);

/// Inputs of the feature-selection quadratic program: pairwise redundancies Q
/// (mutual information, diagonal = entropies), relevance vector s (mutual
/// information with the labels), and the redundancy/relevance trade-off theta.
struct SimilarityModel {
  Eigen::MatrixXd Q;   // M x M, symmetric, entries >= 0 (bits)
  Eigen::VectorXd s;   // length M, entries >= 0 (bits)
  double theta = 0.5;  // q_bar / (q_bar + m_bar)
  double q_bar = 0.0;  // mean of all M^2 entries of Q
  double m_bar = 0.0;  // mean of the entries of s

  int size() const { return static_cast<int>(s.size()); }

  /// The metric 1 - Q_ij / max(Q_ii, Q_jj), clamped into [0,1]; 0 when both
  /// diagonal entries vanish (two constant features).
  double distance(int i, int j) const;

  /// Rows/columns of Q and entries of s gathered for a feature subset, with
  /// q_bar, m_bar and theta recomputed on the restriction.
  SimilarityModel restricted_to(std::span<const int> features) const;
};

/// Computes Q and s from discretized codes and labels. Pair computations are
/// independent and run on `threads` workers (0 = all cores). When
/// `normalized_q` is set, off-diagonal and diagonal redundancies are replaced
/// by the normalized similarity 1 - d (unitless) instead of raw bits.
SimilarityModel build_similarity(const DiscretizedDataset& dd,
                                 std::span<const int> labels, int threads = 0,
                                 bool normalized_q = false);

/// Applies the trade-off scaling Q' = (1-theta) Q, s' = theta s. Uses
/// theta_override when given, otherwise the model's theta. Throws ConfigError
/// when theta lies outside [0,1].
std::pair<Eigen::MatrixXd, Eigen::VectorXd> scale_for_theta(
    const SimilarityModel& sm, std::optional<double> theta_override = {});

}  // namespace redcut
