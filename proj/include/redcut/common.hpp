#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace redcut {

// Error categories map onto CLI exit codes: config=2, data=3, numerical=4.
class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A weight at or below this threshold counts as "not selected". Shared by the
// QP solver, the ranking rule and the cluster-discard logic so there is a
// single definition of irrelevance.
inline constexpr double kZeroTol = 1e-8;

// Seed used when the caller does not supply one; reports always print it.
inline constexpr std::uint64_t kDefaultSeed = 13;

// Resolves a --threads style request: 0 means "all hardware threads".
int effective_threads(int requested);

}  // namespace redcut
