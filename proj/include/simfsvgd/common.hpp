#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace simfsvgd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// Raised when a numerical routine cannot produce a usable result
// (singular systems, diverging iterations, nonfinite values).
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

void log_warn(const std::string& msg);

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);
std::uint64_t hash_string(const std::string& s);

// Deterministic generator with self-contained sampling code, so streams do
// not depend on the standard library's distribution implementations.
// Children created by split() are fully determined by the construction seed
// and the stream id, independent of how far the parent has advanced.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next_u64();
  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  double normal();   // N(0, 1)
  Vector normal_vector(int n);

  Rng split(std::uint64_t stream) const { return Rng(mix_seed(seed_, stream)); }
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace simfsvgd
