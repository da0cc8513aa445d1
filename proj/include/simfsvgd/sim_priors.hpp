#pragma once

#include "simfsvgd/score.hpp"

#include <functional>
#include <string>
#include <vector>

namespace simfsvgd {

// -----------------------------------------------------------------------
// Prior over simulator parameters.

enum class ParamDist { kUniform, kLogUniform, kNormal };

struct ParamSpec {
  std::string name;
  ParamDist dist = ParamDist::kUniform;
  double a = 0.0;  // lo (uniform, log-uniform) or mean (normal)
  double b = 1.0;  // hi (uniform, log-uniform) or std (normal)
};

struct ParamPrior {
  std::vector<ParamSpec> params;

  int dim() const { return static_cast<int>(params.size()); }
  Vector sample(Rng& rng) const;
  // Search interval per parameter; normals use mean +- 3 std.
  std::pair<double, double> support(int i) const;
};

void validate(const ParamPrior& prior);

// -----------------------------------------------------------------------
// Opaque simulation model, queried pointwise: x -> g(x, phi).

struct DomainModel {
  std::function<Vector(const Vector& x, const Vector& phi)> query;
  int input_dim = 0;
  int output_dim = 0;
  int param_dim = 0;
};

// Zero-mean GP modelling the gap between the best simulator fit and the real
// system, factorized over output dimensions.  A single kernel entry is
// shared across all outputs; per-output kernels are allowed.  Zero variance
// means "no gap process".
struct SimToRealGP {
  std::vector<IsotropicKernel> kernels;

  const IsotropicKernel& kernel_for(int output_dim) const;
};

SimToRealGP shared_gap_gp(double variance, double lengthscale);

// -----------------------------------------------------------------------
// Implicit stochastic-process prior: simulator with random parameters plus
// an additive GP gap, defined through its marginal samples.

struct CombinedPrior {
  DomainModel domain;
  ParamPrior params;
  SimToRealGP gap;
};

// Uniform sampling over an axis-aligned input box.
struct MeasurementSampler {
  Vector lo;
  Vector hi;
  int size = 1;  // points per draw

  int dim() const { return static_cast<int>(lo.size()); }
  Matrix sample(Rng& rng) const;  // size x dim
};

void validate(const MeasurementSampler& s);

// P marginal samples of the prior at the points X (k x d_x); each entry is a
// k x d_y matrix of function values.  Draw j uses the rng child stream j, so
// results do not depend on evaluation order.
std::vector<Matrix> sample_prior_functions(const CombinedPrior& prior,
                                           const Matrix& X, int P, Rng& rng);

// Exact marginal score of the gap GP: -K^-1 h per output dimension.
std::vector<Matrix> gp_marginal_score(const SimToRealGP& gp, const Matrix& X,
                                      const std::vector<Matrix>& h);

// Estimated prior score at each of the L function-value matrices in h
// (k x d_y each): fits the configured estimator on P prior samples per
// output dimension and evaluates it at the h values.
std::vector<Matrix> prior_score(const CombinedPrior& prior, const Matrix& X,
                                const std::vector<Matrix>& h, int P,
                                const ScoreConfig& cfg, Rng& rng);

}  // namespace simfsvgd
