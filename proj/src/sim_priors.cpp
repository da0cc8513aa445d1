#include "simfsvgd/sim_priors.hpp"

#include <cmath>
#include <stdexcept>

namespace simfsvgd {

Vector ParamPrior::sample(Rng& rng) const {
  Vector phi(dim());
  for (int i = 0; i < dim(); ++i) {
    const auto& spec = params[i];
    switch (spec.dist) {
      case ParamDist::kUniform:
        phi[i] = rng.uniform(spec.a, spec.b);
        break;
      case ParamDist::kLogUniform:
        phi[i] = std::exp(rng.uniform(std::log(spec.a), std::log(spec.b)));
        break;
      case ParamDist::kNormal:
        phi[i] = spec.a + spec.b * rng.normal();
        break;
    }
  }
  return phi;
}

std::pair<double, double> ParamPrior::support(int i) const {
  const auto& spec = params.at(i);
  if (spec.dist == ParamDist::kNormal)
    return {spec.a - 3.0 * spec.b, spec.a + 3.0 * spec.b};
  return {spec.a, spec.b};
}

void validate(const ParamPrior& prior) {
  for (const auto& spec : prior.params) {
    switch (spec.dist) {
      case ParamDist::kUniform:
        if (!(spec.a < spec.b))
          throw std::invalid_argument("uniform prior needs lo < hi: " +
                                      spec.name);
        break;
      case ParamDist::kLogUniform:
        if (!(0.0 < spec.a && spec.a < spec.b))
          throw std::invalid_argument(
              "log-uniform prior needs 0 < lo < hi: " + spec.name);
        break;
      case ParamDist::kNormal:
        if (!(spec.b > 0.0))
          throw std::invalid_argument("normal prior needs std > 0: " +
                                      spec.name);
        break;
    }
  }
}

const IsotropicKernel& SimToRealGP::kernel_for(int output_dim) const {
  if (kernels.empty())
    throw std::invalid_argument("gap GP has no kernels configured");
  if (kernels.size() == 1) return kernels.front();
  return kernels.at(output_dim);
}

SimToRealGP shared_gap_gp(double variance, double lengthscale) {
  if (variance < 0.0)
    throw std::invalid_argument("gap variance must be nonnegative");
  if (!(lengthscale > 0.0))
    throw std::invalid_argument("gap lengthscale must be positive");
  return SimToRealGP{{IsotropicKernel{KernelFamily::kRbf, variance,
                                      lengthscale}}};
}

void validate(const MeasurementSampler& s) {
  if (s.lo.size() != s.hi.size() || s.lo.size() == 0)
    throw std::invalid_argument("measurement box is malformed");
  for (int i = 0; i < s.lo.size(); ++i)
    if (s.lo[i] > s.hi[i])
      throw std::invalid_argument("measurement box has lo > hi");
  if (s.size < 1)
    throw std::invalid_argument("measurement set size must be >= 1");
}

Matrix MeasurementSampler::sample(Rng& rng) const {
  validate(*this);
  Matrix X(size, dim());
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < dim(); ++j) X(i, j) = rng.uniform(lo[j], hi[j]);
  return X;
}

namespace {

// Cholesky factors of the gap marginal covariance per output dimension;
// empty matrix when the variance is exactly zero (no gap process).
std::vector<Matrix> gap_cholesky(const SimToRealGP& gap, const Matrix& X,
                                 int d_y) {
  std::vector<Matrix> factors(d_y);
  for (int i = 0; i < d_y; ++i) {
    const IsotropicKernel& k = gap.kernel_for(i);
    if (k.variance == 0.0) continue;
    if (i > 0 && gap.kernels.size() == 1) {
      factors[i] = factors[0];
      continue;
    }
    factors[i] = cholesky_with_jitter(kernel_matrix(k, X)).matrixL();
  }
  return factors;
}

}  // namespace

std::vector<Matrix> sample_prior_functions(const CombinedPrior& prior,
                                           const Matrix& X, int P, Rng& rng) {
  if (P < 2) throw std::invalid_argument("need at least two prior samples");
  if (X.cols() != prior.domain.input_dim)
    throw std::invalid_argument("measurement set does not match domain model");
  const int k = static_cast<int>(X.rows());
  const int d_y = prior.domain.output_dim;

  const std::vector<Matrix> chol = gap_cholesky(prior.gap, X, d_y);
  const std::uint64_t base = rng.next_u64();

  std::vector<Matrix> draws(P);
  for (int j = 0; j < P; ++j) {
    Rng draw_rng(mix_seed(base, static_cast<std::uint64_t>(j)));
    Matrix values(k, d_y);
    bool ok = false;
    for (int attempt = 0; attempt < 10 && !ok; ++attempt) {
      const Vector phi = prior.params.sample(draw_rng);
      ok = true;
      for (int r = 0; r < k; ++r) {
        values.row(r) =
            prior.domain.query(X.row(r).transpose(), phi).transpose();
        if (!values.row(r).allFinite()) {
          ok = false;
          break;
        }
      }
    }
    if (!ok)
      throw NumericError(
          "simulator returned nonfinite values for 10 parameter draws");
    for (int i = 0; i < d_y; ++i) {
      if (chol[i].size() == 0) continue;
      values.col(i) += chol[i] * draw_rng.normal_vector(k);
    }
    draws[j] = std::move(values);
  }
  return draws;
}

std::vector<Matrix> gp_marginal_score(const SimToRealGP& gp, const Matrix& X,
                                      const std::vector<Matrix>& h) {
  const int k = static_cast<int>(X.rows());
  if (h.empty()) return {};
  const int d_y = static_cast<int>(h.front().cols());
  const int L = static_cast<int>(h.size());

  std::vector<Matrix> scores(L, Matrix(k, d_y));
  for (int i = 0; i < d_y; ++i) {
    const IsotropicKernel& kern = gp.kernel_for(i);
    if (!(kern.variance > 0.0))
      throw NumericError("gap GP with zero variance has no marginal density");
    const auto llt = cholesky_with_jitter(kernel_matrix(kern, X));
    Matrix stacked(k, L);
    for (int l = 0; l < L; ++l) stacked.col(l) = h[l].col(i);
    const Matrix solved = llt.solve(stacked);
    for (int l = 0; l < L; ++l) scores[l].col(i) = -solved.col(l);
  }
  return scores;
}

std::vector<Matrix> prior_score(const CombinedPrior& prior, const Matrix& X,
                                const std::vector<Matrix>& h, int P,
                                const ScoreConfig& cfg, Rng& rng) {
  const int k = static_cast<int>(X.rows());
  const int d_y = prior.domain.output_dim;
  const int L = static_cast<int>(h.size());
  if (L == 0) throw std::invalid_argument("prior_score needs query values");
  if (cfg.estimator == ScoreEstimator::kGaussian && P < k + 2)
    throw std::invalid_argument(
        "Gaussian prior score needs P >= k + 2 samples for a full-rank "
        "covariance");

  const std::vector<Matrix> draws = sample_prior_functions(prior, X, P, rng);

  std::vector<Matrix> scores(L, Matrix(k, d_y));
  for (int i = 0; i < d_y; ++i) {
    Matrix samples(P, k);
    for (int j = 0; j < P; ++j) samples.row(j) = draws[j].col(i).transpose();
    Matrix queries(L, k);
    for (int l = 0; l < L; ++l) queries.row(l) = h[l].col(i).transpose();

    try {
      Matrix field;
      if (cfg.estimator == ScoreEstimator::kGaussian) {
        // relative jitter keeps near-deterministic simulators factorizable
        const Vector mean = samples.colwise().mean().transpose();
        const double trace =
            (samples.rowwise() - mean.transpose()).squaredNorm() / (P - 1.0);
        const double scale2 = 1.0 + samples.squaredNorm() / samples.size();
        if (trace <= 1e-20 * scale2)
          throw NumericError(
              "prior marginals are a point mass; covariance is singular");
        const double jitter = 1e-4 * trace / k;
        field = gaussian_score_fit(samples, jitter).eval(queries);
      } else {
        field = estimate_score(cfg, samples, queries).scores;
      }
      for (int l = 0; l < L; ++l)
        scores[l].col(i) = field.row(l).transpose();
    } catch (const NumericError& err) {
      throw NumericError("prior score failed on output dimension " +
                         std::to_string(i) + ": " + err.what());
    }
  }
  return scores;
}

}  // namespace simfsvgd
