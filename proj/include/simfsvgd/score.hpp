#pragma once

#include "simfsvgd/kernels.hpp"

#include <optional>
#include <string>

namespace simfsvgd {

// Estimated score vectors grad log p at the query points; row i of `scores`
// belongs to row i of `queries`.
struct ScoreField {
  Matrix queries;
  Matrix scores;
};

// ---------------------------------------------------------------------------
// Gaussian score approximation: fit mean/covariance, score is -Sigma^-1 (x-mu).

struct GaussianScoreModel {
  Vector mean;
  Matrix covariance;  // unbiased empirical covariance + jitter on the diagonal
  Eigen::LDLT<Matrix> factorization;

  Matrix eval(const Matrix& queries) const;
};

GaussianScoreModel gaussian_score_fit(const Matrix& samples, double jitter);

// ---------------------------------------------------------------------------
// Spectral Stein gradient estimator.

enum class BandwidthMode { kFixed, kMedianHeuristic };

struct SsgeConfig {
  IsotropicKernel kernel = rbf_kernel(1.0, 1.0);
  double eigenvalue_coverage = 0.99;  // cumulative spectrum fraction threshold
  int max_eigenfunctions = 0;         // 0 = no cap
  BandwidthMode bandwidth_mode = BandwidthMode::kMedianHeuristic;
};

struct SsgeModel {
  Vector eigenvalues;   // retained, descending
  Matrix eigenvectors;  // m x J, columns matching `eigenvalues`
  Matrix coefficients;  // J x d spectral coefficients of the score series
  Matrix samples;
  IsotropicKernel kernel;

  int retained() const { return static_cast<int>(eigenvalues.size()); }
  // Nystrom eigenfunction values at the queries, one column per retained
  // eigenfunction: psi_j(x) = sqrt(m)/lambda_j * sum_l u_jl k(x, x_l).
  Matrix eigenfunctions(const Matrix& queries) const;
};

SsgeModel ssge_fit(const Matrix& samples, const SsgeConfig& cfg);
ScoreField ssge_eval(const SsgeModel& model, const Matrix& queries);

// ---------------------------------------------------------------------------
// Nonparametric estimators on a curl-free matrix kernel.  Both produce the
// representation s(x) = zeta_coefficient * zeta(x) + K_cf(x, X) c with
// zeta(x) = -(1/M) sum_l div_x K_cf(x, x_l).

struct NuMethodConfig {
  IsotropicKernel base = rbf_kernel(1.0, 1.0);
  double nu = 1.0;     // regularization order of the iteration polynomials
  int iterations = 50;
  std::optional<double> tikhonov_lambda;  // used by tikhonov_fit only
  BandwidthMode bandwidth_mode = BandwidthMode::kMedianHeuristic;
  // The curl-free kernel differentiates the base twice, which sharpens its
  // effective resolution; the plain median bandwidth is too narrow for it.
  double bandwidth_scale = 3.0;
};

double nu_method_u(int t, double nu);
double nu_method_omega(int t, double nu);

struct CurlFreeScoreModel {
  double zeta_coefficient = 0.0;
  Vector kernel_coefficients;  // length M*d, block l multiplies K_cf(., x_l)
  Matrix samples;
  CurlFreeKernel kernel;

  Vector zeta(const Vector& x) const;
  Matrix eval(const Matrix& queries) const;
};

CurlFreeScoreModel nu_method_fit(const Matrix& samples,
                                 const NuMethodConfig& cfg);
CurlFreeScoreModel tikhonov_fit(const Matrix& samples,
                                const NuMethodConfig& cfg);

// ---------------------------------------------------------------------------
// Uniform facade.

enum class ScoreEstimator { kGaussian, kSsge, kNuMethod, kTikhonov };

std::string to_string(ScoreEstimator e);
ScoreEstimator score_estimator_from_string(const std::string& name);

struct ScoreConfig {
  ScoreEstimator estimator = ScoreEstimator::kGaussian;
  double gaussian_jitter = 1e-6;
  SsgeConfig ssge;
  NuMethodConfig nu_method;
};

ScoreField estimate_score(const ScoreConfig& cfg, const Matrix& samples,
                          const Matrix& queries);

// Debug exports: eigen-spectrum (index,eigenvalue) and score fields
// (x_1..x_d,s_1..s_d).
void dump_spectrum_csv(const SsgeModel& model, const std::string& path);
void dump_score_field_csv(const ScoreField& field, const std::string& path);

}  // namespace simfsvgd
