#include "simfsvgd/score.hpp"

#include "simfsvgd/csv.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace simfsvgd {

namespace {

void check_samples(const Matrix& samples) {
  if (samples.rows() < 2)
    throw std::invalid_argument("score estimation needs at least two samples");
  if (!samples.allFinite())
    throw std::invalid_argument("samples contain nonfinite entries");
}

void check_queries(const Matrix& queries, Eigen::Index dim) {
  if (queries.cols() != dim)
    throw std::invalid_argument("query dimension does not match the samples");
}

IsotropicKernel resolve_bandwidth(IsotropicKernel k, BandwidthMode mode,
                                  const Matrix& samples) {
  if (mode == BandwidthMode::kMedianHeuristic)
    k.lengthscale = median_heuristic(samples);
  return k;
}

}  // namespace

// ---------------------------------------------------------------------------
// Gaussian

GaussianScoreModel gaussian_score_fit(const Matrix& samples, double jitter) {
  check_samples(samples);
  const double m = static_cast<double>(samples.rows());
  GaussianScoreModel model;
  model.mean = samples.colwise().mean().transpose();
  const Matrix centered = samples.rowwise() - model.mean.transpose();
  model.covariance = centered.transpose() * centered / (m - 1.0);
  model.covariance.diagonal().array() += jitter;
  model.factorization.compute(model.covariance);
  const Vector diag = model.factorization.vectorD();
  if (model.factorization.info() != Eigen::Success ||
      diag.minCoeff() <= 1e-300 * std::max(diag.maxCoeff(), 1.0))
    throw NumericError(
        "Gaussian score fit: covariance is singular after jitter " +
        format_double(jitter));
  return model;
}

Matrix GaussianScoreModel::eval(const Matrix& queries) const {
  check_queries(queries, mean.size());
  const Matrix centered = queries.rowwise() - mean.transpose();
  return -factorization.solve(centered.transpose()).transpose();
}

// ---------------------------------------------------------------------------
// SSGE

SsgeModel ssge_fit(const Matrix& samples, const SsgeConfig& cfg) {
  check_samples(samples);
  if (!(cfg.eigenvalue_coverage > 0.0 && cfg.eigenvalue_coverage <= 1.0))
    throw std::invalid_argument("eigenvalue coverage must lie in (0, 1]");

  SsgeModel model;
  model.samples = samples;
  model.kernel = resolve_bandwidth(cfg.kernel, cfg.bandwidth_mode, samples);

  const Eigen::Index m = samples.rows();
  const Matrix K = kernel_matrix(model.kernel, samples);
  Eigen::SelfAdjointEigenSolver<Matrix> es(K);
  if (es.info() != Eigen::Success || !es.eigenvalues().allFinite())
    throw NumericError("SSGE: eigendecomposition produced nonfinite values");

  // descending order with deterministic eigenvector signs
  Vector evals = es.eigenvalues().reverse();
  Matrix evecs = es.eigenvectors().rowwise().reverse();
  for (Eigen::Index j = 0; j < evecs.cols(); ++j) {
    for (Eigen::Index i = 0; i < evecs.rows(); ++i) {
      if (std::abs(evecs(i, j)) > 1e-12) {
        if (evecs(i, j) < 0.0) evecs.col(j) = -evecs.col(j);
        break;
      }
    }
  }

  const double lambda_max = evals[0];
  if (!(lambda_max > 0.0))
    throw NumericError("SSGE: kernel matrix has no positive eigenvalue");

  // Nystrom eigenfunctions divide by lambda_j, so tiny eigenvalues are
  // discarded before the coverage rule is applied.
  int positive = 0;
  while (positive < evals.size() && evals[positive] >= 1e-8 * lambda_max)
    ++positive;

  const double total = evals.head(positive).sum();
  int J;
  if (cfg.eigenvalue_coverage >= 1.0) {
    J = positive;
  } else {
    J = 0;
    double acc = 0.0;
    for (int j = 0; j < positive; ++j) {
      acc += evals[j];
      if (acc / total < cfg.eigenvalue_coverage)
        J = j + 1;
      else
        break;
    }
    J = std::max(J, 1);
  }
  if (cfg.max_eigenfunctions > 0) J = std::min(J, cfg.max_eigenfunctions);
  J = std::min(J, positive);

  model.eigenvalues = evals.head(J);
  model.eigenvectors = evecs.leftCols(J);

  // beta_j = -sqrt(m)/(m lambda_j) * u_j^T D, where D(l, :) is the column sum
  // over first-argument kernel gradients sum_l' grad_x k(x_l', x_l).
  const double l2 = model.kernel.lengthscale * model.kernel.lengthscale;
  const Matrix W = gradient_weight_matrix(model.kernel, samples, samples);
  const Vector colsum = W.colwise().sum().transpose();
  const Matrix D = -(W * samples - colsum.asDiagonal() * samples) / l2;

  model.coefficients =
      -(std::sqrt(static_cast<double>(m)) / static_cast<double>(m)) *
      model.eigenvalues.cwiseInverse().asDiagonal() *
      (model.eigenvectors.transpose() * D);
  return model;
}

Matrix SsgeModel::eigenfunctions(const Matrix& queries) const {
  check_queries(queries, samples.cols());
  const Matrix Kq = kernel_matrix(kernel, queries, samples);
  return std::sqrt(static_cast<double>(samples.rows())) *
         (Kq * eigenvectors) * eigenvalues.cwiseInverse().asDiagonal();
}

ScoreField ssge_eval(const SsgeModel& model, const Matrix& queries) {
  ScoreField field;
  field.queries = queries;
  field.scores = model.eigenfunctions(queries) * model.coefficients;
  if (!field.scores.allFinite())
    throw NumericError("SSGE: evaluated scores are nonfinite");
  return field;
}

// ---------------------------------------------------------------------------
// nu-method and Tikhonov on the curl-free kernel

double nu_method_u(int t, double nu) {
  if (t == 1) return 0.0;  // the (t - 1) factor; avoids 0/0 at nu = 1/2
  const double td = t;
  return (td - 1.0) * (2.0 * td - 3.0) * (2.0 * td + 2.0 * nu - 1.0) /
         ((td + 2.0 * nu - 1.0) * (2.0 * td + 4.0 * nu - 1.0) *
          (2.0 * td + 2.0 * nu - 3.0));
}

double nu_method_omega(int t, double nu) {
  const double td = t;
  return 4.0 * (2.0 * td + 2.0 * nu - 1.0) * (td + nu - 1.0) /
         ((td + 2.0 * nu - 1.0) * (2.0 * td + 4.0 * nu - 1.0));
}

namespace {

struct CurlFreeSetup {
  CurlFreeKernel kernel;
  Matrix gram;  // Md x Md
  Vector h;     // stacked zeta at the samples
};

Vector zeta_at(const CurlFreeKernel& kernel, const Matrix& samples,
               const Vector& x) {
  const double m = static_cast<double>(samples.rows());
  Vector acc = Vector::Zero(x.size());
  for (Eigen::Index l = 0; l < samples.rows(); ++l)
    acc += curlfree_divergence(kernel, x, samples.row(l).transpose());
  return -acc / m;
}

CurlFreeSetup curlfree_setup(const Matrix& samples, const NuMethodConfig& cfg) {
  check_samples(samples);
  IsotropicKernel base = cfg.base;
  if (cfg.bandwidth_mode == BandwidthMode::kMedianHeuristic)
    base.lengthscale = cfg.bandwidth_scale * median_heuristic(samples);
  CurlFreeSetup setup;
  setup.kernel = CurlFreeKernel{base, static_cast<int>(samples.cols())};
  setup.gram = kernel_matrix(setup.kernel, samples);
  const Eigen::Index d = samples.cols();
  setup.h.resize(samples.rows() * d);
  for (Eigen::Index l = 0; l < samples.rows(); ++l)
    setup.h.segment(l * d, d) =
        zeta_at(setup.kernel, samples, samples.row(l).transpose());
  return setup;
}

}  // namespace

Vector CurlFreeScoreModel::zeta(const Vector& x) const {
  return zeta_at(kernel, samples, x);
}

Matrix CurlFreeScoreModel::eval(const Matrix& queries) const {
  check_queries(queries, samples.cols());
  const Eigen::Index d = samples.cols();
  Matrix scores(queries.rows(), d);
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    const Vector x = queries.row(q).transpose();
    Vector acc = zeta_coefficient * zeta(x);
    for (Eigen::Index l = 0; l < samples.rows(); ++l)
      acc += curlfree_eval(kernel, x, samples.row(l).transpose()) *
             kernel_coefficients.segment(l * d, d);
    scores.row(q) = acc.transpose();
  }
  if (!scores.allFinite())
    throw NumericError("curl-free score model produced nonfinite values");
  return scores;
}

CurlFreeScoreModel nu_method_fit(const Matrix& samples,
                                 const NuMethodConfig& cfg) {
  if (cfg.iterations < 1)
    throw std::invalid_argument("nu-method needs at least one iteration");
  const CurlFreeSetup setup = curlfree_setup(samples, cfg);
  const double M = static_cast<double>(samples.rows());

  double a_prev2 = 0.0;                          // a_0
  double a_prev = -nu_method_omega(1, cfg.nu);   // a_1
  Vector c_prev2 = Vector::Zero(setup.h.size()); // c_0
  Vector c_prev = c_prev2;                       // c_1

  for (int t = 2; t <= cfg.iterations; ++t) {
    const double u = nu_method_u(t, cfg.nu);
    const double w = nu_method_omega(t, cfg.nu);
    const double a = (1.0 + u) * a_prev - u * a_prev2 - w;
    const Vector c = (1.0 + u) * c_prev -
                     (w / M) * (a_prev * setup.h + setup.gram * c_prev) -
                     u * c_prev2;
    a_prev2 = a_prev;
    a_prev = a;
    c_prev2 = c_prev;
    c_prev = c;
    if (!c_prev.allFinite() || std::abs(a_prev) > 1e8 ||
        c_prev.lpNorm<Eigen::Infinity>() > 1e8)
      throw NumericError(
          "nu-method iterates diverged; use fewer iterations or a larger "
          "bandwidth");
  }

  CurlFreeScoreModel model;
  model.zeta_coefficient = a_prev;
  model.kernel_coefficients = c_prev;
  model.samples = samples;
  model.kernel = setup.kernel;
  return model;
}

CurlFreeScoreModel tikhonov_fit(const Matrix& samples,
                                const NuMethodConfig& cfg) {
  if (!cfg.tikhonov_lambda.has_value() || !(*cfg.tikhonov_lambda > 0.0))
    throw std::invalid_argument("tikhonov_fit requires a positive lambda");
  const double lambda = *cfg.tikhonov_lambda;
  const CurlFreeSetup setup = curlfree_setup(samples, cfg);
  const double M = static_cast<double>(samples.rows());

  // (L + lambda I)^-1 applied to -zeta in the span of {zeta, K(., x_l)}:
  // s(x) = -(1/lambda) zeta(x) + K(x, X) c,  (G + lambda M I) c = h / lambda.
  Matrix A = setup.gram;
  A.diagonal().array() += lambda * M;
  Eigen::LDLT<Matrix> ldlt(A);
  if (ldlt.info() != Eigen::Success)
    throw NumericError("Tikhonov system is singular");
  const Vector c = ldlt.solve(setup.h / lambda);
  if ((A * c - setup.h / lambda).norm() >
      1e-10 * std::max(1.0, setup.h.norm() / lambda))
    throw NumericError("Tikhonov solve did not reach the required tolerance");

  CurlFreeScoreModel model;
  model.zeta_coefficient = -1.0 / lambda;
  model.kernel_coefficients = c;
  model.samples = samples;
  model.kernel = setup.kernel;
  return model;
}

// ---------------------------------------------------------------------------
// facade

std::string to_string(ScoreEstimator e) {
  switch (e) {
    case ScoreEstimator::kGaussian: return "gaussian";
    case ScoreEstimator::kSsge: return "ssge";
    case ScoreEstimator::kNuMethod: return "nu_method";
    case ScoreEstimator::kTikhonov: return "tikhonov";
  }
  return "unknown";
}

ScoreEstimator score_estimator_from_string(const std::string& name) {
  if (name == "gaussian") return ScoreEstimator::kGaussian;
  if (name == "ssge") return ScoreEstimator::kSsge;
  if (name == "nu_method" || name == "nu-method")
    return ScoreEstimator::kNuMethod;
  if (name == "tikhonov") return ScoreEstimator::kTikhonov;
  throw std::invalid_argument("unknown score estimator: " + name);
}

ScoreField estimate_score(const ScoreConfig& cfg, const Matrix& samples,
                          const Matrix& queries) {
  ScoreField field;
  field.queries = queries;
  switch (cfg.estimator) {
    case ScoreEstimator::kGaussian:
      field.scores =
          gaussian_score_fit(samples, cfg.gaussian_jitter).eval(queries);
      break;
    case ScoreEstimator::kSsge:
      return ssge_eval(ssge_fit(samples, cfg.ssge), queries);
    case ScoreEstimator::kNuMethod:
      field.scores = nu_method_fit(samples, cfg.nu_method).eval(queries);
      break;
    case ScoreEstimator::kTikhonov:
      field.scores = tikhonov_fit(samples, cfg.nu_method).eval(queries);
      break;
  }
  return field;
}

void dump_spectrum_csv(const SsgeModel& model, const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  for (int j = 0; j < model.retained(); ++j)
    rows.push_back({std::to_string(j), format_double(model.eigenvalues[j])});
  write_csv(path, "index,eigenvalue", rows);
}

void dump_score_field_csv(const ScoreField& field, const std::string& path) {
  const Eigen::Index d = field.queries.cols();
  std::string header;
  for (Eigen::Index i = 0; i < d; ++i)
    header += "x_" + std::to_string(i + 1) + ",";
  for (Eigen::Index i = 0; i < d; ++i)
    header += "s_" + std::to_string(i + 1) + (i + 1 < d ? "," : "");
  std::vector<std::vector<std::string>> rows;
  for (Eigen::Index r = 0; r < field.queries.rows(); ++r) {
    std::vector<std::string> row;
    for (Eigen::Index i = 0; i < d; ++i)
      row.push_back(format_double(field.queries(r, i)));
    for (Eigen::Index i = 0; i < d; ++i)
      row.push_back(format_double(field.scores(r, i)));
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

}  // namespace simfsvgd
