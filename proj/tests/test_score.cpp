#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "simfsvgd/csv.hpp"
#include "simfsvgd/score.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace simfsvgd;

namespace {

Matrix gaussian_samples(int m, int d, Rng& rng) {
  Matrix X(m, d);
  for (int i = 0; i < m; ++i) X.row(i) = rng.normal_vector(d).transpose();
  return X;
}

Matrix grid1d(double lo, double hi, int n) {
  Matrix X(n, 1);
  for (int i = 0; i < n; ++i)
    X(i, 0) = lo + (hi - lo) * i / (n - 1.0);
  return X;
}

Matrix grid2d(double lo, double hi, int n) {
  Matrix X(n * n, 2);
  int r = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      X(r, 0) = lo + (hi - lo) * i / (n - 1.0);
      X(r, 1) = lo + (hi - lo) * j / (n - 1.0);
      ++r;
    }
  return X;
}

}  // namespace

TEST_CASE("gaussian score closed form is exact") {
  Rng rng(3);
  const Matrix X = gaussian_samples(50, 3, rng);
  const double jitter = 1e-6;
  const auto model = gaussian_score_fit(X, jitter);

  // independent route: explicit mean / unbiased covariance / linear solve
  const Vector mu = X.colwise().mean().transpose();
  const Matrix centered = X.rowwise() - mu.transpose();
  Matrix sigma = centered.transpose() * centered / (X.rows() - 1.0);
  sigma.diagonal().array() += jitter;

  const Matrix Q = gaussian_samples(20, 3, rng);
  const Matrix got = model.eval(Q);
  for (int i = 0; i < Q.rows(); ++i) {
    const Vector want = -sigma.ldlt().solve(Vector(Q.row(i).transpose() - mu));
    CHECK((got.row(i).transpose() - want).norm() <= 1e-10);
  }

  // score vanishes exactly at the mean
  Matrix at_mean(1, 3);
  at_mean.row(0) = mu.transpose();
  CHECK(model.eval(at_mean).norm() <= 1e-12);
}

TEST_CASE("gaussian score degenerate and error paths") {
  Matrix origin = Matrix::Zero(5, 2);
  const auto model = gaussian_score_fit(origin, 1e-3);
  Matrix q(1, 2);
  q << 0.2, -0.4;
  const Matrix s = model.eval(q);
  CHECK(s(0, 0) == doctest::Approx(-0.2 / 1e-3).epsilon(1e-9));
  CHECK(s(0, 1) == doctest::Approx(0.4 / 1e-3).epsilon(1e-9));

  CHECK_THROWS_AS(gaussian_score_fit(origin, 0.0), NumericError);
  CHECK_THROWS_AS(gaussian_score_fit(Matrix::Zero(1, 2), 1e-3),
                  std::invalid_argument);
}

TEST_CASE("gaussian score on standard normal samples") {
  Rng rng(5);
  const Matrix X = gaussian_samples(10000, 2, rng);
  const auto model = gaussian_score_fit(X, 1e-8);
  Matrix q(1, 2);
  q << 1.0, 1.0;
  const Matrix s = model.eval(q);
  CHECK(testutil::rel_error(s(0, 0), -1.0) <= 0.1);
  CHECK(testutil::rel_error(s(0, 1), -1.0) <= 0.1);
}

TEST_CASE("ssge eigenfunction retention rules") {
  SsgeConfig cfg;
  cfg.kernel = rbf_kernel(1.0, 1.0);
  cfg.bandwidth_mode = BandwidthMode::kFixed;
  cfg.eigenvalue_coverage = 0.97;

  Matrix dup(2, 1);
  dup << 0.5, 0.5;
  const auto model = ssge_fit(dup, cfg);
  CHECK(model.retained() == 1);
  CHECK(model.eigenvalues[0] == doctest::Approx(2.0));

  // full retention keeps exactly the strictly positive eigenvalues
  Matrix X(5, 1);
  X << 0.0, 1.0, 2.0, 3.0, 1.0;  // one duplicate -> Gram rank 4
  SsgeConfig full = cfg;
  full.eigenvalue_coverage = 1.0;
  const auto m2 = ssge_fit(X, full);
  CHECK(m2.retained() == 4);
  CHECK(m2.eigenvalues.minCoeff() > 0.0);
  for (int j = 1; j < m2.retained(); ++j)
    CHECK(m2.eigenvalues[j] <= m2.eigenvalues[j - 1]);
}

TEST_CASE("ssge nystrom eigenfunctions are orthonormal at the samples") {
  Rng rng(7);
  const Matrix X = gaussian_samples(200, 1, rng);
  SsgeConfig cfg;
  cfg.eigenvalue_coverage = 1.0;
  const auto model = ssge_fit(X, cfg);
  const Matrix psi = model.eigenfunctions(X);
  const Matrix gram = psi.transpose() * psi / static_cast<double>(X.rows());
  CHECK((gram - Matrix::Identity(model.retained(), model.retained()))
            .lpNorm<Eigen::Infinity>() <= 1e-6);
}

TEST_CASE("ssge score oracle: standard normal") {
  Rng rng(11);
  const Matrix X = gaussian_samples(1000, 1, rng);
  SsgeConfig cfg;
  cfg.eigenvalue_coverage = 0.99;
  const auto field = ssge_eval(ssge_fit(X, cfg), grid1d(-2.0, 2.0, 41));
  const Matrix want = -field.queries;
  CHECK(testutil::cosine_similarity(field.scores, want) >= 0.99);
}

TEST_CASE("ssge score oracle: shifted scaled normal") {
  Rng rng(13);
  Matrix X(2000, 1);
  for (int i = 0; i < X.rows(); ++i) X(i, 0) = 3.0 + 2.0 * rng.normal();
  SsgeConfig cfg;
  cfg.eigenvalue_coverage = 0.99;
  const auto field = ssge_eval(ssge_fit(X, cfg), grid1d(1.0, 5.0, 21));
  const Matrix want = -(field.queries.array() - 3.0) / 4.0;
  CHECK(testutil::rel_error(field.scores, want) <= 0.15);
}

TEST_CASE("ssge score oracle: correlated 2-D gaussian") {
  Rng rng(17);
  Matrix sigma(2, 2);
  sigma << 1.0, 0.5, 0.5, 1.0;
  const Matrix L = sigma.llt().matrixL();
  Vector mu(2);
  mu << 1.0, -0.5;
  Matrix X(2000, 2);
  for (int i = 0; i < X.rows(); ++i)
    X.row(i) = (mu + L * rng.normal_vector(2)).transpose();

  SsgeConfig cfg;
  cfg.eigenvalue_coverage = 0.99;
  // box of half-width 1 around the mean: 2 sigma in the Mahalanobis metric
  Matrix Q = grid2d(-1.0, 1.0, 5);
  Q.rowwise() += mu.transpose();
  const auto field = ssge_eval(ssge_fit(X, cfg), Q);
  const Matrix want =
      -(sigma.ldlt().solve((Q.rowwise() - mu.transpose()).transpose()))
           .transpose();
  CHECK(testutil::rel_error(field.scores, want) <= 0.2);
}

TEST_CASE("nu-method iteration polynomials") {
  CHECK(nu_method_omega(1, 1.0) == doctest::Approx(1.2).epsilon(1e-15));
  for (double nu : {0.5, 1.0, 2.0, 3.7})
    CHECK(nu_method_u(1, nu) == 0.0);
}

TEST_CASE("nu-method first iterate identity") {
  Rng rng(19);
  const Matrix X = gaussian_samples(40, 2, rng);
  NuMethodConfig cfg;
  cfg.iterations = 1;
  const auto model = nu_method_fit(X, cfg);
  const double omega1 = nu_method_omega(1, cfg.nu);

  const Matrix Q = gaussian_samples(7, 2, rng);
  const Matrix got = model.eval(Q);
  for (int q = 0; q < Q.rows(); ++q) {
    // zeta computed independently from the divergence closed form
    Vector zeta = Vector::Zero(2);
    for (int l = 0; l < X.rows(); ++l)
      zeta += curlfree_divergence(model.kernel, Q.row(q).transpose(),
                                  X.row(l).transpose());
    zeta *= -1.0 / static_cast<double>(X.rows());
    CHECK((got.row(q).transpose() + omega1 * zeta).norm() <= 1e-12);
  }
}

TEST_CASE("nu-method score oracle: standard normal 2-D") {
  Rng rng(23);
  const Matrix X = gaussian_samples(500, 2, rng);
  NuMethodConfig cfg;
  cfg.iterations = 50;
  const auto model = nu_method_fit(X, cfg);
  const Matrix Q = grid2d(-2.0, 2.0, 5);
  const Matrix got = model.eval(Q);
  CHECK(testutil::rel_error(got, Matrix(-Q)) <= 0.15);
}

TEST_CASE("nu-method divergence guard") {
  Rng rng(29);
  const Matrix X = gaussian_samples(60, 1, rng);
  NuMethodConfig cfg;
  cfg.base = rbf_kernel(50.0, 1.0);
  cfg.bandwidth_mode = BandwidthMode::kFixed;
  cfg.iterations = 400;
  CHECK_THROWS_AS(nu_method_fit(X, cfg), NumericError);
}

TEST_CASE("tikhonov estimator") {
  Rng rng(31);
  const Matrix X = gaussian_samples(500, 1, rng);

  NuMethodConfig cfg;
  cfg.tikhonov_lambda = 1e-3;
  const auto model = tikhonov_fit(X, cfg);
  const Matrix Q = grid1d(-2.0, 2.0, 21);
  const Matrix got = model.eval(Q);
  CHECK(testutil::rel_error(got, Matrix(-Q)) <= 0.15);

  // agreement with the nu-method on the same samples
  NuMethodConfig nu_cfg;
  nu_cfg.iterations = 50;
  const Matrix nu_scores = nu_method_fit(X, nu_cfg).eval(Q);
  CHECK((got - nu_scores).norm() / nu_scores.norm() <= 0.2);

  // infinite regularization shrinks the estimate to zero at rate 1/lambda
  NuMethodConfig big = cfg;
  big.tikhonov_lambda = 1e4;
  const double n1 = tikhonov_fit(X, big).eval(Q).norm();
  big.tikhonov_lambda = 1e5;
  const double n2 = tikhonov_fit(X, big).eval(Q).norm();
  CHECK(n1 / n2 == doctest::Approx(10.0).epsilon(0.05));
  CHECK(n2 <= 1e-3);

  NuMethodConfig unset;
  unset.tikhonov_lambda.reset();
  CHECK_THROWS_AS(tikhonov_fit(X, unset), std::invalid_argument);
}

TEST_CASE("estimated curl-free fields have vanishing loop integrals") {
  Rng rng(37);
  const Matrix X = gaussian_samples(200, 2, rng);
  NuMethodConfig cfg;
  cfg.iterations = 40;
  const auto nu_model = nu_method_fit(X, cfg);
  NuMethodConfig tcfg;
  tcfg.tikhonov_lambda = 1e-2;
  const auto tik_model = tikhonov_fit(X, tcfg);

  const double eps = 0.1;
  for (int trial = 0; trial < 5; ++trial) {
    const Vector c = rng.normal_vector(2);
    // midpoint-rule circulation around an axis-aligned square
    Matrix mids(4, 2);
    mids << c[0] + eps / 2, c[1], c[0], c[1] + eps / 2,
            c[0] - eps / 2, c[1], c[0], c[1] - eps / 2;
    Matrix dirs(4, 2);
    dirs << 0, 1, -1, 0, 0, -1, 1, 0;
    for (const auto* model : {&nu_model, &tik_model}) {
      const Matrix s = model->eval(mids);
      double loop = 0.0;
      for (int e = 0; e < 4; ++e) loop += s.row(e).dot(dirs.row(e)) * eps;
      CHECK(std::abs(loop) <= 1e-3);
    }
  }
}

TEST_CASE("facade dispatch and smoke contracts") {
  Matrix pm(2, 1);
  pm << -1.0, 1.0;
  ScoreConfig cfg;
  cfg.estimator = ScoreEstimator::kGaussian;
  Matrix zero(1, 1);
  zero << 0.0;
  CHECK(estimate_score(cfg, pm, zero).scores.norm() <= 1e-12);

  Rng rng(41);
  const Matrix X = gaussian_samples(30, 1, rng);
  ScoreConfig scfg;
  scfg.estimator = ScoreEstimator::kSsge;
  scfg.ssge.max_eigenfunctions = 30;
  scfg.ssge.eigenvalue_coverage = 1.0;
  const auto field = estimate_score(scfg, X, X);
  CHECK(field.scores.allFinite());

  CHECK(score_estimator_from_string("nu_method") == ScoreEstimator::kNuMethod);
  CHECK(to_string(ScoreEstimator::kTikhonov) == "tikhonov");
  CHECK_THROWS_AS(score_estimator_from_string("bogus"), std::invalid_argument);
}

TEST_CASE("all estimators agree on standard normal samples") {
  Rng rng(43);
  const Matrix X = gaussian_samples(1000, 1, rng);
  const Matrix Q = grid1d(-2.0, 2.0, 41);

  std::vector<Matrix> fields;
  for (auto est : {ScoreEstimator::kGaussian, ScoreEstimator::kSsge,
                   ScoreEstimator::kNuMethod, ScoreEstimator::kTikhonov}) {
    ScoreConfig cfg;
    cfg.estimator = est;
    cfg.nu_method.iterations = 50;
    cfg.nu_method.tikhonov_lambda = 1e-3;
    fields.push_back(estimate_score(cfg, X, Q).scores);
  }
  for (std::size_t a = 0; a < fields.size(); ++a)
    for (std::size_t b = a + 1; b < fields.size(); ++b)
      CHECK(testutil::cosine_similarity(fields[a], fields[b], 0.05) >= 0.95);
}

TEST_CASE("estimator error decreases as the sample count doubles") {
  const Matrix Q = grid1d(-2.0, 2.0, 21);
  const Matrix want = -Q;
  const std::vector<int> sizes{125, 250, 500, 1000};

  // nested sample prefixes per seed so that doubling m refines the same draw
  std::vector<Matrix> pools;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(mix_seed(97, seed));
    pools.push_back(gaussian_samples(sizes.back(), 1, rng));
  }

  for (auto est : {ScoreEstimator::kGaussian, ScoreEstimator::kSsge,
                   ScoreEstimator::kNuMethod, ScoreEstimator::kTikhonov}) {
    std::vector<double> median_err;
    for (int m : sizes) {
      std::vector<double> errs;
      for (const auto& pool : pools) {
        ScoreConfig cfg;
        cfg.estimator = est;
        cfg.nu_method.iterations = 50;
        cfg.nu_method.tikhonov_lambda = 1e-3;
        errs.push_back(testutil::rel_error(
            estimate_score(cfg, pool.topRows(m), Q).scores, want));
      }
      std::sort(errs.begin(), errs.end());
      median_err.push_back(errs[2]);
    }
    CAPTURE(to_string(est));
    for (std::size_t i = 1; i < median_err.size(); ++i)
      CHECK(median_err[i] < median_err[i - 1]);
  }
}

TEST_CASE("csv dumps") {
  Rng rng(47);
  const Matrix X = gaussian_samples(30, 2, rng);
  SsgeConfig cfg;
  const auto model = ssge_fit(X, cfg);
  dump_spectrum_csv(model, "/tmp/simfsvgd_spectrum.csv");
  const auto field = ssge_eval(model, X.topRows(5));
  dump_score_field_csv(field, "/tmp/simfsvgd_field.csv");

  std::string header;
  auto rows = simfsvgd::read_csv("/tmp/simfsvgd_spectrum.csv", &header);
  CHECK(header == "index,eigenvalue");
  CHECK(static_cast<int>(rows.size()) == model.retained());

  rows = simfsvgd::read_csv("/tmp/simfsvgd_field.csv", &header);
  CHECK(header == "x_1,x_2,s_1,s_2");
  CHECK(rows.size() == 5);
}
