#pragma once

#include "simfsvgd/common.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace simfsvgd {

// Per-point predictive distribution over all test inputs at once: an
// equally-weighted Gaussian mixture per point and output dimension.  Each
// mixture component supplies one n x d_y mean matrix; `stds` holds per-point
// per-dimension component standard deviations shared by all components.
// A single component represents plain Gaussian predictors.
struct PredictiveDistribution {
  std::vector<Matrix> means;
  Matrix stds;

  int components() const { return static_cast<int>(means.size()); }
  int points() const { return means.empty() ? 0 : static_cast<int>(means[0].rows()); }
};

void validate(const PredictiveDistribution& pred);

Matrix predictive_mean(const PredictiveDistribution& pred);

// Mean over test points of -log[(1/L) sum_l N(y_j | mean_lj, std_j^2)],
// summed over output dimensions; log-sum-exp stabilized.
double predictive_nll(const PredictiveDistribution& pred,
                      const Matrix& targets);

double rmse(const PredictiveDistribution& pred, const Matrix& targets);

// Observed coverage of central predictive intervals at the given confidence
// levels.  Mixture quantiles come from a fixed 1024-point sample per
// (point, dimension), reused across levels so coverage is monotone.
std::vector<double> calibration(const PredictiveDistribution& pred,
                                const Matrix& targets,
                                const std::vector<double>& levels,
                                std::uint64_t seed = 0);

struct ResultRow {
  std::string method;
  int n_train = 0;
  std::uint64_t seed = 0;
  double nll = 0.0;
  double rmse = 0.0;
  double coverage90 = 0.0;
};

// Writes `path` with one row per result plus an aggregated median/IQR file
// at path + ".agg.csv" keyed by (method, n_train).
void export_curves(std::vector<ResultRow> results, const std::string& path);
std::vector<ResultRow> load_results_csv(const std::string& path);

}  // namespace simfsvgd
