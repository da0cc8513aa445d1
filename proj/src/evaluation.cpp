#include "simfsvgd/evaluation.hpp"

#include "simfsvgd/csv.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace simfsvgd {

void validate(const PredictiveDistribution& pred) {
  if (pred.means.empty())
    throw std::invalid_argument("predictive distribution has no components");
  for (const auto& m : pred.means)
    if (m.rows() != pred.means[0].rows() || m.cols() != pred.means[0].cols())
      throw std::invalid_argument("mixture components have unequal shapes");
  if (pred.stds.rows() != pred.means[0].rows() ||
      pred.stds.cols() != pred.means[0].cols())
    throw std::invalid_argument("std matrix does not match the means");
  if ((pred.stds.array() <= 0.0).any())
    throw std::invalid_argument("component stds must be positive");
}

Matrix predictive_mean(const PredictiveDistribution& pred) {
  validate(pred);
  Matrix mean = Matrix::Zero(pred.means[0].rows(), pred.means[0].cols());
  for (const auto& m : pred.means) mean += m;
  return mean / pred.components();
}

double predictive_nll(const PredictiveDistribution& pred,
                      const Matrix& targets) {
  validate(pred);
  if (targets.rows() != pred.points() ||
      targets.cols() != pred.means[0].cols())
    throw std::invalid_argument("target shape does not match predictions");
  if (targets.rows() == 0)
    throw std::invalid_argument("empty test set");

  const int L = pred.components();
  const int n = pred.points();
  const int d = static_cast<int>(targets.cols());

  double total = 0.0;
  std::vector<double> logs(L);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      const double s = pred.stds(i, j);
      for (int l = 0; l < L; ++l) {
        const double z = (targets(i, j) - pred.means[l](i, j)) / s;
        logs[l] = -0.5 * z * z - 0.5 * std::log(2.0 * M_PI * s * s);
      }
      const double m = *std::max_element(logs.begin(), logs.end());
      double acc = 0.0;
      for (double v : logs) acc += std::exp(v - m);
      total += -(m + std::log(acc / L));
    }
  }
  return total / n;
}

double rmse(const PredictiveDistribution& pred, const Matrix& targets) {
  const Matrix mean = predictive_mean(pred);
  if (targets.rows() != mean.rows() || targets.cols() != mean.cols())
    throw std::invalid_argument("target shape does not match predictions");
  return std::sqrt((mean - targets).squaredNorm() / targets.size());
}

std::vector<double> calibration(const PredictiveDistribution& pred,
                                const Matrix& targets,
                                const std::vector<double>& levels,
                                std::uint64_t seed) {
  validate(pred);
  for (double c : levels)
    if (!(c > 0.0 && c < 1.0))
      throw std::invalid_argument("confidence levels must lie in (0, 1)");

  const int kSamples = 1024;
  const int L = pred.components();
  const int n = pred.points();
  const int d = static_cast<int>(targets.cols());

  std::vector<int> inside(levels.size(), 0);
  std::vector<double> draws(kSamples);
  Rng rng(mix_seed(seed, 0x5ca1ab1e));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      for (int s = 0; s < kSamples; ++s) {
        const int comp = static_cast<int>(rng.next_u64() % L);
        draws[s] = pred.means[comp](i, j) + pred.stds(i, j) * rng.normal();
      }
      std::sort(draws.begin(), draws.end());
      for (std::size_t li = 0; li < levels.size(); ++li) {
        const double tail = 0.5 * (1.0 - levels[li]);
        const int lo_idx = static_cast<int>(std::floor(tail * (kSamples - 1)));
        const int hi_idx =
            static_cast<int>(std::ceil((1.0 - tail) * (kSamples - 1)));
        if (targets(i, j) >= draws[lo_idx] && targets(i, j) <= draws[hi_idx])
          ++inside[li];
      }
    }
  }
  std::vector<double> coverage(levels.size());
  for (std::size_t li = 0; li < levels.size(); ++li)
    coverage[li] = static_cast<double>(inside[li]) / (n * d);
  return coverage;
}

namespace {

constexpr const char* kResultsHeader =
    "method,n_train,seed,nll,rmse,coverage_90";

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double iqr_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto quantile = [&](double q) {
    const double pos = q * (v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - lo) * (v[hi] - v[lo]);
  };
  return quantile(0.75) - quantile(0.25);
}

}  // namespace

void export_curves(std::vector<ResultRow> results, const std::string& path) {
  std::sort(results.begin(), results.end(),
            [](const ResultRow& a, const ResultRow& b) {
              return std::tie(a.method, a.n_train, a.seed) <
                     std::tie(b.method, b.n_train, b.seed);
            });

  std::vector<std::vector<std::string>> rows;
  for (const auto& r : results)
    rows.push_back({r.method, std::to_string(r.n_train),
                    std::to_string(r.seed), format_double(r.nll),
                    format_double(r.rmse), format_double(r.coverage90)});
  write_csv(path, kResultsHeader, rows);

  std::map<std::pair<std::string, int>, std::vector<ResultRow>> groups;
  for (const auto& r : results) groups[{r.method, r.n_train}].push_back(r);

  std::vector<std::vector<std::string>> agg;
  for (const auto& [key, group] : groups) {
    std::vector<double> nll, rm, cov;
    for (const auto& r : group) {
      nll.push_back(r.nll);
      rm.push_back(r.rmse);
      cov.push_back(r.coverage90);
    }
    agg.push_back({key.first, std::to_string(key.second),
                   format_double(median_of(nll)), format_double(iqr_of(nll)),
                   format_double(median_of(rm)), format_double(iqr_of(rm)),
                   format_double(median_of(cov)), format_double(iqr_of(cov))});
  }
  write_csv(path + ".agg.csv",
            "method,n_train,nll_median,nll_iqr,rmse_median,rmse_iqr,"
            "coverage_90_median,coverage_90_iqr",
            agg);
}

std::vector<ResultRow> load_results_csv(const std::string& path) {
  std::string header;
  const auto rows = read_csv(path, &header);
  if (header != kResultsHeader)
    throw std::runtime_error("unexpected results header in " + path);
  std::vector<ResultRow> out;
  for (const auto& row : rows) {
    if (row.size() != 6)
      throw std::runtime_error("malformed results row in " + path);
    ResultRow r;
    r.method = row[0];
    r.n_train = std::stoi(row[1]);
    r.seed = std::stoull(row[2]);
    r.nll = std::stod(row[3]);
    r.rmse = std::stod(row[4]);
    r.coverage90 = std::stod(row[5]);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace simfsvgd
