#pragma once

#include "simfsvgd/common.hpp"

#include <functional>

// Finite-difference oracles shared by the test suites.  These stay
// independent of the library's analytic derivative code paths.
namespace testutil {

using simfsvgd::Matrix;
using simfsvgd::Vector;

inline Vector fd_gradient(const std::function<double(const Vector&)>& f,
                          const Vector& x, double h = 1e-5) {
  Vector g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

inline Matrix fd_hessian(const std::function<double(const Vector&)>& f,
                         const Vector& x, double h = 1e-4) {
  const int d = static_cast<int>(x.size());
  Matrix H(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      Vector xpp = x, xpm = x, xmp = x, xmm = x;
      xpp[i] += h; xpp[j] += h;
      xpm[i] += h; xpm[j] -= h;
      xmp[i] -= h; xmp[j] += h;
      xmm[i] -= h; xmm[j] -= h;
      H(i, j) = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * h * h);
    }
  }
  return H;
}

inline double rel_error(double got, double want) {
  const double denom = std::max(std::abs(want), 1e-12);
  return std::abs(got - want) / denom;
}

inline double rel_error(const Matrix& got, const Matrix& want) {
  const double denom = std::max(want.norm(), 1e-12);
  return (got - want).norm() / denom;
}

inline double cosine_similarity(const Matrix& a, const Matrix& b,
                                double floor = 1e-12) {
  // Mean over rows of the per-row cosine.  Rows where either vector falls
  // below `floor` are skipped; near the zero crossing of a score field the
  // cosine degenerates to a sign coin-flip.
  double acc = 0.0;
  int count = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double na = a.row(i).norm();
    const double nb = b.row(i).norm();
    if (na < floor || nb < floor) continue;
    acc += a.row(i).dot(b.row(i)) / (na * nb);
    ++count;
  }
  return count > 0 ? acc / count : 1.0;
}

}  // namespace testutil
