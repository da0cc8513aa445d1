#include "simfsvgd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace simfsvgd {

namespace {

void check_dims(const Vector& x, const Vector& y) {
  if (x.size() != y.size())
    throw std::invalid_argument("kernel arguments have mismatched dimensions");
}

void check_rbf_base(const CurlFreeKernel& k) {
  if (k.base.family != KernelFamily::kRbf)
    throw std::invalid_argument("curl-free kernel requires an RBF base");
  validate(k.base);
  if (k.dimension < 1)
    throw std::invalid_argument("curl-free kernel dimension must be positive");
}

}  // namespace

void validate(const IsotropicKernel& k) {
  if (!(k.variance > 0.0))
    throw std::invalid_argument("kernel variance must be positive");
  if (!(k.lengthscale > 0.0))
    throw std::invalid_argument("kernel lengthscale must be positive");
}

double IsotropicKernel::eval(const Vector& x, const Vector& y) const {
  check_dims(x, y);
  const double r2 = (x - y).squaredNorm() / (lengthscale * lengthscale);
  switch (family) {
    case KernelFamily::kRbf:
      return variance * std::exp(-0.5 * r2);
    case KernelFamily::kImq:
      return variance / std::sqrt(1.0 + r2);
  }
  throw std::invalid_argument("unknown kernel family");
}

Vector IsotropicKernel::grad_x(const Vector& x, const Vector& y) const {
  check_dims(x, y);
  const double l2 = lengthscale * lengthscale;
  const double r2 = (x - y).squaredNorm() / l2;
  double w = 0.0;
  switch (family) {
    case KernelFamily::kRbf:
      w = variance * std::exp(-0.5 * r2);
      break;
    case KernelFamily::kImq:
      w = variance * std::pow(1.0 + r2, -1.5);
      break;
  }
  return -(w / l2) * (x - y);
}

Matrix curlfree_eval(const CurlFreeKernel& k, const Vector& x,
                     const Vector& y) {
  check_rbf_base(k);
  check_dims(x, y);
  if (x.size() != k.dimension)
    throw std::invalid_argument("point dimension does not match kernel");
  const double l2 = k.base.lengthscale * k.base.lengthscale;
  const Vector r = x - y;
  const double s = r.squaredNorm();
  const double rho = std::exp(-s / (2.0 * l2));
  const int d = k.dimension;
  // -4 rho'' r r^T - 2 rho' I with rho' = -rho/(2 l^2), rho'' = rho/(4 l^4)
  Matrix out = -(rho / (l2 * l2)) * (r * r.transpose());
  out += (rho / l2) * Matrix::Identity(d, d);
  return k.base.variance * out;
}

Vector curlfree_divergence(const CurlFreeKernel& k, const Vector& x,
                           const Vector& y) {
  check_rbf_base(k);
  check_dims(x, y);
  const double l2 = k.base.lengthscale * k.base.lengthscale;
  const Vector r = x - y;
  const double s = r.squaredNorm();
  const double rho = std::exp(-s / (2.0 * l2));
  const int d = k.dimension;
  // -4 [ (d+2) rho'' + 2 s rho''' ] r, rho''' = -rho/(8 l^6)
  const double coeff = -(rho / (l2 * l2)) * (static_cast<double>(d + 2) - s / l2);
  return k.base.variance * coeff * r;
}

Vector curlfree_divergence_radial(const CurlFreeKernel& k, const Vector& x,
                                  const Vector& y) {
  check_rbf_base(k);
  check_dims(x, y);
  const Vector rvec = x - y;
  const double r = rvec.norm();
  if (r < 1e-14) return Vector::Zero(x.size());
  const double l2 = k.base.lengthscale * k.base.lengthscale;
  const double phi = k.base.variance * std::exp(-r * r / (2.0 * l2));
  const double dphi = -(r / l2) * phi;
  const double d2phi = (r * r / (l2 * l2) - 1.0 / l2) * phi;
  const double d3phi = (3.0 * r / (l2 * l2) - r * r * r / (l2 * l2 * l2)) * phi;
  const double d = static_cast<double>(k.dimension);
  const double bracket = d3phi + (d - 1.0) / r * (d2phi - dphi / r);
  return -(bracket / r) * rvec;
}

Matrix pairwise_sqdist(const Matrix& X, const Matrix& Y) {
  if (X.cols() != Y.cols())
    throw std::invalid_argument("point sets have mismatched dimensions");
  Matrix D = -2.0 * X * Y.transpose();
  D.colwise() += X.rowwise().squaredNorm();
  D.rowwise() += Y.rowwise().squaredNorm().transpose();
  return D.cwiseMax(0.0);
}

Matrix kernel_matrix(const IsotropicKernel& k, const Matrix& X,
                     const Matrix& Y) {
  validate(k);
  if (X.rows() == 0 || Y.rows() == 0)
    throw std::invalid_argument("kernel matrix needs non-empty point sets");
  const double l2 = k.lengthscale * k.lengthscale;
  Matrix R2 = pairwise_sqdist(X, Y) / l2;
  switch (k.family) {
    case KernelFamily::kRbf:
      return k.variance * (-0.5 * R2).array().exp().matrix();
    case KernelFamily::kImq:
      return k.variance * (1.0 + R2.array()).rsqrt().matrix();
  }
  throw std::invalid_argument("unknown kernel family");
}

Matrix kernel_matrix(const IsotropicKernel& k, const Matrix& X) {
  Matrix K = kernel_matrix(k, X, X);
  // exact symmetry for downstream eigensolves
  K = 0.5 * (K + K.transpose()).eval();
  return K;
}

Matrix kernel_matrix(const CurlFreeKernel& k, const Matrix& X,
                     const Matrix& Y) {
  check_rbf_base(k);
  if (X.rows() == 0 || Y.rows() == 0)
    throw std::invalid_argument("kernel matrix needs non-empty point sets");
  const int d = k.dimension;
  Matrix G(X.rows() * d, Y.rows() * d);
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < Y.rows(); ++j)
      G.block(i * d, j * d, d, d) =
          curlfree_eval(k, X.row(i).transpose(), Y.row(j).transpose());
  return G;
}

Matrix kernel_matrix(const CurlFreeKernel& k, const Matrix& X) {
  Matrix G = kernel_matrix(k, X, X);
  G = 0.5 * (G + G.transpose()).eval();
  return G;
}

Matrix gradient_weight_matrix(const IsotropicKernel& k, const Matrix& X,
                              const Matrix& Y) {
  validate(k);
  const double l2 = k.lengthscale * k.lengthscale;
  Matrix R2 = pairwise_sqdist(X, Y) / l2;
  switch (k.family) {
    case KernelFamily::kRbf:
      return k.variance * (-0.5 * R2).array().exp().matrix();
    case KernelFamily::kImq:
      return k.variance * (1.0 + R2.array()).pow(-1.5).matrix();
  }
  throw std::invalid_argument("unknown kernel family");
}

double median_heuristic(const Matrix& X) {
  const Eigen::Index m = X.rows();
  if (m < 2)
    throw std::invalid_argument("median heuristic needs at least two points");
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double dist = (X.row(i) - X.row(j)).norm();
      if (dist > 0.0) dists.push_back(dist);
    }
  if (dists.empty()) {
    log_warn("median heuristic: all points identical, falling back to 1.0");
    return 1.0;
  }
  const std::size_t n = dists.size();
  const std::size_t mid = n / 2;
  std::nth_element(dists.begin(), dists.begin() + mid, dists.end());
  double med = dists[mid];
  if (n % 2 == 0) {
    std::nth_element(dists.begin(), dists.begin() + mid - 1,
                     dists.begin() + mid);
    med = 0.5 * (med + dists[mid - 1]);
  }
  return med;
}

void add_jitter(Matrix& K, double scale) {
  const double mean_diag = K.diagonal().mean();
  K.diagonal().array() += scale * (mean_diag > 0.0 ? mean_diag : 1.0);
}

Eigen::LLT<Matrix> cholesky_with_jitter(Matrix K, double scale,
                                        double max_scale) {
  const double mean_diag = std::max(K.diagonal().mean(), 1e-300);
  for (double s = scale; s <= max_scale; s *= 10.0) {
    Matrix Kj = K;
    Kj.diagonal().array() += s * mean_diag;
    Eigen::LLT<Matrix> llt(Kj);
    if (llt.info() == Eigen::Success) return llt;
  }
  throw NumericError("Cholesky failed even with maximal jitter");
}

}  // namespace simfsvgd
