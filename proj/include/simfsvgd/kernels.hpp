#pragma once

#include "simfsvgd/common.hpp"

#include <Eigen/Cholesky>

namespace simfsvgd {

enum class KernelFamily { kRbf, kImq };

// Isotropic kernel k(x, x') = variance * rho(||x - x'|| / lengthscale)
// with rho(r) = exp(-r^2/2) for RBF and rho(r) = (1 + r^2)^(-1/2) for IMQ.
struct IsotropicKernel {
  KernelFamily family = KernelFamily::kRbf;
  double variance = 1.0;
  double lengthscale = 1.0;

  double eval(const Vector& x, const Vector& y) const;
  Vector grad_x(const Vector& x, const Vector& y) const;
};

inline IsotropicKernel rbf_kernel(double variance, double lengthscale) {
  return {KernelFamily::kRbf, variance, lengthscale};
}
inline IsotropicKernel imq_kernel(double variance, double lengthscale) {
  return {KernelFamily::kImq, variance, lengthscale};
}

void validate(const IsotropicKernel& k);

// Matrix-valued curl-free kernel, the negative Hessian of the translation
// invariant scalar kernel.  Columns of x -> K(x, x') are gradient fields.
// Only the RBF base is supported (needs three derivatives).
struct CurlFreeKernel {
  IsotropicKernel base;
  int dimension = 1;
};

// K_cf(x, x') = -4 rho'' r r^T - 2 rho' I  for rho(s) = exp(-s / (2 l^2)),
// s = ||x - x'||^2, scaled by the base variance.
Matrix curlfree_eval(const CurlFreeKernel& k, const Vector& x, const Vector& y);

// Divergence of K_cf in its first argument:
// -4 [ (d + 2) rho'' + 2 s rho''' ] (x - x') * variance.
Vector curlfree_divergence(const CurlFreeKernel& k, const Vector& x,
                           const Vector& y);

// Same divergence through the radial profile phi(r) = variance *
// exp(-r^2 / (2 l^2)); cross-check route for the closed form above.
Vector curlfree_divergence_radial(const CurlFreeKernel& k, const Vector& x,
                                  const Vector& y);

// Rows of X / Y are points.
Matrix pairwise_sqdist(const Matrix& X, const Matrix& Y);

Matrix kernel_matrix(const IsotropicKernel& k, const Matrix& X,
                     const Matrix& Y);
Matrix kernel_matrix(const IsotropicKernel& k, const Matrix& X);  // symmetric

// Block Gram matrix of size (m*d) x (m'*d); block (i, j) is K_cf(x_i, y_j).
Matrix kernel_matrix(const CurlFreeKernel& k, const Matrix& X, const Matrix& Y);
Matrix kernel_matrix(const CurlFreeKernel& k, const Matrix& X);

// Weight matrix W with grad_x k(x_i, y_j) = -W(i, j) * (x_i - y_j) / l^2.
// RBF: W = K; IMQ: W = variance * (1 + r^2)^(-3/2).
Matrix gradient_weight_matrix(const IsotropicKernel& k, const Matrix& X,
                              const Matrix& Y);

// Median of pairwise Euclidean distances, zero self-distances excluded.
// Falls back to 1.0 (with a warning) when all points coincide.
double median_heuristic(const Matrix& X);

void add_jitter(Matrix& K, double scale = 1e-8);

// Cholesky with an escalating relative jitter ladder (scale, 10*scale, ...,
// up to max_scale); throws NumericError when the matrix never factorizes.
Eigen::LLT<Matrix> cholesky_with_jitter(Matrix K, double scale = 1e-8,
                                        double max_scale = 1e-2);

}  // namespace simfsvgd
