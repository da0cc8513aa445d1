#pragma once

#include "simfsvgd/common.hpp"

#include <string>
#include <vector>

namespace simfsvgd {

enum class Activation { kTanh, kRelu, kGelu, kIdentity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

// Fully connected network; widths run [d_x, w_1, ..., d_y].  Parameters live
// in one flat vector, per layer the weight matrix (column-major, out x in)
// followed by the bias.  The output layer is linear.
struct MlpArch {
  std::vector<int> widths;
  Activation activation = Activation::kTanh;

  int input_dim() const { return widths.front(); }
  int output_dim() const { return widths.back(); }
  int layers() const { return static_cast<int>(widths.size()) - 1; }
  int param_count() const;
};

void validate(const MlpArch& arch);

struct ParticleEnsemble {
  Matrix particles;  // L x d_theta
  MlpArch arch;

  int size() const { return static_cast<int>(particles.rows()); }
};

// He-style init: weights ~ N(0, 2 / fan_in), biases zero; every particle
// draws from its own child stream.
ParticleEnsemble init_particles(const MlpArch& arch, int count, Rng& rng);

Matrix mlp_forward(const Vector& theta, const MlpArch& arch, const Matrix& X);

std::vector<Matrix> ensemble_forward(const ParticleEnsemble& ens,
                                     const Matrix& X);

// (d h / d theta)^T vec(cotangent) by reverse accumulation; the Jacobian is
// never materialized.
Vector mlp_vjp(const Vector& theta, const MlpArch& arch, const Matrix& X,
               const Matrix& cotangent);

struct LikelihoodModel {
  RowVector noise_std;  // per output dimension

  double log_density(const Matrix& h, const Matrix& y) const;
};

void validate(const LikelihoodModel& lik);

// Gradient of the Gaussian log likelihood in the predictions: (y - h)/sigma^2.
Matrix likelihood_score(const LikelihoodModel& lik, const Matrix& h,
                        const Matrix& y);

void save_ensemble(const ParticleEnsemble& ens, const LikelihoodModel& lik,
                   const std::string& path);
std::pair<ParticleEnsemble, LikelihoodModel> load_ensemble(
    const std::string& path);

}  // namespace simfsvgd
