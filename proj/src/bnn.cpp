#include "simfsvgd/bnn.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace simfsvgd {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
    case Activation::kGelu: return "gelu";
    case Activation::kIdentity: return "identity";
  }
  return "unknown";
}

Activation activation_from_string(const std::string& name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  if (name == "gelu") return Activation::kGelu;
  if (name == "identity") return Activation::kIdentity;
  throw std::invalid_argument("unknown activation: " + name);
}

namespace {

double gelu_cdf(double x) { return 0.5 * (1.0 + std::erf(x * M_SQRT1_2)); }

Matrix apply_activation(const Matrix& z, Activation a) {
  switch (a) {
    case Activation::kTanh:
      return z.array().tanh();
    case Activation::kRelu:
      return z.cwiseMax(0.0);
    case Activation::kGelu:
      return z.unaryExpr([](double v) { return v * gelu_cdf(v); });
    case Activation::kIdentity:
      return z;
  }
  throw std::invalid_argument("unknown activation");
}

Matrix activation_grad(const Matrix& z, Activation a) {
  switch (a) {
    case Activation::kTanh:
      return 1.0 - z.array().tanh().square();
    case Activation::kRelu:
      return (z.array() > 0.0).cast<double>();
    case Activation::kGelu:
      return z.unaryExpr([](double v) {
        return gelu_cdf(v) +
               v * std::exp(-0.5 * v * v) / std::sqrt(2.0 * M_PI);
      });
    case Activation::kIdentity:
      return Matrix::Ones(z.rows(), z.cols());
  }
  throw std::invalid_argument("unknown activation");
}

}  // namespace

int MlpArch::param_count() const {
  int n = 0;
  for (std::size_t l = 1; l < widths.size(); ++l)
    n += widths[l] * widths[l - 1] + widths[l];
  return n;
}

void validate(const MlpArch& arch) {
  if (arch.widths.size() < 3)
    throw std::invalid_argument("network needs at least one hidden layer");
  for (int w : arch.widths)
    if (w < 1) throw std::invalid_argument("layer widths must be >= 1");
}

ParticleEnsemble init_particles(const MlpArch& arch, int count, Rng& rng) {
  validate(arch);
  if (count < 1) throw std::invalid_argument("need at least one particle");
  ParticleEnsemble ens;
  ens.arch = arch;
  ens.particles.resize(count, arch.param_count());
  for (int l = 0; l < count; ++l) {
    Rng particle_rng = rng.split(static_cast<std::uint64_t>(l));
    int offset = 0;
    for (std::size_t layer = 1; layer < arch.widths.size(); ++layer) {
      const int fan_in = arch.widths[layer - 1];
      const int fan_out = arch.widths[layer];
      const double std = std::sqrt(2.0 / fan_in);
      for (int i = 0; i < fan_out * fan_in; ++i)
        ens.particles(l, offset + i) = std * particle_rng.normal();
      offset += fan_out * fan_in;
      for (int i = 0; i < fan_out; ++i) ens.particles(l, offset + i) = 0.0;
      offset += fan_out;
    }
  }
  return ens;
}

Matrix mlp_forward(const Vector& theta, const MlpArch& arch, const Matrix& X) {
  validate(arch);
  if (theta.size() != arch.param_count())
    throw std::invalid_argument("parameter vector does not match architecture");
  if (X.cols() != arch.input_dim())
    throw std::invalid_argument("input dimension does not match architecture");

  Matrix a = X;
  int offset = 0;
  for (int layer = 1; layer <= arch.layers(); ++layer) {
    const int in = arch.widths[layer - 1];
    const int out = arch.widths[layer];
    const Eigen::Map<const Matrix> W(theta.data() + offset, out, in);
    offset += out * in;
    const Eigen::Map<const Vector> b(theta.data() + offset, out);
    offset += out;
    Matrix z = a * W.transpose();
    z.rowwise() += b.transpose();
    a = layer < arch.layers() ? apply_activation(z, arch.activation) : z;
  }
  if (!a.allFinite())
    throw NumericError("network forward pass produced nonfinite values");
  return a;
}

std::vector<Matrix> ensemble_forward(const ParticleEnsemble& ens,
                                     const Matrix& X) {
  std::vector<Matrix> out;
  out.reserve(ens.size());
  for (int l = 0; l < ens.size(); ++l)
    out.push_back(mlp_forward(ens.particles.row(l).transpose(), ens.arch, X));
  return out;
}

Vector mlp_vjp(const Vector& theta, const MlpArch& arch, const Matrix& X,
               const Matrix& cotangent) {
  validate(arch);
  if (theta.size() != arch.param_count())
    throw std::invalid_argument("parameter vector does not match architecture");
  if (cotangent.rows() != X.rows() || cotangent.cols() != arch.output_dim())
    throw std::invalid_argument("cotangent shape does not match outputs");

  const int n_layers = arch.layers();
  std::vector<Matrix> activations(n_layers);  // inputs to each layer
  std::vector<Matrix> preacts(n_layers);      // z of each layer
  std::vector<int> w_offsets(n_layers), b_offsets(n_layers);

  Matrix a = X;
  int offset = 0;
  for (int layer = 0; layer < n_layers; ++layer) {
    const int in = arch.widths[layer];
    const int out = arch.widths[layer + 1];
    activations[layer] = a;
    w_offsets[layer] = offset;
    const Eigen::Map<const Matrix> W(theta.data() + offset, out, in);
    offset += out * in;
    b_offsets[layer] = offset;
    const Eigen::Map<const Vector> b(theta.data() + offset, out);
    offset += out;
    Matrix z = a * W.transpose();
    z.rowwise() += b.transpose();
    preacts[layer] = z;
    a = layer < n_layers - 1 ? apply_activation(z, arch.activation) : z;
  }

  Vector grad = Vector::Zero(theta.size());
  Matrix g = cotangent;  // gradient wrt the current layer's pre-activation
  for (int layer = n_layers - 1; layer >= 0; --layer) {
    const int in = arch.widths[layer];
    const int out = arch.widths[layer + 1];
    Eigen::Map<Matrix>(grad.data() + w_offsets[layer], out, in) =
        g.transpose() * activations[layer];
    Eigen::Map<Vector>(grad.data() + b_offsets[layer], out) =
        g.colwise().sum().transpose();
    if (layer > 0) {
      const Eigen::Map<const Matrix> W(theta.data() + w_offsets[layer], out,
                                       in);
      g = (g * W).cwiseProduct(
          activation_grad(preacts[layer - 1], arch.activation));
    }
  }
  if (!grad.allFinite())
    throw NumericError("vector-Jacobian product produced nonfinite values");
  return grad;
}

void validate(const LikelihoodModel& lik) {
  if (lik.noise_std.size() == 0 || (lik.noise_std.array() <= 0.0).any())
    throw std::invalid_argument("likelihood noise std must be positive");
}

double LikelihoodModel::log_density(const Matrix& h, const Matrix& y) const {
  double acc = 0.0;
  for (int j = 0; j < h.cols(); ++j) {
    const double s2 = noise_std[j] * noise_std[j];
    acc += -0.5 * (y.col(j) - h.col(j)).squaredNorm() / s2 -
           0.5 * h.rows() * std::log(2.0 * M_PI * s2);
  }
  return acc;
}

Matrix likelihood_score(const LikelihoodModel& lik, const Matrix& h,
                        const Matrix& y) {
  validate(lik);
  if (h.rows() != y.rows() || h.cols() != y.cols())
    throw std::invalid_argument("prediction/target shapes differ");
  Matrix score = y - h;
  for (int j = 0; j < score.cols(); ++j)
    score.col(j) /= lik.noise_std[j] * lik.noise_std[j];
  return score;
}

void save_ensemble(const ParticleEnsemble& ens, const LikelihoodModel& lik,
                   const std::string& path) {
  nlohmann::json doc;
  doc["arch"]["widths"] = ens.arch.widths;
  doc["arch"]["activation"] = to_string(ens.arch.activation);
  doc["noise_std"] =
      std::vector<double>(lik.noise_std.data(),
                          lik.noise_std.data() + lik.noise_std.size());
  auto& particles = doc["particles"];
  for (int l = 0; l < ens.size(); ++l) {
    std::vector<double> row(ens.particles.cols());
    for (int i = 0; i < ens.particles.cols(); ++i)
      row[i] = ens.particles(l, i);
    particles.push_back(row);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << doc.dump() << "\n";
}

std::pair<ParticleEnsemble, LikelihoodModel> load_ensemble(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  nlohmann::json doc;
  in >> doc;

  ParticleEnsemble ens;
  ens.arch.widths = doc["arch"]["widths"].get<std::vector<int>>();
  ens.arch.activation =
      activation_from_string(doc["arch"]["activation"].get<std::string>());
  const auto& particles = doc["particles"];
  ens.particles.resize(particles.size(), ens.arch.param_count());
  for (std::size_t l = 0; l < particles.size(); ++l) {
    const auto row = particles[l].get<std::vector<double>>();
    if (row.size() != static_cast<std::size_t>(ens.arch.param_count()))
      throw std::runtime_error("checkpoint particle size mismatch");
    for (std::size_t i = 0; i < row.size(); ++i) ens.particles(l, i) = row[i];
  }

  LikelihoodModel lik;
  const auto stds = doc["noise_std"].get<std::vector<double>>();
  lik.noise_std.resize(stds.size());
  for (std::size_t i = 0; i < stds.size(); ++i) lik.noise_std[i] = stds[i];
  return {ens, lik};
}

}  // namespace simfsvgd
