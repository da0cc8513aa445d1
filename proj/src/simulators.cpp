#include "simfsvgd/simulators.hpp"

#include "simfsvgd/csv.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>

namespace simfsvgd {

void validate(const PendulumParams& p) {
  if (!(p.mass > 0 && p.length > 0 && p.inertia > 0 && p.motor_gain > 0 &&
        p.gravity > 0))
    throw std::invalid_argument("pendulum parameters must be positive");
}

Vector pendulum_rhs(const PendulumParams& p, const Vector& state, double u) {
  Vector d(2);
  d[0] = state[1];
  d[1] = (p.mass * p.gravity * p.length * std::sin(state[0]) +
          p.motor_gain * u) /
         p.inertia;
  return d;
}

double pendulum_energy(const PendulumParams& p, const Vector& state) {
  return 0.5 * p.inertia * state[1] * state[1] +
         p.mass * p.gravity * p.length * std::cos(state[0]);
}

void validate(const RealPendulumParams& p) {
  validate(p.base);
  if (p.drag_coeff < 0 || p.coulomb_coeff < 0)
    throw std::invalid_argument("friction coefficients must be nonnegative");
  if (!(p.motor_time_const > 0))
    throw std::invalid_argument("motor time constant must be positive");
}

Vector real_pendulum_rhs(const RealPendulumParams& p, const Vector& state,
                         double u) {
  const double theta = state[0], omega = state[1], tau = state[2];
  Vector d(3);
  d[0] = omega;
  d[1] = (p.base.mass * p.base.gravity * p.base.length * std::sin(theta) +
          tau - p.drag_coeff * omega * std::abs(omega) -
          p.coulomb_coeff * std::tanh(50.0 * omega)) /
         p.base.inertia;
  d[2] = (p.base.motor_gain * u - tau) / p.motor_time_const;
  return d;
}

namespace {

Vector integrate(const std::function<Vector(const Vector&, double)>& rhs,
                 Vector state, double u, double dt, int substeps) {
  const double h = dt / substeps;
  for (int i = 0; i < substeps; ++i) state = rk4_step(rhs, state, u, h);
  return state;
}

}  // namespace

DomainModel pendulum_transition_model(double dt, int substeps,
                                      double gravity) {
  if (!(dt > 0.0))
    throw std::invalid_argument("transition model needs dt > 0");
  DomainModel model;
  model.input_dim = 3;
  model.output_dim = 2;
  model.param_dim = 4;
  model.query = [dt, substeps, gravity](const Vector& x,
                                        const Vector& phi) -> Vector {
    PendulumParams p;
    p.mass = phi[0];
    p.length = phi[1];
    p.inertia = phi[2];
    p.motor_gain = phi[3];
    p.gravity = gravity;
    const Vector s0 = x.head(2);
    const Vector s1 = integrate(
        [&p](const Vector& s, double u) { return pendulum_rhs(p, s, u); }, s0,
        x[2], dt, substeps);
    return s1 - s0;
  };
  return model;
}

std::function<Vector(const Vector&)> ideal_pendulum_transition(
    const PendulumParams& p, double dt, int substeps) {
  if (!(dt > 0.0)) throw std::invalid_argument("transition needs dt > 0");
  validate(p);
  return [p, dt, substeps](const Vector& x) -> Vector {
    const Vector s0 = x.head(2);
    const Vector s1 = integrate(
        [&p](const Vector& s, double u) { return pendulum_rhs(p, s, u); }, s0,
        x[2], dt, substeps);
    return s1 - s0;
  };
}

std::function<Vector(const Vector&)> real_pendulum_transition(
    const RealPendulumParams& p, double dt, int substeps) {
  if (!(dt > 0.0)) throw std::invalid_argument("transition needs dt > 0");
  validate(p);
  return [p, dt, substeps](const Vector& x) -> Vector {
    Vector s0(3);
    s0 << x[0], x[1], 0.0;  // motor torque starts from rest, never observed
    const Vector s1 = integrate(
        [&p](const Vector& s, double u) { return real_pendulum_rhs(p, s, u); },
        s0, x[2], dt, substeps);
    return s1.head(2) - s0.head(2);
  };
}

double SinusoidTask::truth(double x) const {
  return amplitude * std::sin(frequency * x + phase) + offset + slope * x;
}

std::function<Vector(const Vector&)> SinusoidTask::truth_fn() const {
  return [t = *this](const Vector& x) -> Vector {
    Vector y(1);
    y[0] = t.truth(x[0]);
    return y;
  };
}

DomainModel SinusoidTask::sim_family() const {
  DomainModel model;
  model.input_dim = 1;
  model.output_dim = 1;
  model.param_dim = 2;
  model.query = [](const Vector& x, const Vector& phi) -> Vector {
    Vector y(1);
    y[0] = phi[0] * std::sin(phi[1] * x[0]);
    return y;
  };
  return model;
}

ParamPrior SinusoidTask::sim_param_prior() const {
  ParamPrior prior;
  prior.params = {
      {"amplitude", ParamDist::kUniform, sim_amplitude_lo, sim_amplitude_hi},
      {"frequency", ParamDist::kUniform, sim_frequency_lo, sim_frequency_hi}};
  return prior;
}

DataSplit generate_dataset(const std::function<Vector(const Vector&)>& system,
                           const MeasurementSampler& sampler, int n,
                           double noise_std, Rng& rng, int n_test) {
  if (n < 1 || n_test < 0)
    throw std::invalid_argument("dataset sizes must be positive");
  if (noise_std < 0.0)
    throw std::invalid_argument("noise std must be nonnegative");

  const auto make = [&](int count) -> Dataset {
    Dataset data;
    MeasurementSampler s = sampler;
    s.size = count;
    data.inputs = s.sample(rng);
    const int d_y = static_cast<int>(system(data.inputs.row(0).transpose()).size());
    data.targets.resize(count, d_y);
    for (int i = 0; i < count; ++i) {
      Vector y = system(data.inputs.row(i).transpose());
      for (int j = 0; j < d_y; ++j)
        y[j] += noise_std > 0.0 ? noise_std * rng.normal() : 0.0;
      data.targets.row(i) = y.transpose();
    }
    data.noise_std = noise_std;
    return data;
  };

  DataSplit split;
  split.train = make(n);
  split.test = n_test > 0 ? make(n_test) : Dataset{};
  return split;
}

void save_dataset_csv(const Dataset& data, const std::string& csv_path,
                      const nlohmann::json& sidecar) {
  const int d_x = static_cast<int>(data.inputs.cols());
  const int d_y = static_cast<int>(data.targets.cols());
  std::string header;
  for (int i = 0; i < d_x; ++i) header += "x_" + std::to_string(i + 1) + ",";
  for (int i = 0; i < d_y; ++i)
    header += "y_" + std::to_string(i + 1) + (i + 1 < d_y ? "," : "");
  std::vector<std::vector<std::string>> rows;
  for (int r = 0; r < data.size(); ++r) {
    std::vector<std::string> row;
    for (int i = 0; i < d_x; ++i) row.push_back(format_double(data.inputs(r, i)));
    for (int i = 0; i < d_y; ++i)
      row.push_back(format_double(data.targets(r, i)));
    rows.push_back(std::move(row));
  }
  write_csv(csv_path, header, rows);

  nlohmann::json meta = sidecar;
  meta["noise_std"] = data.noise_std;
  std::ofstream out(csv_path + ".json");
  out << meta.dump(2) << "\n";
}

Dataset load_dataset_csv(const std::string& csv_path) {
  std::string header;
  const auto rows = read_csv(csv_path, &header);
  const auto cols = split_csv_line(header);
  int d_x = 0, d_y = 0;
  for (const auto& c : cols) {
    if (c.rfind("x_", 0) == 0) ++d_x;
    else if (c.rfind("y_", 0) == 0) ++d_y;
  }
  if (d_x == 0 || d_y == 0)
    throw std::runtime_error("dataset csv header must name x_*/y_* columns");

  Dataset data;
  data.inputs.resize(rows.size(), d_x);
  data.targets.resize(rows.size(), d_y);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int i = 0; i < d_x; ++i) data.inputs(r, i) = std::stod(rows[r][i]);
    for (int i = 0; i < d_y; ++i)
      data.targets(r, i) = std::stod(rows[r][d_x + i]);
  }
  std::ifstream in(csv_path + ".json");
  if (in) {
    nlohmann::json meta;
    in >> meta;
    if (meta.contains("noise_std")) data.noise_std = meta["noise_std"];
  }
  return data;
}

}  // namespace simfsvgd
