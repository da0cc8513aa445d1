#pragma once

#include "simfsvgd/sim_priors.hpp"

#include <nlohmann/json_fwd.hpp>

#include <functional>
#include <string>

namespace simfsvgd {

// -----------------------------------------------------------------------
// Pendulum.  State is (theta, theta_dot) with theta measured from the
// upright position, theta_ddot = (m g l sin(theta) + C_m u) / I.

struct PendulumParams {
  double mass = 1.0;
  double length = 1.0;
  double inertia = 1.0;
  double motor_gain = 1.5;
  double gravity = 9.81;
};

void validate(const PendulumParams& p);

Vector pendulum_rhs(const PendulumParams& p, const Vector& state, double u);

// Ideal-pendulum invariant used by the energy-drift checks:
// E = 1/2 I theta_dot^2 + m g l cos(theta).
double pendulum_energy(const PendulumParams& p, const Vector& state);

// "Real" pendulum with effects the ideal model omits: quadratic aerodynamic
// drag, smoothed Coulomb friction, and a first-order motor lag.  The motor
// torque tau is a third, latent state.
struct RealPendulumParams {
  PendulumParams base;
  double drag_coeff = 0.4;      // c_d * theta_dot |theta_dot|
  double coulomb_coeff = 0.1;   // mu_f * tanh(50 theta_dot)
  double motor_time_const = 0.05;
};

void validate(const RealPendulumParams& p);

Vector real_pendulum_rhs(const RealPendulumParams& p, const Vector& state,
                         double u);

// Classical RK4 with zero-order-hold input.
template <class Rhs>
Vector rk4_step(Rhs&& rhs, const Vector& state, double u, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk4_step needs dt > 0");
  const Vector k1 = rhs(state, u);
  const Vector k2 = rhs(Vector(state + 0.5 * dt * k1), u);
  const Vector k3 = rhs(Vector(state + 0.5 * dt * k2), u);
  const Vector k4 = rhs(Vector(state + dt * k3), u);
  Vector next = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.allFinite()) throw NumericError("rk4_step produced nonfinite state");
  return next;
}

// Transition map of the ideal pendulum as a queryable domain model with
// phi = [m, l, I, C_m].  Input x = [theta, theta_dot, u]; the target is the
// state difference over one control interval, integrated with `substeps`
// internal RK4 steps.
DomainModel pendulum_transition_model(double dt, int substeps = 10,
                                      double gravity = 9.81);

// Transition map of the real pendulum as seen by the learner: the latent
// motor torque starts at zero each transition and is not observed.
std::function<Vector(const Vector&)> real_pendulum_transition(
    const RealPendulumParams& p, double dt, int substeps = 10);

std::function<Vector(const Vector&)> ideal_pendulum_transition(
    const PendulumParams& p, double dt, int substeps = 10);

// -----------------------------------------------------------------------
// 1-D sinusoid regression task: true function A sin(w x + phase) + offset +
// slope x; the simulator family only spans A' sin(w' x), so the slope term
// is a structural gap.

struct SinusoidTask {
  double amplitude = 2.0;
  double frequency = 1.0;
  double phase = 0.0;
  double offset = 0.0;
  double slope = 0.5;
  double sim_amplitude_lo = 0.5, sim_amplitude_hi = 3.0;
  double sim_frequency_lo = 0.5, sim_frequency_hi = 2.0;

  double truth(double x) const;
  std::function<Vector(const Vector&)> truth_fn() const;
  DomainModel sim_family() const;
  ParamPrior sim_param_prior() const;
};

// -----------------------------------------------------------------------
// Datasets of noisy transitions / evaluations.

struct Dataset {
  Matrix inputs;   // m x d_x
  Matrix targets;  // m x d_y
  double noise_std = 0.0;

  int size() const { return static_cast<int>(inputs.rows()); }
};

struct DataSplit {
  Dataset train;
  Dataset test;
};

DataSplit generate_dataset(const std::function<Vector(const Vector&)>& system,
                           const MeasurementSampler& sampler, int n,
                           double noise_std, Rng& rng, int n_test);

void save_dataset_csv(const Dataset& data, const std::string& csv_path,
                      const nlohmann::json& sidecar);
Dataset load_dataset_csv(const std::string& csv_path);

}  // namespace simfsvgd
