// Copyright 2026 The mfbo-falsify Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mfbo/environments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mfbo/errors.hpp"
#include "mfbo/random.hpp"

namespace mfbo {

namespace {

constexpr double kDivergenceBound = 1e6;
constexpr double kCartPoleFailAngle = 12.0 * std::numbers::pi / 180.0;
constexpr double kCartPoleFailX = 2.4;

// Velocities within the deadband count as forward. The wall clamp produces
// exact zeros, which would otherwise sit on the switching edge.
constexpr double kVelocityDeadband = 1e-9;
double sign_or_plus(double v) { return v < -kVelocityDeadband ? -1.0 : 1.0; }

}  // namespace

FidelityScenario FidelityScenario::sensor_noise(std::vector<double> stds) {
  FidelityScenario s;
  s.kind = Kind::kSensorNoise;
  s.noise_std = std::move(stds);
  return s;
}

FidelityScenario FidelityScenario::rounding(int decimals) {
  FidelityScenario s;
  s.kind = Kind::kRounding;
  s.decimals = decimals;
  return s;
}

void FidelityScenario::validate() const {
  for (double s : noise_std) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("noise std must be >= 0");
  }
  if (decimals < 0) throw ConfigError("rounding decimals must be >= 0");
}

std::string_view to_string(FidelityScenario::Kind k) {
  return k == FidelityScenario::Kind::kSensorNoise ? "noise" : "rounding";
}

FidelityScenario::Kind parse_scenario(std::string_view name) {
  if (name == "noise" || name == "sensor_noise" || name == "1") {
    return FidelityScenario::Kind::kSensorNoise;
  }
  if (name == "rounding" || name == "2") return FidelityScenario::Kind::kRounding;
  throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

double round_half_away(double x, int decimals) {
  const double f = std::pow(10.0, decimals);
  return std::round(x * f) / f;
}

EnvBox default_box(CaseId c) {
  switch (c) {
    case CaseId::kCartPole:
      return EnvBox{{{"x0", -2.0, 2.0},
                     {"v0", -0.05, 0.05},
                     {"theta0", -0.2, 0.2},
                     {"theta_dot0", -0.05, 0.05},
                     {"pole_mass", 0.05, 0.15},
                     {"pole_length", 0.4, 0.6},
                     {"force_mag", 0.0, 10.0}}};
    case CaseId::kMountainCar:
      return EnvBox{{{"x0", -0.6, -0.4},
                     {"v0", -0.003, 0.003},
                     {"goal_x", 0.4, 0.6},
                     {"max_speed", 0.055, 0.075},
                     {"max_power", 0.0005, 0.0025}}};
    case CaseId::kLander:
      return EnvBox{{{"dx", -0.5, 0.5}, {"dy", 0.0, 3.0}, {"dvx", -2.0, 2.0}, {"dvy", 0.0, 2.0}}};
  }
  throw ContractViolation("unknown case");
}

int default_max_steps(CaseId c) {
  switch (c) {
    case CaseId::kCartPole:
      return 400;
    case CaseId::kMountainCar:
      return 350;
    case CaseId::kLander:
      return 600;
  }
  return 0;
}

std::vector<double> default_noise_std(CaseId c) {
  switch (c) {
    case CaseId::kCartPole:
      // x in [-1,1], momentum in [-1,1], theta in +-9 deg; theta_dot unbounded.
      return {0.02, 0.02, 0.0031416, 0.01};
    case CaseId::kMountainCar:
      // displacement tolerance 0.7 wide, velocity band 0.08 wide.
      return {0.007, 0.0008};
    case CaseId::kLander:
      return {0.002, 0.1, 0.02, 0.02, 0.015708, 0.004, 0.0, 0.0};
  }
  return {};
}

std::vector<std::string> signal_names(CaseId c) {
  switch (c) {
    case CaseId::kCartPole:
      return {"x", "v", "theta", "theta_dot", "momentum"};
    case CaseId::kMountainCar:
      return {"x", "v", "goal_gap", "displacement"};
    case CaseId::kLander:
      return {"x", "y", "vx", "vy", "theta", "theta_dot", "left_contact", "right_contact"};
  }
  return {};
}

int observation_size(CaseId c) {
  switch (c) {
    case CaseId::kCartPole:
      return 4;
    case CaseId::kMountainCar:
      return 2;
    case CaseId::kLander:
      return 8;
  }
  return 0;
}

ClosedLoopSystem make_system(CaseId c, FidelityScenario scenario) {
  ClosedLoopSystem sys;
  sys.case_id = c;
  sys.dt = 0.02;
  sys.max_steps = default_max_steps(c);
  sys.box = default_box(c);
  sys.scenario = std::move(scenario);
  return sys;
}

CartPoleState cartpole_step(const CartPoleState& s, double force, const CartPoleParams& p,
                            double dt) {
  const auto [x, v, th, th_dot] = s;
  const double total_mass = kCartMass + p.pole_mass;
  const double pml = p.pole_mass * p.pole_length;
  const double sin_t = std::sin(th);
  const double cos_t = std::cos(th);
  const double temp = (force + pml * th_dot * th_dot * sin_t) / total_mass;
  const double th_acc = (kGravity * sin_t - cos_t * temp) /
                        (p.pole_length * (4.0 / 3.0 - p.pole_mass * cos_t * cos_t / total_mass));
  const double x_acc = temp - pml * th_acc * cos_t / total_mass;
  // Semi-implicit Euler: velocities first, positions with the new velocities.
  const double v_new = v + dt * x_acc;
  const double th_dot_new = th_dot + dt * th_acc;
  return {x + dt * v_new, v_new, th + dt * th_dot_new, th_dot_new};
}

MountainCarState mountaincar_step(const MountainCarState& s, double action,
                                  const MountainCarParams& p) {
  const double a = std::clamp(action, -1.0, 1.0);
  double v = s[1] + a * p.max_power - 0.0025 * std::cos(3.0 * s[0]);
  v = std::clamp(v, -p.max_speed, p.max_speed);
  double x = std::clamp(s[0] + v, kMountainCarMinX, kMountainCarMaxX);
  if (x == kMountainCarMinX && v < 0.0) v = 0.0;
  return {x, v};
}

LanderState lander_step(const LanderState& s, LanderAction a, double dt) {
  const LanderPhysics& ph = kLanderPhysics;
  auto [x, y, vx, vy, th, th_dot, lc, rc] = s;
  const double sin_t = std::sin(th);
  const double cos_t = std::cos(th);
  double ax = 0.0;
  double ay = -ph.gravity;
  double alpha = 0.0;
  switch (a) {
    case LanderAction::kNoop:
      break;
    case LanderAction::kMain:
      ax -= sin_t * ph.main_accel;
      ay += cos_t * ph.main_accel;
      break;
    case LanderAction::kLeft:
      // Left nozzle: clockwise torque, pushes along the body's +x axis.
      alpha -= ph.side_angular_accel;
      ax += cos_t * ph.side_lateral_accel;
      ay += sin_t * ph.side_lateral_accel;
      break;
    case LanderAction::kRight:
      alpha += ph.side_angular_accel;
      ax -= cos_t * ph.side_lateral_accel;
      ay -= sin_t * ph.side_lateral_accel;
      break;
  }
  vx += ax * dt;
  vy += ay * dt;
  th_dot += alpha * dt;
  x += vx * dt;
  y += vy * dt;
  th += th_dot * dt;
  if (y <= 0.0) {
    y = 0.0;
    lc = 1.0;
    rc = 1.0;
  }
  return {x, y, vx, vy, th, th_dot, lc, rc};
}

double scripted_controller(CaseId c, std::span<const double> obs, const ControllerGains& gains) {
  if (static_cast<int>(obs.size()) != observation_size(c)) {
    throw ContractViolation("scripted_controller: observation size mismatch");
  }
  switch (c) {
    case CaseId::kCartPole: {
      const auto& g = gains.cartpole;
      const double s = g.k_x * obs[0] + g.k_v * obs[1] + g.k_theta * obs[2] + g.k_theta_dot * obs[3];
      return s > 0.0 ? 1.0 : -1.0;
    }
    case CaseId::kMountainCar: {
      // Observation carries no goal information; braking near the goal uses
      // the nominal goal region.
      const auto& g = gains.mountaincar;
      const double x = obs[0];
      const double v = obs[1];
      const double dir = sign_or_plus(v);
      const double gravity_along = -0.0025 * std::cos(3.0 * x) * dir;
      const double predicted = std::abs(v) + g.lookahead * std::max(gravity_along, 0.0);
      if (predicted > g.speed_cap) return -dir;
      if (x > 0.4 - g.brake_zone && v > g.goal_speed) return -1.0;
      return dir;
    }
    case CaseId::kLander: {
      const auto& g = gains.lander;
      const double x_world = obs[0] * kLanderPhysics.world_half_width;
      const double y = obs[1];
      const double vx = obs[2];
      const double vy = obs[3];
      const double th = obs[4];
      const double th_dot = obs[5];
      if (obs[6] > 0.5 || obs[7] > 0.5) return static_cast<double>(LanderAction::kNoop);
      const double angle_target = std::clamp(g.k_x * x_world + g.k_vx * vx, -g.max_tilt, g.max_tilt);
      const double angle_todo = g.k_angle * (angle_target - th) - g.k_angle_rate * th_dot;
      const double desired_vy = -(g.k_descent * y + 0.3);
      const double hover_todo = g.k_hover * (desired_vy - vy);
      LanderAction a = LanderAction::kNoop;
      if (hover_todo > std::abs(angle_todo) && hover_todo > g.threshold) {
        a = LanderAction::kMain;
      } else if (angle_todo > g.threshold) {
        a = LanderAction::kRight;
      } else if (angle_todo < -g.threshold) {
        a = LanderAction::kLeft;
      }
      return static_cast<double>(a);
    }
  }
  return 0.0;
}

std::vector<double> initial_state(CaseId c, std::span<const double> e) {
  const EnvBox box = default_box(c);
  if (!box.contains(e)) throw DomainError("configuration outside the uncertainty box");
  switch (c) {
    case CaseId::kCartPole:
      return {e[0], e[1], e[2], e[3]};
    case CaseId::kMountainCar:
      return {e[0], e[1]};
    case CaseId::kLander:
      return {e[0], kLanderPhysics.nominal_height + e[1], e[2], -e[3], 0.0, 0.0, 0.0, 0.0};
  }
  return {};
}

namespace {

// Physical state -> recorded signals (see signal_names()).
void write_signals(CaseId c, std::span<const double> state, std::span<const double> e,
                   double* row) {
  switch (c) {
    case CaseId::kCartPole:
      for (int i = 0; i < 4; ++i) row[i] = state[static_cast<std::size_t>(i)];
      row[4] = (kCartMass + e[4]) * state[1];
      return;
    case CaseId::kMountainCar:
      row[0] = state[0];
      row[1] = state[1];
      row[2] = state[0] - e[2];
      row[3] = state[0] - e[0];
      return;
    case CaseId::kLander:
      row[0] = state[0] / kLanderPhysics.world_half_width;
      for (int i = 1; i < 8; ++i) row[i] = state[static_cast<std::size_t>(i)];
      return;
  }
}

bool terminal(CaseId c, std::span<const double> state, std::span<const double> e) {
  switch (c) {
    case CaseId::kCartPole:
      return std::abs(state[2]) > kCartPoleFailAngle || std::abs(state[0]) > kCartPoleFailX;
    case CaseId::kMountainCar:
      return state[0] >= e[2];
    case CaseId::kLander:
      return state[6] > 0.5 || state[7] > 0.5;
  }
  return true;
}

}  // namespace

Trajectory simulate(const ClosedLoopSystem& system, std::span<const double> e, int level,
                    std::uint64_t run_seed) {
  if (level != 1 && level != 2) throw ContractViolation("simulate: level must be 1 or 2");
  if (!system.box.contains(e)) throw DomainError("configuration outside the uncertainty box");
  if (system.max_steps < 1) throw ConfigError("max_steps must be >= 1");
  system.scenario.validate();

  const CaseId c = system.case_id;
  std::vector<double> state = initial_state(c, e);
  const auto names = signal_names(c);
  const int n_sig = static_cast<int>(names.size());
  const int n_obs = observation_size(c);

  std::vector<double> noise_std;
  if (level == 1 && system.scenario.kind == FidelityScenario::Kind::kSensorNoise) {
    noise_std = system.scenario.noise_std.empty() ? default_noise_std(c) : system.scenario.noise_std;
    if (static_cast<int>(noise_std.size()) != n_obs) {
      throw ConfigError("noise_std needs one entry per observed signal");
    }
  }

  Trajectory traj;
  traj.dt = system.dt;
  traj.signal_names = names;
  traj.states.resize(system.max_steps, n_sig);
  int t = 0;
  write_signals(c, state, e, traj.states.row(0).data());

  std::vector<double> obs(static_cast<std::size_t>(n_obs));
  while (t + 1 < system.max_steps && !terminal(c, state, e)) {
    // The controller sees the signal vector, degraded at level 1.
    for (int i = 0; i < n_obs; ++i) obs[static_cast<std::size_t>(i)] = traj.states(t, i);
    if (level == 1) {
      if (system.scenario.kind == FidelityScenario::Kind::kSensorNoise) {
        Rng rng(derive_seed(run_seed, {static_cast<std::uint64_t>(t)}));
        std::normal_distribution<double> normal;
        for (int i = 0; i < n_obs; ++i) {
          const double sd = noise_std[static_cast<std::size_t>(i)];
          const double z = normal(rng);
          obs[static_cast<std::size_t>(i)] += sd * z;
        }
      } else {
        for (double& o : obs) o = round_half_away(o, system.scenario.decimals);
      }
    }
    const double action = scripted_controller(c, obs, system.gains);

    switch (c) {
      case CaseId::kCartPole: {
        const CartPoleParams p{e[4], e[5], e[6]};
        const auto next =
            cartpole_step({state[0], state[1], state[2], state[3]}, action * p.force_mag, p, system.dt);
        state.assign(next.begin(), next.end());
        break;
      }
      case CaseId::kMountainCar: {
        const MountainCarParams p{e[2], e[3], e[4]};
        const auto next = mountaincar_step({state[0], state[1]}, action, p);
        state.assign(next.begin(), next.end());
        break;
      }
      case CaseId::kLander: {
        LanderState s{};
        std::copy(state.begin(), state.end(), s.begin());
        const auto next = lander_step(s, static_cast<LanderAction>(static_cast<int>(action)), system.dt);
        state.assign(next.begin(), next.end());
        break;
      }
    }
    ++t;
    write_signals(c, state, e, traj.states.row(t).data());
    const bool blown = std::any_of(state.begin(), state.end(), [](double v) {
      return !std::isfinite(v) || std::abs(v) > kDivergenceBound;
    });
    if (blown) {
      traj.states.conservativeResize(t, Eigen::NoChange);  // drop the non-finite row
      throw DivergedTrajectoryError("trajectory diverged", std::move(traj));
    }
  }
  traj.states.conservativeResize(t + 1, Eigen::NoChange);
  return traj;
}

}  // namespace mfbo
