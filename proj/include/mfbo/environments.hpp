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

// Closed-loop simulators for the three case studies.
//
// Level 2 is the clean system. Level 1 degrades what the controller
// observes (sensor noise or rounding); the true state always drives the
// dynamics, so the trajectory records the physical state.

#ifndef MFBO_ENVIRONMENTS_HPP_
#define MFBO_ENVIRONMENTS_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "mfbo/common.hpp"
#include "mfbo/robustness.hpp"

namespace mfbo {

struct FidelityScenario {
  enum class Kind { kSensorNoise, kRounding };

  Kind kind = Kind::kRounding;
  // Per observation component; empty selects the case default (1% of each
  // signal's spec-relevant range).
  std::vector<double> noise_std;
  int decimals = 2;

  static FidelityScenario sensor_noise(std::vector<double> stds = {});
  static FidelityScenario rounding(int decimals = 2);
  void validate() const;
};

std::string_view to_string(FidelityScenario::Kind k);
FidelityScenario::Kind parse_scenario(std::string_view name);  // throws ConfigError

// Half-away-from-zero rounding to `decimals` places.
double round_half_away(double x, int decimals);

struct CartPoleGains {
  double k_x = 0.5;
  double k_v = 1.0;
  double k_theta = 12.0;
  double k_theta_dot = 2.0;
};

struct MountainCarGains {
  double speed_cap = 0.036;   // reverse power above this (predicted) speed
  double lookahead = 3.0;     // steps of downhill gravity added to the speed
  double brake_zone = 0.10;   // distance before the goal where braking starts
  double goal_speed = 0.02;   // speed allowed inside the brake zone
};

struct LanderGains {
  double k_x = 0.5;           // target tilt per world unit of horizontal offset
  double k_vx = 0.20;         // target tilt per unit of horizontal speed
  double max_tilt = 0.4;
  double k_angle = 1.0;
  double k_angle_rate = 4.0;
  double k_hover = 0.5;
  double k_descent = 0.5;
  double threshold = 0.05;
};

struct ControllerGains {
  CartPoleGains cartpole;
  MountainCarGains mountaincar;
  LanderGains lander;
};

struct ClosedLoopSystem {
  CaseId case_id = CaseId::kCartPole;
  double dt = 0.02;
  int max_steps = 400;
  EnvBox box;
  FidelityScenario scenario;
  ControllerGains gains;
};

// Default system for a case: box, dt, episode length, gains.
ClosedLoopSystem make_system(CaseId c, FidelityScenario scenario = {});

EnvBox default_box(CaseId c);
int default_max_steps(CaseId c);
std::vector<double> default_noise_std(CaseId c);
std::vector<std::string> signal_names(CaseId c);
// Number of leading trajectory signals the controller observes.
int observation_size(CaseId c);

// --- cart-pole -----------------------------------------------------------

using CartPoleState = std::array<double, 4>;  // x, v, theta, theta_dot

struct CartPoleParams {
  double pole_mass = 0.1;
  double pole_length = 0.5;  // half-length, as in the classic formulation
  double force_mag = 10.0;
};

inline constexpr double kCartMass = 1.0;
inline constexpr double kGravity = 9.8;

// `force` is the signed force applied to the cart.
CartPoleState cartpole_step(const CartPoleState& s, double force, const CartPoleParams& p,
                            double dt);

// --- mountain car --------------------------------------------------------

using MountainCarState = std::array<double, 2>;  // x, v

struct MountainCarParams {
  double goal_x = 0.45;
  double max_speed = 0.07;
  double max_power = 0.0015;
};

inline constexpr double kMountainCarMinX = -1.2;
inline constexpr double kMountainCarMaxX = 0.6;

// `action` is clipped to [-1, 1].
MountainCarState mountaincar_step(const MountainCarState& s, double action,
                                  const MountainCarParams& p);

// --- lander --------------------------------------------------------------

// x, y, vx, vy (world units), theta, theta_dot, left_contact, right_contact
using LanderState = std::array<double, 8>;

enum class LanderAction { kNoop = 0, kLeft = 1, kMain = 2, kRight = 3 };

struct LanderPhysics {
  double gravity = 1.6;
  double main_accel = 3.2;
  double side_angular_accel = 0.6;
  double side_lateral_accel = 0.15;
  double world_half_width = 40.0;  // normalizes the observed x coordinate
  double nominal_height = 10.0;
};

inline constexpr LanderPhysics kLanderPhysics{};

LanderState lander_step(const LanderState& s, LanderAction a, double dt);

// --- closed loop ---------------------------------------------------------

// Controller output: cart-pole push direction (+1/-1), mountain-car power in
// [-1, 1], or a LanderAction cast to double.
double scripted_controller(CaseId c, std::span<const double> observation,
                           const ControllerGains& gains);

// Physical initial state from a configuration. Throws DomainError if `e`
// is outside the case's default box.
std::vector<double> initial_state(CaseId c, std::span<const double> e);

class DivergedTrajectoryError : public std::runtime_error {
 public:
  DivergedTrajectoryError(const std::string& what, Trajectory partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

// Pure function of (system, e, level, run_seed). Level 1 is the degraded
// simulator, level 2 the clean one.
Trajectory simulate(const ClosedLoopSystem& system, std::span<const double> e, int level,
                    std::uint64_t run_seed);

}  // namespace mfbo

#endif  // MFBO_ENVIRONMENTS_HPP_
