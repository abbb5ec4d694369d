// Copyright 2026 The twinarm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Quasi-static balance of a tendon-driven PCC arm.
//
// Moments are per-section 2-vectors (m_s, m_c) in the section's bending
// basis, ordered like the tendon moment R F (sin phi_j, cos phi_j): m_s is
// work-conjugate to theta*sin(phi) and m_c to theta*cos(phi). With that
// pairing every moment source is a generalized force, so an equilibrium is a
// stationary point of the total potential energy.

#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>

#include "twinarm/arm_model.hpp"

namespace twinarm::statics {

using arm::ArmConfig;
using arm::ArmGeometry;
using arm::CurrentVector;
using arm::kSections;
using arm::kTendons;
using arm::TendonLayout;
using arm::TendonVector;
using arm::TensionVector;
using arm::Vec2;
using arm::Vec3;

using SectionMoments = std::array<Vec2, kSections>;

/// Eigen vectors are not zeroed by value-initialization; use this instead.
inline SectionMoments zero_moments() { return {Vec2::Zero(), Vec2::Zero(), Vec2::Zero()}; }

/// Converts a (m_s, m_c) moment to the generalized force on
/// (theta cos phi, theta sin phi), and back.
inline Vec2 to_generalized(const Vec2& m) { return {m.y(), m.x()}; }
inline Vec2 from_generalized(const Vec2& q) { return {q.y(), q.x()}; }

struct FrictionParams {
  double mu_s = 0.3;   // static coefficient
  double mu_k = 0.2;   // kinetic coefficient
  double alpha = 0.5;  // weight of tendon tension in the static limit
  double beta = 0.5;   // weight of actuation force in the static limit
  double k_act = 20.0; // N/A
  double c_act = 0.5;  // N
  // Current-based kinetic friction; defaults match the pay-out closure of
  // the default coefficients (see kinetic_reformulation).
  double k_kf = 10.0;  // N/A
  double c_kf = 0.25;  // N

  /// Throws std::invalid_argument on out-of-range coefficients. Also
  /// requires mu_s*alpha < 1 and mu_k < 1 so tension bounds stay finite.
  void validate() const;
};

double actuation_force(double current, const FrictionParams& p);
double static_friction_limit(double tension, double actuation, const FrictionParams& p);
/// mu_k (F_T + F_act) sign(velocity). velocity == 0 throws std::domain_error.
double kinetic_friction(double tension, double actuation, double velocity, const FrictionParams& p);
/// (k_kf I + C_kf) sign(velocity).
double kinetic_friction_from_current(double current, double velocity, const FrictionParams& p);

enum class TendonMotion { PayOut, ReelIn };

struct KineticReformulation {
  double k_kf = 0.0;
  double c_kf = 0.0;
};

/// Coefficients of the current-based kinetic friction that reproduce
/// mu_k (F_T + F_act) once the channel balance F_T = F_act +/- F_k closes the
/// tension. Pay-out: the arm drags the tendon out against the motor.
KineticReformulation kinetic_reformulation(const FrictionParams& p, TendonMotion motion);

/// Tension range a channel with actuation force F_act can carry.
struct TensionBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Tensions for which |F_T - F_act| <= static_friction_limit(F_T, F_act).
TensionBounds static_tension_bounds(double actuation, const FrictionParams& p);
/// Tensions of a channel sliding with kinetic friction (reel-in, pay-out).
TensionBounds kinetic_tension_bounds(double actuation, const FrictionParams& p);

enum class Regime { Stuck, Slipping };

struct TendonChannelState {
  double tension = 0.0;       // N, >= 0
  double current = 0.0;       // A, >= 0
  double velocity = 0.0;      // m/s, positive pays out
  Regime regime = Regime::Stuck;
  double displacement = 0.0;  // m, accumulated
};

using ChannelStates = std::array<TendonChannelState, kTendons>;

struct ExternalLoad {
  double arc_length = 0.0;  // m from the base
  Vec3 force = Vec3::Zero();  // N, base frame
};

SectionMoments tendon_moment(const ArmConfig& config, const TensionVector& tensions,
                             const TendonLayout& layout);
SectionMoments gravity_moment(const ArmConfig& config, const ArmGeometry& geom);
SectionMoments elastic_moment(const ArmConfig& config, const ArmGeometry& geom);
SectionMoments load_moment(const ArmConfig& config, std::span<const ExternalLoad> loads,
                           const ArmGeometry& geom);

/// 0.5 * sum k_i theta_i^2.
double elastic_energy(const ArmConfig& config, const ArmGeometry& geom);

using MomentHook = std::function<SectionMoments(const ArmConfig&)>;

struct SolverOptions {
  double tolerance = 1e-8;  // N*m per section
  int max_iterations = 200;
  double fd_step = 1e-7;
  std::optional<ArmConfig> initial;
  /// Additional moment source (e.g. a stiffness profile).
  MomentHook extra_moment;
  /// One JSON object per line: iteration, residual, damping.
  std::ostream* diagnostics = nullptr;
};

struct EquilibriumResult {
  ArmConfig config;
  std::array<double, kSections> residual{};  // N*m
  TensionVector tensions;
  int iterations = 0;
  bool converged = false;
};

/// Sum of tendon, load, gravity, elastic and hook moments per section.
SectionMoments residual_moment(const ArmConfig& config, std::span<const ExternalLoad> loads,
                               const TensionVector& tensions, const ArmGeometry& geom,
                               const MomentHook& extra = {});

/// Damped Newton iteration on the Cartesian bend coordinates.
EquilibriumResult solve_equilibrium(std::span<const ExternalLoad> loads, const ChannelStates& channels,
                                    const ArmGeometry& geom, const SolverOptions& options = {});

struct HoldResult {
  bool held = false;
  /// Signed distance (N*m) from the demanded moment to the edge of the
  /// holdable set; at zero demand it equals the inradius of that set.
  std::array<double, kSections> margin{};
  /// A non-negative tension distribution producing the demanded moment.
  TensionVector required_tension;
  /// Tendons whose required tension is clamped at zero.
  std::array<bool, kTendons> slack{};
};

HoldResult hold_check(const ArmConfig& config, const CurrentVector& currents, const ArmGeometry& geom,
                      const FrictionParams& p);

struct BackdriveParams {
  double mobility = 0.005;      // m/(N*s), slip velocity per newton of excess
  double max_substep = 0.002;   // s
};

struct ArmState {
  ArmConfig config;
  ChannelStates channels{};

  static ArmState at_rest(const ArmConfig& config, const TendonLayout& layout);
  TendonVector displacement() const;
  CurrentVector currents() const;
};

struct DemonstratorModel {
  ArmGeometry geometry = ArmGeometry::demonstrator();
  FrictionParams friction;
  BackdriveParams backdrive;
  MomentHook extra_moment;
};

/// Advances the back-drivable arm by dt in (0, 0.1] s. Sections whose
/// demanded moment lies inside the static holding set keep every tendon
/// stuck; the others slip with velocity proportional to the excess over the
/// kinetic tension range.
ArmState backdrive_step(const ArmState& state, std::span<const ExternalLoad> loads,
                        const CurrentVector& currents, double dt, const DemonstratorModel& model);

}  // namespace twinarm::statics
