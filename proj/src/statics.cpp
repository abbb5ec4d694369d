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

#include "twinarm/statics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace twinarm::statics {

namespace {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using arm::kTendonsPerSection;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

double sign(double v) { return v > 0.0 ? 1.0 : -1.0; }

// Generalized tendon direction of tendon j in section i: R (cos phi, sin phi).
Vec2 tendon_direction(const TendonLayout& layout, std::size_t i, std::size_t j) {
  const double r = layout.pitch_radius[i];
  return {r * std::cos(layout.azimuth[i][j]), r * std::sin(layout.azimuth[i][j])};
}

// Generalized forces of all non-tendon sources, stacked per section.
Vec6 passive_generalized(const ArmConfig& config, std::span<const ExternalLoad> loads,
                         const ArmGeometry& geom, const MomentHook& extra) {
  const SectionMoments g = gravity_moment(config, geom);
  const SectionMoments k = elastic_moment(config, geom);
  const SectionMoments l = load_moment(config, loads, geom);
  SectionMoments h = zero_moments();
  if (extra) h = extra(config);
  Vec6 q;
  for (std::size_t i = 0; i < kSections; ++i) {
    q.segment<2>(2 * i) = to_generalized(g[i] + k[i] + l[i] + h[i]);
  }
  return q;
}

Vec6 tendon_generalized(const TensionVector& tensions, const TendonLayout& layout) {
  Vec6 q = Vec6::Zero();
  for (std::size_t i = 0; i < kSections; ++i) {
    for (std::size_t j = 0; j < kTendonsPerSection; ++j) {
      q.segment<2>(2 * i) += tensions(i, j) * tendon_direction(layout, i, j);
    }
  }
  return q;
}

// Holdable-set margin of one section: the tendon moments reachable with
// tensions in [lower_j, upper_j] form a zonotope; returns the signed distance
// from `demand` to its boundary (positive inside).
double section_margin(const Vec2& demand, const std::array<TensionBounds, 3>& bounds,
                      const TendonLayout& layout, std::size_t i) {
  Vec2 center = Vec2::Zero();
  std::array<Vec2, 3> half{};
  std::array<Vec2, 3> dir{};
  for (std::size_t j = 0; j < 3; ++j) {
    dir[j] = tendon_direction(layout, i, j);
    center += 0.5 * (bounds[j].lower + bounds[j].upper) * dir[j];
    half[j] = 0.5 * (bounds[j].upper - bounds[j].lower) * dir[j];
  }
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < 3; ++j) {
    const Vec2 normal = Vec2(-dir[j].y(), dir[j].x()).normalized();
    double support = 0.0;
    for (std::size_t k = 0; k < 3; ++k) support += std::abs(normal.dot(half[k]));
    margin = std::min(margin, support - std::abs(normal.dot(demand - center)));
  }
  return margin;
}

// Minimum-norm tensions producing `demand` in section i; any multiple of
// (1, 1, 1) may be added without changing the moment.
std::array<double, 3> particular_tensions(const Vec2& demand, const TendonLayout& layout, std::size_t i) {
  // sum_j w_j w_j^T = 1.5 R^2 I for tendons 120 deg apart.
  const double r = layout.pitch_radius[i];
  std::array<double, 3> f{};
  for (std::size_t j = 0; j < 3; ++j) {
    f[j] = tendon_direction(layout, i, j).dot(demand) / (1.5 * r * r);
  }
  return f;
}

// Shift t minimizing sum_j (f_j + t - clamp(f_j + t, lo_j, hi_j))^2. The
// derivative is monotone in t, so bisection finds a minimizer.
double least_excess_shift(const std::array<double, 3>& f, const std::array<TensionBounds, 3>& b) {
  auto slope = [&](double t) {
    double s = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      const double v = f[j] + t;
      s += v - std::clamp(v, b[j].lower, b[j].upper);
    }
    return s;
  };
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t j = 0; j < 3; ++j) {
    lo = std::min(lo, b[j].lower - f[j]);
    hi = std::max(hi, b[j].upper - f[j]);
  }
  lo -= 1.0;
  hi += 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo) + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (slope(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Vec6 clamp_bend(Vec6 u, double max_bend) {
  for (std::size_t i = 0; i < kSections; ++i) {
    const double n = u.segment<2>(2 * i).norm();
    if (n > max_bend) u.segment<2>(2 * i) *= max_bend / n;
  }
  return u;
}

double max_section_norm(const Vec6& r) {
  double m = 0.0;
  for (std::size_t i = 0; i < kSections; ++i) m = std::max(m, r.segment<2>(2 * i).norm());
  return m;
}

}  // namespace

void FrictionParams::validate() const {
  require(mu_s >= mu_k && mu_k >= 0.0, "friction requires mu_s >= mu_k >= 0");
  require(alpha >= 0.0 && alpha <= 1.0 && beta >= 0.0 && beta <= 1.0, "alpha and beta must be in [0, 1]");
  require(k_act > 0.0 && c_act >= 0.0, "actuation requires k_act > 0 and C_act >= 0");
  require(k_kf >= 0.0 && c_kf >= 0.0, "kinetic reformulation requires k_kf, C_kf >= 0");
  require(mu_s * alpha < 1.0 && mu_k < 1.0, "friction coefficients too large for a finite tension range");
}

double actuation_force(double current, const FrictionParams& p) {
  if (!(current >= 0.0)) throw std::invalid_argument("motor current must be non-negative");
  return p.k_act * current + p.c_act;
}

double static_friction_limit(double tension, double actuation, const FrictionParams& p) {
  require(tension >= 0.0 && actuation >= 0.0, "tension and actuation force must be non-negative");
  return p.mu_s * (p.alpha * tension + p.beta * actuation);
}

double kinetic_friction(double tension, double actuation, double velocity, const FrictionParams& p) {
  if (velocity == 0.0) throw std::domain_error("kinetic friction needs a moving tendon");
  require(tension >= 0.0 && actuation >= 0.0, "tension and actuation force must be non-negative");
  return p.mu_k * (tension + actuation) * sign(velocity);
}

double kinetic_friction_from_current(double current, double velocity, const FrictionParams& p) {
  if (velocity == 0.0) throw std::domain_error("kinetic friction needs a moving tendon");
  require(current >= 0.0, "motor current must be non-negative");
  return (p.k_kf * current + p.c_kf) * sign(velocity);
}

KineticReformulation kinetic_reformulation(const FrictionParams& p, TendonMotion motion) {
  // F_k = mu_k (F_T + F_act) with F_T = F_act + s F_k gives
  // F_k = 2 mu_k F_act / (1 - s mu_k), affine in the current.
  const double s = motion == TendonMotion::PayOut ? 1.0 : -1.0;
  const double gain = 2.0 * p.mu_k / (1.0 - s * p.mu_k);
  return {gain * p.k_act, gain * p.c_act};
}

TensionBounds static_tension_bounds(double actuation, const FrictionParams& p) {
  const double ms = p.mu_s;
  return {std::max(0.0, actuation * (1.0 - ms * p.beta) / (1.0 + ms * p.alpha)),
          actuation * (1.0 + ms * p.beta) / (1.0 - ms * p.alpha)};
}

TensionBounds kinetic_tension_bounds(double actuation, const FrictionParams& p) {
  return {actuation * (1.0 - p.mu_k) / (1.0 + p.mu_k), actuation * (1.0 + p.mu_k) / (1.0 - p.mu_k)};
}

SectionMoments tendon_moment(const ArmConfig&, const TensionVector& tensions, const TendonLayout& layout) {
  SectionMoments m = zero_moments();
  for (std::size_t i = 0; i < kSections; ++i) {
    m[i].setZero();
    for (std::size_t j = 0; j < kTendonsPerSection; ++j) {
      require(tensions(i, j) >= 0.0, "tendon tension must be non-negative");
      const double r = layout.pitch_radius[i];
      m[i] += tensions(i, j) * Vec2(std::sin(layout.azimuth[i][j]) * r, std::cos(layout.azimuth[i][j]) * r);
    }
  }
  return m;
}

SectionMoments gravity_moment(const ArmConfig& config, const ArmGeometry& geom) {
  Vec6 q = Vec6::Zero();
  double start = 0.0;
  for (std::size_t i = 0; i < kSections; ++i) {
    if (geom.mass[i] > 0.0) {
      const auto pj = arm::point_jacobian(config, geom, start + 0.5 * geom.length[i]);
      q += pj.jacobian.transpose() * (geom.mass[i] * geom.gravity);
    }
    start += geom.length[i];
  }
  if (geom.tip_mass > 0.0) {
    const auto pj = arm::point_jacobian(config, geom, geom.total_length());
    q += pj.jacobian.transpose() * (geom.tip_mass * geom.gravity);
  }
  SectionMoments m = zero_moments();
  for (std::size_t i = 0; i < kSections; ++i) m[i] = from_generalized(q.segment<2>(2 * i));
  return m;
}

SectionMoments elastic_moment(const ArmConfig& config, const ArmGeometry& geom) {
  SectionMoments m = zero_moments();
  for (std::size_t i = 0; i < kSections; ++i) {
    m[i] = from_generalized(-geom.bend_stiffness[i] * config.sections[i].cartesian());
  }
  return m;
}

SectionMoments load_moment(const ArmConfig& config, std::span<const ExternalLoad> loads,
                           const ArmGeometry& geom) {
  Vec6 q = Vec6::Zero();
  for (const auto& load : loads) {
    require(load.arc_length >= 0.0 && load.arc_length <= geom.total_length() * (1.0 + 1e-12),
            "load application point outside the arm");
    const auto pj = arm::point_jacobian(config, geom, load.arc_length);
    q += pj.jacobian.transpose() * load.force;
  }
  SectionMoments m = zero_moments();
  for (std::size_t i = 0; i < kSections; ++i) m[i] = from_generalized(q.segment<2>(2 * i));
  return m;
}

double elastic_energy(const ArmConfig& config, const ArmGeometry& geom) {
  double e = 0.0;
  for (std::size_t i = 0; i < kSections; ++i) {
    const double th = config.sections[i].bend;
    e += 0.5 * geom.bend_stiffness[i] * th * th;
  }
  return e;
}

SectionMoments residual_moment(const ArmConfig& config, std::span<const ExternalLoad> loads,
                               const TensionVector& tensions, const ArmGeometry& geom,
                               const MomentHook& extra) {
  const SectionMoments t = tendon_moment(config, tensions, geom.layout);
  const SectionMoments g = gravity_moment(config, geom);
  const SectionMoments k = elastic_moment(config, geom);
  const SectionMoments l = load_moment(config, loads, geom);
  SectionMoments h = zero_moments();
  if (extra) h = extra(config);
  SectionMoments out = zero_moments();
  for (std::size_t i = 0; i < kSections; ++i) out[i] = t[i] + l[i] + g[i] + k[i] + h[i];
  return out;
}

EquilibriumResult solve_equilibrium(std::span<const ExternalLoad> loads, const ChannelStates& channels,
                                    const ArmGeometry& geom, const SolverOptions& options) {
  geom.validate();
  TensionVector tensions;
  for (std::size_t n = 0; n < kTendons; ++n) {
    require(channels[n].tension >= 0.0, "tendon tension must be non-negative");
    tensions[n] = channels[n].tension;
  }
  const Vec6 tendon_q = tendon_generalized(tensions, geom.layout);
  auto residual = [&](const Vec6& u) {
    return Vec6(tendon_q + passive_generalized(ArmConfig::from_cartesian(u), loads, geom, options.extra_moment));
  };
  auto log_line = [&](int iteration, double res, double damping) {
    if (options.diagnostics == nullptr) return;
    nlohmann::json line = {{"iteration", iteration}, {"residual", res}, {"damping", damping}};
    *options.diagnostics << line.dump() << '\n';
  };

  Vec6 u = options.initial ? options.initial->cartesian() : Vec6::Zero();
  u = clamp_bend(u, geom.max_bend);
  Vec6 r = residual(u);
  double res = max_section_norm(r);
  int iteration = 0;
  log_line(iteration, res, 1.0);

  while (res > options.tolerance && iteration < options.max_iterations) {
    ++iteration;
    Eigen::Matrix<double, 6, 6> jac;
    const double h = options.fd_step;
    for (int c = 0; c < 6; ++c) {
      Vec6 up = u, dn = u;
      up(c) += h;
      dn(c) -= h;
      jac.col(c) = (residual(up) - residual(dn)) / (2.0 * h);
    }
    const Vec6 step = -jac.colPivHouseholderQr().solve(r);

    double damping = 1.0;
    bool accepted = false;
    const double norm0 = r.norm();
    while (damping > 1e-12) {
      const Vec6 trial = clamp_bend(u + damping * step, geom.max_bend);
      const Vec6 r_trial = residual(trial);
      if (r_trial.norm() < norm0) {
        u = trial;
        r = r_trial;
        accepted = true;
        break;
      }
      damping *= 0.5;
    }
    res = max_section_norm(r);
    log_line(iteration, res, accepted ? damping : 0.0);
    if (!accepted) break;
  }

  EquilibriumResult out;
  // Iterate on exact coordinates, report the canonical form.
  for (std::size_t i = 0; i < kSections; ++i) {
    const auto sec = arm::SectionState::from_cartesian(u.segment<2>(2 * i));
    out.config.sections[i] = arm::SectionState::make(sec.bend, sec.azimuth);
  }
  for (std::size_t i = 0; i < kSections; ++i) out.residual[i] = r.segment<2>(2 * i).norm();
  out.tensions = tensions;
  out.iterations = iteration;
  out.converged = res <= options.tolerance;
  return out;
}

HoldResult hold_check(const ArmConfig& config, const CurrentVector& currents, const ArmGeometry& geom,
                      const FrictionParams& p) {
  p.validate();
  const Vec6 passive = passive_generalized(config, {}, geom, {});
  HoldResult out;
  out.held = true;
  for (std::size_t i = 0; i < kSections; ++i) {
    const Vec2 demand = -passive.segment<2>(2 * i);
    std::array<TensionBounds, 3> bounds{};
    std::array<double, 3> actuation{};
    for (std::size_t j = 0; j < 3; ++j) {
      actuation[j] = actuation_force(currents(i, j), p);
      bounds[j] = static_tension_bounds(actuation[j], p);
    }
    out.margin[i] = section_margin(demand, bounds, geom.layout, i);
    out.held = out.held && out.margin[i] >= 0.0;

    // Holding distribution: closest to the motor forces within the static
    // shift interval, then lifted so that no tendon pushes.
    const auto f = particular_tensions(demand, geom.layout, i);
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    double mean_gap = 0.0;
    double min_f = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < 3; ++j) {
      lower = std::max(lower, bounds[j].lower - f[j]);
      upper = std::min(upper, bounds[j].upper - f[j]);
      mean_gap += (actuation[j] - f[j]) / 3.0;
      min_f = std::min(min_f, f[j]);
    }
    double shift = lower <= upper ? std::clamp(mean_gap, lower, upper) : mean_gap;
    shift = std::max(shift, -min_f);
    for (std::size_t j = 0; j < 3; ++j) {
      const double t = std::max(0.0, f[j] + shift);
      out.required_tension(i, j) = t;
      out.slack[i * 3 + j] = t <= 1e-12;
    }
  }
  return out;
}

ArmState ArmState::at_rest(const ArmConfig& config, const TendonLayout& layout) {
  ArmState s;
  s.config = config;
  const TendonVector dl = arm::tendon_lengths(config, layout);
  for (std::size_t n = 0; n < kTendons; ++n) s.channels[n].displacement = dl[n];
  return s;
}

TendonVector ArmState::displacement() const {
  TendonVector dl;
  for (std::size_t n = 0; n < kTendons; ++n) dl[n] = channels[n].displacement;
  return dl;
}

CurrentVector ArmState::currents() const {
  CurrentVector c;
  for (std::size_t n = 0; n < kTendons; ++n) c[n] = channels[n].current;
  return c;
}

ArmState backdrive_step(const ArmState& state, std::span<const ExternalLoad> loads,
                        const CurrentVector& currents, double dt, const DemonstratorModel& model) {
  if (!(dt > 0.0 && dt <= 0.1)) throw std::invalid_argument("backdrive step must be in (0, 0.1] s");
  const ArmGeometry& geom = model.geometry;
  const FrictionParams& p = model.friction;
  p.validate();
  require(model.backdrive.mobility > 0.0 && model.backdrive.max_substep > 0.0,
          "backdrive mobility and substep must be positive");

  std::array<double, kTendons> actuation{};
  std::array<TensionBounds, kTendons> hold_bounds{};
  std::array<TensionBounds, kTendons> slide_bounds{};
  for (std::size_t n = 0; n < kTendons; ++n) {
    actuation[n] = actuation_force(currents[n], p);
    hold_bounds[n] = static_tension_bounds(actuation[n], p);
    slide_bounds[n] = kinetic_tension_bounds(actuation[n], p);
  }

  ArmState next = state;
  TendonVector dl = state.displacement();
  const int substeps = static_cast<int>(std::ceil(dt / model.backdrive.max_substep - 1e-9));
  const double h = dt / substeps;

  for (int step = 0; step < substeps; ++step) {
    const Vec6 passive = passive_generalized(next.config, loads, geom, model.extra_moment);
    std::array<bool, kSections> slipped{};
    ArmConfig updated = next.config;
    for (std::size_t i = 0; i < kSections; ++i) {
      const Vec2 demand = -passive.segment<2>(2 * i);
      std::array<TensionBounds, 3> hb{}, sb{};
      for (std::size_t j = 0; j < 3; ++j) {
        hb[j] = hold_bounds[i * 3 + j];
        sb[j] = slide_bounds[i * 3 + j];
      }
      const auto f = particular_tensions(demand, geom.layout, i);
      if (section_margin(demand, hb, geom.layout, i) >= 0.0) {
        // Held: tensions adopt the distribution closest to the motor forces.
        double lower = -std::numeric_limits<double>::infinity();
        double upper = std::numeric_limits<double>::infinity();
        double mean_gap = 0.0;
        for (std::size_t j = 0; j < 3; ++j) {
          lower = std::max(lower, hb[j].lower - f[j]);
          upper = std::min(upper, hb[j].upper - f[j]);
          mean_gap += (actuation[i * 3 + j] - f[j]) / 3.0;
        }
        const double shift = lower <= upper ? std::clamp(mean_gap, lower, upper) : mean_gap;
        for (std::size_t j = 0; j < 3; ++j) next.channels[i * 3 + j].tension = std::max(0.0, f[j] + shift);
        continue;
      }
      const double shift = least_excess_shift(f, sb);
      bool moved = false;
      for (std::size_t j = 0; j < 3; ++j) {
        const double wanted = f[j] + shift;
        const double carried = std::clamp(wanted, sb[j].lower, sb[j].upper);
        next.channels[i * 3 + j].tension = std::max(0.0, carried);
        const double excess = wanted - carried;
        if (excess != 0.0) {
          dl(i, j) += h * model.backdrive.mobility * excess;
          moved = true;
        }
      }
      if (!moved) continue;
      slipped[i] = true;
      // Tendons are inextensible: project onto the section's PCC shape.
      const auto inverse = arm::config_from_tendons(dl, geom.layout);
      auto sec = inverse.config.sections[i];
      sec.bend = std::min(sec.bend, geom.max_bend);
      updated.sections[i] = arm::SectionState::make(sec.bend, sec.azimuth);
    }
    if (std::none_of(slipped.begin(), slipped.end(), [](bool b) { return b; })) break;
    next.config = updated;
    const TendonVector consistent = arm::tendon_lengths(next.config, geom.layout);
    for (std::size_t i = 0; i < kSections; ++i) {
      if (!slipped[i]) continue;
      for (std::size_t j = 0; j < 3; ++j) dl(i, j) = consistent(i, j);
    }
  }

  for (std::size_t n = 0; n < kTendons; ++n) {
    auto& ch = next.channels[n];
    ch.current = currents[n];
    ch.velocity = (dl[n] - state.channels[n].displacement) / dt;
    ch.regime = ch.velocity == 0.0 ? Regime::Stuck : Regime::Slipping;
    ch.displacement = dl[n];
  }
  return next;
}

}  // namespace twinarm::statics
