// Magnetic geodesic flow of ds² = Λ(dx² + dy²) with magnetic field Ω on the
// energy level H = 1/2, in the angle form (x, y, φ) and the cotangent form
// (x, y, p₁, p₂), with classical fourth-order Runge-Kutta integration.
#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "mgflow/fields.hpp"

namespace mgflow {

inline constexpr double kLambdaFloor = 1e-8;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double wrap_angle(double phi) {
  double w = std::fmod(phi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

/// Signed angular difference in (−π, π].
inline double angle_difference(double a, double b) {
  double d = std::remainder(a - b, kTwoPi);
  if (d <= -std::numbers::pi) d += kTwoPi;
  return d;
}

class MagneticSystem {
 public:
  /// Checks metric positivity on a check grid (64×64 by default).
  MagneticSystem(Field lambda, ScalarEvaluator omega, TorusGeometry geometry = {}, int check_points = 64)
      : lambda_(std::move(lambda)), omega_(std::move(omega)), geometry_(geometry) {
    const double m = grid_min(lambda_, SamplingGrid(check_points, check_points, geometry_));
    if (!(m > kLambdaFloor)) {
      throw DomainError("conformal factor is not positive on the check grid (min " + std::to_string(m) + ")");
    }
  }

  const Field& lambda() const { return lambda_; }
  const ScalarEvaluator& omega() const { return omega_; }
  const TorusGeometry& geometry() const { return geometry_; }

  /// Λ jet at a point, raising DomainError below the positivity floor.
  Jet checked_lambda(double x, double y) const {
    const Jet l = lambda_.jet(x, y);
    if (!(l.value > kLambdaFloor)) {
      throw DomainError("conformal factor below positivity floor at (" + std::to_string(x) + ", " +
                        std::to_string(y) + ")");
    }
    return l;
  }

 private:
  Field lambda_;
  ScalarEvaluator omega_;
  TorusGeometry geometry_;
};

/// Point on the unit-energy level. x, y are coordinates on the universal
/// cover; phi is kept in [0, 2π).
struct PhaseState {
  double x = 0.0;
  double y = 0.0;
  double phi = 0.0;

  PhaseState() = default;
  PhaseState(double x_, double y_, double phi_) : x(x_), y(y_), phi(wrap_angle(phi_)) {}
};

struct CotangentState {
  double x = 0.0;
  double y = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
};

inline double hamiltonian(const MagneticSystem& sys, const CotangentState& s) {
  return (s.p1 * s.p1 + s.p2 * s.p2) / (2.0 * sys.checked_lambda(s.x, s.y).value);
}

/// p = √Λ (cos φ, sin φ).
inline CotangentState to_cotangent(const MagneticSystem& sys, const PhaseState& s) {
  const double r = std::sqrt(sys.checked_lambda(s.x, s.y).value);
  return {s.x, s.y, r * std::cos(s.phi), r * std::sin(s.phi)};
}

inline PhaseState to_phase(const CotangentState& s) { return {s.x, s.y, std::atan2(s.p2, s.p1)}; }

namespace detail {

inline std::array<double, 3> angle_rhs(const MagneticSystem& sys, double x, double y, double phi) {
  const Jet l = sys.checked_lambda(x, y);
  const double sq = std::sqrt(l.value);
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  const double w = sys.omega()(x, y);
  return {c / sq, s / sq, l.dy * c / (2.0 * l.value * sq) - l.dx * s / (2.0 * l.value * sq) - w / l.value};
}

inline std::array<double, 4> cotangent_rhs(const MagneticSystem& sys, const std::array<double, 4>& z) {
  const Jet l = sys.checked_lambda(z[0], z[1]);
  const double p2sum = z[2] * z[2] + z[3] * z[3];
  const double dHdp1 = z[2] / l.value;
  const double dHdp2 = z[3] / l.value;
  const double dHdx = -p2sum * l.dx / (2.0 * l.value * l.value);
  const double dHdy = -p2sum * l.dy / (2.0 * l.value * l.value);
  const double w = sys.omega()(z[0], z[1]);
  return {dHdp1, dHdp2, -dHdx + w * dHdp2, -dHdy - w * dHdp1};
}

}  // namespace detail

/// (ẋ, ẏ, φ̇) = (cos φ/√Λ, sin φ/√Λ, Λ_y cos φ/(2Λ√Λ) − Λ_x sin φ/(2Λ√Λ) − Ω/Λ).
inline std::array<double, 3> flow_rhs(const MagneticSystem& sys, const PhaseState& s) {
  return detail::angle_rhs(sys, s.x, s.y, s.phi);
}

/// Hamilton's equations under the magnetic bracket:
/// ẋⁱ = ∂H/∂pᵢ, ṗ₁ = −∂H/∂x + Ω ∂H/∂p₂, ṗ₂ = −∂H/∂y − Ω ∂H/∂p₁.
inline std::array<double, 4> cotangent_rhs(const MagneticSystem& sys, const CotangentState& s) {
  return detail::cotangent_rhs(sys, {s.x, s.y, s.p1, s.p2});
}

struct StepControl {
  enum class Mode { fixed, adaptive };
  Mode mode = Mode::fixed;
  double dt = 1e-2;          // fixed step, or initial step when adaptive
  double atol = 1e-10;       // step-doubling tolerance per step
  double output_dt = 1e-2;   // spacing of recorded samples
  std::size_t max_steps = 50'000'000;

  static StepControl fixed(double dt, double output_dt = 1e-2) {
    StepControl c;
    c.dt = dt;
    c.output_dt = output_dt;
    return c;
  }
  static StepControl adaptive(double atol, double output_dt = 1e-2) {
    StepControl c;
    c.mode = Mode::adaptive;
    c.atol = atol;
    c.output_dt = output_dt;
    return c;
  }
};

/// A function of the phase state monitored along trajectories.
struct Observable {
  std::string name;
  std::function<double(const PhaseState&)> fn;
};

/// Energy on the parameterized level: identically 1/2 since
/// (p₁² + p₂²)/(2Λ) = Λ(cos² φ + sin² φ)/(2Λ).
inline Observable energy_observable() {
  return {"H", [](const PhaseState&) { return 0.5; }};
}

struct Trajectory {
  std::vector<double> times;
  std::vector<PhaseState> states;
  std::vector<double> phi_unwrapped;
  std::vector<std::string> observable_names;
  std::vector<std::vector<double>> observable_values;  // [observable][sample]
  bool aborted = false;
  std::string diagnostic;
  std::size_t steps_taken = 0;

  std::size_t size() const { return times.size(); }
  const PhaseState& back() const { return states.back(); }

  /// Position reduced to the fundamental domain.
  std::pair<double, double> wrapped_position(std::size_t i, const TorusGeometry& g) const {
    auto red = [](double v, double p) {
      double w = std::fmod(v, p);
      return w < 0.0 ? w + p : w;
    };
    return {red(states[i].x, g.period_x), red(states[i].y, g.period_y)};
  }

  const std::vector<double>* observable(const std::string& name) const {
    for (std::size_t i = 0; i < observable_names.size(); ++i) {
      if (observable_names[i] == name) return &observable_values[i];
    }
    return nullptr;
  }
};

namespace detail {

template <std::size_t D>
using Vec = std::array<double, D>;

template <std::size_t D>
Vec<D> axpy(const Vec<D>& y, double h, const Vec<D>& k) {
  Vec<D> out;
  for (std::size_t i = 0; i < D; ++i) out[i] = y[i] + h * k[i];
  return out;
}

template <std::size_t D, typename Rhs>
Vec<D> rk4_step(const Rhs& f, const Vec<D>& y, double h) {
  const Vec<D> k1 = f(y);
  const Vec<D> k2 = f(axpy(y, h / 2.0, k1));
  const Vec<D> k3 = f(axpy(y, h / 2.0, k2));
  const Vec<D> k4 = f(axpy(y, h, k3));
  Vec<D> out;
  for (std::size_t i = 0; i < D; ++i) out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

/// Drives rk4_step from 0 to t_end and calls sample(t, y) at t = 0, at the
/// first step end on or after each multiple of output_dt, and at t_end.
/// Fixed mode keeps the step exactly dt except for a shortened final step.
/// Exceptions from the right-hand side propagate after the samples recorded
/// so far.
template <std::size_t D, typename Rhs, typename Sample>
std::size_t march(const Rhs& f, Vec<D> y, double t_end, const StepControl& ctl, Sample&& sample) {
  double t = 0.0;
  sample(t, y);
  double next_out = ctl.output_dt;
  const double eps = 1e-12 * std::max(1.0, t_end);
  double h = std::min(ctl.dt, t_end);
  std::size_t steps = 0;
  while (t < t_end - eps) {
    if (++steps > ctl.max_steps) throw DomainError("step budget exhausted");
    h = std::min(h, t_end - t);
    if (ctl.mode == StepControl::Mode::fixed) {
      y = rk4_step<D>(f, y, h);
      t += h;
    } else {
      const Vec<D> full = rk4_step<D>(f, y, h);
      const Vec<D> half = rk4_step<D>(f, rk4_step<D>(f, y, h / 2.0), h / 2.0);
      double err = 0.0;
      for (std::size_t i = 0; i < D; ++i) err = std::max(err, std::abs(half[i] - full[i]) / 15.0);
      if (err > ctl.atol && h > 1e-14) {
        h *= std::max(0.1, 0.9 * std::pow(ctl.atol / err, 0.2));
        continue;
      }
      for (std::size_t i = 0; i < D; ++i) y[i] = half[i] + (half[i] - full[i]) / 15.0;
      t += h;
      const double grow = err > 0.0 ? 0.9 * std::pow(ctl.atol / err, 0.2) : 4.0;
      h *= std::clamp(grow, 0.2, 4.0);
      h = std::min(h, ctl.output_dt > 0.0 ? std::max(ctl.output_dt, 1e-3) : h);
    }
    const bool last = t >= t_end - eps;
    if (last || t >= next_out - eps) {
      sample(last ? t_end : t, y);
      while (next_out <= t + eps) next_out += ctl.output_dt;
    }
  }
  return steps;
}

}  // namespace detail

/// Integrates the angle form from state0 over [0, t_end]. If Λ drops below
/// the positivity floor the partial trajectory is returned with aborted set.
inline Trajectory integrate(const MagneticSystem& sys, const PhaseState& state0, double t_end,
                            const StepControl& ctl = {}, const std::vector<Observable>& observables = {}) {
  if (!(t_end > 0.0)) throw ArgumentError("t_end must be positive");
  if (!(ctl.dt > 0.0) || !(ctl.output_dt > 0.0) || !(ctl.atol > 0.0)) {
    throw ArgumentError("step control values must be positive");
  }
  Trajectory tr;
  std::vector<Observable> obs;
  obs.push_back(energy_observable());
  obs.insert(obs.end(), observables.begin(), observables.end());
  for (const auto& o : obs) tr.observable_names.push_back(o.name);
  tr.observable_values.resize(obs.size());

  auto rhs = [&sys](const detail::Vec<3>& z) { return detail::angle_rhs(sys, z[0], z[1], z[2]); };
  auto sample = [&](double t, const detail::Vec<3>& z) {
    const PhaseState s(z[0], z[1], z[2]);
    tr.times.push_back(t);
    tr.states.push_back(s);
    tr.phi_unwrapped.push_back(z[2]);
    for (std::size_t i = 0; i < obs.size(); ++i) tr.observable_values[i].push_back(obs[i].fn(s));
  };
  try {
    sys.checked_lambda(state0.x, state0.y);
    tr.steps_taken = detail::march<3>(rhs, detail::Vec<3>{state0.x, state0.y, state0.phi}, t_end, ctl, sample);
  } catch (const DomainError& e) {
    tr.aborted = true;
    tr.diagnostic = e.what();
  }
  return tr;
}

struct DriftStats {
  std::string name;
  double initial = 0.0;
  double max_abs = 0.0;   // max |obs(t) − obs(0)|
  double relative = 0.0;  // max_abs / max_t |obs(t)|
};

inline std::vector<DriftStats> monitor(const Trajectory& tr, const std::vector<Observable>& observables) {
  std::vector<DriftStats> out;
  for (const auto& o : observables) {
    DriftStats d;
    d.name = o.name;
    if (tr.states.empty()) {
      out.push_back(d);
      continue;
    }
    d.initial = o.fn(tr.states.front());
    double scale = 0.0;
    for (const auto& s : tr.states) {
      const double v = o.fn(s);
      d.max_abs = std::max(d.max_abs, std::abs(v - d.initial));
      scale = std::max(scale, std::abs(v));
    }
    d.relative = scale > 0.0 ? d.max_abs / scale : d.max_abs;
    out.push_back(d);
  }
  return out;
}

struct CrosscheckResult {
  double max_position_discrepancy = 0.0;
  double max_angle_discrepancy = 0.0;
  double max_discrepancy = 0.0;
  double energy_drift_relative = 0.0;  // of the cotangent integration
  bool energy_flagged = false;
  bool aborted = false;
  std::string diagnostic;
};

/// Integrates both formulations with the same step schedule from matched
/// initial data and compares them sample by sample after mapping p → φ.
inline CrosscheckResult crosscheck_formulations(const MagneticSystem& sys, const PhaseState& state0, double t_end,
                                                const StepControl& ctl = {}, double energy_tolerance = 1e-8) {
  if (!(t_end > 0.0)) throw ArgumentError("t_end must be positive");
  CrosscheckResult res;
  std::vector<detail::Vec<3>> angle_path;
  std::vector<detail::Vec<4>> cot_path;
  try {
    detail::march<3>([&sys](const detail::Vec<3>& z) { return detail::angle_rhs(sys, z[0], z[1], z[2]); },
                     detail::Vec<3>{state0.x, state0.y, state0.phi}, t_end, ctl,
                     [&](double, const detail::Vec<3>& z) { angle_path.push_back(z); });
    const CotangentState c0 = to_cotangent(sys, state0);
    detail::march<4>([&sys](const detail::Vec<4>& z) { return detail::cotangent_rhs(sys, z); },
                     detail::Vec<4>{c0.x, c0.y, c0.p1, c0.p2}, t_end, ctl,
                     [&](double, const detail::Vec<4>& z) { cot_path.push_back(z); });
  } catch (const DomainError& e) {
    res.aborted = true;
    res.diagnostic = e.what();
  }
  const std::size_t n = std::min(angle_path.size(), cot_path.size());
  double h0 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = angle_path[i];
    const auto& c = cot_path[i];
    const double dpos = std::max(std::abs(a[0] - c[0]), std::abs(a[1] - c[1]));
    const double dang = std::abs(angle_difference(a[2], std::atan2(c[3], c[2])));
    res.max_position_discrepancy = std::max(res.max_position_discrepancy, dpos);
    res.max_angle_discrepancy = std::max(res.max_angle_discrepancy, dang);
    const double h = hamiltonian(sys, {c[0], c[1], c[2], c[3]});
    if (i == 0) h0 = h;
    res.energy_drift_relative = std::max(res.energy_drift_relative, std::abs(h - h0) / std::abs(h0));
  }
  res.max_discrepancy = std::max(res.max_position_discrepancy, res.max_angle_discrepancy);
  res.energy_flagged = res.energy_drift_relative > energy_tolerance;
  return res;
}

/// Closed-form angle-form solution for Λ ≡ 1 and Ω ≡ B (straight lines when
/// B = 0): φ = φ₀ − Bt, x = x₀ + (sin φ₀ − sin φ)/B, y = y₀ + (cos φ − cos φ₀)/B.
/// The returned phi is unwrapped.
inline std::array<double, 3> uniform_field_solution(const PhaseState& s0, double B, double t) {
  const double phi = s0.phi - B * t;
  if (B == 0.0) return {s0.x + t * std::cos(s0.phi), s0.y + t * std::sin(s0.phi), s0.phi};
  return {s0.x + (std::sin(s0.phi) - std::sin(phi)) / B, s0.y + (std::cos(phi) - std::cos(s0.phi)) / B, phi};
}

}  // namespace mgflow
