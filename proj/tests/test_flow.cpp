#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "mgflow/ansatz.hpp"
#include "mgflow/flow.hpp"

namespace mgflow {
namespace {

constexpr double kPi = std::numbers::pi;

MagneticSystem flat(double B) { return MagneticSystem(Field::constant(1.0), ScalarEvaluator(Field::constant(B))); }

// Λ = 2 + cos y
Field two_plus_cos_y() { return make_trig_field({{0, 0, {2.0, 0.0}}, {0, 1, {0.5, 0.0}}}); }

TEST(FlowRhs, DirectSubstitution) {
  auto r = flow_rhs(flat(0.0), PhaseState(0.0, 0.0, 0.0));
  EXPECT_DOUBLE_EQ(r[0], 1.0);
  EXPECT_DOUBLE_EQ(r[1], 0.0);
  EXPECT_DOUBLE_EQ(r[2], 0.0);

  r = flow_rhs(flat(0.5), PhaseState(0.0, 0.0, kPi / 2));
  EXPECT_NEAR(r[0], 0.0, 1e-16);
  EXPECT_DOUBLE_EQ(r[1], 1.0);
  EXPECT_DOUBLE_EQ(r[2], -0.5);

  const MagneticSystem sys(two_plus_cos_y(), ScalarEvaluator(Field::constant(0.0)));
  r = flow_rhs(sys, PhaseState(0.0, 0.0, 0.0));
  EXPECT_NEAR(r[0], 1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(r[1], 0.0, 1e-15);
  EXPECT_NEAR(r[2], 0.0, 1e-15);

  // Symbolic oracle at a generic point: Λ_y = −sin y, Λ_x = 0.
  const double y = 1.1, phi = 0.7, L = 2.0 + std::cos(y), Ly = -std::sin(y);
  r = flow_rhs(sys, PhaseState(0.3, y, phi));
  EXPECT_NEAR(r[2], Ly * std::cos(phi) / (2 * L * std::sqrt(L)), 1e-15);
}

TEST(FlowRhs, NonpositiveLambdaIsDomainError) {
  const Field lam = affine_field(1.0, -0.1, 0.0);  // vanishes at x = 10
  const MagneticSystem sys(lam, ScalarEvaluator(Field::constant(0.0)));
  EXPECT_THROW(flow_rhs(sys, PhaseState(12.0, 0.0, 0.0)), DomainError);
  EXPECT_THROW(cotangent_rhs(sys, CotangentState{12.0, 0.0, 1.0, 0.0}), DomainError);
  EXPECT_THROW(MagneticSystem(Field::constant(0.0), ScalarEvaluator()), DomainError);
}

TEST(CotangentRhs, DirectSubstitution) {
  auto r = cotangent_rhs(flat(0.0), CotangentState{0.0, 0.0, 1.0, 0.0});
  EXPECT_DOUBLE_EQ(r[0], 1.0);
  EXPECT_DOUBLE_EQ(r[1], 0.0);
  EXPECT_DOUBLE_EQ(r[2], 0.0);
  EXPECT_DOUBLE_EQ(r[3], 0.0);

  const double B = 0.8;
  r = cotangent_rhs(flat(B), CotangentState{0.0, 0.0, 0.3, -0.4});
  EXPECT_DOUBLE_EQ(r[2], B * -0.4);
  EXPECT_DOUBLE_EQ(r[3], -B * 0.3);

  const MagneticSystem sys(two_plus_cos_y(), ScalarEvaluator(Field::constant(0.0)));
  r = cotangent_rhs(sys, CotangentState{0.0, kPi / 2, 1.0, 0.0});
  EXPECT_NEAR(r[3], -0.125, 1e-15);
  EXPECT_NEAR(r[2], 0.0, 1e-15);
}

TEST(Integrate, StraightLine) {
  const Trajectory tr = integrate(flat(0.0), PhaseState(0, 0, 0), 1.0);
  ASSERT_FALSE(tr.aborted);
  EXPECT_NEAR(tr.back().x, 1.0, 1e-12);
  EXPECT_NEAR(tr.back().y, 0.0, 1e-12);
  EXPECT_NEAR(tr.back().phi, 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(tr.times.back(), 1.0);
  for (std::size_t i = 1; i < tr.size(); ++i) EXPECT_GT(tr.times[i], tr.times[i - 1]);
  EXPECT_EQ(tr.size(), 101u);
}

TEST(Integrate, CircularMotionClosedForm) {
  const Trajectory tr = integrate(flat(1.0), PhaseState(0, 0, 0), kPi);
  ASSERT_FALSE(tr.aborted);
  EXPECT_NEAR(tr.back().x, 0.0, 1e-9);
  EXPECT_NEAR(tr.back().y, -2.0, 1e-9);
  EXPECT_NEAR(std::abs(angle_difference(tr.back().phi, kPi)), 0.0, 1e-9);
  EXPECT_NEAR(tr.phi_unwrapped.back(), -kPi, 1e-12);
  // Every sample against x = sin t, y = cos t − 1.
  for (std::size_t i = 0; i < tr.size(); ++i) {
    EXPECT_NEAR(tr.states[i].x, std::sin(tr.times[i]), 1e-9);
    EXPECT_NEAR(tr.states[i].y, std::cos(tr.times[i]) - 1.0, 1e-9);
  }
}

TEST(Integrate, FourthOrderConvergence) {
  const MagneticSystem sys = flat(1.0);
  const PhaseState s0(0.2, -0.1, 0.4);
  const double T = 3.0;
  auto err = [&](double dt) {
    const Trajectory tr = integrate(sys, s0, T, StepControl::fixed(dt, T));
    const auto ref = uniform_field_solution(s0, 1.0, T);
    return std::max({std::abs(tr.back().x - ref[0]), std::abs(tr.back().y - ref[1]),
                     std::abs(angle_difference(tr.back().phi, ref[2]))});
  };
  double prev = err(0.3);
  for (double dt : {0.15, 0.075, 0.0375}) {
    const double e = err(dt);
    EXPECT_GE(prev / e, 12.0) << "dt=" << dt;
    EXPECT_LE(prev / e, 20.0) << "dt=" << dt;
    prev = e;
  }
}

TEST(Integrate, AdaptiveStepDoubling) {
  const MagneticSystem sys = flat(1.0);
  const PhaseState s0(0.0, 0.0, 0.0);
  const Trajectory tr = integrate(sys, s0, 10.0, StepControl::adaptive(1e-10, 0.5));
  ASSERT_FALSE(tr.aborted);
  const auto ref = uniform_field_solution(s0, 1.0, 10.0);
  EXPECT_NEAR(tr.back().x, ref[0], 1e-8);
  EXPECT_NEAR(tr.back().y, ref[1], 1e-8);
  EXPECT_DOUBLE_EQ(tr.times.back(), 10.0);
}

TEST(Integrate, AbortsBelowPositivityFloor) {
  const MagneticSystem sys(affine_field(1.0, -0.1, 0.0), ScalarEvaluator(Field::constant(0.0)));
  const Trajectory tr = integrate(sys, PhaseState(0, 0, 0), 20.0);
  EXPECT_TRUE(tr.aborted);
  EXPECT_FALSE(tr.diagnostic.empty());
  EXPECT_GT(tr.size(), 10u);
  EXPECT_LT(tr.times.back(), 10.0);
}

TEST(Integrate, RejectsBadArguments) {
  EXPECT_THROW(integrate(flat(0.0), PhaseState(), 0.0), ArgumentError);
  EXPECT_THROW(integrate(flat(0.0), PhaseState(), 1.0, StepControl::fixed(-1.0)), ArgumentError);
}

TEST(Monitor, EnergyIsExactOnTheLevel) {
  const MagneticSystem sys(two_plus_cos_y(), ScalarEvaluator(Field::constant(0.3)));
  const Trajectory tr = integrate(sys, PhaseState(0.1, 0.2, 1.0), 5.0);
  const auto d = monitor(tr, {energy_observable()});
  EXPECT_EQ(d[0].max_abs, 0.0);
}

TEST(Monitor, UniformFieldIntegralAndControl) {
  const double B = 1.0;
  const MagneticSystem sys = flat(B);
  const Observable F{"F", [B](const PhaseState& s) { return -2 * B * s.y + 2 * std::cos(s.phi); }};
  const Observable control{"control", [](const PhaseState& s) { return s.y + std::cos(s.phi); }};
  const Trajectory tr = integrate(sys, PhaseState(0.3, 0.1, 0.5), 100.0);
  const auto d = monitor(tr, {F, control});
  EXPECT_LT(d[0].relative, 1e-8);
  EXPECT_GT(d[1].max_abs, 1e-2);
}

TEST(Crosscheck, FormulationsAgree) {
  EXPECT_LT(crosscheck_formulations(flat(0.0), PhaseState(0.1, 0.2, 0.3), 10.0).max_discrepancy, 1e-10);
  EXPECT_LT(crosscheck_formulations(flat(1.0), PhaseState(0.1, 0.2, 0.3), 10.0).max_discrepancy, 1e-8);
  const auto fam = build_linear_family(two_plus_cos_y(), make_trig_field({{0, 1, {0.0, -0.05}}}));
  const auto res = crosscheck_formulations(fam.system, PhaseState(0.1, 0.2, 0.3), 10.0);
  EXPECT_LT(res.max_discrepancy, 1e-7);
  EXPECT_FALSE(res.energy_flagged);
}

TEST(Crosscheck, CotangentEnergyDrift) {
  const MagneticSystem sys(two_plus_cos_y(), ScalarEvaluator(make_trig_field({{1, 1, {0.1, 0.05}}})));
  const auto res = crosscheck_formulations(sys, PhaseState(0.0, 0.5, 1.0), 100.0);
  EXPECT_LT(res.energy_drift_relative, 1e-8);
  EXPECT_FALSE(res.aborted);
}

TEST(Integrate, ReversibleUnderFieldFlip) {
  // Running the flow of (Λ, −Ω) from (x(T), y(T), φ(T) + π) retraces the path.
  const Field lam = two_plus_cos_y();
  const Field om = make_trig_field({{1, 0, {0.2, 0.0}}, {0, 0, {0.3, 0.0}}});
  const MagneticSystem fwd(lam, ScalarEvaluator(om));
  const MagneticSystem bwd(lam, ScalarEvaluator((-1.0) * om));
  const PhaseState s0(0.4, -0.3, 2.0);
  const double T = 5.0;
  const Trajectory a = integrate(fwd, s0, T);
  const Trajectory a2 = integrate(fwd, s0, T, StepControl::fixed(5e-3));
  const double one_way = std::max({std::abs(a.back().x - a2.back().x), std::abs(a.back().y - a2.back().y),
                                   std::abs(angle_difference(a.back().phi, a2.back().phi))});
  const Trajectory b = integrate(bwd, PhaseState(a.back().x, a.back().y, a.back().phi + kPi), T);
  const double back = std::max({std::abs(b.back().x - s0.x), std::abs(b.back().y - s0.y),
                                std::abs(angle_difference(b.back().phi, s0.phi + kPi))});
  EXPECT_LT(back, 10.0 * std::max(one_way, 1e-14));
}

TEST(Integrate, UnitSpeedOnFlatMetric) {
  const MagneticSystem sys(Field::constant(1.0), ScalarEvaluator(make_trig_field({{1, 2, {0.4, 0.1}}})));
  const Trajectory tr = integrate(sys, PhaseState(0, 0, 1.0), 10.0);
  for (const auto& s : tr.states) {
    const auto r = flow_rhs(sys, s);
    EXPECT_NEAR(std::hypot(r[0], r[1]), 1.0, 1e-15);
  }
}

TEST(PhaseState, AngleWrapping) {
  EXPECT_NEAR(PhaseState(0, 0, -kPi / 2).phi, 1.5 * kPi, 1e-15);
  EXPECT_NEAR(PhaseState(0, 0, 5 * kPi).phi, kPi, 1e-14);
  EXPECT_GE(PhaseState(0, 0, -1e-300).phi, 0.0);
  EXPECT_LT(PhaseState(0, 0, -1e-300).phi, kTwoPi);
  const auto c = to_cotangent(flat(0.0), PhaseState(0, 0, 0.3));
  EXPECT_NEAR(to_phase(c).phi, 0.3, 1e-15);
  EXPECT_NEAR(hamiltonian(flat(0.0), c), 0.5, 1e-15);
}

TEST(Trajectory, WrappedPosition) {
  const Trajectory tr = integrate(flat(0.0), PhaseState(0, 0, kPi), 7.0);
  const auto [x, y] = tr.wrapped_position(tr.size() - 1, TorusGeometry{});
  EXPECT_NEAR(x, 2 * kTwoPi - 7.0, 1e-10);
  EXPECT_NEAR(y, 0.0, 1e-10);
  EXPECT_NEAR(tr.back().x, -7.0, 1e-10);
}

}  // namespace
}  // namespace mgflow
