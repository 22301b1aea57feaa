// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include "mgflow/mgflow.hpp"
#include "test_support.hpp"

namespace {

using namespace mgflow;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using testing_support::random_field;
using testing_support::random_positive_field;
constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass;
  std::string detail;
};

LinearFamily family() {
  return build_linear_family(make_trig_field({{0, 0, {2.0, 0.0}}, {0, 1, {0.15, 0.0}}}),
                             make_trig_field({{0, 1, {0.0, -0.05}}}));
}

Ansatz flat_constant_ansatz(double B) {
  return Ansatz::normalized(Field::constant(1.0), {affine_field(0.0, 0.0, -2.0 * B)}, {});
}

char buf[512];
template <typename... A>
std::string fmt(const char* f, A... a) {
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

Outcome ac1() {
  const auto fam = family();
  const SamplingGrid grid(64, 64);
  const ScalarEvaluator w(fam.omega);
  ResidualReport all = residual_stationarity(fam.ansatz, w, grid);
  all.merge(residual_harmonics(fam.ansatz, w, grid));
  all.merge(constraint_residual(fam.ansatz, grid));
  all.merge(conservation_residuals(rescale(fam.ansatz), grid));
  const double m = all.max_sup();
  return {m < 1e-10, fmt("max sup residual %.3e over %zu equations", m, all.equations.size())};
}

Outcome ac2() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> modes(1, 5);
  std::uniform_real_distribution<double> pos(0.0, 2 * kPi);
  double worst = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    const int N = 1 + draw % 4;
    std::vector<Field> u, v;
    for (int k = 0; k < N; ++k) u.push_back(random_field(rng, modes(rng)));
    for (int k = 1; k < N; ++k) v.push_back(random_field(rng, modes(rng)));
    const Ansatz a = Ansatz::normalized(random_positive_field(rng), u, v);
    const auto raw = omega_raw(a);
    const auto res = omega_rescaled(rescale(a));
    for (int i = 0; i < 50; ++i) {
      const double x = pos(rng), y = pos(rng);
      worst = std::max(worst, std::abs(raw(x, y) - res(x, y)));
    }
  }
  return {worst < 1e-12, fmt("max |omega_raw - omega_rescaled| = %.3e", worst)};
}

Outcome ac3() {
  std::mt19937_64 rng(3033);
  std::uniform_real_distribution<double> pos(0.0, 2 * kPi);
  double worst = 0.0;
  for (int N = 2; N <= 4; ++N) {
    for (int draw = 0; draw < 10; ++draw) {
      const Field psi = random_field(rng);
      RescaledAnsatz r;
      r.degree = N;
      r.lambda = random_positive_field(rng);
      for (int k = 0; k < N - 1; ++k) {
        r.f.push_back(random_field(rng));
        r.g.push_back(k == 0 ? Field() : random_field(rng));
      }
      r.f.push_back(*psi.partial(1));
      r.g.push_back((-1.0) * *psi.partial(0));
      const Ansatz a = ansatz_from_rescaled(r);
      const ScalarEvaluator w = omega_raw(a);
      for (int i = 0; i < 20; ++i) {
        const double x = pos(rng), y = pos(rng);
        const auto c = conservation_at(r, x, y);
        const auto S = harmonic_display_scale(N, r.lambda.eval(x, y)) * harmonic_at(a, w, N - 1, x, y);
        // D₁ = −Im S, D₂ = Re S; res_rg = kSignRG D₁, res_rh = kSignRH D₂.
        worst = std::max({worst, std::abs(c[1] - kSignRG * (-S.imag())), std::abs(c[2] - kSignRH * S.real())});
      }
    }
  }
  return {worst < 1e-12, fmt("max identity mismatch = %.3e (N = 2, 3, 4)", worst)};
}

Outcome ac4() {
  const auto fam = family();
  const double B = 0.5;
  const MagneticSystem flat(Field::constant(1.0), ScalarEvaluator(Field::constant(B)));
  const Ansatz flat_a = flat_constant_ansatz(B);
  const Observable control{"control", [](const PhaseState& s) { return s.y + std::cos(s.phi); }};

  double f_worst = 0.0, c_least = 1e300;
  auto run = [&](const MagneticSystem& sys, const Ansatz& a, const PhaseState& s0) {
    const auto tr = integrate(sys, s0, 100.0, StepControl{}, {F_observable(a), control});
    const auto d = monitor(tr, {F_observable(a), control});
    f_worst = std::max(f_worst, d[0].relative);
    c_least = std::min(c_least, d[1].relative);
    return !tr.aborted;
  };
  bool ok = run(fam.system, fam.ansatz, PhaseState(0.3, 0.2, 1.1));
  ok = run(flat, flat_a, PhaseState(0.0, 0.0, 0.4)) && ok;
  return {ok && f_worst < 1e-8 && c_least > 1e-2,
          fmt("F relative drift %.3e, control relative drift %.3e", f_worst, c_least)};
}

Outcome ac5() {
  const auto fam = family();
  const MagneticSystem zero(Field::constant(1.0), ScalarEvaluator(Field::constant(0.0)));
  const MagneticSystem flat(Field::constant(1.0), ScalarEvaluator(Field::constant(0.7)));
  double worst = 0.0;
  bool ok = true;
  for (const auto* sys : {&zero, &flat, &fam.system}) {
    const auto r = crosscheck_formulations(*sys, PhaseState(0.4, 1.3, 0.9), 10.0, StepControl{});
    worst = std::max(worst, r.max_discrepancy);
    ok = ok && !r.aborted;
  }
  return {ok && worst < 1e-7, fmt("max phase/cotangent discrepancy %.3e", worst)};
}

// Hand transcriptions of the N = 1 and N = 2 systems.
VectorXd rows_n1(const VectorXd& U, const VectorXd& Ux, const VectorXd&) {
  VectorXd r(2);
  r[0] = Ux[0] / std::sqrt(U[0]);
  r[1] = 2 * U[0] * Ux[1];
  return r;
}

VectorXd rows_n2(const VectorXd& U, const VectorXd& Ux, const VectorXd& Uy) {
  const double L = U[0], u1 = U[2], v1 = U[3], sL = std::sqrt(L);
  const double W = ((Uy[0] * u1 - Ux[0] * v1) + 2 * L * (Ux[3] - Uy[2])) / (8 * L * sL);
  VectorXd r(4);
  r[0] = -(Uy[0] / (2 * L)) * v1 + (Ux[0] / (2 * L)) * u1 + Ux[2] - Uy[3];
  r[1] = Ux[0] + Ux[1] / 2 + W * v1 / sL;
  r[2] = Uy[0] - Uy[1] / 2 - W * u1 / sL;
  r[3] = 2 * L * (Ux[2] + Uy[3]) - (v1 * Uy[0] + u1 * Ux[0]);
  return r;
}

Outcome ac6() {
  std::mt19937_64 rng(6066);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  auto vec = [&](int n) {
    VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = d(rng);
    return v;
  };
  double lin = 0.0, tr = 0.0;
  for (int N = 1; N <= 4; ++N) {
    for (int draw = 0; draw < 20; ++draw) {
      VectorXd U = vec(2 * N);
      U[0] = 1.0 + std::abs(U[0]);
      const StateVector S(N, U);
      const auto m = assemble(S);
      const VectorXd P = vec(2 * N), Q = vec(2 * N);
      const VectorXd r = stacked_residual(S, P, Q);
      lin = std::max(lin, (m.A * P + m.B * Q - r).cwiseAbs().maxCoeff());
      if (N <= 2) {
        const VectorXd e = N == 1 ? rows_n1(U, P, Q) : rows_n2(U, P, Q);
        tr = std::max(tr, (r - e).cwiseAbs().maxCoeff());
        // Matrices column by column against the transcription.
        for (int j = 0; j < 2 * N; ++j) {
          const VectorXd ej = VectorXd::Unit(2 * N, j), z = VectorXd::Zero(2 * N);
          const VectorXd ca = N == 1 ? rows_n1(U, ej, z) : rows_n2(U, ej, z);
          const VectorXd cb = N == 1 ? rows_n1(U, z, ej) : rows_n2(U, z, ej);
          tr = std::max({tr, (m.A.col(j) - ca).cwiseAbs().maxCoeff(), (m.B.col(j) - cb).cwiseAbs().maxCoeff()});
        }
      }
    }
  }
  return {lin < 1e-13 && tr < 1e-12, fmt("A·P + B·Q mismatch %.3e, transcription mismatch %.3e", lin, tr)};
}

Outcome ac7() {
  const MatrixXd M = geodesic_matrix(2, {0.0, 1.0, 1.0});
  MatrixXd want(2, 2);
  want << 0.0, 1.0, 1.0, 2.0;
  const auto sp = spectrum(M);
  double err = (M - want).cwiseAbs().maxCoeff();
  bool ok = sp.eigenvalues.size() == 2 && sp.classification == SpectrumClass::hyperbolic;
  if (ok) {
    err = std::max({err, std::abs(sp.eigenvalues[0] - std::complex<double>(1.0 - std::sqrt(2.0), 0.0)),
                    std::abs(sp.eigenvalues[1] - std::complex<double>(1.0 + std::sqrt(2.0), 0.0))});
  }
  MatrixXd rot(2, 2);
  rot << 0.0, -1.0, 1.0, 0.0;
  const auto rs = spectrum(MatrixXd::Identity(2, 2), rot);
  ok = ok && err < 1e-12 && rs.classification == SpectrumClass::elliptic_mixed;
  return {ok, fmt("eigenvalue error %.3e, rotation pencil '%s'", err, to_string(rs.classification).c_str())};
}

Outcome ac8() {
  const double B = 1.0;
  const MagneticSystem sys(Field::constant(1.0), ScalarEvaluator(Field::constant(B)));
  const PhaseState s0(0.2, -0.1, 0.5);
  const double T = 3.0;
  const auto ref = uniform_field_solution(s0, B, T);
  std::vector<double> errs;
  for (double dt : {0.3, 0.15, 0.075, 0.0375}) {
    const auto tr = integrate(sys, s0, T, StepControl::fixed(dt, T));
    const auto& e = tr.states.back();
    errs.push_back(std::max(
        {std::abs(e.x - ref[0]), std::abs(e.y - ref[1]), std::abs(angle_difference(e.phi, ref[2]))}));
  }
  bool ok = true;
  std::string ratios;
  for (std::size_t i = 1; i < errs.size(); ++i) {
    const double q = errs[i - 1] / errs[i];
    ok = ok && q >= 12.0 && q <= 20.0;
    ratios += fmt("%s%.2f", i > 1 ? ", " : "", q);
  }
  return {ok, "error ratios " + ratios};
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* title;
    double limit;
    std::function<Outcome()> run;
  };
  const Criterion list[] = {
      {"AC1", "exact-family residuals", 5.0, ac1},
      {"AC2", "omega formula equivalence", 10.0, ac2},
      {"AC3", "conservation-law identity", 10.0, ac3},
      {"AC4", "dynamical conservation", 20.0, ac4},
      {"AC5", "formulation cross-check", 10.0, ac5},
      {"AC6", "assembly correctness", 5.0, ac6},
      {"AC7", "geodesic matrix and spectra", 1.0, ac7},
      {"AC8", "integrator order", 5.0, ac8},
  };
  int failures = 0;
  for (const auto& c : list) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && secs < c.limit;
    failures += pass ? 0 : 1;
    std::printf("%s %s: %s (%.2f s, limit %.0f s) %s\n", pass ? "PASS" : "FAIL", c.id, c.title, secs, c.limit,
                o.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(list)) - failures, std::size(list));
  return failures == 0 ? 0 : 1;
}
