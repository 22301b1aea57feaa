// Pointwise kernels for the e^{ikφ} coefficients of the stationarity
// condition, shared by the grid residuals and the quasi-linear assembly.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "mgflow/fields.hpp"

namespace mgflow::detail {

using cplx = std::complex<double>;

/// Jets of Λ and of a_k = u_k + i v_k, k = 0..N, at one point, plus Ω.
struct PointCoefficients {
  int degree = 0;
  Jet lambda;
  std::vector<Jet> u;  // size N+1
  std::vector<Jet> v;  // size N+1
  double omega = 0.0;

  struct ComplexJet {
    cplx value, dx, dy;
  };

  /// a_j for any integer j: conjugated for j < 0, zero for |j| > N.
  ComplexJet a(int j) const {
    if (j > degree || j < -degree) return {};
    const int k = j < 0 ? -j : j;
    const double s = j < 0 ? -1.0 : 1.0;
    return {cplx(u[k].value, s * v[k].value), cplx(u[k].dx, s * v[k].dx), cplx(u[k].dy, s * v[k].dy)};
  }
};

struct HarmonicValue {
  cplx value;
  double term_scale = 0.0;  // largest |term| entering the sum
};

/// Coefficient of e^{ikφ} in
///   F_x cos φ + F_y sin φ + F_φ (Λ_y cos φ/(2Λ) − Λ_x sin φ/(2Λ) − Ω/√Λ)
/// for F = Σ a_k e^{ikφ}. Valid for any integer k; E_{−k} = conj(E_k).
inline HarmonicValue harmonic_coefficient(const PointCoefficients& p, int k) {
  const cplx I(0.0, 1.0);
  const double L = p.lambda.value;
  const auto am = p.a(k - 1);
  const auto ap = p.a(k + 1);
  const auto a0 = p.a(k);
  const double km = k - 1.0;
  const double kp = k + 1.0;

  const cplx t1 = p.lambda.dy / (2.0 * L) * (I * km * am.value + I * kp * ap.value) / 2.0;
  const cplx t2 = -p.lambda.dx / (2.0 * L) * (I * km * am.value - I * kp * ap.value) / (2.0 * I);
  const cplx t3 = (am.dx + ap.dx) / 2.0;
  const cplx t4 = (am.dy - ap.dy) / (2.0 * I);
  const cplx t5 = -I * static_cast<double>(k) * p.omega * a0.value / std::sqrt(L);

  HarmonicValue out;
  out.value = t1 + t2 + t3 + t4 + t5;
  out.term_scale = std::max({std::abs(t1), std::abs(t2), std::abs(t3), std::abs(t4), std::abs(t5)});
  return out;
}

/// Magnetic field eliminated from the k = N relation:
///   Ω = [(N−1)(Λ_y u − Λ_x v) + 2Λ(v_x − u_y)] / (4N Λ^{(N+1)/2}),
/// with u, v the jets of u_{N−1}, v_{N−1}.
inline double omega_from_top(int N, const Jet& lambda, const Jet& u, const Jet& v) {
  const double L = lambda.value;
  const double num = (N - 1.0) * (lambda.dy * u.value - lambda.dx * v.value) + 2.0 * L * (v.dx - u.dy);
  return num / (4.0 * N * std::pow(L, (N + 1) / 2.0));
}

/// 2Λ(u_x + v_y) − (N−1)(v Λ_y + u Λ_x) for the jets of u_{N−1}, v_{N−1}.
inline HarmonicValue top_constraint(int N, const Jet& lambda, const Jet& u, const Jet& v) {
  const double lhs = 2.0 * lambda.value * (u.dx + v.dy);
  const double rhs = (N - 1.0) * (v.value * lambda.dy + u.value * lambda.dx);
  HarmonicValue out;
  out.value = lhs - rhs;
  out.term_scale = std::max(std::abs(lhs), std::abs(rhs));
  return out;
}

/// Jets of the normalized top coefficient a_N = Λ^{N/2}.
inline Jet top_coefficient(int N, const Jet& lambda) {
  const double p = N / 2.0;
  const double d = p * std::pow(lambda.value, p - 1.0);
  return {std::pow(lambda.value, p), d * lambda.dx, d * lambda.dy};
}

}  // namespace mgflow::detail
