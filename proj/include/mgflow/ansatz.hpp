// First integrals of the magnetic geodesic flow that are trigonometric
// polynomials in the momentum angle,
//
//     F(x, y, φ) = Σ_{k=−N}^{N} a_k(x, y) e^{ikφ},   a_k = u_k + i v_k,  a_{−k} = conj(a_k),
//
// together with the identities that follow from dF/dt = 0: the stationarity
// condition, its harmonic coefficients, elimination of the magnetic field,
// the divergence constraint on the top coefficients and the two conservation
// laws in the rescaled variables f_k = u_k Λ^{−k/2}, g_k = v_k Λ^{−k/2}.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "mgflow/fields.hpp"
#include "mgflow/flow.hpp"
#include "mgflow/harmonic.hpp"
#include "mgflow/residual_report.hpp"

namespace mgflow {

class Ansatz {
 public:
  /// Normalized ansatz of degree N = u_lower.size():
  /// u_lower holds u_0..u_{N−1}, v_lower holds v_1..v_{N−1}; v_0 ≡ 0 and the
  /// top coefficient is fixed to a_N = Λ^{N/2}.
  static Ansatz normalized(Field lambda, std::vector<Field> u_lower, std::vector<Field> v_lower,
                           int check_points = 64) {
    const int N = static_cast<int>(u_lower.size());
    if (N < 1) throw ConstructionError("ansatz degree must be at least 1");
    if (static_cast<int>(v_lower.size()) != N - 1) {
      throw ConstructionError("expected " + std::to_string(N - 1) + " imaginary parts v_1..v_{N-1}");
    }
    std::vector<Field> u = std::move(u_lower);
    std::vector<Field> v;
    v.reserve(N + 1);
    v.push_back(Field::constant(0.0, lambda.geometry()));
    for (auto& f : v_lower) v.push_back(std::move(f));
    u.push_back(pow(lambda, N / 2.0));
    v.push_back(Field::constant(0.0, lambda.geometry()));
    return Ansatz(std::move(lambda), std::move(u), std::move(v), true, check_points);
  }

  /// Ansatz with all N+1 coefficient pairs given as-is (no normalization of
  /// a_N). v[0] must still be supplied and is taken verbatim.
  static Ansatz unnormalized(Field lambda, std::vector<Field> u, std::vector<Field> v, int check_points = 64) {
    if (u.size() < 2 || u.size() != v.size()) {
      throw ConstructionError("unnormalized ansatz needs matching u, v of size N+1 >= 2");
    }
    return Ansatz(std::move(lambda), std::move(u), std::move(v), false, check_points);
  }

  int degree() const { return degree_; }
  const Field& lambda() const { return lambda_; }
  const Field& u(int k) const { return u_.at(k); }
  const Field& v(int k) const { return v_.at(k); }
  const TorusGeometry& geometry() const { return lambda_.geometry(); }
  bool is_normalized() const { return normalized_; }

  bool periodic() const {
    bool p = lambda_.periodic();
    for (int k = 0; k <= degree_; ++k) p = p && u_[k].periodic() && v_[k].periodic();
    return p;
  }

  /// Jets of Λ, u_k, v_k at a point; Λ is checked against the floor.
  detail::PointCoefficients point(double x, double y, double omega = 0.0) const {
    detail::PointCoefficients p;
    p.degree = degree_;
    p.lambda = lambda_.jet(x, y);
    if (!(p.lambda.value > kLambdaFloor)) throw DomainError("conformal factor below positivity floor");
    p.u.reserve(degree_ + 1);
    p.v.reserve(degree_ + 1);
    for (int k = 0; k <= degree_; ++k) {
      p.u.push_back(u_[k].jet(x, y));
      p.v.push_back(v_[k].jet(x, y));
    }
    p.omega = omega;
    return p;
  }

 private:
  Ansatz(Field lambda, std::vector<Field> u, std::vector<Field> v, bool normalized, int check_points)
      : degree_(static_cast<int>(u.size()) - 1), lambda_(std::move(lambda)), u_(std::move(u)), v_(std::move(v)),
        normalized_(normalized) {
    const double m = grid_min(lambda_, SamplingGrid(check_points, check_points, lambda_.geometry()));
    if (!(m > kLambdaFloor)) throw DomainError("conformal factor is not positive on the check grid");
  }

  int degree_;
  Field lambda_;
  std::vector<Field> u_;
  std::vector<Field> v_;
  bool normalized_;
};

/// f_k = u_k Λ^{−k/2}, g_k = v_k Λ^{−k/2} for k = 0..N−1.
struct RescaledAnsatz {
  int degree = 1;
  Field lambda;
  std::vector<Field> f;
  std::vector<Field> g;

  bool periodic() const {
    bool p = lambda.periodic();
    for (const auto& h : f) p = p && h.periodic();
    for (const auto& h : g) p = p && h.periodic();
    return p;
  }
};

/// F = a_0 + 2 Σ_{k=1}^{N} (u_k cos kφ − v_k sin kφ).
inline double eval_F(const Ansatz& a, double x, double y, double phi) {
  double F = a.u(0).eval(x, y);
  for (int k = 1; k <= a.degree(); ++k) {
    F += 2.0 * (a.u(k).eval(x, y) * std::cos(k * phi) - a.v(k).eval(x, y) * std::sin(k * phi));
  }
  return F;
}

inline Observable F_observable(const Ansatz& a) {
  return {"F", [a](const PhaseState& s) { return eval_F(a, s.x, s.y, s.phi); }};
}

namespace detail {

struct PointResidual {
  double value = 0.0;
  double term_scale = 0.0;
};

/// Stationarity residual at (x, y, φ), built from F_x, F_y, F_φ directly.
inline PointResidual stationarity_point(const Ansatz& a, double omega, double x, double y, double phi) {
  const PointCoefficients p = a.point(x, y, omega);
  double Fx = p.u[0].dx, Fy = p.u[0].dy, Fphi = 0.0;
  for (int k = 1; k <= p.degree; ++k) {
    const double c = std::cos(k * phi), s = std::sin(k * phi);
    Fx += 2.0 * (p.u[k].dx * c - p.v[k].dx * s);
    Fy += 2.0 * (p.u[k].dy * c - p.v[k].dy * s);
    Fphi += 2.0 * k * (-p.u[k].value * s - p.v[k].value * c);
  }
  const double L = p.lambda.value;
  const double c = std::cos(phi), s = std::sin(phi);
  const double t1 = Fx * c;
  const double t2 = Fy * s;
  const double t3 = Fphi * p.lambda.dy * c / (2.0 * L);
  const double t4 = -Fphi * p.lambda.dx * s / (2.0 * L);
  const double t5 = -Fphi * omega / std::sqrt(L);
  return {t1 + t2 + t3 + t4 + t5, std::max({std::abs(t1), std::abs(t2), std::abs(t3), std::abs(t4), std::abs(t5)})};
}

inline void note_periodicity(ResidualReport& r, bool periodic) {
  if (!periodic) {
    r.local_only = true;
    r.notes.push_back("non-periodic input: check covers one fundamental domain only");
  }
}

}  // namespace detail

/// Residual of the stationarity condition at one (x, y, φ).
inline double stationarity_at(const Ansatz& a, const ScalarEvaluator& omega, double x, double y, double phi) {
  return detail::stationarity_point(a, omega(x, y), x, y, phi).value;
}

/// Norms of the stationarity residual over grid × n_phi equispaced angles
/// (n_phi = 0 selects 4N + 4).
inline ResidualReport residual_stationarity(const Ansatz& a, const ScalarEvaluator& omega, const SamplingGrid& grid,
                                            int n_phi = 0) {
  if (n_phi <= 0) n_phi = 4 * a.degree() + 4;
  NormAccumulator acc("stationarity");
  grid.for_each([&](double x, double y) {
    const double w = omega(x, y);
    for (int j = 0; j < n_phi; ++j) {
      const auto r = detail::stationarity_point(a, w, x, y, kTwoPi * j / n_phi);
      acc.add(r.value, r.term_scale);
    }
  });
  ResidualReport rep;
  rep.equations.push_back(acc.finish());
  detail::note_periodicity(rep, a.periodic() && omega.periodic());
  return rep;
}

/// Complex coefficient of e^{ikφ} of the stationarity residual at one point.
inline std::complex<double> harmonic_at(const Ansatz& a, const ScalarEvaluator& omega, int k, double x, double y) {
  return detail::harmonic_coefficient(a.point(x, y, omega(x, y)), k).value;
}

/// Norms of the k-th harmonic relation, 0 <= k <= N+1. For k = 0 the
/// relation is real and is reported as a single equation.
inline ResidualReport residual_harmonic(const Ansatz& a, const ScalarEvaluator& omega, int k,
                                        const SamplingGrid& grid) {
  if (k < 0 || k > a.degree() + 1) {
    throw ArgumentError("harmonic index " + std::to_string(k) + " outside 0.." + std::to_string(a.degree() + 1));
  }
  const std::string base = "harmonic[" + std::to_string(k) + "]";
  NormAccumulator re(k == 0 ? base : base + ".re");
  NormAccumulator im(base + ".im");
  grid.for_each([&](double x, double y) {
    const auto h = detail::harmonic_coefficient(a.point(x, y, omega(x, y)), k);
    re.add(h.value.real(), h.term_scale);
    im.add(h.value.imag(), h.term_scale);
  });
  ResidualReport rep;
  rep.equations.push_back(re.finish());
  if (k != 0) rep.equations.push_back(im.finish());
  detail::note_periodicity(rep, a.periodic() && omega.periodic());
  return rep;
}

/// All harmonic relations k = 0..N+1 in one report.
inline ResidualReport residual_harmonics(const Ansatz& a, const ScalarEvaluator& omega, const SamplingGrid& grid) {
  ResidualReport rep;
  for (int k = 0; k <= a.degree() + 1; ++k) rep.merge(residual_harmonic(a, omega, k, grid));
  return rep;
}

/// Ω = [(N−1)(Λ_y u_{N−1} − Λ_x v_{N−1}) + 2Λ((v_{N−1})_x − (u_{N−1})_y)] / (4N Λ^{(N+1)/2}).
inline ScalarEvaluator omega_raw(const Ansatz& a) {
  return ScalarEvaluator(
      [a](double x, double y) {
        const int N = a.degree();
        const Jet l = a.lambda().jet(x, y);
        if (!(l.value > kLambdaFloor)) throw DomainError("conformal factor below positivity floor");
        return detail::omega_from_top(N, l, a.u(N - 1).jet(x, y), a.v(N - 1).jet(x, y));
      },
      a.periodic());
}

/// Ω = ((g_{N−1})_x − (f_{N−1})_y) / (2N).
inline ScalarEvaluator omega_rescaled(const RescaledAnsatz& r) {
  const int N = r.degree;
  const Field f = r.f.at(N - 1);
  const Field g = r.g.at(N - 1);
  return ScalarEvaluator([f, g, N](double x, double y) { return (g.d_dx(x, y) - f.d_dy(x, y)) / (2.0 * N); },
                         f.periodic() && g.periodic());
}

inline RescaledAnsatz rescale(const Ansatz& a) {
  RescaledAnsatz r;
  r.degree = a.degree();
  r.lambda = a.lambda();
  for (int k = 0; k < a.degree(); ++k) {
    if (k == 0) {
      r.f.push_back(a.u(0));
      r.g.push_back(a.v(0));
    } else {
      const Field s = pow(a.lambda(), -k / 2.0);
      r.f.push_back(a.u(k) * s);
      r.g.push_back(a.v(k) * s);
    }
  }
  return r;
}

struct CoefficientFields {
  std::vector<Field> u;  // u_0..u_{N−1}
  std::vector<Field> v;  // v_0..v_{N−1}
};

/// u_k = f_k Λ^{k/2}, v_k = g_k Λ^{k/2}.
inline CoefficientFields unrescale(const RescaledAnsatz& r) {
  CoefficientFields c;
  for (int k = 0; k < r.degree; ++k) {
    if (k == 0) {
      c.u.push_back(r.f[0]);
      c.v.push_back(r.g[0]);
    } else {
      const Field s = pow(r.lambda, k / 2.0);
      c.u.push_back(r.f[k] * s);
      c.v.push_back(r.g[k] * s);
    }
  }
  return c;
}

/// Normalized ansatz whose rescaled coefficients are r. g_0 is dropped since
/// a_0 is real.
inline Ansatz ansatz_from_rescaled(const RescaledAnsatz& r) {
  CoefficientFields c = unrescale(r);
  std::vector<Field> v(c.v.begin() + 1, c.v.end());
  return Ansatz::normalized(r.lambda, std::move(c.u), std::move(v));
}

namespace detail {

struct TopJets {
  Jet lambda, f, g, f2, g2;  // f = f_{N−1}, g = g_{N−1}, f2 = f_{N−2}, g2 = g_{N−2}
};

/// For N = 1 the index N−2 = −1 refers to a_{−1} = conj(a_1) = Λ^{1/2},
/// whose rescaled parts are f_{−1} = Λ, g_{−1} = 0.
inline TopJets top_jets(const RescaledAnsatz& r, double x, double y) {
  const int N = r.degree;
  TopJets t;
  t.lambda = r.lambda.jet(x, y);
  if (!(t.lambda.value > kLambdaFloor)) throw DomainError("conformal factor below positivity floor");
  t.f = r.f.at(N - 1).jet(x, y);
  t.g = r.g.at(N - 1).jet(x, y);
  if (N >= 2) {
    t.f2 = r.f.at(N - 2).jet(x, y);
    t.g2 = r.g.at(N - 2).jet(x, y);
  } else {
    t.f2 = t.lambda;
    t.g2 = Jet{};
  }
  return t;
}

struct ConservationPoint {
  PointResidual div, rg, rh;
};

inline ConservationPoint conservation_point(int N, const TopJets& t) {
  const double n1 = N - 1.0;
  const double n = N;
  ConservationPoint out;
  out.div = {t.f.dx + t.g.dy, std::max(std::abs(t.f.dx), std::abs(t.g.dy))};

  // R = (N−1) f g − N g_{N−2}
  const double Rx1 = n1 * (t.f.dx * t.g.value + t.f.value * t.g.dx), Rx2 = -n * t.g2.dx;
  const double Ry1 = n1 * (t.f.dy * t.g.value + t.f.value * t.g.dy), Ry2 = -n * t.g2.dy;
  // G = ((N−1)/2)(g² − f²) − N²Λ + N f_{N−2}
  const double Gy1 = n1 * (t.g.value * t.g.dy - t.f.value * t.f.dy), Gy2 = -n * n * t.lambda.dy,
               Gy3 = n * t.f2.dy;
  // H = ((N−1)/2)(f² − g²) − N²Λ − N f_{N−2}
  const double Hx1 = n1 * (t.f.value * t.f.dx - t.g.value * t.g.dx), Hx2 = -n * n * t.lambda.dx,
               Hx3 = -n * t.f2.dx;
  out.rg = {Rx1 + Rx2 + Gy1 + Gy2 + Gy3,
            std::max({std::abs(Rx1), std::abs(Rx2), std::abs(Gy1), std::abs(Gy2), std::abs(Gy3)})};
  out.rh = {Ry1 + Ry2 + Hx1 + Hx2 + Hx3,
            std::max({std::abs(Ry1), std::abs(Ry2), std::abs(Hx1), std::abs(Hx2), std::abs(Hx3)})};
  return out;
}

}  // namespace detail

/// Signs relating the conservation laws to the k = N−1 relations:
///   rg − (N−1) g_{N−1} div = kSignRG · D₁,
///   rh − (N−1) f_{N−1} div = kSignRH · D₂,
/// with D₁ = (N−1) f (g_x − f_y) + N((f_{N−2})_y − (g_{N−2})_x − NΛ_y) and
///      D₂ = (N−1) g (g_x − f_y) + N((f_{N−2})_x + (g_{N−2})_y + NΛ_x).
inline constexpr double kSignRG = +1.0;
inline constexpr double kSignRH = -1.0;

/// The pair (D₁, D₂) of k = N−1 relations in rescaled form at one point.
inline std::pair<double, double> top_harmonic_displays(const RescaledAnsatz& r, double x, double y) {
  const int N = r.degree;
  const auto t = detail::top_jets(r, x, y);
  const double w = t.g.dx - t.f.dy;
  const double d1 = (N - 1.0) * t.f.value * w + N * (t.f2.dy - t.g2.dx - N * t.lambda.dy);
  const double d2 = (N - 1.0) * t.g.value * w + N * (t.f2.dx + t.g2.dy + N * t.lambda.dx);
  return {d1, d2};
}

/// Scale s with (D₂, −D₁) = s · (Re, Im) of the k = N−1 harmonic coefficient,
/// s = 2N Λ^{−(N−2)/2}.
inline double harmonic_display_scale(int N, double lambda_value) {
  return 2.0 * N * std::pow(lambda_value, -(N - 2) / 2.0);
}

/// Divergence constraint and both conservation-law residuals at a point.
inline std::array<double, 3> conservation_at(const RescaledAnsatz& r, double x, double y) {
  const auto p = detail::conservation_point(r.degree, detail::top_jets(r, x, y));
  return {p.div.value, p.rg.value, p.rh.value};
}

/// Flux triple (R, G, H) with R_x + G_y = 0 and R_y + H_x = 0 on solutions.
inline std::array<double, 3> conservation_fluxes(const RescaledAnsatz& r, double x, double y) {
  const int N = r.degree;
  const auto t = detail::top_jets(r, x, y);
  const double R = (N - 1.0) * t.f.value * t.g.value - N * t.g2.value;
  const double q = (N - 1.0) / 2.0 * (t.g.value * t.g.value - t.f.value * t.f.value);
  const double G = q - N * N * t.lambda.value + N * t.f2.value;
  const double H = -q - N * N * t.lambda.value - N * t.f2.value;
  return {R, G, H};
}

/// Divergence constraint on the top rescaled coefficients, (f_{N−1})_x + (g_{N−1})_y.
inline ResidualReport constraint_residual(const RescaledAnsatz& r, const SamplingGrid& grid) {
  NormAccumulator acc("constraint.rescaled");
  const int N = r.degree;
  grid.for_each([&](double x, double y) {
    const Jet f = r.f.at(N - 1).jet(x, y), g = r.g.at(N - 1).jet(x, y);
    acc.add(f.dx + g.dy, std::max(std::abs(f.dx), std::abs(g.dy)));
  });
  ResidualReport rep;
  rep.equations.push_back(acc.finish());
  detail::note_periodicity(rep, r.periodic());
  return rep;
}

/// Both forms of the top constraint: 2Λ(u_x + v_y) − (N−1)(vΛ_y + uΛ_x) on
/// (u_{N−1}, v_{N−1}), and its rescaled form. The first equals
/// 2Λ^{(N+1)/2} times the second.
inline ResidualReport constraint_residual(const Ansatz& a, const SamplingGrid& grid) {
  NormAccumulator acc("constraint.raw");
  const int N = a.degree();
  grid.for_each([&](double x, double y) {
    const auto p = a.point(x, y);
    const auto c = detail::top_constraint(N, p.lambda, p.u[N - 1], p.v[N - 1]);
    acc.add(c.value.real(), c.term_scale);
  });
  ResidualReport rep;
  rep.equations.push_back(acc.finish());
  detail::note_periodicity(rep, a.periodic());
  rep.merge(constraint_residual(rescale(a), grid));
  return rep;
}

/// Residuals of the conservation laws
///   R_x + [((N−1)/2)(g² − f²) − N²Λ + N f_{N−2}]_y = 0,
///   R_y + [((N−1)/2)(f² − g²) − N²Λ − N f_{N−2}]_x = 0,
/// R = (N−1) f g − N g_{N−2}, f = f_{N−1}, g = g_{N−1}; outer derivatives are
/// expanded onto first derivatives of the inputs.
inline ResidualReport conservation_residuals(const RescaledAnsatz& r, const SamplingGrid& grid) {
  NormAccumulator arg("conservation.rg"), arh("conservation.rh");
  grid.for_each([&](double x, double y) {
    const auto p = detail::conservation_point(r.degree, detail::top_jets(r, x, y));
    arg.add(p.rg.value, p.rg.term_scale);
    arh.add(p.rh.value, p.rh.term_scale);
  });
  ResidualReport rep;
  rep.equations.push_back(arg.finish());
  rep.equations.push_back(arh.finish());
  if (r.degree == 1) rep.notes.push_back("N=1 degenerate");
  detail::note_periodicity(rep, r.periodic());
  return rep;
}

struct LinearFamily {
  Ansatz ansatz;
  Field omega;
  MagneticSystem system;
};

/// Degree-one family with Λ = Λ(y), u_0 = 2A(y), u_1 = Λ^{1/2}, v_1 = 0 and
/// Ω = −A′(y); F = 2√Λ cos φ + 2A(y) is then a first integral.
inline LinearFamily build_linear_family(const Field& lambda_profile, const Field& A_profile, int check_points = 64) {
  const SamplingGrid grid(check_points, check_points, lambda_profile.geometry());
  double xdep = 0.0;
  grid.for_each([&](double x, double y) {
    xdep = std::max({xdep, std::abs(lambda_profile.d_dx(x, y)), std::abs(A_profile.d_dx(x, y))});
  });
  if (xdep > 1e-12) throw ConstructionError("family profiles must depend on y only");
  if (!(grid_min(lambda_profile, grid) > kLambdaFloor)) throw DomainError("Λ profile must be positive");
  const auto dA = A_profile.partial(1);
  if (!dA) throw ConstructionError("A profile has no closed-form y-derivative");
  const Field omega = (-1.0) * *dA;
  Ansatz a = Ansatz::normalized(lambda_profile, {2.0 * A_profile}, {}, check_points);
  MagneticSystem sys(lambda_profile, ScalarEvaluator(omega), lambda_profile.geometry(), check_points);
  return {std::move(a), omega, std::move(sys)};
}

}  // namespace mgflow
