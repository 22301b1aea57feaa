// Quasi-linear first-order systems A(U) U_x + B(U) U_y = 0 obtained from the
// harmonic relations after eliminating the magnetic field, the geodesic
// evolution matrix of the non-magnetic case, pencil spectra, and the
// conservation-law certificate of Egorov type.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "mgflow/ansatz.hpp"
#include "mgflow/fields.hpp"
#include "mgflow/harmonic.hpp"
#include "mgflow/residual_report.hpp"

namespace mgflow {

/// U = (Λ, u_0, …, u_{N−1}, v_1, …, v_{N−1}); 2N components.
class StateVector {
 public:
  StateVector(int degree, Eigen::VectorXd values) : degree_(degree), values_(std::move(values)) {
    if (degree < 1) throw ArgumentError("degree must be at least 1");
    if (values_.size() != 2 * degree) {
      throw ArgumentError("state vector for N=" + std::to_string(degree) + " needs " + std::to_string(2 * degree) +
                          " components, got " + std::to_string(values_.size()));
    }
    if (!(values_[0] > 0.0)) throw DomainError("Λ component of the state vector must be positive");
  }

  int degree() const { return degree_; }
  int size() const { return 2 * degree_; }
  const Eigen::VectorXd& values() const { return values_; }
  double lambda() const { return values_[0]; }

  static int lambda_index() { return 0; }
  int u_index(int k) const { return 1 + k; }
  int v_index(int k) const { return degree_ + k; }  // k >= 1

 private:
  int degree_;
  Eigen::VectorXd values_;
};

struct SystemMatrices {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
};

/// Row labels of the stacked system in their fixed order.
inline std::vector<std::string> equation_labels(int N) {
  std::vector<std::string> out{"harmonic[0]"};
  for (int k = 1; k <= N - 1; ++k) {
    out.push_back("harmonic[" + std::to_string(k) + "].re");
    out.push_back("harmonic[" + std::to_string(k) + "].im");
  }
  out.push_back("constraint.raw");
  return out;
}

/// The 2N real equations at state U with derivative slots Ux, Uy:
/// k = 0 relation; real and imaginary parts of k = 1..N−1 (ascending k, real
/// first) with Ω taken from the k = N relation; the top constraint last.
inline Eigen::VectorXd stacked_residual(const StateVector& U, const Eigen::VectorXd& Ux, const Eigen::VectorXd& Uy) {
  const int N = U.degree();
  const int n = U.size();
  if (Ux.size() != n || Uy.size() != n) throw ArgumentError("derivative slots must match the state size");
  const auto& val = U.values();
  auto jet = [&](int i) { return Jet{val[i], Ux[i], Uy[i]}; };

  detail::PointCoefficients p;
  p.degree = N;
  p.lambda = jet(0);
  p.u.resize(N + 1);
  p.v.resize(N + 1);
  for (int k = 0; k < N; ++k) p.u[k] = jet(U.u_index(k));
  for (int k = 1; k < N; ++k) p.v[k] = jet(U.v_index(k));
  p.u[N] = detail::top_coefficient(N, p.lambda);
  p.omega = detail::omega_from_top(N, p.lambda, p.u[N - 1], p.v[N - 1]);

  Eigen::VectorXd r(n);
  int row = 0;
  r[row++] = detail::harmonic_coefficient(p, 0).value.real();
  for (int k = 1; k <= N - 1; ++k) {
    const auto h = detail::harmonic_coefficient(p, k).value;
    r[row++] = h.real();
    r[row++] = h.imag();
  }
  r[row] = detail::top_constraint(N, p.lambda, p.u[N - 1], p.v[N - 1]).value.real();
  return r;
}

/// Column j of A is stacked_residual(U, e_j, 0), of B stacked_residual(U, 0, e_j).
inline SystemMatrices assemble(const StateVector& U) {
  const int n = U.size();
  SystemMatrices m{Eigen::MatrixXd(n, n), Eigen::MatrixXd(n, n)};
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    const Eigen::VectorXd e = Eigen::VectorXd::Unit(n, j);
    m.A.col(j) = stacked_residual(U, e, zero);
    m.B.col(j) = stacked_residual(U, zero, e);
  }
  return m;
}

/// Evolution matrix of the non-magnetic geodesic system U_t + A(U) U_x = 0 in
/// semi-geodesic coordinates; a holds a_0..a_n (a_{n−1} = g, a_n = 1).
/// Subdiagonal entries are a_{n−1}; row i of the last column is
/// (i+1) a_{i+1} − (n−i+1) a_{i−1} with a_{−1} = 0.
inline Eigen::MatrixXd geodesic_matrix(int n, const std::vector<double>& a) {
  if (n < 2) throw ArgumentError("geodesic matrix needs n >= 2");
  if (static_cast<int>(a.size()) != n + 1) {
    throw ArgumentError("geodesic matrix needs n+1 = " + std::to_string(n + 1) + " values a_0..a_n");
  }
  auto at = [&](int i) { return i < 0 || i > n ? 0.0 : a[i]; };
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) M(i, i - 1) = a[n - 1];
  for (int i = 0; i < n; ++i) M(i, n - 1) = (i + 1) * at(i + 1) - (n - i + 1) * at(i - 1);
  return M;
}

enum class SpectrumClass { hyperbolic, degenerate, elliptic_mixed };

inline std::string to_string(SpectrumClass c) {
  switch (c) {
    case SpectrumClass::hyperbolic: return "hyperbolic";
    case SpectrumClass::degenerate: return "degenerate";
    case SpectrumClass::elliptic_mixed: return "elliptic/mixed";
  }
  return "unknown";
}

struct SpectrumOptions {
  double distinct_tolerance = 1e-9;  // relative to the spectral radius
  double singular_tolerance = 1e-12;  // σ_min/σ_max below which a matrix is singular
  double condition_threshold = 1e10;  // largest cond(A) for the A⁻¹B route
};

struct SpectrumReport {
  std::vector<std::complex<double>> eigenvalues;  // finite ones, sorted by (re, im)
  int infinite_count = 0;
  SpectrumClass classification = SpectrumClass::degenerate;
  std::string method;  // "inverse" (A⁻¹B) or "qz" (generalized Schur)
  double condition_A = 0.0;
  double condition_B = 0.0;
  bool A_singular = false;
  bool B_singular = false;
  std::vector<std::string> notes;
};

namespace detail {

inline double condition_number(const Eigen::MatrixXd& M, double& smax) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& s = svd.singularValues();
  smax = s.size() ? s[0] : 0.0;
  const double smin = s.size() ? s[s.size() - 1] : 0.0;
  if (smax == 0.0) return std::numeric_limits<double>::infinity();
  return smin == 0.0 ? std::numeric_limits<double>::infinity() : smax / smin;
}

}  // namespace detail

/// Roots λ of det(B − λA) = 0, classified as hyperbolic when every finite
/// root is real and the roots are pairwise distinct.
inline SpectrumReport spectrum(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const SpectrumOptions& opt = {}) {
  if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows()) {
    throw ArgumentError("pencil matrices must be square and of equal size");
  }
  SpectrumReport rep;
  double amax = 0.0, bmax = 0.0;
  rep.condition_A = detail::condition_number(A, amax);
  rep.condition_B = detail::condition_number(B, bmax);
  rep.A_singular = !(rep.condition_A * opt.singular_tolerance < 1.0);
  rep.B_singular = !(rep.condition_B * opt.singular_tolerance < 1.0);

  if (rep.A_singular && rep.B_singular) {
    rep.classification = SpectrumClass::degenerate;
    rep.method = "none";
    rep.notes.push_back("both A and B numerically singular");
    return rep;
  }

  if (rep.condition_A < opt.condition_threshold) {
    rep.method = "inverse";
    const Eigen::MatrixXd M = A.partialPivLu().solve(B);
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) rep.eigenvalues.push_back(es.eigenvalues()[i]);
  } else {
    rep.method = "qz";
    Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> ges(B, A, false);
    const auto alphas = ges.alphas();
    const auto betas = ges.betas();
    const double bscale = std::max(amax, 1e-300);
    for (Eigen::Index i = 0; i < alphas.size(); ++i) {
      if (std::abs(betas[i]) <= opt.singular_tolerance * bscale) {
        ++rep.infinite_count;
      } else {
        rep.eigenvalues.push_back(alphas[i] / betas[i]);
      }
    }
    if (rep.infinite_count > 0) rep.notes.push_back("A singular: pencil has infinite eigenvalues");
  }

  std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(), [](const auto& p, const auto& q) {
    return p.real() != q.real() ? p.real() < q.real() : p.imag() < q.imag();
  });
  double radius = 0.0;
  for (const auto& e : rep.eigenvalues) radius = std::max(radius, std::abs(e));
  const double tol = opt.distinct_tolerance * radius;

  bool complex = false;
  for (const auto& e : rep.eigenvalues) complex = complex || std::abs(e.imag()) > tol;
  if (complex) {
    rep.classification = SpectrumClass::elliptic_mixed;
    return rep;
  }
  bool distinct = true;
  for (std::size_t i = 1; i < rep.eigenvalues.size(); ++i) {
    distinct = distinct && (rep.eigenvalues[i].real() - rep.eigenvalues[i - 1].real()) > tol;
  }
  if (radius == 0.0 && rep.eigenvalues.size() > 1) distinct = false;
  rep.classification = distinct ? SpectrumClass::hyperbolic : SpectrumClass::degenerate;
  return rep;
}

inline SpectrumReport spectrum(const SystemMatrices& m, const SpectrumOptions& opt = {}) {
  return spectrum(m.A, m.B, opt);
}

/// Ordinary eigenvalue problem of a square matrix, as the pencil (I, M).
inline SpectrumReport spectrum(const Eigen::MatrixXd& M, const SpectrumOptions& opt = {}) {
  return spectrum(Eigen::MatrixXd::Identity(M.rows(), M.cols()), M, opt);
}

struct FluxSample {
  double x, y;
  double R, G, H;
};

struct EgorovCertificate {
  ResidualReport residuals;  // constraint.rescaled, conservation.rg, conservation.rh
  std::vector<FluxSample> fluxes;
  double tolerance = 0.0;
  bool certified = false;
};

/// Evaluates the divergence constraint and both conservation laws
/// R_x + G_y = 0, R_y + H_x = 0 on a grid; certified when all three sup-norm
/// residuals are below tolerance.
inline EgorovCertificate egorov_certificate(const RescaledAnsatz& r, const SamplingGrid& grid, double tolerance) {
  EgorovCertificate cert;
  cert.tolerance = tolerance;
  cert.residuals = constraint_residual(r, grid);
  cert.residuals.merge(conservation_residuals(r, grid));
  cert.fluxes.reserve(grid.size());
  grid.for_each([&](double x, double y) {
    const auto f = conservation_fluxes(r, x, y);
    cert.fluxes.push_back({x, y, f[0], f[1], f[2]});
  });
  cert.certified = cert.residuals.max_sup() < tolerance;
  return cert;
}

}  // namespace mgflow
