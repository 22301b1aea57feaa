// Smooth scalar fields on the 2-torus with exact point evaluation and exact
// first partial derivatives.
//
// Two backends are provided: a trigonometric polynomial (periodic by
// construction, derivatives taken spectrally on the coefficient table) and a
// closed-form analytic rule that may or may not be periodic. Arithmetic on
// fields builds analytic fields whose derivatives follow from the product and
// chain rules, so every field in the library carries exact first derivatives.
#pragma once

#include <cmath>
#include <algorithm>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mgflow {

/// Raised when a field, ansatz or system cannot be built from its inputs.
class ConstructionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an input leaves the domain of an operation (e.g. Λ <= 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised for out-of-range integer arguments (harmonic index, matrix size).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TorusGeometry {
  double period_x = 2.0 * std::numbers::pi;
  double period_y = 2.0 * std::numbers::pi;

  TorusGeometry() = default;
  TorusGeometry(double px, double py) : period_x(px), period_y(py) {
    if (!(px > 0.0) || !(py > 0.0) || !std::isfinite(px) || !std::isfinite(py)) {
      throw ConstructionError("torus periods must be finite and strictly positive");
    }
  }

  friend bool operator==(const TorusGeometry&, const TorusGeometry&) = default;
};

/// Value and first partial derivatives of a scalar at one point.
struct Jet {
  double value = 0.0;
  double dx = 0.0;
  double dy = 0.0;
};

/// Uniform nodes over one fundamental domain, x_i = i * period_x / nx.
class SamplingGrid {
 public:
  SamplingGrid(int nx, int ny, TorusGeometry geometry = {})
      : nx_(nx), ny_(ny), geometry_(geometry) {
    if (nx < 4 || ny < 4) {
      throw ConstructionError("sampling grid needs at least 4 points per direction");
    }
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const { return static_cast<std::size_t>(nx_) * ny_; }
  const TorusGeometry& geometry() const { return geometry_; }

  double x(int i) const { return geometry_.period_x * i / nx_; }
  double y(int j) const { return geometry_.period_y * j / ny_; }

  /// Calls fn(x, y) for every node, x fastest.
  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (int j = 0; j < ny_; ++j) {
      for (int i = 0; i < nx_; ++i) {
        fn(x(i), y(j));
      }
    }
  }

 private:
  int nx_;
  int ny_;
  TorusGeometry geometry_;
};

enum class Backend { trig_poly, analytic };

/// One Fourier mode of a trigonometric field: c * exp(i 2π (m x / Lx + n y / Ly)).
struct FourierMode {
  int m = 0;
  int n = 0;
  std::complex<double> coeff;
};

namespace detail {

class FieldNode {
 public:
  virtual ~FieldNode() = default;
  virtual Jet jet(double x, double y) const = 0;
  virtual double value(double x, double y) const { return jet(x, y).value; }
};

class TrigNode final : public FieldNode {
 public:
  TrigNode(std::vector<FourierMode> modes, TorusGeometry g)
      : modes_(std::move(modes)), kx_(2.0 * std::numbers::pi / g.period_x),
        ky_(2.0 * std::numbers::pi / g.period_y) {}

  // The table holds every mode together with its conjugate partner, so the
  // imaginary parts cancel in the full sum and only the real part is kept.
  Jet jet(double x, double y) const override {
    Jet out;
    for (const auto& md : modes_) {
      const double wx = kx_ * md.m;
      const double wy = ky_ * md.n;
      const double theta = wx * x + wy * y;
      const double c = std::cos(theta);
      const double s = std::sin(theta);
      const double re = md.coeff.real() * c - md.coeff.imag() * s;
      const double im = md.coeff.real() * s + md.coeff.imag() * c;
      out.value += re;
      // d/dx of c e^{iθ} is i wx c e^{iθ}; real part is -wx Im(c e^{iθ}).
      out.dx -= wx * im;
      out.dy -= wy * im;
    }
    return out;
  }

  /// Full complex sum; used to confirm the imaginary part cancels.
  std::complex<double> complex_value(double x, double y) const {
    std::complex<double> acc{};
    for (const auto& md : modes_) {
      acc += md.coeff * std::polar(1.0, kx_ * md.m * x + ky_ * md.n * y);
    }
    return acc;
  }

  const std::vector<FourierMode>& modes() const { return modes_; }

 private:
  std::vector<FourierMode> modes_;
  double kx_;
  double ky_;
};

class RuleNode final : public FieldNode {
 public:
  using Rule = std::function<double(double, double)>;
  RuleNode(Rule v, Rule dx, Rule dy) : v_(std::move(v)), dx_(std::move(dx)), dy_(std::move(dy)) {}
  Jet jet(double x, double y) const override { return {v_(x, y), dx_(x, y), dy_(x, y)}; }
  double value(double x, double y) const override { return v_(x, y); }

 private:
  Rule v_, dx_, dy_;
};

class JetNode final : public FieldNode {
 public:
  using Rule = std::function<Jet(double, double)>;
  explicit JetNode(Rule r) : r_(std::move(r)) {}
  Jet jet(double x, double y) const override { return r_(x, y); }

 private:
  Rule r_;
};

}  // namespace detail

/// Immutable handle to a smooth scalar on the torus. Copies share the
/// underlying representation; all queries are const and thread-safe.
class Field {
 public:
  /// Identically zero trigonometric field on the default torus.
  Field() : Field(constant(0.0)) {}

  double eval(double x, double y) const { return node_->value(x, y); }
  double d_dx(double x, double y) const { return node_->jet(x, y).dx; }
  double d_dy(double x, double y) const { return node_->jet(x, y).dy; }
  Jet jet(double x, double y) const { return node_->jet(x, y); }
  double operator()(double x, double y) const { return eval(x, y); }

  Backend backend() const { return backend_; }
  bool periodic() const { return periodic_; }
  const TorusGeometry& geometry() const { return geometry_; }

  /// Mode table (both members of every conjugate pair) for trig fields.
  const std::vector<FourierMode>* modes() const {
    auto* t = dynamic_cast<const detail::TrigNode*>(node_.get());
    return t ? &t->modes() : nullptr;
  }

  /// Complex-path evaluation of a trig field; the imaginary part is roundoff.
  std::complex<double> complex_eval(double x, double y) const {
    auto* t = dynamic_cast<const detail::TrigNode*>(node_.get());
    if (!t) return {eval(x, y), 0.0};
    return t->complex_value(x, y);
  }

  /// Exact partial derivative as a field, when a closed form exists
  /// (trig tables and the affine/constant presets). Empty otherwise.
  std::optional<Field> partial(int axis) const {
    if (partial_) return (*partial_)(axis);
    return std::nullopt;
  }

  static Field constant(double c, TorusGeometry g = {});

  /// Analytic backend from closed-form value and derivative rules.
  static Field analytic(std::function<double(double, double)> value,
                        std::function<double(double, double)> ddx,
                        std::function<double(double, double)> ddy, bool periodic,
                        TorusGeometry g = {}) {
    return Field(std::make_shared<detail::RuleNode>(std::move(value), std::move(ddx), std::move(ddy)),
                 Backend::analytic, periodic, g);
  }

  /// Analytic backend from a rule producing value and derivatives together.
  static Field from_jet(std::function<Jet(double, double)> rule, bool periodic, TorusGeometry g = {}) {
    return Field(std::make_shared<detail::JetNode>(std::move(rule)), Backend::analytic, periodic, g);
  }

 private:
  friend Field make_trig_field(const std::vector<FourierMode>&, TorusGeometry);
  friend Field affine_field(double, double, double, TorusGeometry);

  Field(std::shared_ptr<const detail::FieldNode> node, Backend b, bool periodic, TorusGeometry g)
      : node_(std::move(node)), backend_(b), periodic_(periodic), geometry_(g) {}

  std::shared_ptr<const detail::FieldNode> node_;
  Backend backend_ = Backend::trig_poly;
  bool periodic_ = true;
  TorusGeometry geometry_;
  std::shared_ptr<const std::function<std::optional<Field>(int)>> partial_;
};

namespace detail {
inline constexpr double kConjugateTolerance = 1e-14;
}

/// Builds a real trigonometric polynomial from a table of complex modes.
/// Missing conjugate partners are completed; a present partner that is not
/// the conjugate raises ConstructionError. Duplicated modes are rejected.
inline Field make_trig_field(const std::vector<FourierMode>& table, TorusGeometry g = {}) {
  std::map<std::pair<int, int>, std::complex<double>> given;
  for (const auto& md : table) {
    if (!std::isfinite(md.coeff.real()) || !std::isfinite(md.coeff.imag())) {
      throw ConstructionError("non-finite Fourier coefficient");
    }
    if (!given.emplace(std::pair{md.m, md.n}, md.coeff).second) {
      throw ConstructionError("duplicate Fourier mode (" + std::to_string(md.m) + "," +
                              std::to_string(md.n) + ")");
    }
  }
  std::map<std::pair<int, int>, std::complex<double>> full = given;
  for (const auto& [key, c] : given) {
    const std::pair<int, int> neg{-key.first, -key.second};
    auto it = given.find(neg);
    if (it == given.end()) {
      full[neg] = std::conj(c);
      continue;
    }
    const double scale = std::max({1.0, std::abs(c), std::abs(it->second)});
    if (std::abs(it->second - std::conj(c)) > detail::kConjugateTolerance * scale) {
      throw ConstructionError("inconsistent conjugate pair at mode (" + std::to_string(key.first) +
                              "," + std::to_string(key.second) + ")");
    }
  }
  std::vector<FourierMode> modes;
  modes.reserve(full.size());
  for (const auto& [key, c] : full) {
    if (key.first == 0 && key.second == 0) {
      modes.push_back({0, 0, {c.real(), 0.0}});
    } else {
      modes.push_back({key.first, key.second, c});
    }
  }
  Field f(std::make_shared<detail::TrigNode>(modes, g), Backend::trig_poly, true, g);
  f.partial_ = std::make_shared<const std::function<std::optional<Field>(int)>>(
      [modes, g](int axis) -> std::optional<Field> {
        std::vector<FourierMode> d;
        for (const auto& md : modes) {
          const double w = axis == 0 ? 2.0 * std::numbers::pi * md.m / g.period_x
                                     : 2.0 * std::numbers::pi * md.n / g.period_y;
          if (w != 0.0) d.push_back({md.m, md.n, std::complex<double>(0.0, w) * md.coeff});
        }
        return make_trig_field(d, g);
      });
  return f;
}

inline Field Field::constant(double c, TorusGeometry g) { return make_trig_field({{0, 0, {c, 0.0}}}, g); }

/// c0 + cx x + cy y; periodic only when cx = cy = 0.
inline Field affine_field(double c0, double cx, double cy, TorusGeometry g = {}) {
  if (cx == 0.0 && cy == 0.0) return Field::constant(c0, g);
  Field f(std::make_shared<detail::RuleNode>([=](double x, double y) { return c0 + cx * x + cy * y; },
                                             [=](double, double) { return cx; },
                                             [=](double, double) { return cy; }),
          Backend::analytic, false, g);
  f.partial_ = std::make_shared<const std::function<std::optional<Field>(int)>>(
      [=](int axis) -> std::optional<Field> { return Field::constant(axis == 0 ? cx : cy, g); });
  return f;
}

// Arithmetic. Results use the analytic backend with product/chain-rule
// derivatives; periodicity is the conjunction of the operands'.

inline Field operator+(const Field& a, const Field& b) {
  return Field::from_jet(
      [a, b](double x, double y) {
        const Jet p = a.jet(x, y), q = b.jet(x, y);
        return Jet{p.value + q.value, p.dx + q.dx, p.dy + q.dy};
      },
      a.periodic() && b.periodic(), a.geometry());
}

inline Field operator*(double s, const Field& a) {
  return Field::from_jet(
      [a, s](double x, double y) {
        const Jet p = a.jet(x, y);
        return Jet{s * p.value, s * p.dx, s * p.dy};
      },
      a.periodic(), a.geometry());
}

inline Field operator-(const Field& a, const Field& b) { return a + (-1.0) * b; }

inline Field operator*(const Field& a, const Field& b) {
  return Field::from_jet(
      [a, b](double x, double y) {
        const Jet p = a.jet(x, y), q = b.jet(x, y);
        return Jet{p.value * q.value, p.dx * q.value + p.value * q.dx, p.dy * q.value + p.value * q.dy};
      },
      a.periodic() && b.periodic(), a.geometry());
}

/// Positive-branch power a^p. Evaluation at a point with a <= 0 and
/// non-integer p raises DomainError.
inline Field pow(const Field& a, double p) {
  return Field::from_jet(
      [a, p](double x, double y) {
        const Jet q = a.jet(x, y);
        if (q.value <= 0.0 && p != std::round(p)) {
          throw DomainError("fractional power of a nonpositive field value");
        }
        if (p == 0.0) return Jet{1.0, 0.0, 0.0};
        const double vp = std::pow(q.value, p);
        const double d = p * std::pow(q.value, p - 1.0);
        return Jet{vp, d * q.dx, d * q.dy};
      },
      a.periodic(), a.geometry());
}

/// Minimum of a field over the nodes of a grid.
inline double grid_min(const Field& f, const SamplingGrid& grid) {
  double m = std::numeric_limits<double>::infinity();
  grid.for_each([&](double x, double y) { m = std::min(m, f.eval(x, y)); });
  return m;
}

/// Value-only pointwise rule on the torus. Used where only point values are
/// consumed (the magnetic field enters every equation undifferentiated).
class ScalarEvaluator {
 public:
  ScalarEvaluator() : fn_([](double, double) { return 0.0; }) {}
  ScalarEvaluator(std::function<double(double, double)> fn, bool periodic = true)
      : fn_(std::move(fn)), periodic_(periodic) {}
  ScalarEvaluator(const Field& f) : fn_([f](double x, double y) { return f.eval(x, y); }), periodic_(f.periodic()) {}

  double operator()(double x, double y) const { return fn_(x, y); }
  bool periodic() const { return periodic_; }

 private:
  std::function<double(double, double)> fn_;
  bool periodic_ = true;
};

}  // namespace mgflow
