// Sup/RMS residual norms over sampling grids, raw and relative.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace mgflow {

/// Norms of one equation's residual over a grid. The relative residual at a
/// point is |r| / (1 + largest magnitude among the equation's terms there).
struct ResidualNorms {
  std::string label;
  double sup = 0.0;
  double l2 = 0.0;
  double rel_sup = 0.0;
  double rel_l2 = 0.0;
  std::size_t samples = 0;
};

struct ResidualReport {
  std::vector<ResidualNorms> equations;
  /// Set when some input field is not globally periodic: the grid check is
  /// then a local statement about one fundamental domain.
  bool local_only = false;
  std::vector<std::string> notes;

  double max_sup() const {
    double m = 0.0;
    for (const auto& e : equations) m = std::max(m, e.sup);
    return m;
  }

  double max_rel_sup() const {
    double m = 0.0;
    for (const auto& e : equations) m = std::max(m, e.rel_sup);
    return m;
  }

  const ResidualNorms* find(const std::string& label) const {
    for (const auto& e : equations) {
      if (e.label == label) return &e;
    }
    return nullptr;
  }

  bool has_note(const std::string& note) const {
    return std::find(notes.begin(), notes.end(), note) != notes.end();
  }

  /// Appends equations and notes of another report.
  void merge(const ResidualReport& other) {
    equations.insert(equations.end(), other.equations.begin(), other.equations.end());
    local_only = local_only || other.local_only;
    for (const auto& n : other.notes) {
      if (!has_note(n)) notes.push_back(n);
    }
  }
};

/// Streaming accumulator; combine() is associative so partial sweeps can be
/// reduced in any order.
class NormAccumulator {
 public:
  explicit NormAccumulator(std::string label) : label_(std::move(label)) {}

  void add(double residual, double term_scale) {
    const double r = std::abs(residual);
    const double rel = r / (1.0 + std::abs(term_scale));
    sup_ = std::max(sup_, r);
    rel_sup_ = std::max(rel_sup_, rel);
    sq_ += r * r;
    rel_sq_ += rel * rel;
    ++n_;
  }

  void combine(const NormAccumulator& o) {
    sup_ = std::max(sup_, o.sup_);
    rel_sup_ = std::max(rel_sup_, o.rel_sup_);
    sq_ += o.sq_;
    rel_sq_ += o.rel_sq_;
    n_ += o.n_;
  }

  ResidualNorms finish() const {
    ResidualNorms out;
    out.label = label_;
    out.sup = sup_;
    out.rel_sup = rel_sup_;
    out.samples = n_;
    if (n_ > 0) {
      out.l2 = std::sqrt(sq_ / static_cast<double>(n_));
      out.rel_l2 = std::sqrt(rel_sq_ / static_cast<double>(n_));
    }
    return out;
  }

 private:
  std::string label_;
  double sup_ = 0.0;
  double rel_sup_ = 0.0;
  double sq_ = 0.0;
  double rel_sq_ = 0.0;
  std::size_t n_ = 0;
};

}  // namespace mgflow
