// Command implementations behind the mgflow executable. Each command writes
// its JSON report to `out`, diagnostics to `err`, and returns the exit code:
// 0 all requested checks passed, 1 a check failed, 2 bad input.
#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mgflow/ansatz.hpp"
#include "mgflow/flow.hpp"
#include "mgflow/json_io.hpp"
#include "mgflow/quasilinear.hpp"
#include "mgflow/scenario.hpp"

namespace mgflow::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitInput = 2;

struct Options {
  std::optional<std::pair<int, int>> grid;
  std::optional<double> tol;
  std::optional<double> dt;
  std::optional<double> adaptive;
  std::optional<std::string> out_dir;
  bool plot_data = false;
  std::optional<std::uint64_t> seed;
};

inline Scenario load_scenario(const std::string& path, const Options& opt) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError(std::string("malformed JSON: ") + e.what());
  }
  Scenario s = parse_scenario(j, opt.seed);
  if (opt.grid) {
    if (opt.grid->first < 4 || opt.grid->second < 4) throw ScenarioError("--grid needs at least 4 points per direction");
    s.nx = opt.grid->first;
    s.ny = opt.grid->second;
  }
  if (opt.tol) s.tolerance = *opt.tol;
  return s;
}

inline ojson norms_json(const ResidualReport& r) {
  ojson eqs = ojson::array();
  for (const auto& e : r.equations) {
    eqs.push_back({{"label", e.label}, {"sup", e.sup}, {"l2", e.l2}, {"rel_sup", e.rel_sup}, {"rel_l2", e.rel_l2}});
  }
  return eqs;
}

inline ojson check_json(const std::string& name, const ResidualReport& r, double tol, bool passed) {
  ojson c;
  c["name"] = name;
  c["passed"] = passed;
  c["tolerance"] = tol;
  c["max_sup"] = r.max_sup();
  c["equations"] = norms_json(r);
  c["local_only"] = r.local_only;
  c["notes"] = r.notes;
  return c;
}

namespace detail {

inline std::filesystem::path out_path(const Options& opt, const std::string& file) {
  return std::filesystem::path(opt.out_dir.value_or(".")) / file;
}

/// Runs `body`, mapping input errors to exit code 2.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ScenarioError& e) {
    err << "input error: " << e.what() << "\n";
  } catch (const DomainError& e) {
    err << "input error: " << e.what() << "\n";
  } catch (const std::invalid_argument& e) {
    err << "input error: " << e.what() << "\n";
  } catch (const nlohmann::json::exception& e) {
    err << "input error: " << e.what() << "\n";
  }
  return kExitInput;
}

inline double max_abs_difference(const ScalarEvaluator& a, const ScalarEvaluator& b, const SamplingGrid& g) {
  double m = 0.0;
  g.for_each([&](double x, double y) { m = std::max(m, std::abs(a(x, y) - b(x, y))); });
  return m;
}

}  // namespace detail

inline int cmd_verify(const std::string& scenario_path, const Options& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&]() -> int {
    const auto t0 = std::chrono::steady_clock::now();
    const Scenario s = load_scenario(scenario_path, opt);
    if (!s.ansatz) throw ScenarioError("verify needs an ansatz (lambda + coefficients, or a family)");
    if (s.checks.empty()) throw ScenarioError("no checks requested");
    const Ansatz& a = *s.ansatz;
    const ScalarEvaluator& omega = *s.omega;
    const SamplingGrid grid(s.nx, s.ny, s.geometry);
    const double tol = s.tolerance;

    ojson report;
    report["schema_version"] = kSchemaVersion;
    report["command"] = "verify";
    report["scenario"] = s.name;
    report["N"] = s.degree;
    report["grid"] = {s.nx, s.ny};
    report["omega_source"] = s.omega_derived ? "derived from top coefficients" : "given";
    ojson checks = ojson::array();
    ojson timings;
    bool all_pass = true;

    for (const auto& name : s.checks) {
      const auto c0 = std::chrono::steady_clock::now();
      ojson c;
      if (name == "stationarity") {
        const auto r = residual_stationarity(a, omega, grid);
        c = check_json(name, r, tol, r.max_sup() < tol);
      } else if (name == "harmonics") {
        const auto r = residual_harmonics(a, omega, grid);
        c = check_json(name, r, tol, r.max_sup() < tol);
      } else if (name == "constraint") {
        const auto r = constraint_residual(a, grid);
        c = check_json(name, r, tol, r.max_sup() < tol);
      } else if (name == "conservation") {
        const auto r = conservation_residuals(rescale(a), grid);
        c = check_json(name, r, tol, r.max_sup() < tol);
      } else if (name == "certificate") {
        const auto cert = egorov_certificate(rescale(a), grid, tol);
        c = check_json(name, cert.residuals, tol, cert.certified);
        c["certified"] = cert.certified;
        double rmax = 0.0, gmax = 0.0, hmax = 0.0;
        for (const auto& f : cert.fluxes) {
          rmax = std::max(rmax, std::abs(f.R));
          gmax = std::max(gmax, std::abs(f.G));
          hmax = std::max(hmax, std::abs(f.H));
        }
        c["flux_sup"] = {{"R", rmax}, {"G", gmax}, {"H", hmax}};
        if (opt.out_dir) {
          ojson fl = ojson::array();
          for (const auto& f : cert.fluxes) fl.push_back({f.x, f.y, f.R, f.G, f.H});
          ojson doc{{"columns", {"x", "y", "R", "G", "H"}}, {"values", fl}};
          write_file_atomic(detail::out_path(opt, s.name + "_certificate_fluxes.json"), dump_json(doc));
        }
      } else if (name == "omega_equivalence") {
        const double d = detail::max_abs_difference(omega_raw(a), omega_rescaled(rescale(a)), grid);
        c = {{"name", name}, {"passed", d < tol}, {"tolerance", tol}, {"max_sup", d}};
      } else if (name == "omega_consistency") {
        const double d = detail::max_abs_difference(omega, omega_raw(a), grid);
        c = {{"name", name}, {"passed", d < tol}, {"tolerance", tol}, {"max_sup", d}};
      }
      all_pass = all_pass && c["passed"].get<bool>();
      checks.push_back(c);
      timings[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - c0).count();
    }
    report["checks"] = checks;
    report["pass"] = all_pass;

    if (opt.plot_data) {
      std::ostringstream dat;
      dat << "# x y max_phi|stationarity residual|\n";
      const int nphi = 4 * a.degree() + 4;
      for (int jy = 0; jy < grid.ny(); ++jy) {
        for (int ix = 0; ix < grid.nx(); ++ix) {
          const double x = grid.x(ix), y = grid.y(jy);
          double m = 0.0;
          for (int k = 0; k < nphi; ++k) m = std::max(m, std::abs(stationarity_at(a, omega, x, y, kTwoPi * k / nphi)));
          dat << format_double(x) << " " << format_double(y) << " " << format_double(m) << "\n";
        }
        dat << "\n";
      }
      write_file_atomic(detail::out_path(opt, s.name + "_stationarity.dat"), dat.str());
    }
    const std::string text = dump_json(report);
    out << text;
    if (opt.out_dir) {
      write_file_atomic(detail::out_path(opt, s.name + "_verify.json"), text);
      timings["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      write_file_atomic(detail::out_path(opt, s.name + "_timings.json"), dump_json(timings));
    }
    return all_pass ? kExitPass : kExitFail;
  });
}

namespace detail {

inline std::string trajectory_csv(const Trajectory& tr) {
  std::ostringstream os;
  os << "t,x,y,phi";
  for (const auto& n : tr.observable_names) os << "," << n;
  os << "\n";
  for (std::size_t i = 0; i < tr.size(); ++i) {
    os << format_double(tr.times[i]) << "," << format_double(tr.states[i].x) << "," << format_double(tr.states[i].y)
       << "," << format_double(tr.states[i].phi);
    for (const auto& col : tr.observable_values) os << "," << format_double(col[i]);
    os << "\n";
  }
  return os.str();
}

inline std::string trajectory_dat(const Trajectory& tr) {
  std::ostringstream os;
  os << "# t x y phi phi_unwrapped";
  for (const auto& n : tr.observable_names) os << " " << n;
  os << "\n";
  for (std::size_t i = 0; i < tr.size(); ++i) {
    os << format_double(tr.times[i]) << " " << format_double(tr.states[i].x) << " " << format_double(tr.states[i].y)
       << " " << format_double(tr.states[i].phi) << " " << format_double(tr.phi_unwrapped[i]);
    for (const auto& col : tr.observable_values) os << " " << format_double(col[i]);
    os << "\n";
  }
  return os.str();
}

/// Max-norm distance of the end state from the uniform-field closed form.
inline double reference_error(const Trajectory& tr, const PhaseState& s0, double B) {
  const auto ref = uniform_field_solution(s0, B, tr.times.back());
  const auto& e = tr.states.back();
  return std::max({std::abs(e.x - ref[0]), std::abs(e.y - ref[1]), std::abs(angle_difference(e.phi, ref[2]))});
}

}  // namespace detail

inline int cmd_simulate(const std::string& scenario_path, const Options& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&]() -> int {
    const Scenario s = load_scenario(scenario_path, opt);
    if (!s.lambda || !s.omega) throw ScenarioError("simulate needs lambda and omega (or a family)");
    if (s.trajectories.empty()) throw ScenarioError("scenario has no trajectory requests");
    if (opt.dt && !(*opt.dt > 0.0)) throw ScenarioError("--dt must be positive");
    if (opt.adaptive && !(*opt.adaptive > 0.0)) throw ScenarioError("--adaptive must be positive");
    const MagneticSystem sys(*s.lambda, *s.omega, s.geometry);

    ojson report;
    report["schema_version"] = kSchemaVersion;
    report["command"] = "simulate";
    report["scenario"] = s.name;
    ojson trs = ojson::array();
    bool all_pass = true;

    for (const auto& req : s.trajectories) {
      StepControl ctl = req.control;
      if (opt.dt) ctl = StepControl::fixed(*opt.dt, ctl.output_dt);
      if (opt.adaptive) ctl = StepControl::adaptive(*opt.adaptive, ctl.output_dt);

      std::vector<Observable> obs;
      if (s.ansatz) {
        obs.push_back(F_observable(*s.ansatz));
      } else {
        obs.push_back({"F", [](const PhaseState&) { return std::numeric_limits<double>::quiet_NaN(); }});
      }
      for (const auto& name : req.observables) {
        if (name == "control_y_cos_phi") obs.push_back(control_observable());
      }
      const Trajectory tr = integrate(sys, req.initial, req.t_end, ctl, obs);

      std::vector<Observable> monitored{energy_observable()};
      monitored.insert(monitored.end(), obs.begin(), obs.end());
      ojson drift = ojson::array();
      double f_rel = 0.0;
      for (const auto& d : monitor(tr, monitored)) {
        drift.push_back({{"name", d.name}, {"initial", d.initial}, {"max_abs", d.max_abs}, {"relative", d.relative}});
        if (d.name == "F") f_rel = d.relative;
      }

      const std::string base = s.name + "_" + req.name;
      const std::string csv_name = base + ".csv";
      write_file_atomic(detail::out_path(opt, csv_name), detail::trajectory_csv(tr));
      if (opt.plot_data) write_file_atomic(detail::out_path(opt, base + ".dat"), detail::trajectory_dat(tr));

      ojson t;
      t["name"] = req.name;
      t["csv"] = csv_name;
      t["samples"] = tr.size();
      t["steps"] = tr.steps_taken;
      t["step_mode"] = ctl.mode == StepControl::Mode::fixed ? "fixed" : "adaptive";
      if (ctl.mode == StepControl::Mode::fixed) {
        t["dt"] = ctl.dt;
      } else {
        t["atol"] = ctl.atol;
      }
      t["aborted"] = tr.aborted;
      if (tr.aborted) t["diagnostic"] = tr.diagnostic;
      const auto& last = tr.states.back();
      const auto [wx, wy] = tr.wrapped_position(tr.size() - 1, s.geometry);
      t["final"] = {{"t", tr.times.back()}, {"x", last.x}, {"y", last.y}, {"phi", last.phi},
                    {"phi_unwrapped", tr.phi_unwrapped.back()}, {"x_wrapped", wx}, {"y_wrapped", wy}};
      t["drift"] = drift;

      bool passed = !tr.aborted;
      if (req.reference_B && !tr.aborted) {
        const double e1 = detail::reference_error(tr, req.initial, *req.reference_B);
        t["reference_error"] = e1;
        if (ctl.mode == StepControl::Mode::fixed) {
          const StepControl half = StepControl::fixed(ctl.dt / 2.0, ctl.output_dt);
          const Trajectory tr2 = integrate(sys, req.initial, req.t_end, half);
          const double e2 = detail::reference_error(tr2, req.initial, *req.reference_B);
          t["reference_error_half_step"] = e2;
          t["error_ratio"] = e2 > 0.0 ? e1 / e2 : std::numeric_limits<double>::infinity();
        }
      }
      if (req.drift_tolerance) {
        t["drift_tolerance"] = *req.drift_tolerance;
        passed = passed && f_rel < *req.drift_tolerance;
      }
      t["passed"] = passed;
      all_pass = all_pass && passed;
      trs.push_back(t);
    }
    report["trajectories"] = trs;
    report["pass"] = all_pass;
    const std::string text = dump_json(report);
    out << text;
    if (opt.out_dir) write_file_atomic(detail::out_path(opt, s.name + "_simulate.json"), text);
    return all_pass ? kExitPass : kExitFail;
  });
}

inline ojson matrix_json(const Eigen::MatrixXd& M) {
  ojson rows = ojson::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    ojson r = ojson::array();
    for (Eigen::Index k = 0; k < M.cols(); ++k) r.push_back(M(i, k));
    rows.push_back(r);
  }
  return rows;
}

inline ojson spectrum_json(const SpectrumReport& sp) {
  ojson ev = ojson::array();
  for (const auto& e : sp.eigenvalues) ev.push_back({e.real(), e.imag()});
  return {{"eigenvalues", ev},
          {"infinite_eigenvalues", sp.infinite_count},
          {"class", to_string(sp.classification)},
          {"method", sp.method},
          {"condition_A", std::isfinite(sp.condition_A) ? ojson(sp.condition_A) : ojson("inf")},
          {"condition_B", std::isfinite(sp.condition_B) ? ojson(sp.condition_B) : ojson("inf")},
          {"notes", sp.notes}};
}

/// Parses "1,0.3,2" into numbers.
inline std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ScenarioError("not a number: '" + item + "'");
    }
    if (used != item.size()) throw ScenarioError("not a number: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ScenarioError("empty number list");
  return out;
}

struct AssembleRequest {
  std::optional<std::string> scenario_path;
  std::optional<std::string> at;                 // "1,0.3"
  std::vector<std::string> geodesic;             // {"n=2", "a=0,1,1"}
};

inline int cmd_assemble(const AssembleRequest& req, const Options& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&]() -> int {
    ojson report;
    report["schema_version"] = kSchemaVersion;
    report["command"] = "assemble";

    if (!req.geodesic.empty()) {
      int n = 0;
      std::vector<double> a;
      for (const auto& tok : req.geodesic) {
        if (tok.rfind("n=", 0) == 0) {
          n = static_cast<int>(parse_number_list(tok.substr(2)).at(0));
        } else if (tok.rfind("a=", 0) == 0) {
          a = parse_number_list(tok.substr(2));
        } else {
          throw ScenarioError("--geodesic expects n=<int> a=<list>, got '" + tok + "'");
        }
      }
      const Eigen::MatrixXd M = geodesic_matrix(n, a);
      ojson g;
      g["n"] = n;
      g["a"] = a;
      g["matrix"] = matrix_json(M);
      const ojson sp = spectrum_json(spectrum(M));
      for (const auto& [k, v] : sp.items()) g[k] = v;
      report["geodesic"] = g;
      out << dump_json(report);
      return kExitPass;
    }

    if (!req.scenario_path) throw ScenarioError("assemble needs a scenario (for N) or --geodesic");
    const Scenario s = load_scenario(*req.scenario_path, opt);
    report["scenario"] = s.name;
    report["N"] = s.degree;
    report["equations"] = equation_labels(s.degree);
    std::vector<std::vector<double>> points = s.assemble_points;
    if (req.at) points = {parse_number_list(*req.at)};
    if (points.empty()) throw ScenarioError("no state given: use --at or the scenario's assemble.at list");

    ojson pts = ojson::array();
    for (const auto& p : points) {
      Eigen::VectorXd U = Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
      const StateVector sv(s.degree, U);
      const SystemMatrices m = assemble(sv);
      ojson e;
      e["point"] = p;
      e["A"] = matrix_json(m.A);
      e["B"] = matrix_json(m.B);
      const ojson sp = spectrum_json(spectrum(m));
      for (const auto& [k, v] : sp.items()) e[k] = v;
      pts.push_back(e);
    }
    report["points"] = pts;
    const std::string text = dump_json(report);
    out << text;
    if (opt.out_dir) write_file_atomic(detail::out_path(opt, s.name + "_assemble.json"), text);
    return kExitPass;
  });
}

}  // namespace mgflow::cli
