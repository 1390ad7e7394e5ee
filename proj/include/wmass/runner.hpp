#pragma once

// Experiment orchestration: a JSON-configured front end over the module
// operations with machine-readable reports, per-assertion pass/fail lines,
// and deterministic output for fixed config + seed.

#include "wmass/staticity.hpp"
#include "wmass/surfaces.hpp"

#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

namespace wmass {

struct Numerics {
  int quad_order = 24;
  double h_fd = 1e-4;
  double fd_scale = 1.0;
  RadiiSchedule schedule = {};
  double extrap_tol = 1e-3;
  double grid_rmin = 2.0, grid_rmax = 50.0;
  int grid_count = 4096;
  std::uint64_t seed = 0;
  double bracket_lo = 0.2, bracket_hi = 8.0;
  int volume_pts = 24;

  static Numerics from_json(const json& j) {
    Numerics n;
    n.quad_order = j.value("q", 24);
    n.h_fd = j.value("h_fd", 1e-4);
    n.fd_scale = j.value("fd_scale", 1.0);
    n.schedule.rho0 = j.value("rho0", 16.0);
    n.schedule.count = j.value("K", 4) + 1;
    n.extrap_tol = j.value("extrap_tol", 1e-3);
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      n.grid_rmin = g.value("rmin", 2.0);
      n.grid_rmax = g.value("rmax", 50.0);
      n.grid_count = g.value("count", 4096);
    }
    n.seed = j.value("seed", 0);
    if (j.contains("bracket")) {
      n.bracket_lo = j.at("bracket").at(0).get<double>();
      n.bracket_hi = j.at("bracket").at(1).get<double>();
    }
    n.volume_pts = j.value("volume_pts", 24);
    return n;
  }

  json to_json() const {
    return json{{"q", quad_order},
                {"h_fd", h_fd},
                {"fd_scale", fd_scale},
                {"rho0", schedule.rho0},
                {"K", schedule.count - 1},
                {"extrap_tol", extrap_tol},
                {"grid", {{"rmin", grid_rmin}, {"rmax", grid_rmax}, {"count", grid_count}}},
                {"seed", seed},
                {"bracket", {bracket_lo, bracket_hi}},
                {"volume_pts", volume_pts}};
  }
};

struct ExperimentConfig {
  int schema = 1;
  std::string task;
  json family_doc;  // {"family","n","params"}
  Numerics numerics;
  json options = json::object();  // task-specific knobs (potential, rho, count, ...)
  json expect = json::object();

  static ExperimentConfig from_json(json j);
  json to_json() const {
    return json{{"schema", schema},     {"task", task},   {"spec", family_doc},
                {"numerics", numerics.to_json()}, {"options", options}, {"expect", expect}};
  }
};

inline const std::set<std::string>& known_tasks() {
  static const std::set<std::string> tasks{"mass",    "check-conformal", "static-check",
                                           "penrose", "hawking",         "michel",
                                           "convergence", "probe"};
  return tasks;
}

inline ExperimentConfig ExperimentConfig::from_json(json j) {
  ExperimentConfig cfg;
  try {
    cfg.schema = j.value("schema", 1);
    if (cfg.schema != 1) throw ConfigError("unsupported config schema");
    if (j.contains("task")) cfg.task = j.at("task").get<std::string>();
    cfg.family_doc = j.contains("spec") ? j.at("spec") : j;
    if (!cfg.family_doc.contains("family"))
      throw ConfigError("config needs a family spec ({\"family\",\"n\",\"params\"})");
    cfg.numerics = Numerics::from_json(j.value("numerics", json::object()));
    cfg.options = j.value("options", json::object());
    cfg.expect = j.value("expect", json::object());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return cfg;
}

/// Task-dependent validity rules (dimension restrictions, required knobs).
inline void validate(const ExperimentConfig& cfg) {
  if (!known_tasks().count(cfg.task)) throw ConfigError("unknown task: " + cfg.task);
  const int n = cfg.family_doc.value("n", 3);
  if (cfg.task == "hawking" && n != 3) throw ConfigError("hawking task requires n = 3");
  if (cfg.task == "penrose" && (n < 3 || n > 7))
    throw ConfigError("penrose task requires 3 <= n <= 7");
  if (cfg.task == "convergence" && !cfg.options.contains("parameter"))
    throw ConfigError("convergence task needs options.parameter (q | h_fd | rho0)");
  if (cfg.task == "static-check" && !cfg.options.contains("potential"))
    throw ConfigError("static-check task needs options.potential");
}

// ---------------------------------------------------------------------------
// Reports

struct Assertion {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double tolerance = 0.0;
};

struct RunReport {
  json config_echo;
  std::string task;
  json results = json::object();
  std::vector<Assertion> assertions;
  bool pass = true;
  bool converged = true;
  double wall_time_s = 0.0;

  void check(const std::string& name, bool ok, double value, double tol) {
    assertions.push_back({name, ok, value, tol});
    pass = pass && ok;
  }

  json to_json(bool include_walltime = true) const {
    json asserts = json::array();
    for (const auto& a : assertions)
      asserts.push_back(json{{"name", a.name}, {"pass", a.pass}, {"value", a.value},
                             {"tolerance", a.tolerance}});
    json j{{"schema", 1},         {"task", task},        {"config", config_echo},
           {"results", results},  {"assertions", asserts}, {"pass", pass},
           {"converged", converged}};
    if (include_walltime) j["wall_time_s"] = wall_time_s;
    return j;
  }
};

inline json mass_report_to_json(const MassReport& r) {
  json samples = json::array();
  for (std::size_t i = 0; i < r.samples.size(); ++i)
    samples.push_back(json{{"rho", r.radii[i]}, {"value", r.samples[i]}});
  return json{{"kind", r.kind},
              {"value", r.value},
              {"samples", samples},
              {"fit", {{"limit", r.fit.limit},
                       {"exponent", r.fit.exponent},
                       {"residual", r.fit.residual}}},
              {"converged", r.converged}};
}

inline void write_mass_csv(std::ostream& os, const std::vector<MassReport>& reports) {
  os << "kind,rho,value\n";
  for (const auto& r : reports)
    for (std::size_t i = 0; i < r.samples.size(); ++i)
      os << r.kind << "," << r.radii[i] << "," << r.samples[i] << "\n";
}

// ---------------------------------------------------------------------------
// Task implementations

namespace tasks {

inline void run_mass(const ExperimentConfig& cfg, const WeightedManifoldSpec& spec,
                     RunReport& rep) {
  const Numerics& num = cfg.numerics;
  const MassReport adm = adm_mass(spec, num.schedule, num.quad_order, num.extrap_tol);
  const MassReport wf = weighted_mass(spec, num.schedule, num.quad_order, num.extrap_tol);
  rep.results["adm"] = mass_report_to_json(adm);
  rep.results["weighted"] = mass_report_to_json(wf);
  rep.check("adm_converged", adm.converged, adm.fit.residual, num.extrap_tol);
  rep.check("weighted_converged", wf.converged, wf.fit.residual, num.extrap_tol);
  rep.converged = adm.converged && wf.converged;
  if (cfg.options.value("com", false)) {
    const CentreReport com = centre_of_mass(spec, true, num.schedule, num.quad_order,
                                            num.extrap_tol);
    json c = json::array();
    for (int a = 0; a < spec.n; ++a) c.push_back(com.value[a]);
    rep.results["com_weighted"] = c;
    rep.check("com_converged", com.converged, 0.0, num.extrap_tol);
    rep.converged = rep.converged && com.converged;
  }
  if (cfg.expect.contains("adm")) {
    const double want = cfg.expect.at("adm").get<double>();
    const double tol = cfg.expect.value("tol", 1e-4) * std::max(1.0, std::abs(want));
    rep.check("adm_value", std::abs(adm.value - want) < tol, adm.value, tol);
  }
  if (cfg.expect.contains("weighted")) {
    const double want = cfg.expect.at("weighted").get<double>();
    const double tol = cfg.expect.value("tol", 1e-4) * std::max(1.0, std::abs(want));
    rep.check("weighted_value", std::abs(wf.value - want) < tol, wf.value, tol);
  }
}

inline void run_check_conformal(const ExperimentConfig& cfg, const WeightedManifoldSpec& spec,
                                RunReport& rep, std::ostream* csv) {
  const Numerics& num = cfg.numerics;
  const int count = std::min(num.grid_count, cfg.options.value("count", 128));
  const double rmin = std::max(num.grid_rmin, spec.excluded_radius + 1e-9);
  const auto grid = probe_annulus(spec.n, rmin, num.grid_rmax, count, num.seed);
  double max_scalar = 0.0, max_h = 0.0, max_area = 0.0;
  if (csv) *csv << "x0,x1,x2,residual_scalar,residual_H,residual_area\n";
  std::set<double> radii_done;
  for (const Vec& x : grid) {
    const EndPoint p = EndPoint::of(x);
    const double rs = check_conformal_scalar(spec, p);
    const double rh = check_conformal_mean_curvature(spec, p);
    double ra = 0.0;
    const double rho = (x - spec_center(spec)).norm();
    const AreaEquality area = check_area_equality(spec, rho, 12);
    ra = area.residual / std::max(1.0, area.weighted);
    max_scalar = std::max(max_scalar, std::abs(rs));
    max_h = std::max(max_h, std::abs(rh));
    max_area = std::max(max_area, std::abs(ra));
    if (csv) {
      *csv << x[0] << "," << (spec.n > 1 ? x[1] : 0.0) << "," << (spec.n > 2 ? x[2] : 0.0)
           << "," << rs << "," << rh << "," << ra << "\n";
    }
  }
  rep.results["max_residual_scalar"] = max_scalar;
  rep.results["max_residual_H"] = max_h;
  rep.results["max_residual_area_rel"] = max_area;
  const double tol = cfg.options.value("tol", 1e-8);
  rep.check("conformal_scalar", max_scalar < tol, max_scalar, tol);
  rep.check("conformal_mean_curvature", max_h < tol, max_h, tol);
  rep.check("conformal_area", max_area < tol, max_area, tol);
}

inline void run_static_check(const ExperimentConfig& cfg, const WeightedManifoldSpec& spec,
                             RunReport& rep) {
  const Numerics& num = cfg.numerics;
  const ScalarField2 v = potential_from_id(cfg.options.at("potential"), spec);
  const double rmin = std::max(num.grid_rmin, spec.excluded_radius + 1e-9);
  const auto grid = probe_annulus(spec.n, rmin, num.grid_rmax, num.grid_count, num.seed);
  const StaticCertificate cert =
      s_f_vanishing_check(spec, v, grid, cfg.options.value("threshold", 1e-6));
  rep.results = cert.to_json();
  if (cfg.expect.contains("certified"))
    rep.check("certified_matches_expectation",
              cert.certified == cfg.expect.at("certified").get<bool>(),
              cert.certified ? 1.0 : 0.0, 0.0);
}

inline void run_penrose(const ExperimentConfig& cfg, const WeightedManifoldSpec& spec,
                        RunReport& rep) {
  const Numerics& num = cfg.numerics;
  PenroseOptions opt;
  opt.bracket_lo = num.bracket_lo;
  opt.bracket_hi = num.bracket_hi;
  opt.surface_order = num.quad_order;
  opt.schedule = num.schedule;
  opt.mass_order = num.quad_order;
  opt.extrap_tol = num.extrap_tol;
  opt.sf_rmax = num.grid_rmax;
  opt.sf_count = num.grid_count;
  opt.seed = num.seed;
  const PenroseReport pr = penrose_ratio(spec, opt);
  rep.results = pr.to_json();
  const double tol = cfg.options.value("tol", 1e-3);
  rep.check("penrose_ratio_ge_1", pr.ratio >= 1.0 - tol, pr.ratio, tol);
  rep.check("outer_minimising", pr.certified_outer_minimising, 0.0, 0.0);
  rep.check("mass_converged", pr.mass_converged, 0.0, num.extrap_tol);
  rep.converged = pr.mass_converged;
  if (cfg.expect.contains("ratio")) {
    const double want = cfg.expect.at("ratio").get<double>();
    rep.check("ratio_value", std::abs(pr.ratio - want) < tol, pr.ratio, tol);
  }
}

inline void run_hawking(const ExperimentConfig& cfg, const WeightedManifoldSpec& spec,
                        RunReport& rep) {
  const Numerics& num = cfg.numerics;
  PenroseOptions opt;
  opt.surface_order = num.quad_order;
  opt.schedule = num.schedule;
  opt.mass_order = num.quad_order;
  opt.extrap_tol = num.extrap_tol;
  opt.sf_rmax = num.grid_rmax;
  opt.sf_count = num.grid_count;
  opt.seed = num.seed;
  const double rho = cfg.options.value("rho", 2.0);
  const HawkingReport hr = hawking_vs_mass(spec, rho, opt);
  rep.results = hr.to_json();
  const double tol = cfg.options.value("tol", 1e-3);
  rep.check("hawking_margin", hr.margin >= -tol, hr.margin, tol);
}

inline void run_michel(const ExperimentConfig& cfg, const WeightedManifoldSpec& spec,
                       RunReport& rep) {
  const Numerics& num = cfg.numerics;
  if (spec.family != "flat")
    throw ConfigError("michel task runs on the flat background family");
  const int count = cfg.options.value("count", 20);
  const int n = spec.n;
  std::vector<ScalarField2> vs{sf_const(n, 1.0)};
  for (int a = 0; a < n; ++a) vs.push_back(sf_coordinate(n, a));
  double max_pointwise = 0.0;
  for (int k = 0; k < count; ++k) {
    const Perturbation pert = random_compact_perturbation(n, num.seed + k);
    const auto pts = probe_annulus(n, 0.3, pert.support->center.norm() + pert.support->radius,
                                   8, num.seed + 1000 + k);
    for (const auto& v : vs)
      for (const Vec& x : pts)
        max_pointwise = std::max(
            std::abs(michel_pointwise_residual(spec, pert, v, EndPoint::of(x))), max_pointwise);
  }
  double max_integral = 0.0;
  const int vol_count = std::min(count, 4);
  for (int k = 0; k < vol_count; ++k) {
    const Perturbation pert = random_compact_perturbation(n, num.seed + k);
    const Ball& ball = *pert.support;
    const double rho_enc = ball.center.norm() + ball.radius + 0.5;
    const SphereShell shell = sphere_shell(n, rho_enc, num.quad_order);
    for (const auto& v : vs) {
      const double flux = flux_through_sphere(v, pert, shell);
      const double volume = volume_michel_integral(v, pert, num.volume_pts);
      max_integral = std::max(max_integral, std::abs(flux - volume));
    }
  }
  rep.results["max_pointwise_residual"] = max_pointwise;
  rep.results["max_integral_residual"] = max_integral;
  rep.check("michel_pointwise", max_pointwise < cfg.options.value("tol", 1e-8), max_pointwise,
            cfg.options.value("tol", 1e-8));
  rep.check("michel_integral", max_integral < cfg.options.value("integral_tol", 1e-6),
            max_integral, cfg.options.value("integral_tol", 1e-6));
}

inline void run_probe(const ExperimentConfig& cfg, const WeightedManifoldSpec& spec,
                      RunReport& rep) {
  json points = json::array();
  if (cfg.options.contains("points")) {
    for (const auto& arr : cfg.options.at("points")) {
      Vec x(spec.n);
      for (int i = 0; i < spec.n; ++i) x[i] = arr.at(i).get<double>();
      points.push_back(geometry_to_json(geometry_at(spec, EndPoint::of(x))));
    }
  } else {
    Vec x = Vec::Zero(spec.n);
    x[0] = cfg.options.value("r", 3.0);
    points.push_back(geometry_to_json(geometry_at(spec, EndPoint::of(x))));
  }
  rep.results["points"] = points;
  const DecayReport decay = validate_decay(spec);
  rep.results["decay"] = json{{"applicable", decay.applicable},
                              {"metric_exponent", decay.metric_exponent == kInfTau
                                                      ? json(nullptr)
                                                      : json(decay.metric_exponent)},
                              {"weight_exponent", decay.weight_exponent == kInfTau
                                                      ? json(nullptr)
                                                      : json(decay.weight_exponent)}};
}

inline void run_convergence(const ExperimentConfig& cfg, const WeightedManifoldSpec& spec,
                            RunReport& rep) {
  const Numerics& num = cfg.numerics;
  const std::string parameter = cfg.options.at("parameter").get<std::string>();
  json table = json::array();
  if (parameter == "q") {
    std::vector<int> qs;
    if (cfg.options.contains("values"))
      for (const auto& v : cfg.options.at("values")) qs.push_back(v.get<int>());
    else
      qs = {6, 10, 14, 18, 24, 30};
    std::vector<double> values;
    for (int q : qs)
      values.push_back(adm_mass(spec, num.schedule, q, num.extrap_tol).value);
    const double ref = values.back();
    bool monotone = true;
    double prev_err = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < qs.size(); ++i) {
      const double err = std::abs(values[i] - ref);
      table.push_back(json{{"q", qs[i]}, {"value", values[i]}, {"error", err}});
      if (i + 1 < qs.size() && err > prev_err + 1e-11) monotone = false;
      if (i + 1 < qs.size()) prev_err = err;
    }
    rep.check("q_error_monotone", monotone, 0.0, 0.0);
  } else if (parameter == "h_fd") {
    // absolute steps, chosen in the truncation-dominated regime by default
    std::vector<double> steps;
    if (cfg.options.contains("values"))
      for (const auto& v : cfg.options.at("values")) steps.push_back(v.get<double>());
    else
      steps = {1e-2, 5e-3, 2.5e-3};
    const auto pts = probe_annulus(spec.n, 3.0, 6.0, 8, num.seed);
    std::vector<double> errors;
    for (double h : steps) {
      const WeightedManifoldSpec fd = spec_with_fd_jets(spec, FdParams{h, 1.0});
      double err = 0.0;
      for (const Vec& x : pts) {
        const EndPoint p = EndPoint::of(x);
        err = std::max(err, std::abs(geometry_at(fd, p).scal - geometry_at(spec, p).scal));
      }
      errors.push_back(err);
    }
    std::vector<double> orders;
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
      const double order = std::log(errors[i] / errors[i + 1]) /
                           std::log(steps[i] / steps[i + 1]);
      orders.push_back(order);
    }
    for (std::size_t i = 0; i < steps.size(); ++i)
      table.push_back(json{{"h_fd", steps[i]},
                           {"error", errors[i]},
                           {"order", i > 0 ? json(orders[i - 1]) : json(nullptr)}});
    const double observed = orders.empty() ? 0.0 : orders.back();
    rep.results["observed_order"] = observed;
    rep.check("fd_order_in_range", observed >= 1.8 && observed <= 2.2, observed, 0.2);
  } else if (parameter == "rho0") {
    std::vector<double> rho0s;
    if (cfg.options.contains("values"))
      for (const auto& v : cfg.options.at("values")) rho0s.push_back(v.get<double>());
    else
      rho0s = {16.0, 32.0};
    std::vector<MassReport> reports;
    for (double rho0 : rho0s) {
      RadiiSchedule sched{rho0, num.schedule.count};
      reports.push_back(adm_mass(spec, sched, num.quad_order, num.extrap_tol));
      table.push_back(json{{"rho0", rho0},
                           {"value", reports.back().value},
                           {"residual", reports.back().fit.residual}});
    }
    double max_drift = 0.0, max_res = 0.0;
    for (std::size_t i = 0; i + 1 < reports.size(); ++i) {
      max_drift = std::max(max_drift, std::abs(reports[i].value - reports[i + 1].value));
      max_res = std::max({max_res, reports[i].fit.residual, reports[i + 1].fit.residual});
    }
    rep.results["max_drift"] = max_drift;
    rep.check("rho0_drift_below_residual", max_drift <= max_res, max_drift, max_res);
  } else {
    throw ConfigError("convergence parameter must be one of q | h_fd | rho0");
  }
  rep.results["table"] = table;
}

}  // namespace tasks

// ---------------------------------------------------------------------------

inline RunReport run(const ExperimentConfig& cfg, std::ostream* csv = nullptr) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  RunReport rep;
  rep.task = cfg.task;
  rep.config_echo = cfg.to_json();
  WeightedManifoldSpec spec = spec_from_json(cfg.family_doc);
  if (cfg.task == "mass") {
    tasks::run_mass(cfg, spec, rep);
    if (csv) {
      const Numerics& num = cfg.numerics;
      write_mass_csv(*csv, {adm_mass(spec, num.schedule, num.quad_order, num.extrap_tol),
                            weighted_mass(spec, num.schedule, num.quad_order, num.extrap_tol)});
    }
  } else if (cfg.task == "check-conformal") {
    tasks::run_check_conformal(cfg, spec, rep, csv);
  } else if (cfg.task == "static-check") {
    tasks::run_static_check(cfg, spec, rep);
  } else if (cfg.task == "penrose") {
    tasks::run_penrose(cfg, spec, rep);
  } else if (cfg.task == "hawking") {
    tasks::run_hawking(cfg, spec, rep);
  } else if (cfg.task == "michel") {
    tasks::run_michel(cfg, spec, rep);
  } else if (cfg.task == "probe") {
    tasks::run_probe(cfg, spec, rep);
  } else if (cfg.task == "convergence") {
    tasks::run_convergence(cfg, spec, rep);
  }
  rep.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

/// Library-level convergence study entry point (spec op).
inline RunReport convergence_study(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  c.task = "convergence";
  return run(c);
}

}  // namespace wmass
