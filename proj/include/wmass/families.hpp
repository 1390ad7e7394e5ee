#pragma once

// Built-in asymptotically flat weighted families, the manifold spec record,
// field evaluation with exclusion/positivity checks, JSON (de)serialisation,
// and decay validation.
//
// Families:
//   flat                  g = δ, f = 0
//   conformally_flat      g = u⁴δ (n = 3), u = 1 + Σ c_k r^{-k}, optional weight
//   schwarzschild         g = (1 + m/(2 r^{n-2}))^{4/(n-2)} δ, f = 0
//   f_schwarzschild       g = e^{2f/(n-1)} (1 + m/(2 r^{n-2}))^{4/(n-2)} δ
//   flat_weight           g = δ, f from the weight catalogue
//   perturbed_flat        g = δ + h, f = φ, (h, φ) compactly supported
//   spherical_symmetric   g = B δ + (A-B) x xᵀ/r², A/B = 1 + Σ a_k r^{-k}
//
// Weight catalogue (JSON-addressable): "zero", "inverse_r",
// {"type":"inverse_r","a":…,"k":…}, {"type":"bump","center":…,"radius":…,
// "amplitude":…}, {"type":"dipole","a":…}, {"type":"exp","a":…,"scale":…}.

#include "wmass/fields.hpp"
#include "wmass/perturbation.hpp"

#include <json.hpp>

#include <Eigen/Cholesky>

#include <algorithm>
#include <optional>
#include <string>

namespace wmass {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Weight catalogue

struct BuiltWeight {
  ScalarField2 field;
  double tau = kInfTau;  // decay order O_2(r^{-tau}); inf for zero/compact
  bool radial = true;
};

inline BuiltWeight build_weight(const json& w, int n) {
  if (w.is_null()) return BuiltWeight{sf_zero(n), kInfTau, true};
  if (w.is_string()) {
    const std::string name = w.get<std::string>();
    if (name == "zero") return BuiltWeight{sf_zero(n), kInfTau, true};
    if (name == "inverse_r") return BuiltWeight{sf_radial(rp_inverse_power(1.0, 1.0)), 1.0, true};
    throw BadParams("unknown weight profile: " + name);
  }
  if (!w.is_object()) throw BadParams("weight must be a string or an object");
  const std::string type = w.at("type").get<std::string>();
  if (type == "zero") return BuiltWeight{sf_zero(n), kInfTau, true};
  if (type == "inverse_r") {
    const double a = w.value("a", 1.0);
    const double k = w.value("k", 1.0);
    if (!(k > 0.0)) throw BadParams("inverse_r weight needs k > 0");
    return BuiltWeight{sf_radial(rp_inverse_power(a, k)), k, true};
  }
  if (type == "bump") {
    const double center = w.value("center", 3.0);
    const double radius = w.value("radius", 1.0);
    const double amp = w.value("amplitude", 1.0);
    if (!(radius > 0.0)) throw BadParams("bump weight needs radius > 0");
    return BuiltWeight{sf_radial(rp_bump(center, radius, amp)), kInfTau, true};
  }
  if (type == "dipole") {
    const double a = w.value("a", 1.0);
    // a x¹ / r³
    ScalarField2 field{[a, n](const Vec& x) {
      const double r = x.norm();
      const auto rad = rp_inverse_power(a, 3.0)(r);
      Jet2Scalar radial = jet_from_radial(rad[0], rad[1], rad[2], x);
      Vec e1 = Vec::Zero(n);
      e1[0] = 1.0;
      return jet_mul(jet_affine(0.0, e1, x), radial);
    }};
    return BuiltWeight{std::move(field), 2.0, false};
  }
  if (type == "exp") {
    const double a = w.value("a", 1.0);
    const double scale = w.value("scale", 1.0);
    if (!(scale > 0.0)) throw BadParams("exp weight needs scale > 0");
    return BuiltWeight{sf_radial(rp_exp(a, scale)), kInfTau, true};
  }
  throw BadParams("unknown weight profile type: " + type);
}

// ---------------------------------------------------------------------------
// Manifold spec

struct WeightedManifoldSpec {
  int n = 3;
  double tau = kInfTau;  // stated decay order, validated > (n-2)/2
  MetricField2 metric;
  ScalarField2 weight;
  double excluded_radius = 0.0;  // open ball |x - center| < excluded_radius rejected
  Vec center;                    // family centre (origin unless translated)
  bool spherical = false;        // metric and weight radial about centre
  bool parity_compatible = false;
  std::string family = "custom";
  json params = json::object();
};

inline Vec spec_center(const WeightedManifoldSpec& spec) {
  return spec.center.size() == spec.n ? spec.center : Vec::Zero(spec.n);
}

inline void check_not_excluded(const WeightedManifoldSpec& spec, const EndPoint& p) {
  if (spec.excluded_radius <= 0.0) return;
  const double d = (p.x - spec_center(spec)).norm();
  if (d < spec.excluded_radius * (1.0 - 1e-12))
    throw PointExcluded("point inside the excluded ball of family " + spec.family);
}

/// Metric 2-jet at p: exclusion check, symmetrisation, positive-definiteness.
inline Jet2Metric eval_metric(const WeightedManifoldSpec& spec, const EndPoint& p) {
  check_not_excluded(spec, p);
  Jet2Metric j = spec.metric.eval(p.x);
  symmetrise(j);
  Eigen::LLT<Mat> llt(j.value);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("metric is not positive definite at the evaluated point");
  return j;
}

inline Jet2Scalar eval_weight(const WeightedManifoldSpec& spec, const EndPoint& p) {
  check_not_excluded(spec, p);
  Jet2Scalar j = spec.weight.eval(p.x);
  symmetrise(j);
  return j;
}

// ---------------------------------------------------------------------------
// Decay validation (Def 2.1 style): on sampled spheres the sup of
// |g - δ|·ρ^τ must not grow; the fitted decay exponent between successive
// radii must stay above tau - 0.1.

struct DecayReport {
  bool applicable = false;  // false when the deviation is identically ~0
  double metric_exponent = kInfTau;
  double weight_exponent = kInfTau;
};

inline DecayReport validate_decay(const WeightedManifoldSpec& spec,
                                  std::vector<double> radii = {10.0, 20.0, 40.0},
                                  int dirs_per_sphere = 16) {
  DecayReport report;
  const int n = spec.n;
  std::vector<Vec> dirs;
  for (int i = 0; i < dirs_per_sphere; ++i) {
    Vec d = Vec::Zero(n);
    // deterministic spread of directions
    for (int k = 0; k < n; ++k) d[k] = std::cos(1.7 * (i + 1) * (k + 1) + 0.3 * k);
    d /= d.norm();
    dirs.push_back(d);
  }
  std::vector<double> dev_g, dev_f;
  for (double rho : radii) {
    double dg = 0.0, df = 0.0;
    for (const Vec& d : dirs) {
      const EndPoint p = EndPoint::of(spec_center(spec) + rho * d);
      const Jet2Metric g = eval_metric(spec, p);
      dg = std::max(dg, (g.value - Mat::Identity(n, n)).cwiseAbs().maxCoeff());
      df = std::max(df, std::abs(eval_weight(spec, p).value));
    }
    dev_g.push_back(dg);
    dev_f.push_back(df);
  }
  auto fit_exponent = [&](const std::vector<double>& dev) {
    double worst = kInfTau;
    for (std::size_t i = 0; i + 1 < dev.size(); ++i) {
      if (dev[i] < 1e-14 || dev[i + 1] < 1e-14) continue;
      const double e = std::log(dev[i] / dev[i + 1]) / std::log(radii[i + 1] / radii[i]);
      worst = std::min(worst, e);
    }
    return worst;
  };
  report.metric_exponent = fit_exponent(dev_g);
  report.weight_exponent = fit_exponent(dev_f);
  report.applicable = report.metric_exponent != kInfTau || report.weight_exponent != kInfTau;
  return report;
}

// ---------------------------------------------------------------------------
// Family construction

namespace detail {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw BadParams(msg);
}

inline Vec param_center(const json& params, int n) {
  if (!params.contains("center")) return Vec::Zero(n);
  const auto& c = params.at("center");
  require(c.is_array() && static_cast<int>(c.size()) == n,
          "center must be an array of length n");
  Vec out(n);
  for (int i = 0; i < n; ++i) out[i] = c[i].get<double>();
  return out;
}

inline std::vector<double> param_coeffs(const json& params, const std::string& key) {
  std::vector<double> c;
  if (params.contains(key))
    for (const auto& v : params.at(key)) c.push_back(v.get<double>());
  return c;
}

// Largest radius at which the profile fails positivity: log-grid scan from
// the outside in, then bisection onto the crossing.  0 when positive
// throughout.
inline double positivity_excluded_radius(const RadialProfile& p, double rmax) {
  const int steps = 600;
  const double floor_r = 1e-3;
  double bad = 0.0, good = 0.0;
  for (int i = steps; i >= 0; --i) {
    const double r = floor_r * std::pow(rmax / floor_r, i / static_cast<double>(steps));
    if (p(r)[0] <= 1e-10) {
      bad = r;
      break;
    }
    good = r;
  }
  if (bad == 0.0) return 0.0;
  if (good == 0.0) return rmax;  // never positive on the scanned range
  double lo = bad, hi = good;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (p(mid)[0] <= 1e-10)
      lo = mid;
    else
      hi = mid;
  }
  return hi * 1.001;
}

inline double min_tau(double a, double b) { return std::min(a, b); }

}  // namespace detail

inline WeightedManifoldSpec make_family(const std::string& name, json params = json::object()) {
  using detail::require;
  WeightedManifoldSpec spec;
  spec.family = name;
  spec.n = params.value("n", 3);
  require(spec.n >= 3, "dimension must satisfy n >= 3");
  const int n = spec.n;
  const Vec center = detail::param_center(params, n);
  const bool translated = center.norm() > 0.0;

  BuiltWeight weight{sf_zero(n), kInfTau, true};
  if (params.contains("weight")) weight = build_weight(params.at("weight"), n);

  if (name == "flat") {
    spec.metric = mf_flat(n);
    spec.weight = sf_zero(n);
    spec.tau = kInfTau;
    spec.spherical = true;
    spec.parity_compatible = true;
  } else if (name == "flat_weight") {
    spec.metric = mf_flat(n);
    spec.weight = weight.field;
    spec.tau = weight.tau;
    spec.spherical = weight.radial;
    spec.parity_compatible = true;
  } else if (name == "schwarzschild" || name == "f_schwarzschild") {
    const double m = params.value("m", 1.0);
    require(m > 0.0, "schwarzschild families need m > 0");
    const double k = n - 2.0;
    RadialProfile u = rp_one_plus_inverse_powers([&] {
      std::vector<double> c(static_cast<std::size_t>(n - 2), 0.0);
      c.back() = 0.5 * m;
      return c;
    }());
    ScalarField2 conf = ScalarField2{[u, p = 4.0 / k](const Vec& x) {
      const auto d = u(x.norm());
      return jet_pow(jet_from_radial(d[0], d[1], d[2], x), p);
    }};
    MetricField2 g = mf_scalar_times(conf, mf_flat(n));
    if (name == "f_schwarzschild") {
      ScalarField2 factor = sf_exp_of(sf_scale(weight.field, 2.0 / (n - 1.0)));
      g = mf_scalar_times(factor, std::move(g));
      spec.weight = weight.field;
      spec.tau = detail::min_tau(k, weight.tau);
      spec.spherical = weight.radial;
    } else {
      spec.weight = sf_zero(n);
      spec.tau = k;
      spec.spherical = true;
    }
    spec.metric = std::move(g);
    spec.excluded_radius = std::pow(0.5 * m, 1.0 / k);
    spec.parity_compatible = true;
  } else if (name == "conformally_flat") {
    require(n == 3, "conformally_flat family is defined for n = 3");
    const std::vector<double> c = detail::param_coeffs(params, "c");
    require(!c.empty(), "conformally_flat needs coefficients c");
    RadialProfile u = rp_one_plus_inverse_powers(c);
    ScalarField2 conf = ScalarField2{[u](const Vec& x) {
      const auto d = u(x.norm());
      return jet_pow(jet_from_radial(d[0], d[1], d[2], x), 4.0);
    }};
    spec.metric = mf_scalar_times(conf, mf_flat(n));
    spec.weight = weight.field;
    double tau_metric = kInfTau;
    for (std::size_t i = 0; i < c.size(); ++i)
      if (c[i] != 0.0) {
        tau_metric = static_cast<double>(i + 1);
        break;
      }
    spec.tau = detail::min_tau(tau_metric, weight.tau);
    spec.excluded_radius = detail::positivity_excluded_radius(u, 100.0);
    spec.spherical = weight.radial;
    spec.parity_compatible = true;
  } else if (name == "perturbed_flat") {
    const std::uint64_t seed = params.value("seed", 0);
    const double amp = params.value("amplitude", 0.05);
    const int terms = params.value("terms", 2);
    Perturbation pert = random_compact_perturbation(n, seed, amp, terms);
    spec.metric = mf_plus_tensor(mf_flat(n), pert.h);
    spec.weight = pert.phi;
    spec.tau = kInfTau;  // compactly supported deviation
    spec.spherical = false;
    spec.parity_compatible = true;  // flux integrands settle exactly beyond the support
  } else if (name == "spherical_symmetric") {
    const std::vector<double> a = detail::param_coeffs(params, "a");
    const std::vector<double> b = detail::param_coeffs(params, "b");
    RadialProfile pa = rp_one_plus_inverse_powers(a);
    RadialProfile pb = rp_one_plus_inverse_powers(b);
    spec.metric = mf_radial_ab(n, pa, pb);
    spec.weight = weight.field;
    double tau_metric = kInfTau;
    for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
      const double ca = i < a.size() ? a[i] : 0.0;
      const double cb = i < b.size() ? b[i] : 0.0;
      if (ca != 0.0 || cb != 0.0) {
        tau_metric = static_cast<double>(i + 1);
        break;
      }
    }
    spec.tau = detail::min_tau(tau_metric, weight.tau);
    spec.excluded_radius = std::max(detail::positivity_excluded_radius(pa, 100.0),
                                    detail::positivity_excluded_radius(pb, 100.0));
    spec.spherical = weight.radial;
    spec.parity_compatible = true;
  } else {
    throw BadParams("unknown family: " + name);
  }

  if (translated) {
    spec.metric = mf_translate(std::move(spec.metric), center);
    spec.weight = sf_translate(std::move(spec.weight), center);
    spec.center = center;
  }

  require(spec.tau > 0.5 * (n - 2),
          "decay order tau must exceed (n-2)/2 (Def. of asymptotic flatness)");
  spec.params = std::move(params);
  return spec;
}

// ---------------------------------------------------------------------------
// JSON round trip: {"family": string, "n": int, "params": {...}}

inline json spec_to_json(const WeightedManifoldSpec& spec) {
  json params = spec.params;
  params.erase("n");
  json j{{"family", spec.family}, {"n", spec.n}, {"params", params}};
  return j;
}

inline WeightedManifoldSpec spec_from_json(const json& j) {
  if (!j.contains("family")) throw ConfigError("family spec needs a \"family\" key");
  json params = j.value("params", json::object());
  params["n"] = j.value("n", 3);
  return make_family(j.at("family").get<std::string>(), params);
}

// ---------------------------------------------------------------------------
// Spec transforms (used by the equivariance suites)

/// Pullback of the whole family by a rotation Q about the origin.
inline WeightedManifoldSpec spec_rotate(const WeightedManifoldSpec& spec, const Mat& q) {
  WeightedManifoldSpec out = spec;
  out.metric = mf_rotate(spec.metric, q);
  out.weight = sf_rotate(spec.weight, q);
  out.center = q.transpose() * spec_center(spec);
  out.family = spec.family + "/rotated";
  out.parity_compatible = spec.parity_compatible;
  return out;
}

inline WeightedManifoldSpec spec_translate(const WeightedManifoldSpec& spec, const Vec& x0) {
  WeightedManifoldSpec out = spec;
  out.metric = mf_translate(spec.metric, x0);
  out.weight = sf_translate(spec.weight, x0);
  out.center = spec_center(spec) + x0;
  out.family = spec.family + "/translated";
  return out;
}

/// Spec with the same metric expressed through a value-only callable and
/// finite-difference jets (convergence studies against analytic jets).
inline WeightedManifoldSpec spec_with_fd_jets(const WeightedManifoldSpec& spec, FdParams fd = {}) {
  WeightedManifoldSpec out = spec;
  MetricField2 analytic_g = spec.metric;
  ScalarField2 analytic_f = spec.weight;
  out.metric = mf_finite_difference(
      [analytic_g](const Vec& x) { return analytic_g.eval(x).value; }, fd);
  out.weight = sf_finite_difference(
      [analytic_f](const Vec& x) { return analytic_f.eval(x).value; }, fd);
  out.family = spec.family + "/fd";
  out.parity_compatible = false;
  return out;
}

}  // namespace wmass
