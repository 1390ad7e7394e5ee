#pragma once

// Flux integrals over coordinate spheres with radius extrapolation: the
// Michel flux form 𝕌(V, h, φ), ADM mass, weighted mass, and the (weighted)
// centre of mass.  All flux-form indices are Euclidean; dS is the Euclidean
// area element, ν = x/ρ.
//
//   𝕌_i = V(∂^j h_ij - ∂_i tr h + 2 ∂_i φ) - h_ij ∂^j V + (tr h - 2φ) ∂_i V
//   m_ADM = 1/(2(n-1)ω_{n-1}) lim ∮ (∂^j g_ij - ∂_i tr g) ν^i dS
//   m_f   = m_ADM + 1/((n-1)ω_{n-1}) lim ∮ ∂_i f ν^i e^{-f} dS

#include "wmass/conformal.hpp"
#include "wmass/perturbation.hpp"
#include "wmass/quadrature.hpp"

#include <numeric>

namespace wmass {

// ---------------------------------------------------------------------------
// Flux form

/// 𝕌(V, h, φ) at p as a covector (flat indices).
inline Vec flux_U(const ScalarField2& v, const Perturbation& pert, const EndPoint& p) {
  const int n = p.dim();
  const Jet2Sym2 h = pert.h.eval(p.x);
  const Jet2Scalar phi = pert.phi.eval(p.x);
  const Jet2Scalar vj = v.eval(p.x);
  const double trh = h.value.trace();
  Vec u(n);
  for (int i = 0; i < n; ++i) {
    double div_h = 0.0, dtr = 0.0;
    for (int j = 0; j < n; ++j) {
      div_h += h.d1[j](i, j);
      dtr += h.d1[i](j, j);
    }
    u[i] = vj.value * (div_h - dtr + 2.0 * phi.grad[i]) -
           h.value.row(i).dot(vj.grad) + (trh - 2.0 * phi.value) * vj.grad[i];
  }
  return u;
}

/// ∂^i 𝕌_i at p, expanded term by term from the 2-jets (kept as a separate
/// code path from the staticity module's linearisation formulas).
inline double div_flux_U(const ScalarField2& v, const Perturbation& pert, const EndPoint& p) {
  const int n = p.dim();
  const Jet2Sym2 h = pert.h.eval(p.x);
  const Jet2Scalar phi = pert.phi.eval(p.x);
  const Jet2Scalar vj = v.eval(p.x);
  const double trh = h.value.trace();
  const double lap_v = vj.hess.trace();
  const double lap_phi = phi.hess.trace();
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double div_h_i = 0.0, dtr_i = 0.0;
    for (int j = 0; j < n; ++j) {
      div_h_i += h.d1[j](i, j);
      dtr_i += h.d1[i](j, j);
    }
    // ∂_i V (∂^j h_ij - ∂_i tr h + 2 ∂_i φ) + (∂_i tr h - 2 ∂_i φ) ∂_i V
    acc += vj.grad[i] * (div_h_i - dtr_i + 2.0 * phi.grad[i]);
    acc += (dtr_i - 2.0 * phi.grad[i]) * vj.grad[i];
    for (int j = 0; j < n; ++j) {
      // V ∂_i ∂_j h_ij  and  -∂_i h_ij ∂_j V - h_ij ∂_i∂_j V
      acc += vj.value * h.d2[i][j](i, j);
      acc -= h.d1[i](i, j) * vj.grad[j];
      acc -= h.value(i, j) * vj.hess(i, j);
    }
  }
  double lap_trh = 0.0;
  for (int k = 0; k < n; ++k) lap_trh += h.d2[k][k].trace();
  acc += vj.value * (-lap_trh + 2.0 * lap_phi);
  acc += (trh - 2.0 * phi.value) * lap_v;
  return acc;
}

/// Linearisation of Φ at the flat background: ∂^i∂^j h_ij - Δ̊ tr h + 2 Δ̊ φ.
inline double dphi_flat(const Perturbation& pert, const EndPoint& p) {
  const int n = p.dim();
  const Jet2Sym2 h = pert.h.eval(p.x);
  const Jet2Scalar phi = pert.phi.eval(p.x);
  double divdiv = 0.0, lap_trh = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) divdiv += h.d2[i][j](i, j);
  for (int k = 0; k < n; ++k) lap_trh += h.d2[k][k].trace();
  return divdiv - lap_trh + 2.0 * phi.hess.trace();
}

/// ∮ 𝕌_i ν^i over a sphere shell.
inline double flux_through_sphere(const ScalarField2& v, const Perturbation& pert,
                                  const SphereShell& shell) {
  double acc = 0.0;
  for (std::size_t i = 0; i < shell.nodes.size(); ++i) {
    const EndPoint p = EndPoint::of(shell.nodes[i]);
    acc += shell.weights[static_cast<int>(i)] * flux_U(v, pert, p).dot(shell.normals[i]);
  }
  return acc;
}

/// ∫ V · DΦ_(δ,0)(h, φ) over a volume rule (Lebesgue weights).
inline double volume_michel_integral(const ScalarField2& v, const Perturbation& pert,
                                     const VolumeRule& rule) {
  double acc = 0.0;
  for (int i = 0; i < rule.weights.size(); ++i) {
    const EndPoint p = EndPoint::of(rule.nodes[i]);
    acc += rule.weights[i] * v.eval(p.x).value * dphi_flat(pert, p);
  }
  return acc;
}

/// Same integral over the perturbation's own support, term by term when a
/// linear decomposition is available (tight boxes resolve the bumps).
inline double volume_michel_integral(const ScalarField2& v, const Perturbation& pert,
                                     int pts_per_axis = 28) {
  if (!pert.terms.empty()) {
    double acc = 0.0;
    for (const Perturbation& term : pert.terms)
      acc += volume_michel_integral(v, term, pts_per_axis);
    return acc;
  }
  if (!pert.support)
    throw BadParams("volume integral needs a declared support ball");
  const Ball& ball = *pert.support;
  const VolumeRule rule = box_rule(Vec(ball.center.array() - ball.radius),
                                   Vec(ball.center.array() + ball.radius), pts_per_axis);
  return volume_michel_integral(v, pert, rule);
}

// ---------------------------------------------------------------------------
// Radius extrapolation

struct RadiiSchedule {
  double rho0 = 16.0;
  int count = 5;  // rho0 · 2^k, k = 0..count-1
  std::vector<double> radii() const {
    std::vector<double> r(count);
    double rho = rho0;
    for (int k = 0; k < count; ++k, rho *= 2.0) r[k] = rho;
    return r;
  }
};

struct FluxFit {
  double limit = 0.0;
  double exponent = 0.0;   // fitted decay rate s
  double residual = 0.0;   // max(rms misfit, tail-refit drift)
  bool converged = false;
};

namespace detail {

// Least squares of values ≈ c0 + c1 ρ^{-s} (+ c2 ρ^{-s-1} with ≥ 4 samples)
// for fixed s; returns (c0, SSE).
inline std::pair<double, double> power_fit_fixed_s(const std::vector<double>& rho,
                                                   const std::vector<double>& val, double s,
                                                   bool second_term) {
  const int m = static_cast<int>(rho.size());
  const int cols = second_term ? 3 : 2;
  Mat x(m, cols);
  Vec y(m);
  for (int i = 0; i < m; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = std::pow(rho[i], -s);
    if (second_term) x(i, 2) = std::pow(rho[i], -s - 1.0);
    y[i] = val[i];
  }
  Vec c = x.colPivHouseholderQr().solve(y);
  const double sse = (x * c - y).squaredNorm();
  return {c[0], sse};
}

inline double best_exponent(const std::vector<double>& rho, const std::vector<double>& val,
                            bool second_term) {
  auto sse = [&](double s) { return power_fit_fixed_s(rho, val, s, second_term).second; };
  const double lo = 0.05, hi = 12.0;
  double best_s = 1.0, best = std::numeric_limits<double>::infinity();
  const int grid = 241;
  for (int i = 0; i < grid; ++i) {
    const double s = lo * std::pow(hi / lo, i / static_cast<double>(grid - 1));
    const double v = sse(s);
    if (v < best) {
      best = v;
      best_s = s;
    }
  }
  // golden-section refinement in log s
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = std::log(std::max(lo, best_s / 1.3)), b = std::log(std::min(hi, best_s * 1.3));
  double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
  double f1 = sse(std::exp(c1)), f2 = sse(std::exp(c2));
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      b = c2;
      c2 = c1;
      f2 = f1;
      c1 = b - gr * (b - a);
      f1 = sse(std::exp(c1));
    } else {
      a = c1;
      c1 = c2;
      f1 = f2;
      c2 = a + gr * (b - a);
      f2 = sse(std::exp(c2));
    }
  }
  return std::exp(0.5 * (a + b));
}

}  // namespace detail

/// Extrapolate per-radius flux values to ρ → ∞ with the free-exponent power
/// law c0 + c1 ρ^{-s} (+ next-order ρ^{-s-1} correction when enough samples
/// are available).  The reported residual blends three diagnostics: the rms
/// misfit, the drift when the innermost radius is dropped, and a quarter of
/// the gap between the one- and two-correction-term limits (a conservative
/// stand-in for the omitted next order).
inline FluxFit extrapolate_flux(const std::vector<double>& rho, const std::vector<double>& val,
                                double tol = 1e-3) {
  const int m = static_cast<int>(rho.size());
  if (m < 2) throw BadParams("extrapolation needs at least two radii");
  FluxFit fit;
  double mean = std::accumulate(val.begin(), val.end(), 0.0) / m;
  double spread = 0.0;
  for (double v : val) spread = std::max(spread, std::abs(v - mean));
  if (spread < 1e-13 * std::max(1.0, std::abs(mean))) {
    fit.limit = mean;
    fit.exponent = 0.0;
    fit.residual = spread;
    fit.converged = true;
    return fit;
  }
  const bool second = m >= 4;
  const double s = detail::best_exponent(rho, val, second);
  const auto [c0, sse] = detail::power_fit_fixed_s(rho, val, s, second);
  fit.limit = c0;
  fit.exponent = s;
  const double rms = std::sqrt(sse / m);
  double drift = 0.0;
  if (m >= 3) {
    // linear refit on the tail at the fitted exponent (a free refit on the
    // shortened sample is too ill-conditioned to be a diagnostic)
    std::vector<double> rho_tail(rho.begin() + 1, rho.end());
    std::vector<double> val_tail(val.begin() + 1, val.end());
    const bool second_tail = second && static_cast<int>(rho_tail.size()) >= 3;
    drift = std::abs(detail::power_fit_fixed_s(rho_tail, val_tail, s, second_tail).first - c0);
  }
  double model_gap = 0.0;
  if (second) {
    const double s1 = detail::best_exponent(rho, val, false);
    model_gap = std::abs(detail::power_fit_fixed_s(rho, val, s1, false).first - c0);
  }
  fit.residual = std::max({rms, drift, 0.25 * model_gap});
  fit.converged = fit.residual <= tol * std::max(1.0, std::abs(fit.limit));
  return fit;
}

// ---------------------------------------------------------------------------
// Mass reports

struct MassReport {
  std::string kind;  // adm | weighted | com_adm[a] | com_weighted[a]
  double value = 0.0;
  std::vector<double> radii;
  std::vector<double> samples;  // normalised flux value per radius
  FluxFit fit;
  bool converged = false;
};

namespace detail {

inline double adm_flux_at(const WeightedManifoldSpec& spec, const SphereShell& shell) {
  const int n = spec.n;
  double acc = 0.0;
  for (std::size_t q = 0; q < shell.nodes.size(); ++q) {
    const EndPoint p = EndPoint::of(shell.nodes[q]);
    const Jet2Metric g = eval_metric(spec, p);
    const Vec& nu = shell.normals[q];
    double integrand = 0.0;
    for (int i = 0; i < n; ++i) {
      double div_i = 0.0, dtr_i = 0.0;
      for (int j = 0; j < n; ++j) {
        div_i += g.d1[j](i, j);
        dtr_i += g.d1[i](j, j);
      }
      integrand += (div_i - dtr_i) * nu[i];
    }
    acc += shell.weights[static_cast<int>(q)] * integrand;
  }
  return acc;
}

inline double weight_flux_at(const WeightedManifoldSpec& spec, const SphereShell& shell) {
  double acc = 0.0;
  for (std::size_t q = 0; q < shell.nodes.size(); ++q) {
    const EndPoint p = EndPoint::of(shell.nodes[q]);
    const Jet2Scalar f = eval_weight(spec, p);
    acc += shell.weights[static_cast<int>(q)] * f.grad.dot(shell.normals[q]) *
           std::exp(-f.value);
  }
  return acc;
}

// ∮ 𝕌_i(x^a, g - δ, φ) ν^i with φ = f (weighted) or φ = 0 (ADM).
inline double com_flux_at(const WeightedManifoldSpec& spec, const SphereShell& shell, int axis,
                          bool weighted) {
  const int n = spec.n;
  double acc = 0.0;
  for (std::size_t q = 0; q < shell.nodes.size(); ++q) {
    const EndPoint p = EndPoint::of(shell.nodes[q]);
    const Jet2Metric g = eval_metric(spec, p);
    const Jet2Scalar f = weighted ? eval_weight(spec, p) : Jet2Scalar::zero(n);
    const Vec& nu = shell.normals[q];
    const double trh = g.value.trace() - n;
    double integrand = 0.0;
    for (int i = 0; i < n; ++i) {
      double div_i = 0.0, dtr_i = 0.0;
      for (int j = 0; j < n; ++j) {
        div_i += g.d1[j](i, j);
        dtr_i += g.d1[i](j, j);
      }
      double u_i = p.x[axis] * (div_i - dtr_i + 2.0 * f.grad[i]) -
                   (g.value(i, axis) - (i == axis ? 1.0 : 0.0));
      if (i == axis) u_i += trh - 2.0 * f.value;
      integrand += u_i * nu[i];
    }
    acc += shell.weights[static_cast<int>(q)] * integrand;
  }
  return acc;
}

}  // namespace detail

inline MassReport adm_mass(const WeightedManifoldSpec& spec, const RadiiSchedule& sched = {},
                           int order = 24, double tol = 1e-3) {
  MassReport rep;
  rep.kind = "adm";
  rep.radii = sched.radii();
  const double norm = 1.0 / (2.0 * (spec.n - 1.0) * unit_sphere_volume(spec.n - 1));
  for (double rho : rep.radii) {
    const SphereShell shell = sphere_shell(spec.n, rho, order);
    rep.samples.push_back(norm * detail::adm_flux_at(spec, shell));
  }
  rep.fit = extrapolate_flux(rep.radii, rep.samples, tol);
  rep.value = rep.fit.limit;
  rep.converged = rep.fit.converged;
  return rep;
}

inline MassReport weighted_mass(const WeightedManifoldSpec& spec, const RadiiSchedule& sched = {},
                                int order = 24, double tol = 1e-3) {
  MassReport rep;
  rep.kind = "weighted";
  rep.radii = sched.radii();
  const double omega = unit_sphere_volume(spec.n - 1);
  const double norm_adm = 1.0 / (2.0 * (spec.n - 1.0) * omega);
  const double norm_w = 1.0 / ((spec.n - 1.0) * omega);
  for (double rho : rep.radii) {
    const SphereShell shell = sphere_shell(spec.n, rho, order);
    rep.samples.push_back(norm_adm * detail::adm_flux_at(spec, shell) +
                          norm_w * detail::weight_flux_at(spec, shell));
  }
  rep.fit = extrapolate_flux(rep.radii, rep.samples, tol);
  rep.value = rep.fit.limit;
  rep.converged = rep.fit.converged;
  return rep;
}

struct CentreReport {
  Vec value;                      // extrapolated centre
  double mass = 0.0;              // the mass used in the normalisation
  std::vector<MassReport> axes;   // per-axis flux reports (before /mass)
  bool converged = false;
};

/// Centre of mass: per-axis flux of 𝕌(x^a, g - δ, φ) with the ADM
/// normalisation, divided by m_f (weighted) or m_ADM (unweighted).
inline CentreReport centre_of_mass(const WeightedManifoldSpec& spec, bool weighted,
                                   const RadiiSchedule& sched = {}, int order = 24,
                                   double tol = 1e-3) {
  if (!spec.parity_compatible)
    throw ConfigError("centre of mass requires a parity-compatible family");
  const MassReport mass_rep =
      weighted ? weighted_mass(spec, sched, order, tol) : adm_mass(spec, sched, order, tol);
  if (std::abs(mass_rep.value) < 1e-8)
    throw ZeroMass("centre of mass undefined for vanishing mass");
  CentreReport rep;
  rep.mass = mass_rep.value;
  rep.value = Vec::Zero(spec.n);
  rep.converged = mass_rep.converged;
  const double norm = 1.0 / (2.0 * (spec.n - 1.0) * unit_sphere_volume(spec.n - 1));
  for (int a = 0; a < spec.n; ++a) {
    MassReport axis;
    axis.kind = (weighted ? std::string("com_weighted[") : std::string("com_adm[")) +
                std::to_string(a) + "]";
    axis.radii = sched.radii();
    for (double rho : axis.radii) {
      const SphereShell shell = sphere_shell(spec.n, rho, order);
      axis.samples.push_back(norm * detail::com_flux_at(spec, shell, a, weighted));
    }
    axis.fit = extrapolate_flux(axis.radii, axis.samples, tol * std::max(1.0, std::abs(rep.mass)));
    axis.value = axis.fit.limit;
    axis.converged = axis.fit.converged;
    rep.value[a] = axis.value / rep.mass;
    rep.converged = rep.converged && axis.converged;
    rep.axes.push_back(std::move(axis));
  }
  return rep;
}

/// Componentwise 𝔠_f(g) - 𝔠_ADM(g̃) (Prop. "weighted centre equals the tilde
/// centre"); both legs extrapolated independently.
inline Vec check_com_conformal(const WeightedManifoldSpec& spec, const RadiiSchedule& sched = {},
                               int order = 24, double tol = 1e-3) {
  const CentreReport weighted = centre_of_mass(spec, true, sched, order, tol);
  const ConformalPair pair = conformal_spec(spec);
  WeightedManifoldSpec tilde = pair.tilde;
  tilde.parity_compatible = spec.parity_compatible;
  const CentreReport adm = centre_of_mass(tilde, false, sched, order, tol);
  return weighted.value - adm.value;
}

}  // namespace wmass
