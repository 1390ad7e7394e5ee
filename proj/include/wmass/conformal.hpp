#pragma once

// The conformal dictionary for g̃ = e^{-2f/(n-1)} g: derived tilde spec with
// exactly composed jets (never re-differenced), the scalar-curvature and
// mean-curvature transformation residuals, area equality, and the potential
// map u = e^{-f/(n-1)} V.

#include "wmass/hypersurface.hpp"
#include "wmass/quadrature.hpp"

namespace wmass {

struct ConformalPair {
  WeightedManifoldSpec base;
  WeightedManifoldSpec tilde;  // weight ≡ 0, metric e^{-2f/(n-1)} g
  ScalarField2 psi;            // conformal exponent ψ = -f/(n-1)
};

inline ConformalPair conformal_spec(const WeightedManifoldSpec& spec) {
  ConformalPair pair;
  pair.base = spec;
  const double c = -1.0 / (spec.n - 1.0);
  pair.psi = sf_scale(spec.weight, c);
  ScalarField2 factor = sf_exp_of(sf_scale(spec.weight, 2.0 * c));
  pair.tilde = spec;
  pair.tilde.metric = mf_scalar_times(std::move(factor), spec.metric);
  pair.tilde.weight = sf_zero(spec.n);
  pair.tilde.family = spec.family + "/tilde";
  return pair;
}

/// R̃(p) - e^{2f/(n-1)} S_f(p); the tilde side runs the curvature pipeline on
/// the composed tilde jets, an independent computation path.
inline double check_conformal_scalar(const WeightedManifoldSpec& spec, const EndPoint& p) {
  const ConformalPair pair = conformal_spec(spec);
  const GeometryJet base = geometry_at(spec, p);
  const GeometryJet tilde = geometry_at(pair.tilde, p);
  const double factor = std::exp(2.0 * base.f.value / (spec.n - 1.0));
  return tilde.scal - factor * base.conf_scal;
}

/// Finite-difference variant of the scalar identity check: both legs are
/// differenced independently (the tilde leg from pointwise tilde values, the
/// base leg from base values), so the residual measures the finite-difference
/// truncation error and converges at the scheme order.  The exactly composed
/// path above is jet-algebraic and cancels such errors identically.
inline double check_conformal_scalar_fd(const WeightedManifoldSpec& spec, const FdParams& fd,
                                        const EndPoint& p) {
  const int n = spec.n;
  WeightedManifoldSpec base_fd = spec_with_fd_jets(spec, fd);
  MetricField2 g = spec.metric;
  ScalarField2 f = spec.weight;
  WeightedManifoldSpec tilde_fd = spec;
  tilde_fd.metric = mf_finite_difference(
      [g, f, n](const Vec& x) {
        return Mat(std::exp(-2.0 * f.eval(x).value / (n - 1.0)) * g.eval(x).value);
      },
      fd);
  tilde_fd.weight = sf_zero(n);
  tilde_fd.family = spec.family + "/tilde_fd";
  const GeometryJet base = geometry_at(base_fd, p);
  const GeometryJet tilde = geometry_at(tilde_fd, p);
  const double factor = std::exp(2.0 * base.f.value / (n - 1.0));
  return tilde.scal - factor * base.conf_scal;
}

/// H̃(p) - e^{f/(n-1)} H_f(p) on the coordinate sphere through p.
inline double check_conformal_mean_curvature(const WeightedManifoldSpec& spec,
                                             const EndPoint& p) {
  const ConformalPair pair = conformal_spec(spec);
  const double hf = weighted_mean_curvature(spec, p);
  const double ht = mean_curvature(pair.tilde, p);
  const double f = eval_weight(spec, p).value;
  return ht - std::exp(f / (spec.n - 1.0)) * hf;
}

struct AreaEquality {
  double weighted = 0.0;  // ∮ e^{-f} dA_g
  double tilde = 0.0;     // ∮ dA_g̃
  double residual = 0.0;
};

/// Lemma "the g̃-area equals the weighted area", on the coordinate sphere of
/// radius rho about the family centre.
inline AreaEquality check_area_equality(const WeightedManifoldSpec& spec, double rho,
                                        int order = 24) {
  const ConformalPair pair = conformal_spec(spec);
  const SphereShell shell = sphere_shell(spec.n, rho, order, spec_center(spec));
  AreaEquality out;
  for (std::size_t i = 0; i < shell.nodes.size(); ++i) {
    const EndPoint p = EndPoint::of(shell.nodes[i]);
    const double w = shell.weights[static_cast<int>(i)];
    out.weighted += w * std::exp(-eval_weight(spec, p).value) * area_element_jacobian(spec, p);
    out.tilde += w * area_element_jacobian(pair.tilde, p);
  }
  out.residual = out.weighted - out.tilde;
  return out;
}

/// u = e^{-f/(n-1)} V with composed jets.
inline ScalarField2 potential_transform(const ScalarField2& v, const WeightedManifoldSpec& spec) {
  ScalarField2 factor = sf_exp_of(sf_scale(spec.weight, -1.0 / (spec.n - 1.0)));
  return sf_mul(factor, v);
}

}  // namespace wmass
