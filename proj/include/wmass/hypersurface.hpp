#pragma once

// Pointwise hypersurface geometry of coordinate spheres {|x - c| = ρ}:
// outward g-unit normal, mean curvature H (divergence of the normal, so flat
// spheres have H = (n-1)/ρ > 0), weighted mean curvature H_f = H - ∂_ν f,
// and the area-element Jacobian dA_g/dA_δ.

#include "wmass/curvature.hpp"

namespace wmass {

/// dA_g / dA_δ for the level set {|x - c| = ρ} through p:
/// √(det g) · |∇r|_g (coarea formula with |∇r|_δ = 1).
inline double area_element_jacobian(const WeightedManifoldSpec& spec, const EndPoint& p) {
  const Jet2Metric g = eval_metric(spec, p);
  const Vec d = p.x - spec_center(spec);
  const Vec u = d / d.norm();
  const Mat gi = g.value.inverse();
  const double w = std::sqrt(u.dot(gi * u));
  return std::sqrt(g.value.determinant()) * w;
}

/// Mean curvature of the coordinate sphere through p (about the family
/// centre), from H = ∇_i ν^i with ν the outward g-unit normal of the level
/// foliation.  Needs first metric derivatives only, so horizon boundary
/// points are admissible.
inline double mean_curvature(const WeightedManifoldSpec& spec, const EndPoint& p) {
  const int n = spec.n;
  const Jet2Metric g = eval_metric(spec, p);
  const Vec d = p.x - spec_center(spec);
  const double r = d.norm();
  if (!(r > 0.0)) throw PointExcluded("sphere point coincides with the family centre");
  const Vec u = d / r;  // ∂_j level = u_j
  const Mat gi = g.value.inverse();

  Ten3 dinv = zero_ten3(n);
  for (int k = 0; k < n; ++k) dinv[k] = -gi * g.d1[k] * gi;

  // du(k,i) = ∂_k u_i
  Mat du(n, n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) du(k, i) = ((k == i ? 1.0 : 0.0) - u[k] * u[i]) / r;

  const Vec giu = gi * u;
  const double w = std::sqrt(u.dot(giu));  // |∇ level|_g

  // ∂_i w = (∂_i g^{ab} u_a u_b + 2 g^{ab} u_a ∂_i u_b) / (2w)
  Vec dw(n);
  for (int i = 0; i < n; ++i)
    dw[i] = (u.dot(dinv[i] * u) + 2.0 * giu.dot(du.row(i).transpose())) / (2.0 * w);

  // ν^i = g^{ij} u_j / w;  ∂_i ν^i then Γ-trace correction.
  double div_flat = 0.0;
  for (int i = 0; i < n; ++i) {
    double dnu = 0.0;
    dnu += dinv[i].row(i).dot(u);            // ∂_i g^{ij} u_j
    dnu += gi.row(i).dot(du.row(i));         // g^{ij} ∂_i u_j
    dnu = dnu / w - giu[i] * dw[i] / (w * w);
    div_flat += dnu;
  }
  // Γ^i_{ik} = ∂_k log √det g
  const Vec nu = giu / w;
  double gamma_trace_term = 0.0;
  for (int k = 0; k < n; ++k) {
    const double dlog = 0.5 * (gi * g.d1[k]).trace();
    gamma_trace_term += dlog * nu[k];
  }
  return div_flat + gamma_trace_term;
}

/// H_f = H - ∂_ν f with ν the outward g-unit normal.
inline double weighted_mean_curvature(const WeightedManifoldSpec& spec, const EndPoint& p) {
  const Jet2Metric g = eval_metric(spec, p);
  const Jet2Scalar f = eval_weight(spec, p);
  const Vec d = p.x - spec_center(spec);
  const Vec u = d / d.norm();
  const Mat gi = g.value.inverse();
  const Vec giu = gi * u;
  const Vec nu = giu / std::sqrt(u.dot(giu));
  return mean_curvature(spec, p) - nu.dot(f.grad);
}

}  // namespace wmass
