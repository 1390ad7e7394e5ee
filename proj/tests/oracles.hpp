#pragma once

// Test-only oracles, independent of the implementation paths they check.

#include "wmass/wmass.hpp"

namespace oracles {

using namespace wmass;

/// Scalar curvature of the conformally flat metric u^{4/(n-2)} δ via the
/// Yamabe identity R = -4(n-1)/(n-2) · u^{-(n+2)/(n-2)} Δ̊u, with Δ̊u from
/// the radial profile of u.  Independent of the Christoffel/Ricci pipeline.
inline double yamabe_scalar(int n, const RadialProfile& u, double r) {
  const auto d = u(r);
  const double lap_u = d[2] + (n - 1.0) * d[1] / r;
  return -4.0 * (n - 1.0) / (n - 2.0) * std::pow(d[0], -(n + 2.0) / (n - 2.0)) * lap_u;
}

/// Central-difference directional derivative of the densitised curvature:
/// d/dt|_0 [ S_f(g+th, f+tφ) e^{-(f+tφ)} √det(g+th) ] / (e^{-f} √det g).
/// This is the oracle for dPhi.
inline double dphi_fd(const WeightedManifoldSpec& spec, const Perturbation& pert,
                      const EndPoint& p, double t) {
  auto psi = [&](double s) {
    WeightedManifoldSpec bent = spec;
    bent.metric = mf_plus_tensor(spec.metric, pert.h, s);
    bent.weight = sf_add(spec.weight, sf_scale(pert.phi, s));
    const GeometryJet geo = geometry_at(bent, p);
    return geo.conf_scal * std::exp(-geo.f.value) * std::sqrt(geo.det_g);
  };
  const GeometryJet base = geometry_at(spec, p);
  const double density0 = std::exp(-base.f.value) * std::sqrt(base.det_g);
  return (psi(t) - psi(-t)) / (2.0 * t) / density0;
}

/// The classical static potential of the n-dimensional Schwarzschild metric
/// in isotropic coordinates (independent transcription used by the
/// staticity tests).
inline double schwarzschild_potential(int n, double m, double r) {
  const double w = 0.5 * m * std::pow(r, -(n - 2.0));
  return (1.0 - w) / (1.0 + w);
}

/// Deterministic rotation: Givens rotation in the (0,1) plane composed with
/// one in (1,2) when n >= 3.
inline Mat test_rotation(int n, double angle1 = 0.73, double angle2 = -0.41) {
  Mat q = Mat::Identity(n, n);
  Mat g1 = Mat::Identity(n, n);
  g1(0, 0) = std::cos(angle1);
  g1(0, 1) = -std::sin(angle1);
  g1(1, 0) = std::sin(angle1);
  g1(1, 1) = std::cos(angle1);
  Mat g2 = Mat::Identity(n, n);
  g2(1, 1) = std::cos(angle2);
  g2(1, 2) = -std::sin(angle2);
  g2(2, 1) = std::sin(angle2);
  g2(2, 2) = std::cos(angle2);
  q = g1 * g2;
  return q;
}

inline double max_abs_diff(const Jet2Sym2& a, const Jet2Sym2& b) {
  double m = (a.value - b.value).cwiseAbs().maxCoeff();
  const int n = a.dim();
  for (int k = 0; k < n; ++k) {
    m = std::max(m, (a.d1[k] - b.d1[k]).cwiseAbs().maxCoeff());
    for (int l = 0; l < n; ++l)
      m = std::max(m, (a.d2[k][l] - b.d2[k][l]).cwiseAbs().maxCoeff());
  }
  return m;
}

}  // namespace oracles
