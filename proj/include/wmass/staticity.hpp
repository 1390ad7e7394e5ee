#pragma once

// The linearised weighted curvature map and its adjoint:
//
//   DΦ_(g,f)(h,φ) = [ (∇^i∇^j h_ij - Δ tr_g h)
//                     - 2(∇^j h_ij - ½∇_i tr_g h)∇^i f
//                     - h_ij(Ric^{ij} + 2∇^i∇^j f - (n-2)/(n-1) ∇^i f ∇^j f)
//                     + 2Δφ - 2(n-2)/(n-1) ∇^i f ∇_i φ
//                     + S_f (½ tr_g h - φ) ] e^{-f} dV_g
//
//   F_g^*(V)_ij = ∇²_ij V - (ΔV) g_ij + ⟨∇V,∇f⟩ g_ij
//                 - V(Ric_ij + ∇²_ij f + (1/(n-1)) ∂_i f ∂_j f) + ½ V S_f g_ij
//   F_f^*(V)    = 2ΔV - 2n/(n-1) ⟨∇V,∇f⟩ - 2/(n-1) V Δf
//                 + 2/(n-1) V |∇f|² - V S_f
//
// (F_g^* is stored with lowered indices; the trace identity
//  tr_g F_g^*(V) + (n-1)/2 F_f^*(V) = -½ V S_f holds pointwise.)
//
// Conformal identities for u = e^{-f/(n-1)} V on g̃ = e^{-2f/(n-1)} g:
//   Δ̃u           = e^{+f/(n-1)} (½ F_f^*(V) + ½ V S_f)
//   ∇̃²u - u Ric̃ = e^{-f/(n-1)} (F_g^*(V) + ½ F_f^*(V) g)

#include "wmass/conformal.hpp"
#include "wmass/mass.hpp"

namespace wmass {

// ---------------------------------------------------------------------------
// Covariant derivatives of a symmetric 2-tensor jet

namespace detail {

/// (∇_a h)_ij = ∂_a h_ij - Γ^m_{ai} h_mj - Γ^m_{aj} h_im
inline Ten3 covariant_d1_sym2(const GeometryJet& geo, const Jet2Sym2& h) {
  const int n = geo.n;
  Ten3 d1 = zero_ten3(n);
  for (int a = 0; a < n; ++a) {
    Mat m = h.d1[a];
    for (int mm = 0; mm < n; ++mm) {
      // subtract Γ^m_{a i} h_{m j} (rows) and Γ^m_{a j} h_{i m} (cols)
      m -= geo.gamma[mm].col(a) * h.value.row(mm);
      m -= h.value.col(mm) * geo.gamma[mm].col(a).transpose();
    }
    d1[a] = m;
  }
  return d1;
}

/// (∇_a ∇_b h)_ij
inline Ten4 covariant_d2_sym2(const GeometryJet& geo, const Jet2Sym2& h, const Ten3& cov_d1) {
  const int n = geo.n;
  Ten4 d2 = zero_ten4(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      // ∂_a (∇_b h)_ij
      Mat m = h.d2[a][b];
      for (int mm = 0; mm < n; ++mm) {
        m -= geo.dgamma[a][mm].col(b) * h.value.row(mm) +
             geo.gamma[mm].col(b) * h.d1[a].row(mm);
        m -= h.d1[a].col(mm) * geo.gamma[mm].col(b).transpose() +
             h.value.col(mm) * geo.dgamma[a][mm].col(b).transpose();
      }
      // connection terms of the outer derivative
      for (int mm = 0; mm < n; ++mm) {
        m -= geo.gamma[mm](a, b) * cov_d1[mm];
        m -= geo.gamma[mm].col(a) * cov_d1[b].row(mm);
        m -= cov_d1[b].col(mm) * geo.gamma[mm].col(a).transpose();
      }
      d2[a][b] = m;
    }
  return d2;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Linearisation

/// Density coefficient of DΦ_(g,f)(h,φ) with respect to e^{-f} dV_g.
inline double dPhi(const WeightedManifoldSpec& spec, const Perturbation& pert,
                   const EndPoint& p) {
  const GeometryJet geo = geometry_at(spec, p);
  const int n = geo.n;
  const Mat& gi = geo.inv_metric;
  Jet2Sym2 h = pert.h.eval(p.x);
  symmetrise(h);
  const Jet2Scalar phi = pert.phi.eval(p.x);

  const Ten3 dh = detail::covariant_d1_sym2(geo, h);
  const Ten4 d2h = detail::covariant_d2_sym2(geo, h, dh);

  // ∇^i∇^j h_ij (outer derivative contracted with the second slot) and Δ tr_g h
  double divdiv = 0.0, lap_tr = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          divdiv += gi(a, b) * gi(c, d) * d2h[a][c](d, b);
          lap_tr += gi(a, b) * gi(c, d) * d2h[a][b](c, d);
        }

  // (div h)_i = ∇^j h_ij and ∂_i tr_g h
  Vec div_h = Vec::Zero(n), dtr = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      for (int b = 0; b < n; ++b) div_h[i] += gi(j, b) * dh[b](i, j);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        dtr[i] += geo.dinv[i](a, b) * h.value(a, b) + gi(a, b) * h.d1[i](a, b);
  }

  const Mat ric_up = gi * geo.ric * gi;
  const Mat hessf_up = gi * geo.hess_f * gi;
  const double coeff = (n - 2.0) / (n - 1.0);

  double out = divdiv - lap_tr;
  out -= 2.0 * (div_h - 0.5 * dtr).dot(geo.grad_f);
  const Mat mass_term =
      ric_up + 2.0 * hessf_up - coeff * geo.grad_f * geo.grad_f.transpose();
  out -= (h.value.array() * mass_term.array()).sum();
  out += 2.0 * laplacian(geo, phi) - 2.0 * coeff * geo.grad_f.dot(phi.grad);
  out += geo.conf_scal * (0.5 * (gi * h.value).trace() - phi.value);
  return out;
}

// ---------------------------------------------------------------------------
// Adjoint

struct AdjointValue {
  Mat fg;       // F_g^*(V) with lowered indices
  double ff = 0.0;
  bool densitised = false;  // true once the e^{-f}√det g factor is included
};

inline AdjointValue adjoint(const WeightedManifoldSpec& spec, const ScalarField2& v,
                            const EndPoint& p, bool densitised = false) {
  const GeometryJet geo = geometry_at(spec, p);
  const int n = geo.n;
  const Mat& g = geo.g.value;
  const Jet2Scalar vj = v.eval(p.x);
  const Mat hess_v = covariant_hessian(geo, vj);
  const double lap_v = (geo.inv_metric * hess_v).trace();
  const double grad_vf = geo.grad_f.dot(vj.grad);  // ⟨∇V, ∇f⟩

  AdjointValue out;
  out.fg = hess_v - lap_v * g + grad_vf * g -
           vj.value * (geo.ric + geo.hess_f +
                       geo.f.grad * geo.f.grad.transpose() / (n - 1.0)) +
           0.5 * vj.value * geo.conf_scal * g;
  out.ff = 2.0 * lap_v - 2.0 * n / (n - 1.0) * grad_vf -
           2.0 / (n - 1.0) * vj.value * geo.lap_f +
           2.0 / (n - 1.0) * vj.value * geo.gradnorm2_f - vj.value * geo.conf_scal;
  if (densitised) {
    const double density = std::exp(-geo.f.value) * std::sqrt(geo.det_g);
    out.fg *= density;
    out.ff *= density;
    out.densitised = true;
  }
  return out;
}

/// tr_g F_g^*(V) + (n-1)/2 F_f^*(V) + ½ V S_f  (identically zero).
inline double trace_identity_residual(const WeightedManifoldSpec& spec, const ScalarField2& v,
                                      const EndPoint& p) {
  const GeometryJet geo = geometry_at(spec, p);
  const AdjointValue adj = adjoint(spec, v, p);
  const double tr = (geo.inv_metric * adj.fg).trace();
  return tr + 0.5 * (spec.n - 1.0) * adj.ff +
         0.5 * v.eval(p.x).value * geo.conf_scal;
}

// ---------------------------------------------------------------------------
// Michel pointwise identity at the flat background

/// V DΦ_(δ,0)(h,φ) - ⟨(h,φ), DΦ*_(δ,0)(V)⟩ - div 𝕌(V,h,φ); identically zero,
/// so the value measures transcription error between the three code paths.
inline double michel_pointwise_residual(const WeightedManifoldSpec& flat_background,
                                        const Perturbation& pert, const ScalarField2& v,
                                        const EndPoint& p) {
  const GeometryJet geo = geometry_at(flat_background, p);
  if ((geo.g.value - Mat::Identity(geo.n, geo.n)).cwiseAbs().maxCoeff() > 1e-13 ||
      std::abs(geo.f.value) > 1e-13)
    throw BadParams("michel_pointwise_residual requires the flat background");
  const Jet2Sym2 h = pert.h.eval(p.x);
  const double phi = pert.phi.eval(p.x).value;
  const AdjointValue adj = adjoint(flat_background, v, p);
  const Mat fg_up = geo.inv_metric * adj.fg * geo.inv_metric;
  const double pairing = (h.value.array() * fg_up.array()).sum() + phi * adj.ff;
  const double lhs = v.eval(p.x).value * dPhi(flat_background, pert, p) - pairing;
  return lhs - div_flux_U(v, pert, p);
}

// ---------------------------------------------------------------------------
// Conformal staticity identities

struct Lemma32Residuals {
  double res_lap = 0.0;
  Mat res_hessric;
};

inline Lemma32Residuals lemma32_residuals(const WeightedManifoldSpec& spec,
                                          const ScalarField2& v, const EndPoint& p) {
  const ConformalPair pair = conformal_spec(spec);
  const ScalarField2 u = potential_transform(v, spec);
  const GeometryJet tilde = geometry_at(pair.tilde, p);
  const Jet2Scalar uj = u.eval(p.x);
  const Mat hess_u = covariant_hessian(tilde, uj);
  const double lap_u = (tilde.inv_metric * hess_u).trace();

  const GeometryJet base = geometry_at(spec, p);
  const AdjointValue adj = adjoint(spec, v, p);
  const double vv = v.eval(p.x).value;
  const double expo = base.f.value / (spec.n - 1.0);

  Lemma32Residuals out;
  out.res_lap = lap_u - std::exp(expo) * (0.5 * adj.ff + 0.5 * vv * base.conf_scal);
  out.res_hessric = hess_u - uj.value * tilde.ric -
                    std::exp(-expo) * (adj.fg + 0.5 * adj.ff * base.g.value);
  return out;
}

// ---------------------------------------------------------------------------
// Static certification over probe grids

struct StaticResidual {
  double fg_sup = 0.0;  // max Frobenius norm of F_g^*(V) over the grid
  double ff_sup = 0.0;
};

inline StaticResidual f_static_residual(const WeightedManifoldSpec& spec, const ScalarField2& v,
                                        const std::vector<Vec>& grid) {
  StaticResidual out;
  for (const Vec& x : grid) {
    const EndPoint p = EndPoint::of(x);
    const AdjointValue adj = adjoint(spec, v, p);
    out.fg_sup = std::max(out.fg_sup, adj.fg.norm());
    out.ff_sup = std::max(out.ff_sup, std::abs(adj.ff));
  }
  return out;
}

struct StaticCertificate {
  double fg_sup = 0.0;
  double ff_sup = 0.0;
  double sf_sup = 0.0;  // sup |S_f| over the grid
  bool certified = false;

  json to_json() const {
    return json{{"fg_sup", fg_sup}, {"ff_sup", ff_sup}, {"sf_sup", sf_sup},
                {"certified", certified}};
  }
};

/// Numerical certificate: both adjoint residuals below threshold, plus the
/// implied S_f ≡ 0 report (tested, not proved).
inline StaticCertificate s_f_vanishing_check(const WeightedManifoldSpec& spec,
                                             const ScalarField2& v, const std::vector<Vec>& grid,
                                             double threshold = 1e-6) {
  StaticCertificate cert;
  const StaticResidual res = f_static_residual(spec, v, grid);
  cert.fg_sup = res.fg_sup;
  cert.ff_sup = res.ff_sup;
  for (const Vec& x : grid)
    cert.sf_sup = std::max(cert.sf_sup, std::abs(geometry_at(spec, EndPoint::of(x)).conf_scal));
  cert.certified = cert.fg_sup < threshold && cert.ff_sup < threshold;
  return cert;
}

// ---------------------------------------------------------------------------
// Adjoint duality over a compact support (integration-by-parts closure):
// ∫ V·DΦ(h,φ) e^{-f}dV_g  -  ∫ (h_ij F_g^{*ij} + φ F_f^*) e^{-f}dV_g.

inline double adjoint_duality_residual(const WeightedManifoldSpec& spec, const Perturbation& pert,
                                       const ScalarField2& v, const VolumeRule& rule) {
  double lhs = 0.0, rhs = 0.0;
  for (int i = 0; i < rule.weights.size(); ++i) {
    const EndPoint p = EndPoint::of(rule.nodes[i]);
    const GeometryJet geo = geometry_at(spec, p);
    const double density = rule.weights[i] * std::exp(-geo.f.value) * std::sqrt(geo.det_g);
    lhs += density * v.eval(p.x).value * dPhi(spec, pert, p);
    const AdjointValue adj = adjoint(spec, v, p);
    const Mat fg_up = geo.inv_metric * adj.fg * geo.inv_metric;
    const Jet2Sym2 h = pert.h.eval(p.x);
    rhs += density * ((h.value.array() * fg_up.array()).sum() +
                      pert.phi.eval(p.x).value * adj.ff);
  }
  return lhs - rhs;
}

/// Duality residual over the perturbation's own support; both pairings are
/// linear in (h, φ), so a term decomposition is integrated piecewise.
inline double adjoint_duality_residual(const WeightedManifoldSpec& spec, const Perturbation& pert,
                                       const ScalarField2& v, int pts_per_axis = 28) {
  if (!pert.terms.empty()) {
    double acc = 0.0;
    for (const Perturbation& term : pert.terms)
      acc += adjoint_duality_residual(spec, term, v, pts_per_axis);
    return acc;
  }
  if (!pert.support) throw BadParams("duality integral needs a declared support ball");
  const Ball& ball = *pert.support;
  const VolumeRule rule = box_rule(Vec(ball.center.array() - ball.radius),
                                   Vec(ball.center.array() + ball.radius), pts_per_axis);
  return adjoint_duality_residual(spec, pert, v, rule);
}

// ---------------------------------------------------------------------------
// Potential catalogue

/// Named static-potential candidates: "one", "x1".."x<n>", "r2",
/// "schwarzschild" (V = e^{f/(n-1)} u_m, the certified potential of the
/// (f-)Schwarzschild families), or {"type":"affine","a":…,"b":[…]}.
inline ScalarField2 potential_from_id(const json& id, const WeightedManifoldSpec& spec) {
  const int n = spec.n;
  if (id.is_string()) {
    const std::string name = id.get<std::string>();
    if (name == "one") return sf_const(n, 1.0);
    if (name == "r2") return sf_norm2(n);
    if (name.size() == 2 && name[0] == 'x') {
      const int axis = name[1] - '1';
      if (axis < 0 || axis >= n) throw ConfigError("coordinate potential out of range: " + name);
      return sf_coordinate(n, axis);
    }
    if (name == "schwarzschild") {
      if (!spec.params.contains("m"))
        throw ConfigError("schwarzschild potential needs a family with mass parameter m");
      const double m = spec.params.at("m").get<double>();
      const double k = n - 2.0;
      ScalarField2 um{[m, k](const Vec& x) {
        const double r = x.norm();
        const auto mk_jet = [&](double c) {
          const auto d = rp_inverse_power(c, k)(r);
          return jet_add(jet_const(static_cast<int>(x.size()), 1.0),
                         jet_from_radial(d[0], d[1], d[2], x));
        };
        return jet_mul(mk_jet(-0.5 * m), jet_pow(mk_jet(0.5 * m), -1.0));
      }};
      ScalarField2 factor = sf_exp_of(sf_scale(spec.weight, 1.0 / (n - 1.0)));
      return sf_mul(std::move(factor), std::move(um));
    }
    throw ConfigError("unknown potential id: " + name);
  }
  if (id.is_object() && id.value("type", "") == "affine") {
    const double a = id.value("a", 0.0);
    Vec b = Vec::Zero(n);
    if (id.contains("b")) {
      const auto& arr = id.at("b");
      for (int i = 0; i < n && i < static_cast<int>(arr.size()); ++i) b[i] = arr[i].get<double>();
    }
    return sf_affine(a, b);
  }
  throw ConfigError("potential id must be a string or an affine object");
}

}  // namespace wmass
