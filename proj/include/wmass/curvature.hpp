#pragma once

// Pointwise curvature from metric/weight 2-jets: Christoffels and their
// coordinate derivatives, Ricci, scalar curvature, covariant Hessian and
// Laplacian of the weight, and the weighted curvatures
//   R_f = R + 2Δf - |∇f|²,    S_f = R_f + |∇f|²/(n-1).
//
// Conventions: Δ = ∇_i ∇^i, and the curvature sign making round spheres
// positively curved,
//   Ric_ij = ∂_k Γ^k_ij - ∂_j Γ^k_ki + Γ^k_kl Γ^l_ij - Γ^k_jl Γ^l_ki.

#include "wmass/families.hpp"

namespace wmass {

struct GeometryJet {
  int n = 3;
  Jet2Metric g;
  Jet2Scalar f;
  Mat inv_metric;   // g^{ij}
  Ten3 dinv;        // ∂_k g^{ij}
  Ten3 gamma;       // gamma[k](i,j) = Γ^k_{ij}
  Ten4 dgamma;      // dgamma[m][k](i,j) = ∂_m Γ^k_{ij}
  Mat ric;
  double scal = 0.0;
  double det_g = 1.0;
  Vec grad_f;       // ∇^i f (index raised)
  Mat hess_f;       // ∇²_{ij} f (covariant)
  double lap_f = 0.0;
  double gradnorm2_f = 0.0;
  double weighted_scal = 0.0;  // R_f
  double conf_scal = 0.0;      // S_f
};

/// Covariant Hessian of a scalar 2-jet: ∂_i∂_j s - Γ^k_{ij} ∂_k s.
inline Mat covariant_hessian(const GeometryJet& geo, const Jet2Scalar& s) {
  Mat h = s.hess;
  for (int k = 0; k < geo.n; ++k) h -= s.grad[k] * geo.gamma[k];
  return h;
}

inline double laplacian(const GeometryJet& geo, const Jet2Scalar& s) {
  return (geo.inv_metric * covariant_hessian(geo, s)).trace();
}

inline GeometryJet geometry_at(const WeightedManifoldSpec& spec, const EndPoint& p) {
  GeometryJet geo;
  const int n = spec.n;
  geo.n = n;
  geo.g = eval_metric(spec, p);
  geo.f = eval_weight(spec, p);

  const Mat& g = geo.g.value;
  geo.inv_metric = g.inverse();
  geo.det_g = g.determinant();
  const Mat& gi = geo.inv_metric;

  // ∂_k g^{ij} = -g^{ia} g^{jb} ∂_k g_ab
  geo.dinv = zero_ten3(n);
  for (int k = 0; k < n; ++k) geo.dinv[k] = -gi * geo.g.d1[k] * gi;

  // Γ^k_{ij} = ½ g^{kl} (∂_i g_jl + ∂_j g_il - ∂_l g_ij)
  geo.gamma = zero_ten3(n);
  Ten3 gamma_low = zero_ten3(n);  // gamma_low[l](i,j) = ½(∂_i g_jl + ∂_j g_il - ∂_l g_ij)
  for (int l = 0; l < n; ++l) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        m(i, j) = 0.5 * (geo.g.d1[i](j, l) + geo.g.d1[j](i, l) - geo.g.d1[l](i, j));
    gamma_low[l] = m;
  }
  for (int k = 0; k < n; ++k) {
    geo.gamma[k] = Mat::Zero(n, n);
    for (int l = 0; l < n; ++l) geo.gamma[k] += gi(k, l) * gamma_low[l];
  }

  // ∂_m Γ^k_{ij}
  geo.dgamma = zero_ten4(n);
  for (int m = 0; m < n; ++m) {
    Ten3 dlow = zero_ten3(n);  // ∂_m gamma_low[l]
    for (int l = 0; l < n; ++l) {
      Mat mm(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          mm(i, j) = 0.5 * (geo.g.d2[m][i](j, l) + geo.g.d2[m][j](i, l) -
                            geo.g.d2[m][l](i, j));
      dlow[l] = mm;
    }
    for (int k = 0; k < n; ++k) {
      Mat acc = Mat::Zero(n, n);
      for (int l = 0; l < n; ++l)
        acc += geo.dinv[m](k, l) * gamma_low[l] + gi(k, l) * dlow[l];
      geo.dgamma[m][k] = acc;
    }
  }

  // Ric_ij = ∂_k Γ^k_{ij} - ∂_j Γ^k_{ki} + Γ^k_{kl} Γ^l_{ij} - Γ^k_{jl} Γ^l_{ki}
  geo.ric = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = 0.0;
      for (int k = 0; k < n; ++k) {
        v += geo.dgamma[k][k](i, j) - geo.dgamma[j][k](k, i);
        for (int l = 0; l < n; ++l)
          v += geo.gamma[k](k, l) * geo.gamma[l](i, j) -
               geo.gamma[k](j, l) * geo.gamma[l](k, i);
      }
      geo.ric(i, j) = v;
    }
  symmetrise(geo.ric);
  geo.scal = (gi * geo.ric).trace();

  geo.grad_f = gi * geo.f.grad;
  geo.hess_f = covariant_hessian(geo, geo.f);
  geo.lap_f = (gi * geo.hess_f).trace();
  geo.gradnorm2_f = geo.f.grad.dot(geo.grad_f);
  geo.weighted_scal = geo.scal + 2.0 * geo.lap_f - geo.gradnorm2_f;
  geo.conf_scal = geo.weighted_scal + geo.gradnorm2_f / (n - 1.0);
  return geo;
}

/// S_f as an evaluable scalar field.
inline std::function<double(const Vec&)> conf_scal_field(const WeightedManifoldSpec& spec) {
  return [spec](const Vec& x) { return geometry_at(spec, EndPoint::of(x)).conf_scal; };
}

/// Debug export used by the CLI probe task.
inline json geometry_to_json(const GeometryJet& geo) {
  auto mat = [](const Mat& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
      json row = json::array();
      for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
      rows.push_back(row);
    }
    return rows;
  };
  json gamma = json::array();
  for (const Mat& m : geo.gamma) gamma.push_back(mat(m));
  json grad = json::array();
  for (int i = 0; i < geo.grad_f.size(); ++i) grad.push_back(geo.grad_f[i]);
  return json{{"n", geo.n},
              {"metric", mat(geo.g.value)},
              {"inv_metric", mat(geo.inv_metric)},
              {"gamma", gamma},
              {"ric", mat(geo.ric)},
              {"scal", geo.scal},
              {"grad_f", grad},
              {"hess_f", mat(geo.hess_f)},
              {"lap_f", geo.lap_f},
              {"gradnorm2_f", geo.gradnorm2_f},
              {"weighted_scal", geo.weighted_scal},
              {"conf_scal", geo.conf_scal}};
}

}  // namespace wmass
