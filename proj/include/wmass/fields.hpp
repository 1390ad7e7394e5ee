#pragma once

// Evaluable 2-jet fields on the asymptotic end.  Built-in families compose
// these with exact product/chain rules; user-supplied value-only callables
// fall back to central finite differences (4th order for first derivatives,
// 2nd order for second derivatives).

#include "wmass/types.hpp"

#include <functional>
#include <memory>
#include <utility>

namespace wmass {

struct ScalarField2 {
  std::function<Jet2Scalar(const Vec&)> eval;
  explicit operator bool() const { return static_cast<bool>(eval); }
};

/// Symmetric 2-tensor field with 2-jets (perturbations h, test tensors).
struct TensorField2 {
  std::function<Jet2Sym2(const Vec&)> eval;
  explicit operator bool() const { return static_cast<bool>(eval); }
};

/// Metric field; positive-definiteness is enforced at eval_metric().
struct MetricField2 {
  std::function<Jet2Sym2(const Vec&)> eval;
  explicit operator bool() const { return static_cast<bool>(eval); }
};

// ---------------------------------------------------------------------------
// Radial profiles: r ↦ (P, P', P'')

using RadialProfile = std::function<std::array<double, 3>(double)>;

inline RadialProfile rp_const(double c) {
  return [c](double) { return std::array<double, 3>{c, 0.0, 0.0}; };
}

/// a · r^{-k}
inline RadialProfile rp_inverse_power(double a, double k) {
  return [a, k](double r) {
    const double v = a * std::pow(r, -k);
    return std::array<double, 3>{v, -k * v / r, k * (k + 1.0) * v / (r * r)};
  };
}

/// 1 + Σ_k c_k r^{-k}, k = 1..len(c)
inline RadialProfile rp_one_plus_inverse_powers(std::vector<double> c) {
  return [c = std::move(c)](double r) {
    double v = 1.0, dv = 0.0, d2v = 0.0;
    double rk = 1.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double k = static_cast<double>(i + 1);
      rk /= r;  // r^{-(i+1)}
      v += c[i] * rk;
      dv += c[i] * (-k) * rk / r;
      d2v += c[i] * k * (k + 1.0) * rk / (r * r);
    }
    return std::array<double, 3>{v, dv, d2v};
  };
}

/// amp · (1-t²)^12 with t = (r-center)/radius; compactly supported, C^11
/// (smooth enough that Gauss box rules resolve the support boundary).
inline RadialProfile rp_bump(double center, double radius, double amp) {
  return [center, radius, amp](double r) {
    const double t = (r - center) / radius;
    if (std::abs(t) >= 1.0) return std::array<double, 3>{0.0, 0.0, 0.0};
    const double s = 1.0 - t * t;
    const double s10 = std::pow(s, 10.0);
    const double v = amp * s10 * s * s;                  // s^12
    const double dv = amp * (-24.0 * t) * s10 * s;       // -24 t s^11
    const double d2v = amp * (-24.0 * s10 * s + 528.0 * t * t * s10);
    const double inv = 1.0 / radius;
    return std::array<double, 3>{v, dv * inv, d2v * inv * inv};
  };
}

/// a · e^{-r/scale}
inline RadialProfile rp_exp(double a, double scale) {
  return [a, scale](double r) {
    const double v = a * std::exp(-r / scale);
    return std::array<double, 3>{v, -v / scale, v / (scale * scale)};
  };
}

// ---------------------------------------------------------------------------
// Scalar-field combinators

inline ScalarField2 sf_const(int n, double c) {
  return ScalarField2{[n, c](const Vec&) { return jet_const(n, c); }};
}

inline ScalarField2 sf_zero(int n) { return sf_const(n, 0.0); }

inline ScalarField2 sf_radial(RadialProfile p) {
  return ScalarField2{[p = std::move(p)](const Vec& x) {
    const auto d = p(x.norm());
    return jet_from_radial(d[0], d[1], d[2], x);
  }};
}

/// a + b·x
inline ScalarField2 sf_affine(double a, Vec b) {
  return ScalarField2{[a, b = std::move(b)](const Vec& x) { return jet_affine(a, b, x); }};
}

inline ScalarField2 sf_coordinate(int n, int axis) {
  Vec b = Vec::Zero(n);
  b[axis] = 1.0;
  return sf_affine(0.0, b);
}

/// |x|²
inline ScalarField2 sf_norm2(int n) {
  return ScalarField2{[n](const Vec& x) {
    return Jet2Scalar{x.squaredNorm(), 2.0 * x, 2.0 * Mat::Identity(n, n)};
  }};
}

inline ScalarField2 sf_add(ScalarField2 a, ScalarField2 b) {
  return ScalarField2{[a = std::move(a), b = std::move(b)](const Vec& x) {
    return jet_add(a.eval(x), b.eval(x));
  }};
}

inline ScalarField2 sf_scale(ScalarField2 a, double s) {
  return ScalarField2{[a = std::move(a), s](const Vec& x) { return jet_scale(a.eval(x), s); }};
}

inline ScalarField2 sf_mul(ScalarField2 a, ScalarField2 b) {
  return ScalarField2{[a = std::move(a), b = std::move(b)](const Vec& x) {
    return jet_mul(a.eval(x), b.eval(x));
  }};
}

inline ScalarField2 sf_exp_of(ScalarField2 a) {
  return ScalarField2{[a = std::move(a)](const Vec& x) { return jet_exp(a.eval(x)); }};
}

inline ScalarField2 sf_translate(ScalarField2 a, Vec x0) {
  return ScalarField2{[a = std::move(a), x0 = std::move(x0)](const Vec& x) {
    return a.eval(x - x0);
  }};
}

/// Pullback by the rotation Q: F'(x) = F(Qx); grad' = Qᵀ grad, hess' = Qᵀ hess Q.
inline ScalarField2 sf_rotate(ScalarField2 a, Mat q) {
  return ScalarField2{[a = std::move(a), q = std::move(q)](const Vec& x) {
    Jet2Scalar j = a.eval(q * x);
    return Jet2Scalar{j.value, q.transpose() * j.grad, q.transpose() * j.hess * q};
  }};
}

// ---------------------------------------------------------------------------
// Tensor-field combinators

inline TensorField2 tf_zero(int n) {
  return TensorField2{[n](const Vec&) { return Jet2Sym2::zero(n); }};
}

inline TensorField2 tf_const_times(Mat m, ScalarField2 s) {
  symmetrise(m);
  return TensorField2{[m = std::move(m), s = std::move(s)](const Vec& x) {
    return sym2_const_times_scalar(m, s.eval(x));
  }};
}

inline TensorField2 tf_add(TensorField2 a, TensorField2 b) {
  return TensorField2{[a = std::move(a), b = std::move(b)](const Vec& x) {
    return sym2_add(a.eval(x), b.eval(x));
  }};
}

inline TensorField2 tf_scale(TensorField2 a, double s) {
  return TensorField2{[a = std::move(a), s](const Vec& x) { return sym2_scale(a.eval(x), s); }};
}

inline TensorField2 tf_translate(TensorField2 a, Vec x0) {
  return TensorField2{[a = std::move(a), x0 = std::move(x0)](const Vec& x) {
    return a.eval(x - x0);
  }};
}

/// x_i x_j / r² with exact jets (the radial rank-one projector).
inline TensorField2 tf_radial_projector(int n) {
  return TensorField2{[n](const Vec& x) {
    const double r = x.norm();
    const Vec u = x / r;
    const Mat id = Mat::Identity(n, n);
    Jet2Sym2 out = Jet2Sym2::zero(n);
    out.value = u * u.transpose();
    // ∂_k u_i = (δ_ki - u_k u_i)/r
    Mat du(n, n);  // du(k,i) = ∂_k u_i
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i) du(k, i) = (id(k, i) - u[k] * u[i]) / r;
    for (int k = 0; k < n; ++k)
      out.d1[k] = du.row(k).transpose() * u.transpose() + u * du.row(k);
    // ∂_l ∂_k u_i = -(∂_l u_k u_i + u_k ∂_l u_i)/r - (δ_ki - u_k u_i) u_l / r²
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        Vec d2u(n);  // ∂_l ∂_k u_i
        for (int i = 0; i < n; ++i)
          d2u[i] = -(du(l, k) * u[i] + u[k] * du(l, i)) / r -
                   (id(k, i) - u[k] * u[i]) * u[l] / (r * r);
        Mat term = d2u * u.transpose() + du.row(k).transpose() * du.row(l) +
                   du.row(l).transpose() * du.row(k) + u * d2u.transpose();
        out.d2[k][l] = term;
      }
    return out;
  }};
}

// ---------------------------------------------------------------------------
// Metric-field combinators

inline MetricField2 mf_flat(int n) {
  return MetricField2{[n](const Vec&) {
    Jet2Sym2 j = Jet2Sym2::zero(n);
    j.value = Mat::Identity(n, n);
    return j;
  }};
}

/// Pointwise scalar multiple c(x)·g(x) (conformal factors).
inline MetricField2 mf_scalar_times(ScalarField2 c, MetricField2 base) {
  return MetricField2{[c = std::move(c), base = std::move(base)](const Vec& x) {
    return sym2_scalar_mul(c.eval(x), base.eval(x));
  }};
}

inline MetricField2 mf_plus_tensor(MetricField2 base, TensorField2 h, double t = 1.0) {
  return MetricField2{[base = std::move(base), h = std::move(h), t](const Vec& x) {
    return sym2_add(base.eval(x), sym2_scale(h.eval(x), t));
  }};
}

/// Spherically symmetric metric A(r) dr² + B(r) r² dΩ², written in end
/// coordinates as B δ_ij + (A-B) x_i x_j / r².
inline MetricField2 mf_radial_ab(int n, RadialProfile a, RadialProfile b) {
  ScalarField2 sa = sf_radial(std::move(a));
  ScalarField2 sb = sf_radial(std::move(b));
  TensorField2 proj = tf_radial_projector(n);
  return MetricField2{[n, sa, sb, proj](const Vec& x) {
    const Jet2Scalar ja = sa.eval(x);
    const Jet2Scalar jb = sb.eval(x);
    Jet2Sym2 iso = sym2_const_times_scalar(Mat::Identity(n, n), jb);
    Jet2Scalar diff = jet_add(ja, jet_scale(jb, -1.0));
    return sym2_add(iso, sym2_scalar_mul(diff, proj.eval(x)));
  }};
}

inline MetricField2 mf_translate(MetricField2 a, Vec x0) {
  return MetricField2{[a = std::move(a), x0 = std::move(x0)](const Vec& x) {
    return a.eval(x - x0);
  }};
}

/// Pullback by the rotation Q: g'_{ij}(x) = Q_{ai} Q_{bj} g_{ab}(Qx), with the
/// chain-rule factors on the derivative slots.
inline MetricField2 mf_rotate(MetricField2 a, Mat q) {
  return MetricField2{[a = std::move(a), q = std::move(q)](const Vec& x) {
    const int n = static_cast<int>(x.size());
    Jet2Sym2 j = a.eval(q * x);
    Jet2Sym2 out = Jet2Sym2::zero(n);
    out.value = q.transpose() * j.value * q;
    Ten3 rotated_d1(n);
    for (int k = 0; k < n; ++k) rotated_d1[k] = q.transpose() * j.d1[k] * q;
    for (int k = 0; k < n; ++k) {
      out.d1[k] = Mat::Zero(n, n);
      for (int m = 0; m < n; ++m) out.d1[k] += q(m, k) * rotated_d1[m];
    }
    Ten4 rotated_d2 = zero_ten4(n);
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) rotated_d2[k][l] = q.transpose() * j.d2[k][l] * q;
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        out.d2[k][l] = Mat::Zero(n, n);
        for (int m = 0; m < n; ++m)
          for (int p = 0; p < n; ++p)
            out.d2[k][l] += q(m, k) * q(p, l) * rotated_d2[m][p];
      }
    return out;
  }};
}

// ---------------------------------------------------------------------------
// Finite-difference fallback for user-defined value-only callables

struct FdParams {
  double h0 = 1e-4;    // base step
  double scale = 1.0;  // multiplier, halved in convergence studies
  double step(double r) const { return scale * std::max(h0, 1e-5 * r); }
};

namespace detail {

template <typename F, typename V>
void fd_jet(const F& value, const Vec& x, const FdParams& fd, V& val, std::vector<V>& grad,
            std::vector<std::vector<V>>& hess) {
  const int n = static_cast<int>(x.size());
  const double h = fd.step(x.norm());
  val = value(x);
  grad.assign(n, val);
  hess.assign(n, std::vector<V>(n, val));
  std::vector<V> fp(n, val), fm(n, val);
  for (int i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e[i] = h;
    fp[i] = value(x + e);
    fm[i] = value(x - e);
    const V fp2 = value(x + 2.0 * e);
    const V fm2 = value(x - 2.0 * e);
    grad[i] = (8.0 * (fp[i] - fm[i]) - (fp2 - fm2)) / (12.0 * h);
    hess[i][i] = (fp[i] - 2.0 * val + fm[i]) / (h * h);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Vec ei = Vec::Zero(n), ej = Vec::Zero(n);
      ei[i] = h;
      ej[j] = h;
      const V fpp = value(x + ei + ej);
      const V fpm = value(x + ei - ej);
      const V fmp = value(x - ei + ej);
      const V fmm = value(x - ei - ej);
      hess[i][j] = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
      hess[j][i] = hess[i][j];
    }
}

}  // namespace detail

inline ScalarField2 sf_finite_difference(std::function<double(const Vec&)> value,
                                         FdParams fd = {}) {
  return ScalarField2{[value = std::move(value), fd](const Vec& x) {
    const int n = static_cast<int>(x.size());
    double v;
    std::vector<double> g;
    std::vector<std::vector<double>> h;
    detail::fd_jet(value, x, fd, v, g, h);
    Jet2Scalar out = Jet2Scalar::zero(n);
    out.value = v;
    for (int i = 0; i < n; ++i) {
      out.grad[i] = g[i];
      for (int j = 0; j < n; ++j) out.hess(i, j) = h[i][j];
    }
    symmetrise(out);
    return out;
  }};
}

inline MetricField2 mf_finite_difference(std::function<Mat(const Vec&)> value,
                                         FdParams fd = {}) {
  return MetricField2{[value = std::move(value), fd](const Vec& x) {
    const int n = static_cast<int>(x.size());
    Mat v;
    std::vector<Mat> g;
    std::vector<std::vector<Mat>> h;
    detail::fd_jet(value, x, fd, v, g, h);
    Jet2Sym2 out = Jet2Sym2::zero(n);
    out.value = v;
    for (int k = 0; k < n; ++k) {
      out.d1[k] = g[k];
      for (int l = 0; l < n; ++l) out.d2[k][l] = h[k][l];
    }
    symmetrise(out);
    return out;
  }};
}

}  // namespace wmass
