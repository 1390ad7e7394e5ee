#pragma once

// Core value types shared by every module: end-chart points, 2-jets of
// scalar and symmetric-2-tensor fields, small jet algebra, and the error
// taxonomy surfaced through the public API.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wmass {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Coordinate-derivative stacks: d1[k](i,j) = ∂_k S_ij, d2[k][l](i,j) = ∂_k∂_l S_ij.
using Ten3 = std::vector<Mat>;
using Ten4 = std::vector<std::vector<Mat>>;

inline Ten3 zero_ten3(int n) { return Ten3(n, Mat::Zero(n, n)); }
inline Ten4 zero_ten4(int n) { return Ten4(n, Ten3(n, Mat::Zero(n, n))); }

// ---------------------------------------------------------------------------
// Errors

struct PointExcluded : std::runtime_error { using std::runtime_error::runtime_error; };
struct NotPositiveDefinite : std::runtime_error { using std::runtime_error::runtime_error; };
struct BadParams : std::runtime_error { using std::runtime_error::runtime_error; };
struct NoSignChange : std::runtime_error { using std::runtime_error::runtime_error; };
struct NotSpherical : std::runtime_error { using std::runtime_error::runtime_error; };
struct ZeroMass : std::runtime_error { using std::runtime_error::runtime_error; };
struct NonConverged : std::runtime_error { using std::runtime_error::runtime_error; };
struct WrongDimension : std::runtime_error { using std::runtime_error::runtime_error; };
struct PreconditionFailed : std::runtime_error { using std::runtime_error::runtime_error; };
struct ConfigError : std::runtime_error { using std::runtime_error::runtime_error; };

// ---------------------------------------------------------------------------
// Constants

/// Volume of the unit d-sphere S^d ⊂ R^{d+1}:  2 π^{(d+1)/2} / Γ((d+1)/2).
/// For an n-manifold end the flux normalisations use unit_sphere_volume(n-1).
inline double unit_sphere_volume(int d) {
  return 2.0 * std::pow(M_PI, 0.5 * (d + 1)) / std::tgamma(0.5 * (d + 1));
}

constexpr double kInfTau = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Points

/// A point of the asymptotic end chart, x ∈ R^n with r = |x| > 0.
struct EndPoint {
  Vec x;
  double r = 0.0;

  static EndPoint of(Vec coords) {
    EndPoint p;
    p.x = std::move(coords);
    p.r = p.x.norm();
    if (!(p.r > 0.0)) throw PointExcluded("end-chart point must have r > 0");
    return p;
  }
  int dim() const { return static_cast<int>(x.size()); }
};

// ---------------------------------------------------------------------------
// Jets

/// Second-order coordinate jet of a scalar field: value, ∂_i, ∂_i∂_j.
struct Jet2Scalar {
  double value = 0.0;
  Vec grad;
  Mat hess;

  static Jet2Scalar zero(int n) {
    return Jet2Scalar{0.0, Vec::Zero(n), Mat::Zero(n, n)};
  }
  int dim() const { return static_cast<int>(grad.size()); }
};

/// Second-order coordinate jet of a symmetric 2-tensor field (metric or
/// perturbation): value S_ij, d1[k](i,j) = ∂_k S_ij, d2[k][l](i,j).
struct Jet2Sym2 {
  Mat value;
  Ten3 d1;
  Ten4 d2;

  static Jet2Sym2 zero(int n) {
    return Jet2Sym2{Mat::Zero(n, n), zero_ten3(n), zero_ten4(n)};
  }
  int dim() const { return static_cast<int>(value.rows()); }
};

using Jet2Metric = Jet2Sym2;

// Exact symmetrisation; idempotent since 0.5*(a+a) == a in IEEE arithmetic.
inline void symmetrise(Mat& m) { m = (0.5 * (m + m.transpose())).eval(); }

inline Jet2Scalar& symmetrise(Jet2Scalar& j) {
  symmetrise(j.hess);
  return j;
}

inline Jet2Sym2& symmetrise(Jet2Sym2& j) {
  const int n = j.dim();
  symmetrise(j.value);
  for (auto& m : j.d1) symmetrise(m);
  for (int k = 0; k < n; ++k)
    for (int l = k; l < n; ++l) {
      Mat avg = 0.5 * (j.d2[k][l] + j.d2[l][k]);
      symmetrise(avg);
      j.d2[k][l] = avg;
      j.d2[l][k] = avg;
    }
  return j;
}

// ---------------------------------------------------------------------------
// Scalar-jet algebra (exact product/chain rules)

inline Jet2Scalar jet_const(int n, double c) {
  return Jet2Scalar{c, Vec::Zero(n), Mat::Zero(n, n)};
}

/// a + b·x evaluated at x.
inline Jet2Scalar jet_affine(double a, const Vec& b, const Vec& x) {
  const int n = static_cast<int>(x.size());
  return Jet2Scalar{a + b.dot(x), b, Mat::Zero(n, n)};
}

inline Jet2Scalar jet_add(const Jet2Scalar& a, const Jet2Scalar& b) {
  return Jet2Scalar{a.value + b.value, a.grad + b.grad, a.hess + b.hess};
}

inline Jet2Scalar jet_scale(const Jet2Scalar& a, double s) {
  return Jet2Scalar{s * a.value, s * a.grad, s * a.hess};
}

inline Jet2Scalar jet_mul(const Jet2Scalar& a, const Jet2Scalar& b) {
  Jet2Scalar out;
  out.value = a.value * b.value;
  out.grad = a.value * b.grad + b.value * a.grad;
  out.hess = a.value * b.hess + b.value * a.hess + a.grad * b.grad.transpose() +
             b.grad * a.grad.transpose();
  return out;
}

inline Jet2Scalar jet_exp(const Jet2Scalar& a) {
  const double e = std::exp(a.value);
  Jet2Scalar out;
  out.value = e;
  out.grad = e * a.grad;
  out.hess = e * (a.hess + a.grad * a.grad.transpose());
  return out;
}

/// u^p for u > 0.
inline Jet2Scalar jet_pow(const Jet2Scalar& u, double p) {
  if (!(u.value > 0.0)) throw BadParams("jet_pow requires a positive base");
  const double up = std::pow(u.value, p);
  const double up1 = p * std::pow(u.value, p - 1.0);
  const double up2 = p * (p - 1.0) * std::pow(u.value, p - 2.0);
  Jet2Scalar out;
  out.value = up;
  out.grad = up1 * u.grad;
  out.hess = up1 * u.hess + up2 * u.grad * u.grad.transpose();
  return out;
}

/// Chain rule for F(x) = P(|x|) given radial derivatives (P, P', P'') at r = |x|.
inline Jet2Scalar jet_from_radial(double p, double dp, double d2p, const Vec& x) {
  const int n = static_cast<int>(x.size());
  const double r = x.norm();
  const Vec nr = x / r;
  Jet2Scalar out;
  out.value = p;
  out.grad = dp * nr;
  out.hess = d2p * (nr * nr.transpose()) +
             (dp / r) * (Mat::Identity(n, n) - nr * nr.transpose());
  return out;
}

// ---------------------------------------------------------------------------
// Symmetric-2-tensor-jet algebra

inline Jet2Sym2 sym2_add(const Jet2Sym2& a, const Jet2Sym2& b) {
  const int n = a.dim();
  Jet2Sym2 out = Jet2Sym2::zero(n);
  out.value = a.value + b.value;
  for (int k = 0; k < n; ++k) {
    out.d1[k] = a.d1[k] + b.d1[k];
    for (int l = 0; l < n; ++l) out.d2[k][l] = a.d2[k][l] + b.d2[k][l];
  }
  return out;
}

inline Jet2Sym2 sym2_scale(const Jet2Sym2& a, double s) {
  const int n = a.dim();
  Jet2Sym2 out = Jet2Sym2::zero(n);
  out.value = s * a.value;
  for (int k = 0; k < n; ++k) {
    out.d1[k] = s * a.d1[k];
    for (int l = 0; l < n; ++l) out.d2[k][l] = s * a.d2[k][l];
  }
  return out;
}

/// Pointwise product s(x)·T(x) with exact product-rule jets.
inline Jet2Sym2 sym2_scalar_mul(const Jet2Scalar& s, const Jet2Sym2& t) {
  const int n = t.dim();
  Jet2Sym2 out = Jet2Sym2::zero(n);
  out.value = s.value * t.value;
  for (int k = 0; k < n; ++k)
    out.d1[k] = s.value * t.d1[k] + s.grad[k] * t.value;
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l)
      out.d2[k][l] = s.value * t.d2[k][l] + s.grad[k] * t.d1[l] +
                     s.grad[l] * t.d1[k] + s.hess(k, l) * t.value;
  return out;
}

/// M_ij · s(x) for a constant symmetric matrix M.
inline Jet2Sym2 sym2_const_times_scalar(const Mat& m, const Jet2Scalar& s) {
  const int n = static_cast<int>(m.rows());
  Jet2Sym2 out = Jet2Sym2::zero(n);
  out.value = s.value * m;
  for (int k = 0; k < n; ++k) {
    out.d1[k] = s.grad[k] * m;
    for (int l = 0; l < n; ++l) out.d2[k][l] = s.hess(k, l) * m;
  }
  return out;
}

}  // namespace wmass
