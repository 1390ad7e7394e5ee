#pragma once

// Perturbations (h, φ): a symmetric-2-tensor field and a scalar field with
// 2-jets, optionally tagged with a compact support ball.  The seeded
// catalogue generates smooth compactly supported pairs for the Michel and
// adjoint-duality identity suites.

#include "wmass/fields.hpp"

#include <optional>
#include <random>

namespace wmass {

struct Ball {
  Vec center;
  double radius = 0.0;
};

struct Perturbation {
  TensorField2 h;
  ScalarField2 phi;
  std::optional<Ball> support;
  // Linear decomposition into compactly supported pieces, each with a tight
  // support ball; volume pairings integrate term by term when present.
  std::vector<Perturbation> terms = {};
};

/// Spot-check that (h, φ) vanish outside the declared support ball.
inline void check_support(const Perturbation& pert, int n) {
  if (!pert.support) return;
  const Ball& ball = *pert.support;
  for (int i = 0; i < n; ++i) {
    Vec dir = Vec::Zero(n);
    dir[i] = 1.0;
    const Vec x = ball.center + 1.5 * ball.radius * dir;
    if (pert.h.eval(x).value.cwiseAbs().maxCoeff() > 1e-14 ||
        std::abs(pert.phi.eval(x).value) > 1e-14)
      throw BadParams("perturbation does not vanish outside its declared support");
  }
}

/// Seeded compactly supported smooth perturbation: a few bump-modulated
/// constant-matrix modes for h plus bump-modulated affine modes for φ.  The
/// per-mode pieces are kept in `terms`.
inline Perturbation random_compact_perturbation(int n, std::uint64_t seed,
                                                double amplitude = 0.05, int terms = 2) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> width(0.8, 1.5);
  TensorField2 h = tf_zero(n);
  ScalarField2 phi = sf_zero(n);
  double outer = 0.0;
  Vec centroid = Vec::Zero(n);
  std::vector<Vec> centers;
  std::vector<double> radii;
  std::vector<Perturbation> pieces;
  for (int t = 0; t < terms; ++t) {
    Vec c(n);
    for (int i = 0; i < n; ++i) c[i] = 2.0 * unit(rng);
    const double w = width(rng);
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) m(i, j) = m(j, i) = amplitude * unit(rng);
    ScalarField2 bump = sf_translate(sf_radial(rp_bump(0.0, w, 1.0)), c);
    TensorField2 h_piece = tf_const_times(m, bump);
    Vec b(n);
    for (int i = 0; i < n; ++i) b[i] = amplitude * unit(rng);
    ScalarField2 phi_piece = sf_mul(sf_affine(amplitude * unit(rng), b), bump);
    h = tf_add(std::move(h), h_piece);
    phi = sf_add(std::move(phi), phi_piece);
    pieces.push_back(Perturbation{std::move(h_piece), std::move(phi_piece), Ball{c, w}});
    centers.push_back(c);
    radii.push_back(w);
  }
  for (std::size_t t = 0; t < centers.size(); ++t) centroid += centers[t];
  centroid /= static_cast<double>(centers.size());
  for (std::size_t t = 0; t < centers.size(); ++t)
    outer = std::max(outer, (centers[t] - centroid).norm() + radii[t]);
  Perturbation pert{std::move(h), std::move(phi), Ball{centroid, outer}, std::move(pieces)};
  check_support(pert, n);
  return pert;
}

}  // namespace wmass
