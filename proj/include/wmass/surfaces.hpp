#pragma once

// Hypersurface functionals on coordinate spheres about the family centre:
// weighted area A_f = ∮ e^{-f} dA_g, f-minimal sphere finding in spherical
// symmetry, the sphere-competitor outer-minimising check, the weighted
// Hawking mass (n = 3), and the Penrose/Hawking inequality reports.

#include "wmass/mass.hpp"

#include <random>

namespace wmass {

struct RadialSurface {
  double rho = 1.0;
  int order = 24;  // quadrature order of the shell
};

inline SphereShell surface_shell(const WeightedManifoldSpec& spec, const RadialSurface& surf) {
  if (surf.rho < spec.excluded_radius * (1.0 - 1e-12))
    throw PointExcluded("surface radius lies inside the excluded ball");
  return sphere_shell(spec.n, surf.rho, surf.order, spec_center(spec));
}

inline double weighted_area(const WeightedManifoldSpec& spec, const RadialSurface& surf) {
  const SphereShell shell = surface_shell(spec, surf);
  double acc = 0.0;
  for (std::size_t i = 0; i < shell.nodes.size(); ++i) {
    const EndPoint p = EndPoint::of(shell.nodes[i]);
    acc += shell.weights[static_cast<int>(i)] * std::exp(-eval_weight(spec, p).value) *
           area_element_jacobian(spec, p);
  }
  return acc;
}

inline double unweighted_area(const WeightedManifoldSpec& spec, const RadialSurface& surf) {
  const SphereShell shell = surface_shell(spec, surf);
  double acc = 0.0;
  for (std::size_t i = 0; i < shell.nodes.size(); ++i)
    acc += shell.weights[static_cast<int>(i)] *
           area_element_jacobian(spec, EndPoint::of(shell.nodes[i]));
  return acc;
}

/// Bundled surface functionals of one coordinate sphere.
struct SurfaceReport {
  double rho = 0.0;
  std::vector<double> hf_values;  // weighted mean curvature per quadrature node
  double area_f = 0.0;
  double area_g = 0.0;
  std::optional<double> hawking_f;  // n = 3 only
  double penrose_rhs = 0.0;         // ½ (A_f/ω_{n-1})^{(n-2)/(n-1)}

  json to_json() const {
    json j{{"rho", rho},
           {"A_f", area_f},
           {"A_g", area_g},
           {"penrose_rhs", penrose_rhs},
           {"hawking_f", hawking_f ? json(*hawking_f) : json(nullptr)}};
    return j;
  }
};

inline SurfaceReport surface_report(const WeightedManifoldSpec& spec, const RadialSurface& surf) {
  const SphereShell shell = surface_shell(spec, surf);
  SurfaceReport rep;
  rep.rho = surf.rho;
  double willmore = 0.0;
  for (std::size_t i = 0; i < shell.nodes.size(); ++i) {
    const EndPoint p = EndPoint::of(shell.nodes[i]);
    const double da = shell.weights[static_cast<int>(i)] * area_element_jacobian(spec, p);
    const double hf = weighted_mean_curvature(spec, p);
    rep.hf_values.push_back(hf);
    rep.area_g += da;
    rep.area_f += da * std::exp(-eval_weight(spec, p).value);
    willmore += da * hf * hf;
  }
  if (!(rep.area_f > 0.0)) throw PreconditionFailed("weighted area must be positive");
  if (spec.n == 3)
    rep.hawking_f = std::sqrt(rep.area_f / (16.0 * M_PI)) * (1.0 - willmore / (16.0 * M_PI));
  rep.penrose_rhs = 0.5 * std::pow(rep.area_f / unit_sphere_volume(spec.n - 1),
                                   (spec.n - 2.0) / (spec.n - 1.0));
  return rep;
}

// ---------------------------------------------------------------------------
// f-minimal sphere finding (spherically symmetric families)

namespace detail {

inline EndPoint on_axis_point(const WeightedManifoldSpec& spec, double rho) {
  Vec x = spec_center(spec);
  x[0] += rho;
  return EndPoint::of(x);
}

}  // namespace detail

/// H_f of the coordinate sphere of radius rho (on-axis sample; the family
/// must be spherically symmetric for this to represent the whole sphere).
inline double radial_weighted_mean_curvature(const WeightedManifoldSpec& spec, double rho) {
  return weighted_mean_curvature(spec, detail::on_axis_point(spec, rho));
}

/// Outermost root of ρ ↦ H_f(ρ) in the bracket: scan from the outer end for
/// a sign change, bisect, then polish with a few secant steps.  A vanishing
/// H_f at the (clamped) inner endpoint — e.g. a horizon boundary — counts as
/// a root.
inline double find_f_minimal_sphere(const WeightedManifoldSpec& spec, double bracket_lo,
                                    double bracket_hi, double tol = 1e-10) {
  if (!spec.spherical)
    throw NotSpherical("f-minimal sphere search requires a spherically symmetric family");
  if (!(bracket_hi > bracket_lo) || !(bracket_lo >= 0.0))
    throw BadParams("invalid bracket");
  const double lo = std::max(bracket_lo, spec.excluded_radius);
  if (!(bracket_hi > lo)) throw BadParams("bracket lies inside the excluded ball");

  const int scan = 256;
  auto hf = [&](double rho) { return radial_weighted_mean_curvature(spec, rho); };
  double a = 0.0, b = 0.0;
  bool found = false;
  double prev_rho = bracket_hi, prev_val = hf(bracket_hi);
  for (int i = 1; i <= scan; ++i) {
    const double rho = bracket_hi + (lo - bracket_hi) * (i / static_cast<double>(scan));
    const double val = hf(rho);
    if (prev_val == 0.0) return prev_rho;
    if (val * prev_val < 0.0) {
      a = rho;
      b = prev_rho;
      found = true;
      break;
    }
    prev_rho = rho;
    prev_val = val;
  }
  if (!found) {
    // horizon-style boundary root
    const double edge = hf(lo);
    const double scale = std::abs(hf(bracket_hi)) + 1.0 / bracket_hi;
    if (std::abs(edge) <= 1e-9 * scale) return lo;
    throw NoSignChange("no f-minimal sphere in the bracket");
  }
  double fa = hf(a), fb = hf(b);
  for (int it = 0; it < 200 && (b - a) > tol; ++it) {
    const double mid = 0.5 * (a + b);
    const double fm = hf(mid);
    if (fm == 0.0) return mid;
    if (fa * fm < 0.0) {
      b = mid;
      fb = fm;
    } else {
      a = mid;
      fa = fm;
    }
  }
  // secant polish
  double x0 = a, x1 = b, f0 = fa, f1 = fb;
  for (int it = 0; it < 8; ++it) {
    if (f1 == f0) break;
    const double x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
    if (!(x2 > lo) || !(x2 < bracket_hi)) break;
    x0 = x1;
    f0 = f1;
    x1 = x2;
    f1 = hf(x1);
    if (std::abs(f1) < 1e-15) break;
  }
  return x1;
}

// ---------------------------------------------------------------------------
// Outer-minimising certificate (sphere competitors)

struct OuterMinimisingReport {
  bool minimising = false;
  std::vector<double> radii;
  std::vector<double> margins;  // A_f(ρ) - A_f(ρ*)
};

/// Sphere-competitor sufficient check: A_f non-decreasing on [ρ*, ρ_max] and
/// every competitor at least as large as A_f(ρ*).
inline OuterMinimisingReport check_f_outer_minimising(const WeightedManifoldSpec& spec,
                                                      double rho_star, double rho_max = 0.0,
                                                      int samples = 48, int order = 12) {
  if (!spec.spherical)
    throw NotSpherical("outer-minimising check requires a spherically symmetric family");
  if (rho_max <= rho_star) rho_max = 8.0 * rho_star;
  OuterMinimisingReport rep;
  const double base = weighted_area(spec, RadialSurface{rho_star, order});
  double prev = base;
  rep.minimising = true;
  const double slack = 1e-10 * std::max(1.0, base);
  for (int i = 0; i <= samples; ++i) {
    const double rho = rho_star * std::pow(rho_max / rho_star, i / static_cast<double>(samples));
    const double area = weighted_area(spec, RadialSurface{rho, order});
    rep.radii.push_back(rho);
    rep.margins.push_back(area - base);
    if (area < base - slack || area < prev - slack) rep.minimising = false;
    prev = area;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Hawking mass (n = 3)

/// m_{H,f}(Σ; g) = √(A_f/16π) (1 - 1/(16π) ∮ H_f² dA_g); the Willmore term
/// uses the unweighted area element.
inline double weighted_hawking_mass(const WeightedManifoldSpec& spec, const RadialSurface& surf) {
  if (spec.n != 3) throw WrongDimension("weighted Hawking mass is defined for n = 3");
  const SphereShell shell = surface_shell(spec, surf);
  double area_f = 0.0, willmore = 0.0;
  for (std::size_t i = 0; i < shell.nodes.size(); ++i) {
    const EndPoint p = EndPoint::of(shell.nodes[i]);
    const double da = shell.weights[static_cast<int>(i)] * area_element_jacobian(spec, p);
    const double hf = weighted_mean_curvature(spec, p);
    area_f += da * std::exp(-eval_weight(spec, p).value);
    willmore += da * hf * hf;
  }
  return std::sqrt(area_f / (16.0 * M_PI)) * (1.0 - willmore / (16.0 * M_PI));
}

/// Hawking mass of the same surface in the conformal metric (f ≡ 0 path).
inline double tilde_hawking_mass(const WeightedManifoldSpec& spec, const RadialSurface& surf) {
  WeightedManifoldSpec tilde = conformal_spec(spec).tilde;
  return weighted_hawking_mass(tilde, surf);
}

// ---------------------------------------------------------------------------
// S_f sign certification

struct SfGridReport {
  double min_value = 0.0;
  Vec argmin;
};

inline SfGridReport sf_min_on_grid(const WeightedManifoldSpec& spec, const std::vector<Vec>& grid) {
  SfGridReport rep;
  rep.min_value = std::numeric_limits<double>::infinity();
  for (const Vec& x : grid) {
    const double sf = geometry_at(spec, EndPoint::of(x)).conf_scal;
    if (sf < rep.min_value) {
      rep.min_value = sf;
      rep.argmin = x;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Penrose and Hawking inequality reports

struct PenroseReport {
  double rho_star = 0.0;
  double area_f = 0.0;
  double mass_f = 0.0;
  double rhs = 0.0;    // ½ (A_f/ω_{n-1})^{(n-2)/(n-1)}
  double ratio = 0.0;  // m_f / rhs
  double sf_min = 0.0;
  bool certified_outer_minimising = false;
  bool mass_converged = false;

  json to_json() const {
    return json{{"rho_star", rho_star},
                {"A_f", area_f},
                {"m_f", mass_f},
                {"rhs", rhs},
                {"ratio", ratio},
                {"sf_min_on_grid", sf_min},
                {"certified_outer_minimising", certified_outer_minimising},
                {"mass_converged", mass_converged}};
  }
};

struct PenroseOptions {
  double bracket_lo = 0.2;
  double bracket_hi = 8.0;
  int surface_order = 24;
  RadiiSchedule schedule = {};
  int mass_order = 24;
  double extrap_tol = 1e-3;
  double sf_rmin = 0.0;  // 0: use max(excluded, rho*/4)... resolved at run time
  double sf_rmax = 50.0;
  int sf_count = 2048;
  std::uint64_t seed = 0;
};

/// Thm-style Penrose evaluation: locates the outermost f-minimal sphere,
/// certifies it against sphere competitors, certifies S_f ≥ 0 on a probe
/// grid, and reports m_f / [½ (A_f/ω)^{(n-2)/(n-1)}].
inline PenroseReport penrose_ratio(const WeightedManifoldSpec& spec, const PenroseOptions& opt = {}) {
  if (spec.n < 3 || spec.n > 7)
    throw WrongDimension("Penrose evaluation is restricted to 3 <= n <= 7");
  PenroseReport rep;
  rep.rho_star = find_f_minimal_sphere(spec, opt.bracket_lo, opt.bracket_hi);
  const OuterMinimisingReport outer = check_f_outer_minimising(spec, rep.rho_star);
  rep.certified_outer_minimising = outer.minimising;
  if (!outer.minimising)
    throw PreconditionFailed("f-minimal sphere is not outer-minimising among sphere competitors");

  const double rmin = opt.sf_rmin > 0.0 ? opt.sf_rmin
                                        : std::max(spec.excluded_radius + 1e-6, 0.25 * rep.rho_star);
  const SfGridReport sf = sf_min_on_grid(spec, probe_annulus(spec.n, rmin, opt.sf_rmax,
                                                             opt.sf_count, opt.seed));
  rep.sf_min = sf.min_value;
  if (sf.min_value < -1e-8)
    throw PreconditionFailed("S_f < 0 detected on the probe grid");

  rep.area_f = weighted_area(spec, RadialSurface{rep.rho_star, opt.surface_order});
  const MassReport mass = weighted_mass(spec, opt.schedule, opt.mass_order, opt.extrap_tol);
  rep.mass_f = mass.value;
  rep.mass_converged = mass.converged;
  const double omega = unit_sphere_volume(spec.n - 1);
  rep.rhs = 0.5 * std::pow(rep.area_f / omega, (spec.n - 2.0) / (spec.n - 1.0));
  rep.ratio = rep.mass_f / rep.rhs;
  return rep;
}

struct HawkingReport {
  double hawking_f = 0.0;
  double mass_f = 0.0;
  double margin = 0.0;  // m_f - m_{H,f}
  double sf_min = 0.0;
  bool certified_outer_minimising = false;

  json to_json() const {
    return json{{"m_Hf", hawking_f}, {"m_f", mass_f},       {"margin", margin},
                {"sf_min_on_grid", sf_min}, {"certified_outer_minimising", certified_outer_minimising}};
  }
};

/// Thm "m_f ≥ m_{H,f}(Σ)" evaluation for the coordinate sphere of radius rho.
inline HawkingReport hawking_vs_mass(const WeightedManifoldSpec& spec, double rho,
                                     const PenroseOptions& opt = {}) {
  if (spec.n != 3) throw WrongDimension("Hawking comparison is defined for n = 3");
  HawkingReport rep;
  const OuterMinimisingReport outer = check_f_outer_minimising(spec, rho);
  rep.certified_outer_minimising = outer.minimising;
  if (!outer.minimising)
    throw PreconditionFailed("surface is not outer-minimising among sphere competitors");
  const double rmin = opt.sf_rmin > 0.0 ? opt.sf_rmin
                                        : std::max(spec.excluded_radius + 1e-6, 0.25 * rho);
  const SfGridReport sf =
      sf_min_on_grid(spec, probe_annulus(spec.n, rmin, opt.sf_rmax, opt.sf_count, opt.seed));
  rep.sf_min = sf.min_value;
  if (sf.min_value < -1e-8) throw PreconditionFailed("S_f < 0 detected on the probe grid");
  rep.hawking_f = weighted_hawking_mass(spec, RadialSurface{rho, opt.surface_order});
  rep.mass_f = weighted_mass(spec, opt.schedule, opt.mass_order, opt.extrap_tol).value;
  rep.margin = rep.mass_f - rep.hawking_f;
  return rep;
}

// ---------------------------------------------------------------------------
// Randomised admissible families (n = 3)

struct RandomFamilyOptions {
  double c1_min = 0.4, c1_max = 1.6;  // leading 1/r coefficient of u
  double c2_frac = 0.06;              // |c2| <= c2_frac·c1² (non-positive)
  double c3_frac = 0.005;             // |c3| <= c3_frac·c1³ (non-positive)
  double weight_amp = 0.15;
};

/// Seeded generator of spherically symmetric n = 3 families in the
/// admissible class: u = 1 + c1/r + c2/r² + c3/r³ with c2, c3 ≤ 0 (keeps the
/// conformally flat leg scalar-nonnegative), combined with a catalogue
/// radial weight either multiplicatively (f-Schwarzschild style, S_f ≥ 0 by
/// construction) or additively on the plain conformal metric (S_f ≥ 0 by
/// rejection downstream).  The correction coefficients are shrunk until the
/// tilde-side minimal sphere survives (a root of u + 2ρu').
inline WeightedManifoldSpec random_admissible_family(std::uint64_t seed,
                                                     const RandomFamilyOptions& opt = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double c1 = opt.c1_min + (opt.c1_max - opt.c1_min) * unit(rng);
  double c2 = -opt.c2_frac * c1 * c1 * unit(rng);
  double c3 = -opt.c3_frac * c1 * c1 * c1 * unit(rng);
  const auto has_neck = [c1](double a2, double a3) {
    bool seen_negative = false;
    for (int i = 0; i <= 400; ++i) {
      const double rho = 0.02 * std::pow(60.0 / 0.02, i / 400.0);
      if (1.0 - c1 / rho - 3.0 * a2 / (rho * rho) - 5.0 * a3 / (rho * rho * rho) < 0.0)
        seen_negative = true;
    }
    return seen_negative;
  };
  while (!has_neck(c2, c3) && (c2 != 0.0 || c3 != 0.0)) {
    c2 *= 0.5;
    c3 *= 0.5;
    if (std::abs(c2) < 1e-12 && std::abs(c3) < 1e-12) c2 = c3 = 0.0;
  }
  const int weight_kind = static_cast<int>(unit(rng) * 3.0);  // 0: zero, 1: inverse_r², 2: bump
  json weight;
  switch (weight_kind) {
    case 1:
      weight = json{{"type", "inverse_r"},
                    {"a", opt.weight_amp * (2.0 * unit(rng) - 1.0)},
                    {"k", 2.0}};
      break;
    case 2:
      weight = json{{"type", "bump"},
                    {"center", 3.0 + 2.0 * unit(rng)},
                    {"radius", 1.0 + unit(rng)},
                    {"amplitude", opt.weight_amp * (2.0 * unit(rng) - 1.0)}};
      break;
    default:
      weight = "zero";
  }
  const bool conformal_style = unit(rng) < 0.5;
  json params{{"n", 3}, {"c", {c1, c2, c3}}, {"weight", weight}};
  if (conformal_style) {
    // g = e^{2f/(n-1)} u⁴ δ: the tilde leg is exactly u⁴δ.
    WeightedManifoldSpec spec = make_family("conformally_flat", params);
    ScalarField2 factor = sf_exp_of(sf_scale(spec.weight, 2.0 / (spec.n - 1.0)));
    spec.metric = mf_scalar_times(std::move(factor), spec.metric);
    spec.family = "conformally_flat/weighted_conformal";
    return spec;
  }
  return make_family("conformally_flat", params);
}

}  // namespace wmass
