#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace wmass;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
EndPoint pt(double a, double b, double c) {
  Vec x(3);
  x << a, b, c;
  return EndPoint::of(x);
}

json bump_weight(double center, double radius, double amp) {
  return json{{"type", "bump"}, {"center", center}, {"radius", radius}, {"amplitude", amp}};
}
}  // namespace

TEST_CASE("mean curvature of coordinate spheres") {
  SECTION("flat, rho = 2, n = 3") {
    const auto spec = make_family("flat", {{"n", 3}});
    REQUIRE_THAT(mean_curvature(spec, pt(2, 0, 0)), WithinRel(1.0, 1e-13));
    REQUIRE_THAT(mean_curvature(spec, pt(0, std::sqrt(2.0), std::sqrt(2.0))),
                 WithinRel(1.0, 1e-13));
  }
  SECTION("flat, rho = 1, n = 5: H = n-1") {
    const auto spec = make_family("flat", {{"n", 5}});
    Vec x = Vec::Zero(5);
    x[3] = 1.0;
    REQUIRE_THAT(mean_curvature(spec, EndPoint::of(x)), WithinRel(4.0, 1e-13));
  }
  SECTION("Schwarzschild horizon is minimal") {
    const auto spec = make_family("schwarzschild", {{"n", 3}, {"m", 1.0}});
    REQUIRE_THAT(mean_curvature(spec, pt(0.5, 0, 0)), WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(mean_curvature(spec, pt(0, 0.5, 0)), WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("weighted mean curvature") {
  SECTION("equals H for vanishing weight") {
    const auto spec = make_family("schwarzschild", {{"n", 3}, {"m", 1.0}});
    const EndPoint p = pt(2, 0.5, 0);
    REQUIRE(weighted_mean_curvature(spec, p) == mean_curvature(spec, p));
  }
  SECTION("f-Schwarzschild horizon is f-minimal") {
    const auto spec = make_family(
        "f_schwarzschild", {{"n", 3}, {"m", 2.0}, {"weight", bump_weight(1.5, 1.0, 0.6)}});
    REQUIRE_THAT(weighted_mean_curvature(spec, pt(1.0, 0, 0)), WithinAbs(0.0, 1e-11));
    // tilde-side oracle: the conformal metric is Schwarzschild, horizon minimal
    const auto tilde = conformal_spec(spec).tilde;
    REQUIRE_THAT(mean_curvature(tilde, pt(1.0, 0, 0)), WithinAbs(0.0, 1e-11));
  }
}

TEST_CASE("weighted areas") {
  SECTION("flat unit sphere") {
    const auto spec = make_family("flat", {{"n", 3}});
    REQUIRE_THAT(weighted_area(spec, RadialSurface{1.0, 16}), WithinRel(4.0 * M_PI, 1e-12));
  }
  SECTION("flat with f = 1/r") {
    const auto spec = make_family("flat_weight", {{"n", 3}, {"weight", "inverse_r"}});
    REQUIRE_THAT(weighted_area(spec, RadialSurface{1.0, 16}),
                 WithinRel(4.0 * M_PI * std::exp(-1.0), 1e-12));
  }
  SECTION("f-Schwarzschild horizon area (tilde-side oracle 16 pi m^2)") {
    const auto spec = make_family(
        "f_schwarzschild", {{"n", 3}, {"m", 2.0}, {"weight", bump_weight(2.0, 1.0, 0.7)}});
    REQUIRE_THAT(weighted_area(spec, RadialSurface{1.0, 16}), WithinRel(64.0 * M_PI, 1e-10));
  }
}

TEST_CASE("f-minimal sphere search") {
  SECTION("Schwarzschild horizon at m/2") {
    const auto spec = make_family("schwarzschild", {{"n", 3}, {"m", 1.0}});
    REQUIRE_THAT(find_f_minimal_sphere(spec, 0.3, 5.0), WithinAbs(0.5, 1e-9));
  }
  SECTION("f-Schwarzschild with a radial weight keeps the horizon at r0") {
    const auto spec = make_family(
        "f_schwarzschild",
        {{"n", 3}, {"m", 2.0}, {"weight", {{"type", "inverse_r"}, {"a", 0.4}, {"k", 1.0}}}});
    REQUIRE_THAT(find_f_minimal_sphere(spec, 0.5, 5.0), WithinAbs(1.0, 1e-9));
  }
  SECTION("flat space has no minimal sphere") {
    const auto spec = make_family("flat", {{"n", 3}});
    REQUIRE_THROWS_AS(find_f_minimal_sphere(spec, 0.3, 5.0), NoSignChange);
  }
  SECTION("non-spherical families are rejected") {
    const auto spec = make_family(
        "flat_weight", {{"n", 3}, {"weight", {{"type", "dipole"}, {"a", 0.5}}}});
    REQUIRE_THROWS_AS(find_f_minimal_sphere(spec, 0.3, 5.0), NotSpherical);
  }
  SECTION("interior sign change is located") {
    // u = 1 + c1/r: tilde minimal sphere solves u + 2 r u' = 0 => r = c1
    const auto spec = make_family("conformally_flat", {{"n", 3}, {"c", {0.8}}});
    REQUIRE_THAT(find_f_minimal_sphere(spec, 0.2, 6.0), WithinAbs(0.8, 1e-9));
  }
}

TEST_CASE("outer-minimising certificates") {
  SECTION("Schwarzschild horizon is outer-minimising") {
    const auto spec = make_family("schwarzschild", {{"n", 3}, {"m", 1.0}});
    const auto rep = check_f_outer_minimising(spec, 0.5);
    REQUIRE(rep.minimising);
    for (double m : rep.margins) REQUIRE(m >= -1e-10);
  }
  SECTION("flat spheres are outer-minimising") {
    const auto spec = make_family("flat", {{"n", 3}});
    REQUIRE(check_f_outer_minimising(spec, 1.0).minimising);
  }
  SECTION("a weight neck breaks the certificate with a negative margin") {
    const auto spec = make_family(
        "flat_weight", {{"n", 3}, {"weight", bump_weight(2.0, 0.5, 3.0)}});
    const auto rep = check_f_outer_minimising(spec, 1.0, 6.0);
    REQUIRE_FALSE(rep.minimising);
    double worst = 0.0;
    for (double m : rep.margins) worst = std::min(worst, m);
    REQUIRE(worst < 0.0);
  }
}

TEST_CASE("weighted Hawking mass") {
  SECTION("flat round spheres have zero Hawking mass") {
    const auto spec = make_family("flat", {{"n", 3}});
    for (double rho : {0.5, 1.0, 3.0})
      REQUIRE_THAT(weighted_hawking_mass(spec, RadialSurface{rho, 16}), WithinAbs(0.0, 1e-12));
  }
  SECTION("Schwarzschild horizon Hawking mass equals m") {
    const auto spec = make_family("schwarzschild", {{"n", 3}, {"m", 1.0}});
    REQUIRE_THAT(weighted_hawking_mass(spec, RadialSurface{0.5, 16}), WithinRel(1.0, 1e-9));
  }
  SECTION("f-Schwarzschild horizon Hawking mass equals m") {
    for (double m : {1.0, 2.0}) {
      const auto spec = make_family(
          "f_schwarzschild", {{"n", 3}, {"m", m}, {"weight", bump_weight(2.0, 1.0, 0.5)}});
      const double r0 = spec.excluded_radius;
      REQUIRE_THAT(weighted_hawking_mass(spec, RadialSurface{r0, 16}), WithinRel(m, 1e-9));
    }
  }
  SECTION("wrong dimension is rejected") {
    const auto spec = make_family("schwarzschild", {{"n", 5}, {"m", 1.0}});
    REQUIRE_THROWS_AS(weighted_hawking_mass(spec, RadialSurface{2.0, 8}), WrongDimension);
  }
  SECTION("weighted Hawking mass equals the tilde Hawking mass") {
    std::vector<WeightedManifoldSpec> specs;
    specs.push_back(make_family(
        "f_schwarzschild", {{"n", 3}, {"m", 1.0}, {"weight", bump_weight(2.0, 1.0, 0.8)}}));
    specs.push_back(make_family(
        "flat_weight", {{"n", 3}, {"weight", {{"type", "inverse_r"}, {"a", 0.7}, {"k", 1.0}}}}));
    specs.push_back(make_family(
        "conformally_flat",
        {{"n", 3}, {"c", {0.5, -0.03}}, {"weight", {{"type", "inverse_r"}, {"a", 0.3}, {"k", 2.0}}}}));
    for (const auto& spec : specs)
      for (double rho : {1.2, 2.0, 4.0}) {
        const double a = weighted_hawking_mass(spec, RadialSurface{rho, 20});
        const double b = tilde_hawking_mass(spec, RadialSurface{rho, 20});
        REQUIRE_THAT(a, WithinAbs(b, 1e-6));
      }
  }
}

TEST_CASE("Penrose ratio") {
  SECTION("equality on f-Schwarzschild (n = 3)") {
    const auto spec = make_family(
        "f_schwarzschild", {{"n", 3}, {"m", 1.0}, {"weight", bump_weight(2.0, 1.0, 0.5)}});
    PenroseOptions opt;
    opt.bracket_lo = 0.2;
    opt.bracket_hi = 8.0;
    const PenroseReport rep = penrose_ratio(spec, opt);
    REQUIRE_THAT(rep.ratio, WithinAbs(1.0, 1e-3));
    REQUIRE(rep.certified_outer_minimising);
  }
  SECTION("equality on Schwarzschild n = 5") {
    const auto spec = make_family("schwarzschild", {{"n", 5}, {"m", 2.0}});
    PenroseOptions opt;
    opt.bracket_lo = 0.3;
    opt.bracket_hi = 6.0;
    opt.surface_order = 12;
    opt.mass_order = 12;
    opt.sf_count = 512;
    const PenroseReport rep = penrose_ratio(spec, opt);
    REQUIRE_THAT(rep.ratio, WithinAbs(1.0, 1e-3));
  }
  SECTION("strictly perturbed family has ratio above one") {
    // u = 1 + 1/(2r) + eps/r^2 needs eps < 0 for R >= 0 (Yamabe identity)
    // and |eps| <= c1²/12 for the minimal sphere to survive
    const auto spec =
        make_family("conformally_flat", {{"n", 3}, {"c", {0.5, -0.01}}});
    PenroseOptions opt;
    opt.bracket_lo = 0.05;
    opt.bracket_hi = 6.0;
    const PenroseReport rep = penrose_ratio(spec, opt);
    REQUIRE(rep.ratio >= 1.0 - 1e-3);
    REQUIRE(rep.ratio > 1.0);
  }
  SECTION("negative S_f aborts the evaluation") {
    const auto spec =
        make_family("conformally_flat", {{"n", 3}, {"c", {0.5, 0.05}}});
    PenroseOptions opt;
    opt.bracket_lo = 0.2;
    opt.bracket_hi = 6.0;
    REQUIRE_THROWS_AS(penrose_ratio(spec, opt), PreconditionFailed);
  }
}

TEST_CASE("Hawking mass versus weighted mass") {
  SECTION("f-Schwarzschild horizon margin vanishes") {
    const auto spec = make_family(
        "f_schwarzschild", {{"n", 3}, {"m", 1.0}, {"weight", bump_weight(2.0, 1.0, 0.5)}});
    const HawkingReport rep = hawking_vs_mass(spec, spec.excluded_radius);
    REQUIRE_THAT(rep.margin, WithinAbs(0.0, 1e-3));
  }
  SECTION("flat spheres give zero margin") {
    const auto spec = make_family("flat", {{"n", 3}});
    const HawkingReport rep = hawking_vs_mass(spec, 3.0);
    REQUIRE_THAT(rep.hawking_f, WithinAbs(0.0, 1e-10));
    REQUIRE_THAT(rep.margin, WithinAbs(0.0, 1e-9));
  }
  SECTION("Schwarzschild spheres outside the horizon") {
    const auto spec = make_family("schwarzschild", {{"n", 3}, {"m", 1.0}});
    const HawkingReport rep = hawking_vs_mass(spec, 2.0);
    REQUIRE(rep.hawking_f < 1.0);
    REQUIRE(rep.margin >= -1e-3);
  }
}

TEST_CASE("surface report bundles the functionals") {
  SECTION("flat unit-ish sphere") {
    const auto spec = make_family("flat", {{"n", 3}});
    const SurfaceReport rep = surface_report(spec, RadialSurface{2.0, 16});
    REQUIRE_THAT(rep.area_f, WithinRel(16.0 * M_PI, 1e-12));
    REQUIRE(rep.area_g == rep.area_f);
    for (double hf : rep.hf_values) REQUIRE_THAT(hf, WithinRel(1.0, 1e-12));
    REQUIRE(rep.hawking_f.has_value());
    REQUIRE_THAT(*rep.hawking_f, WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(rep.penrose_rhs, WithinRel(1.0, 1e-12));  // ½ (A/ω)^{1/2} = ρ/2
  }
  SECTION("no Hawking mass outside n = 3") {
    const auto spec = make_family("schwarzschild", {{"n", 5}, {"m", 1.0}});
    const SurfaceReport rep = surface_report(spec, RadialSurface{2.0, 8});
    REQUIRE_FALSE(rep.hawking_f.has_value());
    REQUIRE(rep.area_f > 0.0);
  }
}

TEST_CASE("randomised admissible families satisfy the Penrose inequality") {
  int done = 0;
  std::uint64_t seed = 0;
  while (done < 8 && seed < 64) {
    const auto spec = random_admissible_family(seed++);
    PenroseOptions opt;
    opt.bracket_lo = 0.05;
    opt.bracket_hi = 12.0;
    opt.surface_order = 16;
    opt.mass_order = 16;
    opt.sf_count = 512;
    try {
      const PenroseReport rep = penrose_ratio(spec, opt);
      REQUIRE(rep.ratio >= 1.0 - 1e-3);
      ++done;
    } catch (const NoSignChange&) {
    } catch (const PreconditionFailed&) {
    }
  }
  REQUIRE(done == 8);
}
