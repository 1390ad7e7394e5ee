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
}  // namespace

TEST_CASE("flat family evaluates to the identity with vanishing jets") {
  const auto spec = make_family("flat", {{"n", 3}});
  const Jet2Metric g = eval_metric(spec, pt(0.3, -2.0, 1.1));
  REQUIRE((g.value - Mat::Identity(3, 3)).norm() == 0.0);
  for (int k = 0; k < 3; ++k) {
    REQUIRE(g.d1[k].norm() == 0.0);
    for (int l = 0; l < 3; ++l) REQUIRE(g.d2[k][l].norm() == 0.0);
  }
  REQUIRE(spec.tau == kInfTau);
  REQUIRE(eval_weight(spec, pt(1, 2, 3)).value == 0.0);
}

TEST_CASE("Schwarzschild n=3 metric value at r=2") {
  const auto spec = make_family("schwarzschild", {{"n", 3}, {"m", 1.0}});
  const Jet2Metric g = eval_metric(spec, pt(2, 0, 0));
  const double expected = std::pow(1.25, 4);
  REQUIRE_THAT(g.value(0, 0), WithinRel(expected, 1e-14));
  REQUIRE_THAT(g.value(1, 1), WithinRel(expected, 1e-14));
  REQUIRE_THAT(g.value(0, 1), WithinAbs(0.0, 1e-14));
}

TEST_CASE("f-Schwarzschild excluded ball and boundary evaluation") {
  const auto spec = make_family(
      "f_schwarzschild",
      {{"n", 3}, {"m", 2.0}, {"weight", {{"type", "exp"}, {"a", 0.5}, {"scale", 1.0}}}});
  REQUIRE(spec.excluded_radius == 1.0);
  REQUIRE_THROWS_AS(eval_metric(spec, pt(0.5, 0, 0)), PointExcluded);
  REQUIRE_NOTHROW(eval_metric(spec, pt(1.0, 0, 0)));  // horizon boundary allowed
  REQUIRE_NOTHROW(eval_metric(spec, pt(0.8, 0.8, 0)));
}

TEST_CASE("make_family rejects bad parameters") {
  REQUIRE_THROWS_AS(make_family("schwarzschild", {{"n", 3}, {"m", -1.0}}), BadParams);
  REQUIRE_THROWS_AS(make_family("schwarzschild", {{"n", 3}, {"m", 0.0}}), BadParams);
  // decay violation: f = 1/r has tau = 1 <= (5-2)/2
  REQUIRE_THROWS_AS(make_family("flat_weight", {{"n", 5}, {"weight", "inverse_r"}}), BadParams);
  REQUIRE_NOTHROW(make_family(
      "flat_weight", {{"n", 5}, {"weight", {{"type", "inverse_r"}, {"a", 1.0}, {"k", 2.0}}}}));
  REQUIRE_THROWS_AS(make_family("conformally_flat", {{"n", 4}, {"c", {0.5}}}), BadParams);
  REQUIRE_THROWS_AS(make_family("no_such_family", {{"n", 3}}), BadParams);
}

TEST_CASE("Schwarzschild n=5 horizon radius") {
  const auto spec = make_family("schwarzschild", {{"n", 5}, {"m", 2.0}});
  REQUIRE_THAT(spec.excluded_radius, WithinRel(1.0, 1e-14));
}

TEST_CASE("weight catalogue values and jets") {
  SECTION("inverse_r at (1,0,0)") {
    const auto spec = make_family("flat_weight", {{"n", 3}, {"weight", "inverse_r"}});
    const Jet2Scalar f = eval_weight(spec, pt(1, 0, 0));
    REQUIRE_THAT(f.value, WithinRel(1.0, 1e-14));
    REQUIRE_THAT(f.grad[0], WithinRel(-1.0, 1e-14));
    REQUIRE_THAT(f.grad[1], WithinAbs(0.0, 1e-14));
    // hess(1/r) = 3 x x^T/r^5 - I/r^3: diag(2,-1,-1) at (1,0,0)
    REQUIRE_THAT(f.hess(0, 0), WithinRel(2.0, 1e-13));
    REQUIRE_THAT(f.hess(1, 1), WithinRel(-1.0, 1e-13));
    REQUIRE_THAT(f.hess(2, 2), WithinRel(-1.0, 1e-13));
  }
  SECTION("bump weight vanishes outside its support") {
    const auto spec = make_family(
        "flat_weight",
        {{"n", 3},
         {"weight", {{"type", "bump"}, {"center", 3.0}, {"radius", 1.0}, {"amplitude", 2.0}}}});
    const Jet2Scalar f = eval_weight(spec, pt(5.0, 0, 0));
    REQUIRE(f.value == 0.0);
    REQUIRE(f.grad.norm() == 0.0);
    REQUIRE(f.hess.norm() == 0.0);
    REQUIRE(eval_weight(spec, pt(3.0, 0, 0)).value == 2.0);
  }
  SECTION("dipole weight a x1/r^3") {
    const auto spec = make_family(
        "flat_weight", {{"n", 3}, {"weight", {{"type", "dipole"}, {"a", 2.0}}}});
    const EndPoint p = pt(1.0, 2.0, -1.0);
    const double r = p.r;
    REQUIRE_THAT(eval_weight(spec, p).value, WithinRel(2.0 * 1.0 / std::pow(r, 3), 1e-13));
    REQUIRE_FALSE(spec.spherical);
  }
}

TEST_CASE("finite-difference jets converge at second order to analytic jets") {
  const auto metric_spec = make_family("schwarzschild", {{"n", 3}, {"m", 1.0}});
  const auto weight_spec = make_family(
      "flat_weight",
      {{"n", 3},
       {"weight", {{"type", "bump"}, {"center", 3.0}, {"radius", 2.0}, {"amplitude", 0.7}}}});
  const EndPoint p = pt(2.7, -0.4, 1.2);

  // steps large enough that truncation dominates rounding
  auto metric_err = [&](double scale) {
    const auto fd = spec_with_fd_jets(metric_spec, FdParams{1e-2, scale});
    return oracles::max_abs_diff(eval_metric(fd, p), eval_metric(metric_spec, p));
  };
  auto weight_err = [&](double scale) {
    const auto fd = spec_with_fd_jets(weight_spec, FdParams{1e-2, scale});
    const Jet2Scalar a = eval_weight(fd, p);
    const Jet2Scalar b = eval_weight(weight_spec, p);
    double m = std::abs(a.value - b.value);
    m = std::max(m, (a.grad - b.grad).cwiseAbs().maxCoeff());
    m = std::max(m, (a.hess - b.hess).cwiseAbs().maxCoeff());
    return m;
  };
  const double em1 = metric_err(1.0), em2 = metric_err(0.5);
  REQUIRE(em1 / em2 > 3.5);
  REQUIRE(em1 / em2 < 4.5);
  const double ew1 = weight_err(1.0), ew2 = weight_err(0.5);
  REQUIRE(ew1 / ew2 > 3.5);
  REQUIRE(ew1 / ew2 < 4.5);
}

TEST_CASE("decay validation reports exponents at or above tau") {
  const auto schw = make_family("schwarzschild", {{"n", 3}, {"m", 1.0}});
  const DecayReport d1 = validate_decay(schw);
  REQUIRE(d1.applicable);
  REQUIRE(d1.metric_exponent >= schw.tau - 0.1);

  const auto fw = make_family("flat_weight", {{"n", 3}, {"weight", "inverse_r"}});
  const DecayReport d2 = validate_decay(fw);
  REQUIRE(d2.weight_exponent >= fw.tau - 0.1);

  const auto fschw = make_family(
      "f_schwarzschild",
      {{"n", 3}, {"m", 1.0}, {"weight", {{"type", "inverse_r"}, {"a", 0.5}, {"k", 1.0}}}});
  const DecayReport d3 = validate_decay(fschw);
  REQUIRE(d3.metric_exponent >= fschw.tau - 0.1);
  REQUIRE(d3.weight_exponent >= fschw.tau - 0.1);

  const auto flat = make_family("flat", {{"n", 3}});
  REQUIRE_FALSE(validate_decay(flat).applicable);
}

TEST_CASE("jet symmetrisation is idempotent") {
  Jet2Sym2 j = Jet2Sym2::zero(3);
  j.value << 1.0, 0.3, -0.2, 0.1, 2.0, 0.5, 0.7, -0.4, 3.0;
  for (int k = 0; k < 3; ++k) {
    j.d1[k].setRandom();
    for (int l = 0; l < 3; ++l) j.d2[k][l].setRandom();
  }
  Jet2Sym2 once = j;
  symmetrise(once);
  Jet2Sym2 twice = once;
  symmetrise(twice);
  REQUIRE(oracles::max_abs_diff(once, twice) == 0.0);
}

TEST_CASE("family specs round trip through JSON") {
  const auto spec = make_family(
      "f_schwarzschild",
      {{"n", 3},
       {"m", 2.0},
       {"weight", {{"type", "bump"}, {"center", 4.0}, {"radius", 1.5}, {"amplitude", 0.3}}}});
  const json doc = spec_to_json(spec);
  const auto back = spec_from_json(doc);
  REQUIRE(back.family == spec.family);
  REQUIRE(back.n == spec.n);
  REQUIRE(back.excluded_radius == spec.excluded_radius);
  const EndPoint p = pt(2.0, 1.0, 0.5);
  REQUIRE(oracles::max_abs_diff(eval_metric(back, p), eval_metric(spec, p)) == 0.0);
  REQUIRE(eval_weight(back, p).value == eval_weight(spec, p).value);
}

TEST_CASE("translated families shift their excluded ball and fields") {
  const auto spec =
      make_family("schwarzschild", {{"n", 3}, {"m", 2.0}, {"center", {1.0, 0.0, 0.0}}});
  REQUIRE_THROWS_AS(eval_metric(spec, pt(1.3, 0, 0)), PointExcluded);  // |x-x0| = 0.3 < 1
  const auto centred = make_family("schwarzschild", {{"n", 3}, {"m", 2.0}});
  const Jet2Metric a = eval_metric(spec, pt(4.0, 1.0, -2.0));
  const Jet2Metric b = eval_metric(centred, pt(3.0, 1.0, -2.0));
  REQUIRE(oracles::max_abs_diff(a, b) < 1e-15);
}

TEST_CASE("metric evaluation rejects degenerate values") {
  WeightedManifoldSpec spec;
  spec.n = 3;
  spec.family = "degenerate";
  spec.tau = kInfTau;
  spec.weight = sf_zero(3);
  spec.metric = mf_scalar_times(sf_affine(1.0, Vec::Constant(3, -0.5)), mf_flat(3));
  REQUIRE_NOTHROW(eval_metric(spec, pt(0.1, 0.1, 0.1)));
  REQUIRE_THROWS_AS(eval_metric(spec, pt(2.0, 2.0, 2.0)), NotPositiveDefinite);
}

TEST_CASE("EndPoint requires a positive radius") {
  Vec zero = Vec::Zero(3);
  REQUIRE_THROWS_AS(EndPoint::of(zero), PointExcluded);
}

TEST_CASE("rotation wrapper is an exact pullback for scalar fields") {
  const Mat q = oracles::test_rotation(3);
  const auto spec = make_family(
      "flat_weight", {{"n", 3}, {"weight", {{"type", "dipole"}, {"a", 1.0}}}});
  const ScalarField2 rotated = sf_rotate(spec.weight, q);
  Vec x(3);
  x << 1.2, -0.7, 2.1;
  const Jet2Scalar a = rotated.eval(x);
  const Jet2Scalar b = spec.weight.eval(q * x);
  REQUIRE_THAT(a.value, WithinRel(b.value, 1e-14));
  REQUIRE_THAT((a.grad - q.transpose() * b.grad).norm(), WithinAbs(0.0, 1e-14));
}
