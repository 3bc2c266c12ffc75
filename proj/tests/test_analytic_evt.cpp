#include "doctest.h"

#include "evtlab/analytic_evt.hpp"

using namespace evtlab;

namespace {

ObservableDraft::Point auto_point(std::uint64_t m, ShapeFn shape) {
    ObservableDraft::Point p;
    p.m = m;
    p.shape = std::move(shape);
    return p;
}

ObservableDraft::Point at(const char* xi, ShapeFn shape, std::optional<std::uint64_t> period = {}) {
    ObservableDraft::Point p;
    p.xi = Position::parse(xi);
    p.shape = std::move(shape);
    p.period = period;
    return p;
}

const PiecewiseMap doubling = PiecewiseMap::affine_mod1(2);

ObservableSpec three_point(const char* zeta, std::optional<std::uint64_t> period) {
    ObservableDraft d;
    d.base_point = Position::parse(zeta);
    d.period = period;
    d.points = {auto_point(0, ShapeFn::neglog()), auto_point(1, ShapeFn::power_law(Rational(1, 2))),
                auto_point(3, ShapeFn::power_law(Rational(1, 2)))};
    return build_observable(doubling, d);
}

Rational pow_r(Rational x, std::size_t n) {
    Rational out = 1;
    for (std::size_t i = 0; i < n; ++i) out *= x;
    return out;
}

}  // namespace

TEST_CASE("scale class order") {
    ScaleClass e{ScaleClass::Decay::Exp, 1};
    ScaleClass p2{ScaleClass::Decay::Poly, 2};
    ScaleClass p3{ScaleClass::Decay::Poly, 3};
    ScaleClass r{ScaleClass::Decay::Root, 2};
    CHECK(compare_classes(e, p2) < 0);
    CHECK(compare_classes(p3, p2) < 0);
    CHECK(compare_classes(p2, p3) > 0);
    CHECK(compare_classes(p2, p2) == 0);
    CHECK_THROWS_AS(compare_classes(r, p2), ConfigError);
    CHECK(compare_radii({p2, Rational(1, 4)}, {p2, 1}) == RadiusOrder::Smaller);
    CHECK(compare_radii({p2, Rational(1, 4)}, {e, 1}) == RadiusOrder::Larger);
    CHECK(compare_radii({p2, 1}, {p2, 1}) == RadiusOrder::Indeterminate);

    AsymptoticSum s;
    s.add(e, 2);
    s.add(p2, Rational(7, 2));
    s.add(e, -2);
    CHECK(s.terms().size() == 1);
    CHECK(*s.dominant() == p2);
}

TEST_CASE("non-periodic three-point example") {
    ObservableSpec spec = three_point("sqrt(2)/16", std::nullopt);
    CHECK(pullback_containment(spec, doubling, 1, 2) == Containment::Contains);
    CHECK(pullback_containment(spec, doubling, 2, 3) == Containment::Inside);

    EIResult ei = analytic_theta(spec, doubling);
    CHECK(ei.theta == Rational(7, 8));
    CHECK(ei.index_set == std::vector<std::size_t>{2});
    CHECK(ei.successor.at(2) == 3);
    CHECK(ei.dominant_class == ScaleClass{ScaleClass::Decay::Poly, 2});

    MultiplicityResult m = analytic_multiplicity(spec, doubling, 6);
    CHECK(m.pi[0] == Rational(6, 7));
    CHECK(m.pi[1] == Rational(1, 7));
    for (std::size_t k = 3; k <= 6; ++k) CHECK(m.pi[k - 1] == 0);
    CHECK_FALSE(m.tail);
    CHECK(m.total == 1);
    CHECK(m.mean == Rational(8, 7));
    CHECK(m.mean == 1 / ei.theta);
}

TEST_CASE("periodic three-point example") {
    ObservableSpec spec = three_point("1/31", 5);
    EIResult ei = analytic_theta(spec, doubling);
    CHECK(ei.theta == Rational(13, 16));

    MultiplicityResult m = analytic_multiplicity(spec, doubling, 25);
    for (std::size_t l = 0; l <= 12; ++l) {
        Rational r = pow_r(Rational(1, 32), l);
        CHECK(m.at(2 * l + 1) == Rational(21, 26) * r);
        if (l >= 1) CHECK(m.at(2 * l) == Rational(67, 13) * r);
    }
    REQUIRE(m.tail);
    CHECK(m.tail->period == 2);
    CHECK(m.tail->ratio == Rational(1, 32));
    CHECK(m.tail->residue_coefficients[1] == Rational(21, 26));
    CHECK(m.tail->residue_coefficients[0] == Rational(67, 13));
    CHECK(m.total == 1);
    CHECK(m.mean == Rational(16, 13));
    for (std::size_t k = 1; k <= 25; ++k) CHECK(m.index_sets[k - 1] == std::vector<std::size_t>{2, 3});
    CHECK(m.at(40) == Rational(67, 13) * pow_r(Rational(1, 32), 20));
}

TEST_CASE("single maximum: classical dichotomy") {
    ObservableDraft typical;
    typical.base_point = Position::parse("sqrt(3)/5");
    typical.points = {auto_point(0, ShapeFn::neglog())};
    auto spec = build_observable(doubling, typical);
    CHECK(analytic_theta(spec, doubling).theta == 1);
    auto m = analytic_multiplicity(spec, doubling, 4);
    CHECK(m.pi[0] == 1);
    CHECK(m.total == 1);
    CHECK(default_q(spec) == 0);

    ObservableDraft fixed;
    fixed.base_point = Position::parse("0");
    fixed.period = 1;
    fixed.points = {auto_point(0, ShapeFn::power_law(2))};
    auto fspec = build_observable(doubling, fixed);
    CHECK(analytic_theta(fspec, doubling).theta == Rational(1, 2));

    // Period-2 orbit {1/4, 3/4} of 3x mod 1 with multiplier 9.
    auto tripling = PiecewiseMap::affine_mod1(3);
    ObservableDraft two;
    two.base_point = Position::parse("1/4");
    two.period = 2;
    two.points = {auto_point(0, ShapeFn::neglog())};
    auto tspec = build_observable(tripling, two);
    Rational theta = analytic_theta(tspec, tripling).theta;
    CHECK(theta == Rational(8, 9));
    auto tm = analytic_multiplicity(tspec, tripling, 10);
    for (std::size_t k = 1; k <= 30; ++k) CHECK(tm.at(k) == theta * pow_r(1 - theta, k - 1));
    CHECK(tm.total == 1);
    CHECK(tm.mean == 1 / theta);
}

TEST_CASE("indeterminate containment aborts") {
    // A rotation has unit multiplier, so the pulled-back ball equals the original one.
    auto rotation = PiecewiseMap::affine_mod1(1, Rational(1, 3));
    ObservableDraft d;
    d.base_point = Position::parse("0");
    d.points = {auto_point(0, ShapeFn::neglog()), auto_point(1, ShapeFn::neglog())};
    auto spec = build_observable(rotation, d);
    CHECK(pullback_containment(spec, rotation, 1, 2) == Containment::Indeterminate);
    CHECK_THROWS_AS(analytic_theta(spec, rotation), IndeterminateError);
}

TEST_CASE("non-dominant points do not change theta") {
    ObservableDraft d;
    d.base_point = Position::parse("sqrt(2)/8");
    d.points = {auto_point(0, ShapeFn::power_law(Rational(1, 2))), auto_point(2, ShapeFn::power_law(Rational(1, 2)))};
    CHECK(analytic_theta(build_observable(doubling, d), doubling).theta == Rational(7, 8));

    ObservableDraft p;
    p.base_point = Position::parse("2/31");
    p.period = 5;
    p.points = {auto_point(0, ShapeFn::power_law(Rational(1, 2))), auto_point(2, ShapeFn::power_law(Rational(1, 2)))};
    CHECK(analytic_theta(build_observable(doubling, p), doubling).theta == Rational(13, 16));
}

TEST_CASE("uncorrelated maxima") {
    ObservableDraft two;
    two.correlated = false;
    two.points = {at("sqrt(2)/16", ShapeFn::power_law(Rational(1, 2))), at("1/pi", ShapeFn::power_law(Rational(1, 2)))};
    auto spec = build_observable(doubling, two);
    CHECK(analytic_theta(spec, doubling).theta == 1);
    CHECK(default_q(spec) == 0);

    ObservableDraft mixed;
    mixed.correlated = false;
    mixed.points = {at("0", ShapeFn::power_law(Rational(1, 2)), 1), at("1/pi", ShapeFn::power_law(Rational(1, 2)))};
    auto mspec = build_observable(doubling, mixed);
    CHECK(analytic_theta(mspec, doubling).theta == Rational(3, 4));
    CHECK(default_q(mspec) == 1);
    auto w = asymptotic_weights(mspec);
    CHECK(w == std::vector<Rational>{Rational(1, 2), Rational(1, 2)});
    using Exact = std::vector<std::pair<Rational, Rational>>;
    CHECK(theta_mixed_uncorrelated(Exact{{w[0], Rational(1, 2)}, {w[1], Rational(1)}}) == Rational(3, 4));
    CHECK(pullback_containment(mspec, doubling, 1, 2) == Containment::Disjoint);
    CHECK(pullback_containment(mspec, doubling, 1, 3) == Containment::Inside);
}

TEST_CASE("theta_mixed_uncorrelated") {
    using Exact = std::vector<std::pair<Rational, Rational>>;
    CHECK(theta_mixed_uncorrelated(Exact{{Rational(1, 2), Rational(1)}, {Rational(1, 2), Rational(1)}}) == 1);
    using Pairs = std::vector<std::pair<double, double>>;
    CHECK(theta_mixed_uncorrelated(Pairs{{1.0, 0.3}}) == doctest::Approx(0.3));
    CHECK_THROWS_AS(theta_mixed_uncorrelated(Pairs{{0.5, 1.0}, {0.4, 1.0}}), ConfigError);
}

TEST_CASE("finite-n oracle") {
    ObservableDraft single;
    single.base_point = Position::parse("sqrt(3)/5");
    single.points = {auto_point(0, ShapeFn::neglog())};
    auto one = build_observable(doubling, single);
    CHECK(finite_n_sets(one, doubling, Real(8), 0, 2).theta_n == 1);

    ObservableSpec spec = three_point("sqrt(2)/16", std::nullopt);
    Real u = 20;
    FiniteNTable t = finite_n_sets(spec, doubling, u, 3, 3);
    CHECK(abs(t.theta_n - Real(7) / 8) <= 5 * exp(-u) * u * u);
    CHECK(abs(t.pi_n[0] - Real(6) / 7) < Real("1e-3"));
    CHECK(abs(t.pi_n[1] - Real(1) / 7) < Real("1e-3"));
    CHECK_THROWS_AS(finite_n_sets(spec, doubling, Real(1), 3, 2), RegimeError);
}

TEST_CASE("q selection") {
    ObservableSpec nonper = three_point("sqrt(2)/16", std::nullopt);
    QSelection qs = select_q(nonper, doubling);
    CHECK(qs.q == 3);
    CHECK(qs.rationale == QSelection::Rationale::NonPeriodic);
    CHECK(qs.increasing);

    ObservableSpec per = three_point("1/31", 5);
    QSelection qp = select_q(per, doubling);
    CHECK(qp.q == 5);
    CHECK(qp.increasing);
}
