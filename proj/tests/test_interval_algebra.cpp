#include "doctest.h"

#include "evtlab/interval_algebra.hpp"

#include <random>

using namespace evtlab;

namespace {

Real r(const char* s) { return Real(s); }

ArcSet arcs(std::initializer_list<std::pair<const char*, const char*>> list) {
    std::vector<CircleArc> raw;
    for (auto [lo, hi] : list) raw.push_back({r(lo), r(hi)});
    return ArcSet::normalize(raw);
}

bool close(const Real& a, const Real& b, int bits = 60) { return abs(a - b) <= ldexp(Real(1), -bits); }

bool same_set(const ArcSet& a, const ArcSet& b, int bits = 60) {
    const auto& x = a.intervals();
    const auto& y = b.intervals();
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!close(x[i].lo, y[i].lo, bits) || !close(x[i].hi, y[i].hi, bits)) return false;
    return true;
}

ArcSet random_set(std::mt19937_64& rng, int max_arcs) {
    std::uniform_int_distribution<int> count(0, max_arcs);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<CircleArc> raw;
    int n = count(rng);
    for (int i = 0; i < n; ++i) {
        Real lo = Real(u(rng));
        Real len = Real(u(rng) * 0.3);
        Real hi = lo + len;
        if (hi >= 1) hi -= 1;
        if (len > 0) raw.push_back({lo, hi});
    }
    return ArcSet::normalize(raw);
}

}  // namespace

TEST_CASE("normalize merges overlaps and keeps wrap arcs") {
    ArcSet s = arcs({{"0.1", "0.2"}, {"0.15", "0.3"}});
    REQUIRE(s.size() == 1);
    CHECK(close(s.arcs()[0].lo, r("0.1")));
    CHECK(close(s.arcs()[0].hi, r("0.3")));

    ArcSet empty = ArcSet::normalize({});
    CHECK(empty.empty());
    CHECK(empty.measure() == 0);

    ArcSet wrap = arcs({{"0.9", "0.1"}});
    REQUIRE(wrap.size() == 1);
    CHECK(wrap.arcs()[0].wraps());
    CHECK(close(wrap.measure(), r("0.2")));
}

TEST_CASE("touching arcs are merged") {
    ArcSet s = arcs({{"0.1", "0.2"}, {"0.2", "0.3"}});
    CHECK(s.size() == 1);
}

TEST_CASE("boolean operations") {
    ArcSet a = arcs({{"0", "0.5"}});
    ArcSet b = arcs({{"0.25", "0.75"}});
    ArcSet i = set_intersect(a, b);
    REQUIRE(i.size() == 1);
    CHECK(close(i.measure(), r("0.25")));
    CHECK(close(i.arcs()[0].lo, r("0.25")));

    CHECK(set_complement(ArcSet::full()).empty());
    CHECK(set_complement(ArcSet()).is_full());

    ArcSet s = arcs({{"0.1", "0.2"}, {"0.7", "0.05"}});
    ArcSet all = set_union(s, set_complement(s));
    CHECK(all.is_full());
    CHECK(all.measure() == 1);
    CHECK(close(set_complement(s).measure(), 1 - s.measure()));
}

TEST_CASE("contains respects half-open arcs") {
    ArcSet s = arcs({{"0.25", "0.5"}});
    CHECK(s.contains(r("0.25")));
    CHECK(s.contains(r("0.4")));
    CHECK_FALSE(s.contains(r("0.5")));
    ArcSet w = arcs({{"0.9", "0.1"}});
    CHECK(w.contains(r("0.95")));
    CHECK(w.contains(r("0.05")));
    CHECK_FALSE(w.contains(r("0.5")));
}

TEST_CASE("preimage under 2x mod 1") {
    auto doubling = PiecewiseMap::affine_mod1(2);
    ArcSet p = preimage(arcs({{"0", "0.5"}}), doubling);
    CHECK(same_set(p, arcs({{"0", "0.25"}, {"0.5", "0.75"}})));
    CHECK(preimage(ArcSet::full(), doubling).is_full());
    CHECK(preimage(ArcSet::full(), PiecewiseMap::lsv(Rational(2, 5))).is_full());
}

TEST_CASE("preimage of a ball under 3x mod 1") {
    // 3x = 3/4 + w has solutions x = (3/4 + w)/3 for w = 0, 1, 2.
    auto tripling = PiecewiseMap::affine_mod1(3);
    Real radius = r("0.01");
    ArcSet ball = ArcSet::normalize({CircleArc::ball(r("0.75"), radius)});
    ArcSet p = preimage(ball, tripling);
    ArcSet expected = ArcSet::normalize({CircleArc::ball(Real(1) / 4, radius / 3),
                                         CircleArc::ball(Real(7) / 12, radius / 3),
                                         CircleArc::ball(Real(11) / 12, radius / 3)});
    CHECK(same_set(p, expected));
    CHECK(close(p.measure(), 2 * radius));
}

TEST_CASE("preimage clips non-surjective branches") {
    // x -> 3x/2 mod 1 is onto [0, 1) once and onto [0, 1/2) a second time.
    auto contraction = PiecewiseMap::piecewise_affine({Branch{0, 1, AffineLaw{Rational(3, 2), 0}}});
    ArcSet p = preimage(arcs({{"0.5", "0.9"}}), contraction);
    CHECK(same_set(p, ArcSet::normalize({{Real(1) / 3, r("0.6")}})));
}

TEST_CASE("image under 2x mod 1") {
    auto doubling = PiecewiseMap::affine_mod1(2);
    ArcSet s = arcs({{"0.4", "0.6"}});
    ArcSet img = image(s, doubling);
    CHECK(same_set(img, arcs({{"0.8", "0.2"}})));
    CHECK(image(arcs({{"0.1", "0.7"}}), doubling).is_full());
}

TEST_CASE("ArcSet JSON round trip") {
    ArcSet s = arcs({{"0.125", "0.25"}, {"0.9", "0.05"}});
    auto j = s.to_json();
    REQUIRE(j.is_array());
    CHECK(j[0][0].is_string());
    CHECK(same_set(ArcSet::from_json(j), s, 70));
}

TEST_CASE("arc budget is enforced") {
    auto saved = arc_budget();
    set_arc_budget(8);
    auto doubling = PiecewiseMap::affine_mod1(2);
    ArcSet s = arcs({{"0.01", "0.02"}, {"0.21", "0.22"}, {"0.41", "0.42"}});
    ArcSet p = preimage(s, doubling);
    CHECK_THROWS_AS(preimage(preimage(p, doubling), doubling), ResourceError);
    set_arc_budget(saved);
}

TEST_CASE("property: boolean identities on random sets") {
    std::mt19937_64 rng(7);
    const Real tol = ldexp(Real(1), -60);
    for (int trial = 0; trial < 300; ++trial) {
        ArcSet s = random_set(rng, 6);
        ArcSet t = random_set(rng, 6);
        ArcSet u = set_union(s, t);
        ArcSet i = set_intersect(s, t);
        CHECK(abs(u.measure() + i.measure() - s.measure() - t.measure()) <= tol);
        CHECK(same_set(set_complement(u), set_intersect(set_complement(s), set_complement(t))));
        CHECK(same_set(set_complement(i), set_union(set_complement(s), set_complement(t))));
        CHECK(abs(set_complement(s).measure() - (1 - s.measure())) <= tol);
    }
}

TEST_CASE("property: preimage identities") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Real tol = ldexp(Real(1), -60);
    for (int k : {2, 3}) {
        auto f = PiecewiseMap::affine_mod1(k);
        auto f2 = PiecewiseMap::affine_mod1(k * k);
        for (int trial = 0; trial < 100; ++trial) {
            ArcSet s = random_set(rng, 5);
            ArcSet p = preimage(s, f);
            CHECK(abs(p.measure() - s.measure()) <= tol);
            CHECK(same_set(preimage(set_complement(s), f), set_complement(p)));
            CHECK(same_set(preimage(p, f), preimage(s, f2)));
            for (int probe = 0; probe < 20; ++probe) {
                Real x = Real(u(rng));
                Real fx = f.apply(x);
                bool near_edge = false;
                for (const auto& iv : s.intervals())
                    near_edge = near_edge || abs(fx - iv.lo) < 1e-12 || abs(fx - iv.hi) < 1e-12;
                if (!near_edge) CHECK(p.contains(x) == s.contains(fx));
            }
        }
    }
}
