#include "evtlab/analytic_evt.hpp"
#include "evtlab/config.hpp"
#include "evtlab/report.hpp"
#include "evtlab/simulator.hpp"
#include "evtlab/tails.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>

using namespace evtlab;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

const PiecewiseMap doubling = PiecewiseMap::affine_mod1(2);
const PiecewiseMap tripling = PiecewiseMap::affine_mod1(3);

std::string fmt(const char* format, auto... args) {
    char buf[1024];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

ObservableDraft::Point orbit_point(std::uint64_t m, ShapeFn shape) {
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

ObservableSpec three_point(const char* zeta, std::optional<std::uint64_t> period) {
    ObservableDraft d;
    d.base_point = Position::parse(zeta);
    d.period = period;
    d.points = {orbit_point(0, ShapeFn::neglog()), orbit_point(1, ShapeFn::power_law(Rational(1, 2))),
                orbit_point(3, ShapeFn::power_law(Rational(1, 2)))};
    return build_observable(doubling, d);
}

ObservableSpec tripling_spec() {
    ObservableDraft d;
    d.base_point = Position::parse("1/4");
    d.period = 2;
    d.points = {orbit_point(0, ShapeFn::neglog()), orbit_point(1, ShapeFn::power_law(Rational(1, 3)))};
    return build_observable(tripling, d);
}

ObservableSpec uncorrelated(std::vector<ObservableDraft::Point> points, const PiecewiseMap& map) {
    ObservableDraft d;
    d.correlated = false;
    d.points = std::move(points);
    return build_observable(map, d);
}

Rational pow_r(const Rational& x, std::size_t n) {
    Rational out = 1;
    for (std::size_t i = 0; i < n; ++i) out *= x;
    return out;
}

bool within(double est, double target, double sigma, double k = 3.0) { return std::fabs(est - target) <= k * sigma; }

// The large simulated run is shared by criteria 7 and 8.
const ExperimentResult& big_run() {
    static const ExperimentResult r = [] {
        ExperimentPlan plan;
        plan.n = 100000;
        plan.orbits = 2000;
        plan.tau = Real(20);
        plan.q = 3;
        plan.seed = 20240607;
        plan.record_orbits = 0;
        return run_experiment(doubling, three_point("sqrt(2)/16", std::nullopt), plan);
    }();
    return r;
}

Outcome c1() {
    EIResult ei = analytic_theta(three_point("sqrt(2)/16", std::nullopt), doubling);
    return {ei.theta == Rational(7, 8), "theta = " + to_string(ei.theta)};
}

Outcome c2() {
    MultiplicityResult m = analytic_multiplicity(three_point("sqrt(2)/16", std::nullopt), doubling, 8);
    bool ok = m.pi[0] == Rational(6, 7) && m.pi[1] == Rational(1, 7) && !m.tail;
    for (std::size_t k = 3; k <= 8; ++k) ok = ok && m.pi[k - 1] == 0;
    return {ok, "pi = (" + to_string(m.pi[0]) + ", " + to_string(m.pi[1]) + ", " + to_string(m.pi[2]) + ", ...)"};
}

Outcome c3() {
    auto spec = three_point("1/31", 5);
    EIResult ei = analytic_theta(spec, doubling);
    MultiplicityResult m = analytic_multiplicity(spec, doubling, 25);
    bool ok = ei.theta == Rational(13, 16);
    for (std::size_t l = 0; l <= 12; ++l) {
        Rational r = pow_r(Rational(1, 32), l);
        ok = ok && m.at(2 * l + 1) == Rational(21, 26) * r;
        if (l >= 1) ok = ok && m.at(2 * l) == Rational(67, 13) * r;
    }
    ok = ok && m.tail && m.tail->period == 2 && m.tail->ratio == Rational(1, 32);
    std::string tail = m.tail ? "tail ratio " + to_string(m.tail->ratio) : "no tail";
    return {ok, "theta = " + to_string(ei.theta) + ", " + tail};
}

Outcome c4() {
    auto a = analytic_multiplicity(three_point("sqrt(2)/16", std::nullopt), doubling, 8);
    auto b = analytic_multiplicity(three_point("1/31", 5), doubling, 25);
    bool ok = a.total == 1 && b.total == 1 && a.mean == Rational(8, 7) && b.mean == Rational(16, 13) &&
              a.mean == 1 / a.theta && b.mean == 1 / b.theta;
    return {ok, "sums " + to_string(a.total) + ", " + to_string(b.total) + "; means " + to_string(a.mean) + ", " +
                    to_string(b.mean)};
}

Outcome c5() {
    auto spec = tripling_spec();
    Real u = solve_threshold(spec, Real(2000), Real(80));
    double err = abs(u - Real("4.619613119957849")).convert_to<double>();
    return {err < 1e-9, "u = " + to_decimal(u) + fmt(", |err| = %.2g", err)};
}

Outcome c6() {
    auto spec = three_point("sqrt(2)/16", std::nullopt);
    std::vector<double> gaps;
    std::string d;
    for (int u : {10, 15, 20, 25}) {
        FiniteNTable t = finite_n_sets(spec, doubling, Real(u), 3, 3);
        double theta = t.theta_n.convert_to<double>();
        gaps.push_back(std::fabs(theta - 0.875));
        d += fmt("theta_%d = %.9f ", u, theta);
    }
    bool ok = gaps.back() < 1e-3;
    for (std::size_t i = 1; i < gaps.size(); ++i) ok = ok && gaps[i] < gaps[i - 1];
    return {ok, d};
}

Outcome c7() {
    const auto& s = big_run().stats;
    double p1 = s.pi_hat.size() > 0 ? s.pi_hat[0] : 0.0, p2 = s.pi_hat.size() > 1 ? s.pi_hat[1] : 0.0;
    double se1 = s.pi_se.size() > 0 ? s.pi_se[0] : 0.0, se2 = s.pi_se.size() > 1 ? s.pi_se[1] : 0.0;
    bool ok = within(s.theta_hat, 0.875, s.theta_se) && within(p1, 6.0 / 7, se1) && within(p2, 1.0 / 7, se2);
    return {ok, fmt("theta_hat = %.5f +- %.5f, pi_hat = (%.5f +- %.5f, %.5f +- %.5f), %llu exceedances",
                    s.theta_hat, s.theta_se, p1, se1, p2, se2, (unsigned long long)s.exceedances)};
}

Outcome c8() {
    const auto& r = big_run();
    const auto& s = r.stats;
    auto table = finite_n_sets(three_point("sqrt(2)/16", std::nullopt), doubling, r.u, 3, 3);
    double theta_n = table.theta_n.convert_to<double>();
    double expected = (r.measure_u * Real(s.n)).convert_to<double>();
    double p0 = std::exp(-theta_n * expected);
    double sigma = std::sqrt(p0 * (1 - p0) / double(s.orbits));
    double b0 = std::exp(-theta_n * expected / double(s.evl_blocks));
    double bsigma = std::sqrt(b0 * (1 - b0) / double(s.orbits * s.evl_blocks));
    bool ok = within(s.evl_hat, p0, sigma);
    return {ok, fmt("P(no exceedance) = %.3g vs %.3g (3 sigma %.2g); blocks of n/%llu: %.4f vs %.4f (%s)", s.evl_hat,
                    p0, 3 * sigma, (unsigned long long)s.evl_blocks, s.evl_block_hat, b0,
                    within(s.evl_block_hat, b0, bsigma) ? "within 3 sigma" : "outside 3 sigma")};
}

Outcome c9() {
    auto spec = tripling_spec();
    Real u = solve_threshold(spec, Real(2000), Real(80));
    Real x = Real(1) / 4 + exp(-u) / 3;
    Real phi_x = evaluate(spec, x);
    Real phi_fx = evaluate(spec, tripling.apply(x));
    bool first = phi_x > u && abs(phi_x - (u + log(Real(3)))) < Real("1e-12");
    bool second = phi_fx > phi_x;
    // level above which the ascending step holds along this path
    Real lo = u, hi = u + 10;
    for (int i = 0; i < 200; ++i) {
        Real mid = (lo + hi) / 2;
        Real xm = Real(1) / 4 + exp(-mid) / 3;
        (evaluate(spec, tripling.apply(xm)) > evaluate(spec, xm) ? hi : lo) = mid;
    }

    ExperimentPlan plan;
    plan.n = 2000;
    plan.tau = Real(80);
    plan.seed = 1446;
    auto run = run_experiment(tripling, spec, plan);
    bool simulated = run.stats.ascending_clusters >= 1;
    return {first && second && simulated,
            fmt("phi(x) = %.4f > u = %.4f: %s; phi(f(x)) = %.4f > phi(x): %s (holds for u > %.4f); simulated run: "
                "%llu ascending-step clusters",
                phi_x.convert_to<double>(), u.convert_to<double>(), first ? "yes" : "no",
                phi_fx.convert_to<double>(), second ? "yes" : "no", hi.convert_to<double>(),
                (unsigned long long)run.stats.ascending_clusters)};
}

Outcome c10() {
    auto a = select_q(three_point("sqrt(2)/16", std::nullopt), doubling);
    auto b = select_q(three_point("1/31", 5), doubling);
    ObservableDraft d;
    d.base_point = Position::parse("sqrt(3)/5");
    d.points = {orbit_point(0, ShapeFn::neglog())};
    auto c = select_q(build_observable(doubling, d), doubling);
    bool ok = a.q == 3 && b.q == 5 && c.q == 0 && a.increasing && b.increasing && a.levels.size() == 3;
    return {ok, fmt("q = %llu, %llu, %llu; R(A_q) increasing: %s, %s", (unsigned long long)a.q,
                    (unsigned long long)b.q, (unsigned long long)c.q, a.increasing ? "yes" : "no",
                    b.increasing ? "yes" : "no")};
}

Outcome c11() {
    ExperimentPlan plan;
    plan.n = 100000;
    plan.orbits = 500;
    plan.tau = Real(20);
    plan.seed = 11;
    plan.record_orbits = 0;
    plan.q = 3;
    auto typical = uncorrelated({at("sqrt(2)/16", ShapeFn::power_law(Rational(1, 2))),
                                 at("1/pi", ShapeFn::power_law(Rational(1, 2)))},
                                doubling);
    auto a = run_experiment(doubling, typical, plan).stats;
    auto mixed = uncorrelated(
        {at("0", ShapeFn::power_law(Rational(1, 2)), 1), at("1/pi", ShapeFn::power_law(Rational(1, 2)))}, doubling);
    Rational theta = analytic_theta(mixed, doubling).theta;
    plan.q = default_q(mixed);
    plan.seed = 12;
    auto b = run_experiment(doubling, mixed, plan).stats;
    // with theta_hat = 1 the binomial SE vanishes; fall back to one cluster in the count
    double se_a = std::max(a.theta_se, 1.0 / double(a.exceedances));
    bool ok = within(a.theta_hat, 1.0, se_a) && theta == Rational(3, 4) && within(b.theta_hat, 0.75, b.theta_se);
    return {ok, fmt("typical pair: theta_hat = %.5f +- %.5f; fixed + typical: theta_hat = %.5f +- %.5f vs %s",
                    a.theta_hat, a.theta_se, b.theta_hat, b.theta_se, to_string(theta).c_str())};
}

Outcome c12() {
    bool exact = compete({TailType::gumbel(), TailType::frechet(Rational(1, 2))}) == TailType::frechet(Rational(1, 2)) &&
                 compete({TailType::gumbel(Rational(1)), TailType::weibull(Rational(1, 2), 1)}) ==
                     TailType::weibull(Rational(1, 2), 1);
    auto spec = three_point("sqrt(2)/16", std::nullopt);
    TailType winner = spec_tail_type(spec);
    auto check = numeric_tail_check(spec, winner, {Real(1000)});
    double dev = check.max_deviation.convert_to<double>();
    return {exact && dev < 0.01,
            "winner " + winner.describe() + fmt(", max ratio deviation at u = 1000: %.3g", dev)};
}

Outcome c13() {
    auto map = PiecewiseMap::lsv(Rational(2, 5));
    auto spec = uncorrelated({at("e-2", ShapeFn::neglog())}, map);
    ExperimentPlan plan;
    plan.n = 100000;
    plan.orbits = 500;
    plan.tau = Real(20);
    plan.q = 3;
    plan.seed = 13;
    auto rep = compare_induced_repp(map, CircleArc{Real(0.5), Real(1)}, spec, plan);
    bool ok = rep.theta_gap < 0.05 && rep.tv_pi < 0.05;
    return {ok, fmt("theta original %.5f, induced %.5f, |diff| = %.5f, TV(pi) = %.5f, KS(gaps) = %.4f",
                    rep.original.theta_hat, rep.induced.theta_hat, rep.theta_gap, rep.tv_pi, rep.ks_gaps)};
}

ArcSet random_set(std::mt19937_64& rng, int max_arcs) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<CircleArc> raw;
    int n = static_cast<int>(rng() % (max_arcs + 1));
    for (int i = 0; i < n; ++i) {
        Real lo = Real(u(rng));
        Real hi = lo + Real(u(rng) * 0.3);
        if (hi >= 1) hi -= 1;
        raw.push_back({lo, hi});
    }
    return ArcSet::normalize(raw);
}

bool same_set(const ArcSet& a, const ArcSet& b, const Real& tol) {
    const auto& x = a.intervals();
    const auto& y = b.intervals();
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (abs(x[i].lo - y[i].lo) > tol || abs(x[i].hi - y[i].hi) > tol) return false;
    return true;
}

Outcome c14() {
    std::mt19937_64 rng(14);
    const Real tol = ldexp(Real(1), -60);
    int algebra_bad = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        ArcSet s = random_set(rng, 5), t = random_set(rng, 5);
        ArcSet un = set_union(s, t), in = set_intersect(s, t);
        bool ok = abs(un.measure() + in.measure() - s.measure() - t.measure()) <= tol &&
                  same_set(set_complement(un), set_intersect(set_complement(s), set_complement(t)), tol) &&
                  same_set(set_complement(in), set_union(set_complement(s), set_complement(t)), tol) &&
                  same_set(set_difference(s, t), set_intersect(s, set_complement(t)), tol);
        algebra_bad += !ok;
    }

    int region_bad = 0;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<ObservableSpec> specs = {three_point("sqrt(2)/16", std::nullopt), tripling_spec()};
    for (int t = 0; t < 10000; ++t) {
        const auto& spec = specs[t % 2];
        Real u = regime_floor(spec) + Real(unif(rng) * 20);
        ArcSet region = exceedance_region(spec, u);
        Real x;
        if (t % 4 < 2) {
            x = Real(unif(rng));
        } else {
            const auto& pt = spec.points[t % spec.points.size()];
            x = pt.xi.real() + (Real(unif(rng)) * 4 - 2) * pt.shape.radius(u);
            x -= floor(x);
        }
        region_bad += (evaluate(spec, x) > u) != region.contains(x);
    }

    bool identical = true;
    for (const char* name : {"pattern_3x.toml", "nonperiodic_sqrt2.toml"}) {
        ExperimentConfig cfg = load_config(std::string(EVTLAB_CONFIG_DIR) + "/" + name);
        set_precision_bits(80);
        cfg.plan.orbits = std::min<std::uint64_t>(cfg.plan.orbits, 4);
        cfg.plan.n = std::min<std::uint64_t>(cfg.plan.n, 20000);
        auto a = run_command("simulate", cfg), b = run_command("simulate", cfg);
        for (std::size_t i = 0; i < a.files.size(); ++i) identical = identical && a.files[i].second == b.files[i].second;
    }
    return {algebra_bad == 0 && region_bad == 0 && identical,
            fmt("boolean identity failures %d / 10000, evaluate vs region mismatches %d / 10000, reruns %s",
                algebra_bad, region_bad, identical ? "byte-identical" : "differ")};
}

struct Criterion {
    int id;
    const char* name;
    bool slow;
    Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
    bool only_slow = false, skip_slow = false;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--only-slow")) only_slow = true;
        else if (!std::strcmp(argv[i], "--skip-slow")) skip_slow = true;
        else {
            std::fprintf(stderr, "usage: acceptance [--only-slow | --skip-slow]\n");
            return 1;
        }
    }
    const Criterion criteria[] = {
        {1, "exact extremal index, non-periodic example", false, c1},
        {2, "exact cluster size distribution, non-periodic example", false, c2},
        {3, "exact extremal index and geometric tail, periodic example", false, c3},
        {4, "multiplicity normalization and mean size", false, c4},
        {5, "threshold solver on the tripling example", false, c5},
        {6, "finite-n oracle convergence", false, c6},
        {7, "Monte Carlo extremal index and cluster sizes", false, c7},
        {8, "extremal law of the maximum", false, c8},
        {9, "ascending-step cluster pattern", false, c9},
        {10, "q selection", false, c10},
        {11, "uncorrelated maxima", false, c11},
        {12, "tail competition", false, c12},
        {13, "induced map equivalence", true, c13},
        {14, "property suites", false, c14},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        if ((only_slow && !c.slow) || (skip_slow && c.slow)) continue;
        auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            set_precision_bits(80);
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += !o.pass;
        std::printf("%s criterion %2d: %s [%.2fs] %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return failed ? 1 : 0;
}
