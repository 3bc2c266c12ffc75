#include "evtlab/simulator.hpp"

#include "evtlab/analytic_evt.hpp"
#include "evtlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>

namespace evtlab {

std::string to_string(ClusterPattern p) {
    switch (p) {
        case ClusterPattern::MonotoneDecreasing:
            return "monotone-decreasing";
        case ClusterPattern::AscendingStep:
            return "ascending-step";
        case ClusterPattern::Other:
            return "other";
    }
    return {};
}

namespace {

using u128 = unsigned __int128;

struct OrbitResult {
    std::vector<ExceedanceRecord> exceedances;
    std::vector<SeriesPoint> series;
};

double double_distance(bool circle, double x, double y) {
    double d = std::fabs(x - y);
    if (circle && 1.0 - d < d) d = 1.0 - d;
    return d;
}

// Exceedance test in double precision, used for LSV orbits and for recorded series values.
class FloatScanner {
public:
    FloatScanner(const ObservableSpec& spec, const Real& u) : spec_(spec) {
        for (const auto& pt : spec.points) {
            xi_.push_back(pt.xi.to_double());
            eps_.push_back(pt.shape.radius(u).convert_to<double>());
        }
        separation_ = spec.separation.convert_to<double>();
        base_value_ = spec.base_value.convert_to<double>();
    }

    std::size_t check(double x, double& value) const {
        for (std::size_t i = 0; i < xi_.size(); ++i) {
            double d = double_distance(spec_.circle, x, xi_[i]);
            if (d < eps_[i]) {
                value = d == 0.0 ? HUGE_VAL : spec_.points[i].shape.h(d);
                return i + 1;
            }
        }
        return 0;
    }

    double phi(double x) const {
        for (std::size_t i = 0; i < xi_.size(); ++i) {
            double d = double_distance(spec_.circle, x, xi_[i]);
            if (d < separation_) return d == 0.0 ? HUGE_VAL : spec_.points[i].shape.h(d);
        }
        return base_value_;
    }

private:
    const ObservableSpec& spec_;
    std::vector<double> xi_;
    std::vector<double> eps_;
    double separation_;
    double base_value_;
};

// Exceedance test on the integer window of a digit orbit, with exact fallback near ball edges.
class DigitScanner {
public:
    DigitScanner(const ObservableSpec& spec, const Real& u, unsigned base)
        : spec_(spec), u_(u), base_(base), window_(DigitOrbit::window_for_base(base)) {
        scale_ = 1;
        for (unsigned i = 0; i < window_; ++i) scale_ *= base_;
        const int bits = static_cast<int>(window_ * std::log2(double(base_))) + 64;
        PrecisionGuard guard(bits);
        Real scale_real = pow(Real(base_), window_);
        for (const auto& pt : spec.points) {
            Real xi_units = floor(pt.xi.real() * scale_real + Real(0.5));
            Real eps_units = floor(pt.shape.radius(u) * scale_real);
            xi_.push_back(to_u128(xi_units) % scale_);
            eps_.push_back(to_u128(eps_units));
        }
    }

    std::size_t check(DigitOrbit& orbit, double& value) const {
        const u128 x = orbit.window_value();
        for (std::size_t i = 0; i < xi_.size(); ++i) {
            u128 diff = x >= xi_[i] ? x - xi_[i] : x + scale_ - xi_[i];
            u128 dist = std::min(diff, scale_ - diff);
            if (dist > eps_[i] + 3) continue;
            if (dist + 2 < eps_[i] && dist >= (static_cast<u128>(1) << 40)) {
                double d = static_cast<double>(static_cast<long double>(dist) / static_cast<long double>(scale_));
                value = spec_.points[i].shape.h(d);
                return i + 1;
            }
            if (exact_check(orbit, i, value)) return i + 1;
        }
        return 0;
    }

private:
    static u128 to_u128(const Real& v) {
        Integer z = v.convert_to<Integer>();
        Integer hi = z >> 64;
        Integer lo = z - (hi << 64);
        return (static_cast<u128>(hi.convert_to<std::uint64_t>()) << 64) | lo.convert_to<std::uint64_t>();
    }

    bool exact_check(DigitOrbit& orbit, std::size_t i, double& value) const {
        for (unsigned extra = 64; extra <= 4096; extra *= 2) {
            const int bits = static_cast<int>((window_ + extra) * std::log2(double(base_))) + 64;
            PrecisionGuard guard(bits);
            Real x = orbit.position(extra);
            Real d = point_distance(spec_, x, spec_.points[i].xi.real());
            Real eps = spec_.points[i].shape.radius(u_);
            Real margin = 2 * pow(Real(base_), -static_cast<int>(window_ + extra));
            if (d + margin < eps) {
                value = d == 0 ? HUGE_VAL : spec_.points[i].shape.h(d).convert_to<double>();
                return true;
            }
            if (d - margin > eps) return false;
        }
        return false;
    }

    const ObservableSpec& spec_;
    Real u_;
    unsigned base_;
    unsigned window_;
    u128 scale_;
    std::vector<u128> xi_;
    std::vector<u128> eps_;
};

void parallel_for(std::uint64_t count, unsigned threads, const std::function<void(std::uint64_t)>& body) {
    if (threads <= 1 || count <= 1) {
        for (std::uint64_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::uint64_t i = w; i < count; i += threads) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace

std::vector<Cluster> extract_clusters(const std::vector<ExceedanceRecord>& records, std::uint64_t q) {
    std::vector<Cluster> out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        bool fresh = out.empty() || i == 0 || records[i - 1].orbit != r.orbit ||
                     r.t - records[i - 1].t > q;
        if (i > 0 && records[i - 1].orbit == r.orbit && r.t <= records[i - 1].t)
            throw ConfigError("exceedance records must be sorted by orbit and time");
        if (fresh) out.push_back(Cluster{r.orbit, r.t, {}, {}});
        out.back().values.push_back(r.value);
        out.back().points.push_back(r.hit_point);
    }
    return out;
}

ClusterPattern cluster_pattern(const Cluster& cluster) {
    if (cluster.size() < 2) throw ConfigError("cluster pattern needs at least two exceedances");
    bool decreasing = true, ascent = false;
    for (std::size_t i = 1; i < cluster.values.size(); ++i) {
        if (cluster.values[i] > cluster.values[i - 1]) ascent = true;
        if (!(cluster.values[i] < cluster.values[i - 1])) decreasing = false;
    }
    if (decreasing) return ClusterPattern::MonotoneDecreasing;
    if (ascent) return ClusterPattern::AscendingStep;
    return ClusterPattern::Other;
}

double ks_exponential(std::vector<double> sample, double mean) {
    if (sample.empty() || !(mean > 0)) return 0.0;
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        double f = 1.0 - std::exp(-sample[i] / mean);
        d = std::max({d, f - i / n, (i + 1) / n - f});
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) return 0.0;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::fabs(double(i) / a.size() - double(j) / b.size()));
    }
    return d;
}

ClusterStats summarize(const std::vector<ExceedanceRecord>& records,
                       const std::vector<Cluster>& clusters, std::uint64_t orbits,
                       std::uint64_t n, std::uint64_t q, std::uint64_t evl_blocks) {
    ClusterStats s;
    s.orbits = orbits;
    s.n = n;
    s.q = q;
    s.exceedances = records.size();
    s.clusters = clusters.size();
    if (s.exceedances > 0) {
        s.theta_hat = double(s.clusters) / double(s.exceedances);
        s.theta_se = std::sqrt(s.theta_hat * (1 - s.theta_hat) / double(s.exceedances));
    }
    s.ci_low = std::max(0.0, s.theta_hat - 1.96 * s.theta_se);
    s.ci_high = std::min(1.0, s.theta_hat + 1.96 * s.theta_se);

    for (const auto& c : clusters) {
        if (s.size_counts.size() < c.size()) s.size_counts.resize(c.size(), 0);
        ++s.size_counts[c.size() - 1];
        if (c.size() >= 2) {
            ClusterPattern p = cluster_pattern(c);
            s.ascending_clusters += p == ClusterPattern::AscendingStep;
            s.decreasing_clusters += p == ClusterPattern::MonotoneDecreasing;
        }
    }
    for (std::uint64_t count : s.size_counts) {
        double p = s.clusters ? double(count) / double(s.clusters) : 0.0;
        s.pi_hat.push_back(p);
        s.pi_se.push_back(s.clusters ? std::sqrt(p * (1 - p) / double(s.clusters)) : 0.0);
    }

    const double steps = double(orbits) * double(n);
    s.rescale = steps > 0 ? double(s.exceedances) / steps : 0.0;
    for (std::size_t i = 1; i < clusters.size(); ++i) {
        double prev = double(clusters[i - 1].orbit) * double(n) + double(clusters[i - 1].start);
        double cur = double(clusters[i].orbit) * double(n) + double(clusters[i].start);
        s.gaps.push_back((cur - prev) * s.rescale);
    }
    s.ks_stat = s.theta_hat > 0 ? ks_exponential(s.gaps, 1.0 / s.theta_hat) : 0.0;
    s.ks_critical_1pct = s.gaps.empty() ? 0.0 : 1.628 / std::sqrt(double(s.gaps.size()));

    std::vector<bool> hit(orbits, false);
    for (const auto& r : records) hit[r.orbit] = true;
    s.orbits_without_exceedance = std::count(hit.begin(), hit.end(), false);
    s.evl_hat = orbits ? double(s.orbits_without_exceedance) / double(orbits) : 0.0;
    s.evl_se = orbits ? std::sqrt(s.evl_hat * (1 - s.evl_hat) / double(orbits)) : 0.0;

    s.evl_blocks = evl_blocks;
    if (evl_blocks >= 1 && n >= evl_blocks) {
        const std::uint64_t len = n / evl_blocks;
        std::vector<bool> block_hit(orbits * evl_blocks, false);
        for (const auto& r : records)
            if (r.t < len * evl_blocks) block_hit[r.orbit * evl_blocks + r.t / len] = true;
        double empty = double(std::count(block_hit.begin(), block_hit.end(), false));
        double total = double(block_hit.size());
        s.evl_block_hat = total > 0 ? empty / total : 0.0;
        s.evl_block_se = total > 0 ? std::sqrt(s.evl_block_hat * (1 - s.evl_block_hat) / total) : 0.0;
    }
    return s;
}

ExperimentResult run_experiment(const PiecewiseMap& map, const ObservableSpec& spec,
                                const ExperimentPlan& plan) {
    if (plan.n < 1 || plan.orbits < 1) throw ConfigError("n and the number of orbits must be at least 1");
    if (plan.tau.has_value() == plan.level.has_value())
        throw ConfigError("give exactly one of tau and an explicit level");
    auto k = map.integer_slope();
    if (!k && map.kind() != PiecewiseMap::Kind::Lsv)
        throw ConfigError("Monte Carlo supports kx mod 1 with integer k >= 2 and LSV maps");

    ExperimentResult out;
    out.u = plan.level ? *plan.level : solve_threshold(spec, Real(plan.n), *plan.tau);
    out.measure_u = exceedance_measure(spec, out.u);
    out.q = plan.q ? *plan.q : default_q(spec);
    const std::uint64_t burn_in = plan.burn_in ? *plan.burn_in : (k ? 0 : 1000);

    FloatScanner float_scan(spec, out.u);
    std::optional<DigitScanner> digit_scan;
    if (k) digit_scan.emplace(spec, out.u, static_cast<unsigned>(*k));

    std::vector<OrbitResult> results(plan.orbits);
    parallel_for(plan.orbits, plan.threads, [&](std::uint64_t m) {
        OrbitResult& res = results[m];
        const bool record = m < plan.record_orbits;
        auto note = [&](std::uint64_t t, double x, std::size_t hit, double value) {
            if (hit) res.exceedances.push_back({m, t, value, hit});
            if (record) res.series.push_back({m, t, x, hit ? value : float_scan.phi(x), hit != 0, hit});
        };
        if (k) {
            DigitOrbit orbit(static_cast<unsigned>(*k), plan.seed, m);
            for (std::uint64_t i = 0; i < burn_in; ++i) orbit.advance();
            for (std::uint64_t t = 0; t < plan.n; ++t) {
                double value = 0.0;
                std::size_t hit = digit_scan->check(orbit, value);
                if (hit || record) note(t, orbit.position(), hit, value);
                orbit.advance();
            }
        } else {
            FloatOrbit orbit(map, plan.seed, m, burn_in);
            for (std::uint64_t t = 0; t < plan.n; ++t) {
                double value = 0.0;
                std::size_t hit = float_scan.check(orbit.position(), value);
                if (hit || record) note(t, orbit.position(), hit, value);
                orbit.advance();
            }
        }
    });

    for (auto& r : results) {
        out.exceedances.insert(out.exceedances.end(), r.exceedances.begin(), r.exceedances.end());
        out.series.insert(out.series.end(), r.series.begin(), r.series.end());
    }
    out.clusters = extract_clusters(out.exceedances, out.q);
    out.stats = summarize(out.exceedances, out.clusters, plan.orbits, plan.n, out.q, plan.evl_blocks);
    return out;
}

InducedReport compare_induced_repp(const PiecewiseMap& map, const CircleArc& y,
                                   const ObservableSpec& spec, const ExperimentPlan& plan) {
    if (map.kind() != PiecewiseMap::Kind::Lsv)
        throw ConfigError("induced comparison is implemented for LSV maps");
    for (const auto& pt : spec.points)
        if (!y.contains(pt.xi.real()))
            throw ConfigError("maximal point " + pt.xi.str() + " lies outside the inducing set Y");
    if (plan.tau.has_value() == plan.level.has_value())
        throw ConfigError("give exactly one of tau and an explicit level");

    InducedReport rep;
    rep.u = plan.level ? *plan.level : solve_threshold(spec, Real(plan.n), *plan.tau);
    rep.q = plan.q ? *plan.q : default_q(spec);
    const std::uint64_t burn_in = plan.burn_in ? *plan.burn_in : 1000;
    FloatScanner scan(spec, rep.u);
    const double lo = y.lo.convert_to<double>();

    std::vector<OrbitResult> original(plan.orbits), induced(plan.orbits);
    std::vector<double> return_steps(plan.orbits, 0.0);
    parallel_for(plan.orbits, plan.threads, [&](std::uint64_t m) {
        FloatOrbit a(map, plan.seed, 2 * m, burn_in);
        for (std::uint64_t t = 0; t < plan.n; ++t) {
            double value = 0.0;
            if (std::size_t hit = scan.check(a.position(), value))
                original[m].exceedances.push_back({m, t, value, hit});
            a.advance();
        }
        FloatOrbit b(map, plan.seed, 2 * m + 1, burn_in);
        while (!y.contains(Real(b.position()))) b.advance();
        double x = b.position();
        double steps = 0.0;
        for (std::uint64_t t = 0; t < plan.n; ++t) {
            double value = 0.0;
            if (std::size_t hit = scan.check(x, value)) induced[m].exceedances.push_back({m, t, value, hit});
            auto r = induced_first_return(map, y, x);
            x = r.point;
            steps += double(r.time);
        }
        return_steps[m] = steps;
        (void)lo;
    });

    auto pool = [](std::vector<OrbitResult>& parts) {
        std::vector<ExceedanceRecord> all;
        for (auto& p : parts) all.insert(all.end(), p.exceedances.begin(), p.exceedances.end());
        return all;
    };
    auto orig_records = pool(original);
    auto ind_records = pool(induced);
    rep.original = summarize(orig_records, extract_clusters(orig_records, rep.q), plan.orbits, plan.n,
                             rep.q, plan.evl_blocks);
    rep.induced = summarize(ind_records, extract_clusters(ind_records, rep.q), plan.orbits, plan.n,
                            rep.q, plan.evl_blocks);
    rep.theta_gap = std::fabs(rep.original.theta_hat - rep.induced.theta_hat);
    std::size_t kmax = std::max(rep.original.pi_hat.size(), rep.induced.pi_hat.size());
    double tv = 0.0;
    for (std::size_t i = 0; i < kmax; ++i) {
        double a = i < rep.original.pi_hat.size() ? rep.original.pi_hat[i] : 0.0;
        double b = i < rep.induced.pi_hat.size() ? rep.induced.pi_hat[i] : 0.0;
        tv += std::fabs(a - b);
    }
    rep.tv_pi = tv / 2;
    rep.ks_gaps = ks_two_sample(rep.original.gaps, rep.induced.gaps);
    double total_steps = 0.0;
    for (double s : return_steps) total_steps += s;
    rep.mean_return_time = total_steps / (double(plan.orbits) * double(plan.n));
    return rep;
}

}  // namespace evtlab
