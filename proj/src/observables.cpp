#include "evtlab/observables.hpp"

#include "evtlab/dynamics.hpp"

#include <cmath>
#include <limits>

namespace evtlab {
namespace {

Real infinity() { return std::numeric_limits<Real>::infinity(); }

}  // namespace

ShapeFn ShapeFn::neglog() { return ShapeFn{}; }

ShapeFn ShapeFn::power_law(const Rational& p) {
    if (p <= 0) throw ConfigError("power-law exponent must be positive");
    ShapeFn s;
    s.kind = Kind::PowerLaw;
    s.p = p;
    return s;
}

ShapeFn ShapeFn::bounded_power(const Rational& D, const Rational& g) {
    if (g <= 0) throw ConfigError("bounded-power exponent must be positive");
    ShapeFn s;
    s.kind = Kind::BoundedPower;
    s.D = D;
    s.g = g;
    return s;
}

ShapeFn ShapeFn::custom(std::function<Real(const Real&)> h, std::function<Real(const Real&)> radius) {
    if (!h || !radius) throw ConfigError("custom shape needs both h and its inverse");
    ShapeFn s;
    s.kind = Kind::Custom;
    s.custom_h = std::move(h);
    s.custom_radius = std::move(radius);
    return s;
}

Real ShapeFn::h(const Real& d) const {
    switch (kind) {
        case Kind::NegLog:
            return d == 0 ? infinity() : Real(-log(d));
        case Kind::PowerLaw:
            return d == 0 ? infinity() : Real(pow(d, -Real(p)));
        case Kind::BoundedPower:
            return Real(D) - pow(d, Real(g));
        case Kind::Custom:
            return custom_h(d);
    }
    return Real(0);
}

double ShapeFn::h(double d) const {
    switch (kind) {
        case Kind::NegLog:
            return -std::log(d);
        case Kind::PowerLaw:
            return std::pow(d, -to_double(p));
        case Kind::BoundedPower:
            return to_double(D) - std::pow(d, to_double(g));
        case Kind::Custom:
            return custom_h(Real(d)).convert_to<double>();
    }
    return 0.0;
}

Real ShapeFn::radius(const Real& u) const {
    switch (kind) {
        case Kind::NegLog:
            return exp(-u);
        case Kind::PowerLaw:
            return u <= 0 ? infinity() : Real(pow(u, -1 / Real(p)));
        case Kind::BoundedPower:
            return u >= Real(D) ? Real(0) : Real(pow(Real(D) - u, 1 / Real(g)));
        case Kind::Custom:
            return custom_radius(u);
    }
    return Real(0);
}

Real ShapeFn::supremum() const {
    switch (kind) {
        case Kind::NegLog:
        case Kind::PowerLaw:
            return infinity();
        case Kind::BoundedPower:
            return Real(D);
        case Kind::Custom:
            return custom_h(Real(0));
    }
    return infinity();
}

std::string ShapeFn::describe() const {
    switch (kind) {
        case Kind::NegLog:
            return "-log d";
        case Kind::PowerLaw:
            return "d^-(" + p.str() + ")";
        case Kind::BoundedPower:
            return D.str() + " - d^(" + g.str() + ")";
        case Kind::Custom:
            return "custom";
    }
    return {};
}

Real point_distance(const ObservableSpec& spec, const Real& x, const Real& y) {
    Real d = abs(x - y);
    if (spec.circle && 1 - d < d) d = 1 - d;
    return d;
}

ObservableSpec build_observable(const PiecewiseMap& map, const ObservableDraft& draft) {
    if (draft.points.empty()) throw ConfigError("observable needs at least one maximal point");
    ObservableSpec spec;
    spec.correlated = draft.correlated;
    spec.circle = map.on_circle();
    spec.base_value = draft.base_value;
    spec.period = draft.period;

    auto check_unit = [](const Position& x, const std::string& what) {
        Real v = x.real();
        if (v < 0 || v >= 1) throw ConfigError(what + " must lie in [0, 1)");
    };

    if (draft.correlated) {
        if (!draft.base_point) throw ConfigError("correlated observable needs a base point");
        spec.base_point = *draft.base_point;
        check_unit(spec.base_point, "base point");
        for (std::size_t i = 1; i < draft.points.size(); ++i)
            if (draft.points[i].m <= draft.points[i - 1].m)
                throw ConfigError("orbit offsets m must be strictly increasing");
        if (draft.period) {
            auto check = verify_periodic(map, spec.base_point, *draft.period);
            if (!check.is_periodic || !check.is_prime_period)
                throw ConfigError("base point is not periodic with prime period " +
                                  std::to_string(*draft.period));
            if (draft.points.back().m >= *draft.period)
                throw ConfigError("orbit offsets must be below the period");
        }
        for (const auto& dp : draft.points) {
            if (dp.period) throw ConfigError("per-point periods apply to uncorrelated observables only");
            Position xi = iterate(map, spec.base_point, dp.m);
            if (dp.xi) {
                bool same = *dp.xi == xi ||
                            abs(dp.xi->real() - xi.real()) <= ldexp(Real(1), -60);
                if (!same)
                    throw ConfigError("point " + dp.xi->str() + " is not f^" + std::to_string(dp.m) +
                                      " of the base point");
            }
            spec.points.push_back({xi, dp.m, dp.shape, dp.density, std::nullopt});
        }
    } else {
        if (draft.period) throw ConfigError("uncorrelated observables take per-point periods");
        if (draft.base_point) spec.base_point = *draft.base_point;
        for (const auto& dp : draft.points) {
            if (!dp.xi) throw ConfigError("uncorrelated points need an explicit position");
            check_unit(*dp.xi, "maximal point");
            if (dp.period) {
                auto check = verify_periodic(map, *dp.xi, *dp.period);
                if (!check.is_periodic || !check.is_prime_period)
                    throw ConfigError("point " + dp.xi->str() + " is not periodic with prime period " +
                                      std::to_string(*dp.period));
            }
            spec.points.push_back({*dp.xi, 0, dp.shape, dp.density, dp.period});
        }
    }

    Real min_gap = 1;
    for (std::size_t i = 0; i < spec.points.size(); ++i) {
        const auto& pt = spec.points[i];
        if (pt.density <= 0) throw ConfigError("densities must be positive");
        if (pt.shape.kind == ShapeFn::Kind::Custom && (!pt.shape.custom_h || !pt.shape.custom_radius))
            throw ConfigError("custom shape needs both h and its inverse");
        if (!(spec.base_value < pt.shape.supremum()))
            throw ConfigError("base value must be below the supremum of every shape");
        for (std::size_t j = i + 1; j < spec.points.size(); ++j) {
            Real d = point_distance(spec, pt.xi.real(), spec.points[j].xi.real());
            if (d < min_gap) min_gap = d;
        }
    }
    if (min_gap == 0) throw ConfigError("maximal points must be distinct");

    if (draft.separation) {
        spec.separation = *draft.separation;
        if (!(spec.separation > 0) || spec.separation * 2 > min_gap || spec.separation >= Real(0.5))
            throw ConfigError("separation radius does not keep the balls around the maxima disjoint");
    } else {
        spec.separation = spec.points.size() == 1 ? Real(Real(1) / 4) : Real(min_gap / 3);
    }
    return spec;
}

Real evaluate(const ObservableSpec& spec, const Real& x) {
    for (const auto& pt : spec.points) {
        Real d = point_distance(spec, x, pt.xi.real());
        if (d < spec.separation) return pt.shape.h(d);
    }
    return spec.base_value;
}

Real regime_floor(const ObservableSpec& spec) {
    Real floor_level = spec.base_value;
    for (const auto& pt : spec.points) {
        Real edge = pt.shape.h(spec.separation);
        if (edge > floor_level) floor_level = edge;
    }
    return floor_level;
}

namespace {

void check_regime(const ObservableSpec& spec, const Real& u) {
    if (isnan(u)) throw RegimeError("level is not a number");
    Real floor_level = regime_floor(spec);
    if (u < floor_level)
        throw RegimeError("level below shape regime: u = " + to_decimal(u) + " < " +
                          to_decimal(floor_level));
}

}  // namespace

ArcSet exceedance_region(const ObservableSpec& spec, const Real& u) {
    check_regime(spec, u);
    std::vector<CircleArc> raw;
    for (const auto& pt : spec.points) {
        Real eps = pt.shape.radius(u);
        if (!(eps > 0)) continue;
        Real c = pt.xi.real();
        if (spec.circle) {
            raw.push_back(CircleArc::ball(c, eps));
        } else {
            Real lo = c - eps, hi = c + eps;
            if (lo < 0) lo = 0;
            if (hi > 1) hi = 1;
            if (lo < hi) raw.push_back({lo, hi});
        }
    }
    return ArcSet::normalize(raw);
}

Real exceedance_measure(const ObservableSpec& spec, const Real& u) {
    check_regime(spec, u);
    Real total = 0;
    for (const auto& pt : spec.points) {
        Real eps = pt.shape.radius(u);
        if (!(eps > 0)) continue;
        Real len;
        if (spec.circle) {
            len = eps * 2 >= 1 ? Real(1) : Real(eps * 2);
        } else {
            Real c = pt.xi.real();
            Real lo = c - eps, hi = c + eps;
            if (lo < 0) lo = 0;
            if (hi > 1) hi = 1;
            len = hi - lo;
        }
        total += Real(pt.density) * len;
    }
    return total;
}

Real solve_threshold(const ObservableSpec& spec, const Real& n, const Real& tau) {
    if (!(n > 0) || !(tau > 0)) throw ConfigError("horizon and tau must be positive");
    const Real target = tau / n;
    Real lo = regime_floor(spec);
    Real at_floor = exceedance_measure(spec, lo);
    const Real tol = tau * Real("1e-12");
    if (abs(n * at_floor - tau) <= tol) return lo;
    if (at_floor < target)
        throw RegimeError("tau / n = " + to_decimal(target) +
                          " exceeds the measure of the maximal valid exceedance region " +
                          to_decimal(at_floor));
    Real sup = spec.points.front().shape.supremum();
    for (const auto& pt : spec.points)
        if (pt.shape.supremum() > sup) sup = pt.shape.supremum();
    Real step = 1;
    Real hi = lo + step;
    if (!isinf(sup) && hi > sup) hi = sup;
    while (exceedance_measure(spec, hi) > target) {
        lo = hi;
        step *= 2;
        hi = lo + step;
        if (!isinf(sup) && hi > sup) hi = sup;
        if (step > Real("1e30")) throw RegimeError("no threshold root in the shape regime");
    }
    Real mid = lo;
    for (int it = 0; it < 4 * precision_bits() + 200; ++it) {
        mid = (lo + hi) / 2;
        if (mid == lo || mid == hi) break;
        Real residual = n * exceedance_measure(spec, mid) - tau;
        if (abs(residual) <= tol) return mid;
        if (residual > 0) lo = mid;
        else hi = mid;
    }
    Real residual = n * exceedance_measure(spec, mid) - tau;
    if (abs(residual) <= tau * Real("1e-10")) return mid;
    throw ResourceError("threshold bisection exhausted the working precision (residual " +
                        to_decimal(residual) + "); raise --precision");
}

}  // namespace evtlab
