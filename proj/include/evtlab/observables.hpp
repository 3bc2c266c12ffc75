#pragma once

#include "evtlab/interval_algebra.hpp"
#include "evtlab/numeric.hpp"
#include "evtlab/piecewise_map.hpp"
#include "evtlab/position.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace evtlab {

// Profile h of the observable near a maximal point, as a function of the distance d.
struct ShapeFn {
    enum class Kind { NegLog, PowerLaw, BoundedPower, Custom };

    Kind kind = Kind::NegLog;
    Rational p{1};  // PowerLaw: h(d) = d^-p
    Rational D{0};  // BoundedPower: h(d) = D - d^g
    Rational g{1};
    std::function<Real(const Real&)> custom_h;
    std::function<Real(const Real&)> custom_radius;

    static ShapeFn neglog();
    static ShapeFn power_law(const Rational& p);
    static ShapeFn bounded_power(const Rational& D, const Rational& g);
    static ShapeFn custom(std::function<Real(const Real&)> h,
                          std::function<Real(const Real&)> radius);

    Real h(const Real& d) const;
    double h(double d) const;
    // epsilon(u): the distance at which h equals u (0 at or above the supremum).
    Real radius(const Real& u) const;
    // u_F = h(0): +inf or D.
    Real supremum() const;
    std::string describe() const;
};

struct MaximalPoint {
    Position xi;
    std::uint64_t m = 0;
    ShapeFn shape;
    Rational density{1};
    // Prime period of xi for uncorrelated specs.
    std::optional<std::uint64_t> period;
};

struct ObservableSpec {
    Position base_point;
    std::vector<MaximalPoint> points;
    Real separation;
    Real base_value{0};
    std::optional<std::uint64_t> period;
    bool correlated = true;
    bool circle = true;
};

// Raw description before validation; unset xi means f^m(zeta).
struct ObservableDraft {
    struct Point {
        std::optional<Position> xi;
        std::uint64_t m = 0;
        ShapeFn shape;
        Rational density{1};
        std::optional<std::uint64_t> period;
    };
    std::optional<Position> base_point;
    std::vector<Point> points;
    std::optional<Real> separation;
    Real base_value{0};
    std::optional<std::uint64_t> period;
    bool correlated = true;
};

// Validates the draft against the map and fills in derived fields.
ObservableSpec build_observable(const PiecewiseMap& map, const ObservableDraft& draft);

Real point_distance(const ObservableSpec& spec, const Real& x, const Real& y);

Real evaluate(const ObservableSpec& spec, const Real& x);

// Lowest level at which every exceedance ball fits inside its separation ball.
Real regime_floor(const ObservableSpec& spec);

ArcSet exceedance_region(const ObservableSpec& spec, const Real& u);
// Density-weighted measure of the exceedance region.
Real exceedance_measure(const ObservableSpec& spec, const Real& u);

// Level u with n * measure(U(u)) = tau.
Real solve_threshold(const ObservableSpec& spec, const Real& n, const Real& tau);

}  // namespace evtlab
