#pragma once

#include "evtlab/numeric.hpp"
#include "evtlab/piecewise_map.hpp"

#include "json.hpp"

#include <cstddef>
#include <vector>

namespace evtlab {

// Arc [lo, hi) of the circle; hi < lo wraps through 0, and {0, 1} is the full circle.
struct CircleArc {
    Real lo;
    Real hi;

    static CircleArc full() { return {Real(0), Real(1)}; }
    // Ball of the given radius around a center, as an arc (full circle if radius >= 1/2).
    static CircleArc ball(const Real& center, const Real& radius);
    bool wraps() const { return hi < lo; }
    Real length() const;
    bool contains(const Real& x) const;
};

// Maximal number of arcs an ArcSet may hold (default 10^6).
std::size_t arc_budget();
void set_arc_budget(std::size_t arcs);

class ArcSet {
public:
    // Half-open interval [lo, hi) with 0 <= lo < hi <= 1, used internally.
    struct Interval {
        Real lo;
        Real hi;
    };

    ArcSet() = default;
    static ArcSet full();
    static ArcSet normalize(const std::vector<CircleArc>& raw);
    static ArcSet from_intervals(std::vector<Interval> raw);

    // Sorted by lo; an arc through 0 is reported once, as the last (wrapping) arc.
    std::vector<CircleArc> arcs() const;
    const std::vector<Interval>& intervals() const { return parts_; }
    std::size_t size() const;
    bool empty() const { return parts_.empty(); }
    bool is_full() const;
    Real measure() const;
    bool contains(const Real& x) const;

    nlohmann::json to_json() const;
    static ArcSet from_json(const nlohmann::json& j);

private:
    std::vector<Interval> parts_;
};

ArcSet set_union(const ArcSet& s, const ArcSet& t);
ArcSet set_intersect(const ArcSet& s, const ArcSet& t);
ArcSet set_complement(const ArcSet& s);
ArcSet set_difference(const ArcSet& s, const ArcSet& t);

// {x : f(x) in S}; non-surjective branches are clipped to their image.
ArcSet preimage(const ArcSet& s, const PiecewiseMap& map);
// f(S).
ArcSet image(const ArcSet& s, const PiecewiseMap& map);

}  // namespace evtlab
