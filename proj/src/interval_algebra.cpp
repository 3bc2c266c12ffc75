#include "evtlab/interval_algebra.hpp"

#include "evtlab/errors.hpp"

#include <algorithm>

namespace evtlab {
namespace {

std::size_t g_arc_budget = 1'000'000;

Real frac(const Real& x) {
    Real f = x - floor(x);
    if (f >= 1) f -= 1;
    return f;
}

void push_arc(std::vector<ArcSet::Interval>& out, const CircleArc& arc) {
    if (arc.lo == 0 && arc.hi == 1) {
        out.push_back({Real(0), Real(1)});
    } else if (arc.lo < arc.hi) {
        out.push_back({arc.lo, arc.hi});
    } else if (arc.hi < arc.lo) {
        out.push_back({arc.lo, Real(1)});
        out.push_back({Real(0), arc.hi});
    }
}

}  // namespace

CircleArc CircleArc::ball(const Real& center, const Real& radius) {
    if (radius * 2 >= 1) return full();
    Real lo = frac(center - radius);
    Real hi = frac(center + radius);
    if (hi == 0) hi = 1;
    return {lo, hi};
}

Real CircleArc::length() const {
    if (hi > lo) return hi - lo;
    if (hi < lo) return hi - lo + 1;
    return Real(0);
}

bool CircleArc::contains(const Real& x) const {
    if (lo == 0 && hi == 1) return x >= 0 && x < 1;
    if (lo < hi) return x >= lo && x < hi;
    return x >= lo || x < hi;
}

std::size_t arc_budget() { return g_arc_budget; }
void set_arc_budget(std::size_t arcs) { g_arc_budget = arcs; }

ArcSet ArcSet::full() { return from_intervals({{Real(0), Real(1)}}); }

ArcSet ArcSet::normalize(const std::vector<CircleArc>& raw) {
    std::vector<Interval> parts;
    parts.reserve(raw.size() + 1);
    for (const CircleArc& arc : raw) push_arc(parts, arc);
    return from_intervals(std::move(parts));
}

ArcSet ArcSet::from_intervals(std::vector<Interval> raw) {
    if (raw.size() > g_arc_budget)
        throw ResourceError("arc budget exceeded: " + std::to_string(raw.size()) + " arcs > " +
                            std::to_string(g_arc_budget));
    const Real tol = merge_tolerance();
    std::vector<Interval> clipped;
    clipped.reserve(raw.size());
    for (Interval& iv : raw) {
        if (iv.lo < 0) iv.lo = 0;
        if (iv.hi > 1) iv.hi = 1;
        if (iv.lo < iv.hi) clipped.push_back(std::move(iv));
    }
    std::sort(clipped.begin(), clipped.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });

    std::vector<Interval> merged;
    for (Interval& iv : clipped) {
        if (!merged.empty() && iv.lo <= merged.back().hi + tol) {
            if (iv.hi > merged.back().hi) merged.back().hi = iv.hi;
        } else {
            merged.push_back(std::move(iv));
        }
    }
    ArcSet out;
    for (Interval& iv : merged)
        if (iv.hi - iv.lo > tol) out.parts_.push_back(std::move(iv));
    if (!out.parts_.empty()) {
        if (out.parts_.front().lo <= tol) out.parts_.front().lo = 0;
        if (out.parts_.back().hi >= 1 - tol) out.parts_.back().hi = 1;
    }
    return out;
}

std::vector<CircleArc> ArcSet::arcs() const {
    std::vector<CircleArc> out;
    bool wrap = parts_.size() >= 2 && parts_.front().lo == 0 && parts_.back().hi == 1;
    std::size_t first = wrap ? 1 : 0;
    std::size_t last = wrap ? parts_.size() - 1 : parts_.size();
    for (std::size_t i = first; i < last; ++i) out.push_back({parts_[i].lo, parts_[i].hi});
    if (wrap) out.push_back({parts_.back().lo, parts_.front().hi});
    return out;
}

std::size_t ArcSet::size() const {
    bool wrap = parts_.size() >= 2 && parts_.front().lo == 0 && parts_.back().hi == 1;
    return parts_.size() - (wrap ? 1 : 0);
}

bool ArcSet::is_full() const {
    return parts_.size() == 1 && parts_.front().lo == 0 && parts_.front().hi == 1;
}

Real ArcSet::measure() const {
    Real total = 0;
    for (const Interval& iv : parts_) total += iv.hi - iv.lo;
    return total;
}

bool ArcSet::contains(const Real& x) const {
    auto it = std::upper_bound(parts_.begin(), parts_.end(), x,
                               [](const Real& v, const Interval& iv) { return v < iv.lo; });
    if (it == parts_.begin()) return false;
    --it;
    return x >= it->lo && x < it->hi;
}

nlohmann::json ArcSet::to_json() const {
    nlohmann::json out = nlohmann::json::array();
    for (const CircleArc& arc : arcs()) out.push_back({to_decimal(arc.lo), to_decimal(arc.hi)});
    return out;
}

ArcSet ArcSet::from_json(const nlohmann::json& j) {
    std::vector<CircleArc> raw;
    for (const auto& pair : j) {
        if (!pair.is_array() || pair.size() != 2)
            throw ConfigError("arc set JSON must be a list of [lo, hi] pairs");
        raw.push_back({Real(pair[0].get<std::string>()), Real(pair[1].get<std::string>())});
    }
    return normalize(raw);
}

ArcSet set_union(const ArcSet& s, const ArcSet& t) {
    std::vector<ArcSet::Interval> parts(s.intervals());
    parts.insert(parts.end(), t.intervals().begin(), t.intervals().end());
    return ArcSet::from_intervals(std::move(parts));
}

ArcSet set_intersect(const ArcSet& s, const ArcSet& t) {
    const auto& a = s.intervals();
    const auto& b = t.intervals();
    std::vector<ArcSet::Interval> parts;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const Real& lo = a[i].lo > b[j].lo ? a[i].lo : b[j].lo;
        const Real& hi = a[i].hi < b[j].hi ? a[i].hi : b[j].hi;
        if (lo < hi) parts.push_back({lo, hi});
        if (a[i].hi < b[j].hi) ++i;
        else ++j;
    }
    return ArcSet::from_intervals(std::move(parts));
}

ArcSet set_complement(const ArcSet& s) {
    std::vector<ArcSet::Interval> parts;
    Real cursor = 0;
    for (const auto& iv : s.intervals()) {
        if (cursor < iv.lo) parts.push_back({cursor, iv.lo});
        cursor = iv.hi;
    }
    if (cursor < 1) parts.push_back({cursor, Real(1)});
    return ArcSet::from_intervals(std::move(parts));
}

ArcSet set_difference(const ArcSet& s, const ArcSet& t) {
    return set_intersect(s, set_complement(t));
}

ArcSet preimage(const ArcSet& s, const PiecewiseMap& map) {
    std::vector<ArcSet::Interval> parts;
    const auto& branches = map.branches();
    for (std::size_t bi = 0; bi < branches.size(); ++bi) {
        const Branch& br = branches[bi];
        Real dom_lo = Real(br.lo), dom_hi = Real(br.hi);
        if (std::holds_alternative<LsvLaw>(br.law)) {
            for (const auto& iv : s.intervals())
                parts.push_back({map.branch_inverse(bi, iv.lo), map.branch_inverse(bi, iv.hi)});
            continue;
        }
        Real y_a = map.branch_value(bi, dom_lo);
        Real y_b = map.branch_value(bi, dom_hi);
        const Real& img_lo = y_a < y_b ? y_a : y_b;
        const Real& img_hi = y_a < y_b ? y_b : y_a;
        for (const auto& iv : s.intervals()) {
            Integer w_lo = Real(ceil(img_lo - iv.hi)).convert_to<Integer>();
            Integer w_hi = floor_of(Real(img_hi - iv.lo));
            for (Integer w = w_lo; w <= w_hi; ++w) {
                Real shift = Real(w);
                Real y0 = iv.lo + shift, y1 = iv.hi + shift;
                if (y0 < img_lo) y0 = img_lo;
                if (y1 > img_hi) y1 = img_hi;
                if (!(y0 < y1)) continue;
                Real x0 = map.branch_inverse(bi, y0), x1 = map.branch_inverse(bi, y1);
                if (x1 < x0) std::swap(x0, x1);
                if (x0 < dom_lo) x0 = dom_lo;
                if (x1 > dom_hi) x1 = dom_hi;
                if (x0 < x1) parts.push_back({std::move(x0), std::move(x1)});
                if (parts.size() > arc_budget())
                    throw ResourceError("arc budget exceeded while computing a preimage");
            }
        }
    }
    return ArcSet::from_intervals(std::move(parts));
}

ArcSet image(const ArcSet& s, const PiecewiseMap& map) {
    std::vector<ArcSet::Interval> parts;
    const auto& branches = map.branches();
    for (const auto& iv : s.intervals()) {
        for (std::size_t bi = 0; bi < branches.size(); ++bi) {
            Real lo = Real(branches[bi].lo), hi = Real(branches[bi].hi);
            if (iv.lo > lo) lo = iv.lo;
            if (iv.hi < hi) hi = iv.hi;
            if (!(lo < hi)) continue;
            Real y0 = map.branch_value(bi, lo), y1 = map.branch_value(bi, hi);
            if (y1 < y0) std::swap(y0, y1);
            if (!map.on_circle()) {
                parts.push_back({std::move(y0), std::move(y1)});
                continue;
            }
            Real len = y1 - y0;
            if (len >= 1) return ArcSet::full();
            Real start = frac(y0);
            Real end = start + len;
            if (end <= 1) {
                parts.push_back({start, end});
            } else {
                parts.push_back({start, Real(1)});
                parts.push_back({Real(0), Real(end - 1)});
            }
        }
    }
    return ArcSet::from_intervals(std::move(parts));
}

}  // namespace evtlab
