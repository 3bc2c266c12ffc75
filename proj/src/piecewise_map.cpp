#include "evtlab/piecewise_map.hpp"

#include "evtlab/errors.hpp"

#include <cmath>

namespace evtlab {
namespace {

Rational affine_value(const AffineLaw& law, const Rational& x) { return law.slope * x + law.offset; }

Rational frac(const Rational& q) { return q - Rational(floor_of(q)); }

}  // namespace

PiecewiseMap::PiecewiseMap(Kind kind, std::vector<Branch> branches)
    : kind_(kind), branches_(std::move(branches)) {
    if (branches_.empty()) throw ConfigError("map needs at least one branch");
    if (branches_.front().lo != 0 || branches_.back().hi != 1)
        throw ConfigError("branch domains must cover [0, 1)");
    for (std::size_t i = 0; i < branches_.size(); ++i) {
        const Branch& b = branches_[i];
        if (!(b.lo < b.hi)) throw ConfigError("branch domain must have lo < hi");
        if (i + 1 < branches_.size() && b.hi != branches_[i + 1].lo)
            throw ConfigError("branch domains must be contiguous and sorted");
        if (auto* a = std::get_if<AffineLaw>(&b.law); a && a->slope == 0)
            throw ConfigError("affine branch slope must be nonzero");
        lo_double_.push_back(to_double(b.lo));
    }

    if (kind_ == Kind::Lsv) {
        continuous_ = false;
        degree_ = 2;
        alpha_double_ = to_double(std::get<LsvLaw>(branches_.front().law).alpha);
        return;
    }
    Rational total = 0;
    for (std::size_t i = 0; i < branches_.size(); ++i) {
        const auto& law = std::get<AffineLaw>(branches_[i].law);
        total += abs(law.slope) * (branches_[i].hi - branches_[i].lo);
        const Branch& next = branches_[(i + 1) % branches_.size()];
        const auto& next_law = std::get<AffineLaw>(next.law);
        Rational left = frac(affine_value(law, branches_[i].hi));
        Rational right = frac(affine_value(next_law, next.lo));
        if (left != right) continuous_ = false;
    }
    degree_ = static_cast<int>(floor_of(total + Rational(1, 2)));
}

PiecewiseMap PiecewiseMap::affine_mod1(const Rational& slope, const Rational& offset) {
    return PiecewiseMap(Kind::AffineMod1, {Branch{0, 1, AffineLaw{slope, offset}}});
}

PiecewiseMap PiecewiseMap::piecewise_affine(std::vector<Branch> branches) {
    for (const Branch& b : branches)
        if (!std::holds_alternative<AffineLaw>(b.law))
            throw ConfigError("piecewise affine map needs affine branches");
    return PiecewiseMap(Kind::PiecewiseAffine, std::move(branches));
}

PiecewiseMap PiecewiseMap::lsv(const Rational& alpha) {
    if (!(alpha > 0 && alpha < 1)) throw ConfigError("LSV alpha must lie in (0, 1)");
    return PiecewiseMap(Kind::Lsv, {Branch{0, Rational(1, 2), LsvLaw{alpha}},
                                    Branch{Rational(1, 2), 1, AffineLaw{2, -1}}});
}

std::optional<int> PiecewiseMap::integer_slope() const {
    if (kind_ != Kind::AffineMod1) return std::nullopt;
    const auto& law = std::get<AffineLaw>(branches_.front().law);
    if (law.offset != 0 || denominator(law.slope) != 1 || law.slope < 2 || law.slope > 1024)
        return std::nullopt;
    return static_cast<int>(numerator(law.slope));
}

std::string PiecewiseMap::describe() const {
    switch (kind_) {
        case Kind::AffineMod1: {
            const auto& law = std::get<AffineLaw>(branches_.front().law);
            std::string s = law.slope.str() + "x";
            if (law.offset != 0) s += " + " + law.offset.str();
            return s + " mod 1";
        }
        case Kind::PiecewiseAffine:
            return "piecewise affine map with " + std::to_string(branches_.size()) + " branches";
        case Kind::Lsv:
            return "LSV map, alpha = " + std::get<LsvLaw>(branches_.front().law).alpha.str();
    }
    return {};
}

std::size_t PiecewiseMap::branch_index(const Real& x) const {
    std::size_t idx = 0;
    for (std::size_t i = 1; i < branches_.size(); ++i)
        if (x >= Real(branches_[i].lo)) idx = i;
    return idx;
}

std::size_t PiecewiseMap::branch_index(double x) const {
    std::size_t idx = 0;
    for (std::size_t i = 1; i < lo_double_.size(); ++i)
        if (x >= lo_double_[i]) idx = i;
    return idx;
}

std::size_t PiecewiseMap::branch_index(const Surd& x) const {
    std::size_t idx = 0;
    for (std::size_t i = 1; i < branches_.size(); ++i)
        if (compare(x, branches_[i].lo) >= 0) idx = i;
    return idx;
}

Real PiecewiseMap::branch_value(std::size_t branch, const Real& x) const {
    const Branch& b = branches_[branch];
    if (auto* a = std::get_if<AffineLaw>(&b.law)) return Real(a->slope) * x + Real(a->offset);
    const auto& lsv = std::get<LsvLaw>(b.law);
    return x * (1 + pow(2 * x, Real(lsv.alpha)));
}

Real PiecewiseMap::branch_inverse(std::size_t branch, const Real& y) const {
    const Branch& b = branches_[branch];
    if (auto* a = std::get_if<AffineLaw>(&b.law)) return (y - Real(a->offset)) / Real(a->slope);
    Real lo = Real(b.lo), hi = Real(b.hi);
    if (y <= 0) return lo;
    if (y >= 1) return hi;
    for (int it = 0; it < precision_bits() + 4; ++it) {
        Real mid = (lo + hi) / 2;
        if (branch_value(branch, mid) < y) lo = mid;
        else hi = mid;
    }
    return (lo + hi) / 2;
}

Real PiecewiseMap::apply(const Real& x) const {
    std::size_t idx = branch_index(x);
    Real v = branch_value(idx, x);
    if (on_circle()) {
        v -= floor(v);
        if (v >= 1) v -= 1;
        return v;
    }
    if (v >= 1) v = 1 - ldexp(Real(1), -precision_bits());
    if (v < 0) v = 0;
    return v;
}

double PiecewiseMap::apply(double x) const {
    if (kind_ == Kind::Lsv) {
        if (x < 0.5) {
            double v = x * (1.0 + std::pow(2.0 * x, alpha_double_));
            return v < 1.0 ? v : std::nextafter(1.0, 0.0);
        }
        return 2.0 * x - 1.0;
    }
    const auto& law = std::get<AffineLaw>(branches_[branch_index(x)].law);
    double v = to_double(law.slope) * x + to_double(law.offset);
    v -= std::floor(v);
    return v < 1.0 ? v : 0.0;
}

Position PiecewiseMap::apply(const Position& x) const {
    if (const Surd* s = x.surd(); s && is_affine()) {
        const auto& law = std::get<AffineLaw>(branches_[branch_index(*s)].law);
        Surd out{law.slope * s->a + law.offset, law.slope * s->b, s->r};
        return Position(out).mod1();
    }
    return Position(apply(x.real()));
}

Real PiecewiseMap::derivative(const Real& x) const {
    const Branch& b = branches_[branch_index(x)];
    if (auto* a = std::get_if<AffineLaw>(&b.law)) return Real(abs(a->slope));
    Real alpha = Real(std::get<LsvLaw>(b.law).alpha);
    return 1 + (1 + alpha) * pow(2 * x, alpha);
}

const Rational& PiecewiseMap::slope_of(std::size_t branch) const {
    const auto* a = std::get_if<AffineLaw>(&branches_.at(branch).law);
    if (!a) throw ConfigError("branch " + std::to_string(branch) + " is not affine");
    return a->slope;
}

}  // namespace evtlab
