#include "evtlab/dynamics.hpp"

#include "evtlab/errors.hpp"

#include <cmath>

namespace evtlab {
namespace {

Integer to_integer(unsigned __int128 v) {
    Integer hi = static_cast<std::uint64_t>(v >> 64);
    Integer lo = static_cast<std::uint64_t>(v);
    return (hi << 64) + lo;
}

// Whether the orbit point sits on a breakpoint where the one-sided |slopes| differ.
bool on_derivative_jump(const PiecewiseMap& map, std::size_t idx, bool at_lo) {
    if (!at_lo) return false;
    const auto& branches = map.branches();
    if (idx == 0 && !map.on_circle()) return false;
    std::size_t prev = idx == 0 ? branches.size() - 1 : idx - 1;
    const auto* a = std::get_if<AffineLaw>(&branches[idx].law);
    const auto* b = std::get_if<AffineLaw>(&branches[prev].law);
    if (!a || !b) return true;
    return abs(a->slope) != abs(b->slope);
}

Real circle_gap(const PiecewiseMap& map, const Real& x, const Real& y) {
    Real d = abs(x - y);
    if (map.on_circle() && 1 - d < d) d = 1 - d;
    return d;
}

}  // namespace

std::mt19937_64 make_stream(std::uint64_t master_seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                      static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

Position iterate(const PiecewiseMap& map, const Position& x, std::uint64_t steps) {
    Position y = x;
    for (std::uint64_t i = 0; i < steps; ++i) y = map.apply(y);
    return y;
}

DerivativeProduct derivative_product(const PiecewiseMap& map, const Position& x,
                                     std::uint64_t steps) {
    if (map.is_affine() && x.exact()) {
        Rational product = 1;
        Position y = x;
        for (std::uint64_t i = 0; i < steps; ++i) {
            const Surd& s = *y.surd();
            std::size_t idx = map.branch_index(s);
            if (on_derivative_jump(map, idx, compare(s, map.branches()[idx].lo) == 0))
                throw RegimeError("orbit of " + x.str() + " hits a discontinuity of f' at step " +
                                  std::to_string(i));
            product *= abs(map.slope_of(idx));
            y = map.apply(y);
        }
        return {Real(product), product};
    }
    Real product = 1;
    Real y = x.real();
    for (std::uint64_t i = 0; i < steps; ++i) {
        std::size_t idx = map.branch_index(y);
        if (on_derivative_jump(map, idx, y == Real(map.branches()[idx].lo)))
            throw RegimeError("orbit hits a discontinuity of f' at step " + std::to_string(i));
        product *= map.derivative(y);
        y = map.apply(y);
    }
    return {product, std::nullopt};
}

PeriodicCheck verify_periodic(const PiecewiseMap& map, const Position& zeta, std::uint64_t p) {
    if (p == 0) throw ConfigError("period must be at least 1");
    PeriodicCheck out;
    std::optional<std::uint64_t> first_return;
    if (map.is_affine() && zeta.exact()) {
        Position y = zeta;
        for (std::uint64_t i = 1; i <= p; ++i) {
            y = map.apply(y);
            if (!first_return && y == zeta) first_return = i;
        }
        out.is_periodic = y == zeta;
    } else {
        Rational max_slope = 2;
        for (std::size_t i = 0; i < map.branches().size(); ++i)
            if (auto* a = std::get_if<AffineLaw>(&map.branches()[i].law))
                max_slope = max(max_slope, Rational(abs(a->slope)));
        int extra = static_cast<int>(p) * static_cast<int>(std::ceil(std::log2(to_double(max_slope) + 1)));
        PrecisionGuard guard(precision_bits() + extra + 64);
        const Real tol = ldexp(Real(1), -60);
        Real z = zeta.real();
        Real y = z;
        for (std::uint64_t i = 1; i <= p; ++i) {
            y = map.apply(y);
            if (!first_return && circle_gap(map, y, z) <= tol) first_return = i;
        }
        out.is_periodic = circle_gap(map, y, z) <= tol;
    }
    out.is_prime_period = out.is_periodic && first_return && *first_return == p;
    try {
        DerivativeProduct d = derivative_product(map, zeta, p);
        out.multiplier = d.value;
        out.exact_multiplier = d.exact;
    } catch (const RegimeError&) {
        out.multiplier = std::numeric_limits<Real>::quiet_NaN();
    }
    return out;
}

FirstReturn induced_first_return(const PiecewiseMap& map, const CircleArc& y, double x,
                                 std::uint64_t budget) {
    const double lo = y.lo.convert_to<double>();
    const double hi = y.hi.convert_to<double>();
    const bool full = y.lo == 0 && y.hi == 1;
    auto inside = [&](double v) {
        if (full) return true;
        if (lo < hi) return v >= lo && v < hi;
        return v >= lo || v < hi;
    };
    if (!inside(x)) throw ConfigError("induced_first_return: starting point is not in Y");
    for (std::uint64_t t = 1; t <= budget; ++t) {
        x = map.apply(x);
        if (inside(x)) return {x, t};
    }
    throw ResourceError("no return to Y within " + std::to_string(budget) + " steps");
}

unsigned DigitOrbit::window_for_base(unsigned base) {
    unsigned w = static_cast<unsigned>(std::floor(127.0 / std::log2(static_cast<double>(base))));
    return w < 64 ? w : 64;
}

DigitOrbit::DigitOrbit(unsigned base, std::uint64_t master_seed, std::uint64_t index)
    : base_(base), window_(window_for_base(base)), rng_(make_stream(master_seed, index)) {
    if (base < 2) throw ConfigError("digit orbit base must be at least 2");
    scale_ = 1;
    for (unsigned i = 0; i < window_; ++i) scale_ *= base_;
    lead_ = scale_ / base_;
    unsigned __int128 modulus = 1;
    digits_per_draw_ = 0;
    while (modulus * base_ <= (static_cast<unsigned __int128>(1) << 63)) {
        modulus *= base_;
        ++digits_per_draw_;
    }
    draw_modulus_ = static_cast<std::uint64_t>(modulus);
    unsigned __int128 span = static_cast<unsigned __int128>(1) << 64;
    unsigned __int128 limit = span / modulus * modulus;
    draw_limit_ = limit == span ? 0 : static_cast<std::uint64_t>(limit);
    for (unsigned i = 0; i < window_; ++i) value_ = value_ * base_ + digit_at(i);
}

void DigitOrbit::refill() {
    std::uint64_t v;
    do {
        v = rng_();
    } while (draw_limit_ != 0 && v >= draw_limit_);
    v %= draw_modulus_;
    for (unsigned i = 0; i < digits_per_draw_; ++i) {
        buffer_.push_back(static_cast<std::uint8_t>(v % base_));
        v /= base_;
    }
}

unsigned DigitOrbit::digit_at(std::size_t offset) {
    while (head_ + offset >= buffer_.size()) refill();
    return buffer_[head_ + offset];
}

void DigitOrbit::advance() {
    unsigned out = buffer_[head_];
    unsigned in = digit_at(window_);
    value_ = (value_ - static_cast<unsigned __int128>(out) * lead_) * base_ + in;
    ++head_;
    ++time_;
    if (head_ >= 4096) {
        buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(head_));
        head_ = 0;
    }
}

double DigitOrbit::position() const {
    return static_cast<double>(static_cast<long double>(value_) / static_cast<long double>(scale_));
}

Real DigitOrbit::position(unsigned extra_digits) {
    Integer num = to_integer(value_);
    for (unsigned i = 0; i < extra_digits; ++i) num = num * base_ + digit_at(window_ + i);
    Integer den = pow(Integer(base_), window_ + extra_digits);
    return Real(num) / Real(den);
}

FloatOrbit::FloatOrbit(const PiecewiseMap& map, std::uint64_t master_seed, std::uint64_t index,
                       std::uint64_t burn_in)
    : map_(&map), rng_(make_stream(master_seed, index)) {
    x_ = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    reseed_if_stuck();
    for (std::uint64_t i = 0; i < burn_in; ++i) advance();
}

void FloatOrbit::advance() {
    x_ = map_->apply(x_);
    reseed_if_stuck();
}

void FloatOrbit::reseed_if_stuck() {
    while (x_ == 0.0) x_ = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

std::vector<double> sample_orbit(const PiecewiseMap& map, std::size_t length, std::uint64_t seed) {
    if (length == 0) throw ConfigError("orbit length must be at least 1");
    std::vector<double> out;
    out.reserve(length);
    if (auto k = map.integer_slope()) {
        DigitOrbit orbit(static_cast<unsigned>(*k), seed, 0);
        for (std::size_t i = 0; i < length; ++i) {
            out.push_back(orbit.position());
            orbit.advance();
        }
        return out;
    }
    FloatOrbit orbit(map, seed, 0, map.kind() == PiecewiseMap::Kind::Lsv ? 1000 : 0);
    for (std::size_t i = 0; i < length; ++i) {
        out.push_back(orbit.position());
        orbit.advance();
    }
    return out;
}

}  // namespace evtlab
