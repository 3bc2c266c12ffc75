#pragma once

#include "evtlab/interval_algebra.hpp"
#include "evtlab/numeric.hpp"
#include "evtlab/piecewise_map.hpp"
#include "evtlab/position.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace evtlab {

// Independent generator for orbit `index` under a master seed.
std::mt19937_64 make_stream(std::uint64_t master_seed, std::uint64_t index);

Position iterate(const PiecewiseMap& map, const Position& x, std::uint64_t steps);

struct DerivativeProduct {
    Real value;
    std::optional<Rational> exact;  // present for affine maps
};

// Product of |f'| along the first `steps` points of the orbit of x. Throws when the orbit
// lands on a branch endpoint where the one-sided derivatives differ.
DerivativeProduct derivative_product(const PiecewiseMap& map, const Position& x,
                                     std::uint64_t steps);

struct PeriodicCheck {
    bool is_periodic = false;
    bool is_prime_period = false;
    Real multiplier;
    std::optional<Rational> exact_multiplier;
};

PeriodicCheck verify_periodic(const PiecewiseMap& map, const Position& zeta, std::uint64_t p);

struct FirstReturn {
    double point;
    std::uint64_t time;
};

// Smallest j >= 1 with f^j(x) in Y. Throws ResourceError when the budget runs out.
FirstReturn induced_first_return(const PiecewiseMap& map, const CircleArc& y, double x,
                                 std::uint64_t budget = 1'000'000'000ULL);

// Lebesgue-random orbit of x -> kx mod 1, represented by its i.i.d. base-k digit stream.
class DigitOrbit {
public:
    DigitOrbit(unsigned base, std::uint64_t master_seed, std::uint64_t index);

    static unsigned window_for_base(unsigned base);

    unsigned base() const { return base_; }
    unsigned window() const { return window_; }
    std::uint64_t time() const { return time_; }

    // Applies the map once (left shift of the digit stream).
    void advance();

    // Current position as an integer in units of k^-W (digits t+1 .. t+W).
    unsigned __int128 window_value() const { return value_; }
    // k^W.
    unsigned __int128 scale() const { return scale_; }

    double position() const;
    // Position using W + extra digits, evaluated at the current working precision.
    Real position(unsigned extra_digits);

private:
    unsigned digit_at(std::size_t offset);  // offset 0 is the leading window digit
    void refill();

    unsigned base_;
    unsigned window_;
    unsigned __int128 scale_;
    unsigned __int128 lead_;  // k^(W-1)
    unsigned __int128 value_ = 0;
    std::uint64_t time_ = 0;
    std::mt19937_64 rng_;
    std::uint64_t draw_limit_;
    std::uint64_t draw_modulus_;
    unsigned digits_per_draw_;
    std::vector<std::uint8_t> buffer_;  // digits not yet shifted out, starting at head_
    std::size_t head_ = 0;
};

// Lebesgue-stationary (affine, integer slope) or burnt-in (LSV) orbit sample.
std::vector<double> sample_orbit(const PiecewiseMap& map, std::size_t length,
                                 std::uint64_t seed);

// Double-precision orbit generator for maps without a digit representation.
class FloatOrbit {
public:
    FloatOrbit(const PiecewiseMap& map, std::uint64_t master_seed, std::uint64_t index,
               std::uint64_t burn_in);
    double position() const { return x_; }
    void advance();

private:
    const PiecewiseMap* map_;
    std::mt19937_64 rng_;
    double x_;
    void reseed_if_stuck();
};

}  // namespace evtlab
