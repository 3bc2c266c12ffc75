#pragma once

#include "evtlab/errors.hpp"

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <string>
#include <string_view>

namespace evtlab {

using Integer = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;
using Real = boost::multiprecision::mpfr_float;

// Working precision in bits for newly created Real values (default 80).
int precision_bits();
void set_precision_bits(int bits);

// Raises the working precision for the lifetime of the guard.
class PrecisionGuard {
public:
    explicit PrecisionGuard(int bits);
    ~PrecisionGuard();
    PrecisionGuard(const PrecisionGuard&) = delete;
    PrecisionGuard& operator=(const PrecisionGuard&) = delete;

private:
    int saved_;
};

// Arcs closer than this are merged: 2^-(precision - 10).
Real merge_tolerance();

Real to_real(const Rational& q);
Integer floor_of(const Rational& q);
Integer floor_of(const Real& x);

// Accepts "3", "-2", "1/31", "0.125", "1e-3", "2.5E+2".
Rational parse_rational(std::string_view text);

// Decimal rendering with enough digits to round-trip the working precision.
std::string to_decimal(const Real& x);
std::string to_string(const Rational& q);

double to_double(const Rational& q);

}  // namespace evtlab
