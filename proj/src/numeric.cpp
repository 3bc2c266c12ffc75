#include "evtlab/numeric.hpp"

#include "evtlab/errors.hpp"

#include <cmath>
#include <cctype>

namespace evtlab {
namespace {

int g_bits = 80;

unsigned digits_for_bits(int bits) {
    return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
}

struct PrecisionInit {
    PrecisionInit() { Real::default_precision(digits_for_bits(g_bits)); }
} g_precision_init;

}  // namespace

int precision_bits() { return g_bits; }

void set_precision_bits(int bits) {
    if (bits < 24) throw ConfigError("precision must be at least 24 bits");
    g_bits = bits;
    Real::default_precision(digits_for_bits(bits));
}

PrecisionGuard::PrecisionGuard(int bits) : saved_(g_bits) {
    if (bits > g_bits) set_precision_bits(bits);
}

PrecisionGuard::~PrecisionGuard() { set_precision_bits(saved_); }

Real merge_tolerance() { return ldexp(Real(1), -(g_bits - 10)); }

Real to_real(const Rational& q) { return Real(q); }

Integer floor_of(const Rational& q) {
    Integer num = numerator(q);
    Integer den = denominator(q);
    Integer f = num / den;
    if (num < 0 && f * den != num) f -= 1;
    return f;
}

Integer floor_of(const Real& x) { return Real(floor(x)).convert_to<Integer>(); }

Rational parse_rational(std::string_view text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s.empty()) throw ConfigError("empty number");
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        Rational num = parse_rational(s.substr(0, slash));
        Rational den = parse_rational(s.substr(slash + 1));
        if (den == 0) throw ConfigError("zero denominator in '" + s + "'");
        return num / den;
    }
    std::size_t pos = 0;
    bool negative = false;
    if (s[pos] == '+' || s[pos] == '-') negative = s[pos++] == '-';
    std::string digits;
    long frac_digits = 0;
    bool seen_point = false;
    for (; pos < s.size() && s[pos] != 'e' && s[pos] != 'E'; ++pos) {
        char c = s[pos];
        if (c == '.' && !seen_point) {
            seen_point = true;
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            digits.push_back(c);
            if (seen_point) ++frac_digits;
        } else {
            throw ConfigError("malformed number '" + s + "'");
        }
    }
    if (digits.empty()) throw ConfigError("malformed number '" + s + "'");
    long exponent = 0;
    if (pos < s.size()) {
        std::string e = s.substr(pos + 1);
        if (e.empty()) throw ConfigError("malformed exponent in '" + s + "'");
        try {
            std::size_t used = 0;
            exponent = std::stol(e, &used);
            if (used != e.size()) throw ConfigError("malformed exponent in '" + s + "'");
        } catch (const std::logic_error&) {
            throw ConfigError("malformed exponent in '" + s + "'");
        }
    }
    exponent -= frac_digits;
    digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));
    Integer mantissa(digits);
    Integer scale = pow(Integer(10), static_cast<unsigned>(std::labs(exponent)));
    Rational value = exponent >= 0 ? Rational(mantissa * scale) : Rational(mantissa, scale);
    return negative ? Rational(-value) : value;
}

std::string to_decimal(const Real& x) {
    if (isinf(x)) return x > 0 ? "inf" : "-inf";
    if (isnan(x)) return "nan";
    return x.str(static_cast<std::streamsize>(digits_for_bits(g_bits)) + 1,
                 std::ios_base::scientific);
}

std::string to_string(const Rational& q) { return q.str(); }

double to_double(const Rational& q) { return Real(q).convert_to<double>(); }

}  // namespace evtlab
