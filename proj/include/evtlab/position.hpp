#pragma once

#include "evtlab/numeric.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace evtlab {

// Exact quadratic surd a + b*sqrt(r); b == 0 means the value is the rational a.
struct Surd {
    Rational a{0};
    Rational b{0};
    Rational r{0};

    bool is_rational() const { return b == 0; }
    Real value() const;
    std::string str() const;
};

// Sign of s - c, decided exactly.
int compare(const Surd& s, const Rational& c);
Integer floor_of(const Surd& s);

// A point of the circle or interval: exact surd when possible, otherwise a Real.
class Position {
public:
    Position() : value_(Surd{}) {}
    Position(const Rational& q) : value_(Surd{q, 0, 0}) {}
    Position(const Surd& s) : value_(s) {}
    Position(const Real& x) : value_(x) {}

    // Grammar: expressions over decimal/rational numbers, sqrt(), pi, e with + - * / and
    // parentheses, e.g. "sqrt(2)/16", "1/31", "0.75", "1/pi".
    static Position parse(std::string_view text);

    bool exact() const { return std::holds_alternative<Surd>(value_); }
    const Surd* surd() const { return std::get_if<Surd>(&value_); }
    std::optional<Rational> rational() const;
    Real real() const;
    double to_double() const;
    std::string str() const;

    // Reduction into [0, 1).
    Position mod1() const;

    friend bool operator==(const Position& x, const Position& y);

private:
    std::variant<Surd, Real> value_;
};

}  // namespace evtlab
