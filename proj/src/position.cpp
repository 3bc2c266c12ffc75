#include "evtlab/position.hpp"

#include "evtlab/errors.hpp"

#include <boost/math/constants/constants.hpp>

#include <cctype>

namespace evtlab {

Real Surd::value() const {
    if (b == 0) return Real(a);
    return Real(a) + Real(b) * sqrt(Real(r));
}

std::string Surd::str() const {
    if (b == 0) return a.str();
    std::string out = a == 0 ? "" : a.str() + "+";
    out += "(" + b.str() + ")*sqrt(" + r.str() + ")";
    return out;
}

int compare(const Surd& s, const Rational& c) {
    Rational diff = s.a - c;
    int sa = diff.sign();
    if (s.b == 0) return sa;
    int sb = s.b.sign();
    if (sa == 0 || sa == sb) return sb;
    Rational lhs = diff * diff;
    Rational rhs = s.b * s.b * s.r;
    if (lhs == rhs) return 0;
    return lhs > rhs ? sa : sb;
}

Integer floor_of(const Surd& s) {
    if (s.b == 0) return floor_of(s.a);
    Integer guess;
    {
        PrecisionGuard guard(precision_bits() + 64);
        guess = floor_of(s.value());
    }
    while (compare(s, Rational(guess)) < 0) guess -= 1;
    while (compare(s, Rational(guess + 1)) >= 0) guess += 1;
    return guess;
}

namespace {

// Recursive-descent evaluator producing a surd when the expression stays in Q(sqrt r).
class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Position parse() {
        Value v = expr();
        skip_space();
        if (pos_ != text_.size()) fail("unexpected '" + std::string(text_.substr(pos_)) + "'");
        if (auto* s = std::get_if<Surd>(&v)) return Position(*s);
        return Position(std::get<Real>(v));
    }

private:
    using Value = std::variant<Surd, Real>;

    std::string_view text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& why) const {
        throw ConfigError("cannot parse position '" + std::string(text_) + "': " + why);
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    static Real as_real(const Value& v) {
        if (auto* s = std::get_if<Surd>(&v)) return s->value();
        return std::get<Real>(v);
    }

    static bool compatible(const Surd& x, const Surd& y) {
        return x.b == 0 || y.b == 0 || x.r == y.r;
    }

    static Value add(const Value& x, const Value& y, int sign) {
        auto* sx = std::get_if<Surd>(&x);
        auto* sy = std::get_if<Surd>(&y);
        if (sx && sy && compatible(*sx, *sy)) {
            Surd out{sx->a + sign * sy->a, sx->b + sign * sy->b, sx->b != 0 ? sx->r : sy->r};
            if (out.b == 0) out.r = 0;
            return out;
        }
        return sign > 0 ? Real(as_real(x) + as_real(y)) : Real(as_real(x) - as_real(y));
    }

    static Value mul(const Value& x, const Value& y) {
        auto* sx = std::get_if<Surd>(&x);
        auto* sy = std::get_if<Surd>(&y);
        if (sx && sy && compatible(*sx, *sy)) {
            Rational r = sx->b != 0 ? sx->r : sy->r;
            Surd out{sx->a * sy->a + sx->b * sy->b * r, sx->a * sy->b + sx->b * sy->a, r};
            if (out.b == 0) out.r = 0;
            return out;
        }
        return Real(as_real(x) * as_real(y));
    }

    Value div(const Value& x, const Value& y) const {
        if (auto* sy = std::get_if<Surd>(&y)) {
            Rational norm = sy->a * sy->a - sy->b * sy->b * sy->r;
            if (norm == 0) fail("division by zero");
            Surd inv{sy->a / norm, -sy->b / norm, sy->r};
            if (inv.b == 0) inv.r = 0;
            return mul(x, inv);
        }
        return Real(as_real(x) / std::get<Real>(y));
    }

    Value expr() {
        Value v = term();
        for (;;) {
            if (accept('+')) v = add(v, term(), 1);
            else if (accept('-')) v = add(v, term(), -1);
            else return v;
        }
    }

    Value term() {
        Value v = unary();
        for (;;) {
            if (accept('*')) v = mul(v, unary());
            else if (accept('/')) v = div(v, unary());
            else return v;
        }
    }

    Value unary() {
        if (accept('-')) return mul(Surd{-1, 0, 0}, unary());
        if (accept('+')) return unary();
        return primary();
    }

    Value primary() {
        skip_space();
        if (accept('(')) {
            Value v = expr();
            if (!accept(')')) fail("missing ')'");
            return v;
        }
        if (pos_ < text_.size() &&
            (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
            return number();
        std::string word;
        while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_])))
            word.push_back(text_[pos_++]);
        if (word == "pi") return Real(boost::math::constants::pi<Real>());
        if (word == "e") return Real(exp(Real(1)));
        if (word == "sqrt") {
            if (!accept('(')) fail("expected '(' after sqrt");
            Value arg = expr();
            if (!accept(')')) fail("missing ')'");
            if (auto* s = std::get_if<Surd>(&arg); s && s->b == 0) {
                if (s->a < 0) fail("sqrt of a negative number");
                Integer num = numerator(s->a), den = denominator(s->a);
                Integer rn = sqrt(num), rd = sqrt(den);
                if (rn * rn == num && rd * rd == den) return Surd{Rational(rn, rd), 0, 0};
                return Surd{0, 1, s->a};
            }
            Real x = as_real(arg);
            if (x < 0) fail("sqrt of a negative number");
            return Real(sqrt(x));
        }
        fail(word.empty() ? "expected a number" : "unknown name '" + word + "'");
    }

    Value number() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
            ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t look = pos_ + 1;
            if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
            if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
                pos_ = look;
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    ++pos_;
            }
        }
        return Surd{parse_rational(text_.substr(start, pos_ - start)), 0, 0};
    }
};

}  // namespace

Position Position::parse(std::string_view text) { return Parser(text).parse(); }

std::optional<Rational> Position::rational() const {
    if (auto* s = surd(); s && s->b == 0) return s->a;
    return std::nullopt;
}

Real Position::real() const {
    if (auto* s = surd()) return s->value();
    return Real(std::get<Real>(value_));
}

double Position::to_double() const { return real().convert_to<double>(); }

std::string Position::str() const {
    if (auto* s = surd()) return s->str();
    return to_decimal(std::get<Real>(value_));
}

Position Position::mod1() const {
    if (auto* s = surd()) {
        Integer f = floor_of(*s);
        if (f == 0) return *this;
        Surd out = *s;
        out.a -= Rational(f);
        return Position(out);
    }
    const Real& x = std::get<Real>(value_);
    Real y = x - floor(x);
    if (y >= 1) y -= 1;
    return Position(y);
}

bool operator==(const Position& x, const Position& y) {
    auto* sx = x.surd();
    auto* sy = y.surd();
    if (sx && sy) {
        if (sx->b == 0 || sy->b == 0 || sx->r == sy->r)
            return sx->a == sy->a && sx->b == sy->b;
        return x.real() == y.real();
    }
    return x.real() == y.real();
}

}  // namespace evtlab
