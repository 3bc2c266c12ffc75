#pragma once

#include "evtlab/numeric.hpp"
#include "evtlab/position.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace evtlab {

// x -> slope*x + offset (reduced mod 1 for circle maps).
struct AffineLaw {
    Rational slope;
    Rational offset;
};

// Left branch of the LSV family: x -> x(1 + (2x)^alpha) on [0, 1/2).
struct LsvLaw {
    Rational alpha;
};

struct Branch {
    Rational lo;
    Rational hi;
    std::variant<AffineLaw, LsvLaw> law;
};

class PiecewiseMap {
public:
    enum class Kind { AffineMod1, PiecewiseAffine, Lsv };

    static PiecewiseMap affine_mod1(const Rational& slope, const Rational& offset = 0);
    static PiecewiseMap piecewise_affine(std::vector<Branch> branches);
    static PiecewiseMap lsv(const Rational& alpha);

    Kind kind() const { return kind_; }
    const std::vector<Branch>& branches() const { return branches_; }
    // Circle maps use circle distance; the LSV family lives on the interval [0, 1].
    bool on_circle() const { return kind_ != Kind::Lsv; }
    bool is_affine() const { return kind_ != Kind::Lsv; }
    bool is_continuous() const { return continuous_; }
    int degree() const { return degree_; }
    // k when the map is x -> kx mod 1 with integer k >= 2.
    std::optional<int> integer_slope() const;
    std::string describe() const;

    std::size_t branch_index(const Real& x) const;
    std::size_t branch_index(double x) const;
    std::size_t branch_index(const Surd& x) const;

    Real apply(const Real& x) const;
    double apply(double x) const;
    Position apply(const Position& x) const;

    // |f'(x)| on the branch containing x.
    Real derivative(const Real& x) const;
    // Exact slope of an affine branch.
    const Rational& slope_of(std::size_t branch) const;

    // Evaluates a branch law on x without reduction mod 1.
    Real branch_value(std::size_t branch, const Real& x) const;
    // Inverse of a branch law on its image (before reduction mod 1).
    Real branch_inverse(std::size_t branch, const Real& y) const;

private:
    PiecewiseMap(Kind kind, std::vector<Branch> branches);

    Kind kind_;
    std::vector<Branch> branches_;
    std::vector<double> lo_double_;
    double alpha_double_ = 0.0;
    bool continuous_ = true;
    int degree_ = 0;
};

}  // namespace evtlab
