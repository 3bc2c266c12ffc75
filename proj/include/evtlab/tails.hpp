#pragma once

#include "evtlab/numeric.hpp"
#include "evtlab/observables.hpp"

#include <optional>
#include <string>
#include <vector>

namespace evtlab {

struct TailType {
    enum class Family { Gumbel, Frechet, Weibull };

    Family family = Family::Gumbel;
    Rational index{0};                 // alpha for Frechet and Weibull
    std::optional<Rational> endpoint;  // empty: +infinity

    static TailType gumbel(std::optional<Rational> endpoint = std::nullopt);
    static TailType frechet(const Rational& alpha);
    static TailType weibull(const Rational& alpha, const Rational& endpoint);

    std::string describe() const;
    bool operator==(const TailType& other) const = default;
};

std::string to_string(TailType::Family f);

TailType classify_shape(const ShapeFn& shape, bool density_positive = true);

// Winner of a competition between maxima with a common endpoint.
TailType compete(const std::vector<TailType>& types);
// True when the winner had to be chosen among several indices of the same family.
bool same_family_extension(const std::vector<TailType>& types);

struct TailCheckRow {
    Real u;
    Real y;
    Real ratio;
    Real target;
    Real deviation;
};

struct TailCheck {
    TailType type;
    std::vector<TailCheckRow> rows;
    Real max_deviation{0};
    std::vector<Real> fitted_index;  // one per probe level
};

// Compares tail ratios of the exceedance measure with the law of the given type at y in {1/2, 2}.
// Frechet: Fbar(y u) / Fbar(u) vs y^-alpha. Gumbel: Fbar(u + y) / Fbar(u) vs e^-y.
// Weibull: Fbar(D - y s) / Fbar(D - s) vs y^alpha with s = D - u.
TailCheck numeric_tail_check(const ObservableSpec& spec, const TailType& type,
                             const std::vector<Real>& levels);

// Classifies every point and returns the competition winner.
TailType spec_tail_type(const ObservableSpec& spec);

}  // namespace evtlab
