#pragma once

#include "evtlab/interval_algebra.hpp"
#include "evtlab/numeric.hpp"
#include "evtlab/observables.hpp"
#include "evtlab/piecewise_map.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace evtlab {

// Asymptotic decay law of a radius as u -> u_F.
struct ScaleClass {
    enum class Decay { Exp, Poly, Root };
    Decay decay = Decay::Exp;
    Rational exponent{1};  // Exp: rate in e^{-rate u}; Poly: e in u^-e; Root: e in (D-u)^e

    std::string describe() const;
    friend bool operator==(const ScaleClass& a, const ScaleClass& b) {
        return a.decay == b.decay && a.exponent == b.exponent;
    }
};

// Negative when a decays faster than b (a is asymptotically smaller).
int compare_classes(const ScaleClass& a, const ScaleClass& b);

ScaleClass scale_class_of(const ShapeFn& shape);

// c * class(u).
struct ScaledRadius {
    ScaleClass cls;
    Rational constant;
};

enum class RadiusOrder { Smaller, Larger, Indeterminate };
RadiusOrder compare_radii(const ScaledRadius& a, const ScaledRadius& b);

// Finite sum of scale-class terms, e.g. 7/2 u^-2 + 2 e^-u.
class AsymptoticSum {
public:
    void add(const ScaleClass& cls, const Rational& coefficient);
    void add(const AsymptoticSum& other, const Rational& factor = 1);
    bool is_zero() const { return terms_.empty(); }
    std::optional<ScaleClass> dominant() const;
    Rational coefficient(const ScaleClass& cls) const;
    const std::vector<std::pair<ScaleClass, Rational>>& terms() const { return terms_; }
    std::string str() const;

private:
    std::vector<std::pair<ScaleClass, Rational>> terms_;  // sorted, largest class first
};

// lim num/den as u -> u_F.
Rational asymptotic_ratio(const AsymptoticSum& num, const AsymptoticSum& den);

enum class Containment { Inside, Contains, Disjoint, Indeterminate };
std::string to_string(Containment c);

// 1-based indices; for periodic specs j may exceed N (m_{j+N} = m_j + p).
Containment pullback_containment(const ObservableSpec& spec, const PiecewiseMap& map,
                                 std::size_t i, std::size_t j);

struct EIResult {
    Rational theta;
    double theta_float = 0.0;
    std::vector<AsymptoticSum> numerator_terms;    // per point: mu(U(xi_i)) - mu(pullback)
    std::vector<AsymptoticSum> denominator_terms;  // per point: mu(U(xi_i))
    AsymptoticSum numerator;
    AsymptoticSum denominator;
    ScaleClass dominant_class;
    std::vector<std::size_t> index_set;            // I_1 (1-based)
    std::map<std::size_t, std::size_t> successor;  // j_i for i in I_1
    std::vector<std::vector<Containment>> containment;  // row i, column over j = i+1 .. i+N
};

EIResult analytic_theta(const ObservableSpec& spec, const PiecewiseMap& map);

// pi(k) for k in the tail: pi(c*l + s) = coefficient[s] * ratio^l for k >= start.
struct GeometricTail {
    std::size_t start = 1;
    std::size_t period = 1;
    Rational ratio;
    std::vector<Rational> residue_coefficients;  // indexed by s = k mod period
};

struct MultiplicityResult {
    std::vector<Rational> pi;  // pi[k-1] for k = 1..K
    std::optional<GeometricTail> tail;
    std::vector<std::vector<std::size_t>> index_sets;  // I_k, k = 1..K
    std::vector<std::map<std::size_t, std::size_t>> successor_indices;  // j_{i,k}
    std::vector<AsymptoticSum> level_measures;  // mu(A^{(k)}), k = 0..K
    Rational total;  // sum of pi with the tail summed in closed form
    Rational mean;   // sum of k pi(k)
    Rational theta;

    Rational at(std::size_t k) const;  // any k >= 1, using the tail beyond K
};

MultiplicityResult analytic_multiplicity(const ObservableSpec& spec, const PiecewiseMap& map,
                                         std::size_t K);

// Sum of alpha_i theta_i; weights must sum to 1.
Rational theta_mixed_uncorrelated(const std::vector<std::pair<Rational, Rational>>& weights_and_thetas);
double theta_mixed_uncorrelated(const std::vector<std::pair<double, double>>& weights_and_thetas);

// alpha_i = lim mu(U(xi_i)) / mu(U).
std::vector<Rational> asymptotic_weights(const ObservableSpec& spec);

struct QSelection {
    enum class Rationale { NonPeriodic, Periodic, Uncorrelated };
    std::uint64_t q = 0;
    Rationale rationale = Rationale::NonPeriodic;
    struct Level {
        Real u;
        Real measure;
        std::vector<std::optional<std::uint64_t>> return_times;  // R(A_j), j = 0..q; empty A_j -> none
    };
    std::vector<Level> levels;
    bool increasing = false;  // R(A_q) strictly increasing across levels
};

std::uint64_t default_q(const ObservableSpec& spec);
std::string to_string(QSelection::Rationale r);

// Levels are given as target exceedance measures (default 1e-2, 1e-4, 1e-6).
QSelection select_q(const ObservableSpec& spec, const PiecewiseMap& map,
                    std::vector<Real> measures = {});

// Smallest r >= 1 with f^r(A) meeting A in positive measure.
std::uint64_t first_return_time(const ArcSet& a, const PiecewiseMap& map,
                                std::uint64_t max_steps = 10'000);

// A_q(S) = S minus the union of f^-i(S), i = 1..q.
ArcSet escape_set(const ArcSet& s, const PiecewiseMap& map, std::uint64_t q);

struct FiniteNTable {
    Real u;
    std::uint64_t q = 0;
    Real measure_u;
    std::vector<Real> measure_a;  // mu(A^{(kappa)}), kappa = 0..K
    Real theta_n;
    std::vector<Real> pi_n;  // cluster size k = 1..K
};

FiniteNTable finite_n_sets(const ObservableSpec& spec, const PiecewiseMap& map, const Real& u,
                           std::uint64_t q, std::size_t K);

}  // namespace evtlab
