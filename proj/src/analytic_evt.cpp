#include "evtlab/analytic_evt.hpp"

#include "evtlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace evtlab {

std::string ScaleClass::describe() const {
    switch (decay) {
        case Decay::Exp:
            return exponent == 1 ? "e^-u" : "e^-(" + exponent.str() + ")u";
        case Decay::Poly:
            return "u^-(" + exponent.str() + ")";
        case Decay::Root:
            return "(D-u)^(" + exponent.str() + ")";
    }
    return {};
}

int compare_classes(const ScaleClass& a, const ScaleClass& b) {
    using D = ScaleClass::Decay;
    if ((a.decay == D::Root) != (b.decay == D::Root))
        throw ConfigError("bounded (type 3) radii cannot be compared with unbounded ones");
    if (a.decay != b.decay) return a.decay == D::Exp ? -1 : 1;
    if (a.exponent == b.exponent) return 0;
    return a.exponent > b.exponent ? -1 : 1;
}

ScaleClass scale_class_of(const ShapeFn& shape) {
    switch (shape.kind) {
        case ShapeFn::Kind::NegLog:
            return {ScaleClass::Decay::Exp, 1};
        case ShapeFn::Kind::PowerLaw:
            return {ScaleClass::Decay::Poly, 1 / shape.p};
        case ShapeFn::Kind::BoundedPower:
            return {ScaleClass::Decay::Root, 1 / shape.g};
        case ShapeFn::Kind::Custom:
            break;
    }
    throw ConfigError("custom shapes have no closed-form scale class");
}

RadiusOrder compare_radii(const ScaledRadius& a, const ScaledRadius& b) {
    int c = compare_classes(a.cls, b.cls);
    if (c == 0) {
        if (a.constant == b.constant) return RadiusOrder::Indeterminate;
        c = a.constant < b.constant ? -1 : 1;
    }
    return c < 0 ? RadiusOrder::Smaller : RadiusOrder::Larger;
}

void AsymptoticSum::add(const ScaleClass& cls, const Rational& coefficient) {
    if (coefficient == 0) return;
    for (auto it = terms_.begin(); it != terms_.end(); ++it) {
        int c = compare_classes(cls, it->first);
        if (c == 0) {
            it->second += coefficient;
            if (it->second == 0) terms_.erase(it);
            return;
        }
        if (c > 0) {
            terms_.insert(it, {cls, coefficient});
            return;
        }
    }
    terms_.push_back({cls, coefficient});
}

void AsymptoticSum::add(const AsymptoticSum& other, const Rational& factor) {
    for (const auto& [cls, c] : other.terms_) add(cls, c * factor);
}

std::optional<ScaleClass> AsymptoticSum::dominant() const {
    if (terms_.empty()) return std::nullopt;
    return terms_.front().first;
}

Rational AsymptoticSum::coefficient(const ScaleClass& cls) const {
    for (const auto& [c, coef] : terms_)
        if (compare_classes(c, cls) == 0) return coef;
    return 0;
}

std::string AsymptoticSum::str() const {
    if (terms_.empty()) return "0";
    std::string out;
    for (const auto& [cls, coef] : terms_) {
        if (!out.empty()) out += coef < 0 ? " - " : " + ";
        else if (coef < 0) out += "-";
        out += "(" + Rational(abs(coef)).str() + ") " + cls.describe();
    }
    return out;
}

Rational asymptotic_ratio(const AsymptoticSum& num, const AsymptoticSum& den) {
    auto d = den.dominant();
    if (!d) throw RegimeError("limit of a ratio with vanishing denominator");
    if (auto n = num.dominant(); n && compare_classes(*n, *d) > 0)
        throw RegimeError("ratio diverges: numerator decays slower than denominator");
    return num.coefficient(*d) / den.coefficient(*d);
}

std::string to_string(Containment c) {
    switch (c) {
        case Containment::Inside:
            return "inside";
        case Containment::Contains:
            return "contains";
        case Containment::Disjoint:
            return "disjoint";
        case Containment::Indeterminate:
            return "indeterminate";
    }
    return {};
}

namespace {

struct Successor {
    std::size_t label;  // 1-based extended index
    ScaledRadius radius;
};

// Per-spec data shared by the closed-form computations.
class Engine {
public:
    Engine(const ObservableSpec& spec, const PiecewiseMap& map) : spec_(spec), map_(map) {
        if (!map.is_affine())
            throw ConfigError("closed forms need a piecewise-affine map; use the oracle instead");
        n_ = spec.points.size();
        for (const auto& pt : spec.points) cls_.push_back(scale_class_of(pt.shape));
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) compare_classes(cls_[i], cls_[j]);
        bounded_endpoint_check();
        if (spec.correlated && spec.period) lambda_p_ = lambda(0, *spec.period);
    }

    std::size_t size() const { return n_; }
    const ScaleClass& cls(std::size_t i) const { return cls_[i]; }
    ScaledRadius own(std::size_t i) const { return {cls_[i], 1}; }
    Rational ball_factor(std::size_t i) const { return 2 * spec_.points[i].density; }

    // Largest `count` pulled-back radii of successors of point i (0-based), sorted descending.
    std::vector<Successor> successors(std::size_t i, std::size_t count) {
        std::vector<Successor> base;
        Rational shrink = 0;  // factor between consecutive copies; 0 if no repetition
        const std::size_t label_i = i + 1;
        if (spec_.correlated && !spec_.period) {
            for (std::size_t j = i + 1; j < n_; ++j)
                base.push_back({j + 1, {cls_[j], 1 / lambda(i, spec_.points[j].m - spec_.points[i].m)}});
        } else if (spec_.correlated) {
            for (std::size_t t = 1; t <= n_; ++t) {
                std::size_t label = label_i + t;
                base.push_back({label, radius_for_label(i, label)});
            }
            shrink = 1 / lambda_p_;
        } else if (auto p = spec_.points[i].period) {
            Rational lam = lambda(i, *p);
            base.push_back({label_i + n_, {cls_[i], 1 / lam}});
            shrink = 1 / lam;
        }
        auto by_size = [](const Successor& a, const Successor& b) {
            int c = compare_classes(a.radius.cls, b.radius.cls);
            if (c != 0) return c > 0;
            if (a.radius.constant != b.radius.constant) return a.radius.constant > b.radius.constant;
            return a.label < b.label;
        };
        std::vector<Successor> all = base;
        if (shrink != 0 && !base.empty()) {
            if (shrink >= 1) throw ConfigError("periodic point is not repelling; no geometric tail");
            ScaleClass top = base.front().radius.cls;
            for (const auto& s : base)
                if (compare_classes(s.radius.cls, top) > 0) top = s.radius.cls;
            Rational top_const = 0;
            for (const auto& s : base)
                if (s.radius.cls == top && s.radius.constant > top_const) top_const = s.radius.constant;
            std::vector<Successor> layer = base;
            Rational bound = top_const;
            for (;;) {
                for (auto& s : layer) {
                    s.label += n_;
                    s.radius.constant *= shrink;
                }
                bound *= shrink;
                all.insert(all.end(), layer.begin(), layer.end());
                std::sort(all.begin(), all.end(), by_size);
                if (all.size() >= count) {
                    const auto& kth = all[count - 1];
                    if (kth.radius.cls == top && kth.radius.constant > bound) break;
                }
            }
        }
        std::sort(all.begin(), all.end(), by_size);
        if (all.size() > count) all.resize(count);
        return all;
    }

    ScaledRadius radius_for_label(std::size_t i, std::size_t label) {
        const std::size_t j = (label - 1) % n_;
        const std::uint64_t wraps = (label - 1) / n_;
        std::uint64_t lag = spec_.points[j].m + wraps * *spec_.period - spec_.points[i].m;
        return {cls_[j], 1 / lambda(i, lag)};
    }

    Rational lambda(std::size_t i, std::uint64_t lag) {
        if (map_.kind() == PiecewiseMap::Kind::AffineMod1) {
            Rational slope = abs(map_.slope_of(0));
            Rational out = 1;
            for (std::uint64_t t = 0; t < lag; ++t) out *= slope;
            return out;
        }
        auto d = derivative_product(map_, spec_.points[i].xi, lag);
        if (!d.exact) throw ConfigError("closed forms need exact (rational or surd) positions");
        return *d.exact;
    }

private:
    void bounded_endpoint_check() const {
        std::optional<Rational> endpoint;
        for (const auto& pt : spec_.points) {
            if (pt.shape.kind != ShapeFn::Kind::BoundedPower) continue;
            if (endpoint && *endpoint != pt.shape.D)
                throw ConfigError("bounded shapes with different endpoints have no common limit");
            endpoint = pt.shape.D;
        }
    }

    const ObservableSpec& spec_;
    const PiecewiseMap& map_;
    std::size_t n_ = 0;
    std::vector<ScaleClass> cls_;
    Rational lambda_p_ = 0;
};

// R_i^{(kappa)}: radius left in ball i after removing points with at least kappa further hits.
struct LevelRadius {
    std::optional<ScaledRadius> radius;  // none means zero
    bool inside = false;                 // strictly inside ball i
};

LevelRadius level_radius(const Engine& engine, std::size_t i, const std::vector<Successor>& succ,
                         std::size_t kappa) {
    ScaledRadius own = engine.own(i);
    if (kappa == 0) return {own, false};
    if (kappa > succ.size()) return {std::nullopt, false};
    const Successor& s = succ[kappa - 1];
    switch (compare_radii(s.radius, own)) {
        case RadiusOrder::Larger:
            return {own, false};
        case RadiusOrder::Smaller:
            return {s.radius, true};
        case RadiusOrder::Indeterminate:
            break;
    }
    std::ostringstream msg;
    msg << "R3 unverifiable: pulled-back ball of successor " << s.label << " and the ball of point "
        << i + 1 << " share scale class " << s.radius.cls.describe() << " and constant "
        << s.radius.constant.str();
    throw IndeterminateError(msg.str());
}

struct Levels {
    std::vector<AsymptoticSum> a;  // mu(A^{(kappa)}), kappa = 0..K
    AsymptoticSum u;
    std::vector<std::vector<std::size_t>> index_sets;
    std::vector<std::map<std::size_t, std::size_t>> successor_indices;
    std::vector<AsymptoticSum> numerator_terms;
    std::vector<AsymptoticSum> denominator_terms;
};

Levels compute_levels(Engine& engine, std::size_t K) {
    const std::size_t n = engine.size();
    Levels out;
    out.a.resize(K + 1);
    out.index_sets.resize(K);
    out.successor_indices.resize(K);
    for (std::size_t i = 0; i < n; ++i) {
        auto succ = engine.successors(i, K + 1);
        Rational factor = engine.ball_factor(i);
        out.u.add(engine.cls(i), factor);
        AsymptoticSum den;
        den.add(engine.cls(i), factor);
        out.denominator_terms.push_back(den);
        std::vector<LevelRadius> r;
        for (std::size_t kappa = 0; kappa <= K + 1; ++kappa) r.push_back(level_radius(engine, i, succ, kappa));
        for (std::size_t kappa = 0; kappa <= K; ++kappa) {
            AsymptoticSum piece;
            if (r[kappa].radius) piece.add(r[kappa].radius->cls, factor * r[kappa].radius->constant);
            if (r[kappa + 1].radius)
                piece.add(r[kappa + 1].radius->cls, -factor * r[kappa + 1].radius->constant);
            out.a[kappa].add(piece);
            if (kappa == 0) out.numerator_terms.push_back(piece);
        }
        for (std::size_t k = 1; k <= K; ++k) {
            if (r[k].inside) {
                out.index_sets[k - 1].push_back(i + 1);
                out.successor_indices[k - 1][i + 1] = succ[k - 1].label;
            }
        }
    }
    return out;
}

}  // namespace

Containment pullback_containment(const ObservableSpec& spec, const PiecewiseMap& map,
                                 std::size_t i, std::size_t j) {
    Engine engine(spec, map);
    const std::size_t n = engine.size();
    if (i < 1 || i > n || j <= i) throw ConfigError("pullback_containment needs 1 <= i < j");
    std::size_t i0 = i - 1;
    ScaledRadius pulled;
    if (spec.correlated && !spec.period) {
        if (j > n) throw ConfigError("successor index beyond the point list of a non-periodic spec");
        pulled = {engine.cls(j - 1), 1 / engine.lambda(i0, spec.points[j - 1].m - spec.points[i0].m)};
    } else if (spec.correlated) {
        pulled = engine.radius_for_label(i0, j);
    } else {
        auto p = spec.points[i0].period;
        if ((j - i) % n != 0 || !p) return Containment::Disjoint;
        Rational lam = 1;
        Rational step = engine.lambda(i0, *p);
        for (std::size_t l = 0; l < (j - i) / n; ++l) lam *= step;
        pulled = {engine.cls(i0), 1 / lam};
    }
    switch (compare_radii(pulled, engine.own(i0))) {
        case RadiusOrder::Smaller:
            return Containment::Inside;
        case RadiusOrder::Larger:
            return Containment::Contains;
        case RadiusOrder::Indeterminate:
            return Containment::Indeterminate;
    }
    return Containment::Indeterminate;
}

EIResult analytic_theta(const ObservableSpec& spec, const PiecewiseMap& map) {
    Engine engine(spec, map);
    Levels lv = compute_levels(engine, 1);
    EIResult out;
    out.numerator = lv.a[0];
    out.denominator = lv.u;
    out.numerator_terms = lv.numerator_terms;
    out.denominator_terms = lv.denominator_terms;
    out.dominant_class = *lv.u.dominant();
    out.theta = asymptotic_ratio(lv.a[0], lv.u);
    out.theta_float = to_double(out.theta);
    out.index_set = lv.index_sets[0];
    out.successor = lv.successor_indices[0];
    const std::size_t n = engine.size();
    for (std::size_t i = 1; i <= n; ++i) {
        std::vector<Containment> row;
        std::size_t last = spec.correlated && !spec.period ? n : i + n;
        for (std::size_t j = i + 1; j <= last; ++j) row.push_back(pullback_containment(spec, map, i, j));
        out.containment.push_back(row);
    }
    return out;
}

Rational MultiplicityResult::at(std::size_t k) const {
    if (k == 0) throw ConfigError("cluster sizes start at 1");
    if (k <= pi.size()) return pi[k - 1];
    if (!tail) return 0;
    const std::size_t c = tail->period;
    Rational r = 1;
    for (std::size_t l = 0; l < k / c; ++l) r *= tail->ratio;
    return tail->residue_coefficients[k % c] * r;
}

MultiplicityResult analytic_multiplicity(const ObservableSpec& spec, const PiecewiseMap& map,
                                         std::size_t K) {
    if (K < 1) throw ConfigError("cutoff K must be at least 1");
    Engine engine(spec, map);
    const std::size_t n = engine.size();
    const bool repeating = (spec.correlated && spec.period) ||
                           (!spec.correlated && std::any_of(spec.points.begin(), spec.points.end(),
                                                            [](const MaximalPoint& p) { return p.period.has_value(); }));
    const std::size_t window = 6;
    const std::size_t K_int = repeating ? std::max(K, std::size_t(8)) + 2 * n + 2 * window : K;
    Levels lv = compute_levels(engine, K_int);

    MultiplicityResult out;
    out.theta = asymptotic_ratio(lv.a[0], lv.u);
    if (lv.a[0].is_zero()) throw RegimeError("theta = 0: the multiplicity distribution is undefined");
    std::vector<Rational> pi;
    for (std::size_t k = 1; k <= K_int; ++k) {
        AsymptoticSum diff = lv.a[k - 1];
        diff.add(lv.a[k], -1);
        pi.push_back(asymptotic_ratio(diff, lv.a[0]));
    }

    if (repeating) {
        // Period c and shift s of the successor recursion j_{i,k+c} = j_{i,k} + s N.
        std::vector<std::size_t> active;
        for (std::size_t i = 1; i <= n; ++i) {
            bool always = true;
            for (std::size_t k = K_int - 2 * n - window; k <= K_int; ++k)
                always = always && lv.successor_indices[k - 1].count(i);
            if (always) active.push_back(i);
        }
        std::optional<std::pair<std::size_t, std::size_t>> pattern;
        for (std::size_t c = 1; c <= 2 * n && !pattern && !active.empty(); ++c) {
            std::optional<std::size_t> shift;
            bool ok = true;
            for (std::size_t i : active) {
                for (std::size_t k = K_int - c - window + 1; k <= K_int - c && ok; ++k) {
                    std::size_t a = lv.successor_indices[k - 1].at(i);
                    std::size_t b = lv.successor_indices[k + c - 1].at(i);
                    if (b <= a || (b - a) % n != 0) ok = false;
                    else if (!shift) shift = (b - a) / n;
                    else if (*shift != (b - a) / n) ok = false;
                }
            }
            if (ok && shift) pattern = {c, *shift};
        }
        if (pattern) {
            auto [c, shift] = *pattern;
            Rational ratio = 1;
            // One period of the base orbit scales every pulled-back radius by the multiplier.
            Rational per_period;
            if (spec.correlated) {
                per_period = 1 / engine.lambda(0, *spec.period);
            } else {
                std::size_t i0 = active.front() - 1;
                per_period = 1 / engine.lambda(i0, *spec.points[i0].period);
            }
            for (std::size_t s = 0; s < shift; ++s) ratio *= per_period;
            std::size_t start = K_int - c;
            while (start > 1 && pi[start - 1 + c - 1] == ratio * pi[start - 1 - 1]) --start;
            bool verified = true;
            for (std::size_t k = start; k + c <= K_int; ++k)
                verified = verified && pi[k + c - 1] == ratio * pi[k - 1];
            if (verified) {
                GeometricTail tail;
                tail.start = start;
                tail.period = c;
                tail.ratio = ratio;
                tail.residue_coefficients.assign(c, 0);
                for (std::size_t k = start; k < start + c; ++k) {
                    Rational scale = 1;
                    for (std::size_t l = 0; l < k / c; ++l) scale *= ratio;
                    tail.residue_coefficients[k % c] = pi[k - 1] / scale;
                }
                out.tail = tail;
            }
        }
    }

    out.total = 0;
    out.mean = 0;
    if (out.tail) {
        const auto& t = *out.tail;
        const Rational one_minus = 1 - t.ratio;
        for (std::size_t k = 1; k < t.start; ++k) {
            out.total += pi[k - 1];
            out.mean += Rational(k) * pi[k - 1];
        }
        for (std::size_t k = t.start; k < t.start + t.period; ++k) {
            out.total += pi[k - 1] / one_minus;
            out.mean += pi[k - 1] * (Rational(k) / one_minus +
                                     Rational(t.period) * t.ratio / (one_minus * one_minus));
        }
    } else {
        for (std::size_t k = 1; k <= K_int; ++k) {
            out.total += pi[k - 1];
            out.mean += Rational(k) * pi[k - 1];
        }
    }

    pi.resize(K);
    out.pi = pi;
    lv.index_sets.resize(K);
    lv.successor_indices.resize(K);
    out.index_sets = lv.index_sets;
    out.successor_indices = lv.successor_indices;
    lv.a.resize(K + 1);
    out.level_measures = lv.a;
    return out;
}

Rational theta_mixed_uncorrelated(const std::vector<std::pair<Rational, Rational>>& weights_and_thetas) {
    Rational total_weight = 0, theta = 0;
    for (const auto& [alpha, th] : weights_and_thetas) {
        if (alpha < 0 || th < 0 || th > 1) throw ConfigError("weights must be >= 0 and thetas in [0, 1]");
        total_weight += alpha;
        theta += alpha * th;
    }
    if (total_weight != 1) throw ConfigError("weights must sum to 1, got " + total_weight.str());
    return theta;
}

double theta_mixed_uncorrelated(const std::vector<std::pair<double, double>>& weights_and_thetas) {
    double total_weight = 0, theta = 0;
    for (const auto& [alpha, th] : weights_and_thetas) {
        if (alpha < 0 || th < 0 || th > 1) throw ConfigError("weights must be >= 0 and thetas in [0, 1]");
        total_weight += alpha;
        theta += alpha * th;
    }
    if (std::abs(total_weight - 1) > 1e-12)
        throw ConfigError("weights must sum to 1 within 1e-12");
    return theta;
}

std::vector<Rational> asymptotic_weights(const ObservableSpec& spec) {
    AsymptoticSum total;
    std::vector<ScaleClass> cls;
    for (const auto& pt : spec.points) {
        cls.push_back(scale_class_of(pt.shape));
        total.add(cls.back(), 2 * pt.density);
    }
    ScaleClass dom = *total.dominant();
    std::vector<Rational> out;
    for (std::size_t i = 0; i < spec.points.size(); ++i)
        out.push_back(compare_classes(cls[i], dom) == 0 ? Rational(2 * spec.points[i].density / total.coefficient(dom))
                                                        : Rational(0));
    return out;
}

std::uint64_t default_q(const ObservableSpec& spec) {
    if (spec.correlated) {
        if (spec.period) return *spec.period;
        return spec.points.back().m - spec.points.front().m;
    }
    std::uint64_t q = 0;
    for (const auto& pt : spec.points)
        if (pt.period) q = std::max(q, *pt.period);
    return q;
}

std::string to_string(QSelection::Rationale r) {
    switch (r) {
        case QSelection::Rationale::NonPeriodic:
            return "non-periodic: q = m_N - m_1";
        case QSelection::Rationale::Periodic:
            return "periodic: q = p";
        case QSelection::Rationale::Uncorrelated:
            return "uncorrelated: q = max period (0 if none)";
    }
    return {};
}

std::uint64_t first_return_time(const ArcSet& a, const PiecewiseMap& map, std::uint64_t max_steps) {
    if (a.empty()) throw ConfigError("first return time of an empty set");
    ArcSet b = a;
    for (std::uint64_t r = 1; r <= max_steps; ++r) {
        b = image(b, map);
        if (!set_intersect(b, a).empty()) return r;
    }
    throw ResourceError("no return within " + std::to_string(max_steps) + " steps");
}

ArcSet escape_set(const ArcSet& s, const PiecewiseMap& map, std::uint64_t q) {
    ArcSet layer = s;
    ArcSet hits;
    for (std::uint64_t i = 1; i <= q; ++i) {
        layer = preimage(layer, map);
        hits = set_union(hits, layer);
    }
    return set_difference(s, hits);
}

namespace {

// Bits needed to resolve the smallest exceedance ball and its q-fold preimages.
int oracle_bits(const ObservableSpec& spec, const PiecewiseMap& map, const Real& u, std::uint64_t q) {
    Real smallest = 1;
    for (const auto& pt : spec.points) {
        Real eps = pt.shape.radius(u);
        if (eps > 0 && eps < smallest) smallest = eps;
    }
    double depth = -log2(smallest).convert_to<double>();
    double expansion = static_cast<double>(q) * std::log2(static_cast<double>(map.degree()) + 1.0);
    return precision_bits() + static_cast<int>(std::ceil(depth + expansion)) + 32;
}

}  // namespace

QSelection select_q(const ObservableSpec& spec, const PiecewiseMap& map, std::vector<Real> measures) {
    QSelection out;
    out.q = default_q(spec);
    out.rationale = spec.correlated ? (spec.period ? QSelection::Rationale::Periodic
                                                   : QSelection::Rationale::NonPeriodic)
                                    : QSelection::Rationale::Uncorrelated;
    if (measures.empty()) measures = {Real("1e-2"), Real("1e-4"), Real("1e-6")};
    Real widest = exceedance_measure(spec, regime_floor(spec));
    if (measures.front() > widest / 2) {
        Real scale = widest / 2 / measures.front();
        for (auto& m : measures) m *= scale;
    }
    for (const Real& m : measures) {
        QSelection::Level level;
        level.measure = m;
        level.u = solve_threshold(spec, 1 / m, Real(1));
        PrecisionGuard guard(oracle_bits(spec, map, level.u, out.q));
        Real u = level.u;
        ArcSet region = exceedance_region(spec, u);
        ArcSet layer = region;
        ArcSet hits;
        for (std::uint64_t j = 0; j <= out.q; ++j) {
            if (j > 0) {
                layer = preimage(layer, map);
                hits = set_union(hits, layer);
            }
            ArcSet a = set_difference(region, hits);
            if (a.empty()) level.return_times.push_back(std::nullopt);
            else level.return_times.push_back(first_return_time(a, map));
        }
        out.levels.push_back(std::move(level));
    }
    out.increasing = true;
    for (std::size_t l = 1; l < out.levels.size(); ++l) {
        const auto& prev = out.levels[l - 1].return_times.back();
        const auto& cur = out.levels[l].return_times.back();
        if (!prev || !cur || !(*cur > *prev)) out.increasing = false;
    }
    return out;
}

FiniteNTable finite_n_sets(const ObservableSpec& spec, const PiecewiseMap& map, const Real& u,
                           std::uint64_t q, std::size_t K) {
    FiniteNTable out;
    out.u = u;
    out.q = q;
    std::uint64_t arcs_estimate = spec.points.size();
    for (std::uint64_t i = 0; i < q && arcs_estimate <= arc_budget(); ++i)
        arcs_estimate *= static_cast<std::uint64_t>(std::max(map.degree(), 1)) + 1;
    if (arcs_estimate > arc_budget())
        throw ResourceError("q-fold preimages would exceed the arc budget");
    PrecisionGuard guard(oracle_bits(spec, map, u, q));
    ArcSet level = exceedance_region(spec, u);
    out.measure_u = level.measure();
    if (out.measure_u >= 1) throw RegimeError("exceedance region covers the whole space");
    for (std::size_t kappa = 0; kappa <= K; ++kappa) {
        ArcSet a = escape_set(level, map, q);
        out.measure_a.push_back(a.measure());
        level = set_difference(level, a);
    }
    out.theta_n = out.measure_a[0] / out.measure_u;
    for (std::size_t k = 1; k <= K; ++k)
        out.pi_n.push_back(out.measure_a[0] > 0 ? Real((out.measure_a[k - 1] - out.measure_a[k]) / out.measure_a[0])
                                                 : Real(0));
    return out;
}

}  // namespace evtlab
