#include "evtlab/tails.hpp"

#include <algorithm>

namespace evtlab {

TailType TailType::gumbel(std::optional<Rational> endpoint) {
    TailType t;
    t.endpoint = std::move(endpoint);
    return t;
}

TailType TailType::frechet(const Rational& alpha) {
    if (alpha <= 0) throw ConfigError("Frechet index must be positive");
    TailType t;
    t.family = Family::Frechet;
    t.index = alpha;
    return t;
}

TailType TailType::weibull(const Rational& alpha, const Rational& endpoint) {
    if (alpha <= 0) throw ConfigError("Weibull index must be positive");
    TailType t;
    t.family = Family::Weibull;
    t.index = alpha;
    t.endpoint = endpoint;
    return t;
}

std::string to_string(TailType::Family f) {
    switch (f) {
        case TailType::Family::Gumbel:
            return "Gumbel";
        case TailType::Family::Frechet:
            return "Frechet";
        case TailType::Family::Weibull:
            return "Weibull";
    }
    return {};
}

std::string TailType::describe() const {
    std::string end = endpoint ? to_string(*endpoint) : "inf";
    if (family == Family::Gumbel) return "Gumbel(endpoint=" + end + ")";
    return to_string(family) + "(alpha=" + to_string(index) + ", endpoint=" + end + ")";
}

TailType classify_shape(const ShapeFn& shape, bool density_positive) {
    if (!density_positive) throw ConfigError("tail classification needs a positive density at the maximum");
    switch (shape.kind) {
        case ShapeFn::Kind::NegLog:
            return TailType::gumbel();
        case ShapeFn::Kind::PowerLaw:
            return TailType::frechet(1 / shape.p);
        case ShapeFn::Kind::BoundedPower:
            return TailType::weibull(1 / shape.g, shape.D);
        case ShapeFn::Kind::Custom:
            break;
    }
    throw ConfigError("unclassifiable shape: " + shape.describe());
}

namespace {

void check_endpoints(const std::vector<TailType>& types) {
    if (types.empty()) throw ConfigError("compete needs at least one tail type");
    for (const auto& t : types) {
        if (t.family == TailType::Family::Frechet && t.endpoint)
            throw ConfigError("Frechet tail with a finite endpoint");
        if (t.family == TailType::Family::Weibull && !t.endpoint)
            throw ConfigError("Weibull tail without a finite endpoint");
        if (t.endpoint != types.front().endpoint)
            throw ConfigError("maxima with different endpoints cannot compete: " + types.front().describe() +
                              " vs " + t.describe());
    }
}

std::optional<TailType> heaviest(const std::vector<TailType>& types, TailType::Family f) {
    std::optional<TailType> best;
    for (const auto& t : types)
        if (t.family == f && (!best || t.index < best->index)) best = t;
    return best;
}

}  // namespace

TailType compete(const std::vector<TailType>& types) {
    check_endpoints(types);
    if (auto f = heaviest(types, TailType::Family::Frechet)) return *f;
    if (auto w = heaviest(types, TailType::Family::Weibull)) return *w;
    return types.front();
}

bool same_family_extension(const std::vector<TailType>& types) {
    TailType winner = compete(types);
    if (winner.family == TailType::Family::Gumbel) return false;
    return std::any_of(types.begin(), types.end(), [&](const TailType& t) {
        return t.family == winner.family && t.index != winner.index;
    });
}

TailType spec_tail_type(const ObservableSpec& spec) {
    std::vector<TailType> types;
    for (const auto& pt : spec.points) {
        TailType t = classify_shape(pt.shape, pt.density > 0);
        types.push_back(t);
    }
    return compete(types);
}

TailCheck numeric_tail_check(const ObservableSpec& spec, const TailType& type,
                             const std::vector<Real>& levels) {
    TailType own = spec_tail_type(spec);
    if (own.endpoint != type.endpoint)
        throw ConfigError("claimed endpoint does not match the observable: " + own.describe());
    if (levels.empty()) throw ConfigError("numeric_tail_check needs probe levels");

    TailCheck out;
    out.type = type;
    const Real alpha = to_real(type.index);
    const Real ys[] = {Real(0.5), Real(2)};
    for (const Real& u : levels) {
        Real base = exceedance_measure(spec, u);
        if (!(base > 0)) throw RegimeError("exceedance measure vanishes at u = " + to_decimal(u));
        Real s = type.endpoint ? to_real(*type.endpoint) - u : Real(0);
        if (type.endpoint && !(s > 0)) throw RegimeError("probe level at or above the endpoint");
        Real ratio_two{0};
        for (const Real& y : ys) {
            Real v, target;
            switch (type.family) {
                case TailType::Family::Frechet:
                    v = y * u;
                    target = pow(y, -alpha);
                    break;
                case TailType::Family::Gumbel:
                    v = u + y;
                    target = exp(-y);
                    break;
                case TailType::Family::Weibull:
                    v = to_real(*type.endpoint) - y * s;
                    target = pow(y, alpha);
                    break;
            }
            Real ratio = exceedance_measure(spec, v) / base;
            Real dev = abs(ratio / target - 1);
            out.max_deviation = max(out.max_deviation, dev);
            out.rows.push_back({u, y, ratio, target, dev});
            if (y == 2) ratio_two = ratio;
        }
        switch (type.family) {
            case TailType::Family::Frechet:
                out.fitted_index.push_back(-log(ratio_two) / log(Real(2)));
                break;
            case TailType::Family::Gumbel:
                out.fitted_index.push_back(-log(ratio_two) / 2);
                break;
            case TailType::Family::Weibull:
                out.fitted_index.push_back(log(ratio_two) / log(Real(2)));
                break;
        }
    }
    return out;
}

}  // namespace evtlab
