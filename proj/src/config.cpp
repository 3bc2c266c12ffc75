#include "evtlab/config.hpp"

#include "toml.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace evtlab {

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

namespace {

void allow_keys(const toml::table& t, const std::string& where, std::set<std::string> keys) {
    for (const auto& [k, v] : t)
        if (!keys.count(std::string(k.str())))
            throw ConfigError("unknown key '" + std::string(k.str()) + "' in " + where);
}

std::string where_of(const std::string& table, const std::string& key) {
    return table.empty() ? key : table + "." + key;
}

// Exact fields accept strings ("1/3", "sqrt(2)/16") and integers; floats would drift.
std::string exact_text(const toml::node& n, const std::string& where) {
    if (auto s = n.value<std::string>()) return *s;
    if (n.is_integer()) return std::to_string(*n.value<std::int64_t>());
    throw ConfigError(where + " must be a string or an integer");
}

std::string real_text(const toml::node& n, const std::string& where) {
    if (n.is_floating_point()) {
        double d = *n.value<double>();
        char buf[64];
        auto r = std::to_chars(buf, buf + sizeof buf, d);
        return std::string(buf, r.ptr);
    }
    return exact_text(n, where);
}

Rational get_rational(const toml::node& n, const std::string& where) {
    try {
        return parse_rational(exact_text(n, where));
    } catch (const ConfigError& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

Real get_real(const toml::node& n, const std::string& where) {
    std::string text = real_text(n, where);
    try {
        return Position::parse(text).real();
    } catch (const ConfigError& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

Position get_position(const toml::node& n, const std::string& where) {
    try {
        return Position::parse(exact_text(n, where));
    } catch (const ConfigError& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

std::uint64_t get_count(const toml::node& n, const std::string& where) {
    auto v = n.value<std::int64_t>();
    if (!n.is_integer() || !v || *v < 0) throw ConfigError(where + " must be a non-negative integer");
    return static_cast<std::uint64_t>(*v);
}

bool get_bool(const toml::node& n, const std::string& where) {
    if (!n.is_boolean()) throw ConfigError(where + " must be a boolean");
    return *n.value<bool>();
}

std::string get_string(const toml::node& n, const std::string& where) {
    auto s = n.value<std::string>();
    if (!n.is_string()) throw ConfigError(where + " must be a string");
    return *s;
}

const toml::table& table_at(const toml::table& root, const std::string& key) {
    const toml::node* n = root.get(key);
    if (!n || !n->is_table()) throw ConfigError("missing table [" + key + "]");
    return *n->as_table();
}

std::vector<Real> real_list(const toml::node& n, const std::string& where) {
    const toml::array* arr = n.as_array();
    if (!arr) throw ConfigError(where + " must be an array");
    std::vector<Real> out;
    for (std::size_t i = 0; i < arr->size(); ++i)
        out.push_back(get_real(*arr->get(i), where + "[" + std::to_string(i) + "]"));
    return out;
}

PiecewiseMap parse_map(const toml::table& t) {
    if (!t.get("kind")) throw ConfigError("map.kind is required");
    std::string kind = get_string(*t.get("kind"), "map.kind");
    if (kind == "affine_mod1") {
        allow_keys(t, "[map]", {"kind", "slope", "offset"});
        if (!t.get("slope")) throw ConfigError("map.slope is required");
        Rational offset = t.get("offset") ? get_rational(*t.get("offset"), "map.offset") : Rational(0);
        return PiecewiseMap::affine_mod1(get_rational(*t.get("slope"), "map.slope"), offset);
    }
    if (kind == "lsv") {
        allow_keys(t, "[map]", {"kind", "alpha"});
        if (!t.get("alpha")) throw ConfigError("map.alpha is required");
        return PiecewiseMap::lsv(get_rational(*t.get("alpha"), "map.alpha"));
    }
    if (kind == "piecewise_affine") {
        allow_keys(t, "[map]", {"kind", "branches"});
        const toml::array* arr = t.get("branches") ? t.get("branches")->as_array() : nullptr;
        if (!arr) throw ConfigError("map.branches must be an array of tables");
        std::vector<Branch> branches;
        for (std::size_t i = 0; i < arr->size(); ++i) {
            std::string w = "map.branches[" + std::to_string(i) + "]";
            const toml::table* b = arr->get(i)->as_table();
            if (!b) throw ConfigError(w + " must be a table");
            allow_keys(*b, w, {"lo", "hi", "slope", "offset"});
            for (const char* k : {"lo", "hi", "slope"})
                if (!b->get(k)) throw ConfigError(w + "." + k + " is required");
            Rational offset = b->get("offset") ? get_rational(*b->get("offset"), w + ".offset") : Rational(0);
            branches.push_back(Branch{get_rational(*b->get("lo"), w + ".lo"), get_rational(*b->get("hi"), w + ".hi"),
                                      AffineLaw{get_rational(*b->get("slope"), w + ".slope"), offset}});
        }
        return PiecewiseMap::piecewise_affine(std::move(branches));
    }
    throw ConfigError("map.kind must be affine_mod1, lsv or piecewise_affine (got '" + kind + "')");
}

ShapeFn parse_shape(const toml::table& p, const std::string& w) {
    if (!p.get("shape")) throw ConfigError(w + ".shape is required");
    std::string shape = get_string(*p.get("shape"), w + ".shape");
    auto need = [&](const char* k) -> const toml::node& {
        if (!p.get(k)) throw ConfigError(w + "." + k + " is required for shape " + shape);
        return *p.get(k);
    };
    if (shape == "neglog") return ShapeFn::neglog();
    if (shape == "power_law") return ShapeFn::power_law(get_rational(need("p"), w + ".p"));
    if (shape == "bounded_power")
        return ShapeFn::bounded_power(get_rational(need("D"), w + ".D"), get_rational(need("g"), w + ".g"));
    throw ConfigError(w + ".shape must be neglog, power_law or bounded_power (got '" + shape + "')");
}

ObservableSpec parse_observable(const toml::table& t, const PiecewiseMap& map) {
    allow_keys(t, "[observable]", {"base_point", "period", "correlated", "separation", "base_value", "points"});
    ObservableDraft d;
    if (auto n = t.get("base_point")) d.base_point = get_position(*n, "observable.base_point");
    if (auto n = t.get("period")) d.period = get_count(*n, "observable.period");
    if (auto n = t.get("correlated")) d.correlated = get_bool(*n, "observable.correlated");
    if (auto n = t.get("separation")) d.separation = get_real(*n, "observable.separation");
    if (auto n = t.get("base_value")) d.base_value = get_real(*n, "observable.base_value");
    const toml::array* arr = t.get("points") ? t.get("points")->as_array() : nullptr;
    if (!arr || arr->empty()) throw ConfigError("observable needs at least one [[observable.points]] entry");
    for (std::size_t i = 0; i < arr->size(); ++i) {
        std::string w = "observable.points[" + std::to_string(i) + "]";
        const toml::table* p = arr->get(i)->as_table();
        if (!p) throw ConfigError(w + " must be a table");
        allow_keys(*p, w, {"xi", "m", "shape", "p", "D", "g", "density", "period"});
        ObservableDraft::Point pt;
        if (auto n = p->get("xi")) pt.xi = get_position(*n, w + ".xi");
        if (auto n = p->get("m")) pt.m = get_count(*n, w + ".m");
        if (auto n = p->get("density")) pt.density = get_rational(*n, w + ".density");
        if (auto n = p->get("period")) pt.period = get_count(*n, w + ".period");
        pt.shape = parse_shape(*p, w);
        d.points.push_back(std::move(pt));
    }
    return build_observable(map, d);
}

void parse_run(const toml::table& t, ExperimentPlan& plan, const std::string& table) {
    allow_keys(t, "[" + table + "]",
               {"n", "tau", "level", "orbits", "seed", "q", "burn_in", "record_orbits", "evl_blocks", "threads"});
    auto w = [&](const char* k) { return where_of(table, k); };
    if (auto n = t.get("n")) plan.n = get_count(*n, w("n"));
    if (auto n = t.get("tau")) plan.tau = get_real(*n, w("tau"));
    if (auto n = t.get("level")) plan.level = get_real(*n, w("level"));
    if (auto n = t.get("orbits")) plan.orbits = get_count(*n, w("orbits"));
    if (auto n = t.get("seed")) plan.seed = get_count(*n, w("seed"));
    if (auto n = t.get("q")) plan.q = get_count(*n, w("q"));
    if (auto n = t.get("burn_in")) plan.burn_in = get_count(*n, w("burn_in"));
    if (auto n = t.get("record_orbits")) plan.record_orbits = get_count(*n, w("record_orbits"));
    if (auto n = t.get("evl_blocks")) plan.evl_blocks = get_count(*n, w("evl_blocks"));
    if (auto n = t.get("threads")) plan.threads = static_cast<unsigned>(get_count(*n, w("threads")));
    if (plan.tau && plan.level) throw ConfigError(table + ": give either tau or level, not both");
    if (plan.n < 1 || plan.orbits < 1) throw ConfigError(table + ": n and orbits must be at least 1");
    if (plan.threads < 1) throw ConfigError(table + ".threads must be at least 1");
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, const std::string& name) {
    toml::table root;
    try {
        root = toml::parse(text, name);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << name << ":" << e.source().begin.line << ":" << e.source().begin.column << ": " << e.description();
        throw ConfigError(msg.str());
    }
    allow_keys(root, "top level",
               {"mode", "out", "precision_bits", "arc_budget", "map", "observable", "analytic", "oracle", "simulate",
                "tails", "qselect", "induced"});

    ExperimentConfig cfg;
    cfg.name = name;
    cfg.hash = fnv1a(text);
    if (auto n = root.get("mode")) cfg.mode = get_string(*n, "mode");
    if (auto n = root.get("out")) cfg.out_dir = get_string(*n, "out");
    if (auto n = root.get("precision_bits")) cfg.precision_bits = static_cast<int>(get_count(*n, "precision_bits"));
    set_precision_bits(cfg.precision_bits);
    if (auto n = root.get("arc_budget")) set_arc_budget(get_count(*n, "arc_budget"));

    cfg.map = parse_map(table_at(root, "map"));
    cfg.spec = parse_observable(table_at(root, "observable"), cfg.map);

    if (auto n = root.get("analytic")) {
        const toml::table* t = n->as_table();
        if (!t) throw ConfigError("[analytic] must be a table");
        allow_keys(*t, "[analytic]", {"k_max"});
        if (auto k = t->get("k_max")) cfg.k_max = get_count(*k, "analytic.k_max");
    }
    if (auto n = root.get("oracle")) {
        const toml::table* t = n->as_table();
        if (!t) throw ConfigError("[oracle] must be a table");
        allow_keys(*t, "[oracle]", {"levels", "q", "k_max"});
        if (auto k = t->get("levels")) cfg.oracle_levels = real_list(*k, "oracle.levels");
        if (auto k = t->get("q")) cfg.oracle_q = get_count(*k, "oracle.q");
        if (auto k = t->get("k_max")) cfg.oracle_k = get_count(*k, "oracle.k_max");
    }
    if (auto n = root.get("simulate")) {
        const toml::table* t = n->as_table();
        if (!t) throw ConfigError("[simulate] must be a table");
        parse_run(*t, cfg.plan, "simulate");
    }
    if (auto n = root.get("tails")) {
        const toml::table* t = n->as_table();
        if (!t) throw ConfigError("[tails] must be a table");
        allow_keys(*t, "[tails]", {"levels"});
        if (auto k = t->get("levels")) cfg.tail_levels = real_list(*k, "tails.levels");
    }
    if (auto n = root.get("qselect")) {
        const toml::table* t = n->as_table();
        if (!t) throw ConfigError("[qselect] must be a table");
        allow_keys(*t, "[qselect]", {"measures"});
        if (auto k = t->get("measures")) cfg.qselect_measures = real_list(*k, "qselect.measures");
    }
    if (auto n = root.get("induced")) {
        const toml::table* t = n->as_table();
        if (!t) throw ConfigError("[induced] must be a table");
        allow_keys(*t, "[induced]", {"y"});
        if (auto k = t->get("y")) {
            auto ends = real_list(*k, "induced.y");
            if (ends.size() != 2 || !(ends[0] < ends[1]) || ends[0] < 0 || ends[1] > 1)
                throw ConfigError("induced.y must be [lo, hi] with 0 <= lo < hi <= 1");
            cfg.y = CircleArc{ends[0], ends[1]};
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

std::vector<Real> parse_levels(std::string_view text) {
    std::vector<Real> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find(',', start);
        if (end == std::string_view::npos) end = text.size();
        std::string item(text.substr(start, end - start));
        if (item.empty()) throw ConfigError("empty entry in level list '" + std::string(text) + "'");
        out.push_back(Position::parse(item).real());
        start = end + 1;
    }
    return out;
}

}  // namespace evtlab
