#include "evtlab/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace evtlab {

namespace {

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

std::string num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    return fmt("%.17g", v);
}

Json dbl(double v) {
    if (std::isfinite(v)) return v;
    return num(v);
}

Json header(const ExperimentConfig& cfg, const std::string& command) {
    Json h;
    h["command"] = command;
    h["config"] = cfg.name;
    h["config_hash"] = hex64(cfg.hash);
    h["seed"] = cfg.plan.seed;
    h["precision_bits"] = cfg.precision_bits;
    h["map"] = to_json(cfg.map);
    h["observable"] = to_json(cfg.spec);
    return h;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace

Json rational_json(const Rational& r) {
    return Json{{"exact", to_string(r)}, {"value", to_double(r)}};
}

Json real_json(const Real& r) {
    return Json{{"decimal", to_decimal(r)}, {"value", dbl(r.convert_to<double>())}};
}

Json to_json(const PiecewiseMap& map) { return map.describe(); }

Json to_json(const ObservableSpec& spec) {
    Json j;
    j["base_point"] = spec.base_point.str();
    j["correlated"] = spec.correlated;
    if (spec.period) j["period"] = *spec.period;
    j["separation"] = to_decimal(spec.separation);
    j["points"] = Json::array();
    for (const auto& p : spec.points) {
        Json pj{{"xi", p.xi.str()}, {"m", p.m}, {"shape", p.shape.describe()}, {"density", to_string(p.density)}};
        if (p.period) pj["period"] = *p.period;
        j["points"].push_back(pj);
    }
    return j;
}

Json to_json(const EIResult& ei) {
    Json j;
    j["theta"] = rational_json(ei.theta);
    j["dominant_class"] = ei.dominant_class.describe();
    j["numerator"] = ei.numerator.str();
    j["denominator"] = ei.denominator.str();
    j["index_set"] = ei.index_set;
    Json succ = Json::object();
    for (const auto& [i, s] : ei.successor) succ[std::to_string(i)] = s;
    j["successor"] = succ;
    Json rows = Json::array();
    for (const auto& row : ei.containment) {
        Json r = Json::array();
        for (auto c : row) r.push_back(to_string(c));
        rows.push_back(r);
    }
    j["containment"] = rows;
    return j;
}

Json to_json(const MultiplicityResult& m) {
    Json j;
    j["pi"] = Json::array();
    for (std::size_t k = 1; k <= m.pi.size(); ++k) {
        Json e = rational_json(m.pi[k - 1]);
        e["k"] = k;
        j["pi"].push_back(e);
    }
    if (m.tail) {
        Json t;
        t["start"] = m.tail->start;
        t["period"] = m.tail->period;
        t["ratio"] = rational_json(m.tail->ratio);
        t["form"] = "pi(period*l + s) = C_s * ratio^l";
        Json cs = Json::array();
        for (const auto& c : m.tail->residue_coefficients) cs.push_back(rational_json(c));
        t["residue_coefficients"] = cs;
        j["tail"] = t;
    } else {
        j["tail"] = nullptr;
    }
    j["index_sets"] = m.index_sets;
    j["total"] = rational_json(m.total);
    j["mean"] = rational_json(m.mean);
    return j;
}

Json to_json(const FiniteNTable& t) {
    Json j;
    j["u"] = real_json(t.u);
    j["q"] = t.q;
    j["measure_u"] = real_json(t.measure_u);
    j["theta_n"] = real_json(t.theta_n);
    j["measure_a"] = Json::array();
    for (const auto& a : t.measure_a) j["measure_a"].push_back(real_json(a));
    j["pi_n"] = Json::array();
    for (const auto& p : t.pi_n) j["pi_n"].push_back(real_json(p));
    return j;
}

Json to_json(const QSelection& q) {
    Json j;
    j["q"] = q.q;
    j["rationale"] = to_string(q.rationale);
    j["increasing"] = q.increasing;
    j["levels"] = Json::array();
    for (const auto& l : q.levels) {
        Json r = Json::array();
        for (const auto& t : l.return_times) r.push_back(t ? Json(*t) : Json(nullptr));
        j["levels"].push_back({{"u", real_json(l.u)}, {"measure", real_json(l.measure)}, {"return_times", r}});
    }
    return j;
}

Json to_json(const TailType& t) {
    Json j;
    j["family"] = to_string(t.family);
    if (t.family != TailType::Family::Gumbel) j["index"] = rational_json(t.index);
    j["endpoint"] = t.endpoint ? Json(to_string(*t.endpoint)) : Json("inf");
    j["provenance"] = {{"family", "competition rule"}, {"index", "derived from ball geometry"}};
    return j;
}

Json to_json(const TailCheck& c) {
    Json j;
    j["type"] = to_json(c.type);
    j["max_deviation"] = dbl(c.max_deviation.convert_to<double>());
    j["rows"] = Json::array();
    for (const auto& r : c.rows)
        j["rows"].push_back({{"u", to_decimal(r.u)},
                             {"y", dbl(r.y.convert_to<double>())},
                             {"ratio", dbl(r.ratio.convert_to<double>())},
                             {"target", dbl(r.target.convert_to<double>())},
                             {"deviation", dbl(r.deviation.convert_to<double>())}});
    j["fitted_index"] = Json::array();
    for (const auto& f : c.fitted_index) j["fitted_index"].push_back(dbl(f.convert_to<double>()));
    return j;
}

Json to_json(const ClusterStats& s) {
    Json j;
    j["orbits"] = s.orbits;
    j["n"] = s.n;
    j["q"] = s.q;
    j["exceedances"] = s.exceedances;
    j["clusters"] = s.clusters;
    j["theta_hat"] = dbl(s.theta_hat);
    j["theta_se"] = dbl(s.theta_se);
    j["theta_ci95"] = {dbl(s.ci_low), dbl(s.ci_high)};
    j["size_counts"] = s.size_counts;
    j["pi_hat"] = Json::array();
    for (double p : s.pi_hat) j["pi_hat"].push_back(dbl(p));
    j["pi_se"] = Json::array();
    for (double p : s.pi_se) j["pi_se"].push_back(dbl(p));
    j["gap_rescale"] = dbl(s.rescale);
    j["gap_count"] = s.gaps.size();
    j["ks_stat"] = dbl(s.ks_stat);
    j["ks_critical_1pct"] = dbl(s.ks_critical_1pct);
    j["orbits_without_exceedance"] = s.orbits_without_exceedance;
    j["evl_hat"] = dbl(s.evl_hat);
    j["evl_se"] = dbl(s.evl_se);
    j["evl_blocks"] = s.evl_blocks;
    j["evl_block_hat"] = dbl(s.evl_block_hat);
    j["evl_block_se"] = dbl(s.evl_block_se);
    j["ascending_clusters"] = s.ascending_clusters;
    j["decreasing_clusters"] = s.decreasing_clusters;
    return j;
}

Json to_json(const InducedReport& r) {
    Json j;
    j["u"] = real_json(r.u);
    j["q"] = r.q;
    j["original"] = to_json(r.original);
    j["induced"] = to_json(r.induced);
    j["theta_gap"] = dbl(r.theta_gap);
    j["tv_pi"] = dbl(r.tv_pi);
    j["ks_gaps"] = dbl(r.ks_gaps);
    j["mean_return_time"] = dbl(r.mean_return_time);
    return j;
}

std::string series_csv(const std::vector<SeriesPoint>& series) {
    std::string out = "orbit,t,x,phi,exceed,hit_point\n";
    for (const auto& s : series)
        out += std::to_string(s.orbit) + "," + std::to_string(s.t) + "," + num(s.x) + "," + num(s.phi) + "," +
               (s.exceed ? "1" : "0") + "," + std::to_string(s.hit_point) + "\n";
    return out;
}

std::string exceedances_csv(const std::vector<ExceedanceRecord>& records) {
    std::string out = "orbit,t,value,hit_point\n";
    for (const auto& r : records)
        out += std::to_string(r.orbit) + "," + std::to_string(r.t) + "," + num(r.value) + "," +
               std::to_string(r.hit_point) + "\n";
    return out;
}

std::string clusters_csv(const std::vector<Cluster>& clusters) {
    std::string out = "cluster,orbit,start,size,pattern,values,points\n";
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        const auto& c = clusters[i];
        std::string values, points;
        for (std::size_t k = 0; k < c.size(); ++k) {
            values += (k ? ";" : "") + num(c.values[k]);
            points += (k ? ";" : "") + std::to_string(c.points[k]);
        }
        std::string pattern = c.size() >= 2 ? to_string(cluster_pattern(c)) : "single";
        out += std::to_string(i) + "," + std::to_string(c.orbit) + "," + std::to_string(c.start) + "," +
               std::to_string(c.size()) + "," + pattern + "," + values + "," + points + "\n";
    }
    return out;
}

void write_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw ConfigError("cannot write " + tmp);
        f << content;
        f.flush();
        if (!f) throw ResourceError("write failed for " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw ConfigError("cannot rename " + tmp + " to " + path + ": " + ec.message());
    }
}

void write_outputs(const CommandOutput& out, const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
    for (const auto& [name, content] : out.files) write_atomic(dir + "/" + name, content);
}

CommandOutput cmd_analytic(const ExperimentConfig& cfg) {
    EIResult ei = analytic_theta(cfg.spec, cfg.map);
    MultiplicityResult m = analytic_multiplicity(cfg.spec, cfg.map, cfg.k_max);
    CommandOutput out;
    out.report = header(cfg, "analytic");
    out.report["k_max"] = cfg.k_max;
    out.report["extremal_index"] = to_json(ei);
    out.report["multiplicity"] = to_json(m);

    std::string t = "theta = " + to_string(ei.theta) + fmt(" (%.12g)\n", to_double(ei.theta));
    t += "dominant class " + ei.dominant_class.describe() + ", I_1 = {";
    for (std::size_t i = 0; i < ei.index_set.size(); ++i) t += (i ? "," : "") + std::to_string(ei.index_set[i]);
    t += "}\n";
    t += fmt("%4s  %-28s %s\n", "k", "pi(k)", "float");
    for (std::size_t k = 1; k <= m.pi.size(); ++k)
        t += fmt("%4zu  %-28s %.12g\n", k, to_string(m.pi[k - 1]).c_str(), to_double(m.pi[k - 1]));
    if (m.tail) {
        t += "tail: period " + std::to_string(m.tail->period) + ", ratio " + to_string(m.tail->ratio) + ", C = (";
        for (std::size_t s = 0; s < m.tail->residue_coefficients.size(); ++s)
            t += (s ? ", " : "") + to_string(m.tail->residue_coefficients[s]);
        t += ")\n";
    }
    t += "sum pi = " + to_string(m.total) + ", mean size = " + to_string(m.mean) + "\n";
    out.table = t;
    out.files = {{"analytic.json", dump(out.report)}, {"analytic.txt", t}};
    return out;
}

CommandOutput cmd_oracle(const ExperimentConfig& cfg) {
    if (cfg.oracle_levels.empty()) throw ConfigError("oracle needs levels ([oracle].levels or --levels)");
    const std::uint64_t q = cfg.oracle_q ? *cfg.oracle_q : default_q(cfg.spec);
    CommandOutput out;
    out.report = header(cfg, "oracle");
    out.report["q"] = q;
    out.report["rows"] = Json::array();
    std::string csv = "u,measure_u,theta_n";
    for (std::size_t k = 1; k <= cfg.oracle_k; ++k) csv += ",pi_n_" + std::to_string(k);
    csv += "\n";
    std::string t = fmt("%-12s %-14s %s\n", "u", "mu(U)", "theta_n");
    for (const Real& u : cfg.oracle_levels) {
        FiniteNTable row = finite_n_sets(cfg.spec, cfg.map, u, q, cfg.oracle_k);
        out.report["rows"].push_back(to_json(row));
        csv += to_decimal(u) + "," + to_decimal(row.measure_u) + "," + to_decimal(row.theta_n);
        for (const auto& p : row.pi_n) csv += "," + to_decimal(p);
        csv += "\n";
        t += fmt("%-12.6g %-14.6g %.12g\n", u.convert_to<double>(), row.measure_u.convert_to<double>(),
                 row.theta_n.convert_to<double>());
    }
    out.table = t;
    out.files = {{"oracle.json", dump(out.report)}, {"oracle.csv", csv}};
    return out;
}

CommandOutput cmd_simulate(const ExperimentConfig& cfg) {
    ExperimentResult r = run_experiment(cfg.map, cfg.spec, cfg.plan);
    CommandOutput out;
    out.report = header(cfg, "simulate");
    out.report["u"] = real_json(r.u);
    out.report["measure_u"] = real_json(r.measure_u);
    out.report["expected_exceedances"] = dbl((r.measure_u * cfg.plan.n).convert_to<double>());
    out.report["stats"] = to_json(r.stats);
    const auto& s = r.stats;
    std::string t = "u = " + to_decimal(r.u) + "\n";
    t += fmt("exceedances %llu, clusters %llu (q = %llu)\n", (unsigned long long)s.exceedances,
             (unsigned long long)s.clusters, (unsigned long long)s.q);
    t += fmt("theta_hat = %.6f +- %.6f\n", s.theta_hat, s.theta_se);
    for (std::size_t k = 0; k < s.pi_hat.size(); ++k)
        t += fmt("pi_hat(%zu) = %.6f +- %.6f\n", k + 1, s.pi_hat[k], s.pi_se[k]);
    t += fmt("KS %.5f (1%% critical %.5f), EVL %.6f\n", s.ks_stat, s.ks_critical_1pct, s.evl_hat);
    t += fmt("ascending-step clusters %llu, monotone-decreasing %llu\n", (unsigned long long)s.ascending_clusters,
             (unsigned long long)s.decreasing_clusters);
    out.table = t;
    out.files = {{"series.csv", series_csv(r.series)},
                 {"exceedances.csv", exceedances_csv(r.exceedances)},
                 {"clusters.csv", clusters_csv(r.clusters)},
                 {"stats.json", dump(out.report)}};
    return out;
}

CommandOutput cmd_tails(const ExperimentConfig& cfg) {
    std::vector<TailType> types;
    for (const auto& p : cfg.spec.points) types.push_back(classify_shape(p.shape, p.density > 0));
    TailType winner = compete(types);
    CommandOutput out;
    out.report = header(cfg, "tails");
    Json pts = Json::array();
    for (const auto& t : types) pts.push_back(to_json(t));
    out.report["point_types"] = pts;
    out.report["winner"] = to_json(winner);
    out.report["same_family_extension"] = same_family_extension(types);
    out.report["checks"] = Json::array();
    std::string t = "winner: " + winner.describe() + (same_family_extension(types) ? " [same-family extension]" : "") +
                    "\n";
    if (!cfg.tail_levels.empty()) {
        TailCheck c = numeric_tail_check(cfg.spec, winner, cfg.tail_levels);
        out.report["checks"].push_back(to_json(c));
        for (const auto& r : c.rows)
            t += fmt("u=%-14.8g y=%-4g ratio=%.10g target=%.10g dev=%.3g\n", r.u.convert_to<double>(),
                     r.y.convert_to<double>(), r.ratio.convert_to<double>(), r.target.convert_to<double>(),
                     r.deviation.convert_to<double>());
    }
    out.table = t;
    out.files = {{"tails.json", dump(out.report)}};
    return out;
}

CommandOutput cmd_qselect(const ExperimentConfig& cfg) {
    QSelection q = select_q(cfg.spec, cfg.map, cfg.qselect_measures);
    CommandOutput out;
    out.report = header(cfg, "qselect");
    out.report["selection"] = to_json(q);
    std::string t = "q = " + std::to_string(q.q) + " (" + to_string(q.rationale) + ")\n";
    t += fmt("%-14s %-12s %s\n", "mu(U)", "u", "R(A_0..A_q)");
    for (const auto& l : q.levels) {
        std::string rs;
        for (const auto& r : l.return_times) rs += (r ? std::to_string(*r) : std::string("-")) + " ";
        t += fmt("%-14.6g %-12.8g %s\n", l.measure.convert_to<double>(), l.u.convert_to<double>(), rs.c_str());
    }
    t += std::string("R(A_q) increasing: ") + (q.increasing ? "yes" : "no") + "\n";
    out.table = t;
    out.files = {{"qselect.json", dump(out.report)}, {"qselect.txt", t}};
    return out;
}

CommandOutput cmd_induced(const ExperimentConfig& cfg) {
    if (!cfg.y) throw ConfigError("induced needs [induced].y");
    InducedReport r = compare_induced_repp(cfg.map, *cfg.y, cfg.spec, cfg.plan);
    CommandOutput out;
    out.report = header(cfg, "induced");
    out.report["y"] = {to_decimal(cfg.y->lo), to_decimal(cfg.y->hi)};
    out.report["comparison"] = to_json(r);
    std::string t = fmt("theta original %.5f +- %.5f, induced %.5f +- %.5f, |diff| %.5f\n", r.original.theta_hat,
                        r.original.theta_se, r.induced.theta_hat, r.induced.theta_se, r.theta_gap);
    t += fmt("TV(pi) %.5f, two-sample KS of gaps %.5f, mean return time %.4f\n", r.tv_pi, r.ks_gaps,
             r.mean_return_time);
    out.table = t;
    out.files = {{"induced.json", dump(out.report)}};
    return out;
}

CommandOutput run_command(const std::string& mode, const ExperimentConfig& cfg) {
    if (mode == "analytic") return cmd_analytic(cfg);
    if (mode == "oracle") return cmd_oracle(cfg);
    if (mode == "simulate") return cmd_simulate(cfg);
    if (mode == "tails") return cmd_tails(cfg);
    if (mode == "qselect") return cmd_qselect(cfg);
    if (mode == "induced") return cmd_induced(cfg);
    throw ConfigError("unknown command '" + mode + "'");
}

}  // namespace evtlab
