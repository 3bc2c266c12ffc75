#pragma once

#include "evtlab/interval_algebra.hpp"
#include "evtlab/numeric.hpp"
#include "evtlab/observables.hpp"
#include "evtlab/piecewise_map.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace evtlab {

struct ExperimentPlan {
    std::uint64_t n = 1000;
    std::optional<Real> tau;    // level solved from n * mu(U(u)) = tau ...
    std::optional<Real> level;  // ... or given directly
    std::uint64_t orbits = 1;
    std::uint64_t seed = 1;
    std::optional<std::uint64_t> q;        // default: select_q case analysis
    std::optional<std::uint64_t> burn_in;  // default: 0 for digit orbits, 1000 otherwise
    std::size_t record_orbits = 1;         // orbits whose full series is kept
    std::uint64_t evl_blocks = 20;         // sub-blocks per orbit for the block EVL check
    unsigned threads = 1;
};

struct ExceedanceRecord {
    std::uint64_t orbit = 0;
    std::uint64_t t = 0;
    double value = 0.0;
    std::size_t hit_point = 0;  // 1-based index of the maximal point
};

struct SeriesPoint {
    std::uint64_t orbit = 0;
    std::uint64_t t = 0;
    double x = 0.0;
    double phi = 0.0;
    bool exceed = false;
    std::size_t hit_point = 0;
};

struct Cluster {
    std::uint64_t orbit = 0;
    std::uint64_t start = 0;
    std::vector<double> values;
    std::vector<std::size_t> points;
    std::size_t size() const { return values.size(); }
};

enum class ClusterPattern { MonotoneDecreasing, AscendingStep, Other };
std::string to_string(ClusterPattern p);

struct ClusterStats {
    std::uint64_t orbits = 0;
    std::uint64_t n = 0;
    std::uint64_t q = 0;
    std::uint64_t exceedances = 0;
    std::uint64_t clusters = 0;
    double theta_hat = 0.0;
    double theta_se = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::vector<std::uint64_t> size_counts;  // index k-1 holds clusters of size k
    std::vector<double> pi_hat;
    std::vector<double> pi_se;
    double rescale = 0.0;     // empirical exceedance frequency
    std::vector<double> gaps;  // rescaled inter-cluster gaps on the concatenated orbits
    double ks_stat = 0.0;
    double ks_critical_1pct = 0.0;
    std::uint64_t orbits_without_exceedance = 0;
    double evl_hat = 0.0;
    double evl_se = 0.0;
    std::uint64_t evl_blocks = 0;
    double evl_block_hat = 0.0;
    double evl_block_se = 0.0;
    std::uint64_t ascending_clusters = 0;
    std::uint64_t decreasing_clusters = 0;
};

struct ExperimentResult {
    Real u;
    Real measure_u;
    std::uint64_t q = 0;
    std::vector<SeriesPoint> series;
    std::vector<ExceedanceRecord> exceedances;
    std::vector<Cluster> clusters;
    ClusterStats stats;
};

ExperimentResult run_experiment(const PiecewiseMap& map, const ObservableSpec& spec,
                                const ExperimentPlan& plan);

// Records must be sorted by (orbit, t); clusters never span orbits.
std::vector<Cluster> extract_clusters(const std::vector<ExceedanceRecord>& records, std::uint64_t q);

ClusterPattern cluster_pattern(const Cluster& cluster);

ClusterStats summarize(const std::vector<ExceedanceRecord>& records,
                       const std::vector<Cluster>& clusters, std::uint64_t orbits,
                       std::uint64_t n, std::uint64_t q, std::uint64_t evl_blocks);

// Two-sided Kolmogorov-Smirnov distances.
double ks_exponential(std::vector<double> sample, double mean);
double ks_two_sample(std::vector<double> a, std::vector<double> b);

struct InducedReport {
    Real u;
    std::uint64_t q = 0;
    ClusterStats original;
    ClusterStats induced;
    double theta_gap = 0.0;
    double tv_pi = 0.0;
    double ks_gaps = 0.0;
    double mean_return_time = 0.0;
};

InducedReport compare_induced_repp(const PiecewiseMap& map, const CircleArc& y,
                                   const ObservableSpec& spec, const ExperimentPlan& plan);

}  // namespace evtlab
