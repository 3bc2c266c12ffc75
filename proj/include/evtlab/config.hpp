#pragma once

#include "evtlab/interval_algebra.hpp"
#include "evtlab/numeric.hpp"
#include "evtlab/observables.hpp"
#include "evtlab/piecewise_map.hpp"
#include "evtlab/simulator.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace evtlab {

struct ExperimentConfig {
    std::string name;
    std::uint64_t hash = 0;  // FNV-1a of the config text
    std::optional<std::string> mode;
    std::string out_dir = "out";
    int precision_bits = 80;

    PiecewiseMap map = PiecewiseMap::affine_mod1(2);
    ObservableSpec spec;

    std::size_t k_max = 12;
    std::vector<Real> oracle_levels;
    std::optional<std::uint64_t> oracle_q;
    std::size_t oracle_k = 6;
    std::vector<Real> tail_levels;
    std::vector<Real> qselect_measures;
    ExperimentPlan plan;
    std::optional<CircleArc> y;
};

std::uint64_t fnv1a(std::string_view text);
std::string hex64(std::uint64_t v);

// Sets the global working precision as a side effect, before any level is parsed.
ExperimentConfig parse_config(std::string_view text, const std::string& name = "<string>");
ExperimentConfig load_config(const std::string& path);

// Comma separated decimal list, as given on the command line.
std::vector<Real> parse_levels(std::string_view text);

}  // namespace evtlab
