#pragma once

#include "evtlab/analytic_evt.hpp"
#include "evtlab/config.hpp"
#include "evtlab/simulator.hpp"
#include "evtlab/tails.hpp"

#include "json.hpp"

#include <string>

namespace evtlab {

using Json = nlohmann::ordered_json;

Json rational_json(const Rational& r);
Json real_json(const Real& r);

Json to_json(const PiecewiseMap& map);
Json to_json(const ObservableSpec& spec);
Json to_json(const EIResult& ei);
Json to_json(const MultiplicityResult& m);
Json to_json(const FiniteNTable& t);
Json to_json(const QSelection& q);
Json to_json(const TailType& t);
Json to_json(const TailCheck& c);
Json to_json(const ClusterStats& s);
Json to_json(const InducedReport& r);

std::string series_csv(const std::vector<SeriesPoint>& series);
std::string exceedances_csv(const std::vector<ExceedanceRecord>& records);
std::string clusters_csv(const std::vector<Cluster>& clusters);

// Writes through a temporary file in the same directory and renames it into place.
void write_atomic(const std::string& path, const std::string& content);

struct CommandOutput {
    Json report;        // the main JSON report
    std::string table;  // human-readable summary
    std::vector<std::pair<std::string, std::string>> files;  // name, content
};

CommandOutput cmd_analytic(const ExperimentConfig& cfg);
CommandOutput cmd_oracle(const ExperimentConfig& cfg);
CommandOutput cmd_simulate(const ExperimentConfig& cfg);
CommandOutput cmd_tails(const ExperimentConfig& cfg);
CommandOutput cmd_qselect(const ExperimentConfig& cfg);
CommandOutput cmd_induced(const ExperimentConfig& cfg);

CommandOutput run_command(const std::string& mode, const ExperimentConfig& cfg);

// Writes every file of the output into dir (created if needed).
void write_outputs(const CommandOutput& out, const std::string& dir);

}  // namespace evtlab
