#pragma once

#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "visitlab/config.hpp"
#include "visitlab/predictions.hpp"

namespace visitlab {

constexpr int kReportSchemaVersion = 1;

enum class Verb { predict, simulate, compare, bound, sweep };

std::string to_string(Verb v);
Verb parse_verb(const std::string& s);

struct RunOutcome {
  // {"schema_version", "verb", "library", "config_hash", "body", "meta"};
  // "body" is a pure function of (config, seed), "meta" holds timings.
  nlohmann::json report;
  std::map<std::string, std::string> csv;  // file name -> contents
  bool pass = true;
  int exit_code = 0;
};

// Limit law for the configured (system, family) pair; throws unsupported
// with the list of supported pairs otherwise.
PredictionResult predict_for(const ExperimentConfig& cfg, nlohmann::json* extras = nullptr);
std::string supported_pairs();

RunOutcome cmd_predict(const ExperimentConfig& cfg);
RunOutcome cmd_simulate(const ExperimentConfig& cfg);
RunOutcome cmd_compare(const ExperimentConfig& cfg);
RunOutcome cmd_bound(const ExperimentConfig& cfg);
RunOutcome cmd_sweep(const ExperimentConfig& cfg);
RunOutcome run_verb(Verb v, const ExperimentConfig& cfg);

// report.json plus the CSV tables under dir.
void write_outputs(const RunOutcome& out, const std::string& dir);

// Exit code for an exception escaping a verb.
int exit_code_for(const std::exception& e);

}  // namespace visitlab
