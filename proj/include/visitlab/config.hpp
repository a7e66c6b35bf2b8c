#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "visitlab/predictions.hpp"
#include "visitlab/systems.hpp"
#include "visitlab/targets.hpp"

namespace visitlab {

constexpr int kConfigSchemaVersion = 1;

// K is either a fixed radius or a fraction of the level ("n/2").
struct RadiusRule {
  std::size_t fixed = 10;
  std::size_t divisor = 0;  // nonzero: K = max(1, n / divisor)

  std::size_t at(double level) const;
};

struct ExperimentConfig {
  nlohmann::json raw;  // as loaded, used for hashing and echoing
  SystemSpec system;
  TargetFamily family;
  std::vector<double> levels;
  double t = 2.0;
  RadiusRule K;
  std::size_t L = 200;
  std::uint64_t samples = 10000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  double tolerance = 0.03;
  std::size_t batches = 256;
  std::uint64_t measure_samples = 1'000'000;
  std::uint64_t min_entries = 1;
  std::string out_dir = "visitlab-out";
  std::optional<MixingRate> mixing;
  SteinMode mixing_mode = SteinMode::phi;
};

// Numbers may be JSON numbers or strings holding "p/q" or decimals.
double json_number(const nlohmann::json& j, const std::string& what);
Rational json_rational(const nlohmann::json& j, const std::string& what, bool& exact);

SystemSpec parse_system(const nlohmann::json& j);
TargetFamily parse_target(const nlohmann::json& j);
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// FNV-1a over the canonical dump, ignoring execution-only keys.
std::string config_hash(const nlohmann::json& raw);

}  // namespace visitlab
