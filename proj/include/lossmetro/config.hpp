#pragma once

// Scenario configuration files (JSON). Unknown keys are rejected at every
// level; serialization writes every field so that parse -> serialize -> parse
// is idempotent.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lossmetro/estimation.hpp"
#include "lossmetro/loss_channel.hpp"
#include "lossmetro/measurements.hpp"
#include "lossmetro/probe.hpp"
#include "lossmetro/tolerances.hpp"

namespace lossmetro {

struct LossConfig {
  Parametrization given = Parametrization::eta;  // which of etas / phis was written
  std::vector<double> values;
  std::vector<int> assignment;  // optional signal-mode -> element map

  LossParams params() const;
  bool operator==(const LossConfig&) const = default;
};

struct SimulationConfig {
  std::uint64_t shots = 10000;
  std::uint64_t trials = 200;
  Estimator estimator = Estimator::mle_refined;
  int grid_points = 512;
  double grid_min = 0.01;
  double grid_max = 0.99;
  double refine_tol = 1e-8;

  bool operator==(const SimulationConfig&) const = default;
};

struct OutputConfig {
  std::string path;    // empty: stdout
  std::string format = "json";
  std::string csv;     // optional per-trial / outcome table

  bool operator==(const OutputConfig&) const = default;
};

struct ScenarioConfig {
  std::optional<ProbeSpec> probe;
  std::string probe_state;  // saved state file used instead of `probe`
  std::optional<LossConfig> loss;
  std::vector<double> eta_prime;
  Parametrization parametrization = Parametrization::phi;
  MeasurementKind measurement = MeasurementKind::schmidt;
  SimulationConfig simulation;
  Tolerances tolerances;
  std::uint64_t seed = 1;
  OutputConfig output;

  bool operator==(const ScenarioConfig&) const = default;
};

/// Throws ValidationError on unknown keys, wrong types or bad enum values.
ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ScenarioConfig& config);
ScenarioConfig load_config(const std::string& path);

nlohmann::json probe_spec_to_json(const ProbeSpec& spec);
ProbeSpec probe_spec_from_json(const nlohmann::json& j);
nlohmann::json tolerances_to_json(const Tolerances& tol);
Tolerances tolerances_from_json(const nlohmann::json& j);

}  // namespace lossmetro
