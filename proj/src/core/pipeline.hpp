#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/rpr.hpp"
#include "core/trajectory_io.hpp"

namespace prof {

// Flat run configuration shared by every CLI stage.  Parsed strictly:
// unknown keys and out-of-range values are config errors that name the
// field.
struct RunConfig {
  std::string dataset;
  DatasetFormat format = DatasetFormat::kAuto;
  Arity arity = Arity::kSas;

  int64_t expert_count = 1;
  ExpertSource expert_source = ExpertSource::kByHighestReturn;
  std::string expert_path;

  double delta = 0.01;
  double alpha_o = 0.05;
  double alpha_a = 0.05;
  int64_t h_count = 10000;
  uint64_t seed = 0;

  std::string out;

  std::string provider;  // http | replay | script
  std::string transcript;
  std::string record;
  std::string script_file;
  std::string model;
  double temperature = 0.7;
  double top_p = 1.0;
  int32_t max_output_tokens = 10000;

  int n = 5;
  int rounds = 1;
  int retry_budget = 2;
  int32_t step_budget = kDefaultStepBudget;

  std::string prompts = "prompts";
  std::string task;

  std::vector<std::string> rewards;  // score stage inputs
  std::string reward;                // relabel stage input

  std::string scale;  // preset name, exclusive with explicit bounds
  std::optional<double> r_min;
  std::optional<double> r_max;

  int external_timeout_ms = 5000;
  int http_max_attempts = 5;
  int http_backoff_base_ms = 1000;
  int http_backoff_cap_ms = 30000;
};

RunConfig run_config_from_json(const nlohmann::json& doc);

// Spec'd score report row.  wall_ms is included only when requested so
// persisted artifacts stay byte-deterministic.
nlohmann::json report_to_json(int id, const DominanceReport& report,
                              bool with_wall_ms);

// Executes one stage (split, noise, score, optimize, relabel, run),
// writing artifacts under the configured output directory, and returns
// the stage report.
nlohmann::json run_stage(const std::string& stage, const nlohmann::json& doc);

}  // namespace prof
