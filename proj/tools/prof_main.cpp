// prof: command-line front end over the C API.  Each subcommand maps
// onto one pipeline stage; flags override keys from --config.
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "prof/prof.h"

namespace {

using nlohmann::json;

// One stage's flag set.  Every stage accepts the same flat configuration;
// the library decides which keys it actually needs and rejects unknown
// ones from config files.
class StageOptions {
 public:
  explicit StageOptions(CLI::App* sub) : sub_(sub) {
    sub->add_option("--config", config_path_,
                    "JSON file with flat configuration keys");
    add_str("--dataset", "dataset", "input dataset path");
    add_str("--format", "format", "dataset format: auto|binary-v1|text-lines");
    add_str("--arity", "arity", "reward arity: sas|ss");
    add_str("--out", "out", "output directory (default runs/<timestamp>-<stage>)");
    add_int("--seed", "seed", "noise synthesis seed");
    add_int("--expert-count", "expert_count", "trajectories in the expert set");
    add_str("--expert-source", "expert_source",
            "by-highest-return|external-file");
    add_str("--expert-path", "expert_path", "expert dataset for external-file");
    add_num("--delta", "delta", "dominance threshold margin");
    add_num("--alpha-o", "alpha_o", "observation noise scale factor");
    add_num("--alpha-a", "alpha_a", "action noise scale factor");
    add_int("--h-count", "h_count", "number of noisy trajectories");
    add_str("--provider", "provider", "LLM provider: http|replay|script");
    add_str("--transcript", "transcript", "transcript to replay");
    add_str("--record", "record", "transcript file to append to");
    add_str("--script-file", "script_file", "scripted responses (JSON array)");
    add_str("--model", "model", "model name (default $PROF_LLM_MODEL)");
    add_num("--temperature", "temperature", "sampling temperature");
    add_num("--top-p", "top_p", "nucleus sampling cutoff");
    add_int("--max-output-tokens", "max_output_tokens", "completion budget");
    add_int("--n", "n", "candidates per generation round");
    add_int("--rounds", "rounds", "optimization rounds");
    add_int("--retry-budget", "retry_budget", "re-asks per invalid candidate");
    add_int("--step-budget", "step_budget", "reward evaluation step budget");
    add_str("--prompts", "prompts", "prompt template directory");
    add_str("--task", "task", "task name under <prompts>/tasks/");
    add_vec("--rewards", "rewards", "reward files to score");
    add_str("--reward", "reward", "reward file for relabeling");
    add_str("--scale", "scale", "reward scale preset");
    add_num("--r-min", "r_min", "explicit lower reward bound");
    add_num("--r-max", "r_max", "explicit upper reward bound");
    add_int("--external-timeout-ms", "external_timeout_ms",
            "external reward call timeout");
    add_int("--http-max-attempts", "http_max_attempts", "HTTP retry attempts");
    add_int("--http-backoff-base-ms", "http_backoff_base_ms",
            "HTTP retry backoff base");
    add_int("--http-backoff-cap-ms", "http_backoff_cap_ms",
            "HTTP retry backoff cap");
  }

  // Config file first, then whichever flags were actually given.
  json build_config() const {
    json cfg = json::object();
    if (!config_path_.empty()) {
      std::ifstream in(config_path_);
      if (!in)
        throw CliConfigError("cannot open config file " + config_path_);
      json doc = json::parse(in, nullptr, false);
      if (doc.is_discarded() || !doc.is_object())
        throw CliConfigError("config file " + config_path_ +
                             " is not a JSON object");
      cfg = std::move(doc);
    }
    for (const auto& [key, binding] : strings_)
      if (binding.opt->count()) cfg[key] = *binding.value;
    for (const auto& [key, binding] : numbers_)
      if (binding.opt->count()) cfg[key] = *binding.value;
    for (const auto& [key, binding] : ints_)
      if (binding.opt->count()) cfg[key] = *binding.value;
    for (const auto& [key, binding] : lists_)
      if (binding.opt->count()) cfg[key] = *binding.value;
    return cfg;
  }

  struct CliConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
  };

 private:
  template <typename T>
  struct Binding {
    CLI::Option* opt;
    std::unique_ptr<T> value;
  };

  void add_str(const char* flag, const char* key, const char* help) {
    auto value = std::make_unique<std::string>();
    CLI::Option* opt = sub_->add_option(flag, *value, help);
    strings_.emplace_back(key, Binding<std::string>{opt, std::move(value)});
  }
  void add_num(const char* flag, const char* key, const char* help) {
    auto value = std::make_unique<double>(0.0);
    CLI::Option* opt = sub_->add_option(flag, *value, help);
    numbers_.emplace_back(key, Binding<double>{opt, std::move(value)});
  }
  void add_int(const char* flag, const char* key, const char* help) {
    auto value = std::make_unique<int64_t>(0);
    CLI::Option* opt = sub_->add_option(flag, *value, help);
    ints_.emplace_back(key, Binding<int64_t>{opt, std::move(value)});
  }
  void add_vec(const char* flag, const char* key, const char* help) {
    auto value = std::make_unique<std::vector<std::string>>();
    CLI::Option* opt = sub_->add_option(flag, *value, help);
    lists_.emplace_back(
        key, Binding<std::vector<std::string>>{opt, std::move(value)});
  }

  CLI::App* sub_;
  std::string config_path_;
  std::vector<std::pair<std::string, Binding<std::string>>> strings_;
  std::vector<std::pair<std::string, Binding<double>>> numbers_;
  std::vector<std::pair<std::string, Binding<int64_t>>> ints_;
  std::vector<std::pair<std::string, Binding<std::vector<std::string>>>> lists_;
};

int run(const std::string& stage, const StageOptions& options) {
  json cfg;
  try {
    cfg = options.build_config();
  } catch (const StageOptions::CliConfigError& e) {
    std::fprintf(stderr, "error: %s: %s\n", stage.c_str(), e.what());
    return prof_exit_code(PROF_ERR_CONFIG);
  }
  char* report = nullptr;
  prof_status status = prof_run_stage(stage.c_str(), cfg.dump().c_str(),
                                      &report);
  if (status != PROF_OK) {
    std::fprintf(stderr, "error: %s: %s\n", stage.c_str(), prof_last_error());
    return prof_exit_code(status);
  }
  std::printf("%s\n", report);
  prof_string_free(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prof: generate, rank, optimize and apply reward functions "
               "for unlabeled offline-imitation datasets"};
  app.set_version_flag("--version", prof_version());
  app.require_subcommand(1);

  static const char* kStages[] = {"split",    "noise",   "score",
                                  "optimize", "relabel", "run"};
  static const char* kHelp[] = {
      "select the expert subset of a labeled dataset",
      "synthesize noise-perturbed copies of the weakest expert trajectory",
      "rank reward files by dominance score",
      "generate and iteratively improve reward candidates with an LLM",
      "relabel a dataset with a reward and rescale the results",
      "split + optimize + relabel in one pass"};

  std::vector<std::pair<std::string, std::unique_ptr<StageOptions>>> stages;
  for (size_t i = 0; i < 6; ++i) {
    CLI::App* sub = app.add_subcommand(kStages[i], kHelp[i]);
    stages.emplace_back(kStages[i], std::make_unique<StageOptions>(sub));
  }

  CLI11_PARSE(app, argc, argv);

  for (auto& [name, options] : stages)
    if (app.get_subcommand(name)->parsed()) return run(name, *options);
  return 1;
}
