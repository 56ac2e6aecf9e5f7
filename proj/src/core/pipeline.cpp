#include "core/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <memory>
#include <set>

#include "core/llm/http_provider.hpp"
#include "core/llm/transcript.hpp"
#include "core/noise.hpp"
#include "core/optimizer.hpp"
#include "core/prompt.hpp"
#include "core/relabel.hpp"

namespace prof {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

[[noreturn]] void config_error(const std::string& field,
                               const std::string& why) {
  raise(Errc::config, "config field '" + field + "': " + why);
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "dataset", "format", "arity", "expert_count", "expert_source",
      "expert_path", "delta", "alpha_o", "alpha_a", "h_count", "seed", "out",
      "provider", "transcript", "record", "script_file", "model",
      "temperature", "top_p", "max_output_tokens", "n", "rounds",
      "retry_budget", "step_budget", "prompts", "task", "rewards", "reward",
      "scale", "r_min", "r_max", "external_timeout_ms", "http_max_attempts",
      "http_backoff_base_ms", "http_backoff_cap_ms"};
  return keys;
}

std::string get_string(const json& doc, const char* key,
                       const std::string& fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc[key].is_string()) config_error(key, "must be a string");
  return doc[key].get<std::string>();
}

double get_number(const json& doc, const char* key, double fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc[key].is_number()) config_error(key, "must be a number");
  return doc[key].get<double>();
}

int64_t get_integer(const json& doc, const char* key, int64_t fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc[key].is_number_integer()) config_error(key, "must be an integer");
  return doc[key].get<int64_t>();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(Errc::io, "cannot open " + path.string());
  out << text;
  out.flush();
  if (!out) raise(Errc::io, "failed writing " + path.string());
}

void write_json(const fs::path& path, const json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

std::string timestamp_for_dir() {
  std::time_t now = std::time(nullptr);
  std::tm tm_utc;
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm_utc);
  return buf;
}

struct StageEnv {
  RunConfig cfg;
  fs::path out_dir;
};

StageEnv prepare(const json& doc, const std::string& stage) {
  StageEnv env;
  env.cfg = run_config_from_json(doc);
  if (env.cfg.dataset.empty())
    config_error("dataset", "required but missing");
  std::string out = env.cfg.out;
  if (out.empty()) out = "runs/" + timestamp_for_dir() + "-" + stage;
  env.out_dir = out;
  fs::create_directories(env.out_dir);
  return env;
}

struct LoadedData {
  Dataset dataset;
  SplitResult split;
};

LoadedData load_and_split(const RunConfig& cfg) {
  Dataset dataset = load_dataset(cfg.dataset, cfg.format);
  SplitSpec spec{cfg.expert_count, cfg.expert_source, cfg.expert_path};
  SplitResult split = select_expert(dataset, spec);
  return LoadedData{std::move(dataset), std::move(split)};
}

json split_report(const LoadedData& data) {
  json expert_index = json::array();
  for (int64_t idx : data.split.expert_index) expert_index.push_back(idx);
  json expert_returns = json::array();
  for (int64_t i = 0; i < data.split.expert.size(); ++i)
    expert_returns.push_back(compute_return(data.split.expert.at(i)));
  return json{{"dataset",
               {{"count", data.dataset.size()},
                {"obs_dim", data.dataset.obs_dim()},
                {"act_dim", data.dataset.act_dim()},
                {"has_rewards", data.dataset.has_rewards()}}},
              {"expert_count", data.split.expert.size()},
              {"expert_index", std::move(expert_index)},
              {"expert_returns", std::move(expert_returns)}};
}

struct NoiseArtifacts {
  NoisySet noisy;
  int64_t expert_min_index;
};

NoiseArtifacts build_noisy(const RunConfig& cfg, const SplitResult& split) {
  int64_t min_idx = min_return_index(split.expert);
  NoiseConfig noise_cfg{cfg.alpha_o, cfg.alpha_a, cfg.h_count, cfg.seed};
  return NoiseArtifacts{synthesize_noisy(split.expert.at(min_idx), noise_cfg),
                        min_idx};
}

json noise_report(const RunConfig& cfg, const NoiseArtifacts& art,
                  bool with_digest) {
  json sigma_o = json::array();
  for (double s : art.noisy.sigma_o()) sigma_o.push_back(s);
  json sigma_a = json::array();
  for (double s : art.noisy.sigma_a()) sigma_a.push_back(s);
  json out{{"h_count", cfg.h_count},
           {"seed", cfg.seed},
           {"alpha_o", cfg.alpha_o},
           {"alpha_a", cfg.alpha_a},
           {"expert_min_index", art.expert_min_index},
           {"sigma_o", std::move(sigma_o)},
           {"sigma_a", std::move(sigma_a)}};
  if (with_digest) out["digest"] = art.noisy.digest();
  return out;
}

std::unique_ptr<llm::Provider> make_provider(const RunConfig& cfg) {
  if (cfg.provider == "script") {
    if (cfg.script_file.empty())
      config_error("script_file", "required for the script provider");
    return std::make_unique<llm::ScriptProvider>(
        llm::ScriptProvider::from_file(cfg.script_file));
  }
  if (cfg.provider == "replay") {
    if (cfg.transcript.empty())
      config_error("transcript", "required for the replay provider");
    return std::make_unique<llm::ReplayProvider>(cfg.transcript);
  }
  if (cfg.provider == "http") {
    llm::HttpOptions options;
    options.max_attempts = cfg.http_max_attempts;
    options.backoff_base_ms = cfg.http_backoff_base_ms;
    options.backoff_cap_ms = cfg.http_backoff_cap_ms;
    return std::make_unique<llm::HttpProvider>(
        llm::http_provider_from_env(options));
  }
  if (cfg.provider.empty())
    config_error("provider", "required for this stage");
  config_error("provider", "unknown provider '" + cfg.provider + "'");
}

llm::GenerationConfig generation_config(const RunConfig& cfg) {
  llm::GenerationConfig gen;
  gen.temperature = cfg.temperature;
  gen.top_p = cfg.top_p;
  gen.max_output_tokens = cfg.max_output_tokens;
  gen.model = cfg.model;
  if (gen.model.empty()) {
    const char* env_model = std::getenv("PROF_LLM_MODEL");
    if (env_model) gen.model = env_model;
  }
  return gen;
}

ScaleBounds resolve_bounds(const RunConfig& cfg) {
  bool has_explicit = cfg.r_min.has_value() || cfg.r_max.has_value();
  if (!cfg.scale.empty() && has_explicit)
    config_error("scale", "give either a preset or explicit r_min/r_max");
  if (!cfg.scale.empty()) return scale_preset(cfg.scale);
  if (cfg.r_min.has_value() != cfg.r_max.has_value())
    config_error("r_min", "r_min and r_max must be given together");
  if (cfg.r_min.has_value()) {
    if (!(*cfg.r_min < *cfg.r_max))
      config_error("r_min", "must be strictly below r_max");
    return ScaleBounds{*cfg.r_min, *cfg.r_max};
  }
  return ScaleBounds{0.0, 1.0};
}

// --- stages -------------------------------------------------------------

json stage_split(const StageEnv& env) {
  LoadedData data = load_and_split(env.cfg);
  json report = split_report(data);
  write_json(env.out_dir / "split.json", report);
  save_dataset(data.split.expert, env.out_dir / "expert.bin",
               DatasetFormat::kBinaryV1);
  report["out"] = env.out_dir.string();
  return report;
}

json stage_noise(const StageEnv& env) {
  LoadedData data = load_and_split(env.cfg);
  NoiseArtifacts art = build_noisy(env.cfg, data.split);
  json report = noise_report(env.cfg, art, true);
  write_json(env.out_dir / "noise.json", report);
  save_dataset(Dataset(art.noisy.trajectories()), env.out_dir / "noisy.bin",
               DatasetFormat::kBinaryV1);
  report["out"] = env.out_dir.string();
  return report;
}

json stage_score(const StageEnv& env) {
  if (env.cfg.rewards.empty())
    config_error("rewards", "score needs at least one reward file");
  LoadedData data = load_and_split(env.cfg);
  NoiseArtifacts art = build_noisy(env.cfg, data.split);
  RprConfig rpr{env.cfg.delta};

  json aggregate = json::array();
  json returned = json::array();
  for (size_t i = 0; i < env.cfg.rewards.size(); ++i) {
    const std::string& path = env.cfg.rewards[i];
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::io, "cannot open reward file " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    CompiledReward reward =
        parse_reward(RewardSource{text, env.cfg.arity}, data.dataset.obs_dim(),
                     data.dataset.act_dim(), env.cfg.step_budget);
    DominanceReport report =
        dominance_score(reward, data.split.offline, data.split.expert,
                        art.noisy, rpr);
    json persisted = report_to_json(int(i), report, false);
    persisted["source"] = path;
    write_json(env.out_dir / ("score_" + std::to_string(i) + ".json"),
               persisted);
    aggregate.push_back(persisted);
    json live = report_to_json(int(i), report, true);
    live["source"] = path;
    returned.push_back(std::move(live));
  }
  write_json(env.out_dir / "scores.json", aggregate);
  return json{{"reports", std::move(returned)},
              {"out", env.out_dir.string()}};
}

// Writes one optimization round's artifacts under round_<t>/slot_<j>/.
void persist_round(const fs::path& out_dir, const RoundOutcome& round) {
  fs::path round_dir = out_dir / ("round_" + std::to_string(round.round));
  for (const auto& slot : round.slots) {
    fs::path slot_dir = round_dir / ("slot_" + std::to_string(slot.slot));
    fs::create_directories(slot_dir);
    if (!slot.loss_prompt.empty())
      write_text(slot_dir / "loss.txt", slot.loss_prompt);
    if (!slot.grad_prompt.empty())
      write_text(slot_dir / "grad.txt", slot.grad_prompt);
    if (!slot.update_prompt.empty())
      write_text(slot_dir / "update.txt", slot.update_prompt);
    write_text(slot_dir / "response.txt", slot.response_text);
    if (slot.accepted) {
      write_text(slot_dir / "candidate.rw", slot.candidate_source);
      write_json(slot_dir / "score.json",
                 report_to_json(*slot.entry_id, *slot.report, false));
    }
  }
}

json summarize(const RunConfig& cfg, const LoadedData& data,
               const NoiseArtifacts& art, const OptimizeResult& result) {
  json entries = json::array();
  for (const auto& entry : result.buffer) {
    json e = report_to_json(entry.id, entry.report, false);
    e["round"] = entry.round;
    e["slot"] = entry.slot;
    entries.push_back(std::move(e));
  }
  json rounds = json::array();
  for (const auto& round : result.rounds) {
    json slots = json::array();
    for (const auto& slot : round.slots) {
      json s{{"slot", slot.slot},
             {"accepted", slot.accepted},
             {"attempts", slot.attempts}};
      s["entry_id"] = slot.entry_id ? json(*slot.entry_id) : json(nullptr);
      if (!slot.failure.empty()) s["failure"] = slot.failure;
      slots.push_back(std::move(s));
    }
    json r{{"round", round.round},
           {"degraded", round.degraded},
           {"slots", std::move(slots)}};
    r["chosen_id"] = round.chosen_id >= 0 ? json(round.chosen_id) : json(nullptr);
    r["rejected_id"] =
        round.rejected_id >= 0 ? json(round.rejected_id) : json(nullptr);
    rounds.push_back(std::move(r));
  }

  double best_score = 0.0;
  for (const auto& entry : result.buffer)
    if (entry.id == result.best_id) best_score = entry.report.score;

  json expert_index = json::array();
  for (int64_t idx : data.split.expert_index) expert_index.push_back(idx);

  return json{
      {"task", cfg.task},
      {"arity", arity_name(cfg.arity)},
      {"n", cfg.n},
      {"rounds", cfg.rounds},
      {"delta", cfg.delta},
      {"noise", noise_report(cfg, art, true)},
      {"expert_index", std::move(expert_index)},
      {"entries", std::move(entries)},
      {"round_log", std::move(rounds)},
      {"best_id", result.best_id},
      {"best_score", best_score},
      {"usage",
       {{"requests", result.usage.requests},
        {"prompt_tokens", result.usage.prompt_tokens},
        {"completion_tokens", result.usage.completion_tokens}}},
  };
}

struct OptimizeArtifacts {
  json summary;
  std::string best_source;
};

OptimizeArtifacts run_optimize(const StageEnv& env) {
  const RunConfig& cfg = env.cfg;
  if (cfg.task.empty()) config_error("task", "required for optimization");
  LoadedData data = load_and_split(cfg);
  NoiseArtifacts art = build_noisy(cfg, data.split);

  PromptBundle bundle = load_prompt_bundle(cfg.prompts, cfg.task, cfg.arity);
  PromptTemplates templates = load_prompt_templates(cfg.prompts);

  std::unique_ptr<llm::Provider> provider = make_provider(cfg);
  std::unique_ptr<llm::TranscriptWriter> recorder;
  std::unique_ptr<llm::RecordingProvider> recording;
  llm::Provider* active = provider.get();
  if (!cfg.record.empty()) {
    recorder = std::make_unique<llm::TranscriptWriter>(cfg.record);
    recording = std::make_unique<llm::RecordingProvider>(*provider, *recorder);
    active = recording.get();
  }

  OptimizeConfig opt;
  opt.n = cfg.n;
  opt.rounds = cfg.rounds;
  opt.retry_budget = cfg.retry_budget;
  opt.rpr = RprConfig{cfg.delta};
  opt.gen = generation_config(cfg);
  opt.arity = cfg.arity;
  opt.step_budget = cfg.step_budget;

  OptimizeResult result = optimize(
      *active, bundle, templates, data.split.offline, data.split.expert,
      art.noisy, opt,
      [&](const RoundOutcome& round) { persist_round(env.out_dir, round); });

  OptimizeArtifacts artifacts;
  artifacts.summary = summarize(cfg, data, art, result);
  for (const auto& entry : result.buffer)
    if (entry.id == result.best_id) artifacts.best_source = entry.source.text;
  write_json(env.out_dir / "summary.json", artifacts.summary);
  write_text(env.out_dir / "best.rw", artifacts.best_source);
  return artifacts;
}

json stage_optimize(const StageEnv& env) {
  OptimizeArtifacts artifacts = run_optimize(env);
  json report = artifacts.summary;
  report["out"] = env.out_dir.string();
  return report;
}

json relabel_with(const StageEnv& env, const std::string& reward_text,
                  const Dataset& dataset) {
  CompiledReward reward =
      parse_reward(RewardSource{reward_text, env.cfg.arity}, dataset.obs_dim(),
                   dataset.act_dim(), env.cfg.step_budget);
  auto raw = relabel(dataset, reward);
  double raw_min = raw[0][0], raw_max = raw[0][0];
  int64_t transitions = 0;
  for (const auto& traj : raw)
    for (double r : traj) {
      raw_min = std::min(raw_min, r);
      raw_max = std::max(raw_max, r);
      ++transitions;
    }
  ScaleBounds bounds = resolve_bounds(env.cfg);
  auto scaled = rescale(raw, bounds);
  Dataset labeled = with_rewards(dataset, scaled);

  DatasetFormat out_format = env.cfg.format;
  if (out_format == DatasetFormat::kAuto) {
    // Mirror the input container.
    std::ifstream probe(env.cfg.dataset, std::ios::binary);
    char magic[6] = {};
    probe.read(magic, 6);
    out_format = probe.gcount() == 6 && std::string(magic, 6) == "PTDS1\n"
                     ? DatasetFormat::kBinaryV1
                     : DatasetFormat::kTextLines;
  }
  fs::path out_path =
      env.out_dir / (out_format == DatasetFormat::kBinaryV1 ? "labeled.bin"
                                                            : "labeled.jsonl");
  save_dataset(labeled, out_path, out_format);

  json report{{"transitions", transitions},
              {"raw_min", raw_min},
              {"raw_max", raw_max},
              {"r_min", bounds.r_min},
              {"r_max", bounds.r_max},
              {"output", out_path.filename().string()}};
  write_json(env.out_dir / "relabel.json", report);
  return report;
}

json stage_relabel(const StageEnv& env) {
  if (env.cfg.reward.empty())
    config_error("reward", "relabel needs a reward file");
  std::ifstream in(env.cfg.reward, std::ios::binary);
  if (!in) raise(Errc::io, "cannot open reward file " + env.cfg.reward);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  Dataset dataset = load_dataset(env.cfg.dataset, env.cfg.format);
  json report = relabel_with(env, text, dataset);
  report["out"] = env.out_dir.string();
  return report;
}

json stage_run(const StageEnv& env) {
  LoadedData data = load_and_split(env.cfg);
  write_json(env.out_dir / "split.json", split_report(data));
  OptimizeArtifacts artifacts = run_optimize(env);
  json relabel_part = relabel_with(env, artifacts.best_source, data.dataset);
  json report{{"summary", artifacts.summary},
              {"relabel", std::move(relabel_part)},
              {"out", env.out_dir.string()}};
  return report;
}

}  // namespace

RunConfig run_config_from_json(const json& doc) {
  if (!doc.is_object()) raise(Errc::config, "config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!known_keys().count(key))
      config_error(key, "unknown configuration key");
  }

  RunConfig cfg;
  cfg.dataset = get_string(doc, "dataset", "");
  cfg.format = dataset_format_from_name(get_string(doc, "format", "auto"));
  cfg.arity = arity_from_name(get_string(doc, "arity", "sas"));

  cfg.expert_count = get_integer(doc, "expert_count", 1);
  if (cfg.expert_count < 1) config_error("expert_count", "must be >= 1");
  std::string source =
      get_string(doc, "expert_source", "by-highest-return");
  if (source == "by-highest-return") {
    cfg.expert_source = ExpertSource::kByHighestReturn;
  } else if (source == "external-file") {
    cfg.expert_source = ExpertSource::kExternalFile;
  } else {
    config_error("expert_source",
                 "must be by-highest-return or external-file");
  }
  cfg.expert_path = get_string(doc, "expert_path", "");
  if (cfg.expert_source == ExpertSource::kExternalFile &&
      cfg.expert_path.empty())
    config_error("expert_path", "required when expert_source is external-file");

  cfg.delta = get_number(doc, "delta", 0.01);
  if (!(cfg.delta >= 0.0 && cfg.delta <= 1.0))
    config_error("delta", "must lie in [0, 1]");
  cfg.alpha_o = get_number(doc, "alpha_o", 0.05);
  cfg.alpha_a = get_number(doc, "alpha_a", 0.05);
  if (cfg.alpha_o < 0.0) config_error("alpha_o", "must be >= 0");
  if (cfg.alpha_a < 0.0) config_error("alpha_a", "must be >= 0");
  cfg.h_count = get_integer(doc, "h_count", 10000);
  if (cfg.h_count < 1) config_error("h_count", "must be >= 1");
  int64_t seed = get_integer(doc, "seed", 0);
  cfg.seed = uint64_t(seed);

  cfg.out = get_string(doc, "out", "");
  cfg.provider = get_string(doc, "provider", "");
  cfg.transcript = get_string(doc, "transcript", "");
  cfg.record = get_string(doc, "record", "");
  cfg.script_file = get_string(doc, "script_file", "");
  cfg.model = get_string(doc, "model", "");

  cfg.temperature = get_number(doc, "temperature", 0.7);
  if (cfg.temperature < 0.0) config_error("temperature", "must be >= 0");
  cfg.top_p = get_number(doc, "top_p", 1.0);
  if (!(cfg.top_p > 0.0 && cfg.top_p <= 1.0))
    config_error("top_p", "must lie in (0, 1]");
  cfg.max_output_tokens = int32_t(get_integer(doc, "max_output_tokens", 10000));
  if (cfg.max_output_tokens < 1)
    config_error("max_output_tokens", "must be >= 1");

  cfg.n = int(get_integer(doc, "n", 5));
  if (cfg.n < 1) config_error("n", "must be >= 1");
  cfg.rounds = int(get_integer(doc, "rounds", 1));
  if (cfg.rounds < 0) config_error("rounds", "must be >= 0");
  cfg.retry_budget = int(get_integer(doc, "retry_budget", 2));
  if (cfg.retry_budget < 0) config_error("retry_budget", "must be >= 0");
  cfg.step_budget = int32_t(get_integer(doc, "step_budget", kDefaultStepBudget));
  if (cfg.step_budget < 1) config_error("step_budget", "must be >= 1");

  cfg.prompts = get_string(doc, "prompts", "prompts");
  cfg.task = get_string(doc, "task", "");

  if (doc.contains("rewards")) {
    if (!doc["rewards"].is_array())
      config_error("rewards", "must be an array of file paths");
    for (const auto& item : doc["rewards"]) {
      if (!item.is_string())
        config_error("rewards", "must be an array of file paths");
      cfg.rewards.push_back(item.get<std::string>());
    }
  }
  cfg.reward = get_string(doc, "reward", "");
  cfg.scale = get_string(doc, "scale", "");
  if (doc.contains("r_min")) cfg.r_min = get_number(doc, "r_min", 0.0);
  if (doc.contains("r_max")) cfg.r_max = get_number(doc, "r_max", 0.0);

  cfg.external_timeout_ms = int(get_integer(doc, "external_timeout_ms", 5000));
  if (cfg.external_timeout_ms < 1)
    config_error("external_timeout_ms", "must be >= 1");
  cfg.http_max_attempts = int(get_integer(doc, "http_max_attempts", 5));
  if (cfg.http_max_attempts < 1)
    config_error("http_max_attempts", "must be >= 1");
  cfg.http_backoff_base_ms =
      int(get_integer(doc, "http_backoff_base_ms", 1000));
  cfg.http_backoff_cap_ms = int(get_integer(doc, "http_backoff_cap_ms", 30000));
  if (cfg.http_backoff_base_ms < 0)
    config_error("http_backoff_base_ms", "must be >= 0");
  if (cfg.http_backoff_cap_ms < cfg.http_backoff_base_ms)
    config_error("http_backoff_cap_ms", "must be >= http_backoff_base_ms");
  return cfg;
}

json report_to_json(int id, const DominanceReport& report, bool with_wall_ms) {
  json out{{"id", id},
           {"lambda", report.lambda},
           {"frac_offline", report.frac_offline},
           {"frac_noisy", report.frac_noisy},
           {"score", report.score},
           {"valid", report.valid}};
  out["failure"] =
      report.failure ? json(eval_error_name(*report.failure)) : json(nullptr);
  if (with_wall_ms) out["wall_ms"] = report.wall_ms;
  return out;
}

json run_stage(const std::string& stage, const json& doc) {
  StageEnv env = prepare(doc, stage);
  if (stage == "split") return stage_split(env);
  if (stage == "noise") return stage_noise(env);
  if (stage == "score") return stage_score(env);
  if (stage == "optimize") return stage_optimize(env);
  if (stage == "relabel") return stage_relabel(env);
  if (stage == "run") return stage_run(env);
  raise(Errc::config, "unknown stage '" + stage + "'");
}

}  // namespace prof
