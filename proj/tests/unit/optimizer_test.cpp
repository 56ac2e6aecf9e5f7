#include <doctest.h>

#include <optional>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/noise.hpp"
#include "core/optimizer.hpp"
#include "core/prompt.hpp"
#include "core/trajectory.hpp"
#include "support/rpr_oracle.hpp"
#include "support/testutil.hpp"

using namespace prof;
using namespace proftest;

namespace {

// obs_dim 1, act_dim 1, one transition: states rows {first, second}.
Trajectory line_trajectory(float first, float second) {
  return Trajectory::matrix_form(1, 1, {first, second}, {0.0f}, {});
}

struct Scenario {
  Dataset offline;
  Dataset expert;
  NoisySet noisy;

  Scenario()
      : offline(std::vector<Trajectory>{line_trajectory(1.0f, 1.5f),
                                        line_trajectory(2.0f, 2.5f)}),
        expert(std::vector<Trajectory>{line_trajectory(10.0f, 12.0f)}),
        noisy(std::vector<Trajectory>{line_trajectory(3.0f, 3.5f),
                                      line_trajectory(4.0f, 4.5f)},
              {0.1}, {0.1}, NoiseConfig{}) {}
};

PromptBundle test_bundle() { return PromptBundle{"GENERAL", "TASK"}; }

// Records every request that reaches the underlying provider.
class CapturingProvider : public llm::Provider {
 public:
  explicit CapturingProvider(llm::Provider& inner) : inner_(inner) {}
  llm::Completion complete(const std::vector<llm::ChatMessage>& messages,
                           const llm::GenerationConfig& config) override {
    requests.push_back(messages);
    return inner_.complete(messages, config);
  }
  const char* kind() const override { return inner_.kind(); }

  std::vector<std::vector<llm::ChatMessage>> requests;

 private:
  llm::Provider& inner_;
};

OptimizeConfig basic_config(int n, int rounds, int retry_budget = 0) {
  OptimizeConfig config;
  config.n = n;
  config.rounds = rounds;
  config.retry_budget = retry_budget;
  config.gen.model = "scripted";
  return config;
}

OracleDominance oracle_for(const Scenario& s, const std::string& source) {
  auto compiled = parse_reward(RewardSource{source, Arity::kSas}, 1, 1);
  return oracle_dominance(compiled, s.offline, s.expert,
                          s.noisy.trajectories(), 0.01);
}

}  // namespace

TEST_CASE("one full refinement round with a scripted provider") {
  Scenario s;
  PromptTemplates templates = load_prompt_templates(PROF_PROMPTS_DIR);
  llm::ScriptProvider script({
      fenced_response("return obs[0];\n"),
      fenced_response("return 0 - obs[0];\n"),
      "analysis A",
      "feedback A",
      fenced_response("return obs[0] + next[0];\n"),
      "analysis B",
      "feedback B",
      fenced_response("return obs[0] * 2;\n"),
  });
  CapturingProvider capture(script);

  std::vector<int> sink_rounds;
  OptimizeResult result = optimize(
      capture, test_bundle(), templates, s.offline, s.expert, s.noisy,
      basic_config(2, 1),
      [&](const RoundOutcome& round) { sink_rounds.push_back(round.round); });

  REQUIRE(result.buffer.size() == 4);
  CHECK(result.buffer[0].id == 0);
  CHECK(result.buffer[1].id == 1);
  CHECK(result.buffer[2].id == 2);
  CHECK(result.buffer[3].id == 3);
  CHECK(result.buffer[0].round == 0);
  CHECK(result.buffer[1].round == 0);
  CHECK(result.buffer[2].round == 1);
  CHECK(result.buffer[3].round == 1);
  CHECK(result.buffer[2].slot == 0);
  CHECK(result.buffer[3].slot == 1);

  SUBCASE("scores equal the brute-force oracle") {
    for (const auto& entry : result.buffer) {
      OracleDominance want = oracle_for(s, entry.source.text);
      CAPTURE(entry.source.text);
      REQUIRE(entry.report.valid == want.valid);
      CHECK(entry.report.lambda == want.lambda);
      CHECK(entry.report.offline_below == want.offline_below);
      CHECK(entry.report.noisy_below == want.noisy_below);
      CHECK(entry.report.score == want.score);
    }
    CHECK(result.buffer[0].report.score == 1.0);
    CHECK(result.buffer[1].report.score == 0.0);
  }

  SUBCASE("the preference pair is best versus worst by score") {
    REQUIRE(result.rounds.size() == 2);
    CHECK(result.rounds[0].round == 0);
    CHECK(result.rounds[0].chosen_id == -1);
    CHECK(!result.rounds[0].degraded);
    CHECK(result.rounds[1].chosen_id == 0);
    CHECK(result.rounds[1].rejected_id == 1);
    CHECK(!result.rounds[1].degraded);
  }

  SUBCASE("every candidate scored 1.0 ties resolve to the earliest id") {
    CHECK(result.buffer[2].report.score == 1.0);
    CHECK(result.buffer[3].report.score == 1.0);
    CHECK(result.best_id == 0);
  }

  SUBCASE("the chain prompts are rendered from the chosen and rejected sources") {
    const RoundOutcome& round = result.rounds[1];
    REQUIRE(round.slots.size() == 2);
    const std::string query = "GENERAL\nTASK";
    std::string expected_loss = render_loss(templates, query,
                                            result.buffer[0].source.text,
                                            result.buffer[1].source.text);
    CHECK(round.slots[0].loss_prompt == expected_loss);
    CHECK(round.slots[1].loss_prompt == expected_loss);
    CHECK(round.slots[0].loss_response == "analysis A");
    CHECK(round.slots[1].loss_response == "analysis B");
    CHECK(round.slots[0].grad_prompt ==
          render_grad(templates, "analysis A"));
    CHECK(round.slots[0].grad_response == "feedback A");
    CHECK(round.slots[0].update_prompt ==
          render_update(templates, "feedback A",
                        result.buffer[0].source.text));
    CHECK(round.slots[1].update_prompt ==
          render_update(templates, "feedback B",
                        result.buffer[0].source.text));
    CHECK(round.slots[0].accepted);
    CHECK(round.slots[0].entry_id == 2);
    CHECK(round.slots[1].entry_id == 3);
  }

  SUBCASE("the provider saw the requests in chain order") {
    REQUIRE(capture.requests.size() == 8);
    for (size_t i : {size_t(0), size_t(1)}) {
      REQUIRE(capture.requests[i].size() == 1);
      CHECK(capture.requests[i][0].role == "user");
      CHECK(capture.requests[i][0].content == "GENERAL\nTASK");
    }
    CHECK(capture.requests[2][0].content == result.rounds[1].slots[0].loss_prompt);
    CHECK(capture.requests[3][0].content == result.rounds[1].slots[0].grad_prompt);
    CHECK(capture.requests[4][0].content == result.rounds[1].slots[0].update_prompt);
    CHECK(capture.requests[5][0].content == result.rounds[1].slots[1].loss_prompt);
    CHECK(capture.requests[6][0].content == result.rounds[1].slots[1].grad_prompt);
    CHECK(capture.requests[7][0].content == result.rounds[1].slots[1].update_prompt);
  }

  SUBCASE("bookkeeping") {
    CHECK(result.usage.requests == 8);
    CHECK(sink_rounds == std::vector<int>{0, 1});
  }
}

TEST_CASE("rounds of zero mean generation only") {
  Scenario s;
  PromptTemplates templates = load_prompt_templates(PROF_PROMPTS_DIR);
  llm::ScriptProvider script({
      fenced_response("return obs[0];\n"),
      fenced_response("return obs[0] - 1;\n"),
      fenced_response("return 0 - obs[0];\n"),
  });
  OptimizeResult result = optimize(script, test_bundle(), templates, s.offline,
                                   s.expert, s.noisy, basic_config(3, 0));
  CHECK(result.rounds.size() == 1);
  CHECK(result.buffer.size() == 3);
  CHECK(result.usage.requests == 3);
  CHECK(result.best_id == 0);
  CHECK(script.remaining() == 0);
}

TEST_CASE("a buffer with fewer than two valid entries degrades to fresh sampling") {
  Scenario s;
  PromptTemplates templates = load_prompt_templates(PROF_PROMPTS_DIR);
  llm::ScriptProvider script({
      "no code at all",                       // slot 0 dies (retry 0)
      fenced_response("return obs[0];\n"),    // slot 1 -> id 0
      fenced_response("return obs[0] * 2;\n"),  // degraded round, slot 0 -> id 1
      fenced_response("return obs[0] * 4;\n"),  // degraded round, slot 1 -> id 2
  });
  CapturingProvider capture(script);
  OptimizeResult result = optimize(capture, test_bundle(), templates,
                                   s.offline, s.expert, s.noisy,
                                   basic_config(2, 1));
  REQUIRE(result.rounds.size() == 2);
  CHECK(!result.rounds[0].slots[0].accepted);
  CHECK(result.rounds[0].slots[0].failure.find("extraction") !=
        std::string::npos);
  CHECK(result.rounds[1].degraded);
  CHECK(result.rounds[1].chosen_id == -1);
  CHECK(result.rounds[1].rejected_id == -1);
  REQUIRE(result.buffer.size() == 3);
  CHECK(result.buffer[1].round == 1);
  // Degraded rounds reuse the plain generation prompt.
  REQUIRE(capture.requests.size() == 4);
  CHECK(capture.requests[2][0].content == "GENERAL\nTASK");
  CHECK(capture.requests[3][0].content == "GENERAL\nTASK");
  // Chain fields stay empty in a degraded round.
  CHECK(result.rounds[1].slots[0].loss_prompt.empty());
  CHECK(result.rounds[1].slots[0].accepted);
}

TEST_CASE("update responses that do not compile are retried then reported") {
  Scenario s;
  PromptTemplates templates = load_prompt_templates(PROF_PROMPTS_DIR);
  llm::ScriptProvider script({
      fenced_response("return obs[0];\n"),
      fenced_response("return 0 - obs[0];\n"),
      "analysis A",
      "feedback A",
      "still thinking, no code",                  // update attempt 1
      fenced_response("return obs[0] + 1;\n"),    // update attempt 2
      "analysis B",
      "feedback B",
      "nope",                                     // slot 1 exhausts both
      fenced_response("return obs[() bad syntax\n"),
  });
  OptimizeResult result = optimize(script, test_bundle(), templates, s.offline,
                                   s.expert, s.noisy, basic_config(2, 1, 1));
  REQUIRE(result.rounds.size() == 2);
  const RoundOutcome& round = result.rounds[1];
  REQUIRE(round.slots.size() == 2);
  CHECK(round.slots[0].accepted);
  CHECK(round.slots[0].attempts == 2);
  CHECK(round.slots[0].entry_id == 2);
  CHECK(!round.slots[1].accepted);
  CHECK(round.slots[1].attempts == 2);
  CHECK(round.slots[1].failure.find("parse") != std::string::npos);
  CHECK(result.buffer.size() == 3);
  CHECK(script.remaining() == 0);
}

TEST_CASE("no scoreable initial candidate is fatal") {
  Scenario s;
  PromptTemplates templates = load_prompt_templates(PROF_PROMPTS_DIR);

  SUBCASE("nothing compiles") {
    llm::ScriptProvider script({"word salad", "more salad"});
    try {
      optimize(script, test_bundle(), templates, s.offline, s.expert, s.noisy,
               basic_config(2, 0));
      FAIL("expected no_valid_candidates");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::no_valid_candidates);
    }
  }

  SUBCASE("everything compiles but nothing scores") {
    llm::ScriptProvider script({
        fenced_response("return log(0 - 1 - sq(obs[0]));\n"),
    });
    try {
      optimize(script, test_bundle(), templates, s.offline, s.expert, s.noisy,
               basic_config(1, 0));
      FAIL("expected no_valid_candidates");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::no_valid_candidates);
    }
  }
}

TEST_CASE("optimizer argument and provider failures") {
  Scenario s;
  PromptTemplates templates = load_prompt_templates(PROF_PROMPTS_DIR);

  SUBCASE("bad n and rounds") {
    llm::ScriptProvider script({});
    CHECK_THROWS_AS(optimize(script, test_bundle(), templates, s.offline,
                             s.expert, s.noisy, basic_config(0, 1)),
                    Error);
    CHECK_THROWS_AS(optimize(script, test_bundle(), templates, s.offline,
                             s.expert, s.noisy, basic_config(1, -1)),
                    Error);
  }

  SUBCASE("script exhaustion mid-chain propagates") {
    llm::ScriptProvider script({
        fenced_response("return obs[0];\n"),
        fenced_response("return 0 - obs[0];\n"),
        "analysis A",  // then the grad call has nothing to pop
    });
    try {
      optimize(script, test_bundle(), templates, s.offline, s.expert, s.noisy,
               basic_config(2, 1));
      FAIL("expected script_exhausted");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::script_exhausted);
    }
  }
}
