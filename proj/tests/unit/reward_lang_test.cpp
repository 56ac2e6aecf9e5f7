#include <doctest.h>

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/reward/reward.hpp"
#include "support/expr_gen.hpp"
#include "support/reference_eval.hpp"
#include "support/testutil.hpp"

using namespace prof;
using namespace proftest;

namespace {

Errc thrown_code(const std::string& text, Arity arity, int32_t obs_dim,
                 int32_t act_dim) {
  try {
    parse_reward(RewardSource{text, arity}, obs_dim, act_dim);
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::ok;
}

EvalOutcome eval_text(const std::string& text, std::vector<double> obs,
                      std::vector<double> act, std::vector<double> next,
                      Arity arity = Arity::kSas,
                      int32_t step_budget = kDefaultStepBudget) {
  auto compiled = parse_reward(RewardSource{text, arity}, int32_t(obs.size()),
                               int32_t(act.size()), step_budget);
  return compiled.evaluate(obs, act, next);
}

bool close(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

TEST_CASE("random programs agree with the reference evaluator") {
  std::mt19937_64 rng(20240811);
  const GenConfig configs[] = {
      {6, 3, Arity::kSas, 6, 3},
      {5, 0, Arity::kSs, 6, 2},
      {17, 6, Arity::kSas, 5, 4},
  };

  int mismatches = 0;
  std::string first_bad;
  for (int iter = 0; iter < 10000; ++iter) {
    const GenConfig& cfg = configs[iter % 3];
    GeneratedProgram gen = generate_program(rng, cfg);
    std::optional<CompiledReward> compiled;
    try {
      compiled =
          parse_reward(RewardSource{gen.text, cfg.arity}, cfg.obs_dim, cfg.act_dim);
    } catch (const Error& e) {
      ++mismatches;
      if (first_bad.empty())
        first_bad = "did not parse (" + std::string(e.what()) + "):\n" + gen.text;
      continue;
    }
    for (int rep = 0; rep < 2; ++rep) {
      std::vector<double> obs = random_inputs(rng, cfg.obs_dim);
      std::vector<double> act = random_inputs(rng, cfg.act_dim);
      std::vector<double> next = random_inputs(rng, cfg.obs_dim);
      EvalOutcome want = reference_eval(gen.ast, obs, act, next);
      EvalOutcome got = compiled->evaluate(obs, act, next);
      bool same;
      if (want.ok() != got.ok()) {
        same = false;
      } else if (want.ok()) {
        same = close(want.value(), got.value());
      } else {
        same = want.error_kind() == got.error_kind();
      }
      if (!same) {
        ++mismatches;
        if (first_bad.empty()) first_bad = "outcome mismatch for:\n" + gen.text;
      }
    }
  }
  INFO(first_bad);
  CHECK(mismatches == 0);
}

TEST_CASE("render round-trips to a fixed point and preserves values") {
  std::mt19937_64 rng(777);
  GenConfig cfg;  // 6/3 sas
  int bad = 0;
  std::string first_bad;
  for (int iter = 0; iter < 2000; ++iter) {
    GeneratedProgram gen = generate_program(rng, cfg);
    auto c1 = parse_reward(RewardSource{gen.text, cfg.arity}, cfg.obs_dim,
                           cfg.act_dim);
    std::string r1 = c1.render();
    auto c2 = parse_reward(RewardSource{r1, cfg.arity}, cfg.obs_dim, cfg.act_dim);
    std::string r2 = c2.render();
    if (r1 != r2) {
      ++bad;
      if (first_bad.empty())
        first_bad = "render not idempotent:\n--- first\n" + r1 + "--- second\n" + r2;
      continue;
    }
    std::vector<double> obs = random_inputs(rng, cfg.obs_dim);
    std::vector<double> act = random_inputs(rng, cfg.act_dim);
    std::vector<double> next = random_inputs(rng, cfg.obs_dim);
    EvalOutcome a = c1.evaluate(obs, act, next);
    EvalOutcome b = c2.evaluate(obs, act, next);
    bool same = a.ok() == b.ok() &&
                (a.ok() ? a.value() == b.value()
                        : a.error_kind() == b.error_kind());
    if (!same) {
      ++bad;
      if (first_bad.empty()) first_bad = "round-trip changed semantics:\n" + r1;
    }
  }
  INFO(first_bad);
  CHECK(bad == 0);
}

TEST_CASE("fixture rewards parse and evaluate cleanly") {
  struct Fixture {
    const char* file;
    int32_t obs_dim;
    int32_t act_dim;
    Arity arity;
  };
  const Fixture fixtures[] = {
      {"rewards/walker.rw", 17, 6, Arity::kSas},
      {"rewards/maze.rw", 4, 0, Arity::kSs},
      {"rewards/door.rw", 39, 28, Arity::kSas},
  };
  std::mt19937_64 rng(5150);
  for (const Fixture& f : fixtures) {
    CAPTURE(f.file);
    std::string text =
        read_file(std::filesystem::path(PROF_FIXTURES_DIR) / f.file);
    REQUIRE(!text.empty());
    auto compiled =
        parse_reward(RewardSource{text, f.arity}, f.obs_dim, f.act_dim);
    CHECK(!compiled.render().empty());
    int failures = 0;
    for (int rep = 0; rep < 100; ++rep) {
      std::vector<double> obs = random_inputs(rng, f.obs_dim);
      std::vector<double> act = random_inputs(rng, f.act_dim);
      std::vector<double> next = random_inputs(rng, f.obs_dim);
      if (!compiled.evaluate(obs, act, next).ok()) ++failures;
    }
    CHECK(failures == 0);
  }
}

TEST_CASE("evaluation semantics on hand-picked programs") {
  std::vector<double> obs = {1.0, -2.0, 0.5};
  std::vector<double> act = {0.25, -0.5};
  std::vector<double> next = {2.0, 3.0, -1.0};

  SUBCASE("arithmetic, precedence and power") {
    CHECK(eval_text("return 2 + 3 * 4;", obs, act, next).value() == 14.0);
    CHECK(eval_text("return 2 ^ 3 ^ 2;", obs, act, next).value() == 512.0);
    CHECK(eval_text("return -2 ^ 2;", obs, act, next).value() == -4.0);
    CHECK(eval_text("return 2 ^ -1;", obs, act, next).value() == 0.5);
    CHECK(eval_text("return (2 ^ 3) ^ 2;", obs, act, next).value() == 64.0);
    CHECK(eval_text("return 7 - 4 - 2;", obs, act, next).value() == 1.0);
  }

  SUBCASE("inputs and lets") {
    CHECK(eval_text("return obs[1];", obs, act, next).value() == -2.0);
    CHECK(eval_text("return act[1];", obs, act, next).value() == -0.5);
    CHECK(eval_text("return next[2];", obs, act, next).value() == -1.0);
    CHECK(eval_text("let a = obs[0]; let b = a * 2; return a + b;", obs, act,
                    next)
              .value() == 3.0);
    // Bool-typed lets are allowed as long as the result is numeric.
    CHECK(eval_text("let ok = obs[0] > 0; return if ok then 5 else 6;", obs,
                    act, next)
              .value() == 5.0);
  }

  SUBCASE("conditionals and logic") {
    CHECK(eval_text("return if obs[0] >= 1 and not (obs[1] > 0) then 1 else 0;",
                    obs, act, next)
              .value() == 1.0);
    CHECK(eval_text("return if obs[0] < 0 or obs[1] < 0 then 3 else 4;", obs,
                    act, next)
              .value() == 3.0);
    // The untaken branch may not even be evaluable; it must be skipped.
    CHECK(eval_text("return if obs[0] > 0 then 1 else log(0 - 1);", obs, act,
                    next)
              .value() == 1.0);
    CHECK(eval_text("return if obs[0] > 0 or log(0 - 1) > 0 then 2 else 3;",
                    obs, act, next)
              .value() == 2.0);
  }

  SUBCASE("builtins") {
    CHECK(eval_text("return abs(obs[1]);", obs, act, next).value() == 2.0);
    CHECK(eval_text("return sq(obs[1]);", obs, act, next).value() == 4.0);
    CHECK(eval_text("return clip(obs[0], -0.5, 0.5);", obs, act, next).value() ==
          0.5);
    CHECK(eval_text("return min(3, 1, 2);", obs, act, next).value() == 1.0);
    CHECK(eval_text("return max(next[0:3]);", obs, act, next).value() == 3.0);
    CHECK(eval_text("return min(next[0:3]);", obs, act, next).value() == -1.0);
    CHECK(eval_text("return sum(obs[0:3]);", obs, act, next).value() == -0.5);
    CHECK(eval_text("return norm1(obs[0:3]);", obs, act, next).value() == 3.5);
    CHECK(close(eval_text("return norm2(next[0:2]);", obs, act, next).value(),
                std::sqrt(13.0)));
    CHECK(eval_text("return dot(obs[0:2], next[0:2]);", obs, act, next)
              .value() == -4.0);
    CHECK(close(eval_text("return tanh(obs[0]);", obs, act, next).value(),
                std::tanh(1.0)));
  }

  SUBCASE("bare expression and optional return semicolon") {
    CHECK(eval_text("obs[0] + 1", obs, act, next).value() == 2.0);
    CHECK(eval_text("return obs[0] + 1", obs, act, next).value() == 2.0);
    auto compiled = parse_reward(RewardSource{"obs[0] + 1", Arity::kSas}, 3, 2);
    CHECK(compiled.render() == "return obs[0] + 1;\n");
  }
}

TEST_CASE("static errors carry the right code") {
  struct Case {
    const char* text;
    Arity arity;
    int32_t obs_dim;
    int32_t act_dim;
    Errc want;
  };
  const Case cases[] = {
      // Syntax.
      {"", Arity::kSas, 3, 2, Errc::parse},
      {"return 1.0 +;", Arity::kSas, 3, 2, Errc::parse},
      {"let x 1.0; return x;", Arity::kSas, 3, 2, Errc::parse},
      {"return 1 < 2 < 3;", Arity::kSas, 3, 2, Errc::parse},
      {"return 1.0; junk", Arity::kSas, 3, 2, Errc::parse},
      {"return foo;", Arity::kSas, 3, 2, Errc::parse},
      {"return foo(1.0);", Arity::kSas, 3, 2, Errc::parse},
      {"let x = 1; let x = 2; return x;", Arity::kSas, 3, 2, Errc::parse},
      {"let obs = 1; return obs;", Arity::kSas, 3, 2, Errc::parse},
      {"let sum = 1; return sum;", Arity::kSas, 3, 2, Errc::parse},
      {"return obs[act[0]];", Arity::kSas, 3, 2, Errc::parse},
      // Types.
      {"return obs[0] > 0;", Arity::kSas, 3, 2, Errc::parse},
      {"return if 1.0 then 2 else 3;", Arity::kSas, 3, 2, Errc::parse},
      {"return if obs[0] > 0 then 1 else (obs[1] > 0);", Arity::kSas, 3, 2,
       Errc::parse},
      {"return 1.0 and 2.0;", Arity::kSas, 3, 2, Errc::parse},
      {"return not 1.0;", Arity::kSas, 3, 2, Errc::parse},
      {"return (obs[0] > 0) + 1;", Arity::kSas, 3, 2, Errc::parse},
      // Builtin shape.
      {"return sum(1.0);", Arity::kSas, 3, 2, Errc::parse},
      {"return sum(obs[0:2], obs[0:2]);", Arity::kSas, 3, 2, Errc::parse},
      {"return min(obs[0]);", Arity::kSas, 3, 2, Errc::parse},
      {"return clip(1.0, 2.0);", Arity::kSas, 3, 2, Errc::parse},
      {"return abs(obs[0:2]);", Arity::kSas, 3, 2, Errc::parse},
      {"return dot(obs[0:2]);", Arity::kSas, 3, 2, Errc::parse},
      // Slices outside vector builtins.
      {"return obs[0:2];", Arity::kSas, 3, 2, Errc::parse},
      {"return obs[0:2] + 1;", Arity::kSas, 3, 2, Errc::parse},
      // Bounds.
      {"return obs[3];", Arity::kSas, 3, 2, Errc::bounds},
      {"return act[2];", Arity::kSas, 3, 2, Errc::bounds},
      {"return obs[2000000000];", Arity::kSas, 3, 2, Errc::bounds},
      {"return obs[3000000000];", Arity::kSas, 3, 2, Errc::bounds},
      {"return sum(obs[0:4]);", Arity::kSas, 3, 2, Errc::bounds},
      {"return sum(obs[2:2]);", Arity::kSas, 3, 2, Errc::bounds},
      {"return sum(obs[2:1]);", Arity::kSas, 3, 2, Errc::bounds},
      {"return dot(obs[0:2], obs[0:3]);", Arity::kSas, 3, 2, Errc::bounds},
      // Action terms under the state-only arity.
      {"return act[0];", Arity::kSs, 3, 0, Errc::arity},
      {"return sum(act[0:2]);", Arity::kSs, 3, 0, Errc::arity},
      {"let a = act[0]; return a;", Arity::kSs, 3, 0, Errc::arity},
  };
  for (const Case& c : cases) {
    CAPTURE(c.text);
    CHECK(thrown_code(c.text, c.arity, c.obs_dim, c.act_dim) == c.want);
  }

  SUBCASE("bad dims are rejected up front") {
    CHECK(thrown_code("return 1.0;", Arity::kSas, 0, 2) == Errc::dimension);
    CHECK(thrown_code("return 1.0;", Arity::kSas, -1, 2) == Errc::dimension);
    CHECK(thrown_code("return 1.0;", Arity::kSas, 3, -2) == Errc::dimension);
  }

  SUBCASE("deep nesting is rejected, not crashed on") {
    std::string deep;
    for (int i = 0; i < 300; ++i) deep += "(1 + ";
    deep += "1";
    for (int i = 0; i < 300; ++i) deep += ")";
    CHECK(thrown_code("return " + deep + ";", Arity::kSas, 3, 2) == Errc::parse);
  }
}

TEST_CASE("runtime failures surface as evaluation errors") {
  std::vector<double> obs = {1.0, 2.0, 3.0};
  std::vector<double> act = {0.5};
  std::vector<double> next = {1.0, 2.0, 3.0};

  SUBCASE("non-finite results") {
    auto r = eval_text("return exp(1000.0);", obs, act, next);
    REQUIRE(!r.ok());
    CHECK(r.error_kind() == EvalErrorKind::kNonFinite);
    CHECK(eval_text("return 1.0 / 0.0;", obs, act, next).error_kind() ==
          EvalErrorKind::kNonFinite);
    CHECK(eval_text("return log(0.0 - 1.0);", obs, act, next).error_kind() ==
          EvalErrorKind::kNonFinite);
    CHECK(eval_text("return sqrt(0.0 - 4.0);", obs, act, next).error_kind() ==
          EvalErrorKind::kNonFinite);
    CHECK(eval_text("return 0.0 / 0.0;", obs, act, next).error_kind() ==
          EvalErrorKind::kNonFinite);
  }

  SUBCASE("non-finite inputs are rejected before evaluation") {
    auto compiled = parse_reward(RewardSource{"return 1.0;", Arity::kSas}, 3, 1);
    std::vector<double> bad_obs = {1.0, std::nan(""), 3.0};
    auto r = compiled.evaluate(bad_obs, act, next);
    REQUIRE(!r.ok());
    CHECK(r.error_kind() == EvalErrorKind::kNonFinite);
    std::vector<double> bad_act = {std::numeric_limits<double>::infinity()};
    CHECK(compiled.evaluate(obs, bad_act, next).error_kind() ==
          EvalErrorKind::kNonFinite);
  }

  SUBCASE("step budget") {
    std::vector<double> wide(64, 0.5);
    auto starved = eval_text("return sum(obs[0:64]);", wide, act, wide,
                             Arity::kSas, 10);
    REQUIRE(!starved.ok());
    CHECK(starved.error_kind() == EvalErrorKind::kBudgetExceeded);
    auto fine = eval_text("return sum(obs[0:64]);", wide, act, wide,
                          Arity::kSas, 1000);
    CHECK(fine.ok());
    CHECK(fine.value() == 32.0);
  }

  SUBCASE("value() on an error and error_kind() on a value both throw") {
    auto err = eval_text("return 1.0 / 0.0;", obs, act, next);
    CHECK_THROWS_AS(err.value(), Error);
    auto ok = eval_text("return 1.0;", obs, act, next);
    CHECK_THROWS_AS(ok.error_kind(), Error);
    CHECK(ok.value_or_zero() == 1.0);
    CHECK(err.value_or_zero() == 0.0);
  }
}

TEST_CASE("code block extraction") {
  SUBCASE("takes the last acceptable block") {
    std::string response =
        "Some analysis.\n```json\n{\"a\": 1}\n```\n"
        "First try:\n```python\nreturn 1.0;\n```\n"
        "Final answer:\n```reward\nreturn 2.0;\n```\ndone\n";
    CHECK(extract_code_block(response) == "return 2.0;\n");
  }

  SUBCASE("unlabeled and text fences qualify") {
    CHECK(extract_code_block("```\nreturn 3.0;\n```") == "return 3.0;\n");
    CHECK(extract_code_block("```text\nreturn 4.0;\n```") == "return 4.0;\n");
  }

  SUBCASE("label matching is case-insensitive and trimmed") {
    CHECK(extract_code_block("``` Reward \nreturn 5.0;\n```") ==
          "return 5.0;\n");
  }

  SUBCASE("an unterminated trailing fence is ignored") {
    std::string response =
        "```reward\nreturn 6.0;\n```\nlater:\n```reward\nreturn 7.0;";
    CHECK(extract_code_block(response) == "return 6.0;\n");
  }

  SUBCASE("skipped labels do not count, later acceptable block wins") {
    std::string response =
        "```reward\nreturn 8.0;\n```\n```yaml\nkey: value\n```\n";
    CHECK(extract_code_block(response) == "return 8.0;\n");
  }

  SUBCASE("multi-line bodies are preserved verbatim") {
    std::string response = fenced_response(
        "let a = obs[0];\nlet b = a * 2;\nreturn a + b;\n");
    CHECK(extract_code_block(response) ==
          "let a = obs[0];\nlet b = a * 2;\nreturn a + b;\n");
  }

  SUBCASE("carriage returns are stripped") {
    CHECK(extract_code_block("```reward\r\nreturn 9.0;\r\n```\r\n") ==
          "return 9.0;\n");
  }

  SUBCASE("no usable block throws extraction") {
    CHECK_THROWS_AS(extract_code_block("no code here"), Error);
    CHECK_THROWS_AS(extract_code_block("```json\n{}\n```"), Error);
    CHECK_THROWS_AS(extract_code_block("```reward\nreturn 1.0;"), Error);
    try {
      extract_code_block("nothing");
      FAIL("expected an extraction error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::extraction);
    }
  }
}

TEST_CASE("arity names round-trip") {
  CHECK(std::string(arity_name(Arity::kSas)) == "sas");
  CHECK(std::string(arity_name(Arity::kSs)) == "ss");
  CHECK(arity_from_name("sas") == Arity::kSas);
  CHECK(arity_from_name("ss") == Arity::kSs);
  CHECK_THROWS_AS(arity_from_name("bogus"), Error);
}
