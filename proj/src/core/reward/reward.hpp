#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>

#include "core/error.hpp"
#include "core/reward/ast.hpp"

namespace prof {

// sas rewards see (obs, act, next); ss rewards see (obs, next) and reject
// any action term at parse time.
enum class Arity { kSas, kSs };

const char* arity_name(Arity a);
Arity arity_from_name(const std::string& name);

constexpr int32_t kDefaultStepBudget = 10000;

// A reward function as text, before compilation.
struct RewardSource {
  std::string text;
  Arity arity = Arity::kSas;
};

enum class EvalErrorKind {
  kNonFinite,
  kBudgetExceeded,
  kSpawn,
  kProtocol,
  kTimeout,
};

const char* eval_error_name(EvalErrorKind k);

// Result of evaluating one transition: either a finite reward or the
// reason there is none.  Evaluation failures are data, not exceptions,
// because candidate rewards are untrusted inputs.
class EvalOutcome {
 public:
  static EvalOutcome value(double v) { return EvalOutcome(v); }
  static EvalOutcome error(EvalErrorKind k) { return EvalOutcome(k); }

  bool ok() const { return !error_.has_value(); }
  double value_or_zero() const { return ok() ? value_ : 0.0; }
  double value() const;
  EvalErrorKind error_kind() const;

 private:
  explicit EvalOutcome(double v) : value_(v) {}
  explicit EvalOutcome(EvalErrorKind k) : error_(k) {}
  double value_ = 0.0;
  std::optional<EvalErrorKind> error_;
};

namespace lang {
struct Instr;
}

// A parsed, type-checked, bounds-checked reward program lowered to a
// small stack machine.  Immutable and cheap to share.
class CompiledReward {
 public:
  EvalOutcome evaluate(std::span<const double> obs,
                       std::span<const double> act,
                       std::span<const double> next) const;

  // Canonical re-rendering of the program (parses back to the same
  // semantics; used for inspection and round-trip checks).
  std::string render() const;

  const lang::Program& ast() const { return *ast_; }
  const std::string& source() const { return source_; }
  Arity arity() const { return arity_; }
  int32_t obs_dim() const { return obs_dim_; }
  int32_t act_dim() const { return act_dim_; }
  int32_t step_budget() const { return step_budget_; }

 private:
  friend CompiledReward parse_reward(const RewardSource&, int32_t, int32_t,
                                     int32_t);
  CompiledReward() = default;

  std::shared_ptr<const lang::Program> ast_;
  std::shared_ptr<const std::vector<lang::Instr>> code_;
  int32_t n_lets_ = 0;
  int32_t max_stack_ = 0;
  std::string source_;
  Arity arity_ = Arity::kSas;
  int32_t obs_dim_ = 0;
  int32_t act_dim_ = 0;
  int32_t step_budget_ = kDefaultStepBudget;
};

// Parses and statically checks a reward program.  Throws Error with code
// parse (syntax/type), bounds (index out of range) or arity (action term
// in ss mode).
CompiledReward parse_reward(const RewardSource& source, int32_t obs_dim,
                            int32_t act_dim,
                            int32_t step_budget = kDefaultStepBudget);

// Pulls reward code out of an LLM response: the last fenced code block
// whose label is empty or one of python/reward/text.  Blocks with other
// labels are skipped.  Throws Error(extraction) when nothing qualifies.
std::string extract_code_block(const std::string& response);

}  // namespace prof
