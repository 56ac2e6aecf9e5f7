#include <cmath>

#include "core/reward/bytecode.hpp"
#include "core/reward/parser.hpp"
#include "core/reward/reward.hpp"

namespace prof {

const char* arity_name(Arity a) { return a == Arity::kSas ? "sas" : "ss"; }

Arity arity_from_name(const std::string& name) {
  if (name == "sas") return Arity::kSas;
  if (name == "ss") return Arity::kSs;
  raise(Errc::config, "unknown arity '" + name + "' (expected sas or ss)");
}

const char* eval_error_name(EvalErrorKind k) {
  switch (k) {
    case EvalErrorKind::kNonFinite: return "non_finite";
    case EvalErrorKind::kBudgetExceeded: return "budget_exceeded";
    case EvalErrorKind::kSpawn: return "spawn";
    case EvalErrorKind::kProtocol: return "protocol";
    case EvalErrorKind::kTimeout: return "timeout";
  }
  return "?";
}

double EvalOutcome::value() const {
  if (!ok()) raise(Errc::eval, "evaluation failed: no value");
  return value_;
}

EvalErrorKind EvalOutcome::error_kind() const {
  if (ok()) raise(Errc::internal, "EvalOutcome holds a value, not an error");
  return *error_;
}

CompiledReward parse_reward(const RewardSource& source, int32_t obs_dim,
                            int32_t act_dim, int32_t step_budget) {
  if (step_budget < 1) raise(Errc::validation, "step budget must be >= 1");
  CompiledReward out;
  out.ast_ = std::make_shared<lang::Program>(
      lang::parse_program(source.text, source.arity, obs_dim, act_dim));
  auto lowered = lang::lower_program(*out.ast_);
  out.code_ = std::make_shared<std::vector<lang::Instr>>(
      std::move(lowered.code));
  out.n_lets_ = lowered.n_lets;
  out.max_stack_ = lowered.max_stack;
  out.source_ = source.text;
  out.arity_ = source.arity;
  out.obs_dim_ = obs_dim;
  out.act_dim_ = act_dim;
  out.step_budget_ = step_budget;
  return out;
}

EvalOutcome CompiledReward::evaluate(std::span<const double> obs,
                                     std::span<const double> act,
                                     std::span<const double> next) const {
  using lang::Op;
  if (int32_t(obs.size()) != obs_dim_ || int32_t(next.size()) != obs_dim_)
    raise(Errc::dimension, "observation span does not match obs_dim");
  if (arity_ == Arity::kSas && int32_t(act.size()) != act_dim_)
    raise(Errc::dimension, "action span does not match act_dim");

  for (double v : obs)
    if (!std::isfinite(v)) return EvalOutcome::error(EvalErrorKind::kNonFinite);
  for (double v : act)
    if (!std::isfinite(v)) return EvalOutcome::error(EvalErrorKind::kNonFinite);
  for (double v : next)
    if (!std::isfinite(v)) return EvalOutcome::error(EvalErrorKind::kNonFinite);

  const std::span<const double> inputs[3] = {obs, act, next};
  std::vector<double> stack(size_t(max_stack_) + 1);
  std::vector<double> lets(size_t(n_lets_), 0.0);
  size_t sp = 0;  // next free slot
  int64_t steps = 0;
  const auto& code = *code_;

  auto push = [&](double v) { stack[sp++] = v; };
  auto pop = [&]() { return stack[--sp]; };

  for (size_t pc = 0; pc < code.size(); ++pc) {
    const lang::Instr& ins = code[pc];
    if (++steps > step_budget_)
      return EvalOutcome::error(EvalErrorKind::kBudgetExceeded);
    switch (ins.op) {
      case Op::kConst: push(ins.imm); break;
      case Op::kInput: push(inputs[ins.var_a][size_t(ins.a)]); break;
      case Op::kLetLoad: push(lets[size_t(ins.a)]); break;
      case Op::kLetStore: lets[size_t(ins.a)] = pop(); break;
      case Op::kAdd:
      case Op::kSub:
      case Op::kMul:
      case Op::kDiv:
      case Op::kPow: {
        double rhs = pop(), lhs = pop(), v = 0.0;
        switch (ins.op) {
          case Op::kAdd: v = lhs + rhs; break;
          case Op::kSub: v = lhs - rhs; break;
          case Op::kMul: v = lhs * rhs; break;
          case Op::kDiv: v = lhs / rhs; break;
          default: v = std::pow(lhs, rhs); break;
        }
        if (!std::isfinite(v))
          return EvalOutcome::error(EvalErrorKind::kNonFinite);
        push(v);
        break;
      }
      case Op::kLt: { double r = pop(), l = pop(); push(l < r ? 1.0 : 0.0); break; }
      case Op::kLe: { double r = pop(), l = pop(); push(l <= r ? 1.0 : 0.0); break; }
      case Op::kGt: { double r = pop(), l = pop(); push(l > r ? 1.0 : 0.0); break; }
      case Op::kGe: { double r = pop(), l = pop(); push(l >= r ? 1.0 : 0.0); break; }
      case Op::kEq: { double r = pop(), l = pop(); push(l == r ? 1.0 : 0.0); break; }
      case Op::kNe: { double r = pop(), l = pop(); push(l != r ? 1.0 : 0.0); break; }
      case Op::kNeg: stack[sp - 1] = -stack[sp - 1]; break;
      case Op::kNot: stack[sp - 1] = stack[sp - 1] == 0.0 ? 1.0 : 0.0; break;
      case Op::kJump: pc = size_t(ins.a) - 1; break;
      case Op::kJumpIfFalse:
        if (pop() == 0.0) pc = size_t(ins.a) - 1;
        break;
      case Op::kAbs: stack[sp - 1] = std::fabs(stack[sp - 1]); break;
      case Op::kExp:
      case Op::kLog:
      case Op::kSqrt:
      case Op::kTanh:
      case Op::kSq: {
        double x = stack[sp - 1], v = 0.0;
        switch (ins.op) {
          case Op::kExp: v = std::exp(x); break;
          case Op::kLog: v = std::log(x); break;
          case Op::kSqrt: v = std::sqrt(x); break;
          case Op::kTanh: v = std::tanh(x); break;
          default: v = x * x; break;
        }
        if (!std::isfinite(v))
          return EvalOutcome::error(EvalErrorKind::kNonFinite);
        stack[sp - 1] = v;
        break;
      }
      case Op::kClip: {
        double hi = pop(), lo = pop(), x = stack[sp - 1];
        stack[sp - 1] = x < lo ? lo : (x > hi ? hi : x);
        break;
      }
      case Op::kMinN:
      case Op::kMaxN: {
        double acc = pop();
        for (int32_t i = 1; i < ins.a; ++i) {
          double v = pop();
          acc = ins.op == Op::kMinN ? std::fmin(acc, v) : std::fmax(acc, v);
        }
        push(acc);
        break;
      }
      case Op::kReduce: {
        auto src = inputs[ins.var_a];
        auto builtin = lang::Builtin(ins.var_b);
        int32_t len = ins.b - ins.a;
        steps += std::max<int64_t>(0, len - 1);
        if (steps > step_budget_)
          return EvalOutcome::error(EvalErrorKind::kBudgetExceeded);
        double acc;
        switch (builtin) {
          case lang::Builtin::kSum: {
            acc = 0.0;
            for (int32_t i = ins.a; i < ins.b; ++i) acc += src[size_t(i)];
            break;
          }
          case lang::Builtin::kNorm1: {
            acc = 0.0;
            for (int32_t i = ins.a; i < ins.b; ++i)
              acc += std::fabs(src[size_t(i)]);
            break;
          }
          case lang::Builtin::kNorm2: {
            acc = 0.0;
            for (int32_t i = ins.a; i < ins.b; ++i)
              acc += src[size_t(i)] * src[size_t(i)];
            acc = std::sqrt(acc);
            break;
          }
          case lang::Builtin::kMin: {
            acc = src[size_t(ins.a)];
            for (int32_t i = ins.a + 1; i < ins.b; ++i)
              acc = std::fmin(acc, src[size_t(i)]);
            break;
          }
          case lang::Builtin::kMax: {
            acc = src[size_t(ins.a)];
            for (int32_t i = ins.a + 1; i < ins.b; ++i)
              acc = std::fmax(acc, src[size_t(i)]);
            break;
          }
          default:
            raise(Errc::internal, "bad reduce builtin");
        }
        if (!std::isfinite(acc))
          return EvalOutcome::error(EvalErrorKind::kNonFinite);
        push(acc);
        break;
      }
      case Op::kDot2: {
        auto lhs = inputs[ins.var_a];
        auto rhs = inputs[ins.var_b];
        int32_t len = ins.b - ins.a;
        steps += std::max<int64_t>(0, len - 1);
        if (steps > step_budget_)
          return EvalOutcome::error(EvalErrorKind::kBudgetExceeded);
        double acc = 0.0;
        for (int32_t i = 0; i < len; ++i)
          acc += lhs[size_t(ins.a + i)] * rhs[size_t(ins.c + i)];
        if (!std::isfinite(acc))
          return EvalOutcome::error(EvalErrorKind::kNonFinite);
        push(acc);
        break;
      }
    }
  }
  double result = stack[sp - 1];
  if (!std::isfinite(result))
    return EvalOutcome::error(EvalErrorKind::kNonFinite);
  return EvalOutcome::value(result);
}

}  // namespace prof
