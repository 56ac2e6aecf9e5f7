#pragma once

#include <cstdint>
#include <vector>

#include "core/reward/ast.hpp"

namespace prof::lang {

enum class Op : uint8_t {
  kConst,        // push imm
  kInput,        // push input var_a[a]
  kLetLoad,      // push let slot a
  kLetStore,     // pop into let slot a
  kAdd, kSub, kMul, kDiv, kPow,
  kLt, kLe, kGt, kGe, kEq, kNe,
  kNeg, kNot,
  kJump,         // pc = a
  kJumpIfFalse,  // pop; if == 0 then pc = a
  kAbs, kExp, kLog, kSqrt, kTanh, kSq,
  kClip,         // pop hi, lo, x
  kMinN, kMaxN,  // pop a values
  kReduce,       // vector builtin var_b over var_a[a:b]
  kDot2,         // dot of var_a[a:b] and var_b[c:d]
};

struct Instr {
  Op op;
  uint8_t var_a = 0;  // InputVar or Builtin ordinal, op-dependent
  uint8_t var_b = 0;
  int32_t a = 0;
  int32_t b = 0;
  int32_t c = 0;
  int32_t d = 0;
  double imm = 0.0;
};

struct CompiledProgram {
  std::vector<Instr> code;
  int32_t n_lets = 0;
  int32_t max_stack = 0;
};

CompiledProgram lower_program(const Program& program);

}  // namespace prof::lang
