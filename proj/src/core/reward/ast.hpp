#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace prof::lang {

enum class BinOp {
  kAdd, kSub, kMul, kDiv, kPow,
  kLt, kLe, kGt, kGe, kEq, kNe,
  kAnd, kOr,
};

enum class UnOp { kNeg, kNot };

enum class Builtin {
  kAbs, kMin, kMax, kClip, kExp, kLog, kSqrt, kTanh, kSq,  // scalar
  kSum, kDot, kNorm1, kNorm2,                              // vector only
};

enum class InputVar { kObs, kAct, kNext };

const char* builtin_name(Builtin b);
const char* input_var_name(InputVar v);

// Half-open [begin, end) slice of an input vector; only legal as the
// argument of a vector builtin.
struct Slice {
  InputVar var;
  int32_t begin = 0;
  int32_t end = 0;
};

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  enum class Kind {
    kNumber,   // value
    kInput,    // var[index]
    kLetRef,   // let_index (resolution order), name kept for rendering
    kUnary,    // uop, a
    kBinary,   // bop, a, b
    kCond,     // a ? then b : else c  (spelled if/then/else)
    kCall,     // builtin over scalar args and/or slices
  };

  Kind kind;
  double value = 0.0;
  InputVar var = InputVar::kObs;
  int32_t index = 0;
  int32_t let_index = -1;
  std::string name;
  UnOp uop = UnOp::kNeg;
  BinOp bop = BinOp::kAdd;
  Builtin builtin = Builtin::kAbs;
  ExprPtr a, b, c;
  std::vector<ExprPtr> args;
  std::vector<Slice> slices;
};

struct Binding {
  std::string name;
  ExprPtr expr;
};

// A parsed reward program: bindings in order, then the result expression.
struct Program {
  std::vector<Binding> lets;
  ExprPtr result;
};

ExprPtr make_number(double v);
ExprPtr make_input(InputVar var, int32_t index);

}  // namespace prof::lang
