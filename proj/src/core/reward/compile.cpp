#include "core/reward/bytecode.hpp"

#include "core/error.hpp"

namespace prof::lang {
namespace {

class Lowering {
 public:
  CompiledProgram run(const Program& program) {
    for (size_t i = 0; i < program.lets.size(); ++i) {
      emit_expr(*program.lets[i].expr);
      emit({Op::kLetStore, 0, 0, int32_t(i)});
      adjust(-1);
    }
    emit_expr(*program.result);
    out_.n_lets = int32_t(program.lets.size());
    return std::move(out_);
  }

 private:
  void emit(Instr instr) { out_.code.push_back(instr); }
  int32_t here() const { return int32_t(out_.code.size()); }
  void patch(int32_t at, int32_t target) { out_.code[size_t(at)].a = target; }
  void adjust(int delta) {
    depth_ += delta;
    if (depth_ > out_.max_stack) out_.max_stack = depth_;
  }

  void emit_expr(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::kNumber:
        emit({Op::kConst, 0, 0, 0, 0, 0, 0, e.value});
        adjust(1);
        return;
      case Expr::Kind::kInput:
        emit({Op::kInput, uint8_t(e.var), 0, e.index});
        adjust(1);
        return;
      case Expr::Kind::kLetRef:
        emit({Op::kLetLoad, 0, 0, e.let_index});
        adjust(1);
        return;
      case Expr::Kind::kUnary:
        emit_expr(*e.a);
        emit({e.uop == UnOp::kNeg ? Op::kNeg : Op::kNot});
        return;
      case Expr::Kind::kBinary:
        emit_binary(e);
        return;
      case Expr::Kind::kCond: {
        emit_expr(*e.a);
        int32_t jf = here();
        emit({Op::kJumpIfFalse});
        adjust(-1);
        emit_expr(*e.b);
        int32_t jend = here();
        emit({Op::kJump});
        patch(jf, here());
        // The two branches leave one value; count it once.
        adjust(-1);
        emit_expr(*e.c);
        patch(jend, here());
        return;
      }
      case Expr::Kind::kCall:
        emit_call(e);
        return;
    }
    raise(Errc::internal, "unhandled expression kind in lowering");
  }

  void emit_binary(const Expr& e) {
    if (e.bop == BinOp::kAnd) {
      emit_expr(*e.a);
      int32_t jf = here();
      emit({Op::kJumpIfFalse});
      adjust(-1);
      emit_expr(*e.b);
      int32_t jend = here();
      emit({Op::kJump});
      patch(jf, here());
      adjust(-1);
      emit({Op::kConst, 0, 0, 0, 0, 0, 0, 0.0});
      adjust(1);
      patch(jend, here());
      return;
    }
    if (e.bop == BinOp::kOr) {
      emit_expr(*e.a);
      int32_t jf = here();
      emit({Op::kJumpIfFalse});
      adjust(-1);
      emit({Op::kConst, 0, 0, 0, 0, 0, 0, 1.0});
      adjust(1);
      int32_t jend = here();
      emit({Op::kJump});
      patch(jf, here());
      adjust(-1);
      emit_expr(*e.b);
      patch(jend, here());
      return;
    }
    emit_expr(*e.a);
    emit_expr(*e.b);
    Op op;
    switch (e.bop) {
      case BinOp::kAdd: op = Op::kAdd; break;
      case BinOp::kSub: op = Op::kSub; break;
      case BinOp::kMul: op = Op::kMul; break;
      case BinOp::kDiv: op = Op::kDiv; break;
      case BinOp::kPow: op = Op::kPow; break;
      case BinOp::kLt: op = Op::kLt; break;
      case BinOp::kLe: op = Op::kLe; break;
      case BinOp::kGt: op = Op::kGt; break;
      case BinOp::kGe: op = Op::kGe; break;
      case BinOp::kEq: op = Op::kEq; break;
      case BinOp::kNe: op = Op::kNe; break;
      default: raise(Errc::internal, "unexpected binary op");
    }
    emit({op});
    adjust(-1);
  }

  void emit_call(const Expr& e) {
    switch (e.builtin) {
      case Builtin::kAbs:
      case Builtin::kExp:
      case Builtin::kLog:
      case Builtin::kSqrt:
      case Builtin::kTanh:
      case Builtin::kSq: {
        emit_expr(*e.args[0]);
        Op op = e.builtin == Builtin::kAbs    ? Op::kAbs
                : e.builtin == Builtin::kExp  ? Op::kExp
                : e.builtin == Builtin::kLog  ? Op::kLog
                : e.builtin == Builtin::kSqrt ? Op::kSqrt
                : e.builtin == Builtin::kTanh ? Op::kTanh
                                              : Op::kSq;
        emit({op});
        return;
      }
      case Builtin::kClip:
        emit_expr(*e.args[0]);
        emit_expr(*e.args[1]);
        emit_expr(*e.args[2]);
        emit({Op::kClip});
        adjust(-2);
        return;
      case Builtin::kMin:
      case Builtin::kMax: {
        if (e.slices.size() == 1) {
          const Slice& s = e.slices[0];
          emit({Op::kReduce, uint8_t(s.var), uint8_t(e.builtin), s.begin,
                s.end});
          adjust(1);
          return;
        }
        for (const auto& arg : e.args) emit_expr(*arg);
        emit({e.builtin == Builtin::kMin ? Op::kMinN : Op::kMaxN, 0, 0,
              int32_t(e.args.size())});
        adjust(-int(e.args.size()) + 1);
        return;
      }
      case Builtin::kSum:
      case Builtin::kNorm1:
      case Builtin::kNorm2: {
        const Slice& s = e.slices[0];
        emit({Op::kReduce, uint8_t(s.var), uint8_t(e.builtin), s.begin, s.end});
        adjust(1);
        return;
      }
      case Builtin::kDot: {
        const Slice& s0 = e.slices[0];
        const Slice& s1 = e.slices[1];
        emit({Op::kDot2, uint8_t(s0.var), uint8_t(s1.var), s0.begin, s0.end,
              s1.begin, s1.end});
        adjust(1);
        return;
      }
    }
    raise(Errc::internal, "unhandled builtin in lowering");
  }

  CompiledProgram out_;
  int depth_ = 0;
};

}  // namespace

CompiledProgram lower_program(const Program& program) {
  return Lowering().run(program);
}

}  // namespace prof::lang
