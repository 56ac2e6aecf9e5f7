#include <charconv>

#include "core/reward/reward.hpp"

namespace prof {
namespace {

using lang::BinOp;
using lang::Builtin;
using lang::Expr;
using lang::Slice;
using lang::UnOp;

// Shortest round-trip decimal form.
std::string number_text(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

int binop_prec(BinOp op) {
  switch (op) {
    case BinOp::kOr: return 1;
    case BinOp::kAnd: return 2;
    case BinOp::kLt:
    case BinOp::kLe:
    case BinOp::kGt:
    case BinOp::kGe:
    case BinOp::kEq:
    case BinOp::kNe: return 4;
    case BinOp::kAdd:
    case BinOp::kSub: return 5;
    case BinOp::kMul:
    case BinOp::kDiv: return 6;
    case BinOp::kPow: return 8;
  }
  return 0;
}

const char* binop_text(BinOp op) {
  switch (op) {
    case BinOp::kOr: return "or";
    case BinOp::kAnd: return "and";
    case BinOp::kLt: return "<";
    case BinOp::kLe: return "<=";
    case BinOp::kGt: return ">";
    case BinOp::kGe: return ">=";
    case BinOp::kEq: return "==";
    case BinOp::kNe: return "!=";
    case BinOp::kAdd: return "+";
    case BinOp::kSub: return "-";
    case BinOp::kMul: return "*";
    case BinOp::kDiv: return "/";
    case BinOp::kPow: return "^";
  }
  return "?";
}

int node_prec(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::kCond: return 0;
    case Expr::Kind::kBinary: return binop_prec(e.bop);
    case Expr::Kind::kUnary: return e.uop == UnOp::kNot ? 3 : 7;
    default: return 9;
  }
}

void render_expr(const Expr& e, std::string& out, bool top_level);

void render_child(const Expr& child, std::string& out, int min_prec) {
  bool needs_parens = node_prec(child) < min_prec;
  if (needs_parens) out.push_back('(');
  render_expr(child, out, false);
  if (needs_parens) out.push_back(')');
}

void render_slice(const Slice& s, std::string& out) {
  out += lang::input_var_name(s.var);
  out.push_back('[');
  out += std::to_string(s.begin);
  out.push_back(':');
  out += std::to_string(s.end);
  out.push_back(']');
}

void render_expr(const Expr& e, std::string& out, bool top_level) {
  switch (e.kind) {
    case Expr::Kind::kNumber:
      out += number_text(e.value);
      return;
    case Expr::Kind::kInput:
      out += lang::input_var_name(e.var);
      out.push_back('[');
      out += std::to_string(e.index);
      out.push_back(']');
      return;
    case Expr::Kind::kLetRef:
      out += e.name;
      return;
    case Expr::Kind::kUnary:
      if (e.uop == UnOp::kNot) {
        out += "not ";
        render_child(*e.a, out, 3);
      } else {
        out.push_back('-');
        render_child(*e.a, out, 7);
      }
      return;
    case Expr::Kind::kBinary: {
      int prec = binop_prec(e.bop);
      // Left-assoc: right child binds tighter; pow is right-assoc.
      int left_min = e.bop == BinOp::kPow ? prec + 1 : prec;
      int right_min = e.bop == BinOp::kPow ? 7 : prec + 1;
      // Comparisons do not chain, so both sides need strictly higher.
      if (prec == 4) left_min = 5;
      render_child(*e.a, out, left_min);
      out.push_back(' ');
      out += binop_text(e.bop);
      out.push_back(' ');
      render_child(*e.b, out, right_min);
      return;
    }
    case Expr::Kind::kCond: {
      if (!top_level) out.push_back('(');
      out += "if ";
      render_expr(*e.a, out, false);
      out += " then ";
      render_expr(*e.b, out, false);
      out += " else ";
      render_expr(*e.c, out, false);
      if (!top_level) out.push_back(')');
      return;
    }
    case Expr::Kind::kCall: {
      out += lang::builtin_name(e.builtin);
      out.push_back('(');
      bool first = true;
      for (const auto& s : e.slices) {
        if (!first) out += ", ";
        render_slice(s, out);
        first = false;
      }
      for (const auto& arg : e.args) {
        if (!first) out += ", ";
        render_expr(*arg, out, false);
        first = false;
      }
      out.push_back(')');
      return;
    }
  }
}

}  // namespace

std::string CompiledReward::render() const {
  std::string out;
  for (const auto& binding : ast_->lets) {
    out += "let ";
    out += binding.name;
    out += " = ";
    render_expr(*binding.expr, out, true);
    out += ";\n";
  }
  out += "return ";
  render_expr(*ast_->result, out, true);
  out += ";\n";
  return out;
}

}  // namespace prof
