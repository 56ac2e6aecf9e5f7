#include "core/reward/parser.hpp"

#include <map>
#include <optional>

#include "core/reward/lexer.hpp"

namespace prof::lang {
namespace {

constexpr int kMaxDepth = 200;

const std::map<std::string, Builtin>& builtin_table() {
  static const std::map<std::string, Builtin> table = {
      {"abs", Builtin::kAbs},     {"min", Builtin::kMin},
      {"max", Builtin::kMax},     {"clip", Builtin::kClip},
      {"exp", Builtin::kExp},     {"log", Builtin::kLog},
      {"sqrt", Builtin::kSqrt},   {"tanh", Builtin::kTanh},
      {"sq", Builtin::kSq},       {"sum", Builtin::kSum},
      {"dot", Builtin::kDot},     {"norm1", Builtin::kNorm1},
      {"norm2", Builtin::kNorm2},
  };
  return table;
}

std::optional<InputVar> input_var_from(const std::string& name) {
  if (name == "obs") return InputVar::kObs;
  if (name == "act") return InputVar::kAct;
  if (name == "next") return InputVar::kNext;
  return std::nullopt;
}

enum class Type { kNum, kBool };

class Parser {
 public:
  Parser(std::vector<Token> tokens, Arity arity, int32_t obs_dim,
         int32_t act_dim)
      : tokens_(std::move(tokens)),
        arity_(arity),
        obs_dim_(obs_dim),
        act_dim_(act_dim) {}

  Program parse() {
    Program prog;
    while (peek().kind == Tok::kLet) {
      advance();
      const Token& name_tok = expect(Tok::kIdent, "binding name");
      std::string name = name_tok.text;
      if (input_var_from(name))
        fail(name_tok, "'" + name + "' is a reserved input name");
      if (builtin_table().count(name))
        fail(name_tok, "'" + name + "' is a builtin function name");
      if (let_types_.count(name))
        fail(name_tok, "'" + name + "' is already bound");
      expect(Tok::kAssign, "'='");
      ExprPtr value = parse_expr();
      expect(Tok::kSemicolon, "';' after binding");
      let_types_[name] = last_type_;
      let_order_[name] = int32_t(prog.lets.size());
      prog.lets.push_back(Binding{std::move(name), std::move(value)});
    }
    if (peek().kind == Tok::kReturn) {
      advance();
      prog.result = parse_expr();
      if (peek().kind == Tok::kSemicolon) advance();
    } else {
      prog.result = parse_expr();
    }
    if (last_type_ != Type::kNum)
      fail(peek(), "reward expression must be numeric, not boolean");
    if (peek().kind != Tok::kEof)
      fail(peek(), "unexpected trailing input");
    return prog;
  }

 private:
  const Token& peek(size_t ahead = 0) const {
    size_t idx = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[idx];
  }
  const Token& advance() { return tokens_[pos_++]; }
  const Token& expect(Tok kind, const char* what) {
    if (peek().kind != kind) fail(peek(), std::string("expected ") + what);
    return advance();
  }
  [[noreturn]] void fail(const Token& tok, const std::string& msg,
                         Errc code = Errc::parse) const {
    std::string where = tok.kind == Tok::kEof
                            ? std::string("end of input")
                            : "'" + tok.text + "'";
    raise(code, "parse error at " + std::to_string(tok.line) + ":" +
                    std::to_string(tok.col) + " near " + where + ": " + msg);
  }

  struct DepthGuard {
    explicit DepthGuard(Parser* p) : p_(p) {
      if (++p_->depth_ > kMaxDepth)
        raise(Errc::parse, "expression nesting exceeds depth limit");
    }
    ~DepthGuard() { --p_->depth_; }
    Parser* p_;
  };

  ExprPtr parse_expr() {
    DepthGuard guard(this);
    if (peek().kind == Tok::kIf) return parse_cond();
    return parse_or();
  }

  ExprPtr parse_cond() {
    const Token& tok = peek();
    expect(Tok::kIf, "'if'");
    ExprPtr cond = parse_expr();
    if (last_type_ != Type::kBool)
      fail(tok, "condition of 'if' must be boolean");
    expect(Tok::kThen, "'then'");
    ExprPtr then_branch = parse_expr();
    Type then_type = last_type_;
    expect(Tok::kElse, "'else'");
    ExprPtr else_branch = parse_expr();
    if (last_type_ != then_type)
      fail(tok, "'then' and 'else' branches have different types");
    auto node = std::make_unique<Expr>();
    node->kind = Expr::Kind::kCond;
    node->a = std::move(cond);
    node->b = std::move(then_branch);
    node->c = std::move(else_branch);
    return node;
  }

  ExprPtr make_binary(BinOp op, ExprPtr lhs, ExprPtr rhs) {
    auto node = std::make_unique<Expr>();
    node->kind = Expr::Kind::kBinary;
    node->bop = op;
    node->a = std::move(lhs);
    node->b = std::move(rhs);
    return node;
  }

  ExprPtr parse_or() {
    ExprPtr lhs = parse_and();
    while (peek().kind == Tok::kOr) {
      const Token& tok = advance();
      if (last_type_ != Type::kBool) fail(tok, "'or' needs boolean operands");
      ExprPtr rhs = parse_and();
      if (last_type_ != Type::kBool) fail(tok, "'or' needs boolean operands");
      lhs = make_binary(BinOp::kOr, std::move(lhs), std::move(rhs));
      last_type_ = Type::kBool;
    }
    return lhs;
  }

  ExprPtr parse_and() {
    ExprPtr lhs = parse_not();
    while (peek().kind == Tok::kAnd) {
      const Token& tok = advance();
      if (last_type_ != Type::kBool) fail(tok, "'and' needs boolean operands");
      ExprPtr rhs = parse_not();
      if (last_type_ != Type::kBool) fail(tok, "'and' needs boolean operands");
      lhs = make_binary(BinOp::kAnd, std::move(lhs), std::move(rhs));
      last_type_ = Type::kBool;
    }
    return lhs;
  }

  ExprPtr parse_not() {
    DepthGuard guard(this);
    if (peek().kind == Tok::kNot) {
      const Token& tok = advance();
      ExprPtr operand = parse_not();
      if (last_type_ != Type::kBool) fail(tok, "'not' needs a boolean operand");
      auto node = std::make_unique<Expr>();
      node->kind = Expr::Kind::kUnary;
      node->uop = UnOp::kNot;
      node->a = std::move(operand);
      last_type_ = Type::kBool;
      return node;
    }
    return parse_comparison();
  }

  ExprPtr parse_comparison() {
    ExprPtr lhs = parse_additive();
    Tok k = peek().kind;
    if (k == Tok::kLt || k == Tok::kLe || k == Tok::kGt || k == Tok::kGe ||
        k == Tok::kEq || k == Tok::kNe) {
      const Token& tok = advance();
      if (last_type_ != Type::kNum)
        fail(tok, "comparison needs numeric operands");
      ExprPtr rhs = parse_additive();
      if (last_type_ != Type::kNum)
        fail(tok, "comparison needs numeric operands");
      BinOp op = k == Tok::kLt   ? BinOp::kLt
                 : k == Tok::kLe ? BinOp::kLe
                 : k == Tok::kGt ? BinOp::kGt
                 : k == Tok::kGe ? BinOp::kGe
                 : k == Tok::kEq ? BinOp::kEq
                                 : BinOp::kNe;
      lhs = make_binary(op, std::move(lhs), std::move(rhs));
      last_type_ = Type::kBool;
    }
    return lhs;
  }

  ExprPtr parse_numeric_binop(const Token& tok, BinOp op, ExprPtr lhs,
                              ExprPtr rhs) {
    if (last_type_ != Type::kNum)
      fail(tok, "arithmetic needs numeric operands");
    last_type_ = Type::kNum;
    return make_binary(op, std::move(lhs), std::move(rhs));
  }

  ExprPtr parse_additive() {
    ExprPtr lhs = parse_multiplicative();
    for (;;) {
      Tok k = peek().kind;
      if (k != Tok::kPlus && k != Tok::kMinus) break;
      const Token& tok = advance();
      if (last_type_ != Type::kNum) fail(tok, "arithmetic needs numeric operands");
      ExprPtr rhs = parse_multiplicative();
      lhs = parse_numeric_binop(tok, k == Tok::kPlus ? BinOp::kAdd : BinOp::kSub,
                                std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  ExprPtr parse_multiplicative() {
    ExprPtr lhs = parse_unary();
    for (;;) {
      Tok k = peek().kind;
      if (k != Tok::kStar && k != Tok::kSlash) break;
      const Token& tok = advance();
      if (last_type_ != Type::kNum) fail(tok, "arithmetic needs numeric operands");
      ExprPtr rhs = parse_unary();
      lhs = parse_numeric_binop(tok, k == Tok::kStar ? BinOp::kMul : BinOp::kDiv,
                                std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    DepthGuard guard(this);
    if (peek().kind == Tok::kMinus) {
      const Token& tok = advance();
      ExprPtr operand = parse_unary();
      if (last_type_ != Type::kNum) fail(tok, "unary '-' needs a numeric operand");
      auto node = std::make_unique<Expr>();
      node->kind = Expr::Kind::kUnary;
      node->uop = UnOp::kNeg;
      node->a = std::move(operand);
      last_type_ = Type::kNum;
      return node;
    }
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_atom();
    if (peek().kind == Tok::kCaret) {
      const Token& tok = advance();
      if (last_type_ != Type::kNum) fail(tok, "'^' needs numeric operands");
      ExprPtr exponent = parse_unary();  // right-assoc, allows x^-2
      base = parse_numeric_binop(tok, BinOp::kPow, std::move(base),
                                 std::move(exponent));
    }
    return base;
  }

  int32_t input_dim(InputVar var) const {
    return var == InputVar::kAct ? act_dim_ : obs_dim_;
  }

  int32_t expect_index_literal() {
    const Token& tok = peek();
    if (tok.kind != Tok::kNumber || !tok.integral)
      fail(tok, "expected a non-negative integer literal");
    if (tok.number > 1e9) fail(tok, "index literal is out of range", Errc::bounds);
    advance();
    return int32_t(tok.number);
  }

  void check_action_allowed(const Token& tok, InputVar var) {
    if (var == InputVar::kAct && arity_ == Arity::kSs)
      fail(tok, "action terms are not allowed for state-only rewards",
           Errc::arity);
  }

  ExprPtr parse_input_element(const Token& name_tok, InputVar var) {
    check_action_allowed(name_tok, var);
    expect(Tok::kLBracket, "'['");
    const Token& idx_tok = peek();
    int32_t index = expect_index_literal();
    if (peek().kind == Tok::kColon)
      fail(peek(), "slices are only valid inside sum/dot/norm1/norm2/min/max");
    expect(Tok::kRBracket, "']'");
    if (index < 0 || index >= input_dim(var))
      fail(idx_tok,
           std::string(input_var_name(var)) + "[" + std::to_string(index) +
               "] is out of range for dimension " +
               std::to_string(input_dim(var)),
           Errc::bounds);
    last_type_ = Type::kNum;
    return make_input(var, index);
  }

  // Lookahead: an argument position holding `var [ int :` is a slice.
  bool at_slice_start() const {
    if (peek().kind != Tok::kIdent) return false;
    if (!input_var_from(peek().text)) return false;
    return peek(1).kind == Tok::kLBracket && peek(2).kind == Tok::kNumber &&
           peek(3).kind == Tok::kColon;
  }

  Slice parse_slice() {
    const Token& name_tok = expect(Tok::kIdent, "input name");
    InputVar var = *input_var_from(name_tok.text);
    check_action_allowed(name_tok, var);
    expect(Tok::kLBracket, "'['");
    const Token& begin_tok = peek();
    int32_t begin = expect_index_literal();
    expect(Tok::kColon, "':'");
    const Token& end_tok = peek();
    int32_t end = expect_index_literal();
    expect(Tok::kRBracket, "']'");
    int32_t dim = input_dim(var);
    if (begin < 0 || end > dim || begin >= end)
      fail(begin >= 0 && begin < end ? end_tok : begin_tok,
           std::string(input_var_name(var)) + "[" + std::to_string(begin) +
               ":" + std::to_string(end) +
               "] is not a valid slice for dimension " + std::to_string(dim),
           Errc::bounds);
    return Slice{var, begin, end};
  }

  ExprPtr parse_call(const Token& name_tok, Builtin builtin) {
    expect(Tok::kLParen, "'('");
    std::vector<ExprPtr> args;
    std::vector<Slice> slices;
    if (peek().kind != Tok::kRParen) {
      for (;;) {
        if (at_slice_start()) {
          slices.push_back(parse_slice());
        } else {
          ExprPtr arg = parse_expr();
          if (last_type_ != Type::kNum)
            fail(name_tok, std::string(builtin_name(builtin)) +
                               " arguments must be numeric");
          args.push_back(std::move(arg));
        }
        if (peek().kind != Tok::kComma) break;
        advance();
      }
    }
    expect(Tok::kRParen, "')'");

    size_t n_args = args.size(), n_slices = slices.size();
    auto want = [&](bool ok, const std::string& msg) {
      if (!ok) fail(name_tok, std::string(builtin_name(builtin)) + " " + msg);
    };
    switch (builtin) {
      case Builtin::kAbs:
      case Builtin::kExp:
      case Builtin::kLog:
      case Builtin::kSqrt:
      case Builtin::kTanh:
      case Builtin::kSq:
        want(n_slices == 0 && n_args == 1, "takes exactly one scalar argument");
        break;
      case Builtin::kClip:
        want(n_slices == 0 && n_args == 3, "takes (value, low, high)");
        break;
      case Builtin::kMin:
      case Builtin::kMax:
        want((n_slices == 1 && n_args == 0) || (n_slices == 0 && n_args >= 2),
             "takes one slice or at least two scalar arguments");
        break;
      case Builtin::kSum:
      case Builtin::kNorm1:
      case Builtin::kNorm2:
        want(n_slices == 1 && n_args == 0, "takes exactly one slice");
        break;
      case Builtin::kDot:
        want(n_slices == 2 && n_args == 0, "takes exactly two slices");
        if (slices[0].end - slices[0].begin != slices[1].end - slices[1].begin)
          fail(name_tok, "dot slices must have equal length", Errc::bounds);
        break;
    }

    auto node = std::make_unique<Expr>();
    node->kind = Expr::Kind::kCall;
    node->builtin = builtin;
    node->args = std::move(args);
    node->slices = std::move(slices);
    last_type_ = Type::kNum;
    return node;
  }

  ExprPtr parse_atom() {
    DepthGuard guard(this);
    const Token& tok = peek();
    switch (tok.kind) {
      case Tok::kNumber: {
        advance();
        last_type_ = Type::kNum;
        return make_number(tok.number);
      }
      case Tok::kLParen: {
        advance();
        ExprPtr inner = parse_expr();
        expect(Tok::kRParen, "')'");
        return inner;
      }
      case Tok::kIf:
        return parse_cond();
      case Tok::kIdent: {
        advance();
        if (auto var = input_var_from(tok.text))
          return parse_input_element(tok, *var);
        auto builtin_it = builtin_table().find(tok.text);
        if (builtin_it != builtin_table().end())
          return parse_call(tok, builtin_it->second);
        auto let_it = let_order_.find(tok.text);
        if (let_it == let_order_.end())
          fail(tok, "unknown identifier '" + tok.text + "'");
        auto node = std::make_unique<Expr>();
        node->kind = Expr::Kind::kLetRef;
        node->let_index = let_it->second;
        node->name = tok.text;
        last_type_ = let_types_.at(tok.text);
        return node;
      }
      default:
        fail(tok, "expected an expression");
    }
  }

  std::vector<Token> tokens_;
  size_t pos_ = 0;
  int depth_ = 0;
  Arity arity_;
  int32_t obs_dim_;
  int32_t act_dim_;
  Type last_type_ = Type::kNum;
  std::map<std::string, Type> let_types_;
  std::map<std::string, int32_t> let_order_;
};

}  // namespace

Program parse_program(const std::string& text, Arity arity, int32_t obs_dim,
                      int32_t act_dim) {
  if (obs_dim <= 0) raise(Errc::dimension, "obs_dim must be positive");
  if (act_dim < 0) raise(Errc::dimension, "act_dim must be non-negative");
  return Parser(tokenize(text), arity, obs_dim, act_dim).parse();
}

ExprPtr make_number(double v) {
  auto node = std::make_unique<Expr>();
  node->kind = Expr::Kind::kNumber;
  node->value = v;
  return node;
}

ExprPtr make_input(InputVar var, int32_t index) {
  auto node = std::make_unique<Expr>();
  node->kind = Expr::Kind::kInput;
  node->var = var;
  node->index = index;
  return node;
}

const char* builtin_name(Builtin b) {
  switch (b) {
    case Builtin::kAbs: return "abs";
    case Builtin::kMin: return "min";
    case Builtin::kMax: return "max";
    case Builtin::kClip: return "clip";
    case Builtin::kExp: return "exp";
    case Builtin::kLog: return "log";
    case Builtin::kSqrt: return "sqrt";
    case Builtin::kTanh: return "tanh";
    case Builtin::kSq: return "sq";
    case Builtin::kSum: return "sum";
    case Builtin::kDot: return "dot";
    case Builtin::kNorm1: return "norm1";
    case Builtin::kNorm2: return "norm2";
  }
  return "?";
}

const char* input_var_name(InputVar v) {
  switch (v) {
    case InputVar::kObs: return "obs";
    case InputVar::kAct: return "act";
    case InputVar::kNext: return "next";
  }
  return "?";
}

}  // namespace prof::lang
