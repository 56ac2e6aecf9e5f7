#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace prof::lang {

enum class Tok {
  kIdent, kNumber,
  kLet, kReturn, kIf, kThen, kElse, kAnd, kOr, kNot,
  kLParen, kRParen, kLBracket, kRBracket,
  kComma, kSemicolon, kColon, kAssign,
  kPlus, kMinus, kStar, kSlash, kCaret,
  kLt, kLe, kGt, kGe, kEq, kNe,
  kEof,
};

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  bool integral = false;  // literal written as plain digits
  int line = 1;
  int col = 1;
};

// Tokenizes a reward program.  Throws Error(parse) with line:col context
// on any character outside the language.
std::vector<Token> tokenize(const std::string& text);

}  // namespace prof::lang
