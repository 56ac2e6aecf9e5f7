#include "core/reward/lexer.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>

#include "core/error.hpp"

namespace prof::lang {
namespace {

[[noreturn]] void lex_error(int line, int col, const std::string& msg) {
  raise(Errc::parse,
        "lex error at " + std::to_string(line) + ":" + std::to_string(col) +
            ": " + msg);
}

Tok keyword_or_ident(const std::string& s) {
  if (s == "let") return Tok::kLet;
  if (s == "return") return Tok::kReturn;
  if (s == "if") return Tok::kIf;
  if (s == "then") return Tok::kThen;
  if (s == "else") return Tok::kElse;
  if (s == "and") return Tok::kAnd;
  if (s == "or") return Tok::kOr;
  if (s == "not") return Tok::kNot;
  return Tok::kIdent;
}

}  // namespace

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  size_t i = 0;
  int line = 1, col = 1;
  auto push = [&](Tok kind, std::string t, int c) {
    out.push_back(Token{kind, std::move(t), 0.0, false, line, c});
  };
  while (i < text.size()) {
    char ch = text[i];
    if (ch == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (ch == ' ' || ch == '\t' || ch == '\r') {
      ++col;
      ++i;
      continue;
    }
    int start_col = col;
    if (std::isalpha(uint8_t(ch)) || ch == '_') {
      size_t j = i;
      while (j < text.size() &&
             (std::isalnum(uint8_t(text[j])) || text[j] == '_'))
        ++j;
      std::string word = text.substr(i, j - i);
      push(keyword_or_ident(word), word, start_col);
      col += int(j - i);
      i = j;
      continue;
    }
    if (std::isdigit(uint8_t(ch)) ||
        (ch == '.' && i + 1 < text.size() && std::isdigit(uint8_t(text[i + 1])))) {
      size_t j = i;
      bool integral = true;
      while (j < text.size() && std::isdigit(uint8_t(text[j]))) ++j;
      if (j < text.size() && text[j] == '.') {
        integral = false;
        ++j;
        while (j < text.size() && std::isdigit(uint8_t(text[j]))) ++j;
      }
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        integral = false;
        size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k >= text.size() || !std::isdigit(uint8_t(text[k])))
          lex_error(line, start_col, "malformed exponent");
        ++k;
        while (k < text.size() && std::isdigit(uint8_t(text[k]))) ++k;
        j = k;
      }
      std::string word = text.substr(i, j - i);
      Token tok{Tok::kNumber, word, std::strtod(word.c_str(), nullptr),
                integral, line, start_col};
      out.push_back(std::move(tok));
      col += int(j - i);
      i = j;
      continue;
    }
    auto two = [&](char second) {
      return i + 1 < text.size() && text[i + 1] == second;
    };
    switch (ch) {
      case '(': push(Tok::kLParen, "(", start_col); break;
      case ')': push(Tok::kRParen, ")", start_col); break;
      case '[': push(Tok::kLBracket, "[", start_col); break;
      case ']': push(Tok::kRBracket, "]", start_col); break;
      case ',': push(Tok::kComma, ",", start_col); break;
      case ';': push(Tok::kSemicolon, ";", start_col); break;
      case ':': push(Tok::kColon, ":", start_col); break;
      case '+': push(Tok::kPlus, "+", start_col); break;
      case '-': push(Tok::kMinus, "-", start_col); break;
      case '*': push(Tok::kStar, "*", start_col); break;
      case '/': push(Tok::kSlash, "/", start_col); break;
      case '^': push(Tok::kCaret, "^", start_col); break;
      case '=':
        if (two('=')) {
          push(Tok::kEq, "==", start_col);
          ++i;
          ++col;
        } else {
          push(Tok::kAssign, "=", start_col);
        }
        break;
      case '<':
        if (two('=')) {
          push(Tok::kLe, "<=", start_col);
          ++i;
          ++col;
        } else {
          push(Tok::kLt, "<", start_col);
        }
        break;
      case '>':
        if (two('=')) {
          push(Tok::kGe, ">=", start_col);
          ++i;
          ++col;
        } else {
          push(Tok::kGt, ">", start_col);
        }
        break;
      case '!':
        if (two('=')) {
          push(Tok::kNe, "!=", start_col);
          ++i;
          ++col;
        } else {
          lex_error(line, start_col, "'!' is only valid as '!='");
        }
        break;
      default:
        lex_error(line, start_col,
                  std::string("unexpected character '") + ch + "'");
    }
    ++i;
    ++col;
  }
  out.push_back(Token{Tok::kEof, "", 0.0, false, line, col});
  return out;
}

}  // namespace prof::lang
