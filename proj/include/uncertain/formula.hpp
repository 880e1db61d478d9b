#pragma once

#include <cctype>
#include <memory>
#include <set>
#include <string>

#include "uncertain/core.hpp"

namespace uncertain {

// Propositional annotation over event literals.
// Grammar:  ann := lit | ann "&" ann | ann "|" ann | "(" ann ")"
//           lit := name | "!" name | "T" | "F"
// "&" binds tighter than "|".
struct Formula {
  enum class Kind { True, False, Var, NotVar, And, Or };
  Kind kind;
  std::string var;                      // Var / NotVar
  std::shared_ptr<Formula> lhs, rhs;    // And / Or

  static std::shared_ptr<Formula> make_true() {
    return std::make_shared<Formula>(Formula{Kind::True, {}, nullptr, nullptr});
  }
  static std::shared_ptr<Formula> make_false() {
    return std::make_shared<Formula>(Formula{Kind::False, {}, nullptr, nullptr});
  }
  static std::shared_ptr<Formula> var_of(const std::string& v, bool positive = true) {
    return std::make_shared<Formula>(
        Formula{positive ? Kind::Var : Kind::NotVar, v, nullptr, nullptr});
  }
  static std::shared_ptr<Formula> conj(std::shared_ptr<Formula> a,
                                       std::shared_ptr<Formula> b) {
    return std::make_shared<Formula>(Formula{Kind::And, {}, std::move(a), std::move(b)});
  }
  static std::shared_ptr<Formula> disj(std::shared_ptr<Formula> a,
                                       std::shared_ptr<Formula> b) {
    return std::make_shared<Formula>(Formula{Kind::Or, {}, std::move(a), std::move(b)});
  }
};

using FormulaPtr = std::shared_ptr<Formula>;

inline bool eval_formula(const Formula& f, const Valuation& v) {
  switch (f.kind) {
    case Formula::Kind::True: return true;
    case Formula::Kind::False: return false;
    case Formula::Kind::Var: return v.get(f.var);
    case Formula::Kind::NotVar: return !v.get(f.var);
    case Formula::Kind::And: return eval_formula(*f.lhs, v) && eval_formula(*f.rhs, v);
    case Formula::Kind::Or: return eval_formula(*f.lhs, v) || eval_formula(*f.rhs, v);
  }
  return false;
}

inline void collect_events(const Formula& f, std::set<std::string>& out) {
  switch (f.kind) {
    case Formula::Kind::Var:
    case Formula::Kind::NotVar: out.insert(f.var); break;
    case Formula::Kind::And:
    case Formula::Kind::Or:
      collect_events(*f.lhs, out);
      collect_events(*f.rhs, out);
      break;
    default: break;
  }
}

inline std::string formula_to_string(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::True: return "T";
    case Formula::Kind::False: return "F";
    case Formula::Kind::Var: return f.var;
    case Formula::Kind::NotVar: return "!" + f.var;
    case Formula::Kind::And:
      return "(" + formula_to_string(*f.lhs) + " & " + formula_to_string(*f.rhs) + ")";
    case Formula::Kind::Or:
      return "(" + formula_to_string(*f.lhs) + " | " + formula_to_string(*f.rhs) + ")";
  }
  return "?";
}

namespace detail {

class FormulaParser {
 public:
  explicit FormulaParser(const std::string& text) : text_(text) {}

  FormulaPtr parse() {
    auto f = parse_or();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing input");
    return f;
  }

 private:
  FormulaPtr parse_or() {
    auto lhs = parse_and();
    while (peek() == '|') {
      ++pos_;
      lhs = Formula::disj(lhs, parse_and());
    }
    return lhs;
  }

  FormulaPtr parse_and() {
    auto lhs = parse_atom();
    while (peek() == '&') {
      ++pos_;
      lhs = Formula::conj(lhs, parse_atom());
    }
    return lhs;
  }

  FormulaPtr parse_atom() {
    skip_ws();
    if (peek() == '(') {
      ++pos_;
      auto f = parse_or();
      skip_ws();
      if (peek() != ')') fail("expected ')'");
      ++pos_;
      return f;
    }
    if (peek() == '!') {
      ++pos_;
      std::string name = parse_name();
      return Formula::var_of(name, false);
    }
    std::string name = parse_name();
    if (name == "T") return Formula::make_true();
    if (name == "F") return Formula::make_false();
    return Formula::var_of(name);
  }

  std::string parse_name() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_'))
      ++pos_;
    if (pos_ == start) fail("expected event name");
    return text_.substr(start, pos_ - start);
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  [[noreturn]] void fail(const std::string& msg) {
    throw InputError("annotation parse error at position " + std::to_string(pos_) +
                     ": " + msg + " in \"" + text_ + "\"");
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline FormulaPtr parse_annotation(const std::string& text) {
  return detail::FormulaParser(text).parse();
}

}  // namespace uncertain
