#pragma once

#include <cctype>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "uncertain/instances.hpp"

namespace uncertain {

struct Term {
  bool is_var = false;
  int var = -1;          // index into the owning CQ's variable list
  std::string constant;  // when !is_var
};

struct Atom {
  std::string relation;
  std::vector<Term> terms;
};

// Closed conjunctive query: existential variables plus a list of atoms.
struct ConjunctiveQuery {
  std::vector<std::string> vars;
  std::vector<Atom> atoms;
};

// Top-level Boolean combination of closed CQs.
struct QueryExpr {
  enum class Kind { Leaf, And, Or, Not };
  Kind kind = Kind::Leaf;
  int cq = -1;  // Leaf
  std::shared_ptr<QueryExpr> lhs, rhs;
};

struct Query {
  std::vector<ConjunctiveQuery> cqs;
  std::shared_ptr<QueryExpr> expr;
  std::string text;

  bool has_negation() const { return expr_has_not(expr.get()); }

 private:
  static bool expr_has_not(const QueryExpr* e) {
    if (!e) return false;
    if (e->kind == QueryExpr::Kind::Not) return true;
    return expr_has_not(e->lhs.get()) || expr_has_not(e->rhs.get());
  }
};

namespace detail {

struct QueryToken {
  enum class Kind { Ident, String, Punct, End };
  Kind kind;
  std::string text;
  std::size_t pos;
};

class QueryLexer {
 public:
  explicit QueryLexer(const std::string& text) : text_(text) { advance(); }

  const QueryToken& peek(int ahead = 0) {
    while (static_cast<int>(lookahead_.size()) <= ahead) lookahead_.push_back(lex());
    return lookahead_[ahead];
  }

  QueryToken next() {
    QueryToken t = peek();
    lookahead_.erase(lookahead_.begin());
    return t;
  }

 private:
  void advance() { lookahead_.push_back(lex()); }

  QueryToken lex() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    std::size_t start = pos_;
    if (pos_ >= text_.size()) return {QueryToken::Kind::End, "", start};
    char c = text_[pos_];
    if (c == '"') {
      ++pos_;
      std::string s;
      while (pos_ < text_.size() && text_[pos_] != '"') s += text_[pos_++];
      if (pos_ >= text_.size())
        throw InputError("query parse error at position " + std::to_string(start) +
                         ": unterminated string");
      ++pos_;
      return {QueryToken::Kind::String, s, start};
    }
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      std::string s;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_' || text_[pos_] == '-'))
        s += text_[pos_++];
      return {QueryToken::Kind::Ident, s, start};
    }
    ++pos_;
    return {QueryToken::Kind::Punct, std::string(1, c), start};
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  std::vector<QueryToken> lookahead_;
};

class QueryParser {
 public:
  QueryParser(const std::string& text, const Schema& schema)
      : lex_(text), schema_(schema), text_(text) {}

  Query parse() {
    Query q;
    q.text = text_;
    q.expr = parse_or(q);
    expect_end();
    return q;
  }

 private:
  using ExprPtr = std::shared_ptr<QueryExpr>;

  ExprPtr parse_or(Query& q) {
    auto lhs = parse_and(q);
    while (is_punct("|")) {
      lex_.next();
      auto rhs = parse_and(q);
      lhs = node(QueryExpr::Kind::Or, lhs, rhs);
    }
    return lhs;
  }

  ExprPtr parse_and(Query& q) {
    auto lhs = parse_unary(q);
    while (is_punct("&")) {
      lex_.next();
      auto rhs = parse_unary(q);
      lhs = node(QueryExpr::Kind::And, lhs, rhs);
    }
    return lhs;
  }

  ExprPtr parse_unary(Query& q) {
    if (is_punct("!")) {
      lex_.next();
      auto e = parse_unary(q);
      auto n = std::make_shared<QueryExpr>();
      n->kind = QueryExpr::Kind::Not;
      n->lhs = e;
      return n;
    }
    if (is_punct("(")) {
      lex_.next();
      auto e = parse_or(q);
      expect_punct(")");
      return e;
    }
    return parse_cq(q);
  }

  ExprPtr parse_cq(Query& q) {
    const auto& t = lex_.peek();
    if (t.kind != QueryToken::Kind::Ident || t.text != "exists")
      fail("expected 'exists', '!' or '('");
    lex_.next();
    ConjunctiveQuery cq;
    std::map<std::string, int> var_ids;
    while (lex_.peek().kind == QueryToken::Kind::Ident && !is_punct(".")) {
      std::string v = lex_.next().text;
      if (var_ids.count(v)) fail("duplicate variable " + v);
      var_ids[v] = static_cast<int>(cq.vars.size());
      cq.vars.push_back(v);
    }
    if (cq.vars.empty()) fail("expected at least one variable after 'exists'");
    expect_punct(".");
    cq.atoms.push_back(parse_atom(var_ids));
    // atoms continue across '&' only when followed by REL '(' — otherwise the
    // '&' belongs to the top-level Boolean combination
    while (is_punct("&") && lex_.peek(1).kind == QueryToken::Kind::Ident &&
           lex_.peek(1).text != "exists" &&
           lex_.peek(2).kind == QueryToken::Kind::Punct && lex_.peek(2).text == "(") {
      lex_.next();
      cq.atoms.push_back(parse_atom(var_ids));
    }
    std::vector<char> used(cq.vars.size(), 0);
    for (const auto& a : cq.atoms)
      for (const auto& tm : a.terms)
        if (tm.is_var) used[tm.var] = 1;
    for (std::size_t i = 0; i < cq.vars.size(); ++i)
      if (!used[i]) fail("quantified variable " + cq.vars[i] + " occurs in no atom");
    auto n = std::make_shared<QueryExpr>();
    n->kind = QueryExpr::Kind::Leaf;
    n->cq = static_cast<int>(q.cqs.size());
    q.cqs.push_back(std::move(cq));
    return n;
  }

  Atom parse_atom(const std::map<std::string, int>& var_ids) {
    const auto& t = lex_.peek();
    if (t.kind != QueryToken::Kind::Ident) fail("expected relation name");
    Atom a;
    a.relation = lex_.next().text;
    auto arity = schema_.arity_of(a.relation);
    if (!arity) fail("unknown relation " + a.relation);
    expect_punct("(");
    while (true) {
      const auto& tt = lex_.peek();
      Term term;
      if (tt.kind == QueryToken::Kind::String) {
        term.constant = lex_.next().text;
      } else if (tt.kind == QueryToken::Kind::Ident) {
        std::string s = lex_.next().text;
        auto it = var_ids.find(s);
        if (it != var_ids.end()) {
          term.is_var = true;
          term.var = it->second;
        } else {
          term.constant = s;
        }
      } else {
        fail("expected term");
      }
      a.terms.push_back(std::move(term));
      if (is_punct(",")) {
        lex_.next();
        continue;
      }
      break;
    }
    expect_punct(")");
    if (static_cast<int>(a.terms.size()) != *arity)
      fail("arity mismatch for " + a.relation + ": expected " +
           std::to_string(*arity) + " terms, got " + std::to_string(a.terms.size()));
    return a;
  }

  ExprPtr node(QueryExpr::Kind k, ExprPtr l, ExprPtr r) {
    auto n = std::make_shared<QueryExpr>();
    n->kind = k;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
  }

  bool is_punct(const std::string& p) {
    const auto& t = lex_.peek();
    return t.kind == QueryToken::Kind::Punct && t.text == p;
  }

  void expect_punct(const std::string& p) {
    if (!is_punct(p)) fail("expected '" + p + "'");
    lex_.next();
  }

  void expect_end() {
    if (lex_.peek().kind != QueryToken::Kind::End) fail("trailing input");
  }

  [[noreturn]] void fail(const std::string& msg) {
    throw InputError("query parse error at position " +
                     std::to_string(lex_.peek().pos) + ": " + msg);
  }

  QueryLexer lex_;
  const Schema& schema_;
  const std::string& text_;
};

}  // namespace detail

inline Query parse_query(const std::string& text, const Schema& schema) {
  return detail::QueryParser(text, schema).parse();
}

// --- naive evaluation by exhaustive homomorphism search ---------------------

namespace detail {

inline bool match_atoms(const ConjunctiveQuery& cq, const Instance& inst,
                        std::size_t atom_idx, std::vector<std::string>& binding) {
  if (atom_idx == cq.atoms.size()) return true;
  const Atom& a = cq.atoms[atom_idx];
  for (const Fact& f : inst.facts) {
    if (f.relation != a.relation) continue;
    std::vector<int> bound_here;
    bool ok = true;
    for (std::size_t i = 0; i < a.terms.size() && ok; ++i) {
      const Term& t = a.terms[i];
      if (!t.is_var) {
        ok = f.args[i] == t.constant;
      } else if (binding[t.var].empty()) {
        binding[t.var] = f.args[i];
        bound_here.push_back(t.var);
      } else {
        ok = binding[t.var] == f.args[i];
      }
    }
    if (ok && match_atoms(cq, inst, atom_idx + 1, binding)) return true;
    for (int v : bound_here) binding[v].clear();
  }
  return false;
}

inline bool eval_expr(const Query& q, const QueryExpr* e, const Instance& inst);

}  // namespace detail

inline bool eval_cq_naive(const ConjunctiveQuery& cq, const Instance& inst) {
  std::vector<std::string> binding(cq.vars.size());
  return detail::match_atoms(cq, inst, 0, binding);
}

namespace detail {

inline bool eval_expr(const Query& q, const QueryExpr* e, const Instance& inst) {
  switch (e->kind) {
    case QueryExpr::Kind::Leaf: return eval_cq_naive(q.cqs[e->cq], inst);
    case QueryExpr::Kind::And:
      return eval_expr(q, e->lhs.get(), inst) && eval_expr(q, e->rhs.get(), inst);
    case QueryExpr::Kind::Or:
      return eval_expr(q, e->lhs.get(), inst) || eval_expr(q, e->rhs.get(), inst);
    case QueryExpr::Kind::Not: return !eval_expr(q, e->lhs.get(), inst);
  }
  return false;
}

}  // namespace detail

inline bool eval_query_naive(const Query& q, const Instance& inst) {
  return detail::eval_expr(q, q.expr.get(), inst);
}

// World-enumeration oracle for query probability; independent of the
// automaton pipeline.
template <typename P = double, typename Inst>
P query_probability_bruteforce_t(const Inst& inst, const EventTable& events,
                                 const Query& q,
                                 std::size_t cap = max_enumerable_events()) {
  check_event_cap(events.size(), cap);
  P total = prob_cast<P>(0.0);
  const std::uint64_t n = std::uint64_t{1} << events.size();
  for (std::uint64_t mask = 0; mask < n; ++mask) {
    Valuation v = valuation_from_mask(events, mask);
    if (eval_query_naive(q, world_of(inst, v)))
      total += valuation_probability<P>(events, mask);
  }
  return total;
}

inline double query_probability_bruteforce(const PCInstance& pc, const Query& q,
                                           std::size_t cap = max_enumerable_events()) {
  return query_probability_bruteforce_t<double>(pc, pc.events, q, cap);
}

inline double query_probability_bruteforce(const PCCInstance& pcc, const Query& q,
                                           std::size_t cap = max_enumerable_events()) {
  return query_probability_bruteforce_t<double>(pcc, pcc.events(), q, cap);
}

inline double query_probability_bruteforce(const TIDInstance& tid, const Query& q,
                                           std::size_t cap = max_enumerable_events()) {
  PCInstance pc = tid_to_pc(tid);
  return query_probability_bruteforce_t<double>(pc, pc.events, q, cap);
}

}  // namespace uncertain
