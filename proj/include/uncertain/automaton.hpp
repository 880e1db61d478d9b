#pragma once

#include <array>
#include <optional>
#include <set>
#include <vector>

#include "uncertain/query.hpp"
#include "uncertain/treedec.hpp"

namespace uncertain {

// Deterministic bottom-up automaton over rooted binarized bag trees.
//
// A state per conjunctive query is a set of progress tokens plus a latched
// satisfaction flag. A token records, relative to the current bag: variable
// bindings (an element of the bag, or "bound but forgotten"), the set of
// atoms already matched below, and in-flight atom/fact matches whose argument
// positions are confirmed one bag at a time (an argument can only be checked
// in a bag containing both the fact vertex and the element). A fact's
// presence is consumed exactly once, at its introduction bag (the topmost bag
// containing the fact vertex): in-flight matches on the fact either convert
// to matched atoms (fact present, all positions confirmed) or die.

constexpr int kVarUnbound = -1;
constexpr int kVarForgotten = -2;

struct Token {
  std::vector<int> binding;                 // per CQ variable
  std::uint32_t done = 0;                   // matched-atom mask
  std::vector<std::array<int, 3>> partials; // (atom, fact pos, posmask), sorted

  auto operator<=>(const Token&) const = default;
};

struct CQState {
  bool satisfied = false;
  std::vector<Token> tokens;  // sorted, deduplicated

  auto operator<=>(const CQState&) const = default;
};

struct AutomatonState {
  std::vector<CQState> cq;

  auto operator<=>(const AutomatonState&) const = default;
};

struct BagAutomaton {
  Query query;
  Schema schema;
  int width_hint = 0;
  std::size_t token_cap = 200000;  // state-space explosion guard
};

inline BagAutomaton compile(Query q, const Schema& schema, int width_hint = 0,
                            std::size_t token_cap = 200000) {
  for (const auto& cq : q.cqs) {
    if (cq.atoms.size() > 32)
      throw LimitError("conjunctive query has more than 32 atoms");
    for (const auto& a : cq.atoms)
      if (a.terms.size() > 16)
        throw LimitError("atom arity above 16 unsupported by the bag automaton");
  }
  return {std::move(q), schema, width_hint, token_cap};
}

struct NodePlan {
  std::vector<int> elements;     // element vertex ids in the bag, sorted
  std::vector<int> facts_here;   // fact positions whose vertex is in the bag
  std::vector<int> facts_intro;  // fact positions introduced at this node
};

// Fixed (graph, rooted decomposition, fact list) context; presence varies.
struct RunContext {
  const IncidenceGraph* graph = nullptr;
  const TreeDecomposition* tree = nullptr;
  std::vector<Fact> facts;
  std::vector<std::vector<int>> fact_arg_vertex;  // per fact pos, per arg
  std::vector<NodePlan> plans;
  std::vector<int> order;  // children before parents
};

inline RunContext make_run_context(const IncidenceGraph& g, const TreeDecomposition& t,
                                   std::vector<Fact> facts) {
  if (t.root < 0)
    throw InputError("automaton run requires a rooted decomposition");
  if (g.fact_vertex.size() != facts.size())
    throw InputError("decomposition/instance mismatch: fact count differs");
  RunContext ctx;
  ctx.graph = &g;
  ctx.tree = &t;
  ctx.facts = std::move(facts);
  ctx.fact_arg_vertex.resize(ctx.facts.size());
  for (std::size_t i = 0; i < ctx.facts.size(); ++i)
    for (const auto& a : ctx.facts[i].args)
      ctx.fact_arg_vertex[i].push_back(g.element_ids.at(a));

  const int nb = static_cast<int>(t.bags.size());
  ctx.plans.resize(nb);
  std::vector<int> some_bag(g.size(), -1);
  for (int b = 0; b < nb; ++b) {
    for (int v : t.bags[b]) {
      if (v >= static_cast<int>(g.size()))
        throw InputError("decomposition/instance mismatch: unknown vertex in bag");
      if (some_bag[v] < 0) some_bag[v] = b;
      const auto& vert = g.vertices[v];
      if (vert.kind == VertexKind::Element)
        ctx.plans[b].elements.push_back(v);
      else if (vert.kind == VertexKind::FactNode)
        ctx.plans[b].facts_here.push_back(vert.index);
    }
    std::sort(ctx.plans[b].elements.begin(), ctx.plans[b].elements.end());
  }
  for (std::size_t pos = 0; pos < ctx.facts.size(); ++pos) {
    int v = g.fact_vertex[pos];
    int b = some_bag[v];
    if (b < 0) throw InputError("decomposition/instance mismatch: fact vertex in no bag");
    while (t.parent[b] >= 0 && t.bag_contains(t.parent[b], v)) b = t.parent[b];
    ctx.plans[b].facts_intro.push_back(static_cast<int>(pos));
  }
  for (auto& p : ctx.plans) std::sort(p.facts_intro.begin(), p.facts_intro.end());

  // children-first order: parents always carry smaller ids after binarization
  for (int b = nb - 1; b >= 0; --b) ctx.order.push_back(b);
  return ctx;
}

namespace detail {

inline bool element_in(const NodePlan& p, int v) {
  return std::binary_search(p.elements.begin(), p.elements.end(), v);
}

// Re-expresses a child token relative to the parent bag: bindings to exited
// elements become "forgotten". Partials only reference facts still in the
// bag (conversion at the child already resolved the rest).
inline Token restrict_token(const Token& tok, const NodePlan& plan,
                            const IncidenceGraph& g) {
  Token out = tok;
  for (int& b : out.binding)
    if (b >= 0 && !element_in(plan, b)) b = kVarForgotten;
  std::vector<std::array<int, 3>> kept;
  for (const auto& p : out.partials) {
    int fv = g.fact_vertex[p[1]];
    bool here = false;
    for (int fp : plan.facts_here)
      if (fp == p[1]) { here = true; break; }
    (void)fv;
    if (here) kept.push_back(p);
  }
  out.partials = std::move(kept);
  return out;
}

// Joins one token from each child subtree. Bindings to the same in-bag
// element unify; a forgotten binding can never coincide with any other
// binding (the shared element would still be in the bag by running
// intersection), so those pairs are rejected.
inline std::optional<Token> merge_tokens(const Token& a, const Token& b) {
  Token out = a;
  for (std::size_t i = 0; i < out.binding.size(); ++i) {
    int x = a.binding[i], y = b.binding[i];
    if (x == kVarUnbound) {
      out.binding[i] = y;
    } else if (y == kVarUnbound) {
      out.binding[i] = x;
    } else if (x == y && x != kVarForgotten) {
      out.binding[i] = x;
    } else {
      // Distinct elements, or forgotten on both sides: a variable bound in
      // both subtrees to the same element would still be in this bag.
      return std::nullopt;
    }
  }
  out.done = a.done | b.done;
  out.partials = a.partials;
  for (const auto& p : b.partials) {
    bool merged = false;
    for (auto& q : out.partials)
      if (q[0] == p[0] && q[1] == p[1]) {
        q[2] |= p[2];
        merged = true;
        break;
      }
    if (!merged) out.partials.push_back(p);
  }
  std::sort(out.partials.begin(), out.partials.end());
  return out;
}

// All single confirmation steps available to a token at this bag: extend or
// start an in-flight match of some atom against some bag fact by checking one
// more argument position.
inline void confirmation_steps(const Token& tok, const ConjunctiveQuery& cq,
                               const NodePlan& plan, const RunContext& ctx,
                               std::vector<Token>& out) {
  for (int fpos : plan.facts_here) {
    const Fact& f = ctx.facts[fpos];
    for (std::size_t ai = 0; ai < cq.atoms.size(); ++ai) {
      const Atom& atom = cq.atoms[ai];
      if (atom.relation != f.relation) continue;
      int existing = -1;
      for (std::size_t pi = 0; pi < tok.partials.size(); ++pi)
        if (tok.partials[pi][0] == static_cast<int>(ai) && tok.partials[pi][1] == fpos)
          existing = static_cast<int>(pi);
      int mask = existing >= 0 ? tok.partials[existing][2] : 0;
      for (std::size_t i = 0; i < atom.terms.size(); ++i) {
        if (mask & (1 << i)) continue;
        const Term& term = atom.terms[i];
        int new_binding_var = -1, new_binding_val = 0;
        if (term.is_var) {
          int e = ctx.fact_arg_vertex[fpos][i];
          if (!element_in(plan, e)) continue;  // argument not visible here
          int cur = tok.binding[term.var];
          if (cur == kVarUnbound) {
            new_binding_var = term.var;
            new_binding_val = e;
          } else if (cur != e) {
            continue;  // conflicting or forgotten binding
          }
        } else {
          if (f.args[i] != term.constant) continue;
        }
        Token next = tok;
        if (new_binding_var >= 0) next.binding[new_binding_var] = new_binding_val;
        if (existing >= 0) {
          next.partials[existing][2] |= 1 << i;
        } else {
          next.partials.push_back({static_cast<int>(ai), fpos, 1 << i});
          std::sort(next.partials.begin(), next.partials.end());
        }
        out.push_back(std::move(next));
      }
    }
  }
}

inline void saturate(std::set<Token>& tokens, const ConjunctiveQuery& cq,
                     const NodePlan& plan, const RunContext& ctx,
                     std::size_t token_cap) {
  std::vector<Token> work(tokens.begin(), tokens.end());
  std::vector<Token> steps;
  while (!work.empty()) {
    Token tok = std::move(work.back());
    work.pop_back();
    steps.clear();
    confirmation_steps(tok, cq, plan, ctx, steps);
    for (auto& s : steps)
      if (tokens.insert(s).second) work.push_back(std::move(s));
    if (tokens.size() > token_cap)
      throw LimitError("automaton state-space guard tripped: " +
                       std::to_string(tokens.size()) + " tokens in one bag");
  }
}

inline std::uint32_t full_mask_of(const Atom& atom) {
  return (std::uint32_t{1} << atom.terms.size()) - 1;
}

// Deterministic conversion at an introduction bag: a present fact turns its
// fully-confirmed in-flight matches into matched atoms; all of its in-flight
// matches are then discarded either way.
inline Token apply_presence(const Token& tok, const ConjunctiveQuery& cq,
                            const std::vector<int>& intro, const auto& present) {
  Token out = tok;
  std::vector<std::array<int, 3>> kept;
  for (const auto& p : out.partials) {
    bool introduced = std::binary_search(intro.begin(), intro.end(), p[1]);
    if (!introduced) {
      kept.push_back(p);
      continue;
    }
    if (present(p[1]) &&
        static_cast<std::uint32_t>(p[2]) == full_mask_of(cq.atoms[p[0]]))
      out.done |= std::uint32_t{1} << p[0];
  }
  out.partials = std::move(kept);
  return out;
}

inline bool expr_accepts(const QueryExpr* e, const std::vector<CQState>& cq) {
  switch (e->kind) {
    case QueryExpr::Kind::Leaf: return cq[e->cq].satisfied;
    case QueryExpr::Kind::And:
      return expr_accepts(e->lhs.get(), cq) && expr_accepts(e->rhs.get(), cq);
    case QueryExpr::Kind::Or:
      return expr_accepts(e->lhs.get(), cq) || expr_accepts(e->rhs.get(), cq);
    case QueryExpr::Kind::Not: return !expr_accepts(e->lhs.get(), cq);
  }
  return false;
}

}  // namespace detail

// One deterministic transition for one CQ at one node.
inline CQState transition_cq(const BagAutomaton& a, int cq_idx, const RunContext& ctx,
                             int node, const std::vector<const CQState*>& child_states,
                             const auto& present) {
  const ConjunctiveQuery& cq = a.query.cqs[cq_idx];
  const NodePlan& plan = ctx.plans[node];
  CQState out;
  for (const CQState* s : child_states) out.satisfied = out.satisfied || s->satisfied;
  if (out.satisfied) return out;  // latched below; tokens no longer matter

  Token base;
  base.binding.assign(cq.vars.size(), kVarUnbound);

  std::set<Token> tokens;
  if (child_states.empty()) {
    tokens.insert(base);
  } else if (child_states.size() == 1) {
    for (const Token& t : child_states[0]->tokens)
      tokens.insert(detail::restrict_token(t, plan, *ctx.graph));
    tokens.insert(base);
  } else {
    std::vector<Token> left, right;
    for (const Token& t : child_states[0]->tokens)
      left.push_back(detail::restrict_token(t, plan, *ctx.graph));
    for (const Token& t : child_states[1]->tokens)
      right.push_back(detail::restrict_token(t, plan, *ctx.graph));
    left.push_back(base);
    right.push_back(base);
    for (const Token& x : left)
      for (const Token& y : right)
        if (auto m = detail::merge_tokens(x, y)) tokens.insert(std::move(*m));
  }

  detail::saturate(tokens, cq, plan, ctx, a.token_cap);

  const std::uint32_t all_atoms = (std::uint32_t{1} << cq.atoms.size()) - 1;
  std::set<Token> converted;
  for (const Token& t : tokens) {
    Token c = detail::apply_presence(t, cq, plan.facts_intro, present);
    if (c.done == all_atoms)
      out.satisfied = true;
    else
      converted.insert(std::move(c));
  }
  if (out.satisfied) return out;  // latched; tokens no longer matter
  out.tokens.assign(converted.begin(), converted.end());
  return out;
}

// Bottom-up run with a per-fact presence predicate; returns root acceptance.
inline bool run_prepared(const BagAutomaton& a, const RunContext& ctx,
                         const std::vector<char>& presence) {
  if (presence.size() != ctx.facts.size())
    throw InputError("presence vector size mismatch");
  auto present = [&](int pos) { return presence[pos] != 0; };

  std::vector<AutomatonState> states(ctx.tree->bags.size());
  for (int node : ctx.order) {
    AutomatonState st;
    st.cq.resize(a.query.cqs.size());
    for (std::size_t q = 0; q < a.query.cqs.size(); ++q) {
      std::vector<const CQState*> kids;
      for (int c : ctx.tree->children[node]) kids.push_back(&states[c].cq[q]);
      st.cq[q] = transition_cq(a, static_cast<int>(q), ctx, node, kids, present);
    }
    states[node] = std::move(st);
  }
  return detail::expr_accepts(a.query.expr.get(), states[ctx.tree->root].cq);
}

// Runs the automaton over a certain instance with a caller-supplied valid
// decomposition of its incidence graph.
inline bool run(const BagAutomaton& a, const TreeDecomposition& t, const Instance& inst) {
  IncidenceGraph g = build_graph(inst);
  auto v = validate(t, g);
  if (!v.ok) throw InputError("decomposition/instance mismatch: " + v.report);
  TreeDecomposition rooted = t.root >= 0 && !t.children.empty() ? t : root_and_binarize(t);
  std::vector<Fact> facts(inst.facts.begin(), inst.facts.end());
  RunContext ctx = make_run_context(g, rooted, facts);
  std::vector<char> presence(facts.size(), 1);
  return run_prepared(a, ctx, presence);
}

}  // namespace uncertain
