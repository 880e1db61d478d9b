#pragma once

#include <map>
#include <set>
#include <vector>

#include "uncertain/automaton.hpp"
#include "uncertain/circuit.hpp"

namespace uncertain {

struct LineageResult {
  Circuit circuit;
  TreeDecomposition circuit_decomposition;
  std::vector<int> gate_origin;  // per gate: joint-decomposition node, or -1
  std::size_t max_tokens_per_node = 0;
  std::size_t gate_count = 0;
};

// Moralized gate graph of a circuit: gate vertices, wire edges, and the
// inputs of each gate connected pairwise so that every gate-consistency
// factor has a covering bag in any valid decomposition.
inline IncidenceGraph gate_graph(const Circuit& c) {
  IncidenceGraph g;
  g.gate_vertex.resize(c.gates.size());
  for (std::size_t i = 0; i < c.gates.size(); ++i)
    g.gate_vertex[i] =
        g.add_vertex(VertexKind::GateNode, "g" + std::to_string(i), static_cast<int>(i));
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    const auto& args = c.gates[i].args;
    for (int a : args) g.add_edge(static_cast<int>(i), a);
    for (std::size_t x = 0; x < args.size(); ++x)
      for (std::size_t y = x + 1; y < args.size(); ++y)
        g.add_edge(args[x], args[y]);
  }
  return g;
}

namespace detail {

// Per-node symbolic state for one CQ: achievable tokens with the gate that
// witnesses their achievability, plus the latched satisfaction gate.
struct TokenGates {
  std::map<Token, int> gates;
  int sat = -1;
};

}  // namespace detail

// Runs the automaton symbolically over an uncertain instance: one gate per
// achievable token per node, defined as an OR over derivations
// (child-token gates AND the annotation gates of the facts the derivation
// uses). Confirmations are free; a fact's annotation is consumed exactly
// once, at its introduction bag, when in-flight matches convert to matched
// atoms. The construction never needs absence literals: dropping a
// convertible match is always allowed, which keeps achievability monotone in
// fact presence while remaining exact for acceptance.
inline LineageResult build_lineage(const BagAutomaton& a, const PCCInstance& inst,
                                   const IncidenceGraph& g, const TreeDecomposition& t) {
  std::vector<Fact> facts;
  facts.reserve(inst.facts.size());
  for (const auto& [f, gate] : inst.facts) facts.push_back(f);
  RunContext ctx = make_run_context(g, t, std::move(facts));

  CircuitBuilder b(inst.events());

  // embed the instance's annotation circuit
  std::vector<int> emitted(inst.circuit.gates.size(), -1);
  for (std::size_t i = 0; i < inst.circuit.gates.size(); ++i) {
    const Gate& gt = inst.circuit.gates[i];
    switch (gt.kind) {
      case GateKind::Input: emitted[i] = b.input(gt.event); break;
      case GateKind::ConstTrue: emitted[i] = b.const_true(); break;
      case GateKind::ConstFalse: emitted[i] = b.const_false(); break;
      case GateKind::Not: emitted[i] = b.gate_not(emitted[gt.args[0]]); break;
      case GateKind::And:
      case GateKind::Or: {
        std::vector<int> args;
        for (int x : gt.args) args.push_back(emitted[x]);
        emitted[i] = gt.kind == GateKind::And ? b.gate_and(std::move(args))
                                              : b.gate_or(std::move(args));
        break;
      }
    }
  }
  std::vector<int> ann(inst.facts.size());
  for (std::size_t pos = 0; pos < inst.facts.size(); ++pos)
    ann[pos] = emitted[inst.facts[pos].second];

  const std::size_t embedded_gates = b.peek().size();
  std::vector<int> origin_of_new;  // per gate beyond embedded_gates

  std::size_t max_tokens = 0;
  const std::size_t ncq = a.query.cqs.size();
  std::vector<std::vector<detail::TokenGates>> node_tg(
      t.bags.size(), std::vector<detail::TokenGates>(ncq));

  for (int node : ctx.order) {
    const NodePlan& plan = ctx.plans[node];
    const std::size_t gates_before = b.peek().size();
    for (std::size_t q = 0; q < ncq; ++q) {
      const ConjunctiveQuery& cq = a.query.cqs[q];
      const std::uint32_t all_atoms = (std::uint32_t{1} << cq.atoms.size()) - 1;

      Token base;
      base.binding.assign(cq.vars.size(), kVarUnbound);
      std::vector<std::pair<Token, int>> base_side{{base, b.const_true()}};

      const auto& kids = ctx.tree->children[node];
      std::vector<std::pair<Token, int>> left, right;
      std::vector<int> sat_terms;
      auto load_side = [&](int child, std::vector<std::pair<Token, int>>& side) {
        const auto& tg = node_tg[child][q];
        if (tg.sat >= 0) sat_terms.push_back(tg.sat);
        for (const auto& [tok, gate] : tg.gates)
          side.emplace_back(detail::restrict_token(tok, plan, g), gate);
        bool has_base = false;
        for (auto& [tok, gate] : side)
          if (tok == base) has_base = true;
        if (!has_base) side.emplace_back(base, b.const_true());
      };
      if (kids.empty()) {
        left = base_side;
        right = {{base, b.const_true()}};
      } else if (kids.size() == 1) {
        load_side(kids[0], left);
        right = {{base, b.const_true()}};
      } else {
        load_side(kids[0], left);
        load_side(kids[1], right);
      }

      std::map<Token, std::vector<int>> terms;
      for (const auto& [t1, g1] : left) {
        for (const auto& [t2, g2] : right) {
          auto m = detail::merge_tokens(t1, t2);
          if (!m) continue;
          int pg = b.gate_and({g1, g2});
          if (pg == b.const_false()) continue;
          std::set<Token> closure{*m};
          detail::saturate(closure, cq, plan, ctx, a.token_cap);
          for (const Token& s : closure) {
            // introduced facts holding a fully confirmed in-flight match
            std::vector<int> usable;
            for (int f : plan.facts_intro) {
              for (const auto& p : s.partials)
                if (p[1] == f && static_cast<std::uint32_t>(p[2]) ==
                                     detail::full_mask_of(cq.atoms[p[0]])) {
                  usable.push_back(f);
                  break;
                }
            }
            const std::size_t nu = usable.size();
            for (std::uint64_t sub = 0; sub < (std::uint64_t{1} << nu); ++sub) {
              Token r = s;
              std::vector<int> term_args{pg};
              for (std::size_t i = 0; i < nu; ++i)
                if ((sub >> i) & 1) term_args.push_back(ann[usable[i]]);
              std::vector<std::array<int, 3>> kept;
              for (const auto& p : r.partials) {
                bool introduced = std::binary_search(plan.facts_intro.begin(),
                                                     plan.facts_intro.end(), p[1]);
                if (!introduced) {
                  kept.push_back(p);
                  continue;
                }
                bool used = false;
                for (std::size_t i = 0; i < nu; ++i)
                  if (((sub >> i) & 1) && usable[i] == p[1]) used = true;
                if (used && static_cast<std::uint32_t>(p[2]) ==
                                detail::full_mask_of(cq.atoms[p[0]]))
                  r.done |= std::uint32_t{1} << p[0];
              }
              r.partials = std::move(kept);
              int gate = b.gate_and(std::move(term_args));
              if (gate == b.const_false()) continue;
              if (r.done == all_atoms)
                sat_terms.push_back(gate);
              else
                terms[r].push_back(gate);
            }
          }
        }
      }

      detail::TokenGates tg;
      for (auto& [tok, ts] : terms) tg.gates[tok] = b.gate_or(std::move(ts));
      tg.sat = b.gate_or(std::move(sat_terms));
      max_tokens = std::max(max_tokens, tg.gates.size());
      if (tg.gates.size() > a.token_cap)
        throw LimitError("lineage state-space guard tripped: " +
                         std::to_string(tg.gates.size()) + " tokens in one bag");
      node_tg[node][q] = std::move(tg);
    }
    for (std::size_t i = gates_before; i < b.peek().size(); ++i)
      origin_of_new.push_back(node);
    // free children now that the parent consumed them
    for (int c : ctx.tree->children[node])
      node_tg[c].assign(ncq, detail::TokenGates{});
  }

  // top-level Boolean combination over per-CQ satisfaction at the root
  std::vector<int> cq_out(ncq);
  for (std::size_t q = 0; q < ncq; ++q) cq_out[q] = node_tg[t.root][q].sat;
  auto emit_expr = [&](auto&& self, const QueryExpr* e) -> int {
    switch (e->kind) {
      case QueryExpr::Kind::Leaf: return cq_out[e->cq];
      case QueryExpr::Kind::And:
        return b.gate_and({self(self, e->lhs.get()), self(self, e->rhs.get())});
      case QueryExpr::Kind::Or:
        return b.gate_or({self(self, e->lhs.get()), self(self, e->rhs.get())});
      case QueryExpr::Kind::Not: return b.gate_not(self(self, e->lhs.get()));
    }
    return b.const_false();
  };
  const std::size_t gates_before_top = b.peek().size();
  int out_gate = emit_expr(emit_expr, a.query.expr.get());
  Circuit circuit = b.take(out_gate);
  for (std::size_t i = gates_before_top; i < circuit.gates.size(); ++i)
    origin_of_new.push_back(t.root);

  // origins: embedded instance gates point at the topmost bag holding their
  // gate vertex (when the joint graph has one)
  std::vector<int> origin(circuit.gates.size(), -1);
  for (std::size_t i = 0; i < inst.circuit.gates.size(); ++i) {
    int e = emitted[i];
    if (e >= 0 && origin[e] < 0 && i < g.gate_vertex.size() && g.gate_vertex[i] >= 0)
      origin[e] = topmost_bag(t, g.gate_vertex[i]);
  }
  for (std::size_t i = embedded_gates; i < circuit.gates.size(); ++i)
    origin[i] = origin_of_new[i - embedded_gates];

  auto remap = prune_to_output(circuit);
  std::vector<int> origin_pruned(circuit.gates.size(), -1);
  for (std::size_t i = 0; i < remap.size(); ++i)
    if (remap[i] >= 0) origin_pruned[remap[i]] = origin[i];

  // fanin-2 form, so the moralized gate graph stays sparse
  std::vector<int> spawned_by;
  Circuit final_circuit = binarize(circuit, &spawned_by);
  std::vector<int> origin_final(final_circuit.gates.size(), -1);
  for (std::size_t i = 0; i < final_circuit.gates.size(); ++i)
    origin_final[i] = origin_pruned[spawned_by[i]];

  LineageResult lr;
  lr.circuit = std::move(final_circuit);
  lr.gate_origin = std::move(origin_final);
  lr.max_tokens_per_node = max_tokens;
  lr.gate_count = lr.circuit.gates.size();
  lr.circuit_decomposition = decompose(gate_graph(lr.circuit));
  return lr;
}

inline LineageResult build_lineage(const BagAutomaton& a, const PCCInstance& inst,
                                   const TreeDecomposition& t) {
  IncidenceGraph g = build_graph(inst);
  return build_lineage(a, inst, g, t);
}

inline LineageResult build_lineage(const BagAutomaton& a, const PCInstance& inst,
                                   const TreeDecomposition& t) {
  return build_lineage(a, pc_to_pcc(inst), t);
}

}  // namespace uncertain
