#pragma once

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "uncertain/instances.hpp"
#include "uncertain/numeric.hpp"

namespace uncertain {

enum class PrxmlKind { Regular, Ind, Mux, Cie };

struct PrxmlEdge {
  int child = -1;
  double prob = 1.0;                                 // ind / mux edges
  std::vector<std::pair<std::string, bool>> cond;    // cie literals (event, positive)
};

struct PrxmlNode {
  PrxmlKind kind = PrxmlKind::Regular;
  std::string label;                // regular nodes
  std::vector<PrxmlEdge> edges;     // ordered children
};

struct PrxmlDoc {
  std::vector<PrxmlNode> nodes;
  int root = 0;
  EventTable events;

  void check() const {
    if (nodes.empty()) throw InputError("prxml document is empty");
    if (root < 0 || root >= static_cast<int>(nodes.size()))
      throw InputError("prxml root out of range");
    if (nodes[root].kind != PrxmlKind::Regular)
      throw InputError("prxml root must be a regular node");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const PrxmlNode& n = nodes[i];
      double mux_sum = 0.0;
      for (const auto& e : n.edges) {
        if (e.child < 0 || e.child >= static_cast<int>(nodes.size()))
          throw InputError("prxml edge child out of range");
        if (n.kind == PrxmlKind::Ind || n.kind == PrxmlKind::Mux) {
          if (e.prob < 0.0 || e.prob > 1.0)
            throw InputError("prxml edge probability out of [0,1]");
          mux_sum += e.prob;
        }
        if (n.kind == PrxmlKind::Cie) {
          if (e.cond.empty()) throw InputError("cie edge without event literals");
          for (const auto& [ev, pos] : e.cond)
            if (!events.contains(ev))
              throw InputError("cie edge mentions undeclared event " + ev);
        }
      }
      if (n.kind == PrxmlKind::Mux && mux_sum > 1.0 + 1e-9)
        throw InputError("mux edge probabilities sum above 1");
    }
  }
};

// A possible world: the surviving regular nodes (original ids) with edges to
// their nearest surviving regular ancestor.
struct PrxmlWorld {
  std::vector<int> nodes;                  // sorted
  std::vector<std::pair<int, int>> edges;  // (regular parent, regular child)
  double probability = 0.0;
};

namespace detail {

struct PrxmlChoicePoint {
  enum class Kind { Event, IndEdge, MuxNode };
  Kind kind;
  int node = -1;   // ind/mux
  int edge = -1;   // ind
  int event = -1;  // event index
};

inline void prxml_parents(const PrxmlDoc& d, std::vector<int>& parent) {
  parent.assign(d.nodes.size(), -1);
  std::vector<int> stack{d.root};
  while (!stack.empty()) {
    int n = stack.back();
    stack.pop_back();
    for (const auto& e : d.nodes[n].edges) {
      parent[e.child] = n;
      stack.push_back(e.child);
    }
  }
}

}  // namespace detail

// All possible documents with their probabilities, aggregated over the
// uncertainty choices that produce the same tree. Probabilities sum to 1.
template <typename P = double>
std::vector<std::pair<std::vector<int>, P>> enumerate_document_worlds(
    const PrxmlDoc& d, std::size_t cap = max_enumerable_events()) {
  d.check();
  using CP = detail::PrxmlChoicePoint;
  std::vector<CP> points;
  double log2_worlds = 0.0;
  for (std::size_t i = 0; i < d.events.size(); ++i) {
    points.push_back({CP::Kind::Event, -1, -1, static_cast<int>(i)});
    log2_worlds += 1.0;
  }
  for (std::size_t n = 0; n < d.nodes.size(); ++n) {
    if (d.nodes[n].kind == PrxmlKind::Ind) {
      for (std::size_t e = 0; e < d.nodes[n].edges.size(); ++e) {
        points.push_back({CP::Kind::IndEdge, static_cast<int>(n),
                          static_cast<int>(e), -1});
        log2_worlds += 1.0;
      }
    } else if (d.nodes[n].kind == PrxmlKind::Mux) {
      points.push_back({CP::Kind::MuxNode, static_cast<int>(n), -1, -1});
      log2_worlds += std::log2(d.nodes[n].edges.size() + 1.0);
    }
  }
  if (log2_worlds > static_cast<double>(cap))
    throw LimitError("prxml world enumeration refused: choice space above 2^" +
                     std::to_string(cap));

  std::map<std::vector<int>, P> worlds;
  // outcome per point: events/ind: 0/1; mux: edge index, or #edges for "none"
  std::vector<int> outcome(points.size(), 0);

  std::map<std::string, bool> ev_val;
  auto edge_taken = [&](int node, int edge) {
    const PrxmlNode& n = d.nodes[node];
    const PrxmlEdge& e = n.edges[edge];
    switch (n.kind) {
      case PrxmlKind::Regular: return true;
      case PrxmlKind::Cie: {
        for (const auto& [ev, pos] : e.cond)
          if (ev_val.at(ev) != pos) return false;
        return true;
      }
      case PrxmlKind::Ind:
      case PrxmlKind::Mux: {
        for (std::size_t p = 0; p < points.size(); ++p) {
          const CP& cp = points[p];
          if (cp.kind == CP::Kind::IndEdge && cp.node == node && cp.edge == edge)
            return outcome[p] == 1;
          if (cp.kind == CP::Kind::MuxNode && cp.node == node)
            return outcome[p] == edge;
        }
        return false;
      }
    }
    return false;
  };

  auto collect = [&](P prob) {
    for (const CP& cp : points)
      if (cp.kind == CP::Kind::Event)
        ev_val[d.events.events[cp.event].name] =
            outcome[&cp - points.data()] == 1;
    std::vector<int> present;
    std::vector<int> stack{d.root};
    while (!stack.empty()) {
      int n = stack.back();
      stack.pop_back();
      if (d.nodes[n].kind == PrxmlKind::Regular) present.push_back(n);
      for (std::size_t e = 0; e < d.nodes[n].edges.size(); ++e)
        if (edge_taken(n, static_cast<int>(e)))
          stack.push_back(d.nodes[n].edges[e].child);
    }
    std::sort(present.begin(), present.end());
    worlds[present] += prob;
  };

  auto recurse = [&](auto&& self, std::size_t i, P prob) -> void {
    if (i == points.size()) {
      collect(prob);
      return;
    }
    const CP& cp = points[i];
    if (cp.kind == CP::Kind::Event) {
      P p = prob_cast<P>(d.events.events[cp.event].probability);
      outcome[i] = 1;
      self(self, i + 1, prob * p);
      outcome[i] = 0;
      self(self, i + 1, prob * (prob_cast<P>(1.0) - p));
    } else if (cp.kind == CP::Kind::IndEdge) {
      P p = prob_cast<P>(d.nodes[cp.node].edges[cp.edge].prob);
      outcome[i] = 1;
      self(self, i + 1, prob * p);
      outcome[i] = 0;
      self(self, i + 1, prob * (prob_cast<P>(1.0) - p));
    } else {
      const auto& edges = d.nodes[cp.node].edges;
      P rest = prob_cast<P>(1.0);
      for (std::size_t e = 0; e < edges.size(); ++e) {
        P p = prob_cast<P>(edges[e].prob);
        rest -= p;
        outcome[i] = static_cast<int>(e);
        self(self, i + 1, prob * p);
      }
      outcome[i] = static_cast<int>(edges.size());  // no child selected
      if (rest < prob_cast<P>(0.0)) rest = prob_cast<P>(0.0);
      self(self, i + 1, prob * rest);
    }
  };
  recurse(recurse, 0, prob_cast<P>(1.0));

  std::vector<std::pair<std::vector<int>, P>> out(worlds.begin(), worlds.end());
  return out;
}

inline std::vector<PrxmlWorld> enumerate_documents(
    const PrxmlDoc& d, std::size_t cap = max_enumerable_events()) {
  auto raw = enumerate_document_worlds<double>(d, cap);
  std::vector<int> parent;
  detail::prxml_parents(d, parent);
  std::vector<PrxmlWorld> out;
  for (auto& [present, prob] : raw) {
    PrxmlWorld w;
    w.nodes = present;
    w.probability = prob;
    for (int n : present) {
      if (n == d.root) continue;
      int p = parent[n];
      while (p >= 0 && d.nodes[p].kind != PrxmlKind::Regular) p = parent[p];
      if (p >= 0) w.edges.emplace_back(p, n);
    }
    out.push_back(std::move(w));
  }
  return out;
}

struct ScopeReport {
  std::map<std::string, std::set<int>> event_scopes;
  std::map<int, int> node_scope_sizes;
  int max_node_scope = 0;
};

// Scope of an event: the strict descendants of the lowest common ancestor of
// the cie nodes mentioning it that lie on a path to such a cie node or below
// one. The scope of a node is the set of events whose scope contains it.
inline ScopeReport compute_scopes(const PrxmlDoc& d) {
  d.check();
  std::vector<int> parent;
  detail::prxml_parents(d, parent);
  std::vector<int> depth(d.nodes.size(), 0);
  for (std::size_t n = 0; n < d.nodes.size(); ++n) {
    int p = parent[n], dd = 0;
    while (p >= 0) {
      ++dd;
      p = parent[p];
    }
    depth[n] = dd;
  }
  auto lca = [&](int a, int b) {
    while (depth[a] > depth[b]) a = parent[a];
    while (depth[b] > depth[a]) b = parent[b];
    while (a != b) {
      a = parent[a];
      b = parent[b];
    }
    return a;
  };
  auto is_ancestor_or_self = [&](int anc, int n) {
    while (n >= 0) {
      if (n == anc) return true;
      n = parent[n];
    }
    return false;
  };

  ScopeReport r;
  for (const auto& ev : d.events.events) {
    std::vector<int> carriers;
    for (std::size_t n = 0; n < d.nodes.size(); ++n) {
      if (d.nodes[n].kind != PrxmlKind::Cie) continue;
      for (const auto& e : d.nodes[n].edges)
        for (const auto& [name, pos] : e.cond)
          if (name == ev.name) {
            carriers.push_back(static_cast<int>(n));
            goto next_node;
          }
    next_node:;
    }
    std::set<int>& scope = r.event_scopes[ev.name];
    if (carriers.empty()) continue;
    int top = carriers[0];
    for (int c : carriers) top = lca(top, c);
    for (std::size_t n = 0; n < d.nodes.size(); ++n) {
      int ni = static_cast<int>(n);
      if (ni == top || !is_ancestor_or_self(top, ni)) continue;
      for (int c : carriers)
        if (is_ancestor_or_self(ni, c) || is_ancestor_or_self(c, ni)) {
          scope.insert(ni);
          break;
        }
    }
  }
  for (std::size_t n = 0; n < d.nodes.size(); ++n) r.node_scope_sizes[static_cast<int>(n)] = 0;
  for (const auto& [ev, scope] : r.event_scopes)
    for (int n : scope) ++r.node_scope_sizes[n];
  for (const auto& [n, c] : r.node_scope_sizes)
    r.max_node_scope = std::max(r.max_node_scope, c);
  return r;
}

struct PrxmlEncoding {
  PCCInstance pcc;
  std::map<int, std::string> node_constant;
};

// Relational encoding: Label/Child/Desc facts for regular nodes, annotated
// by the survival condition of the node, shared along ancestor paths as a
// circuit. ind edges get one fresh event each; mux edges get a chain of
// fresh events with conditional probabilities reproducing the distribution;
// cie edges contribute their literals.
inline PrxmlEncoding to_pcc(const PrxmlDoc& d) {
  d.check();
  PrxmlEncoding enc;
  Schema schema;
  schema.add("Label", 2);
  schema.add("Child", 2);
  schema.add("Desc", 2);
  enc.pcc.schema = schema;

  EventTable events = d.events;
  // fresh events for ind edges and mux chains
  std::map<std::pair<int, int>, std::string> choice_event;
  for (std::size_t n = 0; n < d.nodes.size(); ++n) {
    const PrxmlNode& node = d.nodes[n];
    if (node.kind == PrxmlKind::Ind) {
      for (std::size_t e = 0; e < node.edges.size(); ++e) {
        std::string name = "_ind" + std::to_string(n) + "_" + std::to_string(e);
        events.add(name, node.edges[e].prob);
        choice_event[{static_cast<int>(n), static_cast<int>(e)}] = name;
      }
    } else if (node.kind == PrxmlKind::Mux) {
      double prefix = 0.0;
      for (std::size_t e = 0; e < node.edges.size(); ++e) {
        double denom = 1.0 - prefix;
        double p = denom <= 1e-15 ? 0.0 : node.edges[e].prob / denom;
        p = std::min(1.0, std::max(0.0, p));
        std::string name = "_mux" + std::to_string(n) + "_" + std::to_string(e);
        events.add(name, p);
        choice_event[{static_cast<int>(n), static_cast<int>(e)}] = name;
        prefix += node.edges[e].prob;
      }
    }
  }

  CircuitBuilder b(events);
  std::vector<int> cond(d.nodes.size(), -1);
  std::vector<int> regular_anc(d.nodes.size(), -1);  // nearest regular ancestor
  struct Item { int node; int cond_gate; int reg_anc; };
  std::vector<Item> stack{{d.root, b.const_true(), -1}};
  std::vector<std::pair<Fact, int>> staged;
  std::vector<std::vector<int>> regular_ancestors(d.nodes.size());

  while (!stack.empty()) {
    auto [n, cg, ranc] = stack.back();
    stack.pop_back();
    cond[n] = cg;
    regular_anc[n] = ranc;
    const PrxmlNode& node = d.nodes[n];
    if (node.kind == PrxmlKind::Regular) {
      if (ranc >= 0) {
        regular_ancestors[n] = regular_ancestors[ranc];
        regular_ancestors[n].push_back(ranc);
      }
      std::string me = "n" + std::to_string(n);
      enc.node_constant[n] = me;
      staged.push_back({{"Label", {me, node.label}}, cg});
      if (ranc >= 0)
        staged.push_back({{"Child", {"n" + std::to_string(ranc), me}}, cg});
      for (int anc : regular_ancestors[n])
        staged.push_back({{"Desc", {"n" + std::to_string(anc), me}}, cg});
    }
    int next_ranc = node.kind == PrxmlKind::Regular ? n : ranc;
    for (std::size_t e = 0; e < node.edges.size(); ++e) {
      const PrxmlEdge& edge = node.edges[e];
      int gamma = b.const_true();
      switch (node.kind) {
        case PrxmlKind::Regular: break;
        case PrxmlKind::Ind:
          gamma = b.input(choice_event.at({n, static_cast<int>(e)}));
          break;
        case PrxmlKind::Mux: {
          std::vector<int> lits;
          for (std::size_t j = 0; j < e; ++j)
            lits.push_back(b.gate_not(b.input(choice_event.at({n, static_cast<int>(j)}))));
          lits.push_back(b.input(choice_event.at({n, static_cast<int>(e)})));
          gamma = b.gate_and(std::move(lits));
          break;
        }
        case PrxmlKind::Cie: {
          std::vector<int> lits;
          for (const auto& [ev, pos] : edge.cond) {
            int in = b.input(ev);
            lits.push_back(pos ? in : b.gate_not(in));
          }
          gamma = b.gate_and(std::move(lits));
          break;
        }
      }
      stack.push_back({edge.child, b.gate_and({cg, gamma}), next_ranc});
    }
  }

  enc.pcc.circuit = b.take(-1);
  enc.pcc.circuit.output = -1;
  for (auto& [f, gidx] : staged) enc.pcc.add(std::move(f), gidx);
  return enc;
}

}  // namespace uncertain
