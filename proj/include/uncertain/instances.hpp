#pragma once

#include <algorithm>
#include <set>
#include <vector>

#include "uncertain/circuit.hpp"
#include "uncertain/core.hpp"
#include "uncertain/formula.hpp"
#include "uncertain/numeric.hpp"

namespace uncertain {

// Certain relational instance, set semantics.
struct Instance {
  Schema schema;
  std::set<Fact> facts;

  void add(Fact f) {
    auto ar = schema.arity_of(f.relation);
    if (!ar) throw InputError("unknown relation " + f.relation);
    if (static_cast<int>(f.args.size()) != *ar)
      throw InputError("arity mismatch for " + f.relation);
    facts.insert(std::move(f));
  }
};

struct AnnotatedFact {
  Fact fact;
  FormulaPtr annotation;
};

namespace detail {

inline void check_fact(const Schema& schema, const Fact& f) {
  auto ar = schema.arity_of(f.relation);
  if (!ar) throw InputError("unknown relation " + f.relation);
  if (static_cast<int>(f.args.size()) != *ar)
    throw InputError("arity mismatch for " + f.relation + ": got " +
                     std::to_string(f.args.size()) + " args");
}

// Set semantics: a fact added twice keeps one row whose annotation is the
// disjunction of both.
inline void add_annotated(std::vector<AnnotatedFact>& facts, Fact f, FormulaPtr ann) {
  for (auto& af : facts) {
    if (af.fact == f) {
      af.annotation = Formula::disj(af.annotation, std::move(ann));
      return;
    }
  }
  facts.push_back({std::move(f), std::move(ann)});
}

}  // namespace detail

// c-instance: facts annotated by formulas over unvalued Boolean events.
struct CInstance {
  Schema schema;
  std::vector<AnnotatedFact> facts;
  std::set<std::string> event_names;

  void add(Fact f, FormulaPtr ann) {
    detail::check_fact(schema, f);
    std::set<std::string> evs;
    collect_events(*ann, evs);
    for (const auto& e : evs)
      if (!event_names.count(e))
        throw InputError("annotation mentions undeclared event " + e);
    detail::add_annotated(facts, std::move(f), std::move(ann));
  }
};

// pc-instance: c-instance whose events carry independent probabilities.
struct PCInstance {
  Schema schema;
  std::vector<AnnotatedFact> facts;
  EventTable events;

  void add(Fact f, FormulaPtr ann) {
    detail::check_fact(schema, f);
    std::set<std::string> evs;
    collect_events(*ann, evs);
    for (const auto& e : evs)
      if (!events.contains(e))
        throw InputError("annotation mentions undeclared event " + e);
    detail::add_annotated(facts, std::move(f), std::move(ann));
  }
};

struct TIDInstance {
  Schema schema;
  std::vector<std::pair<Fact, double>> facts;

  void add(Fact f, double p) {
    detail::check_fact(schema, f);
    if (p < 0.0 || p > 1.0) throw InputError("fact probability out of [0,1]");
    for (const auto& [g, q] : facts)
      if (g == f) throw InputError("duplicate fact in TID instance");
    facts.emplace_back(std::move(f), p);
  }
};

// pcc-instance: facts annotated by gates of one shared event circuit.
struct PCCInstance {
  Schema schema;
  std::vector<std::pair<Fact, int>> facts;  // (fact, gate index)
  Circuit circuit;                          // gate pool; output unused

  const EventTable& events() const { return circuit.events; }

  void add(Fact f, int gate) {
    detail::check_fact(schema, f);
    if (gate < 0 || gate >= static_cast<int>(circuit.gates.size()))
      throw InputError("fact references undefined gate " + std::to_string(gate));
    facts.emplace_back(std::move(f), gate);
  }
};

// One fresh event per fact; the possible-world distribution is unchanged.
inline PCInstance tid_to_pc(const TIDInstance& tid) {
  PCInstance pc;
  pc.schema = tid.schema;
  int i = 0;
  for (const auto& [f, p] : tid.facts) {
    std::string ev = "e" + std::to_string(i++);
    pc.events.add(ev, p);
    pc.add(f, Formula::var_of(ev));
  }
  return pc;
}

// Compiles every annotation formula into a shared circuit (events and input
// gates deduplicated), producing the pcc form the pipeline operates on.
inline PCCInstance pc_to_pcc(const PCInstance& pc) {
  PCCInstance out;
  out.schema = pc.schema;
  CircuitBuilder b(pc.events);
  std::vector<std::pair<Fact, int>> staged;
  for (const auto& af : pc.facts)
    staged.emplace_back(af.fact, b.formula(*af.annotation));
  out.circuit = b.take(-1);
  out.circuit.output = -1;
  for (auto& [f, g] : staged) out.add(std::move(f), g);
  return out;
}

inline PCCInstance tid_to_pcc(const TIDInstance& tid) {
  return pc_to_pcc(tid_to_pc(tid));
}

template <typename FactRange>
Instance world_of_facts(const Schema& schema, const FactRange& facts, const Valuation& v) {
  Instance w;
  w.schema = schema;
  for (const auto& af : facts)
    if (eval_formula(*af.annotation, v)) w.facts.insert(af.fact);
  return w;
}

inline Instance world_of(const CInstance& ci, const Valuation& v) {
  for (const auto& e : ci.event_names) v.get(e);  // reject partial valuations
  return world_of_facts(ci.schema, ci.facts, v);
}

inline Instance world_of(const PCInstance& pc, const Valuation& v) {
  for (const auto& e : pc.events.events) v.get(e.name);
  return world_of_facts(pc.schema, pc.facts, v);
}

inline Instance world_of(const PCCInstance& pcc, const Valuation& v) {
  std::vector<char> val(pcc.circuit.gates.size(), 0);
  Circuit c = pcc.circuit;
  Instance w;
  w.schema = pcc.schema;
  // Evaluate the whole gate pool once, then test each fact's gate.
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    const Gate& g = c.gates[i];
    switch (g.kind) {
      case GateKind::Input: val[i] = v.get(g.event); break;
      case GateKind::ConstTrue: val[i] = 1; break;
      case GateKind::ConstFalse: val[i] = 0; break;
      case GateKind::Not: val[i] = !val[g.args[0]]; break;
      case GateKind::And: {
        val[i] = 1;
        for (int a : g.args) val[i] = val[i] && val[a];
        break;
      }
      case GateKind::Or: {
        val[i] = 0;
        for (int a : g.args) val[i] = val[i] || val[a];
        break;
      }
    }
  }
  for (const auto& [f, g] : pcc.facts)
    if (val[g]) w.facts.insert(f);
  return w;
}

inline Valuation valuation_from_mask(const EventTable& events, std::uint64_t mask) {
  Valuation v;
  for (std::size_t i = 0; i < events.size(); ++i)
    v.values[events.events[i].name] = (mask >> i) & 1;
  return v;
}

template <typename P>
P valuation_probability(const EventTable& events, std::uint64_t mask) {
  P p = prob_cast<P>(1.0);
  for (std::size_t i = 0; i < events.size(); ++i) {
    P pe = prob_cast<P>(events.events[i].probability);
    p *= ((mask >> i) & 1) ? pe : prob_cast<P>(1.0) - pe;
  }
  return p;
}

struct World {
  Valuation valuation;
  Instance instance;
  double probability;
};

template <typename Inst>
std::vector<World> enumerate_worlds(const Inst& inst, const EventTable& events,
                                    std::size_t cap = max_enumerable_events()) {
  check_event_cap(events.size(), cap);
  std::vector<World> worlds;
  const std::uint64_t n = std::uint64_t{1} << events.size();
  worlds.reserve(n);
  for (std::uint64_t mask = 0; mask < n; ++mask) {
    Valuation v = valuation_from_mask(events, mask);
    worlds.push_back({v, world_of(inst, v),
                      valuation_probability<double>(events, mask)});
  }
  return worlds;
}

inline std::vector<World> enumerate_worlds(const PCInstance& pc,
                                           std::size_t cap = max_enumerable_events()) {
  return enumerate_worlds(pc, pc.events, cap);
}

inline std::vector<World> enumerate_worlds(const PCCInstance& pcc,
                                           std::size_t cap = max_enumerable_events()) {
  return enumerate_worlds(pcc, pcc.events(), cap);
}

}  // namespace uncertain
