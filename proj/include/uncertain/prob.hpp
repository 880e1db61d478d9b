#pragma once

#include <chrono>
#include <vector>

#include "uncertain/lineage.hpp"
#include "uncertain/numeric.hpp"

namespace uncertain {

// Dense factor over Boolean gate variables; scope is sorted, bit i of an
// assignment index corresponds to scope[i].
template <typename P>
struct FactorTable {
  std::vector<int> scope;
  std::vector<P> values;

  static FactorTable unit() { return {{}, {prob_cast<P>(1.0)}}; }

  std::size_t size() const { return values.size(); }
};

namespace detail {

template <typename P>
FactorTable<P> multiply(const FactorTable<P>& a, const FactorTable<P>& b) {
  FactorTable<P> out;
  out.scope.resize(a.scope.size() + b.scope.size());
  auto end = std::set_union(a.scope.begin(), a.scope.end(), b.scope.begin(),
                            b.scope.end(), out.scope.begin());
  out.scope.resize(end - out.scope.begin());
  if (out.scope.size() > 26)
    throw LimitError("message-passing factor scope exceeds 26 variables");
  std::vector<int> pos_a, pos_b;
  for (int v : a.scope)
    pos_a.push_back(static_cast<int>(
        std::lower_bound(out.scope.begin(), out.scope.end(), v) - out.scope.begin()));
  for (int v : b.scope)
    pos_b.push_back(static_cast<int>(
        std::lower_bound(out.scope.begin(), out.scope.end(), v) - out.scope.begin()));
  out.values.assign(std::size_t{1} << out.scope.size(), prob_cast<P>(0.0));
  for (std::size_t idx = 0; idx < out.values.size(); ++idx) {
    std::size_t ia = 0, ib = 0;
    for (std::size_t i = 0; i < pos_a.size(); ++i)
      if ((idx >> pos_a[i]) & 1) ia |= std::size_t{1} << i;
    for (std::size_t i = 0; i < pos_b.size(); ++i)
      if ((idx >> pos_b[i]) & 1) ib |= std::size_t{1} << i;
    out.values[idx] = a.values[ia] * b.values[ib];
  }
  return out;
}

template <typename P>
FactorTable<P> marginalize_to(const FactorTable<P>& f, const std::vector<int>& keep) {
  FactorTable<P> out;
  for (int v : f.scope)
    if (std::binary_search(keep.begin(), keep.end(), v)) out.scope.push_back(v);
  std::vector<int> pos;
  for (int v : out.scope)
    pos.push_back(static_cast<int>(
        std::lower_bound(f.scope.begin(), f.scope.end(), v) - f.scope.begin()));
  out.values.assign(std::size_t{1} << out.scope.size(), prob_cast<P>(0.0));
  for (std::size_t idx = 0; idx < f.values.size(); ++idx) {
    std::size_t o = 0;
    for (std::size_t i = 0; i < pos.size(); ++i)
      if ((idx >> pos[i]) & 1) o |= std::size_t{1} << i;
    out.values[o] += f.values[idx];
  }
  return out;
}

template <typename P>
P total_mass(const FactorTable<P>& f) {
  P s = prob_cast<P>(0.0);
  for (const P& v : f.values) s += v;
  return s;
}

// Gate-consistency indicator factor: gate output agrees with its operation.
template <typename P>
FactorTable<P> gate_factor(const Circuit& c, int g) {
  const Gate& gate = c.gates[g];
  FactorTable<P> f;
  f.scope = gate.args;
  f.scope.push_back(g);
  std::sort(f.scope.begin(), f.scope.end());
  const std::size_t n = f.scope.size();
  f.values.assign(std::size_t{1} << n, prob_cast<P>(0.0));
  auto bit_of = [&](std::size_t idx, int var) {
    auto it = std::lower_bound(f.scope.begin(), f.scope.end(), var);
    return (idx >> (it - f.scope.begin())) & 1;
  };
  for (std::size_t idx = 0; idx < f.values.size(); ++idx) {
    bool expected = false;
    switch (gate.kind) {
      case GateKind::ConstTrue: expected = true; break;
      case GateKind::ConstFalse: expected = false; break;
      case GateKind::Not: expected = !bit_of(idx, gate.args[0]); break;
      case GateKind::And: {
        expected = true;
        for (int a : gate.args) expected = expected && bit_of(idx, a);
        break;
      }
      case GateKind::Or: {
        expected = false;
        for (int a : gate.args) expected = expected || bit_of(idx, a);
        break;
      }
      case GateKind::Input: expected = bit_of(idx, g); break;  // unreachable
    }
    if (static_cast<bool>(bit_of(idx, g)) == expected)
      f.values[idx] = prob_cast<P>(1.0);
  }
  return f;
}

}  // namespace detail

// World-enumeration oracle over circuit events.
template <typename P = double>
P prob_bruteforce_t(const Circuit& c, std::size_t cap = max_enumerable_events()) {
  const EventTable& events = c.events;
  check_event_cap(events.size(), cap);
  P total = prob_cast<P>(0.0);
  const std::uint64_t n = std::uint64_t{1} << events.size();
  for (std::uint64_t mask = 0; mask < n; ++mask) {
    Valuation v = valuation_from_mask(events, mask);
    if (evaluate(c, v)) total += valuation_probability<P>(events, mask);
  }
  return total;
}

inline double prob_bruteforce(const Circuit& c, std::size_t cap = max_enumerable_events()) {
  return prob_bruteforce_t<double>(c, cap);
}

// Exact circuit probability by sum-product message passing over the circuit's
// tree decomposition: one consistency factor per gate, one Bernoulli factor
// per event input, and the output gate pinned to true; the answer is the
// remaining mass at the root.
template <typename P = double>
P prob_message_passing_t(const LineageResult& lr) {
  const Circuit& c = lr.circuit;
  if (c.output < 0) throw InputError("lineage circuit has no output");
  const TreeDecomposition rooted = root_and_binarize(lr.circuit_decomposition);
  const int nb = static_cast<int>(rooted.bags.size());

  // factors, each assigned to the smallest-id bag containing its scope
  std::vector<std::vector<int>> bags_of(c.gates.size());
  for (int b = 0; b < nb; ++b)
    for (int v : rooted.bags[b])
      if (v >= 0 && v < static_cast<int>(c.gates.size())) bags_of[v].push_back(b);
  std::vector<std::vector<FactorTable<P>>> assigned(nb);
  auto assign = [&](FactorTable<P> f) {
    std::sort(f.scope.begin(), f.scope.end());
    if (f.scope.empty()) {
      assigned[0].push_back(std::move(f));
      return;
    }
    for (int b : bags_of[f.scope[0]]) {
      bool fits = true;
      for (int v : f.scope)
        if (!rooted.bag_contains(b, v)) {
          fits = false;
          break;
        }
      if (fits) {
        assigned[b].push_back(std::move(f));
        return;
      }
    }
    throw InputError(
        "message passing: factor scope fits in no bag (invalid circuit decomposition)");
  };

  for (std::size_t g = 0; g < c.gates.size(); ++g) {
    if (c.gates[g].kind == GateKind::Input) {
      double p = c.events.events[c.events.index.at(c.gates[g].event)].probability;
      FactorTable<P> f;
      f.scope = {static_cast<int>(g)};
      f.values = {prob_cast<P>(1.0) - prob_cast<P>(p), prob_cast<P>(p)};
      assign(std::move(f));
    } else {
      assign(detail::gate_factor<P>(c, static_cast<int>(g)));
    }
  }
  {
    FactorTable<P> pin;
    pin.scope = {c.output};
    pin.values = {prob_cast<P>(0.0), prob_cast<P>(1.0)};
    assign(std::move(pin));
  }

  // upward pass, children before parents
  std::vector<FactorTable<P>> message(nb);
  for (int b = nb - 1; b >= 0; --b) {
    FactorTable<P> pot = FactorTable<P>::unit();
    for (auto& f : assigned[b]) pot = detail::multiply(pot, f);
    for (int ch : rooted.children[b]) pot = detail::multiply(pot, message[ch]);
    if (rooted.parent[b] < 0) {
      message[b] = std::move(pot);
    } else {
      message[b] = detail::marginalize_to(pot, rooted.bags[rooted.parent[b]]);
    }
  }
  return detail::total_mass(message[rooted.root]);
}

inline double prob_message_passing(const LineageResult& lr) {
  return prob_message_passing_t<double>(lr);
}

struct StageTiming {
  std::string stage;
  double millis;
};

struct Diagnostics {
  int instance_width = 0;
  int circuit_width = 0;
  std::size_t automaton_max_tokens = 0;
  std::size_t circuit_gates = 0;
  std::size_t fact_count = 0;
  std::size_t event_count = 0;
  std::vector<StageTiming> timings;
};

struct ProbResult {
  double probability = 0.0;
  Diagnostics diagnostics;
};

// Full pipeline: joint incidence graph -> min-fill decomposition -> rooted
// binarized bag tree -> query compilation -> symbolic run (lineage) ->
// message passing over the circuit decomposition.
template <typename P = double>
ProbResult prob_query_t(const PCCInstance& pcc, const Query& q) {
  using clock = std::chrono::steady_clock;
  ProbResult res;
  auto mark = [last = clock::now()](const char* stage, Diagnostics& d) mutable {
    auto now = clock::now();
    d.timings.push_back(
        {stage, std::chrono::duration<double, std::milli>(now - last).count()});
    last = now;
  };

  IncidenceGraph g = build_graph(pcc);
  mark("build_graph", res.diagnostics);
  TreeDecomposition td = decompose(g);
  mark("decompose", res.diagnostics);
  TreeDecomposition rooted = root_and_binarize(td);
  mark("root_and_binarize", res.diagnostics);
  BagAutomaton a = compile(q, pcc.schema, td.width());
  mark("compile", res.diagnostics);
  LineageResult lr = build_lineage(a, pcc, g, rooted);
  mark("build_lineage", res.diagnostics);
  P p = prob_message_passing_t<P>(lr);
  mark("message_passing", res.diagnostics);

  res.probability = prob_to_double(p);
  res.diagnostics.instance_width = td.width();
  res.diagnostics.circuit_width = lr.circuit_decomposition.width();
  res.diagnostics.automaton_max_tokens = lr.max_tokens_per_node;
  res.diagnostics.circuit_gates = lr.gate_count;
  res.diagnostics.fact_count = pcc.facts.size();
  res.diagnostics.event_count = pcc.events().size();
  return res;
}

inline ProbResult prob_query(const PCCInstance& pcc, const Query& q) {
  return prob_query_t<double>(pcc, q);
}

inline ProbResult prob_query(const PCInstance& pc, const Query& q) {
  return prob_query_t<double>(pc_to_pcc(pc), q);
}

inline ProbResult prob_query(const TIDInstance& tid, const Query& q) {
  return prob_query_t<double>(tid_to_pcc(tid), q);
}

}  // namespace uncertain
