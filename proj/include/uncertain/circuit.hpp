#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "uncertain/core.hpp"
#include "uncertain/formula.hpp"

namespace uncertain {

enum class GateKind { Input, ConstTrue, ConstFalse, And, Or, Not };

struct Gate {
  GateKind kind;
  std::string event;       // Input only
  std::vector<int> args;   // And/Or: any fanin; Not: exactly one
};

// Boolean DAG over event inputs. Gates are stored in topological order:
// every argument index is smaller than the gate's own index.
struct Circuit {
  std::vector<Gate> gates;
  int output = -1;
  EventTable events;

  int add(Gate g) {
    for (int a : g.args)
      if (a < 0 || a >= static_cast<int>(gates.size()))
        throw InputError("circuit gate references undefined gate " + std::to_string(a));
    gates.push_back(std::move(g));
    return static_cast<int>(gates.size()) - 1;
  }

  int add_input(const std::string& ev) {
    if (!events.contains(ev))
      throw InputError("circuit input references undeclared event " + ev);
    return add({GateKind::Input, ev, {}});
  }

  std::size_t size() const { return gates.size(); }
};

inline bool evaluate(const Circuit& c, const Valuation& v) {
  if (c.output < 0) throw InputError("circuit has no output");
  std::vector<char> val(c.gates.size(), 0);
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
  return val[c.output];
}

inline std::vector<char> output_cone(const Circuit& c) {
  std::vector<char> mark(c.gates.size(), 0);
  if (c.output < 0) return mark;
  std::vector<int> stack{c.output};
  mark[c.output] = 1;
  while (!stack.empty()) {
    int g = stack.back();
    stack.pop_back();
    for (int a : c.gates[g].args)
      if (!mark[a]) {
        mark[a] = 1;
        stack.push_back(a);
      }
  }
  return mark;
}

// A circuit is monotone when no `not` gate feeds its output cone.
// Constant gates are monotone functions and do not break the property.
inline bool is_monotone(const Circuit& c) {
  auto cone = output_cone(c);
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    if (!cone[i]) continue;
    if (c.gates[i].kind == GateKind::Not) return false;
  }
  return true;
}

// Drops gates outside the output cone; input gates for unused events go too.
// Returns the old-index -> new-index map (-1 for dropped gates).
inline std::vector<int> prune_to_output(Circuit& c) {
  auto cone = output_cone(c);
  std::vector<int> remap(c.gates.size(), -1);
  std::vector<Gate> kept;
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    if (!cone[i]) continue;
    Gate g = c.gates[i];
    for (int& a : g.args) a = remap[a];
    remap[i] = static_cast<int>(kept.size());
    kept.push_back(std::move(g));
  }
  c.gates = std::move(kept);
  c.output = c.output >= 0 ? remap[c.output] : -1;
  return remap;
}

// Rewrites every And/Or of fanin > 2 into a chain of fanin-2 gates.
// When given, spawned_by receives for each output gate the index of the
// original gate it came from.
inline Circuit binarize(const Circuit& c, std::vector<int>* spawned_by = nullptr) {
  Circuit out;
  out.events = c.events;
  if (spawned_by) spawned_by->clear();
  std::vector<int> remap(c.gates.size(), -1);
  auto emit = [&](Gate g, int old_idx) {
    int id = out.add(std::move(g));
    if (spawned_by) spawned_by->push_back(old_idx);
    return id;
  };
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    const Gate& g = c.gates[i];
    const int oi = static_cast<int>(i);
    std::vector<int> args;
    args.reserve(g.args.size());
    for (int a : g.args) args.push_back(remap[a]);
    if ((g.kind == GateKind::And || g.kind == GateKind::Or) && args.size() > 2) {
      int acc = emit({g.kind, {}, {args[0], args[1]}}, oi);
      for (std::size_t j = 2; j < args.size(); ++j)
        acc = emit({g.kind, {}, {acc, args[j]}}, oi);
      remap[i] = acc;
    } else if ((g.kind == GateKind::And || g.kind == GateKind::Or) && args.empty()) {
      remap[i] = emit({g.kind == GateKind::And ? GateKind::ConstTrue
                                               : GateKind::ConstFalse,
                       {}, {}}, oi);
    } else {
      remap[i] = emit({g.kind, g.event, std::move(args)}, oi);
    }
  }
  out.output = c.output >= 0 ? remap[c.output] : -1;
  return out;
}

// Incremental builder with constant folding, single-operand collapsing and
// structural hashing, so lineage construction emits compact circuits.
class CircuitBuilder {
 public:
  explicit CircuitBuilder(EventTable events) {
    circuit_.events = std::move(events);
    true_ = circuit_.add({GateKind::ConstTrue, {}, {}});
    false_ = circuit_.add({GateKind::ConstFalse, {}, {}});
  }

  int const_true() const { return true_; }
  int const_false() const { return false_; }

  int input(const std::string& ev) {
    auto it = inputs_.find(ev);
    if (it != inputs_.end()) return it->second;
    int g = circuit_.add_input(ev);
    inputs_[ev] = g;
    return g;
  }

  int gate_and(std::vector<int> args) { return nary(GateKind::And, std::move(args)); }
  int gate_or(std::vector<int> args) { return nary(GateKind::Or, std::move(args)); }

  int gate_not(int a) {
    if (a == true_) return false_;
    if (a == false_) return true_;
    if (circuit_.gates[a].kind == GateKind::Not) return circuit_.gates[a].args[0];
    std::string key = "!" + std::to_string(a);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    int g = circuit_.add({GateKind::Not, {}, {a}});
    cache_[key] = g;
    return g;
  }

  int formula(const Formula& f) {
    switch (f.kind) {
      case Formula::Kind::True: return true_;
      case Formula::Kind::False: return false_;
      case Formula::Kind::Var: return input(f.var);
      case Formula::Kind::NotVar: return gate_not(input(f.var));
      case Formula::Kind::And: return gate_and({formula(*f.lhs), formula(*f.rhs)});
      case Formula::Kind::Or: return gate_or({formula(*f.lhs), formula(*f.rhs)});
    }
    return false_;
  }

  Circuit take(int output) {
    circuit_.output = output;
    return std::move(circuit_);
  }

  const Circuit& peek() const { return circuit_; }

 private:
  int nary(GateKind kind, std::vector<int> args) {
    const int absorbing = kind == GateKind::And ? false_ : true_;
    const int neutral = kind == GateKind::And ? true_ : false_;
    std::vector<int> kept;
    for (int a : args) {
      if (a == absorbing) return absorbing;
      if (a != neutral) kept.push_back(a);
    }
    std::sort(kept.begin(), kept.end());
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
    if (kept.empty()) return neutral;
    if (kept.size() == 1) return kept[0];
    std::string key = kind == GateKind::And ? "&" : "|";
    for (int a : kept) key += std::to_string(a) + ",";
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    int g = circuit_.add({kind, {}, std::move(kept)});
    cache_[key] = g;
    return g;
  }

  Circuit circuit_;
  int true_, false_;
  std::unordered_map<std::string, int> inputs_;
  std::unordered_map<std::string, int> cache_;
};

inline std::string export_dot(const Circuit& c) {
  std::ostringstream os;
  os << "digraph circuit {\n";
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    const Gate& g = c.gates[i];
    std::string label;
    switch (g.kind) {
      case GateKind::Input: label = g.event; break;
      case GateKind::ConstTrue: label = "true"; break;
      case GateKind::ConstFalse: label = "false"; break;
      case GateKind::And: label = "AND"; break;
      case GateKind::Or: label = "OR"; break;
      case GateKind::Not: label = "NOT"; break;
    }
    os << "  g" << i << " [label=\"" << label << "\"";
    if (static_cast<int>(i) == c.output) os << ", shape=doublecircle";
    os << "];\n";
    for (int a : g.args) os << "  g" << a << " -> g" << i << ";\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace uncertain
