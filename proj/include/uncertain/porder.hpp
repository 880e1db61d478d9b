#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "uncertain/core.hpp"
#include "uncertain/numeric.hpp"

namespace uncertain {

// Finite labeled partial order. Edges are kept as the full strict order
// (transitively closed); the reduction is recomputed on demand.
struct LabeledPoset {
  std::vector<std::string> labels;          // one per element
  std::set<std::pair<int, int>> order;      // strict: a < b

  std::size_t size() const { return labels.size(); }

  bool less(int a, int b) const { return order.count({a, b}) > 0; }

  void check() const {
    const int n = static_cast<int>(labels.size());
    for (const auto& [a, bb] : order) {
      if (a < 0 || a >= n || bb < 0 || bb >= n)
        throw InputError("poset edge endpoint out of range");
      if (a == bb) throw InputError("poset order is not irreflexive");
      if (order.count({bb, a})) throw InputError("poset order is not antisymmetric");
    }
    for (const auto& [a, bb] : order)
      for (const auto& [c, d] : order)
        if (bb == c && !order.count({a, d}))
          throw InputError("poset order is not transitive");
  }

  void close() {
    bool changed = true;
    while (changed) {
      changed = false;
      std::vector<std::pair<int, int>> add;
      for (const auto& [a, b] : order)
        for (const auto& [c, d] : order)
          if (b == c && !order.count({a, d})) add.emplace_back(a, d);
      for (auto& e : add) {
        order.insert(e);
        changed = true;
      }
    }
  }

  // covering pairs: a < b with nothing strictly between
  std::set<std::pair<int, int>> reduction() const {
    std::set<std::pair<int, int>> red;
    for (const auto& [a, b] : order) {
      bool covered = true;
      for (std::size_t m = 0; m < labels.size(); ++m)
        if (less(a, static_cast<int>(m)) && less(static_cast<int>(m), b)) {
          covered = false;
          break;
        }
      if (covered) red.insert({a, b});
    }
    return red;
  }
};

inline LabeledPoset make_poset(std::vector<std::string> labels,
                               std::vector<std::pair<int, int>> edges) {
  LabeledPoset p;
  p.labels = std::move(labels);
  for (auto& e : edges) p.order.insert(e);
  p.close();
  p.check();
  return p;
}

inline LabeledPoset make_chain(std::vector<std::string> labels) {
  LabeledPoset p;
  p.labels = std::move(labels);
  for (std::size_t i = 0; i + 1 < p.labels.size(); ++i)
    p.order.insert({static_cast<int>(i), static_cast<int>(i) + 1});
  p.close();
  return p;
}

inline LabeledPoset make_antichain(std::vector<std::string> labels) {
  LabeledPoset p;
  p.labels = std::move(labels);
  return p;
}

// Disjoint (parallel) union: no order between the two sides.
inline LabeledPoset poset_union(const LabeledPoset& a, const LabeledPoset& b) {
  LabeledPoset p;
  p.labels = a.labels;
  p.labels.insert(p.labels.end(), b.labels.begin(), b.labels.end());
  p.order = a.order;
  const int off = static_cast<int>(a.size());
  for (const auto& [x, y] : b.order) p.order.insert({x + off, y + off});
  return p;
}

// Direct product with pointwise order; labels pair up as "l1|l2".
inline LabeledPoset poset_product(const LabeledPoset& a, const LabeledPoset& b) {
  LabeledPoset p;
  const int nb = static_cast<int>(b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      p.labels.push_back(a.labels[i] + "|" + b.labels[j]);
  auto id = [&](int i, int j) { return i * nb + j; };
  for (std::size_t i1 = 0; i1 < a.size(); ++i1)
    for (std::size_t j1 = 0; j1 < b.size(); ++j1)
      for (std::size_t i2 = 0; i2 < a.size(); ++i2)
        for (std::size_t j2 = 0; j2 < b.size(); ++j2) {
          int x1 = static_cast<int>(i1), y1 = static_cast<int>(j1);
          int x2 = static_cast<int>(i2), y2 = static_cast<int>(j2);
          bool le_a = x1 == x2 || a.less(x1, x2);
          bool le_b = y1 == y2 || b.less(y1, y2);
          bool eq = x1 == x2 && y1 == y2;
          if (le_a && le_b && !eq) p.order.insert({id(x1, y1), id(x2, y2)});
        }
  return p;
}

// Induced suborder on the elements whose label the predicate keeps.
template <typename Pred>
LabeledPoset poset_select(const LabeledPoset& a, Pred keep) {
  LabeledPoset p;
  std::vector<int> remap(a.size(), -1);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (keep(a.labels[i])) {
      remap[i] = static_cast<int>(p.labels.size());
      p.labels.push_back(a.labels[i]);
    }
  for (const auto& [x, y] : a.order)
    if (remap[x] >= 0 && remap[y] >= 0) p.order.insert({remap[x], remap[y]});
  return p;
}

// Relabeling; the order is untouched.
template <typename Fn>
LabeledPoset poset_project(const LabeledPoset& a, Fn rename) {
  LabeledPoset p = a;
  for (auto& l : p.labels) l = rename(l);
  return p;
}

// All linear extensions as label sequences, capped.
inline std::vector<std::vector<std::string>> linear_extensions(
    const LabeledPoset& p, std::size_t cap = 10) {
  if (p.size() > cap)
    throw LimitError("linear extension listing refused above " +
                     std::to_string(cap) + " elements");
  const int n = static_cast<int>(p.size());
  std::vector<std::vector<std::string>> out;
  std::vector<int> seq;
  std::vector<char> used(n, 0);
  auto rec = [&](auto&& self) -> void {
    if (static_cast<int>(seq.size()) == n) {
      std::vector<std::string> labels;
      for (int e : seq) labels.push_back(p.labels[e]);
      out.push_back(std::move(labels));
      return;
    }
    for (int e = 0; e < n; ++e) {
      if (used[e]) continue;
      bool minimal = true;
      for (int o = 0; o < n; ++o)
        if (!used[o] && p.less(o, e)) {
          minimal = false;
          break;
        }
      if (!minimal) continue;
      used[e] = 1;
      seq.push_back(e);
      self(self);
      seq.pop_back();
      used[e] = 0;
    }
  };
  rec(rec);
  return out;
}

// Number of linear extensions by dynamic programming over down-sets.
inline BigInt count_linear_extensions(const LabeledPoset& p, std::size_t cap = 16) {
  const int n = static_cast<int>(p.size());
  if (p.size() > cap)
    throw LimitError("linear extension counting refused above " +
                     std::to_string(cap) + " elements");
  std::vector<std::uint32_t> below(n, 0);  // predecessors of each element
  for (const auto& [a, b] : p.order) below[b] |= std::uint32_t{1} << a;
  std::map<std::uint32_t, BigInt> count{{0u, BigInt(1)}};
  const std::uint32_t full = n == 32 ? ~0u : (std::uint32_t{1} << n) - 1;
  // process down-sets in increasing popcount order via plain iteration:
  // every down-set's count is final before any superset reads it
  std::vector<std::uint32_t> sets{0u};
  for (std::size_t head = 0; head < sets.size(); ++head) {
    std::uint32_t s = sets[head];
    BigInt c = count[s];
    for (int e = 0; e < n; ++e) {
      std::uint32_t bit = std::uint32_t{1} << e;
      if ((s & bit) || (below[e] & ~s)) continue;
      std::uint32_t t = s | bit;
      auto it = count.find(t);
      if (it == count.end()) {
        count[t] = c;
        sets.push_back(t);
      } else {
        it->second += c;
      }
    }
  }
  auto it = count.find(full);
  return it == count.end() ? BigInt(0) : it->second;
}

// Does the label sequence arise as some linear extension? Backtracking over
// the choice of element for each position; when labels are distinct this is
// a single greedy pass.
inline bool is_possible_world(const LabeledPoset& p,
                              const std::vector<std::string>& seq) {
  const int n = static_cast<int>(p.size());
  if (static_cast<int>(seq.size()) != n) return false;
  std::vector<char> used(n, 0);
  auto rec = [&](auto&& self, int pos) -> bool {
    if (pos == n) return true;
    for (int e = 0; e < n; ++e) {
      if (used[e] || p.labels[e] != seq[pos]) continue;
      bool minimal = true;
      for (int o = 0; o < n; ++o)
        if (!used[o] && p.less(o, e)) {
          minimal = false;
          break;
        }
      if (!minimal) continue;
      used[e] = 1;
      if (self(self, pos + 1)) return true;
      used[e] = 0;
    }
    return false;
  };
  return rec(rec, 0);
}

}  // namespace uncertain
