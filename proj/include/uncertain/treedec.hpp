#pragma once

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "uncertain/instances.hpp"

namespace uncertain {

enum class VertexKind { Element, FactNode, GateNode };

struct IncidenceVertex {
  VertexKind kind;
  std::string name;  // element constant, or printable tag for fact/gate nodes
  int index = -1;    // fact position / gate index, -1 for elements
};

// Incidence graph over a (possibly uncertain) instance: element vertices,
// one vertex per fact adjacent to its argument elements, and for pcc input
// the circuit gates with their wires and fact-to-annotation links.
struct IncidenceGraph {
  std::vector<IncidenceVertex> vertices;
  std::vector<std::set<int>> adj;
  std::map<std::string, int> element_ids;
  std::vector<int> fact_vertex;  // fact position -> vertex id
  std::vector<int> gate_vertex;  // gate index -> vertex id, -1 if absent

  int add_vertex(VertexKind kind, const std::string& name, int index = -1) {
    vertices.push_back({kind, name, index});
    adj.emplace_back();
    return static_cast<int>(vertices.size()) - 1;
  }

  int element(const std::string& name) {
    auto it = element_ids.find(name);
    if (it != element_ids.end()) return it->second;
    int id = add_vertex(VertexKind::Element, name);
    element_ids[name] = id;
    return id;
  }

  void add_edge(int a, int b) {
    if (a == b) return;
    adj[a].insert(b);
    adj[b].insert(a);
  }

  std::size_t size() const { return vertices.size(); }

  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> es;
    for (int v = 0; v < static_cast<int>(adj.size()); ++v)
      for (int w : adj[v])
        if (v < w) es.emplace_back(v, w);
    return es;
  }
};

namespace detail {

template <typename FactIt>
void add_fact_vertices(IncidenceGraph& g, FactIt begin, FactIt end,
                       auto&& fact_of) {
  int pos = 0;
  for (auto it = begin; it != end; ++it, ++pos) {
    const Fact& f = fact_of(*it);
    std::ostringstream tag;
    tag << f.relation << "#" << pos;
    int fv = g.add_vertex(VertexKind::FactNode, tag.str(), pos);
    g.fact_vertex.push_back(fv);
    for (const auto& a : f.args) g.add_edge(fv, g.element(a));
  }
}

}  // namespace detail

inline IncidenceGraph build_graph(const Instance& inst) {
  IncidenceGraph g;
  detail::add_fact_vertices(g, inst.facts.begin(), inst.facts.end(),
                            [](const Fact& f) -> const Fact& { return f; });
  return g;
}

inline IncidenceGraph build_graph(const CInstance& inst) {
  IncidenceGraph g;
  detail::add_fact_vertices(g, inst.facts.begin(), inst.facts.end(),
                            [](const AnnotatedFact& af) -> const Fact& { return af.fact; });
  return g;
}

inline IncidenceGraph build_graph(const PCInstance& inst) {
  IncidenceGraph g;
  detail::add_fact_vertices(g, inst.facts.begin(), inst.facts.end(),
                            [](const AnnotatedFact& af) -> const Fact& { return af.fact; });
  return g;
}

// Joint instance+circuit graph. Gate vertices are created for every gate in
// the cone of some fact annotation; wires become edges, each fact links to
// its annotation gate, and the inputs of every gate are connected pairwise
// so that the gate-consistency factors of message passing fit in one bag.
inline IncidenceGraph build_graph(const PCCInstance& inst) {
  IncidenceGraph g;
  detail::add_fact_vertices(g, inst.facts.begin(), inst.facts.end(),
                            [](const auto& p) -> const Fact& { return p.first; });
  const Circuit& c = inst.circuit;
  std::vector<char> used(c.gates.size(), 0);
  std::vector<int> stack;
  for (const auto& [f, gate] : inst.facts)
    if (!used[gate]) {
      used[gate] = 1;
      stack.push_back(gate);
    }
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int a : c.gates[v].args)
      if (!used[a]) {
        used[a] = 1;
        stack.push_back(a);
      }
  }
  g.gate_vertex.assign(c.gates.size(), -1);
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    if (!used[i]) continue;
    std::ostringstream tag;
    tag << "gate#" << i;
    g.gate_vertex[i] = g.add_vertex(VertexKind::GateNode, tag.str(),
                                    static_cast<int>(i));
  }
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    if (!used[i]) continue;
    const auto& args = c.gates[i].args;
    for (int a : args) g.add_edge(g.gate_vertex[i], g.gate_vertex[a]);
    for (std::size_t x = 0; x < args.size(); ++x)
      for (std::size_t y = x + 1; y < args.size(); ++y)
        g.add_edge(g.gate_vertex[args[x]], g.gate_vertex[args[y]]);
  }
  int pos = 0;
  for (const auto& [f, gate] : inst.facts)
    g.add_edge(g.fact_vertex[pos++], g.gate_vertex[gate]);
  return g;
}

struct TreeDecomposition {
  std::vector<std::vector<int>> bags;  // sorted vertex lists
  std::vector<std::pair<int, int>> edges;
  int root = -1;                       // -1 until rooted
  std::vector<int> parent;             // filled by root_and_binarize
  std::vector<std::vector<int>> children;

  int width() const {
    std::size_t m = 0;
    for (const auto& b : bags) m = std::max(m, b.size());
    return static_cast<int>(m) - 1;
  }

  std::size_t size() const { return bags.size(); }

  bool bag_contains(int bag, int v) const {
    const auto& b = bags[bag];
    return std::binary_search(b.begin(), b.end(), v);
  }
};

struct ValidationReport {
  bool ok = true;
  std::string report;
};

// Checks the three decomposition conditions against a graph, reporting the
// first violation with a witness.
inline ValidationReport validate(const TreeDecomposition& t, const IncidenceGraph& g) {
  ValidationReport r;
  const int n = static_cast<int>(g.size());
  const int nb = static_cast<int>(t.bags.size());

  // tree shape: |edges| = bags - 1 and connected (checked via union-find)
  std::vector<int> uf(nb);
  for (int i = 0; i < nb; ++i) uf[i] = i;
  auto find = [&](int x) {
    while (uf[x] != x) x = uf[x] = uf[uf[x]];
    return x;
  };
  for (auto [a, b] : t.edges) {
    int ra = find(a), rb = find(b);
    if (ra == rb) return {false, "bag edges contain a cycle"};
    uf[ra] = rb;
  }
  if (nb > 0 && static_cast<int>(t.edges.size()) != nb - 1)
    return {false, "bag graph is not a tree"};

  std::vector<char> seen(n, 0);
  for (const auto& b : t.bags)
    for (int v : b) {
      if (v < 0 || v >= n) return {false, "bag references unknown vertex"};
      seen[v] = 1;
    }
  for (int v = 0; v < n; ++v)
    if (!seen[v])
      return {false, "vertex " + g.vertices[v].name + " occurs in no bag"};

  for (auto [a, b] : g.edges()) {
    bool covered = false;
    for (int i = 0; i < nb && !covered; ++i)
      covered = t.bag_contains(i, a) && t.bag_contains(i, b);
    if (!covered)
      return {false, "edge {" + g.vertices[a].name + "," + g.vertices[b].name +
                         "} is covered by no bag"};
  }

  // running intersection: bags containing v must induce a connected subtree
  std::vector<std::vector<int>> tree_adj(nb);
  for (auto [a, b] : t.edges) {
    tree_adj[a].push_back(b);
    tree_adj[b].push_back(a);
  }
  for (int v = 0; v < n; ++v) {
    int start = -1, count = 0;
    for (int i = 0; i < nb; ++i)
      if (t.bag_contains(i, v)) {
        if (start < 0) start = i;
        ++count;
      }
    if (start < 0) continue;
    std::vector<char> vis(nb, 0);
    std::vector<int> stack{start};
    vis[start] = 1;
    int reached = 1;
    while (!stack.empty()) {
      int b = stack.back();
      stack.pop_back();
      for (int nbg : tree_adj[b])
        if (!vis[nbg] && t.bag_contains(nbg, v)) {
          vis[nbg] = 1;
          ++reached;
          stack.push_back(nbg);
        }
    }
    if (reached != count)
      return {false, "running intersection violated for vertex " + g.vertices[v].name};
  }
  return r;
}

// Min-fill elimination ordering, ties broken by smallest vertex id. Bags are
// the elimination neighborhoods; the tree connects each bag to the bag of the
// first-eliminated later neighbor.
inline TreeDecomposition decompose(const IncidenceGraph& g) {
  const int n = static_cast<int>(g.size());
  TreeDecomposition t;
  if (n == 0) {
    t.bags.push_back({});
    return t;
  }

  std::vector<std::set<int>> adj = g.adj;
  std::vector<char> dead(n, 0);
  std::vector<long> fill_cache(n, 0);

  auto fill_of = [&](int v) {
    long fill = 0;
    for (auto it = adj[v].begin(); it != adj[v].end(); ++it)
      for (auto jt = std::next(it); jt != adj[v].end(); ++jt)
        if (!adj[*it].count(*jt)) ++fill;
    return fill;
  };

  using Entry = std::pair<long, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  for (int v = 0; v < n; ++v) {
    fill_cache[v] = fill_of(v);
    heap.push({fill_cache[v], v});
  }

  std::vector<int> elim_pos(n, -1);
  std::vector<std::vector<int>> elim_nbrs(n);
  std::vector<int> order;
  order.reserve(n);

  while (static_cast<int>(order.size()) < n) {
    auto [f, v] = heap.top();
    heap.pop();
    if (dead[v] || f != fill_cache[v]) continue;
    // eliminate v
    elim_pos[v] = static_cast<int>(order.size());
    order.push_back(v);
    dead[v] = 1;
    std::vector<int> nbrs(adj[v].begin(), adj[v].end());
    elim_nbrs[v] = nbrs;
    std::set<int> touched(nbrs.begin(), nbrs.end());
    for (std::size_t i = 0; i < nbrs.size(); ++i)
      for (std::size_t j = i + 1; j < nbrs.size(); ++j)
        if (adj[nbrs[i]].insert(nbrs[j]).second) {
          adj[nbrs[j]].insert(nbrs[i]);
          for (int w : adj[nbrs[i]]) touched.insert(w);
          for (int w : adj[nbrs[j]]) touched.insert(w);
        }
    for (int u : nbrs) adj[u].erase(v);
    for (int u : touched)
      if (!dead[u]) {
        fill_cache[u] = fill_of(u);
        heap.push({fill_cache[u], u});
      }
  }

  // one bag per vertex, in elimination order
  t.bags.resize(n);
  for (int i = 0; i < n; ++i) {
    int v = order[i];
    std::vector<int> bag = elim_nbrs[v];
    bag.push_back(v);
    std::sort(bag.begin(), bag.end());
    t.bags[i] = std::move(bag);
  }
  for (int i = 0; i < n; ++i) {
    int v = order[i];
    int next = -1;
    for (int u : elim_nbrs[v])
      if (next == -1 || elim_pos[u] < elim_pos[next]) next = u;
    if (next != -1)
      t.edges.emplace_back(i, elim_pos[next]);
    else if (i + 1 < n)
      t.edges.emplace_back(i, i + 1);  // stitch components / final clique
  }
  return t;
}

// Roots the bag tree at the highest-numbered bag (the last elimination bag,
// which keeps parent bags above child bags for min-fill output) and
// duplicates bags so every node has at most two children. Width unchanged.
inline TreeDecomposition root_and_binarize(const TreeDecomposition& t) {
  const int nb = static_cast<int>(t.bags.size());
  TreeDecomposition out;
  if (nb == 0) {
    out.bags.push_back({});
    out.root = 0;
    out.parent = {-1};
    out.children = {{}};
    return out;
  }

  std::vector<std::vector<int>> adj(nb);
  for (auto [a, b] : t.edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  int root = t.root >= 0 ? t.root : nb - 1;

  // BFS rooting
  std::vector<int> par(nb, -2), bfs;
  par[root] = -1;
  bfs.push_back(root);
  for (std::size_t i = 0; i < bfs.size(); ++i) {
    int b = bfs[i];
    for (int c : adj[b])
      if (par[c] == -2) {
        par[c] = b;
        bfs.push_back(c);
      }
  }
  std::vector<std::vector<int>> kids(nb);
  for (int b = 0; b < nb; ++b)
    if (par[b] >= 0) kids[par[b]].push_back(b);

  // copy with binarization: a node with k>2 children becomes a chain of
  // duplicate bags, each adopting at most two subtrees
  auto add_bag = [&](const std::vector<int>& content, int parent) {
    out.bags.push_back(content);
    out.parent.push_back(parent);
    out.children.emplace_back();
    int id = static_cast<int>(out.bags.size()) - 1;
    if (parent >= 0) {
      out.children[parent].push_back(id);
      out.edges.emplace_back(parent, id);
    }
    return id;
  };

  struct Item { int old_bag; int new_parent; };
  std::vector<Item> stack{{root, -1}};
  while (!stack.empty()) {
    auto [b, np] = stack.back();
    stack.pop_back();
    int id = add_bag(t.bags[b], np);
    const auto& ks = kids[b];
    if (ks.size() <= 2) {
      for (int c : ks) stack.push_back({c, id});
    } else {
      // first child attaches here; the rest hang off duplicated bags
      stack.push_back({ks[0], id});
      int chain = id;
      for (std::size_t i = 1; i < ks.size(); ++i) {
        if (i + 1 < ks.size())
          chain = add_bag(t.bags[b], chain);
        stack.push_back({ks[i], chain});
      }
    }
  }
  out.root = 0;
  return out;
}

// Topmost (closest to root) bag containing vertex v; requires a rooted tree.
inline int topmost_bag(const TreeDecomposition& t, int v) {
  int found = -1;
  for (int b = 0; b < static_cast<int>(t.bags.size()); ++b)
    if (t.bag_contains(b, v)) {
      found = b;
      break;
    }
  if (found < 0) return -1;
  while (t.parent[found] >= 0 && t.bag_contains(t.parent[found], v))
    found = t.parent[found];
  return found;
}

// Exact treewidth by dynamic programming over elimination prefixes.
// Exponential; guarded to small graphs.
inline int exact_treewidth(const IncidenceGraph& g, int max_vertices = 15) {
  const int n = static_cast<int>(g.size());
  if (n > max_vertices)
    throw LimitError("exact treewidth limited to " + std::to_string(max_vertices) +
                     " vertices, got " + std::to_string(n));
  if (n == 0) return -1;

  // q_size(S, v): neighbors of v reachable through eliminated set S
  auto q_size = [&](std::uint32_t s, int v) {
    std::uint32_t vis = 0, result = 0;
    std::vector<int> stack{v};
    vis |= std::uint32_t{1} << v;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int w : g.adj[u]) {
        if (vis & (std::uint32_t{1} << w)) continue;
        vis |= std::uint32_t{1} << w;
        if (s & (std::uint32_t{1} << w))
          stack.push_back(w);
        else
          result |= std::uint32_t{1} << w;
      }
    }
    return std::popcount(result);
  };

  const std::uint32_t full = (std::uint32_t{1} << n) - 1;
  std::vector<int> dp(full + 1, n);  // dp[S]: best max-degree using order S
  dp[0] = -1;
  for (std::uint32_t s = 1; s <= full; ++s) {
    int best = n;
    for (int v = 0; v < n; ++v) {
      if (!(s & (std::uint32_t{1} << v))) continue;
      std::uint32_t prev = s & ~(std::uint32_t{1} << v);
      best = std::min(best, std::max(dp[prev], q_size(prev, v)));
    }
    dp[s] = best;
  }
  return dp[full];
}

inline std::string export_dot(const TreeDecomposition& t, const IncidenceGraph& g) {
  std::ostringstream os;
  os << "graph bagtree {\n";
  for (std::size_t i = 0; i < t.bags.size(); ++i) {
    os << "  b" << i << " [label=\"";
    for (std::size_t j = 0; j < t.bags[i].size(); ++j) {
      if (j) os << " ";
      os << g.vertices[t.bags[i][j]].name;
    }
    os << "\"];\n";
  }
  for (auto [a, b] : t.edges) os << "  b" << a << " -- b" << b << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace uncertain
