#pragma once

#include <random>
#include <string>
#include <vector>

#include "uncertain/instances.hpp"
#include "uncertain/porder.hpp"
#include "uncertain/prxml.hpp"
#include "uncertain/query.hpp"
#include "uncertain/treedec.hpp"

namespace support {

constexpr double kTol = 1e-9;

inline uncertain::Schema rst_schema() {
  uncertain::Schema s;
  s.add("R", 1);
  s.add("S", 2);
  s.add("T", 1);
  return s;
}

// Random TID over R/1, S/2, T/1 with a small constant domain.
inline uncertain::TIDInstance random_tid(std::mt19937& rng, int max_facts = 6,
                                         int domain = 4) {
  uncertain::TIDInstance tid;
  tid.schema = rst_schema();
  std::uniform_int_distribution<int> nf(1, max_facts);
  std::uniform_int_distribution<int> dom(0, domain - 1);
  std::uniform_int_distribution<int> rel(0, 2);
  std::uniform_real_distribution<double> pr(0.05, 0.95);
  const int n = nf(rng);
  for (int i = 0; i < n; ++i) {
    uncertain::Fact f;
    switch (rel(rng)) {
      case 0: f = {"R", {"c" + std::to_string(dom(rng))}}; break;
      case 1:
        f = {"S", {"c" + std::to_string(dom(rng)), "c" + std::to_string(dom(rng))}};
        break;
      default: f = {"T", {"c" + std::to_string(dom(rng))}}; break;
    }
    try {
      tid.add(std::move(f), pr(rng));
    } catch (const uncertain::InputError&) {
      // duplicate fact; skip
    }
  }
  if (tid.facts.empty()) tid.add({"R", {"c0"}}, pr(rng));
  return tid;
}

// Random pc-instance: few shared events, random literal/and/or annotations.
inline uncertain::PCInstance random_pc(std::mt19937& rng, int max_events = 4,
                                       int max_facts = 6, int domain = 4) {
  using namespace uncertain;
  PCInstance pc;
  pc.schema = rst_schema();
  std::uniform_int_distribution<int> ne(1, max_events);
  std::uniform_real_distribution<double> pr(0.05, 0.95);
  const int k = ne(rng);
  for (int i = 0; i < k; ++i) pc.events.add("e" + std::to_string(i), pr(rng));

  auto random_lit = [&]() {
    std::uniform_int_distribution<int> ev(0, k - 1);
    std::bernoulli_distribution neg(0.3);
    return Formula::var_of("e" + std::to_string(ev(rng)), !neg(rng));
  };
  auto random_ann = [&]() -> FormulaPtr {
    std::uniform_int_distribution<int> shape(0, 3);
    switch (shape(rng)) {
      case 0: return random_lit();
      case 1: return Formula::conj(random_lit(), random_lit());
      case 2: return Formula::disj(random_lit(), random_lit());
      default: return Formula::make_true();
    }
  };

  std::uniform_int_distribution<int> nf(1, max_facts);
  std::uniform_int_distribution<int> dom(0, domain - 1);
  std::uniform_int_distribution<int> rel(0, 2);
  const int n = nf(rng);
  for (int i = 0; i < n; ++i) {
    Fact f;
    switch (rel(rng)) {
      case 0: f = {"R", {"c" + std::to_string(dom(rng))}}; break;
      case 1:
        f = {"S", {"c" + std::to_string(dom(rng)), "c" + std::to_string(dom(rng))}};
        break;
      default: f = {"T", {"c" + std::to_string(dom(rng))}}; break;
    }
    pc.add(std::move(f), random_ann());
  }
  return pc;
}

// Random pcc-instance: a small shared circuit over the events, facts pointing
// at random gates.
inline uncertain::PCCInstance random_pcc(std::mt19937& rng, int max_events = 4,
                                         int max_facts = 6, int domain = 4) {
  using namespace uncertain;
  std::uniform_int_distribution<int> ne(1, max_events);
  std::uniform_real_distribution<double> pr(0.05, 0.95);
  EventTable events;
  const int k = ne(rng);
  for (int i = 0; i < k; ++i) events.add("e" + std::to_string(i), pr(rng));

  CircuitBuilder b(events);
  std::vector<int> pool;
  for (int i = 0; i < k; ++i) pool.push_back(b.input("e" + std::to_string(i)));
  std::uniform_int_distribution<int> extra(1, 4);
  const int more = extra(rng);
  for (int i = 0; i < more; ++i) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(pool.size()) - 1);
    std::uniform_int_distribution<int> op(0, 2);
    int x = pool[pick(rng)], y = pool[pick(rng)];
    switch (op(rng)) {
      case 0: pool.push_back(b.gate_and({x, y})); break;
      case 1: pool.push_back(b.gate_or({x, y})); break;
      default: pool.push_back(b.gate_not(x)); break;
    }
  }

  PCCInstance pcc;
  pcc.schema = rst_schema();
  pcc.circuit = b.take(-1);
  pcc.circuit.output = -1;

  std::uniform_int_distribution<int> nf(1, max_facts);
  std::uniform_int_distribution<int> dom(0, domain - 1);
  std::uniform_int_distribution<int> rel(0, 2);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(pool.size()) - 1);
  const int n = nf(rng);
  for (int i = 0; i < n; ++i) {
    Fact f;
    switch (rel(rng)) {
      case 0: f = {"R", {"c" + std::to_string(dom(rng))}}; break;
      case 1:
        f = {"S", {"c" + std::to_string(dom(rng)), "c" + std::to_string(dom(rng))}};
        break;
      default: f = {"T", {"c" + std::to_string(dom(rng))}}; break;
    }
    pcc.add(std::move(f), pool[pick(rng)]);
  }
  return pcc;
}

// Random UCQ over the R/S/T schema; optionally a top-level negation wrapper.
inline uncertain::Query random_ucq(std::mt19937& rng, bool allow_negation = false) {
  std::uniform_int_distribution<int> ncq(1, 2);
  std::uniform_int_distribution<int> natoms(1, 3);
  std::uniform_int_distribution<int> rel(0, 2);
  std::bernoulli_distribution use_const(0.2);
  std::uniform_int_distribution<int> dom(0, 3);
  std::bernoulli_distribution neg(0.35);

  auto term = [&](std::vector<std::string>& vars) -> std::string {
    if (use_const(rng) && !vars.empty()) return "c" + std::to_string(dom(rng));
    std::uniform_int_distribution<int> v(0, 2);
    std::string name = std::string(1, static_cast<char>('x' + v(rng)));
    if (std::find(vars.begin(), vars.end(), name) == vars.end()) vars.push_back(name);
    return name;
  };

  auto cq_text = [&]() {
    std::vector<std::string> vars;
    std::vector<std::string> atoms;
    const int na = natoms(rng);
    for (int i = 0; i < na; ++i) {
      switch (rel(rng)) {
        case 0: atoms.push_back("R(" + term(vars) + ")"); break;
        case 1: {
          std::string a = term(vars), b = term(vars);
          atoms.push_back("S(" + a + "," + b + ")");
          break;
        }
        default: atoms.push_back("T(" + term(vars) + ")"); break;
      }
    }
    if (vars.empty()) {
      // constants-only atoms are not in the grammar; force one variable
      vars.push_back("x");
      atoms.push_back("R(x)");
    }
    std::string out = "exists";
    for (const auto& v : vars) out += " " + v;
    out += ".";
    for (std::size_t i = 0; i < atoms.size(); ++i)
      out += (i ? " & " : " ") + atoms[i];
    return out;
  };

  std::string text = "(" + cq_text() + ")";
  const int n = ncq(rng);
  for (int i = 1; i < n; ++i) text += " | (" + cq_text() + ")";
  if (allow_negation && neg(rng)) text = "!(" + text + ")";
  return uncertain::parse_query(text, rst_schema());
}

// Random undirected graph as a bare incidence structure of element vertices.
inline uncertain::IncidenceGraph random_graph(std::mt19937& rng, int n,
                                              double edge_prob) {
  uncertain::IncidenceGraph g;
  for (int i = 0; i < n; ++i) g.element("v" + std::to_string(i));
  std::bernoulli_distribution coin(edge_prob);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (coin(rng)) g.add_edge(i, j);
  return g;
}

inline uncertain::IncidenceGraph random_tree_graph(std::mt19937& rng, int n) {
  uncertain::IncidenceGraph g;
  for (int i = 0; i < n; ++i) g.element("v" + std::to_string(i));
  for (int i = 1; i < n; ++i) {
    std::uniform_int_distribution<int> par(0, i - 1);
    g.add_edge(i, par(rng));
  }
  return g;
}

// Random poset on n elements with labels drawn from a tiny alphabet (so
// duplicates are common), built from a random DAG and transitively closed.
inline uncertain::LabeledPoset random_poset(std::mt19937& rng, int n,
                                            int alphabet = 3) {
  uncertain::LabeledPoset p;
  std::uniform_int_distribution<int> lab(0, alphabet - 1);
  for (int i = 0; i < n; ++i)
    p.labels.push_back(std::string(1, static_cast<char>('a' + lab(rng))));
  std::bernoulli_distribution coin(0.3);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (coin(rng)) p.order.insert({i, j});
  p.close();
  return p;
}

// All-bijections oracle: the sequence is a possible world iff some
// label-respecting bijection orders every related pair consistently.
inline bool possible_world_bruteforce(const uncertain::LabeledPoset& p,
                                      const std::vector<std::string>& seq) {
  const int n = static_cast<int>(p.size());
  if (static_cast<int>(seq.size()) != n) return false;
  std::vector<int> perm(n);  // perm[position] = element
  for (int i = 0; i < n; ++i) perm[i] = i;
  std::sort(perm.begin(), perm.end());
  do {
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) ok = p.labels[perm[i]] == seq[i];
    std::vector<int> pos(n);
    for (int i = 0; i < n; ++i) pos[perm[i]] = i;
    for (const auto& [a, b] : p.order)
      if (ok && pos[a] >= pos[b]) ok = false;
    if (ok) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

// The Fig-like running example document: a person entity whose given name is
// mutually exclusive, whose surname and place of birth hang on one shared
// event, and whose occupation subtree is independently optional.
struct Fig1 {
  uncertain::PrxmlDoc doc;
  int root, given_name, mux, bradley, chelsea;
  int surname, cie1, manning;
  int place, cie2, crescent;
  int ind, occupation, musician;
};

inline Fig1 fig1_doc() {
  using namespace uncertain;
  Fig1 f;
  PrxmlDoc& d = f.doc;
  d.events.add("e_Jane", 0.9);
  auto node = [&](PrxmlKind k, const std::string& label = "") {
    d.nodes.push_back({k, label, {}});
    return static_cast<int>(d.nodes.size()) - 1;
  };
  f.root = node(PrxmlKind::Regular, "Q298423");
  f.given_name = node(PrxmlKind::Regular, "given name");
  f.mux = node(PrxmlKind::Mux);
  f.bradley = node(PrxmlKind::Regular, "Bradley");
  f.chelsea = node(PrxmlKind::Regular, "Chelsea");
  f.cie1 = node(PrxmlKind::Cie);
  f.surname = node(PrxmlKind::Regular, "surname");
  f.manning = node(PrxmlKind::Regular, "Manning");
  f.cie2 = node(PrxmlKind::Cie);
  f.place = node(PrxmlKind::Regular, "place of birth");
  f.crescent = node(PrxmlKind::Regular, "Crescent");
  f.ind = node(PrxmlKind::Ind);
  f.occupation = node(PrxmlKind::Regular, "occupation");
  f.musician = node(PrxmlKind::Regular, "musician");

  auto plain = [&](int parent, int child) {
    d.nodes[parent].edges.push_back({child, 1.0, {}});
  };
  plain(f.root, f.given_name);
  plain(f.root, f.cie1);
  plain(f.root, f.cie2);
  plain(f.root, f.ind);
  plain(f.given_name, f.mux);
  d.nodes[f.mux].edges.push_back({f.bradley, 0.4, {}});
  d.nodes[f.mux].edges.push_back({f.chelsea, 0.6, {}});
  d.nodes[f.cie1].edges.push_back({f.surname, 1.0, {{"e_Jane", true}}});
  plain(f.surname, f.manning);
  d.nodes[f.cie2].edges.push_back({f.place, 1.0, {{"e_Jane", true}}});
  plain(f.place, f.crescent);
  d.nodes[f.ind].edges.push_back({f.occupation, 0.4, {}});
  plain(f.occupation, f.musician);
  d.root = f.root;
  return f;
}

// Probability that some surviving node carries the label, summed over worlds.
inline double world_label_prob(const uncertain::PrxmlDoc& d,
                               const std::vector<uncertain::PrxmlWorld>& worlds,
                               const std::string& label) {
  double p = 0.0;
  for (const auto& w : worlds)
    for (int n : w.nodes)
      if (d.nodes[n].label == label) {
        p += w.probability;
        break;
      }
  return p;
}

// The travel-booking c-instance: each trip row becomes one Trip fact plus
// From/To facts for its endpoints, all carrying the row's annotation.
inline uncertain::PCInstance table1_pc(double p_pods, double p_stoc) {
  using namespace uncertain;
  PCInstance pc;
  pc.schema.add("Trip", 2);
  pc.schema.add("From", 2);
  pc.schema.add("To", 2);
  pc.events.add("pods", p_pods);
  pc.events.add("stoc", p_stoc);

  auto pods = Formula::var_of("pods");
  auto stoc = Formula::var_of("stoc");
  auto npods = Formula::var_of("pods", false);
  auto nstoc = Formula::var_of("stoc", false);

  struct Row {
    std::string from, to;
    uncertain::FormulaPtr ann;
  };
  std::vector<Row> rows = {
      {"CDG", "MEL", pods},
      {"MEL", "CDG", Formula::conj(pods, nstoc)},
      {"MEL", "PDX", Formula::conj(pods, stoc)},
      {"CDG", "PDX", Formula::conj(npods, stoc)},
      {"PDX", "CDG", stoc},
  };
  int i = 0;
  for (const auto& r : rows) {
    std::string s = "s" + std::to_string(i), t = "t" + std::to_string(i);
    pc.add({"Trip", {s, t}}, r.ann);
    pc.add({"From", {s, r.from}}, r.ann);
    pc.add({"To", {t, r.to}}, r.ann);
    ++i;
  }
  return pc;
}

// Path-shaped TID for the linearity witness: R(a_i, a_{i+1}) edges with an
// S mark on every element, all at probability one half.
inline uncertain::TIDInstance path_tid(int total_facts) {
  uncertain::TIDInstance tid;
  tid.schema.add("R", 2);
  tid.schema.add("S", 1);
  int i = 0, made = 0;
  while (made < total_facts) {
    std::string a = "a" + std::to_string(i), b = "a" + std::to_string(i + 1);
    tid.add({"R", {a, b}}, 0.5);
    ++made;
    if (made < total_facts) {
      tid.add({"S", {b}}, 0.5);
      ++made;
    }
    ++i;
  }
  return tid;
}

}  // namespace support
