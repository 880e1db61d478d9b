#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uncertain/circuit.hpp"
#include "uncertain/instances.hpp"
#include "uncertain/porder.hpp"
#include "uncertain/prxml.hpp"
#include "uncertain/treedec.hpp"

namespace uncertain {

using json = nlohmann::ordered_json;

namespace detail {

inline json require(const json& j, const char* key) {
  if (!j.contains(key)) throw InputError(std::string("missing field: ") + key);
  return j.at(key);
}

inline Schema schema_from_json(const json& j) {
  Schema s;
  for (const auto& rel : require(j, "schema"))
    s.add(require(rel, "name").get<std::string>(), require(rel, "arity").get<int>());
  return s;
}

inline json schema_to_json(const Schema& s) {
  json arr = json::array();
  for (const auto& [name, arity] : s.relations)
    arr.push_back({{"name", name}, {"arity", arity}});
  return arr;
}

inline EventTable events_from_json(const json& j) {
  EventTable t;
  if (!j.contains("events")) return t;
  for (const auto& e : j.at("events"))
    t.add(require(e, "name").get<std::string>(), require(e, "prob").get<double>());
  return t;
}

inline json events_to_json(const EventTable& t) {
  json arr = json::array();
  for (const auto& e : t.events)
    arr.push_back({{"name", e.name}, {"prob", e.probability}});
  return arr;
}

inline Fact fact_from_json(const json& j) {
  Fact f;
  f.relation = require(j, "rel").get<std::string>();
  for (const auto& a : require(j, "args")) f.args.push_back(a.get<std::string>());
  return f;
}

inline const char* gate_kind_name(GateKind k) {
  switch (k) {
    case GateKind::Input: return "input";
    case GateKind::ConstTrue: return "true";
    case GateKind::ConstFalse: return "false";
    case GateKind::And: return "and";
    case GateKind::Or: return "or";
    case GateKind::Not: return "not";
  }
  return "?";
}

}  // namespace detail

inline json circuit_to_json(const Circuit& c) {
  json gates = json::array();
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    const Gate& g = c.gates[i];
    json jg = {{"id", i}, {"kind", detail::gate_kind_name(g.kind)}};
    if (g.kind == GateKind::Input)
      jg["event"] = g.event;
    else if (g.kind != GateKind::ConstTrue && g.kind != GateKind::ConstFalse)
      jg["args"] = g.args;
    gates.push_back(std::move(jg));
  }
  return {{"events", detail::events_to_json(c.events)},
          {"gates", std::move(gates)},
          {"output", c.output}};
}

// Parses a circuit; gate ids must come in topological order starting at 0.
// Duplicate input gates for the same event are merged so that a shared event
// stays one variable.
inline Circuit circuit_from_json(const json& j, std::vector<int>* id_map = nullptr) {
  Circuit c;
  c.events = detail::events_from_json(j);
  std::map<std::string, int> input_of;
  std::vector<int> remap;
  for (const auto& jg : detail::require(j, "gates")) {
    if (detail::require(jg, "id").get<int>() != static_cast<int>(remap.size()))
      throw InputError("circuit gate ids must be consecutive from 0");
    std::string kind = detail::require(jg, "kind").get<std::string>();
    if (kind == "input") {
      std::string ev = detail::require(jg, "event").get<std::string>();
      auto it = input_of.find(ev);
      if (it != input_of.end()) {
        remap.push_back(it->second);
      } else {
        int g = c.add_input(ev);
        input_of[ev] = g;
        remap.push_back(g);
      }
      continue;
    }
    Gate g;
    if (kind == "true") g.kind = GateKind::ConstTrue;
    else if (kind == "false") g.kind = GateKind::ConstFalse;
    else if (kind == "and") g.kind = GateKind::And;
    else if (kind == "or") g.kind = GateKind::Or;
    else if (kind == "not") g.kind = GateKind::Not;
    else throw InputError("unknown gate kind: " + kind);
    if (jg.contains("args"))
      for (const auto& a : jg.at("args")) {
        int x = a.get<int>();
        if (x < 0 || x >= static_cast<int>(remap.size()))
          throw InputError("gate argument refers to a later or missing gate");
        g.args.push_back(remap[x]);
      }
    if (g.kind == GateKind::Not && g.args.size() != 1)
      throw InputError("not gate needs exactly one argument");
    remap.push_back(c.add(std::move(g)));
  }
  if (j.contains("output")) {
    int o = j.at("output").get<int>();
    if (o >= 0) {
      if (o >= static_cast<int>(remap.size())) throw InputError("circuit output out of range");
      c.output = remap[o];
    }
  }
  if (id_map) *id_map = remap;
  return c;
}

// Instance forms share one envelope. A "facts" entry with "prob" and no
// event table is a tuple-independent instance; "gate" entries refer into a
// top-level "circuit"; "ann" entries are formulas over "events"; no
// annotation at all is a certain instance.
enum class InstanceForm { C, PC, TID, PCC };

struct LoadedInstance {
  InstanceForm form = InstanceForm::C;
  CInstance c;
  PCInstance pc;
  TIDInstance tid;
  PCCInstance pcc;

  PCCInstance as_pcc() const {
    switch (form) {
      case InstanceForm::PCC: return pcc;
      case InstanceForm::PC: return pc_to_pcc(pc);
      case InstanceForm::TID: return tid_to_pcc(tid);
      case InstanceForm::C: {
        PCInstance p;
        p.schema = c.schema;
        for (const auto& [f, ann] : c.facts) p.add(f, ann);
        return pc_to_pcc(p);
      }
    }
    throw InputError("unreachable");
  }
};

inline LoadedInstance instance_from_json(const json& j) {
  LoadedInstance out;
  Schema schema = detail::schema_from_json(j);
  const json facts = detail::require(j, "facts");

  bool any_prob = false, any_gate = false, any_ann = false;
  for (const auto& f : facts) {
    any_prob = any_prob || f.contains("prob");
    any_gate = any_gate || f.contains("gate");
    any_ann = any_ann || f.contains("ann");
  }
  if (any_prob + any_gate + any_ann > 1)
    throw InputError("instance mixes annotation styles");

  if (any_gate || j.contains("circuit")) {
    out.form = InstanceForm::PCC;
    out.pcc.schema = schema;
    std::vector<int> id_map;
    out.pcc.circuit = circuit_from_json(detail::require(j, "circuit"), &id_map);
    out.pcc.circuit.output = -1;
    for (const auto& f : facts) {
      int gid = detail::require(f, "gate").get<int>();
      if (gid < 0 || gid >= static_cast<int>(id_map.size()))
        throw InputError("fact gate id out of range");
      out.pcc.add(detail::fact_from_json(f), id_map[gid]);
    }
    return out;
  }
  if (any_prob) {
    out.form = InstanceForm::TID;
    out.tid.schema = schema;
    for (const auto& f : facts)
      out.tid.add(detail::fact_from_json(f), detail::require(f, "prob").get<double>());
    return out;
  }
  if (any_ann) {
    out.form = InstanceForm::PC;
    out.pc.schema = schema;
    out.pc.events = detail::events_from_json(j);
    for (const auto& f : facts) {
      std::string ann = f.contains("ann") ? f.at("ann").get<std::string>() : "T";
      out.pc.add(detail::fact_from_json(f), parse_annotation(ann));
    }
    return out;
  }
  out.form = InstanceForm::C;
  out.c.schema = schema;
  for (const auto& f : facts) out.c.add(detail::fact_from_json(f), Formula::make_true());
  return out;
}

inline json instance_to_json(const PCCInstance& pcc) {
  json facts = json::array();
  for (const auto& [f, gate] : pcc.facts)
    facts.push_back({{"rel", f.relation}, {"args", f.args}, {"gate", gate}});
  return {{"schema", detail::schema_to_json(pcc.schema)},
          {"circuit", circuit_to_json(pcc.circuit)},
          {"facts", std::move(facts)}};
}

inline json instance_to_json(const TIDInstance& tid) {
  json facts = json::array();
  for (const auto& [f, p] : tid.facts)
    facts.push_back({{"rel", f.relation}, {"args", f.args}, {"prob", p}});
  return {{"schema", detail::schema_to_json(tid.schema)}, {"facts", std::move(facts)}};
}

inline json decomposition_to_json(const TreeDecomposition& t,
                                  const IncidenceGraph* g = nullptr) {
  json bags = json::object();
  for (std::size_t b = 0; b < t.bags.size(); ++b) {
    json bag = json::array();
    for (int v : t.bags[b]) {
      if (g)
        bag.push_back(g->vertices[v].name);
      else
        bag.push_back(v);
    }
    bags[std::to_string(b)] = std::move(bag);
  }
  json edges = json::array();
  for (const auto& [a, b] : t.edges) edges.push_back({a, b});
  json out = {{"bags", std::move(bags)}, {"edges", std::move(edges)}};
  if (t.root >= 0) out["root"] = t.root;
  out["width"] = t.width();
  return out;
}

inline json poset_to_json(const LabeledPoset& p) {
  json edges = json::array();
  for (const auto& [a, b] : p.reduction()) edges.push_back({a, b});
  return {{"labels", p.labels}, {"edges", std::move(edges)}};
}

inline LabeledPoset poset_from_json(const json& j) {
  std::vector<std::string> labels;
  for (const auto& l : detail::require(j, "labels")) labels.push_back(l.get<std::string>());
  std::vector<std::pair<int, int>> edges;
  if (j.contains("edges"))
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw InputError("poset edge must be a pair");
      edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
  return make_poset(std::move(labels), std::move(edges));
}

// PrXML tree as nested JSON:
//   {"kind":"regular","label":L,"children":[...]}
//   {"kind":"ind","children":[{"prob":p,"node":...},...]}
//   {"kind":"mux","children":[{"prob":p,"node":...},...]}
//   {"kind":"cie","children":[{"cond":"e1 & !e2","node":...},...]}
// with a top-level {"events":[...],"root":<node>}.
inline PrxmlDoc prxml_from_json(const json& j) {
  PrxmlDoc d;
  d.events = detail::events_from_json(j);

  auto parse_node = [&](auto&& self, const json& jn) -> int {
    PrxmlNode n;
    std::string kind = detail::require(jn, "kind").get<std::string>();
    if (kind == "regular") {
      n.kind = PrxmlKind::Regular;
      n.label = detail::require(jn, "label").get<std::string>();
    } else if (kind == "ind") {
      n.kind = PrxmlKind::Ind;
    } else if (kind == "mux") {
      n.kind = PrxmlKind::Mux;
    } else if (kind == "cie") {
      n.kind = PrxmlKind::Cie;
    } else {
      throw InputError("unknown prxml node kind: " + kind);
    }
    int id = static_cast<int>(d.nodes.size());
    d.nodes.push_back(std::move(n));
    if (jn.contains("children"))
      for (const auto& jc : jn.at("children")) {
        PrxmlEdge e;
        const json* body = &jc;
        if (d.nodes[id].kind == PrxmlKind::Regular) {
          e.child = self(self, jc);
        } else {
          if (d.nodes[id].kind == PrxmlKind::Cie) {
            std::string cond = detail::require(jc, "cond").get<std::string>();
            FormulaPtr f = parse_annotation(cond);
            // cie edges carry a conjunction of literals only
            auto flatten = [&](auto&& fs, const Formula& fml) -> void {
              switch (fml.kind) {
                case Formula::Kind::Var: e.cond.emplace_back(fml.var, true); break;
                case Formula::Kind::NotVar: e.cond.emplace_back(fml.var, false); break;
                case Formula::Kind::And:
                  fs(fs, *fml.lhs);
                  fs(fs, *fml.rhs);
                  break;
                default:
                  throw InputError("cie condition must be a conjunction of literals");
              }
            };
            flatten(flatten, *f);
          } else {
            e.prob = detail::require(jc, "prob").get<double>();
          }
          e.child = self(self, detail::require(*body, "node"));
        }
        d.nodes[id].edges.push_back(std::move(e));
      }
    return id;
  };
  d.root = parse_node(parse_node, detail::require(j, "root"));
  d.check();
  return d;
}

inline json prxml_to_json(const PrxmlDoc& d) {
  auto dump = [&](auto&& self, int id) -> json {
    const PrxmlNode& n = d.nodes[id];
    json jn;
    switch (n.kind) {
      case PrxmlKind::Regular:
        jn = {{"kind", "regular"}, {"label", n.label}};
        break;
      case PrxmlKind::Ind: jn = {{"kind", "ind"}}; break;
      case PrxmlKind::Mux: jn = {{"kind", "mux"}}; break;
      case PrxmlKind::Cie: jn = {{"kind", "cie"}}; break;
    }
    json kids = json::array();
    for (const auto& e : n.edges) {
      if (n.kind == PrxmlKind::Regular) {
        kids.push_back(self(self, e.child));
      } else if (n.kind == PrxmlKind::Cie) {
        std::string cond;
        for (std::size_t i = 0; i < e.cond.size(); ++i) {
          if (i) cond += " & ";
          cond += (e.cond[i].second ? "" : "!") + e.cond[i].first;
        }
        kids.push_back({{"cond", cond}, {"node", self(self, e.child)}});
      } else {
        kids.push_back({{"prob", e.prob}, {"node", self(self, e.child)}});
      }
    }
    if (!kids.empty()) jn["children"] = std::move(kids);
    return jn;
  };
  return {{"events", detail::events_to_json(d.events)}, {"root", dump(dump, d.root)}};
}

}  // namespace uncertain
