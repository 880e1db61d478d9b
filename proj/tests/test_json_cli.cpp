#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "support.hpp"
#include "uncertain/json_io.hpp"
#include "uncertain/prob.hpp"

using namespace uncertain;
using Catch::Matchers::WithinAbs;

namespace {

std::string tmp_path(const std::string& name) {
  return std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
         "/uncertain_test_" + name;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

struct CliResult {
  int exit_code;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  std::string out_path = tmp_path("cli_out.txt");
  std::string cmd = std::string(CLI_PATH) + " " + args + " > " + out_path + " 2>&1";
  int rc = std::system(cmd.c_str());
  std::ifstream in(out_path);
  std::stringstream ss;
  ss << in.rdbuf();
  int code = WEXITSTATUS(rc);
  return {code, ss.str()};
}

const char* kTidJson = R"({
  "schema": [{"name":"R","arity":1},{"name":"S","arity":2},{"name":"T","arity":1}],
  "facts": [
    {"rel":"R","args":["a"],"prob":0.5},
    {"rel":"S","args":["a","b"],"prob":0.5},
    {"rel":"T","args":["b"],"prob":0.5}
  ]
})";

}  // namespace

TEST_CASE("circuit JSON round-trips") {
  EventTable ev;
  ev.add("x", 0.25);
  ev.add("y", 0.75);
  CircuitBuilder b(ev);
  int g = b.gate_or({b.gate_and({b.input("x"), b.input("y")}),
                     b.gate_not(b.input("x"))});
  Circuit c = b.take(g);

  Circuit back = circuit_from_json(circuit_to_json(c));
  REQUIRE(back.output >= 0);
  for (int m = 0; m < 4; ++m) {
    Valuation v;
    v.values = {{"x", (m & 1) != 0}, {"y", (m & 2) != 0}};
    CHECK(evaluate(c, v) == evaluate(back, v));
  }
}

TEST_CASE("circuit JSON merges duplicate input gates") {
  json j = {
      {"events", {{{"name", "x"}, {"prob", 0.5}}}},
      {"gates",
       {{{"id", 0}, {"kind", "input"}, {"event", "x"}},
        {{"id", 1}, {"kind", "input"}, {"event", "x"}},
        {{"id", 2}, {"kind", "and"}, {"args", {0, 1}}}}},
      {"output", 2}};
  Circuit c = circuit_from_json(j);
  int inputs = 0;
  for (const auto& g : c.gates)
    if (g.kind == GateKind::Input) ++inputs;
  CHECK(inputs == 1);
}

TEST_CASE("instance JSON detects the four forms") {
  LoadedInstance tid = instance_from_json(json::parse(kTidJson));
  CHECK(tid.form == InstanceForm::TID);
  CHECK(tid.tid.facts.size() == 3);

  json pc = {
      {"schema", {{{"name", "R"}, {"arity", 1}}}},
      {"events", {{{"name", "e"}, {"prob", 0.5}}}},
      {"facts", {{{"rel", "R"}, {"args", {"a"}}, {"ann", "!e"}}}}};
  LoadedInstance lpc = instance_from_json(pc);
  CHECK(lpc.form == InstanceForm::PC);

  json certain = {{"schema", {{{"name", "R"}, {"arity", 1}}}},
                  {"facts", {{{"rel", "R"}, {"args", {"a"}}}}}};
  CHECK(instance_from_json(certain).form == InstanceForm::C);

  json pcc = {
      {"schema", {{{"name", "R"}, {"arity", 1}}}},
      {"circuit",
       {{"events", {{{"name", "e"}, {"prob", 0.5}}}},
        {"gates", {{{"id", 0}, {"kind", "input"}, {"event", "e"}}}}}},
      {"facts", {{{"rel", "R"}, {"args", {"a"}}, {"gate", 0}}}}};
  CHECK(instance_from_json(pcc).form == InstanceForm::PCC);

  json mixed = json::parse(kTidJson);
  mixed["facts"][0]["ann"] = "e";
  CHECK_THROWS_AS(instance_from_json(mixed), InputError);
}

TEST_CASE("pcc instance JSON round-trips through as_pcc") {
  std::mt19937 rng(97);
  PCCInstance pcc = support::random_pcc(rng);
  LoadedInstance li = instance_from_json(instance_to_json(pcc));
  REQUIRE(li.form == InstanceForm::PCC);
  PCCInstance back = li.as_pcc();
  Query q = parse_query("exists x y. S(x,y) | exists z. R(z)", pcc.schema);
  CHECK_THAT(query_probability_bruteforce(back, q),
             WithinAbs(query_probability_bruteforce(pcc, q), support::kTol));
}

TEST_CASE("prxml JSON round-trips including negated cie literals") {
  json doc = {
      {"events", {{{"name", "e"}, {"prob", 0.3}}}},
      {"root",
       {{"kind", "regular"},
        {"label", "r"},
        {"children",
         {{{"kind", "cie"},
           {"children",
            {{{"cond", "e"}, {"node", {{"kind", "regular"}, {"label", "yes"}}}},
             {{"cond", "!e"}, {"node", {{"kind", "regular"}, {"label", "no"}}}}}}}}}}}};
  PrxmlDoc d = prxml_from_json(doc);
  auto worlds = enumerate_documents(d);
  double pyes = 0.0, pno = 0.0, both = 0.0;
  for (const auto& w : worlds) {
    bool y = false, n = false;
    for (int node : w.nodes) {
      y = y || d.nodes[node].label == "yes";
      n = n || d.nodes[node].label == "no";
    }
    if (y) pyes += w.probability;
    if (n) pno += w.probability;
    if (y && n) both += w.probability;
  }
  CHECK_THAT(pyes, WithinAbs(0.3, support::kTol));
  CHECK_THAT(pno, WithinAbs(0.7, support::kTol));
  CHECK_THAT(both, WithinAbs(0.0, support::kTol));

  PrxmlDoc back = prxml_from_json(prxml_to_json(d));
  CHECK(prxml_to_json(back) == prxml_to_json(d));
}

TEST_CASE("poset JSON round-trips through the reduction") {
  auto p = make_poset({"a", "b", "c"}, {{0, 1}, {1, 2}});
  auto back = poset_from_json(poset_to_json(p));
  CHECK(back.labels == p.labels);
  CHECK(back.order == p.order);
}

TEST_CASE("cli prob matches the golden chain value and reports agree") {
  std::string inst = tmp_path("tid.json");
  write_file(inst, kTidJson);
  auto r = run_cli("prob " + inst + " \"exists x y. R(x) & S(x,y) & T(y)\" --oracle");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("0.125") != std::string::npos);

  auto rr = run_cli("prob " + inst +
                    " \"exists x y. R(x) & S(x,y) & T(y)\" --oracle --report -");
  CHECK(rr.exit_code == 0);
  CHECK(rr.out.find("\"agreement\": true") != std::string::npos);

  // identical invocations agree outside the timings field
  auto strip = [](std::string s) {
    auto cut = s.find("\"timings\"");
    return cut == std::string::npos ? s : s.substr(0, cut);
  };
  auto rr2 = run_cli("prob " + inst +
                     " \"exists x y. R(x) & S(x,y) & T(y)\" --oracle --report -");
  CHECK(strip(rr.out) == strip(rr2.out));
}

TEST_CASE("cli exit codes distinguish input errors from guard trips") {
  std::string bad = tmp_path("bad.json");
  write_file(bad, "{ not json");
  CHECK(run_cli("prob " + bad + " \"exists x. R(x)\"").exit_code == 2);

  std::string missing = tmp_path("definitely_missing.json");
  std::remove(missing.c_str());
  CHECK(run_cli("decompose " + missing).exit_code == 2);

  std::string inst = tmp_path("tid.json");
  write_file(inst, kTidJson);
  CHECK(run_cli("prob " + inst + " \"exists x. Q(x)\"").exit_code == 2);

  // a poset too large for extension listing trips the guard (exit 1)
  json big;
  big["labels"] = json::array();
  for (int i = 0; i < 12; ++i) big["labels"].push_back("l" + std::to_string(i));
  big["edges"] = json::array();
  std::string pp = tmp_path("bigposet.json");
  write_file(pp, big.dump());
  CHECK(run_cli("poset extensions " + pp).exit_code == 1);
}

TEST_CASE("cli decompose and poset subcommands") {
  std::string inst = tmp_path("tid.json");
  write_file(inst, kTidJson);
  auto r = run_cli("decompose " + inst);
  CHECK(r.exit_code == 0);
  json j = json::parse(r.out);
  CHECK(j.contains("bags"));
  CHECK(j["width"].get<int>() >= 1);

  json anti = {{"labels", {"a", "b", "c", "d"}}, {"edges", json::array()}};
  std::string pp = tmp_path("anti4.json");
  write_file(pp, anti.dump());
  auto rc = run_cli("poset count " + pp);
  CHECK(rc.exit_code == 0);
  CHECK(rc.out.find("24") != std::string::npos);

  auto rm = run_cli("poset member " + pp + " a b c d");
  CHECK(rm.exit_code == 0);
  CHECK(rm.out.find("true") != std::string::npos);
}

TEST_CASE("cli lineage and prxml subcommands") {
  std::string inst = tmp_path("tid.json");
  write_file(inst, kTidJson);
  auto r = run_cli("lineage " + inst + " \"exists x. R(x)\"");
  CHECK(r.exit_code == 0);
  json j = json::parse(r.out);
  CHECK(j.contains("gates"));
  CHECK(j["output"].get<int>() >= 0);

  json doc = prxml_to_json(support::fig1_doc().doc);
  std::string dp = tmp_path("fig.json");
  write_file(dp, doc.dump());
  auto rs = run_cli("prxml scopes " + dp);
  CHECK(rs.exit_code == 0);
  json js = json::parse(rs.out);
  CHECK(js["max_node_scope"].get<int>() == 1);

  auto rw = run_cli("prxml worlds " + dp);
  CHECK(rw.exit_code == 0);
  json jw = json::parse(rw.out);
  double total = 0.0;
  for (const auto& w : jw) total += w["prob"].get<double>();
  CHECK_THAT(total, WithinAbs(1.0, 1e-6));

  auto re = run_cli("prxml encode " + dp);
  CHECK(re.exit_code == 0);
  CHECK(json::parse(re.out).contains("circuit"));
}
