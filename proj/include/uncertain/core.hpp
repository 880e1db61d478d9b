#pragma once

#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace uncertain {

// Error categories map onto CLI exit codes: input problems (bad files,
// malformed queries, schema mismatches) vs. resource guards (world caps,
// state-space limits).
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LimitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Schema {
  std::vector<std::pair<std::string, int>> relations;

  std::optional<int> arity_of(const std::string& name) const {
    for (const auto& [r, a] : relations)
      if (r == name) return a;
    return std::nullopt;
  }

  void add(const std::string& name, int arity) {
    if (arity < 1) throw InputError("relation " + name + ": arity must be >= 1");
    if (arity_of(name)) throw InputError("duplicate relation " + name);
    relations.emplace_back(name, arity);
  }
};

struct Fact {
  std::string relation;
  std::vector<std::string> args;

  bool operator==(const Fact&) const = default;
  auto operator<=>(const Fact&) const = default;
};

struct Event {
  std::string name;
  double probability = 0.0;
};

struct EventTable {
  std::vector<Event> events;
  std::map<std::string, int> index;

  void add(const std::string& name, double p) {
    if (p < 0.0 || p > 1.0)
      throw InputError("event " + name + ": probability out of [0,1]");
    if (index.count(name)) throw InputError("duplicate event " + name);
    index[name] = static_cast<int>(events.size());
    events.push_back({name, p});
  }

  bool contains(const std::string& name) const { return index.count(name) > 0; }
  std::size_t size() const { return events.size(); }
};

// Total truth assignment over an event table.
struct Valuation {
  std::map<std::string, bool> values;

  bool get(const std::string& name) const {
    auto it = values.find(name);
    if (it == values.end()) throw InputError("valuation missing event " + name);
    return it->second;
  }
};

// Resource guard for possible-world enumeration, overridable via the
// UNCERTAIN_MAX_EVENTS environment variable.
inline std::size_t max_enumerable_events() {
  if (const char* s = std::getenv("UNCERTAIN_MAX_EVENTS")) {
    char* end = nullptr;
    long v = std::strtol(s, &end, 10);
    if (end != s && v > 0) return static_cast<std::size_t>(v);
  }
  return 20;
}

inline void check_event_cap(std::size_t n_events, std::size_t cap) {
  if (n_events > cap)
    throw LimitError("world enumeration refused: " + std::to_string(n_events) +
                     " events exceeds cap of " + std::to_string(cap));
}

}  // namespace uncertain
