#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "pafa/metamodel.hpp"
#include "pafa/oaam.hpp"
#include "pafa/qualifier.hpp"
#include "pafa/query.hpp"
#include "pafa/simkernel.hpp"

namespace support {

std::string read_file(const std::string& path);
std::string scenario_path(const std::string& name);  // "duplex" -> shipped file
pafa::oaam::ScenarioDoc shipped(const std::string& name);
std::vector<std::string> shipped_names();

// Random platforms and function sets. `feasible` biases towards generous
// capacity; otherwise capacity is starved so that something cannot fit.
pafa::oaam::ScenarioDoc random_scenario(std::mt19937_64& rng, bool feasible);
pafa::oaam::ScenarioDoc scale_scenario(int devices = 50, int tasks = 400);

// Fault trees.
pafa::qualifier::FaultTree random_tree(std::mt19937_64& rng, int max_events);
double brute_force_probability(const pafa::qualifier::FaultTree& tree);
std::set<std::vector<int>> brute_force_cut_sets(const pafa::qualifier::FaultTree& tree);

// Query oracle over a fixed three-class schema (A -> B -> C). Queries are
// generated as structures and rendered to text; the oracle filters the
// structure directly.
struct AbcPred {
  std::vector<std::string> path;
  std::string op;
  std::variant<std::int64_t, double, std::string, bool> rhs;
};
struct AbcStep {
  std::string name;
  std::optional<AbcPred> pred;
};
struct AbcQuery {
  std::vector<AbcStep> steps;
  std::optional<int> index;
  std::string text() const;
};

pafa::meta::ModelStore random_abc_store(std::mt19937_64& rng);
AbcQuery random_abc_query(std::mt19937_64& rng);
std::vector<pafa::meta::Value> naive_abc_eval(const AbcQuery& query, const pafa::meta::ModelStore& store);

// Log inspection.
std::vector<pafa::sim::LogLine> of_kind(const std::vector<pafa::sim::LogLine>& log, const std::string& kind);
std::string field(const std::string& detail, const std::string& key);  // "key=value" token
// Cycle of the first disagreement among live digests, or -1.
std::int64_t agreement_violation(const std::vector<pafa::sim::LogLine>& log);
// Verification-role emissions on the network, summed over EXEC lines.
std::int64_t shadow_emissions(const std::vector<pafa::sim::LogLine>& log);
// module -> live digest per cycle ("-" if none).
std::map<std::int64_t, std::map<std::string, std::string>> live_digests(const std::vector<pafa::sim::LogLine>& log);

}  // namespace support
