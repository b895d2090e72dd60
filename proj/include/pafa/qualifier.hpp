#pragma once

// Virtual qualification authority. Rechecks a candidate configuration against
// a consciousness snapshot without reusing any planner code: the snapshot is
// read through the query engine, schedules are recomputed from raw offsets,
// and safety is assessed on fault trees derived from the allocation.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pafa/config.hpp"
#include "pafa/metamodel.hpp"
#include "pafa/oaam.hpp"

namespace pafa::qualifier {

struct Finding {
  std::string check;
  std::string element;
  std::string detail;
  std::string function;  // function the finding is attributed to, if any
};

std::vector<Finding> check_resources(const Configuration& config, const meta::ModelStore& store);
std::vector<Finding> check_schedule(const Configuration& config, const oaam::PlatformTiming& timing);
std::vector<Finding> check_routes(const Configuration& config, const meta::ModelStore& store);
std::vector<Finding> check_latency(const Configuration& config, const meta::ModelStore& store,
                                   const oaam::PlatformTiming& timing);

// Gate tree over named basic events.
struct FaultTree {
  enum class Gate { Basic, And, Or };
  struct Node {
    Gate gate = Gate::Basic;
    int event = -1;
    std::vector<int> children;
  };

  std::string function;
  std::string condition;
  std::vector<std::string> events;
  std::vector<double> probabilities;
  std::vector<Node> nodes;
  int top = -1;

  // Adding an event name twice returns the existing index.
  int add_event(const std::string& name, double probability);
  int basic(int event);
  int gate(Gate gate, std::vector<int> children);
  std::optional<int> event_index(const std::string& name) const;
  // Evaluates the top node for a given failed/working state of every event.
  bool fails(const std::vector<bool>& failed) const;
};

double basic_event_probability(double lambda, double exposure_hours);

FaultTree derive_fault_tree(const Configuration& config, const meta::ModelStore& store, const std::string& function,
                            const oaam::FailureConditionSpec& fc, const oaam::SafetyPolicy& policy);

enum class ProbabilityMode { Auto, Exact, RareEvent };

struct CutSetReport {
  std::vector<std::vector<int>> minimal_cut_sets;  // sorted event indices
  int order_min = 0;
  double probability = 0.0;
  bool rare_event = false;
};

inline constexpr std::size_t kExactCutSetLimit = 20;
inline constexpr std::size_t kMaxIntermediateSets = 1000000;

std::vector<std::vector<int>> minimal_cut_sets(const FaultTree& tree);
double exact_probability(const std::vector<std::vector<int>>& cut_sets, const std::vector<double>& p);
double rare_event_probability(const std::vector<std::vector<int>>& cut_sets, const std::vector<double>& p);
double second_order_bound(const std::vector<std::vector<int>>& cut_sets, const std::vector<double>& p);
CutSetReport evaluate_probability(const FaultTree& tree, ProbabilityMode mode = ProbabilityMode::Auto);

enum class Verdict { Accept, Reject };

struct QualificationResult {
  Verdict verdict = Verdict::Reject;
  std::vector<Finding> findings;
  std::string artifact;                    // CertArtifact JSON
  std::optional<Configuration> verified;  // set on Accept
};

QualificationResult qualify(const Configuration& candidate, const meta::ModelStore& verified_store,
                            const oaam::SafetyPolicy& policy, const oaam::PlatformTiming& timing);

}  // namespace pafa::qualifier
