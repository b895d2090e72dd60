#pragma once

// Monitor / analyze / plan: decides whether the consciousness changed since
// the last plan, sizes redundancy, and builds a candidate configuration by
// greedy placement with deterministic tie-breaking.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pafa/config.hpp"
#include "pafa/oaam.hpp"

namespace pafa::planner {

enum class ReplanReason { TopologyChange, DeviceFailure, FunctionSetChange, Initial };
const char* to_string(ReplanReason reason);

struct AdaptationNeed {
  bool replan = false;
  ReplanReason reason = ReplanReason::Initial;
};

// `last_planned_version` is nullopt when the module never planned.
AdaptationNeed analyze(const oaam::Consciousness& consciousness, std::optional<std::uint64_t> last_planned_version);

// Smallest k with (lambda*T)^k <= limit, raised to the CAT minimum cut order.
int required_replicas(double lambda_worst, const oaam::FailureConditionSpec& fc, const oaam::SafetyPolicy& policy);

struct SchedTask {
  std::string key;
  std::int64_t wcet = 0;
  std::int64_t period_frames = 0;  // 0 = best effort
};

struct ScheduleResult {
  bool feasible = false;
  DeviceSchedule schedule;
  std::string reason;
};

// Tasks are listed in dataflow order; that order fixes the offsets inside a
// frame, while the frame placement itself is first-fit decreasing by wcet.
ScheduleResult schedule_device(const std::vector<SchedTask>& tasks, const oaam::PlatformTiming& timing);

// Healthy part of the platform with remaining connection capacity.
struct NetworkView {
  struct Link {
    std::string name;
    std::string a;
    std::string b;
    std::int64_t transmission_time = 0;
    oaam::Resources provided;
    oaam::Resources consumed;
  };
  std::set<std::string> devices;
  std::vector<Link> links;
  std::map<std::string, std::vector<std::size_t>> adjacency;

  static NetworkView from(const oaam::ScenarioDoc& doc);
  Link* link(const std::string& name);
};

struct Route {
  std::vector<std::string> connections;
  std::vector<std::string> via_devices;
};

// Shortest healthy path by (hops, total transmission time, connection names);
// only links with room for `consumes` are used. Does not book anything.
std::optional<Route> route_signal(const NetworkView& net, const std::string& src, const std::string& dst,
                                  const oaam::Resources& consumes = {});
std::optional<Route> route_signal(const meta::ModelStore& store, const std::string& src, const std::string& dst);
void book_route(NetworkView& net, const Route& route, const oaam::Resources& consumes);

enum class OutcomeKind { Candidate, Infeasible, Degraded };
const char* to_string(OutcomeKind kind);

struct Unsatisfied {
  std::string function;
  std::string reason;
};

struct PlanOutcome {
  OutcomeKind kind = OutcomeKind::Infeasible;
  std::optional<Configuration> config;
  std::vector<Unsatisfied> unsatisfied;
};

struct PlanOptions {
  std::int64_t version = 1;
  // Functions withheld from planning, with the reason recorded as dropped.
  std::map<std::string, std::string> excluded;
};

// Places every plannable function or reports which ones could not be placed.
PlanOutcome allocate(const oaam::ScenarioDoc& doc, const PlanOptions& options = {});
PlanOutcome allocate(const meta::ModelStore& store, const oaam::SafetyPolicy& policy,
                     const oaam::PlatformTiming& timing, const PlanOptions& options = {});

// allocate, then drop functions by ascending priority until the rest fits.
PlanOutcome plan(const oaam::ScenarioDoc& doc, const PlanOptions& options = {});
PlanOutcome plan(const meta::ModelStore& store, const oaam::SafetyPolicy& policy, const oaam::PlatformTiming& timing,
                 const PlanOptions& options = {});

// Allocation order: DAL A first, then priority descending, then name.
std::vector<const oaam::FunctionSpec*> function_order(const oaam::ScenarioDoc& doc);

}  // namespace pafa::planner
