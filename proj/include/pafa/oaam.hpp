#pragma once

// OAAM-lite: the domain schema of the consciousness, instantiated on the
// metamodel store, plus scenario ingestion, semantic validation and the
// topology event path that mutates a live consciousness.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pafa/metamodel.hpp"

namespace pafa::oaam {

enum class TaskKind { Source, Sink, Gain, Add, Limit, Monitor, Const };
enum class Severity { CAT, HAZ, MAJ, MIN, NSE };
enum class Dal { A, B, C, D, E };

const char* to_string(TaskKind kind);
const char* to_string(Severity severity);
const char* to_string(Dal dal);
TaskKind task_kind_from(std::string_view text);
Severity severity_from(std::string_view text);
Dal dal_from(std::string_view text);

int input_ports(TaskKind kind);
int output_ports(TaskKind kind);

// Resource name -> quantity.
using Resources = std::map<std::string, double>;

struct DeviceTypeSpec {
  std::string name;
  double failure_rate = 0.0;  // per hour
  Resources provides;
};

struct DeviceSpec {
  std::string name;
  std::string type;
  std::string location;
  std::optional<double> failure_rate_override;
  bool is_pafa_module = false;
  bool failed = false;
};

struct ConnectionSpec {
  std::string name;
  std::string a;
  std::string b;
  std::string type;
  double failure_rate = 0.0;
  std::int64_t transmission_time = 0;  // us per message
  Resources provides;
  bool failed = false;
};

struct TaskTypeSpec {
  std::string name;
  TaskKind kind = TaskKind::Const;
  double parameter = 0.0;
};

struct CapabilitySpec {
  std::string task_type;
  std::string device_type;
  std::int64_t wcet = 0;  // us
  Resources consumes;
};

struct BasicTaskSpec {
  std::string name;
  std::string task_type;
  bool best_effort = false;
};

struct SignalSpec {
  std::string from_task;
  int from_port = 0;
  std::string to_task;
  int to_port = 0;
  Resources consumes;  // booked on every connection of the route
};

struct FailureConditionSpec {
  std::string description;
  Severity severity = Severity::NSE;
  double max_probability_per_hour = 1.0;
};

struct PeripheralBindingSpec {
  std::string task;
  std::string device;
};

struct FunctionSpec {
  std::string name;
  std::vector<BasicTaskSpec> tasks;
  std::vector<SignalSpec> signals;
  std::optional<std::int64_t> period;  // us; nullopt = best effort
  std::optional<std::int64_t> latency_req;
  std::vector<FailureConditionSpec> failure_conditions;
  Dal dal = Dal::E;
  std::int64_t priority = 0;
  std::vector<PeripheralBindingSpec> peripheral_bindings;
  bool composition_verified = true;

  const BasicTaskSpec* task(std::string_view task_name) const;
};

struct SafetyPolicy {
  double exposure_hours = 1.0;
  std::map<Severity, double> severity_limits{
      {Severity::CAT, 1e-9}, {Severity::HAZ, 1e-7}, {Severity::MAJ, 1e-5},
      {Severity::MIN, 1e-3}, {Severity::NSE, 1.0}};
  int cat_min_cut_order = 2;

  double limit_for(Severity severity) const;
  // min(severity limit, condition's own maximum).
  double limit_for(const FailureConditionSpec& fc) const;
};

struct PlatformTiming {
  std::int64_t mif = 1000;
  std::int64_t maf = 1000;
  std::int64_t execution_window_per_mif = 1000;
  std::int64_t verification_cycles = 3;

  std::int64_t frames() const { return maf / mif; }
};

struct FaultEvent {
  std::int64_t cycle = 0;
  std::string event;
  std::string target;
  // Optional payload for DeviceAdded / FunctionAdded.
  std::optional<DeviceSpec> device;
  std::vector<ConnectionSpec> connections;
  std::optional<FunctionSpec> function;
};

// Typed mirror of the scenario document and of a consciousness store.
struct ScenarioDoc {
  std::vector<std::string> resource_types;
  std::vector<DeviceTypeSpec> device_types;
  std::vector<DeviceSpec> devices;
  std::vector<ConnectionSpec> connections;
  std::vector<TaskTypeSpec> task_types;
  std::vector<CapabilitySpec> capabilities;
  std::vector<FunctionSpec> functions;
  SafetyPolicy safety_policy;
  PlatformTiming timing;
  std::vector<FaultEvent> fault_script;

  const DeviceTypeSpec* device_type(std::string_view name) const;
  const DeviceSpec* device(std::string_view name) const;
  const ConnectionSpec* connection(std::string_view name) const;
  const TaskTypeSpec* task_type(std::string_view name) const;
  const CapabilitySpec* capability(std::string_view task_type, std::string_view device_type) const;
  const FunctionSpec* function(std::string_view name) const;
  double effective_failure_rate(const DeviceSpec& device) const;
};

// Sorts every name-keyed collection so that two consciousnesses holding the
// same facts map to the same store.
void canonicalize(ScenarioDoc& doc);

// Schema -------------------------------------------------------------------

void define_schema(meta::ModelStore& store);
meta::ModelStore make_empty_consciousness();

// Scenario I/O --------------------------------------------------------------

struct Scenario {
  meta::ModelStore store;
  SafetyPolicy policy;
  PlatformTiming timing;
  std::vector<FaultEvent> fault_script;
};

ScenarioDoc parse_scenario(std::string_view json_text);
std::string write_scenario(const ScenarioDoc& doc);
meta::ModelStore build_store(const ScenarioDoc& doc);
Scenario load_scenario(std::string_view json_text);
Scenario load_scenario_file(const std::string& path);

// Reads the domain content back out of a store (store order).
ScenarioDoc extract(const meta::ModelStore& store);
std::string save_scenario(const meta::ModelStore& store, const SafetyPolicy& policy,
                          const PlatformTiming& timing, const std::vector<FaultEvent>& fault_script);

// Digest of the name-canonical rebuild of a store: equal for stores that
// hold the same domain facts regardless of insertion order.
Digest canonical_digest(const meta::ModelStore& store);

// Validation ----------------------------------------------------------------

struct Violation {
  std::string kind;
  std::string element;
  std::string detail;
};

std::vector<Violation> validate_semantics(const meta::ModelStore& store, const PlatformTiming& timing,
                                          const SafetyPolicy& policy = {});
std::vector<Violation> validate_semantics(const ScenarioDoc& doc);

// Topology events ------------------------------------------------------------

enum class EventKind {
  DeviceFailed,
  DeviceRestored,
  LinkFailed,
  LinkRestored,
  DeviceAdded,
  DeviceRemoved,
  FunctionAdded,
  FunctionRemoved,
};

const char* to_string(EventKind kind);
std::optional<EventKind> event_kind_from(std::string_view text);

struct TopologyEvent {
  EventKind kind = EventKind::DeviceFailed;
  std::string target;
  std::optional<DeviceSpec> device;
  std::vector<ConnectionSpec> connections;
  std::optional<FunctionSpec> function;
};

TopologyEvent to_topology_event(const FaultEvent& fault);

// Returns false when the event carried nothing new (no mutation happened).
bool apply_event(meta::ModelStore& store, const TopologyEvent& event);

// Store plus the journal of applied events, so that the analysis step can
// name the first event since a given store version.
class Consciousness {
 public:
  struct JournalEntry {
    std::uint64_t version = 0;  // store version after the event
    EventKind kind = EventKind::DeviceFailed;
    std::string target;
  };

  Consciousness() = default;
  explicit Consciousness(meta::ModelStore store) : store_(std::move(store)) {}

  const meta::ModelStore& store() const { return store_; }
  std::uint64_t version() const { return store_.version(); }
  const std::vector<JournalEntry>& journal() const { return journal_; }

  bool apply(const TopologyEvent& event);

 private:
  meta::ModelStore store_;
  std::vector<JournalEntry> journal_;
};

// Name-based lookups on a consciousness store.
std::optional<meta::ObjectId> find_named(const meta::ModelStore& store, std::string_view cls,
                                         std::string_view name);

}  // namespace pafa::oaam
