#pragma once

// Live and verification execution units. A unit runs whatever schedule and
// routing table it was loaded with; it takes no decisions. The verification
// unit computes exactly like the live one but every outgoing signal is
// passivated: recorded as suppressed, never emitted on the live network.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pafa/config.hpp"

namespace pafa::exec {

enum class Role { Live, Verification };
const char* to_string(Role role);

struct Message {
  std::string signal;
  std::string src_device;
  std::string dst_device;
  std::string dst_task;
  int dst_port = 0;
  double value = 0.0;
  std::string config;  // digest (hex) of the configuration that produced it
  std::vector<std::string> route;
};

struct ExecutedTask {
  std::string task;
  std::int64_t offset = 0;
  std::optional<double> output;  // nullopt: skipped for missing input
};

struct SinkRecord {
  std::string task;
  double value = 0.0;
};

struct CycleTrace {
  std::int64_t cycle = 0;
  Role role = Role::Live;
  std::string config;
  std::vector<ExecutedTask> executed;
  std::vector<Message> emitted;
  std::vector<Message> suppressed;
  std::vector<SinkRecord> sinks;
};

struct TaskBody {
  oaam::TaskKind kind = oaam::TaskKind::Const;
  double parameter = 0.0;
};

// What one device executes under a configuration.
struct UnitProgram {
  std::string config;
  DeviceSchedule schedule;
  RoutingTable table;
  std::map<std::string, TaskBody> tasks;
};

UnitProgram program_for(const Configuration& config, const std::string& device);

// Dataflow semantics of one basic task.
double compute(const TaskBody& body, const std::vector<double>& inputs);

class ExecutionUnit {
 public:
  explicit ExecutionUnit(Role role = Role::Live) : role_(role) {}

  Role role() const { return role_; }
  void set_role(Role role) { role_ = role; }

  // Takes effect at the first cycle after `cycle`, never mid-cycle.
  void load_configuration(UnitProgram program, std::int64_t cycle);
  void unload();
  // Digest of the configuration active in `cycle` (accounting for a pending load).
  std::optional<std::string> config_at(std::int64_t cycle) const;
  const std::optional<UnitProgram>& active() const { return active_; }

  CycleTrace execute_cycle(std::int64_t cycle, const std::vector<Message>& inbox);

 private:
  void activate_pending(std::int64_t cycle);

  Role role_;
  std::optional<UnitProgram> active_;
  std::optional<UnitProgram> pending_;
  std::int64_t pending_from_ = 0;
  std::vector<std::optional<double>> buffers_;
  std::map<std::pair<std::string, int>, int> slot_of_;
};

// The pair of units of one module plus the switch input reserved for the
// qualification authority.
class ModuleUnits {
 public:
  ModuleUnits() : units_{ExecutionUnit(Role::Live), ExecutionUnit(Role::Verification)} {}

  ExecutionUnit& live() { return units_[live_]; }
  ExecutionUnit& verification() { return units_[1 - live_]; }
  const ExecutionUnit& live() const { return units_[live_]; }
  const ExecutionUnit& verification() const { return units_[1 - live_]; }

  // Later calls replace earlier ones.
  void set_switch(std::int64_t activation_cycle, std::int64_t current_cycle);
  std::optional<std::int64_t> pending_switch() const { return switch_at_; }
  // Swaps roles when `cycle` is the activation cycle; returns true on a swap.
  // The former live unit goes idle.
  bool begin_cycle(std::int64_t cycle);

 private:
  std::array<ExecutionUnit, 2> units_;
  int live_ = 0;
  std::optional<std::int64_t> switch_at_;
};

}  // namespace pafa::exec
