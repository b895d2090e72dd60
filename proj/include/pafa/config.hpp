#pragma once

// The allocation a planner produces and a qualifier verifies: task
// placements, signal routes, per-device cyclic schedules and routing tables.
// Elements are referenced by name so that configurations are portable between
// modules whose consciousness stores assign different object ids.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pafa/digest.hpp"
#include "pafa/oaam.hpp"

namespace pafa {

struct TaskAssignment {
  std::string function;
  int replica = 0;
  std::string task;
  std::string task_type;
  oaam::TaskKind kind = oaam::TaskKind::Const;
  double parameter = 0.0;
  bool best_effort = false;
  std::string device;
  std::int64_t wcet = 0;
  std::int64_t period_frames = 0;  // 0 = best effort
  std::string peripheral;          // bound peripheral device, if any
  std::string peripheral_link;     // link to it when hosted next to it

  std::string key() const;
  friend bool operator==(const TaskAssignment&, const TaskAssignment&) = default;
};

struct SignalRoute {
  std::string function;
  int replica = 0;
  int signal = 0;  // index in the function's signal list
  std::string from_task;
  int from_port = 0;
  std::string to_task;
  int to_port = 0;
  std::string src_device;
  std::string dst_device;
  std::vector<std::string> connections;  // empty = internal buffer
  std::vector<std::string> via_devices;

  std::string key() const;
  friend bool operator==(const SignalRoute&, const SignalRoute&) = default;
};

struct ScheduleEntry {
  std::string task;  // task key
  std::int64_t offset = 0;
  std::int64_t wcet = 0;
  friend bool operator==(const ScheduleEntry&, const ScheduleEntry&) = default;
};

struct DeviceSchedule {
  std::vector<std::vector<ScheduleEntry>> frames;  // one list per MIF of the MAF
  std::vector<std::string> omitted;                // best-effort tasks that did not fit
  friend bool operator==(const DeviceSchedule&, const DeviceSchedule&) = default;
};

struct BufferSlot {
  std::string task;  // consuming task key
  int port = 0;
  friend bool operator==(const BufferSlot&, const BufferSlot&) = default;
};

struct RouteEntry {
  std::string signal;  // signal key
  std::string src_task;
  int src_port = 0;
  bool network = false;
  int slot = -1;  // internal buffer
  std::vector<std::string> route;
  std::string dst_device;
  std::string dst_task;
  int dst_port = 0;
  friend bool operator==(const RouteEntry&, const RouteEntry&) = default;
};

struct RoutingTable {
  std::vector<BufferSlot> slots;
  std::vector<RouteEntry> entries;
  friend bool operator==(const RoutingTable&, const RoutingTable&) = default;
};

struct DroppedFunction {
  std::string name;
  std::string reason;
  friend bool operator==(const DroppedFunction&, const DroppedFunction&) = default;
};

struct Configuration {
  std::int64_t version = 0;
  std::vector<std::string> modules;  // participants of the switch
  std::map<std::string, int> replicas;
  std::vector<TaskAssignment> assignments;
  std::vector<SignalRoute> routes;
  std::map<std::string, DeviceSchedule> schedules;
  std::map<std::string, RoutingTable> routing_tables;
  std::vector<DroppedFunction> dropped;
  std::vector<std::string> reduced_redundancy;
  bool maintenance_needed = false;

  // Digest carried by a configuration read from a file; nullopt for one
  // built in process.
  std::optional<Digest> declared_digest;

  std::string canonical_json() const;  // without the digest
  Digest digest() const { return sha256(canonical_json()); }
  // Equal allocation regardless of version and declared digest.
  bool same_allocation(const Configuration& other) const;

  const TaskAssignment* assignment(const std::string& function, int replica, const std::string& task) const;
  std::vector<std::string> hosted_functions() const;
};

std::string task_key(const std::string& function, int replica, const std::string& task);
std::string signal_key(const std::string& function, int replica, int signal);

// File form: canonical JSON plus a "digest" field.
std::string to_json(const Configuration& config);
Configuration configuration_from_json(const std::string& text);

}  // namespace pafa
