#include "pafa/config.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"

namespace pafa {

using json = nlohmann::json;

std::string task_key(const std::string& function, int replica, const std::string& task) {
  return function + "#" + std::to_string(replica) + "/" + task;
}

std::string signal_key(const std::string& function, int replica, int signal) {
  return function + "#" + std::to_string(replica) + ":s" + std::to_string(signal);
}

std::string TaskAssignment::key() const { return task_key(function, replica, task); }
std::string SignalRoute::key() const { return signal_key(function, replica, signal); }

const TaskAssignment* Configuration::assignment(const std::string& function, int replica,
                                                const std::string& task) const {
  for (const auto& a : assignments) {
    if (a.function == function && a.replica == replica && a.task == task) return &a;
  }
  return nullptr;
}

std::vector<std::string> Configuration::hosted_functions() const {
  std::vector<std::string> out;
  for (const auto& [name, k] : replicas) out.push_back(name);
  return out;
}

namespace {

json to_tree(const Configuration& c) {
  json j;
  j["version"] = c.version;
  j["modules"] = c.modules;
  j["replicas"] = json::object();
  for (const auto& [f, k] : c.replicas) j["replicas"][f] = k;

  j["assignments"] = json::array();
  for (const auto& a : c.assignments) {
    j["assignments"].push_back({{"function", a.function},
                                {"replica", a.replica},
                                {"task", a.task},
                                {"task_type", a.task_type},
                                {"kind", oaam::to_string(a.kind)},
                                {"parameter", a.parameter},
                                {"best_effort", a.best_effort},
                                {"device", a.device},
                                {"wcet", a.wcet},
                                {"period_frames", a.period_frames},
                                {"peripheral", a.peripheral},
                                {"peripheral_link", a.peripheral_link}});
  }
  j["routes"] = json::array();
  for (const auto& r : c.routes) {
    j["routes"].push_back({{"function", r.function},
                           {"replica", r.replica},
                           {"signal", r.signal},
                           {"from_task", r.from_task},
                           {"from_port", r.from_port},
                           {"to_task", r.to_task},
                           {"to_port", r.to_port},
                           {"src_device", r.src_device},
                           {"dst_device", r.dst_device},
                           {"connections", r.connections},
                           {"via_devices", r.via_devices}});
  }
  j["schedules"] = json::object();
  for (const auto& [dev, s] : c.schedules) {
    json frames = json::array();
    for (const auto& frame : s.frames) {
      json entries = json::array();
      for (const auto& e : frame) entries.push_back({{"task", e.task}, {"offset", e.offset}, {"wcet", e.wcet}});
      frames.push_back(entries);
    }
    j["schedules"][dev] = {{"frames", frames}, {"omitted", s.omitted}};
  }
  j["routing_tables"] = json::object();
  for (const auto& [dev, t] : c.routing_tables) {
    json slots = json::array();
    for (const auto& s : t.slots) slots.push_back({{"task", s.task}, {"port", s.port}});
    json entries = json::array();
    for (const auto& e : t.entries) {
      entries.push_back({{"signal", e.signal},
                         {"src_task", e.src_task},
                         {"src_port", e.src_port},
                         {"network", e.network},
                         {"slot", e.slot},
                         {"route", e.route},
                         {"dst_device", e.dst_device},
                         {"dst_task", e.dst_task},
                         {"dst_port", e.dst_port}});
    }
    j["routing_tables"][dev] = {{"slots", slots}, {"entries", entries}};
  }
  j["dropped"] = json::array();
  for (const auto& d : c.dropped) j["dropped"].push_back({{"name", d.name}, {"reason", d.reason}});
  j["reduced_redundancy"] = c.reduced_redundancy;
  j["maintenance_needed"] = c.maintenance_needed;
  return j;
}

template <typename T>
T take(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorKind::ParseError, std::string("configuration: missing '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("configuration: '") + key + "': " + e.what());
  }
}

}  // namespace

std::string Configuration::canonical_json() const { return to_tree(*this).dump(); }

bool Configuration::same_allocation(const Configuration& other) const {
  auto a = to_tree(*this);
  auto b = to_tree(other);
  a.erase("version");
  b.erase("version");
  return a == b;
}

std::string to_json(const Configuration& config) {
  auto j = to_tree(config);
  j["digest"] = to_hex(config.digest());
  return j.dump(2) + "\n";
}

Configuration configuration_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::ParseError, "configuration must be a JSON object");
  Configuration c;
  c.version = take<std::int64_t>(j, "version");
  c.modules = take<std::vector<std::string>>(j, "modules");
  c.replicas = take<std::map<std::string, int>>(j, "replicas");
  for (const auto& a : take<json>(j, "assignments")) {
    TaskAssignment t;
    t.function = take<std::string>(a, "function");
    t.replica = take<int>(a, "replica");
    t.task = take<std::string>(a, "task");
    t.task_type = take<std::string>(a, "task_type");
    t.kind = oaam::task_kind_from(take<std::string>(a, "kind"));
    t.parameter = take<double>(a, "parameter");
    t.best_effort = take<bool>(a, "best_effort");
    t.device = take<std::string>(a, "device");
    t.wcet = take<std::int64_t>(a, "wcet");
    t.period_frames = take<std::int64_t>(a, "period_frames");
    t.peripheral = take<std::string>(a, "peripheral");
    t.peripheral_link = take<std::string>(a, "peripheral_link");
    c.assignments.push_back(std::move(t));
  }
  for (const auto& r : take<json>(j, "routes")) {
    SignalRoute s;
    s.function = take<std::string>(r, "function");
    s.replica = take<int>(r, "replica");
    s.signal = take<int>(r, "signal");
    s.from_task = take<std::string>(r, "from_task");
    s.from_port = take<int>(r, "from_port");
    s.to_task = take<std::string>(r, "to_task");
    s.to_port = take<int>(r, "to_port");
    s.src_device = take<std::string>(r, "src_device");
    s.dst_device = take<std::string>(r, "dst_device");
    s.connections = take<std::vector<std::string>>(r, "connections");
    s.via_devices = take<std::vector<std::string>>(r, "via_devices");
    c.routes.push_back(std::move(s));
  }
  const json schedules = take<json>(j, "schedules");
  for (const auto& [dev, s] : schedules.items()) {
    DeviceSchedule ds;
    for (const auto& frame : take<json>(s, "frames")) {
      std::vector<ScheduleEntry> entries;
      for (const auto& e : frame) {
        entries.push_back({take<std::string>(e, "task"), take<std::int64_t>(e, "offset"), take<std::int64_t>(e, "wcet")});
      }
      ds.frames.push_back(std::move(entries));
    }
    ds.omitted = take<std::vector<std::string>>(s, "omitted");
    c.schedules[dev] = std::move(ds);
  }
  const json tables = take<json>(j, "routing_tables");
  for (const auto& [dev, t] : tables.items()) {
    RoutingTable rt;
    for (const auto& s : take<json>(t, "slots")) rt.slots.push_back({take<std::string>(s, "task"), take<int>(s, "port")});
    for (const auto& e : take<json>(t, "entries")) {
      RouteEntry re;
      re.signal = take<std::string>(e, "signal");
      re.src_task = take<std::string>(e, "src_task");
      re.src_port = take<int>(e, "src_port");
      re.network = take<bool>(e, "network");
      re.slot = take<int>(e, "slot");
      re.route = take<std::vector<std::string>>(e, "route");
      re.dst_device = take<std::string>(e, "dst_device");
      re.dst_task = take<std::string>(e, "dst_task");
      re.dst_port = take<int>(e, "dst_port");
      rt.entries.push_back(std::move(re));
    }
    c.routing_tables[dev] = std::move(rt);
  }
  for (const auto& d : take<json>(j, "dropped")) c.dropped.push_back({take<std::string>(d, "name"), take<std::string>(d, "reason")});
  c.reduced_redundancy = take<std::vector<std::string>>(j, "reduced_redundancy");
  c.maintenance_needed = take<bool>(j, "maintenance_needed");
  if (j.contains("digest")) {
    try {
      c.declared_digest = digest_from_hex(take<std::string>(j, "digest"));
    } catch (const std::exception&) {
      throw Error(ErrorKind::ParseError, "configuration: malformed digest");
    }
  }
  return c;
}

}  // namespace pafa
