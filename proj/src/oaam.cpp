#include "pafa/oaam.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "json.hpp"

namespace pafa::oaam {

using json = nlohmann::json;
using meta::AttributeDef;
using meta::EnumLiteral;
using meta::Kind;
using meta::ModelStore;
using meta::Multiplicity;
using meta::ObjectId;
using meta::ObjectRef;
using meta::ReferenceDef;
using meta::Value;

// ---------------------------------------------------------------- enums

const char* to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::Source: return "Source";
    case TaskKind::Sink: return "Sink";
    case TaskKind::Gain: return "Gain";
    case TaskKind::Add: return "Add";
    case TaskKind::Limit: return "Limit";
    case TaskKind::Monitor: return "Monitor";
    case TaskKind::Const: return "Const";
  }
  return "?";
}

const char* to_string(Severity severity) {
  switch (severity) {
    case Severity::CAT: return "CAT";
    case Severity::HAZ: return "HAZ";
    case Severity::MAJ: return "MAJ";
    case Severity::MIN: return "MIN";
    case Severity::NSE: return "NSE";
  }
  return "?";
}

const char* to_string(Dal dal) {
  switch (dal) {
    case Dal::A: return "A";
    case Dal::B: return "B";
    case Dal::C: return "C";
    case Dal::D: return "D";
    case Dal::E: return "E";
  }
  return "?";
}

TaskKind task_kind_from(std::string_view text) {
  for (auto k : {TaskKind::Source, TaskKind::Sink, TaskKind::Gain, TaskKind::Add, TaskKind::Limit,
                 TaskKind::Monitor, TaskKind::Const}) {
    if (text == to_string(k)) return k;
  }
  throw Error(ErrorKind::ParseError, "unknown task kind '" + std::string(text) + "'");
}

Severity severity_from(std::string_view text) {
  for (auto s : {Severity::CAT, Severity::HAZ, Severity::MAJ, Severity::MIN, Severity::NSE}) {
    if (text == to_string(s)) return s;
  }
  throw Error(ErrorKind::ParseError, "unknown severity '" + std::string(text) + "'");
}

Dal dal_from(std::string_view text) {
  for (auto d : {Dal::A, Dal::B, Dal::C, Dal::D, Dal::E}) {
    if (text == to_string(d)) return d;
  }
  throw Error(ErrorKind::ParseError, "unknown DAL '" + std::string(text) + "'");
}

int input_ports(TaskKind kind) {
  switch (kind) {
    case TaskKind::Source: return 0;
    case TaskKind::Sink: return 1;
    case TaskKind::Gain: return 1;
    case TaskKind::Add: return 2;
    case TaskKind::Limit: return 1;
    case TaskKind::Monitor: return 2;
    case TaskKind::Const: return 0;
  }
  return 0;
}

int output_ports(TaskKind kind) { return kind == TaskKind::Sink ? 0 : 1; }

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::DeviceFailed: return "DeviceFailed";
    case EventKind::DeviceRestored: return "DeviceRestored";
    case EventKind::LinkFailed: return "LinkFailed";
    case EventKind::LinkRestored: return "LinkRestored";
    case EventKind::DeviceAdded: return "DeviceAdded";
    case EventKind::DeviceRemoved: return "DeviceRemoved";
    case EventKind::FunctionAdded: return "FunctionAdded";
    case EventKind::FunctionRemoved: return "FunctionRemoved";
  }
  return "?";
}

std::optional<EventKind> event_kind_from(std::string_view text) {
  for (auto k : {EventKind::DeviceFailed, EventKind::DeviceRestored, EventKind::LinkFailed,
                 EventKind::LinkRestored, EventKind::DeviceAdded, EventKind::DeviceRemoved,
                 EventKind::FunctionAdded, EventKind::FunctionRemoved}) {
    if (text == to_string(k)) return k;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- doc lookups

const BasicTaskSpec* FunctionSpec::task(std::string_view task_name) const {
  for (const auto& t : tasks) {
    if (t.name == task_name) return &t;
  }
  return nullptr;
}

double SafetyPolicy::limit_for(Severity severity) const {
  auto it = severity_limits.find(severity);
  return it == severity_limits.end() ? 1.0 : it->second;
}

double SafetyPolicy::limit_for(const FailureConditionSpec& fc) const {
  return std::min(limit_for(fc.severity), fc.max_probability_per_hour);
}

namespace {

template <typename T>
const T* find_by_name(const std::vector<T>& items, std::string_view name) {
  for (const auto& item : items) {
    if (item.name == name) return &item;
  }
  return nullptr;
}

}  // namespace

const DeviceTypeSpec* ScenarioDoc::device_type(std::string_view name) const { return find_by_name(device_types, name); }
const DeviceSpec* ScenarioDoc::device(std::string_view name) const { return find_by_name(devices, name); }
const ConnectionSpec* ScenarioDoc::connection(std::string_view name) const { return find_by_name(connections, name); }
const TaskTypeSpec* ScenarioDoc::task_type(std::string_view name) const { return find_by_name(task_types, name); }
const FunctionSpec* ScenarioDoc::function(std::string_view name) const { return find_by_name(functions, name); }

const CapabilitySpec* ScenarioDoc::capability(std::string_view task_type, std::string_view device_type) const {
  for (const auto& c : capabilities) {
    if (c.task_type == task_type && c.device_type == device_type) return &c;
  }
  return nullptr;
}

double ScenarioDoc::effective_failure_rate(const DeviceSpec& dev) const {
  if (dev.failure_rate_override) return *dev.failure_rate_override;
  const auto* type = device_type(dev.type);
  return type == nullptr ? 0.0 : type->failure_rate;
}

void canonicalize(ScenarioDoc& doc) {
  auto by_name = [](const auto& a, const auto& b) { return a.name < b.name; };
  std::sort(doc.resource_types.begin(), doc.resource_types.end());
  std::sort(doc.device_types.begin(), doc.device_types.end(), by_name);
  std::sort(doc.devices.begin(), doc.devices.end(), by_name);
  std::sort(doc.connections.begin(), doc.connections.end(), by_name);
  std::sort(doc.task_types.begin(), doc.task_types.end(), by_name);
  std::sort(doc.capabilities.begin(), doc.capabilities.end(), [](const auto& a, const auto& b) {
    return std::tie(a.task_type, a.device_type) < std::tie(b.task_type, b.device_type);
  });
  std::sort(doc.functions.begin(), doc.functions.end(), by_name);
}

// ---------------------------------------------------------------- schema

void define_schema(ModelStore& store) {
  const std::vector<std::string> status{"Healthy", "Failed"};
  store.define_class("ResourceType", {{"name", Kind::Text}}, {});
  store.define_class("ResourceAmount", {{"quantity", Kind::Real}}, {{"resource", "ResourceType"}});
  store.define_class("DeviceType", {{"name", Kind::Text}, {"failureRate", Kind::Real}},
                     {{"provides", "ResourceAmount", Multiplicity::Many, true}});
  store.define_class("Device",
                     {{"name", Kind::Text},
                      {"location", Kind::Text},
                      {"failureRateOverride", Kind::Real},
                      {"hasOverride", Kind::Bool},
                      {"isPafaModule", Kind::Bool},
                      {"status", Kind::EnumRef, Multiplicity::One, status}},
                     {{"type", "DeviceType"}});
  store.define_class("Connection",
                     {{"name", Kind::Text},
                      {"type", Kind::Text},
                      {"failureRate", Kind::Real},
                      {"transmissionTime", Kind::Int},
                      {"status", Kind::EnumRef, Multiplicity::One, status}},
                     {{"endpoints", "Device", Multiplicity::Many, false},
                      {"provides", "ResourceAmount", Multiplicity::Many, true}});
  store.define_class("TaskType",
                     {{"name", Kind::Text},
                      {"kind", Kind::EnumRef, Multiplicity::One,
                       {"Const", "Source", "Sink", "Gain", "Add", "Limit", "Monitor"}},
                      {"parameter", Kind::Real}},
                     {});
  store.define_class("Capability", {{"wcet", Kind::Int}},
                     {{"taskType", "TaskType"},
                      {"deviceType", "DeviceType"},
                      {"consumes", "ResourceAmount", Multiplicity::Many, true}});
  store.define_class("BasicTask", {{"name", Kind::Text}, {"isBestEffort", Kind::Bool}}, {{"taskType", "TaskType"}});
  store.define_class("Signal", {{"sourcePort", Kind::Int}, {"targetPort", Kind::Int}},
                     {{"source", "BasicTask"},
                      {"target", "BasicTask"},
                      {"consumes", "ResourceAmount", Multiplicity::Many, true}});
  store.define_class("FailureCondition",
                     {{"description", Kind::Text},
                      {"severity", Kind::EnumRef, Multiplicity::One, {"NSE", "MIN", "MAJ", "HAZ", "CAT"}},
                      {"maxProbabilityPerHour", Kind::Real}},
                     {});
  store.define_class("PeripheralBinding", {}, {{"task", "BasicTask"}, {"device", "Device"}});
  store.define_class("SystemFunction",
                     {{"name", Kind::Text},
                      {"period", Kind::Int},
                      {"bestEffort", Kind::Bool},
                      {"latencyReq", Kind::Int},
                      {"hasLatencyReq", Kind::Bool},
                      {"dal", Kind::EnumRef, Multiplicity::One, {"E", "D", "C", "B", "A"}},
                      {"priority", Kind::Int},
                      {"compositionVerified", Kind::Bool}},
                     {{"tasks", "BasicTask", Multiplicity::Many, true},
                      {"signals", "Signal", Multiplicity::Many, true},
                      {"failureConditions", "FailureCondition", Multiplicity::Many, true},
                      {"bindings", "PeripheralBinding", Multiplicity::Many, true}});
}

ModelStore make_empty_consciousness() {
  ModelStore store;
  define_schema(store);
  return store;
}

std::optional<ObjectId> find_named(const ModelStore& store, std::string_view cls, std::string_view name) {
  for (auto id : store.instances_of(cls)) {
    if (store.get_text(id, "name") == name) return id;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- JSON parsing

namespace {

[[noreturn]] void parse_fail(const std::string& ctx, const std::string& what) {
  throw Error(ErrorKind::ParseError, ctx + ": " + what);
}

const json& field(const json& j, const char* key, const std::string& ctx) {
  if (!j.is_object()) parse_fail(ctx, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) parse_fail(ctx, std::string("missing field '") + key + "'");
  return *it;
}

std::string get_text(const json& j, const char* key, const std::string& ctx) {
  const auto& v = field(j, key, ctx);
  if (!v.is_string()) parse_fail(ctx, std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

double get_real(const json& j, const char* key, const std::string& ctx) {
  const auto& v = field(j, key, ctx);
  if (!v.is_number()) parse_fail(ctx, std::string("'") + key + "' must be a number");
  return v.get<double>();
}

std::int64_t get_int(const json& j, const char* key, const std::string& ctx) {
  const auto& v = field(j, key, ctx);
  if (!v.is_number_integer()) parse_fail(ctx, std::string("'") + key + "' must be an integer");
  return v.get<std::int64_t>();
}

template <typename T>
T opt(const json& j, const char* key, T fallback, const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    parse_fail(ctx, std::string("'") + key + "' has the wrong type");
  }
}

const json& list(const json& j, const char* key) {
  static const json kEmpty = json::array();
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return kEmpty;
  if (!it->is_array()) parse_fail(key, "must be a list");
  return *it;
}

Resources parse_resources(const json& j, const char* key, const std::string& ctx) {
  Resources out;
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return out;
  if (!it->is_object()) parse_fail(ctx, std::string("'") + key + "' must be an object");
  for (const auto& [name, qty] : it->items()) {
    if (!qty.is_number()) parse_fail(ctx, "resource '" + name + "' must be a number");
    out[name] = qty.get<double>();
  }
  return out;
}

json resources_json(const Resources& r) {
  json out = json::object();
  for (const auto& [name, qty] : r) out[name] = qty;
  return out;
}

std::pair<std::string, int> parse_port(const std::string& text, const std::string& ctx) {
  auto dot = text.rfind('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == text.size()) {
    parse_fail(ctx, "port reference '" + text + "' must look like task.port");
  }
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(text.substr(dot + 1), &used);
    if (used != text.size() - dot - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    parse_fail(ctx, "bad port number in '" + text + "'");
  }
  return {text.substr(0, dot), port};
}

DeviceSpec parse_device(const json& j) {
  std::string ctx = "devices";
  DeviceSpec d;
  d.name = get_text(j, "name", ctx);
  ctx += "/" + d.name;
  d.type = get_text(j, "type", ctx);
  d.location = opt<std::string>(j, "location", "", ctx);
  if (j.contains("failure_rate_override") && !j["failure_rate_override"].is_null()) {
    d.failure_rate_override = get_real(j, "failure_rate_override", ctx);
  }
  d.is_pafa_module = opt<bool>(j, "is_pafa_module", false, ctx);
  d.failed = opt<std::string>(j, "status", "Healthy", ctx) == "Failed";
  return d;
}

ConnectionSpec parse_connection(const json& j) {
  std::string ctx = "connections";
  ConnectionSpec c;
  c.name = get_text(j, "name", ctx);
  ctx += "/" + c.name;
  const auto& ends = field(j, "endpoints", ctx);
  if (!ends.is_array() || ends.size() != 2 || !ends[0].is_string() || !ends[1].is_string()) {
    parse_fail(ctx, "'endpoints' must list exactly two device names");
  }
  c.a = ends[0].get<std::string>();
  c.b = ends[1].get<std::string>();
  c.type = opt<std::string>(j, "type", "", ctx);
  c.failure_rate = get_real(j, "failure_rate", ctx);
  c.transmission_time = get_int(j, "transmission_time", ctx);
  c.provides = parse_resources(j, "provides", ctx);
  c.failed = opt<std::string>(j, "status", "Healthy", ctx) == "Failed";
  return c;
}

FunctionSpec parse_function(const json& j) {
  std::string ctx = "functions";
  FunctionSpec f;
  f.name = get_text(j, "name", ctx);
  ctx += "/" + f.name;
  for (const auto& t : list(j, "tasks")) {
    BasicTaskSpec task;
    task.name = get_text(t, "name", ctx);
    task.task_type = get_text(t, "type", ctx + "/" + task.name);
    task.best_effort = opt<bool>(t, "best_effort", false, ctx);
    f.tasks.push_back(std::move(task));
  }
  for (const auto& s : list(j, "signals")) {
    SignalSpec sig;
    auto [ft, fp] = parse_port(get_text(s, "from", ctx), ctx);
    auto [tt, tp] = parse_port(get_text(s, "to", ctx), ctx);
    sig.from_task = ft;
    sig.from_port = fp;
    sig.to_task = tt;
    sig.to_port = tp;
    sig.consumes = parse_resources(s, "consumes", ctx);
    f.signals.push_back(std::move(sig));
  }
  const auto& period = field(j, "period", ctx);
  if (period.is_string() && period.get<std::string>() == "BE") {
    f.period = std::nullopt;
  } else if (period.is_number_integer()) {
    f.period = period.get<std::int64_t>();
  } else {
    parse_fail(ctx, "'period' must be an integer (us) or \"BE\"");
  }
  if (j.contains("latency_req") && !j["latency_req"].is_null()) f.latency_req = get_int(j, "latency_req", ctx);
  for (const auto& fc : list(j, "failure_conditions")) {
    FailureConditionSpec cond;
    cond.description = opt<std::string>(fc, "description", "", ctx);
    cond.severity = severity_from(get_text(fc, "severity", ctx));
    cond.max_probability_per_hour = get_real(fc, "max_probability_per_hour", ctx);
    f.failure_conditions.push_back(std::move(cond));
  }
  f.dal = dal_from(opt<std::string>(j, "dal", "E", ctx));
  f.priority = get_int(j, "priority", ctx);
  for (const auto& b : list(j, "peripheral_bindings")) {
    f.peripheral_bindings.push_back({get_text(b, "task", ctx), get_text(b, "device", ctx)});
  }
  f.composition_verified = opt<bool>(j, "composition_verified", true, ctx);
  return f;
}

json device_json(const DeviceSpec& d) {
  json j;
  j["name"] = d.name;
  j["type"] = d.type;
  j["location"] = d.location;
  if (d.failure_rate_override) j["failure_rate_override"] = *d.failure_rate_override;
  j["is_pafa_module"] = d.is_pafa_module;
  if (d.failed) j["status"] = "Failed";
  return j;
}

json connection_json(const ConnectionSpec& c) {
  json j;
  j["name"] = c.name;
  j["endpoints"] = {c.a, c.b};
  j["type"] = c.type;
  j["failure_rate"] = c.failure_rate;
  j["transmission_time"] = c.transmission_time;
  j["provides"] = resources_json(c.provides);
  if (c.failed) j["status"] = "Failed";
  return j;
}

json function_json(const FunctionSpec& f) {
  json j;
  j["name"] = f.name;
  j["tasks"] = json::array();
  for (const auto& t : f.tasks) j["tasks"].push_back({{"name", t.name}, {"type", t.task_type}, {"best_effort", t.best_effort}});
  j["signals"] = json::array();
  for (const auto& s : f.signals) {
    j["signals"].push_back({{"from", s.from_task + "." + std::to_string(s.from_port)},
                            {"to", s.to_task + "." + std::to_string(s.to_port)},
                            {"consumes", resources_json(s.consumes)}});
  }
  if (f.period) {
    j["period"] = *f.period;
  } else {
    j["period"] = "BE";
  }
  if (f.latency_req) j["latency_req"] = *f.latency_req;
  j["failure_conditions"] = json::array();
  for (const auto& fc : f.failure_conditions) {
    j["failure_conditions"].push_back({{"description", fc.description},
                                       {"severity", to_string(fc.severity)},
                                       {"max_probability_per_hour", fc.max_probability_per_hour}});
  }
  j["dal"] = to_string(f.dal);
  j["priority"] = f.priority;
  j["peripheral_bindings"] = json::array();
  for (const auto& b : f.peripheral_bindings) j["peripheral_bindings"].push_back({{"task", b.task}, {"device", b.device}});
  j["composition_verified"] = f.composition_verified;
  return j;
}

FaultEvent parse_fault(const json& j) {
  const std::string ctx = "fault_script";
  FaultEvent ev;
  ev.cycle = get_int(j, "cycle", ctx);
  ev.event = get_text(j, "event", ctx);
  ev.target = get_text(j, "target", ctx);
  if (j.contains("device")) ev.device = parse_device(j["device"]);
  for (const auto& c : list(j, "connections")) ev.connections.push_back(parse_connection(c));
  if (j.contains("function")) ev.function = parse_function(j["function"]);
  return ev;
}

json fault_json(const FaultEvent& ev) {
  json j;
  j["cycle"] = ev.cycle;
  j["event"] = ev.event;
  j["target"] = ev.target;
  if (ev.device) j["device"] = device_json(*ev.device);
  if (!ev.connections.empty()) {
    j["connections"] = json::array();
    for (const auto& c : ev.connections) j["connections"].push_back(connection_json(c));
  }
  if (ev.function) j["function"] = function_json(*ev.function);
  return j;
}

}  // namespace

ScenarioDoc parse_scenario(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  if (!root.is_object()) throw Error(ErrorKind::ParseError, "scenario must be a JSON object");

  ScenarioDoc doc;
  for (const auto& r : list(root, "resource_types")) {
    if (r.is_string()) {
      doc.resource_types.push_back(r.get<std::string>());
    } else {
      doc.resource_types.push_back(get_text(r, "name", "resource_types"));
    }
  }
  for (const auto& t : list(root, "device_types")) {
    DeviceTypeSpec dt;
    dt.name = get_text(t, "name", "device_types");
    dt.failure_rate = get_real(t, "failure_rate", "device_types/" + dt.name);
    dt.provides = parse_resources(t, "provides", "device_types/" + dt.name);
    doc.device_types.push_back(std::move(dt));
  }
  for (const auto& d : list(root, "devices")) doc.devices.push_back(parse_device(d));
  for (const auto& c : list(root, "connections")) doc.connections.push_back(parse_connection(c));
  for (const auto& t : list(root, "task_types")) {
    TaskTypeSpec tt;
    tt.name = get_text(t, "name", "task_types");
    tt.kind = task_kind_from(get_text(t, "kind", "task_types/" + tt.name));
    tt.parameter = opt<double>(t, "parameter", 0.0, "task_types/" + tt.name);
    doc.task_types.push_back(std::move(tt));
  }
  for (const auto& c : list(root, "capabilities")) {
    CapabilitySpec cap;
    cap.task_type = get_text(c, "task_type", "capabilities");
    cap.device_type = get_text(c, "device_type", "capabilities");
    cap.wcet = get_int(c, "wcet", "capabilities/" + cap.task_type);
    cap.consumes = parse_resources(c, "consumes", "capabilities/" + cap.task_type);
    doc.capabilities.push_back(std::move(cap));
  }
  for (const auto& f : list(root, "functions")) doc.functions.push_back(parse_function(f));

  if (root.contains("safety_policy")) {
    const auto& p = root["safety_policy"];
    doc.safety_policy.exposure_hours = opt<double>(p, "exposure_hours", 1.0, "safety_policy");
    doc.safety_policy.cat_min_cut_order = opt<int>(p, "cat_min_cut_order", 2, "safety_policy");
    if (p.contains("severity_limits")) {
      for (const auto& [sev, lim] : p["severity_limits"].items()) {
        if (!lim.is_number()) parse_fail("safety_policy", "severity limit must be a number");
        doc.safety_policy.severity_limits[severity_from(sev)] = lim.get<double>();
      }
    }
  }
  if (root.contains("timing")) {
    const auto& t = root["timing"];
    doc.timing.mif = get_int(t, "mif", "timing");
    doc.timing.maf = opt<std::int64_t>(t, "maf", doc.timing.mif, "timing");
    doc.timing.execution_window_per_mif = opt<std::int64_t>(t, "execution_window_per_mif", doc.timing.mif, "timing");
    doc.timing.verification_cycles = opt<std::int64_t>(t, "verification_cycles", 3, "timing");
  }
  for (const auto& f : list(root, "fault_script")) doc.fault_script.push_back(parse_fault(f));
  return doc;
}

std::string write_scenario(const ScenarioDoc& doc) {
  json root;
  root["resource_types"] = doc.resource_types;
  root["device_types"] = json::array();
  for (const auto& dt : doc.device_types) {
    root["device_types"].push_back(
        {{"name", dt.name}, {"failure_rate", dt.failure_rate}, {"provides", resources_json(dt.provides)}});
  }
  root["devices"] = json::array();
  for (const auto& d : doc.devices) root["devices"].push_back(device_json(d));
  root["connections"] = json::array();
  for (const auto& c : doc.connections) root["connections"].push_back(connection_json(c));
  root["task_types"] = json::array();
  for (const auto& t : doc.task_types) {
    root["task_types"].push_back({{"name", t.name}, {"kind", to_string(t.kind)}, {"parameter", t.parameter}});
  }
  root["capabilities"] = json::array();
  for (const auto& c : doc.capabilities) {
    root["capabilities"].push_back({{"task_type", c.task_type},
                                    {"device_type", c.device_type},
                                    {"wcet", c.wcet},
                                    {"consumes", resources_json(c.consumes)}});
  }
  root["functions"] = json::array();
  for (const auto& f : doc.functions) root["functions"].push_back(function_json(f));
  json limits = json::object();
  for (const auto& [sev, lim] : doc.safety_policy.severity_limits) limits[to_string(sev)] = lim;
  root["safety_policy"] = {{"exposure_hours", doc.safety_policy.exposure_hours},
                           {"severity_limits", limits},
                           {"cat_min_cut_order", doc.safety_policy.cat_min_cut_order}};
  root["timing"] = {{"mif", doc.timing.mif},
                    {"maf", doc.timing.maf},
                    {"execution_window_per_mif", doc.timing.execution_window_per_mif},
                    {"verification_cycles", doc.timing.verification_cycles}};
  root["fault_script"] = json::array();
  for (const auto& f : doc.fault_script) root["fault_script"].push_back(fault_json(f));
  return root.dump(2) + "\n";
}

// ---------------------------------------------------------------- store building

namespace {

class Builder {
 public:
  explicit Builder(ModelStore& store) : store_(store) { index_existing(); }

  void add_resource_type(const std::string& name) {
    if (resources_.count(name)) throw Error(ErrorKind::DuplicateName, "resource type " + name);
    auto id = store_.instantiate("ResourceType");
    store_.write(id, "name", name);
    resources_[name] = id;
  }

  void add_device_type(const DeviceTypeSpec& dt) {
    if (device_types_.count(dt.name)) throw Error(ErrorKind::DuplicateName, "device type " + dt.name);
    auto id = store_.instantiate("DeviceType");
    store_.write(id, "name", dt.name);
    store_.write(id, "failureRate", dt.failure_rate);
    add_amounts(id, "provides", dt.provides);
    device_types_[dt.name] = id;
  }

  void add_device(const DeviceSpec& d) {
    if (elements_.count(d.name)) throw Error(ErrorKind::DuplicateName, "device " + d.name);
    auto type = lookup(device_types_, d.type, "device type");
    auto id = store_.instantiate("Device");
    store_.write(id, "name", d.name);
    store_.write(id, "location", d.location);
    store_.write(id, "failureRateOverride", d.failure_rate_override.value_or(0.0));
    store_.write(id, "hasOverride", d.failure_rate_override.has_value());
    store_.write(id, "isPafaModule", d.is_pafa_module);
    store_.write(id, "status", EnumLiteral{d.failed ? "Failed" : "Healthy"});
    store_.write(id, "type", ObjectRef{type});
    elements_[d.name] = id;
    devices_[d.name] = id;
  }

  void add_connection(const ConnectionSpec& c) {
    if (elements_.count(c.name)) throw Error(ErrorKind::DuplicateName, "connection " + c.name);
    auto a = lookup(devices_, c.a, "device");
    auto b = lookup(devices_, c.b, "device");
    auto id = store_.instantiate("Connection");
    store_.write(id, "name", c.name);
    store_.write(id, "type", c.type);
    store_.write(id, "failureRate", c.failure_rate);
    store_.write(id, "transmissionTime", c.transmission_time);
    store_.write(id, "status", EnumLiteral{c.failed ? "Failed" : "Healthy"});
    store_.write_many(id, "endpoints", {ObjectRef{a}, ObjectRef{b}});
    add_amounts(id, "provides", c.provides);
    elements_[c.name] = id;
  }

  void add_task_type(const TaskTypeSpec& t) {
    if (task_types_.count(t.name)) throw Error(ErrorKind::DuplicateName, "task type " + t.name);
    auto id = store_.instantiate("TaskType");
    store_.write(id, "name", t.name);
    store_.write(id, "kind", EnumLiteral{to_string(t.kind)});
    store_.write(id, "parameter", t.parameter);
    task_types_[t.name] = id;
  }

  void add_capability(const CapabilitySpec& c) {
    auto key = c.task_type + "@" + c.device_type;
    if (!capabilities_.insert(key).second) throw Error(ErrorKind::DuplicateName, "capability " + key);
    auto tt = lookup(task_types_, c.task_type, "task type");
    auto dt = lookup(device_types_, c.device_type, "device type");
    auto id = store_.instantiate("Capability");
    store_.write(id, "wcet", c.wcet);
    store_.write(id, "taskType", ObjectRef{tt});
    store_.write(id, "deviceType", ObjectRef{dt});
    add_amounts(id, "consumes", c.consumes);
  }

  void add_function(const FunctionSpec& f) {
    if (functions_.count(f.name)) throw Error(ErrorKind::DuplicateName, "function " + f.name);
    auto id = store_.instantiate("SystemFunction");
    store_.write(id, "name", f.name);
    store_.write(id, "period", f.period.value_or(0));
    store_.write(id, "bestEffort", !f.period.has_value());
    store_.write(id, "latencyReq", f.latency_req.value_or(0));
    store_.write(id, "hasLatencyReq", f.latency_req.has_value());
    store_.write(id, "dal", EnumLiteral{to_string(f.dal)});
    store_.write(id, "priority", f.priority);
    store_.write(id, "compositionVerified", f.composition_verified);
    std::map<std::string, ObjectId> tasks;
    for (const auto& t : f.tasks) {
      if (tasks.count(t.name)) throw Error(ErrorKind::DuplicateName, "task " + f.name + "/" + t.name);
      auto tt = lookup(task_types_, t.task_type, "task type");
      auto tid = store_.instantiate("BasicTask");
      store_.write(tid, "name", t.name);
      store_.write(tid, "isBestEffort", t.best_effort);
      store_.write(tid, "taskType", ObjectRef{tt});
      store_.append(id, "tasks", ObjectRef{tid});
      tasks[t.name] = tid;
    }
    for (const auto& s : f.signals) {
      auto src = lookup(tasks, s.from_task, "task in " + f.name);
      auto dst = lookup(tasks, s.to_task, "task in " + f.name);
      auto sid = store_.instantiate("Signal");
      store_.write(sid, "sourcePort", std::int64_t{s.from_port});
      store_.write(sid, "targetPort", std::int64_t{s.to_port});
      store_.write(sid, "source", ObjectRef{src});
      store_.write(sid, "target", ObjectRef{dst});
      add_amounts(sid, "consumes", s.consumes);
      store_.append(id, "signals", ObjectRef{sid});
    }
    for (const auto& fc : f.failure_conditions) {
      auto cid = store_.instantiate("FailureCondition");
      store_.write(cid, "description", fc.description);
      store_.write(cid, "severity", EnumLiteral{to_string(fc.severity)});
      store_.write(cid, "maxProbabilityPerHour", fc.max_probability_per_hour);
      store_.append(id, "failureConditions", ObjectRef{cid});
    }
    for (const auto& b : f.peripheral_bindings) {
      auto task = lookup(tasks, b.task, "task in " + f.name);
      auto dev = lookup(devices_, b.device, "device");
      auto bid = store_.instantiate("PeripheralBinding");
      store_.write(bid, "task", ObjectRef{task});
      store_.write(bid, "device", ObjectRef{dev});
      store_.append(id, "bindings", ObjectRef{bid});
    }
    functions_[f.name] = id;
  }

  bool has_element(const std::string& name) const { return elements_.count(name) != 0; }
  bool has_device(const std::string& name) const { return devices_.count(name) != 0; }
  bool has_function(const std::string& name) const { return functions_.count(name) != 0; }

 private:
  void index_existing() {
    auto index = [&](const char* cls, std::map<std::string, ObjectId>& into) {
      for (auto id : store_.instances_of(cls)) into[store_.get_text(id, "name")] = id;
    };
    index("ResourceType", resources_);
    index("DeviceType", device_types_);
    index("Device", devices_);
    index("TaskType", task_types_);
    index("SystemFunction", functions_);
    for (const auto& [name, id] : devices_) elements_[name] = id;
    for (auto id : store_.instances_of("Connection")) elements_[store_.get_text(id, "name")] = id;
    for (auto id : store_.instances_of("Capability")) {
      auto tt = store_.get_ref(id, "taskType");
      auto dt = store_.get_ref(id, "deviceType");
      if (tt && dt) capabilities_.insert(store_.get_text(*tt, "name") + "@" + store_.get_text(*dt, "name"));
    }
  }

  static ObjectId lookup(const std::map<std::string, ObjectId>& index, const std::string& name, const std::string& what) {
    auto it = index.find(name);
    if (it == index.end()) throw Error(ErrorKind::DanglingReference, what + " '" + name + "'");
    return it->second;
  }

  void add_amounts(ObjectId owner, const char* member, const Resources& amounts) {
    for (const auto& [name, qty] : amounts) {
      auto res = lookup(resources_, name, "resource type");
      auto aid = store_.instantiate("ResourceAmount");
      store_.write(aid, "quantity", qty);
      store_.write(aid, "resource", ObjectRef{res});
      store_.append(owner, member, ObjectRef{aid});
    }
  }

  ModelStore& store_;
  std::map<std::string, ObjectId> resources_, device_types_, devices_, elements_, task_types_, functions_;
  std::set<std::string> capabilities_;
};

}  // namespace

ModelStore build_store(const ScenarioDoc& doc) {
  auto store = make_empty_consciousness();
  Builder b(store);
  for (const auto& r : doc.resource_types) b.add_resource_type(r);
  for (const auto& dt : doc.device_types) b.add_device_type(dt);
  for (const auto& d : doc.devices) b.add_device(d);
  for (const auto& c : doc.connections) b.add_connection(c);
  for (const auto& t : doc.task_types) b.add_task_type(t);
  for (const auto& c : doc.capabilities) b.add_capability(c);
  for (const auto& f : doc.functions) b.add_function(f);
  return store;
}

Scenario load_scenario(std::string_view json_text) {
  auto doc = parse_scenario(json_text);
  Scenario s;
  s.store = build_store(doc);
  s.policy = doc.safety_policy;
  s.timing = doc.timing;
  s.fault_script = doc.fault_script;
  for (const auto& ev : s.fault_script) {
    if (ev.event == "ShadowFault") continue;
    if (!event_kind_from(ev.event)) throw Error(ErrorKind::ParseError, "fault_script: unknown event '" + ev.event + "'");
  }
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_scenario(buf.str());
}

// ---------------------------------------------------------------- extraction

namespace {

Resources read_amounts(const ModelStore& store, ObjectId owner, const char* member) {
  Resources out;
  for (auto aid : store.get_refs(owner, member)) {
    auto res = store.get_ref(aid, "resource");
    if (res) out[store.get_text(*res, "name")] += store.get_real(aid, "quantity");
  }
  return out;
}

std::string name_of(const ModelStore& store, std::optional<ObjectId> id) {
  return id ? store.get_text(*id, "name") : std::string{};
}

}  // namespace

ScenarioDoc extract(const ModelStore& store) {
  ScenarioDoc doc;
  for (auto id : store.instances_of("ResourceType")) doc.resource_types.push_back(store.get_text(id, "name"));
  for (auto id : store.instances_of("DeviceType")) {
    doc.device_types.push_back({store.get_text(id, "name"), store.get_real(id, "failureRate"),
                                read_amounts(store, id, "provides")});
  }
  for (auto id : store.instances_of("Device")) {
    DeviceSpec d;
    d.name = store.get_text(id, "name");
    d.type = name_of(store, store.get_ref(id, "type"));
    d.location = store.get_text(id, "location");
    if (store.get_bool(id, "hasOverride")) d.failure_rate_override = store.get_real(id, "failureRateOverride");
    d.is_pafa_module = store.get_bool(id, "isPafaModule");
    d.failed = store.get_enum(id, "status") == "Failed";
    doc.devices.push_back(std::move(d));
  }
  for (auto id : store.instances_of("Connection")) {
    ConnectionSpec c;
    c.name = store.get_text(id, "name");
    auto ends = store.get_refs(id, "endpoints");
    if (ends.size() > 0) c.a = store.get_text(ends[0], "name");
    if (ends.size() > 1) c.b = store.get_text(ends[1], "name");
    c.type = store.get_text(id, "type");
    c.failure_rate = store.get_real(id, "failureRate");
    c.transmission_time = store.get_int(id, "transmissionTime");
    c.provides = read_amounts(store, id, "provides");
    c.failed = store.get_enum(id, "status") == "Failed";
    doc.connections.push_back(std::move(c));
  }
  for (auto id : store.instances_of("TaskType")) {
    doc.task_types.push_back({store.get_text(id, "name"), task_kind_from(store.get_enum(id, "kind")),
                              store.get_real(id, "parameter")});
  }
  for (auto id : store.instances_of("Capability")) {
    doc.capabilities.push_back({name_of(store, store.get_ref(id, "taskType")),
                                name_of(store, store.get_ref(id, "deviceType")), store.get_int(id, "wcet"),
                                read_amounts(store, id, "consumes")});
  }
  for (auto id : store.instances_of("SystemFunction")) {
    FunctionSpec f;
    f.name = store.get_text(id, "name");
    for (auto tid : store.get_refs(id, "tasks")) {
      f.tasks.push_back({store.get_text(tid, "name"), name_of(store, store.get_ref(tid, "taskType")),
                         store.get_bool(tid, "isBestEffort")});
    }
    for (auto sid : store.get_refs(id, "signals")) {
      SignalSpec s;
      s.from_task = name_of(store, store.get_ref(sid, "source"));
      s.from_port = static_cast<int>(store.get_int(sid, "sourcePort"));
      s.to_task = name_of(store, store.get_ref(sid, "target"));
      s.to_port = static_cast<int>(store.get_int(sid, "targetPort"));
      s.consumes = read_amounts(store, sid, "consumes");
      f.signals.push_back(std::move(s));
    }
    if (!store.get_bool(id, "bestEffort")) f.period = store.get_int(id, "period");
    if (store.get_bool(id, "hasLatencyReq")) f.latency_req = store.get_int(id, "latencyReq");
    for (auto cid : store.get_refs(id, "failureConditions")) {
      f.failure_conditions.push_back({store.get_text(cid, "description"), severity_from(store.get_enum(cid, "severity")),
                                      store.get_real(cid, "maxProbabilityPerHour")});
    }
    f.dal = dal_from(store.get_enum(id, "dal"));
    f.priority = store.get_int(id, "priority");
    for (auto bid : store.get_refs(id, "bindings")) {
      f.peripheral_bindings.push_back({name_of(store, store.get_ref(bid, "task")),
                                       name_of(store, store.get_ref(bid, "device"))});
    }
    f.composition_verified = store.get_bool(id, "compositionVerified");
    doc.functions.push_back(std::move(f));
  }
  return doc;
}

std::string save_scenario(const ModelStore& store, const SafetyPolicy& policy, const PlatformTiming& timing,
                          const std::vector<FaultEvent>& fault_script) {
  auto doc = extract(store);
  doc.safety_policy = policy;
  doc.timing = timing;
  doc.fault_script = fault_script;
  return write_scenario(doc);
}

Digest canonical_digest(const ModelStore& store) {
  auto doc = extract(store);
  canonicalize(doc);
  return build_store(doc).digest();
}

// ---------------------------------------------------------------- validation

namespace {

bool rate_ok(double r) { return r > 0.0 && r <= 1.0 && std::isfinite(r); }

}  // namespace

std::vector<Violation> validate_semantics(const ScenarioDoc& doc) {
  std::vector<Violation> out;
  auto report = [&](std::string kind, std::string element, std::string detail) {
    out.push_back({std::move(kind), std::move(element), std::move(detail)});
  };
  const auto& timing = doc.timing;
  const auto& policy = doc.safety_policy;

  if (timing.mif <= 0) report("TimingViolation", "timing", "mif must be positive");
  if (timing.mif > 0 && (timing.maf <= 0 || timing.maf % timing.mif != 0)) {
    report("TimingViolation", "timing", "maf must be a positive multiple of mif");
  }
  if (timing.execution_window_per_mif <= 0 || timing.execution_window_per_mif > timing.mif) {
    report("TimingViolation", "timing", "execution window must lie in (0, mif]");
  }
  if (timing.verification_cycles < 1) report("TimingViolation", "timing", "verification_cycles must be >= 1");

  if (policy.exposure_hours <= 0.0) report("PolicyViolation", "safety_policy", "exposure_hours must be positive");
  if (policy.cat_min_cut_order < 2) report("PolicyViolation", "safety_policy", "cat_min_cut_order must be >= 2");
  {
    double prev = 2.0;
    for (auto sev : {Severity::NSE, Severity::MIN, Severity::MAJ, Severity::HAZ, Severity::CAT}) {
      double lim = policy.limit_for(sev);
      if (!(lim < prev) || lim <= 0.0) {
        report("PolicyViolation", "safety_policy", std::string("limit for ") + to_string(sev) + " must be strictly below the next lower severity");
      }
      prev = lim;
    }
  }

  for (const auto& dt : doc.device_types) {
    if (!rate_ok(dt.failure_rate)) report("RateViolation", dt.name, "failure rate must lie in (0, 1]");
    for (const auto& [res, qty] : dt.provides) {
      if (!(qty >= 0.0) || !std::isfinite(qty)) report("ResourceViolation", dt.name, res + " quantity must be finite and >= 0");
    }
  }
  for (const auto& d : doc.devices) {
    if (d.failure_rate_override && !rate_ok(*d.failure_rate_override)) {
      report("RateViolation", d.name, "failure rate override must lie in (0, 1]");
    }
  }
  for (const auto& c : doc.connections) {
    if (c.a == c.b) report("EndpointViolation", c.name, "endpoints must be distinct");
    if (!rate_ok(c.failure_rate)) report("RateViolation", c.name, "failure rate must lie in (0, 1]");
    if (c.transmission_time < 0) report("TimingViolation", c.name, "transmission time must be >= 0");
  }
  for (const auto& c : doc.capabilities) {
    if (c.wcet <= 0) report("WcetViolation", c.task_type + "@" + c.device_type, "wcet must be > 0");
  }

  std::map<std::int64_t, std::string> priorities;
  for (const auto& f : doc.functions) {
    auto [it, inserted] = priorities.emplace(f.priority, f.name);
    if (!inserted) report("PriorityViolation", f.name, "priority " + std::to_string(f.priority) + " also used by " + it->second);

    if (f.period) {
      if (*f.period <= 0 || timing.mif <= 0 || *f.period % timing.mif != 0) {
        report("PeriodViolation", f.name, "period " + std::to_string(*f.period) + " is not a multiple of mif " + std::to_string(timing.mif));
      } else if (timing.maf % *f.period != 0) {
        report("PeriodViolation", f.name, "period " + std::to_string(*f.period) + " does not divide maf " + std::to_string(timing.maf));
      }
    }
    if (f.latency_req && *f.latency_req <= 0) report("LatencyViolation", f.name, "latency requirement must be positive");
    for (const auto& fc : f.failure_conditions) {
      if (!rate_ok(fc.max_probability_per_hour)) {
        report("ProbabilityViolation", f.name, "max probability of '" + fc.description + "' must lie in (0, 1]");
      }
    }

    // Ports: each input port fed exactly once, port indices within the kind's arity.
    std::map<std::string, TaskKind> kinds;
    for (const auto& t : f.tasks) {
      if (const auto* tt = doc.task_type(t.task_type)) kinds[t.name] = tt->kind;
    }
    std::map<std::pair<std::string, int>, int> fed;
    std::map<std::string, std::vector<std::string>> succ;
    for (const auto& s : f.signals) {
      auto src = kinds.find(s.from_task);
      auto dst = kinds.find(s.to_task);
      if (src == kinds.end() || dst == kinds.end()) {
        report("DanglingSignal", f.name, s.from_task + " -> " + s.to_task);
        continue;
      }
      if (s.from_port < 0 || s.from_port >= output_ports(src->second)) {
        report("PortViolation", f.name + "/" + s.from_task, "no output port " + std::to_string(s.from_port));
      }
      if (s.to_port < 0 || s.to_port >= input_ports(dst->second)) {
        report("PortViolation", f.name + "/" + s.to_task, "no input port " + std::to_string(s.to_port));
      }
      if (++fed[{s.to_task, s.to_port}] > 1) {
        report("PortViolation", f.name + "/" + s.to_task, "input port " + std::to_string(s.to_port) + " fed more than once");
      }
      succ[s.from_task].push_back(s.to_task);
    }
    for (const auto& t : f.tasks) {
      auto k = kinds.find(t.name);
      if (k == kinds.end()) continue;
      for (int p = 0; p < input_ports(k->second); ++p) {
        if (!fed.count({t.name, p})) report("UnconnectedPort", f.name + "/" + t.name, "input port " + std::to_string(p) + " unconnected");
      }
    }

    // Cycle detection by colouring DFS.
    std::map<std::string, int> colour;
    bool cyclic = false;
    std::function<void(const std::string&)> visit = [&](const std::string& n) {
      colour[n] = 1;
      for (const auto& m : succ[n]) {
        if (colour[m] == 1) cyclic = true;
        if (colour[m] == 0) visit(m);
      }
      colour[n] = 2;
    };
    for (const auto& t : f.tasks) {
      if (colour[t.name] == 0) visit(t.name);
    }
    if (cyclic) report("CycleViolation", f.name, "signal graph contains a cycle");

    for (const auto& b : f.peripheral_bindings) {
      const auto* task = f.task(b.task);
      const auto* dev = doc.device(b.device);
      if (task == nullptr || dev == nullptr) {
        report("DanglingBinding", f.name, b.task + " -> " + b.device);
        continue;
      }
      // Bound tasks run on the device itself when it is a PAFA module, else on
      // a PAFA module with a direct link to it.
      std::vector<const DeviceSpec*> hosts;
      if (dev->is_pafa_module) {
        hosts.push_back(dev);
      } else {
        for (const auto& c : doc.connections) {
          const std::string* other = c.a == dev->name ? &c.b : c.b == dev->name ? &c.a : nullptr;
          if (other == nullptr) continue;
          const auto* od = doc.device(*other);
          if (od != nullptr && od->is_pafa_module) hosts.push_back(od);
        }
      }
      bool capable = std::any_of(hosts.begin(), hosts.end(), [&](const DeviceSpec* h) {
        return doc.capability(task->task_type, h->type) != nullptr;
      });
      if (!capable) {
        report("MissingCapability", f.name + "/" + b.task,
               "no host for task type " + task->task_type + " bound to " + b.device);
      }
    }
  }
  return out;
}

std::vector<Violation> validate_semantics(const ModelStore& store, const PlatformTiming& timing,
                                          const SafetyPolicy& policy) {
  auto doc = extract(store);
  doc.timing = timing;
  doc.safety_policy = policy;
  return validate_semantics(doc);
}

// ---------------------------------------------------------------- events

TopologyEvent to_topology_event(const FaultEvent& fault) {
  auto kind = event_kind_from(fault.event);
  if (!kind) throw Error(ErrorKind::InvalidArgument, "not a topology event: " + fault.event);
  return TopologyEvent{*kind, fault.target, fault.device, fault.connections, fault.function};
}

namespace {

bool set_status(ModelStore& store, const char* cls, const std::string& name, const char* status) {
  auto id = find_named(store, cls, name);
  if (!id) throw Error(ErrorKind::UnknownElement, std::string(cls) + " '" + name + "'");
  if (store.get_enum(*id, "status") == status) return false;
  store.write(*id, "status", EnumLiteral{status});
  return true;
}

}  // namespace

bool apply_event(ModelStore& store, const TopologyEvent& ev) {
  switch (ev.kind) {
    case EventKind::DeviceFailed: return set_status(store, "Device", ev.target, "Failed");
    case EventKind::DeviceRestored: return set_status(store, "Device", ev.target, "Healthy");
    case EventKind::LinkFailed: return set_status(store, "Connection", ev.target, "Failed");
    case EventKind::LinkRestored: return set_status(store, "Connection", ev.target, "Healthy");
    case EventKind::DeviceAdded: {
      Builder b(store);
      bool changed = false;
      if (!b.has_device(ev.target)) {
        if (!ev.device || ev.device->name != ev.target) {
          throw Error(ErrorKind::UnknownElement, "DeviceAdded(" + ev.target + ") without a matching descriptor");
        }
        b.add_device(*ev.device);
        changed = true;
      }
      for (const auto& c : ev.connections) {
        if (b.has_element(c.name) || !b.has_device(c.a) || !b.has_device(c.b)) continue;
        b.add_connection(c);
        changed = true;
      }
      return changed;
    }
    case EventKind::DeviceRemoved: {
      auto id = find_named(store, "Device", ev.target);
      if (!id) throw Error(ErrorKind::UnknownElement, "Device '" + ev.target + "'");
      for (auto cid : store.instances_of("Connection")) {
        auto ends = store.get_refs(cid, "endpoints");
        if (std::find(ends.begin(), ends.end(), *id) != ends.end()) store.remove(cid);
      }
      store.remove(*id);
      return true;
    }
    case EventKind::FunctionAdded: {
      if (!ev.function || ev.function->name != ev.target) {
        throw Error(ErrorKind::UnknownElement, "FunctionAdded(" + ev.target + ") without a matching descriptor");
      }
      Builder b(store);
      if (b.has_function(ev.target)) return false;
      b.add_function(*ev.function);
      return true;
    }
    case EventKind::FunctionRemoved: {
      auto id = find_named(store, "SystemFunction", ev.target);
      if (!id) throw Error(ErrorKind::UnknownElement, "SystemFunction '" + ev.target + "'");
      store.remove(*id);
      return true;
    }
  }
  return false;
}

bool Consciousness::apply(const TopologyEvent& event) {
  if (!apply_event(store_, event)) return false;
  journal_.push_back({store_.version(), event.kind, event.target});
  return true;
}

}  // namespace pafa::oaam
