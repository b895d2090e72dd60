#include "pafa/simkernel.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "pafa/error.hpp"
#include "pafa/planner.hpp"
#include "pafa/qualifier.hpp"

namespace pafa::sim {

// ---------------------------------------------------------------- log

std::string LogLine::text() const {
  return "c=" + std::to_string(cycle) + " m=" + module + " k=" + kind + " d=" + detail;
}

std::optional<LogLine> parse_log_line(const std::string& line) {
  LogLine l;
  if (line.rfind("c=", 0) != 0) return std::nullopt;
  auto m = line.find(" m=");
  auto k = line.find(" k=", m == std::string::npos ? 0 : m);
  auto d = line.find(" d=", k == std::string::npos ? 0 : k);
  if (m == std::string::npos || k == std::string::npos || d == std::string::npos) return std::nullopt;
  try {
    l.cycle = std::stoll(line.substr(2, m - 2));
  } catch (const std::exception&) {
    return std::nullopt;
  }
  l.module = line.substr(m + 3, k - m - 3);
  l.kind = line.substr(k + 3, d - k - 3);
  l.detail = line.substr(d + 3);
  return l;
}

void EventLog::add(std::int64_t cycle, const std::string& module, const std::string& kind, const std::string& detail) {
  lines_.push_back({cycle, module, kind, detail});
}

std::string EventLog::text() const {
  std::string out;
  for (const auto& l : lines_) out += l.text() + "\n";
  return out;
}

Digest EventLog::digest() const {
  Sha256Stream h;
  for (const auto& l : lines_) {
    h.update(l.text());
    h.update("\n");
  }
  return h.finish();
}

// ---------------------------------------------------------------- golden values

std::map<std::string, double> golden_values(const Configuration& config) {
  std::map<std::string, const TaskAssignment*> tasks;
  for (const auto& a : config.assignments) tasks[a.key()] = &a;
  std::map<std::pair<std::string, int>, std::string> feeds;  // (consumer key, port) -> producer key
  for (const auto& r : config.routes) {
    feeds[{task_key(r.function, r.replica, r.to_task), r.to_port}] = task_key(r.function, r.replica, r.from_task);
  }
  std::map<std::string, double> out;
  std::set<std::string> open;
  std::function<std::optional<double>(const std::string&)> eval = [&](const std::string& key) -> std::optional<double> {
    if (auto it = out.find(key); it != out.end()) return it->second;
    auto t = tasks.find(key);
    if (t == tasks.end() || open.count(key)) return std::nullopt;
    open.insert(key);
    std::vector<double> in;
    for (int p = 0; p < oaam::input_ports(t->second->kind); ++p) {
      auto f = feeds.find({key, p});
      std::optional<double> v;
      if (f != feeds.end()) v = eval(f->second);
      if (!v) {
        open.erase(key);
        return std::nullopt;
      }
      in.push_back(*v);
    }
    open.erase(key);
    double v = exec::compute({t->second->kind, t->second->parameter}, in);
    out[key] = v;
    return v;
  };
  for (const auto& [key, _] : tasks) eval(key);
  return out;
}

// ---------------------------------------------------------------- platform state

struct Platform::Hello {
  std::string from;
  std::string to;
  std::vector<oaam::DeviceSpec> devices;
  std::vector<oaam::ConnectionSpec> connections;
};

struct Platform::DataMessage {
  bool shadow = false;
  exec::Message msg;
};

struct Platform::Module {
  struct Shadow {
    std::int64_t round = 0;
    std::string proposer;
    Digest digest{};
    std::optional<Configuration> config;
    bool rejected = false;
    std::int64_t clean = 0;
    bool failed = false;
    std::uint64_t basis = 0;  // view version the candidate was checked against
    std::map<std::string, double> golden;
  };

  explicit Module(std::string n) : name(n), coord(std::move(n)) {}

  std::string name;
  bool alive = true;
  oaam::Consciousness view;
  std::set<std::string> functions;  // functions present in the view
  std::int64_t last_change = 0;
  bool hello_due = true;
  std::vector<std::string> neighbours;  // modules one hop away through non-module devices
  std::optional<std::set<std::string>> beacon;
  exec::ModuleUnits units;
  consensus::Coordinator coord;
  std::optional<std::uint64_t> last_planned;
  bool force_replan = false;
  std::map<std::string, std::string> excluded;
  std::optional<Configuration> live;
  std::optional<Configuration> committed;
  std::uint64_t committed_basis = 0;
  std::optional<Shadow> shadow;
};

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out.empty() ? "-" : out;
}

bool precedes(const consensus::Proposal& a, const consensus::Proposal& b) {
  return std::tie(a.round, a.proposer) < std::tie(b.round, b.proposer);
}

struct ViewEntry {
  std::string name;
  bool failed = false;
  bool pafa = false;
};

std::vector<ViewEntry> view_devices(const meta::ModelStore& s) {
  std::vector<ViewEntry> out;
  for (auto id : s.instances_of("Device")) {
    out.push_back({s.get_text(id, "name"), s.get_enum(id, "status") == "Failed", s.get_bool(id, "isPafaModule")});
  }
  return out;
}

std::vector<ViewEntry> view_connections(const meta::ModelStore& s) {
  std::vector<ViewEntry> out;
  for (auto id : s.instances_of("Connection")) {
    out.push_back({s.get_text(id, "name"), s.get_enum(id, "status") == "Failed", false});
  }
  return out;
}

}  // namespace

Platform::Platform(oaam::ScenarioDoc scenario, std::uint64_t seed) : truth_(std::move(scenario)), seed_(seed) {
  auto violations = oaam::validate_semantics(truth_);
  if (!violations.empty()) {
    std::string msg;
    for (const auto& v : violations) msg += (msg.empty() ? "" : "; ") + v.kind + " " + v.element;
    throw Error(ErrorKind::InvalidArgument, "scenario does not validate: " + msg);
  }
  script_ = truth_.fault_script;
  for (const auto& d : truth_.devices) {
    if (d.is_pafa_module) {
      auto m = fresh_module(d.name);
      m->alive = !d.failed;
      modules_[d.name] = std::move(m);
    }
  }
  recompute_components();
}

Platform::~Platform() = default;

oaam::ScenarioDoc Platform::library() const {
  oaam::ScenarioDoc lib;
  lib.resource_types = truth_.resource_types;
  lib.device_types = truth_.device_types;
  lib.task_types = truth_.task_types;
  lib.capabilities = truth_.capabilities;
  lib.safety_policy = truth_.safety_policy;
  lib.timing = truth_.timing;
  return lib;
}

std::unique_ptr<Platform::Module> Platform::fresh_module(const std::string& name) {
  auto m = std::make_unique<Module>(name);
  m->view = oaam::Consciousness(oaam::build_store(library()));
  m->last_change = cycle_;
  return m;
}

void Platform::schedule(oaam::FaultEvent event) { script_.push_back(std::move(event)); }

void Platform::corrupt_shadow(const std::string& module) { shadow_faults_.insert(module); }

std::vector<std::string> Platform::modules() const {
  std::vector<std::string> out;
  for (const auto& [n, _] : modules_) out.push_back(n);
  return out;
}

bool Platform::alive(const std::string& module) const {
  auto it = modules_.find(module);
  return it != modules_.end() && it->second->alive;
}

std::optional<std::string> Platform::live_digest(const std::string& module) const {
  auto it = modules_.find(module);
  if (it == modules_.end() || !it->second->live) return std::nullopt;
  return to_hex(it->second->live->digest());
}

std::optional<Configuration> Platform::live_config(const std::string& module) const {
  auto it = modules_.find(module);
  if (it == modules_.end()) return std::nullopt;
  return it->second->live;
}

const oaam::Consciousness& Platform::view(const std::string& module) const {
  auto it = modules_.find(module);
  if (it == modules_.end()) throw Error(ErrorKind::UnknownElement, "module " + module);
  return it->second->view;
}

Digest Platform::view_digest(const std::string& module) const { return oaam::canonical_digest(view(module).store()); }

// ---------------------------------------------------------------- topology truth

void Platform::recompute_components() {
  component_.clear();
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& c : truth_.connections) {
    if (c.failed) continue;
    const auto* a = truth_.device(c.a);
    const auto* b = truth_.device(c.b);
    if (a == nullptr || b == nullptr || a->failed || b->failed) continue;
    adj[c.a].push_back(c.b);
    adj[c.b].push_back(c.a);
  }
  int next = 0;
  for (const auto& d : truth_.devices) {
    if (d.failed || component_.count(d.name)) continue;
    std::vector<std::string> stack{d.name};
    component_[d.name] = next;
    while (!stack.empty()) {
      auto cur = stack.back();
      stack.pop_back();
      for (const auto& n : adj[cur]) {
        if (component_.emplace(n, next).second) stack.push_back(n);
      }
    }
    ++next;
  }
}

bool Platform::reachable(const std::string& a, const std::string& b) const {
  auto ia = component_.find(a);
  auto ib = component_.find(b);
  return ia != component_.end() && ib != component_.end() && ia->second == ib->second;
}

bool Platform::route_healthy(const std::string& src, const std::vector<std::string>& route,
                             const std::string& dst) const {
  std::string at = src;
  for (const auto& name : route) {
    const auto* c = truth_.connection(name);
    if (c == nullptr || c->failed) return false;
    if (c->a != at && c->b != at) return false;
    at = c->a == at ? c->b : c->a;
    const auto* d = truth_.device(at);
    if (d == nullptr || d->failed) return false;
  }
  return at == dst;
}

std::set<std::string> Platform::beacon(const std::string& module) const {
  std::set<std::string> out;
  auto it = component_.find(module);
  if (it == component_.end()) return out;
  for (const auto& [name, comp] : component_) {
    if (comp == it->second) out.insert(name);
  }
  for (const auto& c : truth_.connections) {
    if (!c.failed && out.count(c.a) && out.count(c.b)) out.insert(c.name);
  }
  return out;
}

// ---------------------------------------------------------------- stepping

void Platform::run_until(std::int64_t cycle_exclusive) {
  while (cycle_ < cycle_exclusive) step();
}

void Platform::step() {
  deliver();
  apply_faults();
  for (auto& [_, m] : modules_) {
    if (m->alive) planner_phase(*m);
  }
  for (auto& [_, m] : modules_) {
    if (m->alive) qualifier_phase(*m);
  }
  for (auto& [_, m] : modules_) {
    if (m->alive) consensus_phase(*m);
  }
  for (auto& [_, m] : modules_) {
    if (m->alive) execute_phase(*m);
  }
  end_of_cycle();
}

void Platform::deliver() {
  auto dst_alive = [&](const std::string& name) { return alive(name); };
  hello_in_.clear();
  for (auto& h : hello_out_) {
    if (dst_alive(h.to)) hello_in_.push_back(std::move(h));
  }
  hello_out_.clear();
  cons_in_.clear();
  for (auto& e : cons_out_) {
    if (dst_alive(e.to)) cons_in_.push_back(std::move(e));
  }
  cons_out_.clear();
  data_in_.clear();
  for (auto& d : data_out_) {
    if (dst_alive(d.msg.dst_device)) data_in_.push_back(std::move(d));
  }
  data_out_.clear();
}

void Platform::apply_faults() {
  bool any = false;
  for (const auto& f : script_) {
    if (f.cycle != cycle_) continue;
    any = true;
    log_.add(cycle_, "-", "EVT", f.event + " " + f.target);
    if (f.event == "ShadowFault") {
      shadow_faults_.insert(f.target);
      continue;
    }
    auto ev = oaam::to_topology_event(f);
    auto module_it = modules_.find(f.target);
    switch (ev.kind) {
      case oaam::EventKind::DeviceFailed:
      case oaam::EventKind::DeviceRestored: {
        bool failed = ev.kind == oaam::EventKind::DeviceFailed;
        for (auto& d : truth_.devices) {
          if (d.name == f.target) d.failed = failed;
        }
        if (module_it != modules_.end()) {
          if (failed) {
            module_it->second->alive = false;
          } else if (!module_it->second->alive) {
            module_it->second = fresh_module(f.target);
          }
        }
        break;
      }
      case oaam::EventKind::LinkFailed:
      case oaam::EventKind::LinkRestored:
        for (auto& c : truth_.connections) {
          if (c.name == f.target) c.failed = ev.kind == oaam::EventKind::LinkFailed;
        }
        break;
      case oaam::EventKind::DeviceAdded:
        if (truth_.device(f.target) == nullptr && ev.device) {
          truth_.devices.push_back(*ev.device);
          if (ev.device->is_pafa_module) modules_[f.target] = fresh_module(f.target);
        }
        for (const auto& c : ev.connections) {
          if (truth_.connection(c.name) == nullptr && truth_.device(c.a) && truth_.device(c.b)) {
            truth_.connections.push_back(c);
          }
        }
        break;
      case oaam::EventKind::DeviceRemoved:
        std::erase_if(truth_.devices, [&](const auto& d) { return d.name == f.target; });
        std::erase_if(truth_.connections, [&](const auto& c) { return c.a == f.target || c.b == f.target; });
        if (module_it != modules_.end()) modules_.erase(module_it);
        break;
      case oaam::EventKind::FunctionAdded:
        if (ev.function && truth_.function(f.target) == nullptr) truth_.functions.push_back(*ev.function);
        break;
      case oaam::EventKind::FunctionRemoved:
        std::erase_if(truth_.functions, [&](const auto& fn) { return fn.name == f.target; });
        for (auto& [_, m] : modules_) {
          if (m->alive && m->functions.erase(f.target)) m->view.apply(ev);
        }
        break;
    }
  }
  if (any) recompute_components();
}

// ---------------------------------------------------------------- discovery and monitoring

bool Platform::add_known(Module& m, const oaam::TopologyEvent& ev) {
  if (!m.view.apply(ev)) return false;
  m.last_change = cycle_;
  m.hello_due = true;
  return true;
}

void Platform::scan_neighbourhood(Module& m) {
  std::set<std::string> known;
  for (const auto& d : view_devices(m.view.store())) known.insert(d.name);
  for (const auto& c : view_connections(m.view.store())) known.insert(c.name);

  std::vector<std::string> devices{m.name};
  std::vector<const oaam::ConnectionSpec*> links;
  std::set<std::string> seen{m.name};
  m.neighbours.clear();
  for (std::size_t i = 0; i < devices.size(); ++i) {
    const std::string cur = devices[i];
    if (i > 0) {
      const auto* d = truth_.device(cur);
      if (d->is_pafa_module) {
        m.neighbours.push_back(cur);
        continue;
      }
    }
    for (const auto& c : truth_.connections) {
      if (c.failed || (c.a != cur && c.b != cur)) continue;
      const std::string& other = c.a == cur ? c.b : c.a;
      const auto* od = truth_.device(other);
      if (od == nullptr || od->failed) continue;
      links.push_back(&c);
      if (seen.insert(other).second) devices.push_back(other);
    }
  }
  std::sort(m.neighbours.begin(), m.neighbours.end());
  for (const auto& name : devices) {
    if (known.count(name)) continue;
    auto spec = *truth_.device(name);
    spec.failed = false;
    add_known(m, {oaam::EventKind::DeviceAdded, name, spec, {}, std::nullopt});
  }
  for (const auto* c : links) {
    if (known.count(c->name)) continue;
    auto spec = *c;
    spec.failed = false;
    add_known(m, {oaam::EventKind::DeviceAdded, c->a, *truth_.device(c->a), {spec}, std::nullopt});
  }
}

void Platform::merge_hello(Module& m, const Hello& hello) {
  std::set<std::string> known;
  for (const auto& d : view_devices(m.view.store())) known.insert(d.name);
  for (const auto& c : view_connections(m.view.store())) known.insert(c.name);
  std::set<std::string> offered;
  for (const auto& d : hello.devices) {
    offered.insert(d.name);
    if (!known.count(d.name)) add_known(m, {oaam::EventKind::DeviceAdded, d.name, d, {}, std::nullopt});
  }
  for (const auto& c : hello.connections) {
    offered.insert(c.name);
    if (known.count(c.name)) continue;
    auto a = std::find_if(hello.devices.begin(), hello.devices.end(), [&](const auto& d) { return d.name == c.a; });
    if (a == hello.devices.end()) continue;
    add_known(m, {oaam::EventKind::DeviceAdded, c.a, *a, {c}, std::nullopt});
  }
  // Gossip back when the sender is missing something.
  for (const auto& k : known) {
    if (!offered.count(k)) {
      m.hello_due = true;
      break;
    }
  }
}

void Platform::monitor(Module& m) {
  if (!m.beacon) return;
  const auto& b = *m.beacon;
  std::vector<oaam::TopologyEvent> evs;
  for (const auto& d : view_devices(m.view.store())) {
    bool seen = b.count(d.name) != 0;
    if (seen && d.failed) evs.push_back({oaam::EventKind::DeviceRestored, d.name, std::nullopt, {}, std::nullopt});
    if (!seen && !d.failed) evs.push_back({oaam::EventKind::DeviceFailed, d.name, std::nullopt, {}, std::nullopt});
  }
  for (const auto& c : view_connections(m.view.store())) {
    bool seen = b.count(c.name) != 0;
    if (seen && c.failed) evs.push_back({oaam::EventKind::LinkRestored, c.name, std::nullopt, {}, std::nullopt});
    if (!seen && !c.failed) evs.push_back({oaam::EventKind::LinkFailed, c.name, std::nullopt, {}, std::nullopt});
  }
  for (const auto& ev : evs) {
    if (!m.view.apply(ev)) continue;
    log_.add(cycle_, m.name, "EVT", std::string(oaam::to_string(ev.kind)) + " " + ev.target);
    if (ev.kind == oaam::EventKind::DeviceRestored || ev.kind == oaam::EventKind::LinkRestored) m.hello_due = true;
  }
}

void Platform::send_hello(Module& m) {
  m.hello_due = false;
  if (m.neighbours.empty()) return;
  auto doc = oaam::extract(m.view.store());
  for (const auto& to : m.neighbours) hello_out_.push_back({m.name, to, doc.devices, doc.connections});
  log_.add(cycle_, m.name, "HELLO",
           "devices=" + std::to_string(doc.devices.size()) + " links=" + std::to_string(doc.connections.size()) +
               " to=" + join(m.neighbours));
}

// ---------------------------------------------------------------- planner actor

void Platform::planner_phase(Module& m) {
  monitor(m);
  for (const auto& h : hello_in_) {
    if (h.to == m.name) merge_hello(m, h);
  }
  scan_neighbourhood(m);

  // Functions become known once every bound peripheral is known.
  std::set<std::string> known;
  for (const auto& d : view_devices(m.view.store())) known.insert(d.name);
  for (const auto& f : truth_.functions) {
    if (m.functions.count(f.name)) continue;
    bool bindable = std::all_of(f.peripheral_bindings.begin(), f.peripheral_bindings.end(),
                                [&](const auto& b) { return known.count(b.device) != 0; });
    if (!bindable) continue;
    if (m.view.apply({oaam::EventKind::FunctionAdded, f.name, std::nullopt, {}, f})) m.functions.insert(f.name);
  }

  if (m.hello_due) send_hello(m);

  std::string elected;
  std::size_t module_count = 0;
  for (const auto& d : view_devices(m.view.store())) {
    if (!d.pafa) continue;
    ++module_count;
    if (!d.failed && (elected.empty() || d.name < elected)) elected = d.name;
  }
  if (elected != m.name) return;
  if (cycle_ - m.last_change <= static_cast<std::int64_t>(module_count)) return;
  if (m.coord.busy() || m.committed) return;

  auto need = planner::analyze(m.view, m.last_planned);
  if (need.replan) {
    if (need.reason != planner::ReplanReason::Initial || m.last_planned) m.excluded.clear();
    plan_and_propose(m, std::string("Replan(") + planner::to_string(need.reason) + ")");
  } else if (m.force_replan) {
    plan_and_propose(m, "Replan(AbortRecovery)");
  }
}

void Platform::plan_and_propose(Module& m, const std::string& reason) {
  m.force_replan = false;
  m.last_planned = m.view.version();
  log_.add(cycle_, m.name, "ANALYZE", reason + " version=" + std::to_string(m.view.version()));
  const auto& policy = truth_.safety_policy;
  const auto& timing = truth_.timing;
  const std::int64_t version = (m.live ? m.live->version : 0) + 1;

  for (std::size_t attempt = 0; attempt <= truth_.functions.size() + 1; ++attempt) {
    planner::PlanOptions options{version, m.excluded};
    auto outcome = planner::plan(m.view.store(), policy, timing, options);
    if (!outcome.config) {
      std::vector<std::string> why;
      for (const auto& u : outcome.unsatisfied) why.push_back(u.function + ":" + u.reason);
      log_.add(cycle_, m.name, "PLAN", "outcome=Infeasible unsatisfied=" + join(why));
      return;
    }
    const auto& cfg = *outcome.config;
    std::vector<std::string> dropped;
    for (const auto& d : cfg.dropped) dropped.push_back(d.name);
    const std::string digest = to_hex(cfg.digest());
    log_.add(cycle_, m.name, "PLAN",
             std::string("outcome=") + planner::to_string(outcome.kind) + " version=" + std::to_string(cfg.version) +
                 " digest=" + digest + " hosted=" + join(cfg.hosted_functions()) + " dropped=" + join(dropped));
    if (m.live && cfg.same_allocation(*m.live)) {
      log_.add(cycle_, m.name, "PLAN", "unchanged digest=" + to_hex(m.live->digest()));
      return;
    }

    // The qualifier works on its own copy of the snapshot.
    const meta::ModelStore snapshot = m.view.store();
    auto q = qualifier::qualify(cfg, snapshot, policy, timing);
    const bool accept = q.verdict == qualifier::Verdict::Accept;
    std::string detail = std::string("verdict=") + (accept ? "Accept" : "Reject") + " digest=" + digest +
                         " findings=" + std::to_string(q.findings.size());
    if (!q.findings.empty()) detail += " first=" + q.findings.front().check + ":" + q.findings.front().element;
    log_.add(cycle_, m.name, "QUALIFY", detail);

    if (accept) {
      payloads_[cfg.digest()] = cfg;
      auto step = m.coord.propose(cfg.digest(), cycle_, cycle_ + consensus::activation_lead(timing.verification_cycles),
                                  cfg.modules);
      const auto& p = *m.coord.current();
      start_shadow(m, cfg, p.round, p.proposer);
      m.shadow->basis = m.view.version();
      log_.add(cycle_, m.name, "PROPOSE", consensus::render(p));
      for (auto& env : step.out) send_consensus(env);
      return;
    }

    // Withhold the functions the qualifier blamed, or the least important one.
    bool changed = false;
    auto hosted = cfg.hosted_functions();
    for (const auto& f : q.findings) {
      if (!f.function.empty() && !m.excluded.count(f.function)) {
        m.excluded[f.function] = "QualificationReject";
        changed = true;
      }
    }
    if (!changed) {
      auto doc = oaam::extract(snapshot);
      auto order = planner::function_order(doc);
      for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (std::find(hosted.begin(), hosted.end(), (*it)->name) != hosted.end()) {
          m.excluded[(*it)->name] = "QualificationReject";
          changed = true;
          break;
        }
      }
    }
    if (!changed) return;
  }
}

void Platform::start_shadow(Module& m, const Configuration& config, std::int64_t round, const std::string& proposer) {
  Module::Shadow s;
  s.round = round;
  s.proposer = proposer;
  s.digest = config.digest();
  s.config = config;
  s.basis = m.view.version();
  s.golden = golden_values(config);
  m.shadow = std::move(s);
  m.units.verification().load_configuration(exec::program_for(config, m.name), cycle_);
  log_.add(cycle_, m.name, "SHADOW",
           "start digest=" + to_hex(config.digest()) + " cycles=" + std::to_string(truth_.timing.verification_cycles));
}

void Platform::clear_shadow(Module& m) {
  m.shadow.reset();
  m.units.verification().unload();
}

// ---------------------------------------------------------------- qualifier actor

void Platform::qualifier_phase(Module& m) {
  std::optional<consensus::Proposal> best;
  const auto& cur = m.coord.current();
  for (const auto& env : cons_in_) {
    if (env.to != m.name) continue;
    const auto* p = std::get_if<consensus::Proposal>(&env.message);
    if (p == nullptr) continue;
    if (cur && !precedes(*p, *cur)) continue;
    if (!best || precedes(*p, *best)) best = *p;
  }
  if (!best || m.committed) return;
  auto it = payloads_.find(best->digest);
  if (it == payloads_.end()) return;
  const Configuration& cfg = it->second;

  const meta::ModelStore snapshot = m.view.store();
  auto q = qualifier::qualify(cfg, snapshot, truth_.safety_policy, truth_.timing);
  const bool accept = q.verdict == qualifier::Verdict::Accept;
  std::string detail = std::string("verdict=") + (accept ? "Accept" : "Reject") + " digest=" + to_hex(best->digest) +
                       " findings=" + std::to_string(q.findings.size());
  if (!q.findings.empty()) detail += " first=" + q.findings.front().check + ":" + q.findings.front().element;
  log_.add(cycle_, m.name, "QUALIFY", detail);
  if (accept) {
    start_shadow(m, cfg, best->round, best->proposer);
  } else {
    if (m.shadow) clear_shadow(m);
    Module::Shadow s;
    s.round = best->round;
    s.proposer = best->proposer;
    s.digest = best->digest;
    s.rejected = true;
    s.basis = m.view.version();
    m.shadow = std::move(s);
  }
}

// ---------------------------------------------------------------- consensus

void Platform::send_consensus(const consensus::Envelope& env) {
  if (!reachable(env.from, env.to)) return;
  cons_out_.push_back(env);
}

void Platform::consensus_phase(Module& m) {
  consensus::LocalStatus local;
  const auto& cur = m.coord.current();
  if (cur && m.shadow && m.shadow->round == cur->round && m.shadow->proposer == cur->proposer) {
    const auto& s = *m.shadow;
    local.rejected = s.rejected;
    if (!s.rejected) local.verified = s.digest;
    local.shadow_failed = s.failed;
    local.shadow_done = !s.rejected && !s.failed && s.clean >= truth_.timing.verification_cycles;
  }
  std::vector<consensus::Envelope> inbox;
  for (const auto& env : cons_in_) {
    if (env.to == m.name) inbox.push_back(env);
  }
  auto step = m.coord.step(cycle_, inbox, local);
  for (const auto& env : step.out) {
    if (std::holds_alternative<consensus::Vote>(env.message)) {
      log_.add(cycle_, m.name, "VOTE", consensus::render(env.message));
    }
    send_consensus(env);
  }
  if (!step.outcome) return;
  const auto& o = *step.outcome;
  const bool mine = m.shadow && m.shadow->round == o.round && m.shadow->proposer == o.proposer;
  if (o.committed) {
    log_.add(cycle_, m.name, "COMMIT",
             consensus::render(consensus::Commit{o.round, o.proposer, o.digest, o.activation}));
    if (mine && m.shadow->config && o.activation > cycle_) {
      m.units.set_switch(o.activation, cycle_);
      m.committed = m.shadow->config;
      m.committed_basis = m.shadow->basis;
    }
    return;
  }
  log_.add(cycle_, m.name, "ABORT",
           consensus::render(consensus::Abort{o.round, o.proposer, o.reason, o.missing}));
  if (mine) clear_shadow(m);
  shadow_faults_.erase(m.name);
  if (o.proposer == m.name && o.reason != consensus::AbortReason::Superseded) m.force_replan = true;
}

// ---------------------------------------------------------------- execution

void Platform::execute_phase(Module& m) {
  if (m.units.begin_cycle(cycle_) && m.committed) {
    m.live = std::move(m.committed);
    m.committed.reset();
    m.last_planned = m.committed_basis;
    m.shadow.reset();
    log_.add(cycle_, m.name, "SWITCH",
             "digest=" + to_hex(m.live->digest()) + " version=" + std::to_string(m.live->version));
  }

  std::vector<exec::Message> live_in, shadow_in;
  for (const auto& d : data_in_) {
    if (d.msg.dst_device != m.name) continue;
    (d.shadow ? shadow_in : live_in).push_back(d.msg);
  }

  auto live = m.units.live().execute_cycle(cycle_, live_in);
  for (auto& msg : live.emitted) {
    msg.src_device = m.name;
    if (route_healthy(m.name, msg.route, msg.dst_device)) data_out_.push_back({false, msg});
  }
  for (const auto& s : live.sinks) log_.add(cycle_, m.name, "SINK", s.task + "=" + format_real(s.value));

  auto shadow = m.units.verification().execute_cycle(cycle_, shadow_in);
  if (!shadow.config.empty() && m.shadow && !m.shadow->rejected && shadow.config == to_hex(m.shadow->digest)) {
    auto& s = *m.shadow;
    if (shadow_faults_.count(m.name)) {
      for (auto& r : shadow.sinks) r.value += 1.0;
      for (auto& msg : shadow.suppressed) msg.value += 1.0;
    }
    for (const auto& r : shadow.sinks) {
      auto g = s.golden.find(r.task);
      if (!s.failed && g != s.golden.end() && g->second != r.value) {
        s.failed = true;
        log_.add(cycle_, m.name, "SHADOW",
                 "deviation task=" + r.task + " value=" + format_real(r.value) + " expected=" + format_real(g->second));
      }
    }
    ++s.clean;
    if (!s.failed && s.clean == truth_.timing.verification_cycles) {
      log_.add(cycle_, m.name, "SHADOW", "done digest=" + to_hex(s.digest));
    }
  }
  for (auto& msg : shadow.suppressed) {
    log_.add(cycle_, m.name, "SUPPRESS", msg.signal + "=" + format_real(msg.value));
    if (msg.dst_device.empty()) continue;
    msg.src_device = m.name;
    if (route_healthy(m.name, msg.route, msg.dst_device)) data_out_.push_back({true, msg});
  }

  log_.add(cycle_, m.name, "EXEC",
           "live=" + (live.config.empty() ? std::string("-") : live.config) +
               " shadow=" + (shadow.config.empty() ? std::string("-") : shadow.config) +
               " ran=" + std::to_string(live.executed.size()) + "/" + std::to_string(shadow.executed.size()) +
               " emitted=" + std::to_string(live.emitted.size()) + "/" + std::to_string(shadow.emitted.size()));
}

void Platform::end_of_cycle() {
  for (auto& [name, m] : modules_) {
    if (m->alive) m->beacon = beacon(name);
  }
  ++cycle_;
}

EventLog run(const oaam::ScenarioDoc& scenario, std::int64_t cycles, std::uint64_t seed) {
  Platform p(scenario, seed);
  p.run_until(cycles);
  return p.log();
}

}  // namespace pafa::sim
