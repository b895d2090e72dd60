#include "pafa/planner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

namespace pafa::planner {

using oaam::FunctionSpec;
using oaam::Resources;
using oaam::ScenarioDoc;

const char* to_string(ReplanReason reason) {
  switch (reason) {
    case ReplanReason::TopologyChange: return "TopologyChange";
    case ReplanReason::DeviceFailure: return "DeviceFailure";
    case ReplanReason::FunctionSetChange: return "FunctionSetChange";
    case ReplanReason::Initial: return "Initial";
  }
  return "?";
}

const char* to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::Candidate: return "Candidate";
    case OutcomeKind::Infeasible: return "Infeasible";
    case OutcomeKind::Degraded: return "Degraded";
  }
  return "?";
}

AdaptationNeed analyze(const oaam::Consciousness& c, std::optional<std::uint64_t> last_planned_version) {
  if (!last_planned_version) return {true, ReplanReason::Initial};
  if (c.version() == *last_planned_version) return {false, ReplanReason::Initial};
  for (const auto& entry : c.journal()) {
    if (entry.version <= *last_planned_version) continue;
    switch (entry.kind) {
      case oaam::EventKind::DeviceFailed: return {true, ReplanReason::DeviceFailure};
      case oaam::EventKind::FunctionAdded:
      case oaam::EventKind::FunctionRemoved: return {true, ReplanReason::FunctionSetChange};
      default: return {true, ReplanReason::TopologyChange};
    }
  }
  // Store changed outside the journal (e.g. initial load).
  return {true, ReplanReason::TopologyChange};
}

int required_replicas(double lambda, const oaam::FailureConditionSpec& fc, const oaam::SafetyPolicy& policy) {
  if (!(lambda > 0.0) || lambda > 1.0) throw Error(ErrorKind::InvalidArgument, "failure rate must lie in (0, 1]");
  const double x = lambda * policy.exposure_hours;
  if (x >= 1.0) throw Error(ErrorKind::NoFiniteK, "lambda*T = " + format_real(x) + " >= 1");
  const double limit = policy.limit_for(fc);
  if (!(limit > 0.0)) throw Error(ErrorKind::NoFiniteK, "non-positive probability limit");
  int k = 1;
  double p = x;
  // Relative slack so that e.g. (1e-3)^3 counts as meeting 1e-9.
  while (p > limit * (1.0 + 1e-12)) {
    ++k;
    p = std::pow(x, k);
    if (k > 4096) throw Error(ErrorKind::NoFiniteK, "no k up to 4096");
  }
  if (fc.severity == oaam::Severity::CAT) k = std::max(k, policy.cat_min_cut_order);
  return k;
}

// ---------------------------------------------------------------- scheduling

ScheduleResult schedule_device(const std::vector<SchedTask>& tasks, const oaam::PlatformTiming& timing) {
  ScheduleResult out;
  const std::int64_t frames = timing.mif > 0 ? timing.frames() : 0;
  const std::int64_t window = timing.execution_window_per_mif;
  if (frames <= 0) {
    out.reason = "no frames";
    return out;
  }
  std::vector<std::int64_t> load(frames, 0);
  std::vector<std::int64_t> phase(tasks.size(), -1);
  std::vector<std::vector<bool>> present(tasks.size(), std::vector<bool>(frames, false));

  std::vector<std::size_t> periodic;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (tasks[i].period_frames > 0) periodic.push_back(i);
  }
  std::stable_sort(periodic.begin(), periodic.end(),
                   [&](std::size_t a, std::size_t b) { return tasks[a].wcet > tasks[b].wcet; });
  for (auto i : periodic) {
    const auto& t = tasks[i];
    if (t.period_frames > frames || frames % t.period_frames != 0) {
      out.reason = t.key + ": period of " + std::to_string(t.period_frames) + " frames does not divide the major frame";
      return out;
    }
    for (std::int64_t ph = 0; ph < t.period_frames && phase[i] < 0; ++ph) {
      bool fits = true;
      for (auto j = ph; j < frames; j += t.period_frames) fits = fits && load[j] + t.wcet <= window;
      if (fits) phase[i] = ph;
    }
    if (phase[i] < 0) {
      out.reason = t.key + ": wcet " + std::to_string(t.wcet) + " does not fit the execution window";
      return out;
    }
    for (auto j = phase[i]; j < frames; j += t.period_frames) {
      load[j] += t.wcet;
      present[i][j] = true;
    }
  }
  std::vector<std::size_t> best_effort;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (tasks[i].period_frames > 0) continue;
    bool placed = false;
    for (std::int64_t j = 0; j < frames; ++j) {
      if (load[j] + tasks[i].wcet <= window) {
        load[j] += tasks[i].wcet;
        present[i][j] = true;
        placed = true;
      }
    }
    if (placed) {
      best_effort.push_back(i);
    } else {
      out.schedule.omitted.push_back(tasks[i].key);
    }
  }

  out.schedule.frames.assign(frames, {});
  for (std::int64_t j = 0; j < frames; ++j) {
    std::int64_t offset = 0;
    auto emit = [&](std::size_t i) {
      if (!present[i][j]) return;
      out.schedule.frames[j].push_back({tasks[i].key, offset, tasks[i].wcet});
      offset += tasks[i].wcet;
    };
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (tasks[i].period_frames > 0) emit(i);
    }
    for (auto i : best_effort) emit(i);
  }
  out.feasible = true;
  return out;
}

// ---------------------------------------------------------------- routing

NetworkView NetworkView::from(const ScenarioDoc& doc) {
  NetworkView net;
  for (const auto& d : doc.devices) {
    if (!d.failed) net.devices.insert(d.name);
  }
  for (const auto& c : doc.connections) {
    if (c.failed || !net.devices.count(c.a) || !net.devices.count(c.b)) continue;
    net.adjacency[c.a].push_back(net.links.size());
    net.adjacency[c.b].push_back(net.links.size());
    net.links.push_back({c.name, c.a, c.b, c.transmission_time, c.provides, {}});
  }
  return net;
}

NetworkView::Link* NetworkView::link(const std::string& name) {
  for (auto& l : links) {
    if (l.name == name) return &l;
  }
  return nullptr;
}

namespace {

bool fits(const Resources& provided, const Resources& consumed, const Resources& extra) {
  for (const auto& [res, qty] : extra) {
    if (qty <= 0.0) continue;
    auto p = provided.find(res);
    auto c = consumed.find(res);
    double have = p == provided.end() ? 0.0 : p->second;
    double used = c == consumed.end() ? 0.0 : c->second;
    if (used + qty > have) return false;
  }
  return true;
}

void add_into(Resources& into, const Resources& extra) {
  for (const auto& [res, qty] : extra) into[res] += qty;
}

struct Label {
  std::size_t hops = 0;
  std::int64_t time = 0;
  std::vector<std::string> names;
  bool operator<(const Label& o) const { return std::tie(hops, time, names) < std::tie(o.hops, o.time, o.names); }
};

}  // namespace

std::optional<Route> route_signal(const NetworkView& net, const std::string& src, const std::string& dst,
                                  const Resources& consumes) {
  if (!net.devices.count(src) || !net.devices.count(dst)) return std::nullopt;
  if (src == dst) return Route{};
  std::map<std::string, Label> best;
  std::map<std::string, std::vector<std::string>> via;
  std::set<std::pair<Label, std::string>> frontier;
  best[src] = {};
  frontier.insert({Label{}, src});
  std::set<std::string> done;
  while (!frontier.empty()) {
    auto [label, node] = *frontier.begin();
    frontier.erase(frontier.begin());
    if (done.count(node)) continue;
    done.insert(node);
    if (node == dst) break;
    auto adj = net.adjacency.find(node);
    if (adj == net.adjacency.end()) continue;
    for (auto li : adj->second) {
      const auto& link = net.links[li];
      if (!fits(link.provided, link.consumed, consumes)) continue;
      const auto& next = link.a == node ? link.b : link.a;
      if (done.count(next)) continue;
      Label cand{label.hops + 1, label.time + link.transmission_time, label.names};
      cand.names.push_back(link.name);
      auto it = best.find(next);
      if (it == best.end() || cand < it->second) {
        if (it != best.end()) frontier.erase({it->second, next});
        best[next] = cand;
        auto path = via[node];
        if (node != src) path.push_back(node);
        via[next] = std::move(path);
        frontier.insert({cand, next});
      }
    }
  }
  auto it = best.find(dst);
  if (it == best.end()) return std::nullopt;
  return Route{it->second.names, via[dst]};
}

std::optional<Route> route_signal(const meta::ModelStore& store, const std::string& src, const std::string& dst) {
  return route_signal(NetworkView::from(oaam::extract(store)), src, dst);
}

void book_route(NetworkView& net, const Route& route, const Resources& consumes) {
  for (const auto& name : route.connections) {
    if (auto* l = net.link(name)) add_into(l->consumed, consumes);
  }
}

// ---------------------------------------------------------------- allocation

std::vector<const FunctionSpec*> function_order(const ScenarioDoc& doc) {
  std::vector<const FunctionSpec*> out;
  for (const auto& f : doc.functions) out.push_back(&f);
  std::sort(out.begin(), out.end(), [](const FunctionSpec* a, const FunctionSpec* b) {
    return std::make_tuple(static_cast<int>(a->dal), -a->priority, a->name) <
           std::make_tuple(static_cast<int>(b->dal), -b->priority, b->name);
  });
  return out;
}

namespace {

std::vector<std::size_t> topological_order(const FunctionSpec& f) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < f.tasks.size(); ++i) index[f.tasks[i].name] = i;
  std::vector<int> indegree(f.tasks.size(), 0);
  std::vector<std::vector<std::size_t>> succ(f.tasks.size());
  for (const auto& s : f.signals) {
    auto a = index.find(s.from_task);
    auto b = index.find(s.to_task);
    if (a == index.end() || b == index.end()) continue;
    succ[a->second].push_back(b->second);
    ++indegree[b->second];
  }
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < f.tasks.size(); ++i) {
    if (indegree[i] == 0) ready.insert(i);
  }
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    auto i = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(i);
    for (auto j : succ[i]) {
      if (--indegree[j] == 0) ready.insert(j);
    }
  }
  return order;
}

struct Booking {
  std::map<std::string, Resources> device_consumed;
  std::map<std::string, std::vector<SchedTask>> device_tasks;
  std::map<std::string, std::int64_t> load;
  NetworkView net;
  std::vector<TaskAssignment> assignments;
  std::vector<SignalRoute> routes;
  std::map<std::string, int> replicas;
};

class Allocator {
 public:
  Allocator(const ScenarioDoc& doc) : doc_(doc) {
    booking_.net = NetworkView::from(doc);
    for (const auto& d : doc.devices) {
      if (d.is_pafa_module && !d.failed) modules_.push_back(&d);
    }
    std::sort(modules_.begin(), modules_.end(), [](auto* a, auto* b) { return a->name < b->name; });
  }

  // Returns an empty string on success, otherwise the reason.
  std::string place(const FunctionSpec& f) {
    std::vector<std::string> capable_hosts;
    int k = 1;
    try {
      k = replica_count(f);
    } catch (const Error& e) {
      return e.kind() == ErrorKind::NoFiniteK ? "NoFiniteK" : e.what();
    }
    Booking saved = booking_;
    auto order = topological_order(f);
    std::vector<std::set<std::string>> replica_devices(k);
    for (int r = 0; r < k; ++r) {
      std::map<std::string, std::string> host;  // task -> device
      for (auto ti : order) {
        const auto& task = f.tasks[ti];
        auto reason = place_task(f, r, task, host, replica_devices);
        if (!reason.empty()) {
          booking_ = std::move(saved);
          return "replica " + std::to_string(r) + " task " + task.name + ": " + reason;
        }
      }
    }
    booking_.replicas[f.name] = k;
    return {};
  }

  Configuration finish(std::int64_t version) {
    Configuration c;
    c.version = version;
    for (const auto* m : modules_) c.modules.push_back(m->name);
    c.replicas = booking_.replicas;
    c.assignments = booking_.assignments;
    c.routes = booking_.routes;
    for (const auto* m : modules_) {
      auto result = schedule_device(booking_.device_tasks[m->name], doc_.timing);
      c.schedules[m->name] = std::move(result.schedule);
    }
    for (const auto* m : modules_) {
      RoutingTable table;
      std::map<std::pair<std::string, int>, int> slot_of;
      for (const auto& a : c.assignments) {
        if (a.device != m->name) continue;
        for (int p = 0; p < oaam::input_ports(a.kind); ++p) {
          slot_of[{a.key(), p}] = static_cast<int>(table.slots.size());
          table.slots.push_back({a.key(), p});
        }
      }
      for (const auto& r : c.routes) {
        if (r.src_device != m->name) continue;
        RouteEntry e;
        e.signal = r.key();
        e.src_task = task_key(r.function, r.replica, r.from_task);
        e.src_port = r.from_port;
        e.dst_device = r.dst_device;
        e.dst_task = task_key(r.function, r.replica, r.to_task);
        e.dst_port = r.to_port;
        if (r.dst_device == m->name) {
          e.slot = slot_of.at({e.dst_task, e.dst_port});
        } else {
          e.network = true;
          e.route = r.connections;
        }
        table.entries.push_back(std::move(e));
      }
      c.routing_tables[m->name] = std::move(table);
    }
    return c;
  }

 private:
  double effective_rate(const oaam::DeviceSpec& d) const { return doc_.effective_failure_rate(d); }

  int replica_count(const FunctionSpec& f) const {
    if (f.failure_conditions.empty()) return 1;
    double worst = 0.0;
    for (const auto* m : modules_) {
      bool capable = std::any_of(f.tasks.begin(), f.tasks.end(), [&](const oaam::BasicTaskSpec& t) {
        return doc_.capability(t.task_type, m->type) != nullptr;
      });
      if (capable) worst = std::max(worst, effective_rate(*m));
    }
    for (const auto& l : booking_.net.links) {
      if (const auto* c = doc_.connection(l.name)) worst = std::max(worst, c->failure_rate);
    }
    for (const auto& b : f.peripheral_bindings) {
      if (const auto* d = doc_.device(b.device)) worst = std::max(worst, effective_rate(*d));
    }
    if (worst <= 0.0) return 1;
    int k = 1;
    for (const auto& fc : f.failure_conditions) k = std::max(k, required_replicas(worst, fc, doc_.safety_policy));
    return k;
  }

  struct Candidate {
    const oaam::DeviceSpec* device;
    std::string peripheral;
    std::string link;
  };

  std::string place_task(const FunctionSpec& f, int r, const oaam::BasicTaskSpec& task,
                         std::map<std::string, std::string>& host,
                         std::vector<std::set<std::string>>& replica_devices) {
    const auto* tt = doc_.task_type(task.task_type);
    if (tt == nullptr) return "unknown task type";
    const oaam::PeripheralBindingSpec* binding = nullptr;
    for (const auto& b : f.peripheral_bindings) {
      if (b.task == task.name) {
        binding = &b;
        break;
      }
    }
    std::vector<Candidate> candidates;
    if (binding != nullptr) {
      const auto* p = doc_.device(binding->device);
      if (p == nullptr || p->failed) return "bound peripheral " + binding->device + " unavailable";
      if (p->is_pafa_module) {
        candidates.push_back({p, "", ""});
      } else {
        for (const auto* m : modules_) {
          std::string best;
          for (const auto& c : doc_.connections) {
            if (c.failed) continue;
            bool joins = (c.a == m->name && c.b == p->name) || (c.b == m->name && c.a == p->name);
            if (joins && (best.empty() || c.name < best)) best = c.name;
          }
          if (!best.empty()) candidates.push_back({m, p->name, best});
        }
      }
    } else {
      for (const auto* m : modules_) {
        bool taken = false;
        for (int o = 0; o < static_cast<int>(replica_devices.size()); ++o) {
          if (o != r && replica_devices[o].count(m->name)) taken = true;
        }
        if (!taken) candidates.push_back({m, "", ""});
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
      auto key = [&](const Candidate& c) {
        return std::make_tuple(replica_devices[r].count(c.device->name) ? 0 : 1, booking_.load[c.device->name],
                               c.device->name);
      };
      return key(a) < key(b);
    });

    const std::int64_t period_frames =
        (f.period && !task.best_effort && doc_.timing.mif > 0) ? *f.period / doc_.timing.mif : 0;
    std::string last_reason = "no capable device";
    for (const auto& cand : candidates) {
      const auto& dev = *cand.device;
      const auto* cap = doc_.capability(task.task_type, dev.type);
      if (cap == nullptr) continue;
      const auto* dtype = doc_.device_type(dev.type);
      Resources provided = dtype ? dtype->provides : Resources{};
      if (!fits(provided, booking_.device_consumed[dev.name], cap->consumes)) {
        last_reason = "resources exhausted";
        continue;
      }
      auto key = task_key(f.name, r, task.name);
      auto trial = booking_.device_tasks[dev.name];
      trial.push_back({key, cap->wcet, period_frames});
      if (!schedule_device(trial, doc_.timing).feasible) {
        last_reason = "schedule full";
        continue;
      }
      NetworkView net = booking_.net;
      std::vector<SignalRoute> routes;
      bool routed = true;
      for (std::size_t si = 0; si < f.signals.size() && routed; ++si) {
        const auto& s = f.signals[si];
        if (s.to_task != task.name) continue;
        auto src = host.find(s.from_task);
        if (src == host.end()) {
          routed = false;
          break;
        }
        auto route = route_signal(net, src->second, dev.name, s.consumes);
        if (!route) {
          routed = false;
          break;
        }
        book_route(net, *route, s.consumes);
        routes.push_back({f.name, r, static_cast<int>(si), s.from_task, s.from_port, s.to_task, s.to_port,
                          src->second, dev.name, route->connections, route->via_devices});
      }
      if (!routed) {
        last_reason = "no route";
        continue;
      }

      booking_.net = std::move(net);
      add_into(booking_.device_consumed[dev.name], cap->consumes);
      booking_.device_tasks[dev.name] = std::move(trial);
      booking_.load[dev.name] += cap->wcet * (period_frames > 0 ? doc_.timing.frames() / period_frames : 1);
      TaskAssignment a;
      a.function = f.name;
      a.replica = r;
      a.task = task.name;
      a.task_type = task.task_type;
      a.kind = tt->kind;
      a.parameter = tt->parameter;
      a.best_effort = period_frames == 0;
      a.device = dev.name;
      a.wcet = cap->wcet;
      a.period_frames = period_frames;
      a.peripheral = cand.peripheral;
      a.peripheral_link = cand.link;
      booking_.assignments.push_back(std::move(a));
      for (auto& rt : routes) booking_.routes.push_back(std::move(rt));
      host[task.name] = dev.name;
      replica_devices[r].insert(dev.name);
      return {};
    }
    return last_reason;
  }

  const ScenarioDoc& doc_;
  std::vector<const oaam::DeviceSpec*> modules_;
  Booking booking_;
};

PlanOutcome allocate_subset(const ScenarioDoc& doc, const PlanOptions& options, const std::set<std::string>& keep,
                            std::vector<DroppedFunction> dropped) {
  Allocator alloc(doc);
  PlanOutcome out;
  for (const auto* f : function_order(doc)) {
    if (!keep.count(f->name)) continue;
    auto reason = alloc.place(*f);
    if (!reason.empty()) out.unsatisfied.push_back({f->name, reason});
  }
  if (!out.unsatisfied.empty()) {
    out.kind = OutcomeKind::Infeasible;
    return out;
  }
  auto config = alloc.finish(options.version);
  std::sort(dropped.begin(), dropped.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  config.dropped = std::move(dropped);
  config.maintenance_needed = !config.dropped.empty();
  out.kind = config.dropped.empty() ? OutcomeKind::Candidate : OutcomeKind::Degraded;
  out.config = std::move(config);
  return out;
}

}  // namespace

PlanOutcome allocate(const ScenarioDoc& doc, const PlanOptions& options) {
  std::set<std::string> keep;
  std::vector<DroppedFunction> dropped;
  for (const auto& f : doc.functions) {
    auto ex = options.excluded.find(f.name);
    if (ex != options.excluded.end()) {
      dropped.push_back({f.name, ex->second});
    } else if (!f.composition_verified) {
      dropped.push_back({f.name, "CompositionUnverified"});
    } else {
      keep.insert(f.name);
    }
  }
  return allocate_subset(doc, options, keep, std::move(dropped));
}

PlanOutcome allocate(const meta::ModelStore& store, const oaam::SafetyPolicy& policy,
                     const oaam::PlatformTiming& timing, const PlanOptions& options) {
  auto doc = oaam::extract(store);
  doc.safety_policy = policy;
  doc.timing = timing;
  return allocate(doc, options);
}

PlanOutcome plan(const ScenarioDoc& doc, const PlanOptions& options) {
  std::vector<const FunctionSpec*> plannable;
  std::vector<DroppedFunction> withheld;
  for (const auto& f : doc.functions) {
    auto ex = options.excluded.find(f.name);
    if (ex != options.excluded.end()) {
      withheld.push_back({f.name, ex->second});
    } else if (!f.composition_verified) {
      withheld.push_back({f.name, "CompositionUnverified"});
    } else {
      plannable.push_back(&f);
    }
  }
  std::sort(plannable.begin(), plannable.end(), [](auto* a, auto* b) {
    return std::tie(b->priority, a->name) < std::tie(a->priority, b->name);
  });

  PlanOutcome first;
  for (std::size_t n = plannable.size() + 1; n-- > 0;) {
    std::set<std::string> keep;
    auto dropped = withheld;
    for (std::size_t i = 0; i < plannable.size(); ++i) {
      if (i < n) {
        keep.insert(plannable[i]->name);
      } else {
        dropped.push_back({plannable[i]->name, "Degraded"});
      }
    }
    auto out = allocate_subset(doc, options, keep, dropped);
    if (n == plannable.size()) first = out;
    if (out.kind != OutcomeKind::Infeasible) {
      if (n < plannable.size()) out.unsatisfied = first.unsatisfied;
      return out;
    }
  }
  return first;
}

PlanOutcome plan(const meta::ModelStore& store, const oaam::SafetyPolicy& policy, const oaam::PlatformTiming& timing,
                 const PlanOptions& options) {
  auto doc = oaam::extract(store);
  doc.safety_policy = policy;
  doc.timing = timing;
  return plan(doc, options);
}

}  // namespace pafa::planner
