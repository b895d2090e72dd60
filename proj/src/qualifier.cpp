#include "pafa/qualifier.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "json.hpp"
#include "pafa/query.hpp"

namespace pafa::qualifier {

using json = nlohmann::json;
using meta::ModelStore;
using meta::ObjectId;
using oaam::Resources;

namespace {

// Facts of the snapshot, gathered through path queries.
struct Facts {
  struct Device {
    std::string type;
    double rate = 0.0;
    bool healthy = true;
    bool module = false;
  };
  struct Link {
    std::string a, b;
    double rate = 0.0;
    std::int64_t time = 0;
    bool healthy = true;
    Resources provides;
  };
  struct Cap {
    std::int64_t wcet = 0;
    Resources consumes;
  };
  struct Signal {
    std::string from, to;
    int from_port = 0, to_port = 0;
    Resources consumes;
  };
  struct Function {
    std::map<std::string, std::string> tasks;  // name -> task type
    std::vector<std::string> task_order;
    std::vector<Signal> signals;
    std::map<std::string, std::string> bindings;  // task -> device
    std::optional<std::int64_t> latency;
    std::vector<oaam::FailureConditionSpec> conditions;
  };

  std::map<std::string, Device> devices;
  std::map<std::string, Resources> type_provides;
  std::map<std::string, Link> links;
  std::map<std::pair<std::string, std::string>, Cap> caps;
  std::map<std::string, Function> functions;
};

std::string text_literal(const std::string& name) { return query::render(query::Literal{name}); }

Resources amounts(const ModelStore& store, const std::string& path) {
  Resources out;
  for (auto id : query::eval_objects(path, store)) {
    auto res = store.get_ref(id, "resource");
    if (res) out[store.get_text(*res, "name")] += store.get_real(id, "quantity");
  }
  return out;
}

Facts gather(const ModelStore& store) {
  Facts f;
  for (auto id : query::eval_objects("/DeviceType", store)) {
    auto name = store.get_text(id, "name");
    f.type_provides[name] = amounts(store, "/DeviceType[name=" + text_literal(name) + "]/provides");
  }
  std::map<std::string, double> type_rate;
  for (auto id : query::eval_objects("/DeviceType", store)) type_rate[store.get_text(id, "name")] = store.get_real(id, "failureRate");
  for (auto id : query::eval_objects("/Device", store)) {
    Facts::Device d;
    auto type = store.get_ref(id, "type");
    d.type = type ? store.get_text(*type, "name") : "";
    d.rate = store.get_bool(id, "hasOverride") ? store.get_real(id, "failureRateOverride") : type_rate[d.type];
    d.healthy = store.get_enum(id, "status") == "Healthy";
    d.module = store.get_bool(id, "isPafaModule");
    f.devices[store.get_text(id, "name")] = d;
  }
  for (auto id : query::eval_objects("/Connection", store)) {
    Facts::Link l;
    auto name = store.get_text(id, "name");
    auto ends = store.get_refs(id, "endpoints");
    if (ends.size() == 2) {
      l.a = store.get_text(ends[0], "name");
      l.b = store.get_text(ends[1], "name");
    }
    l.rate = store.get_real(id, "failureRate");
    l.time = store.get_int(id, "transmissionTime");
    l.healthy = store.get_enum(id, "status") == "Healthy";
    l.provides = amounts(store, "/Connection[name=" + text_literal(name) + "]/provides");
    f.links[name] = l;
  }
  for (auto id : query::eval_objects("/Capability", store)) {
    auto tt = store.get_ref(id, "taskType");
    auto dt = store.get_ref(id, "deviceType");
    if (!tt || !dt) continue;
    Facts::Cap c;
    c.wcet = store.get_int(id, "wcet");
    for (auto aid : store.get_refs(id, "consumes")) {
      auto res = store.get_ref(aid, "resource");
      if (res) c.consumes[store.get_text(*res, "name")] += store.get_real(aid, "quantity");
    }
    f.caps[{store.get_text(*tt, "name"), store.get_text(*dt, "name")}] = c;
  }
  for (auto id : query::eval_objects("/SystemFunction", store)) {
    Facts::Function fn;
    auto name = store.get_text(id, "name");
    auto base = "/SystemFunction[name=" + text_literal(name) + "]";
    for (auto tid : query::eval_objects(base + "/tasks", store)) {
      auto tt = store.get_ref(tid, "taskType");
      auto tname = store.get_text(tid, "name");
      fn.tasks[tname] = tt ? store.get_text(*tt, "name") : "";
      fn.task_order.push_back(tname);
    }
    for (auto sid : query::eval_objects(base + "/signals", store)) {
      Facts::Signal s;
      auto src = store.get_ref(sid, "source");
      auto dst = store.get_ref(sid, "target");
      s.from = src ? store.get_text(*src, "name") : "";
      s.to = dst ? store.get_text(*dst, "name") : "";
      s.from_port = static_cast<int>(store.get_int(sid, "sourcePort"));
      s.to_port = static_cast<int>(store.get_int(sid, "targetPort"));
      for (auto aid : store.get_refs(sid, "consumes")) {
        auto res = store.get_ref(aid, "resource");
        if (res) s.consumes[store.get_text(*res, "name")] += store.get_real(aid, "quantity");
      }
      fn.signals.push_back(std::move(s));
    }
    for (auto bid : query::eval_objects(base + "/bindings", store)) {
      auto task = store.get_ref(bid, "task");
      auto dev = store.get_ref(bid, "device");
      if (task) fn.bindings[store.get_text(*task, "name")] = dev ? store.get_text(*dev, "name") : "";
    }
    if (store.get_bool(id, "hasLatencyReq")) fn.latency = store.get_int(id, "latencyReq");
    for (auto cid : query::eval_objects(base + "/failureConditions", store)) {
      fn.conditions.push_back(oaam::FailureConditionSpec{store.get_text(cid, "description"), oaam::severity_from(store.get_enum(cid, "severity")),
                               store.get_real(cid, "maxProbabilityPerHour")});
    }
    f.functions[name] = std::move(fn);
  }
  return f;
}

std::string num(double v) { return format_real(v); }

void overflow_findings(const std::map<std::string, Resources>& consumed,
                       const std::function<Resources(const std::string&)>& provided, std::vector<Finding>& out) {
  for (const auto& [element, use] : consumed) {
    auto have = provided(element);
    for (const auto& [res, qty] : use) {
      double cap = have.count(res) ? have.at(res) : 0.0;
      if (qty > cap + std::abs(cap) * 1e-12) {
        out.push_back({"resources", element, res + ": consumed " + num(qty) + " > provided " + num(cap), ""});
      }
    }
  }
}

}  // namespace

// ---------------------------------------------------------------- resources

std::vector<Finding> check_resources(const Configuration& config, const ModelStore& store) {
  auto facts = gather(store);
  std::vector<Finding> out;
  std::map<std::string, Resources> device_use, link_use;
  for (const auto& a : config.assignments) {
    auto dev = facts.devices.find(a.device);
    if (dev == facts.devices.end()) {
      out.push_back({"resources", a.device, "unknown device for " + a.key(), a.function});
      continue;
    }
    auto cap = facts.caps.find({a.task_type, dev->second.type});
    if (cap == facts.caps.end()) {
      out.push_back({"resources", a.device, "no capability " + a.task_type + "@" + dev->second.type, a.function});
      continue;
    }
    if (cap->second.wcet != a.wcet) {
      out.push_back({"resources", a.device, a.key() + ": wcet " + std::to_string(a.wcet) + " differs from capability " +
                                                std::to_string(cap->second.wcet), a.function});
    }
    for (const auto& [res, qty] : cap->second.consumes) device_use[a.device][res] += qty;
  }
  for (const auto& r : config.routes) {
    auto fn = facts.functions.find(r.function);
    if (fn == facts.functions.end() || r.signal < 0 || r.signal >= static_cast<int>(fn->second.signals.size())) {
      out.push_back({"resources", r.key(), "route for an unknown signal", r.function});
      continue;
    }
    for (const auto& c : r.connections) {
      if (!facts.links.count(c)) {
        out.push_back({"resources", c, "unknown connection on " + r.key(), r.function});
        continue;
      }
      for (const auto& [res, qty] : fn->second.signals[r.signal].consumes) link_use[c][res] += qty;
    }
  }
  overflow_findings(device_use, [&](const std::string& d) {
    auto it = facts.type_provides.find(facts.devices.at(d).type);
    return it == facts.type_provides.end() ? Resources{} : it->second;
  }, out);
  overflow_findings(link_use, [&](const std::string& l) { return facts.links.at(l).provides; }, out);
  return out;
}

// ---------------------------------------------------------------- schedule

std::vector<Finding> check_schedule(const Configuration& config, const oaam::PlatformTiming& timing) {
  std::vector<Finding> out;
  const std::int64_t frames = timing.mif > 0 ? timing.maf / timing.mif : 0;
  const std::int64_t window = timing.execution_window_per_mif;
  std::map<std::pair<std::string, std::string>, std::set<std::int64_t>> seen;  // (device, task) -> frames
  std::map<std::pair<std::string, std::string>, std::int64_t> seen_wcet;

  for (const auto& [dev, sched] : config.schedules) {
    if (static_cast<std::int64_t>(sched.frames.size()) != frames) {
      out.push_back({"schedule", dev, std::to_string(sched.frames.size()) + " frames, major frame has " +
                                          std::to_string(frames), ""});
    }
    for (std::size_t j = 0; j < sched.frames.size(); ++j) {
      auto entries = sched.frames[j];
      std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.offset < b.offset; });
      for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        if (e.offset < 0 || e.wcet <= 0 || e.offset + e.wcet > window) {
          out.push_back({"schedule", dev, "WindowFinding: " + e.task + " at " + std::to_string(e.offset) + "+" +
                                              std::to_string(e.wcet) + " outside window " + std::to_string(window), ""});
        }
        if (i > 0 && entries[i - 1].offset + entries[i - 1].wcet > e.offset) {
          out.push_back({"schedule", dev, "OverlapFinding: " + entries[i - 1].task + " overlaps " + e.task +
                                              " in frame " + std::to_string(j), ""});
        }
        seen[{dev, e.task}].insert(static_cast<std::int64_t>(j));
        seen_wcet[{dev, e.task}] = e.wcet;
      }
    }
  }

  std::set<std::pair<std::string, std::string>> assigned;
  for (const auto& a : config.assignments) {
    auto key = a.key();
    assigned.insert({a.device, key});
    auto it = seen.find({a.device, key});
    if (it != seen.end() && seen_wcet[{a.device, key}] != a.wcet) {
      out.push_back({"schedule", a.device, "ScheduleFinding: " + key + " scheduled with wcet " +
                                               std::to_string(seen_wcet[{a.device, key}]) + ", assigned " +
                                               std::to_string(a.wcet), a.function});
    }
    if (a.period_frames <= 0) continue;
    if (frames <= 0 || frames % a.period_frames != 0) {
      out.push_back({"schedule", a.device, "PeriodFinding: " + key + " period does not divide the major frame", a.function});
      continue;
    }
    if (it == seen.end()) {
      out.push_back({"schedule", a.device, "PeriodFinding: " + key + " never scheduled", a.function});
      continue;
    }
    std::int64_t phase = *it->second.begin() % a.period_frames;
    std::set<std::int64_t> required;
    for (auto j = phase; j < frames; j += a.period_frames) required.insert(j);
    if (required != it->second) {
      out.push_back({"schedule", a.device, "PeriodFinding: " + key + " appears in " + std::to_string(it->second.size()) +
                                               " frames, needs every " + std::to_string(a.period_frames) + "th", a.function});
    }
  }
  for (const auto& [where, frames_in] : seen) {
    if (!assigned.count(where)) {
      out.push_back({"schedule", where.first, "ScheduleFinding: " + where.second + " is not assigned to this device", ""});
    }
  }
  return out;
}

// ---------------------------------------------------------------- routes & replicas

std::vector<Finding> check_routes(const Configuration& config, const ModelStore& store) {
  auto facts = gather(store);
  std::vector<Finding> out;
  std::map<std::string, const SignalRoute*> routes;
  for (const auto& r : config.routes) routes[r.key()] = &r;

  for (const auto& [fname, k] : config.replicas) {
    auto fit = facts.functions.find(fname);
    if (fit == facts.functions.end()) {
      out.push_back({"routes", fname, "function not in consciousness", fname});
      continue;
    }
    const auto& fn = fit->second;
    std::vector<std::set<std::string>> free_hosts(k), all_hosts(k);
    for (int r = 0; r < k; ++r) {
      std::map<std::string, std::string> host;
      for (const auto& tname : fn.task_order) {
        const auto* a = config.assignment(fname, r, tname);
        if (a == nullptr) {
          out.push_back({"routes", task_key(fname, r, tname), "task not assigned", fname});
          continue;
        }
        auto dev = facts.devices.find(a->device);
        if (dev == facts.devices.end() || !dev->second.healthy || !dev->second.module) {
          out.push_back({"routes", a->device, "host of " + a->key() + " is not a healthy module", fname});
        }
        host[tname] = a->device;
        all_hosts[r].insert(a->device);
        auto bound = fn.bindings.find(tname);
        if (bound == fn.bindings.end()) {
          free_hosts[r].insert(a->device);
          continue;
        }
        const auto& periph = bound->second;
        if (a->device == periph) continue;
        auto link = facts.links.find(a->peripheral_link);
        bool joins = link != facts.links.end() && link->second.healthy &&
                     ((link->second.a == a->device && link->second.b == periph) ||
                      (link->second.b == a->device && link->second.a == periph));
        auto pdev = facts.devices.find(periph);
        if (!joins || a->peripheral != periph || pdev == facts.devices.end() || !pdev->second.healthy) {
          out.push_back({"routes", periph, a->key() + " is not attached to its bound peripheral", fname});
        }
      }
      for (std::size_t si = 0; si < fn.signals.size(); ++si) {
        const auto& s = fn.signals[si];
        auto key = signal_key(fname, r, static_cast<int>(si));
        auto rit = routes.find(key);
        if (rit == routes.end()) {
          out.push_back({"routes", key, "signal has no route", fname});
          continue;
        }
        const auto& route = *rit->second;
        if (!host.count(s.from) || !host.count(s.to) || route.src_device != host[s.from] ||
            route.dst_device != host[s.to]) {
          out.push_back({"routes", key, "route endpoints do not match task hosts", fname});
          continue;
        }
        std::string at = route.src_device;
        bool ok = true;
        for (std::size_t i = 0; i < route.connections.size() && ok; ++i) {
          auto l = facts.links.find(route.connections[i]);
          if (l == facts.links.end() || !l->second.healthy || (l->second.a != at && l->second.b != at)) {
            ok = false;
            break;
          }
          at = l->second.a == at ? l->second.b : l->second.a;
          auto d = facts.devices.find(at);
          if (d == facts.devices.end() || !d->second.healthy) ok = false;
          if (i + 1 < route.connections.size() &&
              (i >= route.via_devices.size() || route.via_devices[i] != at)) {
            ok = false;
          }
        }
        if (!ok || at != route.dst_device ||
            (!route.connections.empty() && route.via_devices.size() + 1 != route.connections.size())) {
          out.push_back({"routes", key, "route is not a healthy path " + route.src_device + " -> " + route.dst_device, fname});
        }
        if (!route.connections.empty()) {
          auto table = config.routing_tables.find(route.src_device);
          bool listed = false;
          if (table != config.routing_tables.end()) {
            for (const auto& e : table->second.entries) listed = listed || (e.signal == key && e.network && e.route == route.connections);
          }
          if (!listed) out.push_back({"routes", key, "network route missing from routing table", fname});
        }
      }
    }
    for (int r = 0; r < k; ++r) {
      for (int o = 0; o < k; ++o) {
        if (o == r) continue;
        for (const auto& d : free_hosts[r]) {
          if (all_hosts[o].count(d)) {
            out.push_back({"routes", d, "replicas " + std::to_string(r) + " and " + std::to_string(o) + " share device", fname});
          }
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------- latency

std::vector<Finding> check_latency(const Configuration& config, const ModelStore& store,
                                   const oaam::PlatformTiming& timing) {
  auto facts = gather(store);
  std::vector<Finding> out;
  std::map<std::string, const SignalRoute*> routes;
  for (const auto& r : config.routes) routes[r.key()] = &r;

  for (const auto& [fname, k] : config.replicas) {
    auto fit = facts.functions.find(fname);
    if (fit == facts.functions.end() || !fit->second.latency) continue;
    const auto& fn = fit->second;
    for (int r = 0; r < k; ++r) {
      std::map<std::string, std::int64_t> finish;
      std::set<std::string> busy;
      std::function<std::int64_t(const std::string&)> worst = [&](const std::string& t) -> std::int64_t {
        if (auto it = finish.find(t); it != finish.end()) return it->second;
        if (!busy.insert(t).second) return 0;
        std::int64_t before = 0;
        for (std::size_t si = 0; si < fn.signals.size(); ++si) {
          const auto& s = fn.signals[si];
          if (s.to != t) continue;
          std::int64_t hop = 0;
          if (auto rit = routes.find(signal_key(fname, r, static_cast<int>(si))); rit != routes.end()) {
            for (const auto& c : rit->second->connections) {
              if (auto l = facts.links.find(c); l != facts.links.end()) hop += l->second.time;
            }
            if (rit->second->src_device != rit->second->dst_device) hop += timing.mif;
          }
          before = std::max(before, worst(s.from) + hop);
        }
        const auto* a = config.assignment(fname, r, t);
        return finish[t] = before + (a ? a->wcet : 0);
      };
      std::int64_t chain = 0;
      for (const auto& t : fn.task_order) {
        bool sink = std::none_of(fn.signals.begin(), fn.signals.end(), [&](const auto& s) { return s.from == t; });
        if (sink) chain = std::max(chain, worst(t));
      }
      if (chain > *fn.latency) {
        out.push_back({"latency", task_key(fname, r, ""), "worst chain " + std::to_string(chain) + " us > required " +
                                                           std::to_string(*fn.latency) + " us", fname});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------- fault trees

int FaultTree::add_event(const std::string& name, double probability) {
  if (auto i = event_index(name)) return *i;
  events.push_back(name);
  probabilities.push_back(probability);
  return static_cast<int>(events.size()) - 1;
}

int FaultTree::basic(int event) {
  nodes.push_back({Gate::Basic, event, {}});
  return static_cast<int>(nodes.size()) - 1;
}

int FaultTree::gate(Gate g, std::vector<int> children) {
  nodes.push_back({g, -1, std::move(children)});
  return static_cast<int>(nodes.size()) - 1;
}

std::optional<int> FaultTree::event_index(const std::string& name) const {
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i] == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

bool FaultTree::fails(const std::vector<bool>& failed) const {
  std::function<bool(int)> eval = [&](int n) -> bool {
    const auto& node = nodes[n];
    switch (node.gate) {
      case Gate::Basic: return failed[node.event];
      case Gate::And:
        return std::all_of(node.children.begin(), node.children.end(), eval);
      case Gate::Or:
        return std::any_of(node.children.begin(), node.children.end(), eval);
    }
    return false;
  };
  return top >= 0 && eval(top);
}

double basic_event_probability(double lambda, double exposure_hours) { return -std::expm1(-lambda * exposure_hours); }

FaultTree derive_fault_tree(const Configuration& config, const ModelStore& store, const std::string& function,
                            const oaam::FailureConditionSpec& fc, const oaam::SafetyPolicy& policy) {
  auto facts = gather(store);
  FaultTree tree;
  tree.function = function;
  tree.condition = fc.description;
  auto event_for = [&](const std::string& name) {
    double rate = 0.0;
    if (auto d = facts.devices.find(name); d != facts.devices.end()) rate = d->second.rate;
    if (auto l = facts.links.find(name); l != facts.links.end()) rate = l->second.rate;
    return tree.add_event(name, basic_event_probability(rate, policy.exposure_hours));
  };
  auto kit = config.replicas.find(function);
  int k = kit == config.replicas.end() ? 0 : kit->second;
  std::vector<int> branches;
  for (int r = 0; r < k; ++r) {
    std::set<std::string> support;
    for (const auto& a : config.assignments) {
      if (a.function != function || a.replica != r) continue;
      support.insert(a.device);
      if (!a.peripheral.empty()) support.insert(a.peripheral);
      if (!a.peripheral_link.empty()) support.insert(a.peripheral_link);
    }
    for (const auto& rt : config.routes) {
      if (rt.function != function || rt.replica != r) continue;
      support.insert(rt.connections.begin(), rt.connections.end());
      support.insert(rt.via_devices.begin(), rt.via_devices.end());
    }
    std::vector<int> leaves;
    for (const auto& name : support) leaves.push_back(tree.basic(event_for(name)));
    branches.push_back(tree.gate(FaultTree::Gate::Or, std::move(leaves)));
  }
  tree.top = tree.gate(FaultTree::Gate::And, std::move(branches));
  return tree;
}

namespace {

using CutSets = std::vector<std::vector<int>>;

void minimize(CutSets& sets) {
  std::sort(sets.begin(), sets.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
  CutSets kept;
  for (auto& s : sets) {
    bool covered = std::any_of(kept.begin(), kept.end(), [&](const auto& k) {
      return std::includes(s.begin(), s.end(), k.begin(), k.end());
    });
    if (!covered) kept.push_back(std::move(s));
  }
  sets = std::move(kept);
}

CutSets expand(const FaultTree& tree, int n, std::size_t& generated) {
  const auto& node = tree.nodes.at(n);
  switch (node.gate) {
    case FaultTree::Gate::Basic: return {{node.event}};
    case FaultTree::Gate::Or: {
      CutSets out;
      for (auto c : node.children) {
        auto sub = expand(tree, c, generated);
        out.insert(out.end(), sub.begin(), sub.end());
      }
      generated += out.size();
      if (generated > kMaxIntermediateSets) throw Error(ErrorKind::CutSetExplosion, tree.function + ": too many cut sets");
      minimize(out);
      return out;
    }
    case FaultTree::Gate::And: {
      CutSets acc{{}};
      for (auto c : node.children) {
        auto sub = expand(tree, c, generated);
        CutSets next;
        for (const auto& a : acc) {
          for (const auto& b : sub) {
            if (++generated > kMaxIntermediateSets) {
              throw Error(ErrorKind::CutSetExplosion, tree.function + ": more than " +
                                                          std::to_string(kMaxIntermediateSets) + " intermediate cut sets");
            }
            std::vector<int> u;
            std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(u));
            next.push_back(std::move(u));
          }
        }
        minimize(next);
        acc = std::move(next);
      }
      return acc;
    }
  }
  return {};
}

}  // namespace

std::vector<std::vector<int>> minimal_cut_sets(const FaultTree& tree) {
  if (tree.top < 0) return {};
  std::size_t generated = 0;
  return expand(tree, tree.top, generated);
}

double exact_probability(const std::vector<std::vector<int>>& cut_sets, const std::vector<double>& p) {
  // Inclusion-exclusion over all non-empty subsets of cut sets, walked depth
  // first so the union of events grows incrementally.
  std::map<int, int> compact;
  for (const auto& s : cut_sets) {
    for (auto e : s) compact.emplace(e, 0);
  }
  int m = 0;
  for (auto& [e, i] : compact) i = m++;
  const std::size_t words = (m + 63) / 64 + 1;
  std::vector<std::vector<int>> sets;
  for (const auto& s : cut_sets) {
    std::vector<int> c;
    for (auto e : s) c.push_back(compact[e]);
    sets.push_back(std::move(c));
  }
  std::vector<long double> prob(m);
  for (auto& [e, i] : compact) prob[i] = p.at(e);

  long double total = 0.0L;
  std::function<void(std::size_t, std::vector<std::uint64_t>&, long double, bool)> walk =
      [&](std::size_t from, std::vector<std::uint64_t>& used, long double prod, bool odd) {
        for (std::size_t j = from; j < sets.size(); ++j) {
          long double next = prod;
          std::vector<int> added;
          for (auto e : sets[j]) {
            auto& w = used[e / 64];
            std::uint64_t bit = std::uint64_t{1} << (e % 64);
            if (!(w & bit)) {
              w |= bit;
              added.push_back(e);
              next *= prob[e];
            }
          }
          total += odd ? next : -next;
          walk(j + 1, used, next, !odd);
          for (auto e : added) used[e / 64] &= ~(std::uint64_t{1} << (e % 64));
        }
      };
  std::vector<std::uint64_t> used(words, 0);
  walk(0, used, 1.0L, true);
  return static_cast<double>(total);
}

double rare_event_probability(const std::vector<std::vector<int>>& cut_sets, const std::vector<double>& p) {
  long double sum = 0.0L;
  for (const auto& s : cut_sets) {
    long double prod = 1.0L;
    for (auto e : s) prod *= p.at(e);
    sum += prod;
  }
  return static_cast<double>(sum);
}

double second_order_bound(const std::vector<std::vector<int>>& cut_sets, const std::vector<double>& p) {
  long double sum = 0.0L;
  for (std::size_t i = 0; i < cut_sets.size(); ++i) {
    for (std::size_t j = i + 1; j < cut_sets.size(); ++j) {
      std::vector<int> u;
      std::set_union(cut_sets[i].begin(), cut_sets[i].end(), cut_sets[j].begin(), cut_sets[j].end(),
                     std::back_inserter(u));
      long double prod = 1.0L;
      for (auto e : u) prod *= p.at(e);
      sum += prod;
    }
  }
  return static_cast<double>(sum);
}

CutSetReport evaluate_probability(const FaultTree& tree, ProbabilityMode mode) {
  CutSetReport report;
  report.minimal_cut_sets = minimal_cut_sets(tree);
  report.order_min = report.minimal_cut_sets.empty() ? 0 : static_cast<int>(report.minimal_cut_sets.front().size());
  bool exact = mode == ProbabilityMode::Exact ||
               (mode == ProbabilityMode::Auto && report.minimal_cut_sets.size() <= kExactCutSetLimit);
  report.rare_event = !exact;
  report.probability = exact ? exact_probability(report.minimal_cut_sets, tree.probabilities)
                             : rare_event_probability(report.minimal_cut_sets, tree.probabilities);
  return report;
}

// ---------------------------------------------------------------- qualify

namespace {

json findings_json(const std::vector<Finding>& fs) {
  json out = json::array();
  for (const auto& f : fs) {
    out.push_back({{"check", f.check}, {"element", f.element}, {"detail", f.detail}, {"function", f.function}});
  }
  return out;
}

}  // namespace

QualificationResult qualify(const Configuration& candidate, const ModelStore& store, const oaam::SafetyPolicy& policy,
                            const oaam::PlatformTiming& timing) {
  QualificationResult result;
  json checks = json::array();
  auto record = [&](const char* name, std::vector<Finding> fs, json evidence) {
    checks.push_back({{"name", name}, {"verdict", fs.empty() ? "pass" : "fail"}, {"findings", findings_json(fs)},
                      {"evidence", std::move(evidence)}});
    result.findings.insert(result.findings.end(), fs.begin(), fs.end());
  };

  const auto digest = candidate.digest();
  {
    std::vector<Finding> fs;
    if (candidate.declared_digest && *candidate.declared_digest != digest) {
      fs.push_back({"digest", "configuration", "declared " + to_hex(*candidate.declared_digest) + " != computed " + to_hex(digest), ""});
    }
    record("digest", std::move(fs), {{"computed", to_hex(digest)}});
  }
  record("resources", check_resources(candidate, store),
         {{"assignments", candidate.assignments.size()}, {"routes", candidate.routes.size()}});
  record("schedule", check_schedule(candidate, timing),
         {{"devices", candidate.schedules.size()}, {"frames", timing.mif > 0 ? timing.maf / timing.mif : 0},
          {"window", timing.execution_window_per_mif}});
  record("routes", check_routes(candidate, store), {{"functions", candidate.replicas.size()}});
  record("latency", check_latency(candidate, store, timing), {{"mif", timing.mif}});

  auto facts = gather(store);
  json trees = json::array();
  std::vector<Finding> safety;
  for (const auto& [fname, k] : candidate.replicas) {
    auto fit = facts.functions.find(fname);
    if (fit == facts.functions.end()) continue;
    for (const auto& fc : fit->second.conditions) {
      auto tree = derive_fault_tree(candidate, store, fname, fc, policy);
      const double limit = policy.limit_for(fc);
      json t = {{"function", fname},
                {"failure_condition", fc.description},
                {"severity", oaam::to_string(fc.severity)},
                {"limit", limit}};
      json events = json::array();
      for (std::size_t i = 0; i < tree.events.size(); ++i) {
        events.push_back({{"name", tree.events[i]}, {"p", tree.probabilities[i]}});
      }
      t["basic_events"] = events;
      json branches = json::array();
      for (auto b : tree.nodes[tree.top].children) {
        json names = json::array();
        for (auto leaf : tree.nodes[b].children) names.push_back(tree.events[tree.nodes[leaf].event]);
        branches.push_back(names);
      }
      t["replicas"] = branches;
      try {
        auto report = evaluate_probability(tree);
        json sets = json::array();
        for (const auto& s : report.minimal_cut_sets) {
          json names = json::array();
          for (auto e : s) names.push_back(tree.events[e]);
          sets.push_back(names);
        }
        t["minimal_cut_sets"] = sets;
        t["order_min"] = report.order_min;
        t["probability"] = report.probability;
        t["mode"] = report.rare_event ? "rare_event" : "exact";
        if (report.probability > limit) {
          safety.push_back({"safety", fname, fc.description + ": P " + num(report.probability) + " > limit " + num(limit), fname});
        }
        if (fc.severity == oaam::Severity::CAT && report.order_min < policy.cat_min_cut_order) {
          for (const auto& s : report.minimal_cut_sets) {
            if (static_cast<int>(s.size()) != report.order_min) break;
            std::string names;
            for (auto e : s) names += (names.empty() ? "" : ",") + tree.events[e];
            if (s.size() == 1) {
              safety.push_back({"safety", names, "SinglePointOfFailure: " + names + " alone causes " + fc.description, fname});
            } else {
              safety.push_back({"safety", names, "CutOrderFinding: order " + std::to_string(s.size()) + " < " +
                                                     std::to_string(policy.cat_min_cut_order), fname});
            }
          }
        }
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::CutSetExplosion) throw;
        t["mode"] = "cut_set_explosion";
        safety.push_back({"safety", fname, std::string("CutSetExplosion: ") + e.what(), fname});
      }
      trees.push_back(std::move(t));
    }
  }
  record("safety", std::move(safety), {{"exposure_hours", policy.exposure_hours},
                                       {"cat_min_cut_order", policy.cat_min_cut_order}});

  result.verdict = result.findings.empty() ? Verdict::Accept : Verdict::Reject;
  json artifact = {{"candidate_digest", to_hex(digest)},
                   {"consciousness_digest", to_hex(oaam::canonical_digest(store))},
                   {"checks", checks},
                   {"fault_trees", trees},
                   {"verdict", result.verdict == Verdict::Accept ? "Accept" : "Reject"}};
  result.artifact = artifact.dump(2) + "\n";
  if (result.verdict == Verdict::Accept) result.verified = candidate;
  return result;
}

}  // namespace pafa::qualifier
