#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pafa/digest.hpp"

namespace support {

using namespace pafa;
using oaam::ScenarioDoc;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string scenario_path(const std::string& name) { return std::string(PAFA_SCENARIO_DIR) + "/" + name + ".json"; }

ScenarioDoc shipped(const std::string& name) { return oaam::parse_scenario(read_file(scenario_path(name))); }

std::vector<std::string> shipped_names() { return {"duplex", "fig3", "line3", "minimal", "shared_switch"}; }

// ---------------------------------------------------------------- scenarios

namespace {

template <typename T>
T pick(std::mt19937_64& rng, T lo, T hi) {
  return std::uniform_int_distribution<T>(lo, hi)(rng);
}

bool chance(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

void common_types(ScenarioDoc& doc) {
  doc.resource_types = {"bandwidth", "memory"};
  doc.task_types = {
      {"Src", oaam::TaskKind::Const, 3.0},  {"Two", oaam::TaskKind::Gain, 2.0},  {"Half", oaam::TaskKind::Gain, 0.5},
      {"Sum", oaam::TaskKind::Add, 0.0},    {"Cap", oaam::TaskKind::Limit, 4.0}, {"Out", oaam::TaskKind::Sink, 0.0},
  };
}

oaam::ConnectionSpec link(const std::string& a, const std::string& b, std::int64_t tt) {
  oaam::ConnectionSpec c;
  c.name = "L_" + a + "_" + b;
  c.a = a;
  c.b = b;
  c.type = "Bus";
  c.failure_rate = 1e-6;
  c.transmission_time = tt;
  c.provides = {{"bandwidth", 100.0}};
  return c;
}

oaam::SignalSpec sig(const std::string& from, int fp, const std::string& to, int tp) {
  oaam::SignalSpec s;
  s.from_task = from;
  s.from_port = fp;
  s.to_task = to;
  s.to_port = tp;
  s.consumes = {{"bandwidth", 1.0}};
  return s;
}

}  // namespace

ScenarioDoc random_scenario(std::mt19937_64& rng, bool feasible) {
  ScenarioDoc doc;
  common_types(doc);
  doc.timing.mif = 1000;
  doc.timing.maf = 2000;
  doc.timing.execution_window_per_mif = 1000;

  double mem = feasible ? 64.0 : static_cast<double>(pick(rng, 1, 3));
  doc.device_types.push_back({"Cpu", 1e-5, {{"memory", mem}}});
  doc.device_types.push_back({"Cpu2", 2e-5, {{"memory", mem * 2}}});

  int n = pick(rng, 1, 10);
  for (int i = 0; i < n; ++i) {
    oaam::DeviceSpec d;
    d.name = "D" + std::to_string(i);
    d.type = chance(rng, 0.7) ? "Cpu" : "Cpu2";
    d.is_pafa_module = true;
    doc.devices.push_back(d);
  }
  std::set<std::pair<int, int>> edges;
  for (int i = 1; i < n; ++i) edges.insert({pick(rng, 0, i - 1), i});
  for (int e = pick(rng, 0, n); e > 0 && n > 2; --e) {
    int a = pick(rng, 0, n - 1), b = pick(rng, 0, n - 1);
    if (a != b) edges.insert({std::min(a, b), std::max(a, b)});
  }
  for (auto [a, b] : edges) {
    doc.connections.push_back(link("D" + std::to_string(a), "D" + std::to_string(b), pick<std::int64_t>(rng, 5, 60)));
  }

  for (const auto& tt : doc.task_types) {
    for (const auto& dt : doc.device_types) {
      std::int64_t wcet = feasible ? pick<std::int64_t>(rng, 20, 120) : pick<std::int64_t>(rng, 300, 900);
      if (dt.name == "Cpu2") wcet = std::max<std::int64_t>(1, wcet / 2);
      doc.capabilities.push_back({tt.name, dt.name, wcet, {{"memory", 1.0}}});
    }
  }

  int m = pick(rng, 1, 8);
  for (int f = 0; f < m; ++f) {
    oaam::FunctionSpec fn;
    fn.name = "F" + std::to_string(f);
    fn.priority = f + 1;
    fn.dal = static_cast<oaam::Dal>(pick(rng, 0, 4));
    int shape = pick(rng, 0, 2);
    if (shape == 2) {
      fn.tasks = {{"a", "Src", false}, {"b", "Src", false}, {"s", "Sum", false}, {"o", "Out", false}};
      fn.signals = {sig("a", 0, "s", 0), sig("b", 0, "s", 1), sig("s", 0, "o", 0)};
    } else {
      fn.tasks.push_back({"t0", "Src", false});
      int mids = pick(rng, 0, 2);
      static const char* kMid[] = {"Two", "Half", "Cap"};
      for (int i = 1; i <= mids; ++i) {
        fn.tasks.push_back({"t" + std::to_string(i), kMid[pick(rng, 0, 2)], false});
      }
      fn.tasks.push_back({"t" + std::to_string(mids + 1), "Out", false});
      for (int i = 0; i <= mids; ++i) fn.signals.push_back(sig("t" + std::to_string(i), 0, "t" + std::to_string(i + 1), 0));
    }
    int per = pick(rng, 0, 9);
    if (per == 0) {
      fn.period.reset();
      for (auto& t : fn.tasks) t.best_effort = true;
    } else {
      fn.period = per < 6 ? 1000 : 2000;
      if (chance(rng, 0.3)) fn.latency_req = 100000;
    }
    static const oaam::Severity kSev[] = {oaam::Severity::MIN, oaam::Severity::MAJ, oaam::Severity::NSE,
                                          oaam::Severity::HAZ};
    if (chance(rng, 0.8)) {
      auto sev = kSev[pick(rng, 0, 3)];
      fn.failure_conditions.push_back({"loss of " + fn.name, sev, doc.safety_policy.limit_for(sev)});
    }
    doc.functions.push_back(fn);
  }
  return doc;
}

ScenarioDoc scale_scenario(int devices, int tasks) {
  ScenarioDoc doc;
  common_types(doc);
  doc.timing.mif = 1000;
  doc.timing.maf = 1000;
  doc.device_types.push_back({"Cpu", 1e-5, {{"memory", 64.0}}});
  for (const auto& tt : doc.task_types) doc.capabilities.push_back({tt.name, "Cpu", 20, {{"memory", 1.0}}});
  for (int i = 0; i < devices; ++i) {
    oaam::DeviceSpec d;
    char buf[16];
    std::snprintf(buf, sizeof buf, "C%02d", i);
    d.name = buf;
    d.type = "Cpu";
    d.is_pafa_module = true;
    doc.devices.push_back(d);
  }
  for (int i = 0; i < devices; ++i) {
    doc.connections.push_back(link(doc.devices[i].name, doc.devices[(i + 1) % devices].name, 10));
    if (i % 5 == 0) doc.connections.push_back(link(doc.devices[i].name, doc.devices[(i + 7) % devices].name, 10));
  }
  for (int f = 0; f * 4 < tasks; ++f) {
    oaam::FunctionSpec fn;
    char buf[16];
    std::snprintf(buf, sizeof buf, "F%03d", f);
    fn.name = buf;
    fn.priority = f + 1;
    fn.period = 1000;
    fn.tasks = {{"c", "Src", false}, {"g", "Two", false}, {"h", "Half", false}, {"o", "Out", false}};
    fn.signals = {sig("c", 0, "g", 0), sig("g", 0, "h", 0), sig("h", 0, "o", 0)};
    fn.failure_conditions.push_back({"loss of " + fn.name, oaam::Severity::MIN, 1e-3});
    doc.functions.push_back(fn);
  }
  return doc;
}

// ---------------------------------------------------------------- fault trees

qualifier::FaultTree random_tree(std::mt19937_64& rng, int max_events) {
  qualifier::FaultTree t;
  int n = pick(rng, 1, max_events);
  std::uniform_real_distribution<double> lg(std::log(1e-4), std::log(0.4));
  for (int i = 0; i < n; ++i) t.add_event("e" + std::to_string(i), std::exp(lg(rng)));
  std::vector<int> roots;
  for (int i = 0; i < n; ++i) roots.push_back(t.basic(i));
  // Shared events: a few extra leaves referring to already used events.
  for (int extra = pick(rng, 0, n / 2); extra > 0; --extra) roots.push_back(t.basic(pick(rng, 0, n - 1)));
  std::shuffle(roots.begin(), roots.end(), rng);
  while (roots.size() > 1) {
    std::size_t k = std::min<std::size_t>(roots.size(), pick<std::size_t>(rng, 2, 3));
    std::vector<int> kids(roots.end() - static_cast<long>(k), roots.end());
    roots.resize(roots.size() - k);
    auto g = chance(rng, 0.5) ? qualifier::FaultTree::Gate::And : qualifier::FaultTree::Gate::Or;
    roots.insert(roots.begin() + static_cast<long>(pick<std::size_t>(rng, 0, roots.size())), t.gate(g, kids));
  }
  t.top = roots.front();
  return t;
}

namespace {

bool node_fails(const qualifier::FaultTree& t, int node, unsigned mask) {
  const auto& nd = t.nodes[static_cast<std::size_t>(node)];
  switch (nd.gate) {
    case qualifier::FaultTree::Gate::Basic: return (mask >> nd.event) & 1u;
    case qualifier::FaultTree::Gate::And:
      for (int c : nd.children) {
        if (!node_fails(t, c, mask)) return false;
      }
      return true;
    case qualifier::FaultTree::Gate::Or:
      for (int c : nd.children) {
        if (node_fails(t, c, mask)) return true;
      }
      return false;
  }
  return false;
}

}  // namespace

double brute_force_probability(const qualifier::FaultTree& t) {
  const auto n = t.events.size();
  // Kahan summation keeps the oracle well inside 1e-12.
  double sum = 0.0, comp = 0.0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (!node_fails(t, t.top, mask)) continue;
    double p = 1.0;
    for (std::size_t i = 0; i < n; ++i) p *= ((mask >> i) & 1u) ? t.probabilities[i] : 1.0 - t.probabilities[i];
    double y = p - comp;
    double s = sum + y;
    comp = (s - sum) - y;
    sum = s;
  }
  return sum;
}

std::set<std::vector<int>> brute_force_cut_sets(const qualifier::FaultTree& t) {
  const auto n = t.events.size();
  std::set<std::vector<int>> out;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (!node_fails(t, t.top, mask)) continue;
    bool minimal = true;
    for (std::size_t i = 0; i < n && minimal; ++i) {
      if (((mask >> i) & 1u) && node_fails(t, t.top, mask & ~(1u << i))) minimal = false;
    }
    if (!minimal) continue;
    std::vector<int> cs;
    for (std::size_t i = 0; i < n; ++i) {
      if ((mask >> i) & 1u) cs.push_back(static_cast<int>(i));
    }
    out.insert(cs);
  }
  return out;
}

// ---------------------------------------------------------------- query oracle

meta::ModelStore random_abc_store(std::mt19937_64& rng) {
  meta::ModelStore s;
  using meta::Kind;
  using meta::Multiplicity;
  s.define_class("C", {{"z", Kind::Int}}, {});
  s.define_class("B", {{"y", Kind::Int}, {"tag", Kind::Text}}, {{"c", "C", Multiplicity::One, false}});
  s.define_class("A", {{"name", Kind::Text}, {"x", Kind::Int}, {"w", Kind::Real}, {"flag", Kind::Bool}},
                 {{"bs", "B", Multiplicity::Many, false}});
  std::vector<meta::ObjectId> as, bs, cs;
  int total = pick(rng, 0, 20);
  for (int i = 0; i < total; ++i) {
    switch (pick(rng, 0, 2)) {
      case 0: {
        auto id = s.instantiate("C");
        s.write(id, "z", std::int64_t{pick(rng, -3, 3)});
        cs.push_back(id);
        break;
      }
      case 1: {
        auto id = s.instantiate("B");
        s.write(id, "y", std::int64_t{pick(rng, 0, 9)});
        s.write(id, "tag", std::string(pick(rng, 0, 1) ? "red" : "blue"));
        if (!cs.empty() && chance(rng, 0.7)) s.write(id, "c", meta::ObjectRef{cs[pick<std::size_t>(rng, 0, cs.size() - 1)]});
        bs.push_back(id);
        break;
      }
      default: {
        auto id = s.instantiate("A");
        s.write(id, "name", "n" + std::to_string(pick(rng, 0, 4)));
        s.write(id, "x", std::int64_t{pick(rng, -5, 5)});
        s.write(id, "w", pick(rng, 0, 10) * 0.5);
        s.write(id, "flag", chance(rng, 0.5));
        std::vector<meta::Value> refs;
        for (auto b : bs) {
          if (chance(rng, 0.4)) refs.emplace_back(meta::ObjectRef{b});
        }
        std::shuffle(refs.begin(), refs.end(), rng);
        s.write_many(id, "bs", refs);
        as.push_back(id);
        break;
      }
    }
  }
  return s;
}

namespace {

const char* kOps[] = {"=", "!=", "<", "<=", ">", ">="};

AbcPred int_pred(std::mt19937_64& rng, std::vector<std::string> path, int lo, int hi) {
  return {std::move(path), kOps[pick(rng, 0, 5)], std::int64_t{pick(rng, lo, hi)}};
}

AbcPred pred_for(std::mt19937_64& rng, const std::string& cls) {
  if (cls == "C") return int_pred(rng, {"z"}, -4, 4);
  if (cls == "B") {
    switch (pick(rng, 0, 2)) {
      case 0: return int_pred(rng, {"y"}, -1, 10);
      case 1: return {{"tag"}, kOps[pick(rng, 0, 1)], std::string(chance(rng, 0.5) ? "red" : "blue")};
      default: return int_pred(rng, {"c", "z"}, -4, 4);
    }
  }
  switch (pick(rng, 0, 6)) {
    case 0: return int_pred(rng, {"x"}, -6, 6);
    case 1: return {{"w"}, kOps[pick(rng, 0, 5)], pick(rng, 0, 10) * 0.5};
    case 2: return {{"w"}, kOps[pick(rng, 0, 5)], std::int64_t{pick(rng, 0, 5)}};
    case 3: return {{"flag"}, kOps[pick(rng, 0, 1)], chance(rng, 0.5)};
    case 4: return {{"name"}, kOps[pick(rng, 0, 1)], "n" + std::to_string(pick(rng, 0, 5))};
    case 5: return int_pred(rng, {"bs", "y"}, -1, 10);
    default: return int_pred(rng, {"bs", "c", "z"}, -4, 4);
  }
}

std::string render_rhs(const std::variant<std::int64_t, double, std::string, bool>& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&v)) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", *d);
    return buf;
  }
  if (const auto* s = std::get_if<std::string>(&v)) return "\"" + *s + "\"";
  return std::get<bool>(v) ? "true" : "false";
}

template <typename T>
bool cmp(const T& l, const std::string& op, const T& r) {
  if (op == "=") return l == r;
  if (op == "!=") return l != r;
  if (op == "<") return l < r;
  if (op == "<=") return l <= r;
  if (op == ">") return l > r;
  return l >= r;
}

bool value_matches(const meta::Value& v, const AbcPred& p) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return cmp(*i, p.op, std::get<std::int64_t>(p.rhs));
  if (const auto* d = std::get_if<double>(&v)) {
    double r = std::holds_alternative<double>(p.rhs) ? std::get<double>(p.rhs)
                                                     : static_cast<double>(std::get<std::int64_t>(p.rhs));
    return cmp(*d, p.op, r);
  }
  if (const auto* s = std::get_if<std::string>(&v)) return cmp(*s, p.op, std::get<std::string>(p.rhs));
  if (const auto* b = std::get_if<bool>(&v)) return cmp(*b, p.op, std::get<bool>(p.rhs));
  return false;
}

// Collect every value at the end of the path, then ask whether any matches.
void collect(const meta::ModelStore& s, meta::ObjectId id, const std::vector<std::string>& path, std::size_t i,
             std::vector<meta::Value>& out) {
  for (const auto& v : s.read(id, path[i])) {
    if (i + 1 == path.size()) {
      out.push_back(v);
    } else {
      collect(s, std::get<meta::ObjectRef>(v).id, path, i + 1, out);
    }
  }
}

bool satisfies(const meta::ModelStore& s, meta::ObjectId id, const std::optional<AbcPred>& p) {
  if (!p) return true;
  std::vector<meta::Value> vals;
  collect(s, id, p->path, 0, vals);
  return std::any_of(vals.begin(), vals.end(), [&](const auto& v) { return value_matches(v, *p); });
}

}  // namespace

std::string AbcQuery::text() const {
  std::string out;
  for (const auto& st : steps) {
    out += "/" + st.name;
    if (st.pred) {
      out += "[";
      for (std::size_t i = 0; i < st.pred->path.size(); ++i) out += (i ? "." : "") + st.pred->path[i];
      out += st.pred->op + render_rhs(st.pred->rhs) + "]";
    }
  }
  if (index) out += "#" + std::to_string(*index);
  return out;
}

AbcQuery random_abc_query(std::mt19937_64& rng) {
  AbcQuery q;
  auto maybe = [&](const std::string& cls) -> std::optional<AbcPred> {
    if (chance(rng, 0.5)) return pred_for(rng, cls);
    return std::nullopt;
  };
  switch (pick(rng, 0, 7)) {
    case 0: q.steps = {{"C", maybe("C")}}; break;
    case 1: q.steps = {{"B", maybe("B")}}; break;
    case 2: q.steps = {{"A", maybe("A")}}; break;
    case 3: q.steps = {{"A", maybe("A")}, {"bs", maybe("B")}}; break;
    case 4: q.steps = {{"A", maybe("A")}, {"bs", maybe("B")}, {"c", maybe("C")}}; break;
    case 5: q.steps = {{"B", maybe("B")}, {"c", maybe("C")}, {"z", std::nullopt}}; break;
    case 6: {
      static const char* kAttr[] = {"name", "x", "w", "flag"};
      q.steps = {{"A", maybe("A")}, {kAttr[pick(rng, 0, 3)], std::nullopt}};
      break;
    }
    default: q.steps = {{"A", maybe("A")}, {"bs", maybe("B")}, {pick(rng, 0, 1) ? "y" : "tag", std::nullopt}}; break;
  }
  if (chance(rng, 0.3)) q.index = pick(rng, 0, 6);
  return q;
}

std::vector<meta::Value> naive_abc_eval(const AbcQuery& q, const meta::ModelStore& s) {
  std::vector<meta::Value> cur;
  for (const auto& [id, obj] : s.objects()) {
    if (obj.cls->name == q.steps[0].name && satisfies(s, id, q.steps[0].pred)) cur.emplace_back(meta::ObjectRef{id});
  }
  for (std::size_t i = 1; i < q.steps.size(); ++i) {
    std::vector<meta::Value> next;
    for (const auto& v : cur) {
      for (const auto& w : s.read(std::get<meta::ObjectRef>(v).id, q.steps[i].name)) {
        if (const auto* r = std::get_if<meta::ObjectRef>(&w); r && !satisfies(s, r->id, q.steps[i].pred)) continue;
        next.push_back(w);
      }
    }
    cur = std::move(next);
  }
  if (q.index) {
    if (*q.index < 0 || static_cast<std::size_t>(*q.index) >= cur.size()) return {};
    return {cur[static_cast<std::size_t>(*q.index)]};
  }
  return cur;
}

// ---------------------------------------------------------------- logs

std::vector<sim::LogLine> of_kind(const std::vector<sim::LogLine>& log, const std::string& kind) {
  std::vector<sim::LogLine> out;
  for (const auto& l : log) {
    if (l.kind == kind) out.push_back(l);
  }
  return out;
}

std::string field(const std::string& detail, const std::string& key) {
  std::istringstream in(detail);
  std::string tok;
  while (in >> tok) {
    if (tok.rfind(key + "=", 0) == 0) return tok.substr(key.size() + 1);
  }
  return {};
}

std::map<std::int64_t, std::map<std::string, std::string>> live_digests(const std::vector<sim::LogLine>& log) {
  std::map<std::int64_t, std::map<std::string, std::string>> out;
  for (const auto& l : log) {
    if (l.kind == "EXEC") out[l.cycle][l.module] = field(l.detail, "live");
  }
  return out;
}

std::int64_t agreement_violation(const std::vector<sim::LogLine>& log) {
  for (const auto& [cycle, mods] : live_digests(log)) {
    std::set<std::string> seen;
    for (const auto& [_, d] : mods) {
      if (d != "-") seen.insert(d);
    }
    if (seen.size() > 1) return cycle;
  }
  return -1;
}

std::int64_t shadow_emissions(const std::vector<sim::LogLine>& log) {
  std::int64_t total = 0;
  for (const auto& l : log) {
    if (l.kind != "EXEC") continue;
    auto e = field(l.detail, "emitted");
    total += std::stoll(e.substr(e.find('/') + 1));
  }
  return total;
}

}  // namespace support
