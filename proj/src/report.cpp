#include "pafa/report.hpp"

#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "pafa/error.hpp"

namespace pafa::report {

using json = nlohmann::json;

namespace {

// "a=1 b=x" -> {a: 1, b: x}
std::map<std::string, std::string> fields(const std::string& detail) {
  std::map<std::string, std::string> out;
  std::istringstream in(detail);
  std::string tok;
  while (in >> tok) {
    auto eq = tok.find('=');
    if (eq != std::string::npos) out[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty() || s == "-") return out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::vector<sim::LogLine> parse_log(const std::string& text) {
  std::vector<sim::LogLine> out;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    auto l = sim::parse_log_line(line);
    if (!l) throw Error(ErrorKind::ParseError, "log line " + std::to_string(n) + " is malformed");
    out.push_back(std::move(*l));
  }
  return out;
}

std::string make_report(const std::vector<sim::LogLine>& log, const oaam::ScenarioDoc& scenario) {
  Sha256Stream h;
  std::int64_t last_cycle = -1;
  std::map<std::string, std::vector<std::string>> hosted_by_digest;
  std::map<std::int64_t, std::string> switches;  // cycle -> digest
  std::set<std::string> aborts;
  std::int64_t faults = 0;
  json artifacts = json::array();

  for (const auto& l : log) {
    h.update(l.text());
    h.update("\n");
    last_cycle = std::max(last_cycle, l.cycle);
    auto f = fields(l.detail);
    if (l.kind == "PLAN" && f.count("digest") && f.count("hosted")) {
      hosted_by_digest[f["digest"]] = split_list(f["hosted"]);
    } else if (l.kind == "SWITCH") {
      switches[l.cycle] = f["digest"];
    } else if (l.kind == "ABORT") {
      aborts.insert(f["round"] + "/" + f["proposer"]);
    } else if (l.kind == "EVT" && l.module == "-") {
      ++faults;
    } else if (l.kind == "QUALIFY") {
      artifacts.push_back({{"cycle", l.cycle}, {"module", l.module}, {"digest", f["digest"]}, {"verdict", f["verdict"]}});
    }
  }

  std::set<std::string> names;
  for (const auto& fn : scenario.functions) names.insert(fn.name);
  for (const auto& [_, hosted] : hosted_by_digest) names.insert(hosted.begin(), hosted.end());

  json availability = json::object();
  for (const auto& name : names) {
    json spans = json::array();
    bool on = false;
    std::int64_t from = 0;
    for (const auto& [cycle, digest] : switches) {
      const auto& hosted = hosted_by_digest[digest];
      bool now = std::find(hosted.begin(), hosted.end(), name) != hosted.end();
      if (now == on) continue;
      if (on) spans.push_back({{"from", from}, {"to", cycle}});
      on = now;
      from = cycle;
    }
    if (on) spans.push_back({{"from", from}, {"to", last_cycle + 1}});
    availability[name] = spans;
  }

  std::vector<std::string> final_hosted, final_dropped;
  if (!switches.empty()) final_hosted = hosted_by_digest[switches.rbegin()->second];
  for (const auto& name : names) {
    if (std::find(final_hosted.begin(), final_hosted.end(), name) == final_hosted.end()) final_dropped.push_back(name);
  }

  json report;
  report["log_digest"] = to_hex(h.finish());
  report["cycles"] = last_cycle + 1;
  report["summary"] = {{"functions_hosted", final_hosted},
                       {"functions_dropped", final_dropped},
                       {"switches_committed", switches.size()},
                       {"switches_aborted", aborts.size()},
                       {"faults_injected", faults}};
  report["availability"] = availability;
  report["artifacts"] = artifacts;
  return report.dump(2) + "\n";
}

}  // namespace pafa::report
