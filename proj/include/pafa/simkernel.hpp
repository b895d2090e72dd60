#pragma once

// Deterministic cycle-driven platform simulation. Every PAFA module hosts a
// live unit, a planner actor, a qualifier actor and a verification unit.
//
// Stepping order inside one cycle:
//   deliver messages -> fault script -> planner actors (monitor, discovery,
//   analyze, plan, own qualification) -> qualifier actors (received
//   proposals) -> consensus steps -> execution units -> beacon + log
// Modules are always visited in ascending name order.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pafa/config.hpp"
#include "pafa/consensus.hpp"
#include "pafa/digest.hpp"
#include "pafa/executor.hpp"
#include "pafa/oaam.hpp"

namespace pafa::sim {

struct LogLine {
  std::int64_t cycle = 0;
  std::string module;  // "-" for platform events
  std::string kind;
  std::string detail;

  std::string text() const;  // without the trailing newline
};

std::optional<LogLine> parse_log_line(const std::string& line);

class EventLog {
 public:
  void add(std::int64_t cycle, const std::string& module, const std::string& kind, const std::string& detail);
  const std::vector<LogLine>& lines() const { return lines_; }
  std::string text() const;
  Digest digest() const;

 private:
  std::vector<LogLine> lines_;
};

class Platform {
 public:
  // Refuses scenarios with semantic violations.
  Platform(oaam::ScenarioDoc scenario, std::uint64_t seed = 0);
  ~Platform();
  Platform(const Platform&) = delete;
  Platform& operator=(const Platform&) = delete;

  void step();
  void run_until(std::int64_t cycle_exclusive);
  std::int64_t cycle() const { return cycle_; }

  // Test hooks, applied at the fault-script stage of the given cycle.
  void schedule(oaam::FaultEvent event);
  void corrupt_shadow(const std::string& module);

  const EventLog& log() const { return log_; }
  std::uint64_t seed() const { return seed_; }

  std::vector<std::string> modules() const;
  bool alive(const std::string& module) const;
  std::optional<std::string> live_digest(const std::string& module) const;
  std::optional<Configuration> live_config(const std::string& module) const;
  Digest view_digest(const std::string& module) const;
  const oaam::Consciousness& view(const std::string& module) const;
  // Elements reachable from the module over healthy devices and links.
  std::set<std::string> beacon(const std::string& module) const;

 private:
  struct Module;
  struct Hello;
  struct DataMessage;

  void deliver();
  void apply_faults();
  void planner_phase(Module& m);
  void qualifier_phase(Module& m);
  void consensus_phase(Module& m);
  void execute_phase(Module& m);
  void end_of_cycle();

  void scan_neighbourhood(Module& m);
  void merge_hello(Module& m, const Hello& hello);
  void monitor(Module& m);
  void send_hello(Module& m);
  bool add_known(Module& m, const oaam::TopologyEvent& ev);
  void plan_and_propose(Module& m, const std::string& reason);
  void start_shadow(Module& m, const Configuration& config, std::int64_t round, const std::string& proposer);
  void clear_shadow(Module& m);
  void send_consensus(const consensus::Envelope& env);

  std::unique_ptr<Module> fresh_module(const std::string& name);
  oaam::ScenarioDoc library() const;
  void recompute_components();
  bool reachable(const std::string& a, const std::string& b) const;
  bool route_healthy(const std::string& src, const std::vector<std::string>& route, const std::string& dst) const;

  oaam::ScenarioDoc truth_;
  std::uint64_t seed_;
  std::int64_t cycle_ = 0;
  EventLog log_;
  std::map<std::string, std::unique_ptr<Module>> modules_;
  std::vector<oaam::FaultEvent> script_;
  std::set<std::string> shadow_faults_;
  std::map<std::string, int> component_;
  std::map<Digest, Configuration> payloads_;

  std::vector<Hello> hello_out_, hello_in_;
  std::vector<consensus::Envelope> cons_out_, cons_in_;
  std::vector<DataMessage> data_out_, data_in_;
};

// Runs a scenario for `cycles` cycles and returns the event log.
EventLog run(const oaam::ScenarioDoc& scenario, std::int64_t cycles, std::uint64_t seed = 0);

// Dataflow value every task of a configuration produces in steady state.
std::map<std::string, double> golden_values(const Configuration& config);

}  // namespace pafa::sim
