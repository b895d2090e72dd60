#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pafa/config.hpp"
#include "pafa/error.hpp"
#include "pafa/oaam.hpp"
#include "pafa/planner.hpp"
#include "pafa/qualifier.hpp"
#include "pafa/report.hpp"
#include "pafa/simkernel.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;
constexpr int kIo = 3;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_out(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw IoError("cannot write " + path);
}

pafa::oaam::ScenarioDoc load(const std::string& path) { return pafa::oaam::parse_scenario(read_file(path)); }

int cmd_validate(const std::string& path) {
  auto doc = load(path);
  pafa::oaam::build_store(doc);
  auto violations = pafa::oaam::validate_semantics(doc);
  for (const auto& v : violations) std::cerr << v.kind << " " << v.element << ": " << v.detail << "\n";
  return violations.empty() ? kOk : kFailure;
}

int cmd_plan(const std::string& path, const std::string& out) {
  auto outcome = pafa::planner::plan(load(path));
  for (const auto& u : outcome.unsatisfied) std::cerr << "unsatisfied " << u.function << ": " << u.reason << "\n";
  if (!outcome.config) {
    std::cerr << "outcome " << pafa::planner::to_string(outcome.kind) << "\n";
    return kFailure;
  }
  write_out(out, pafa::to_json(*outcome.config));
  return kOk;
}

int cmd_qualify(const std::string& path, const std::string& config_path, const std::string& out) {
  auto doc = load(path);
  auto config = pafa::configuration_from_json(read_file(config_path));
  auto store = pafa::oaam::build_store(doc);
  auto result = pafa::qualifier::qualify(config, store, doc.safety_policy, doc.timing);
  write_out(out, result.artifact);
  for (const auto& f : result.findings) std::cerr << f.check << " " << f.element << ": " << f.detail << "\n";
  return result.verdict == pafa::qualifier::Verdict::Accept ? kOk : kFailure;
}

int cmd_run(const std::string& path, std::int64_t cycles, std::uint64_t seed, const std::string& log_path) {
  auto doc = load(path);
  std::cerr << "seed " << seed << "\n";
  auto log = pafa::sim::run(doc, cycles, seed);
  if (!log_path.empty()) write_out(log_path, log.text());
  std::cout << pafa::to_hex(log.digest()) << "\n";
  return kOk;
}

int cmd_report(const std::string& log_path, const std::string& scenario, const std::string& out) {
  auto lines = pafa::report::parse_log(read_file(log_path));
  write_out(out, pafa::report::make_report(lines, load(scenario)));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plug&Fly avionics platform tools"};
  app.require_subcommand(1);

  std::string scenario, out, config, log_path;
  std::int64_t cycles = 0;
  std::uint64_t seed = 0;

  auto* validate = app.add_subcommand("validate", "load and validate a scenario");
  validate->add_option("scenario", scenario)->required();

  auto* plan = app.add_subcommand("plan", "plan a configuration for a scenario");
  plan->add_option("scenario", scenario)->required();
  plan->add_option("--out", out);

  auto* qualify = app.add_subcommand("qualify", "qualify a configuration against a scenario");
  qualify->add_option("scenario", scenario)->required();
  qualify->add_option("--config", config)->required();
  qualify->add_option("--out", out);

  auto* run = app.add_subcommand("run", "simulate a scenario");
  run->add_option("scenario", scenario)->required();
  run->add_option("--cycles", cycles)->required()->check(CLI::NonNegativeNumber);
  run->add_option("--seed", seed);
  run->add_option("--log", log_path);

  auto* report = app.add_subcommand("report", "summarize an event log");
  report->add_option("--log", log_path)->required();
  report->add_option("--scenario", scenario)->required();
  report->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*validate) return cmd_validate(scenario);
    if (*plan) return cmd_plan(scenario, out);
    if (*qualify) return cmd_qualify(scenario, config, out);
    if (*run) return cmd_run(scenario, cycles, seed, log_path);
    if (*report) return cmd_report(log_path, scenario, out);
  } catch (const IoError& e) {
    std::cerr << e.what() << "\n";
    return kIo;
  } catch (const pafa::Error& e) {
    std::cerr << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
