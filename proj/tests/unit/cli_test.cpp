#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "pafa/config.hpp"
#include "pafa/planner.hpp"
#include "pafa/qualifier.hpp"
#include "pafa/report.hpp"
#include "pafa/simkernel.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace pafa;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result cli(const std::string& args) {
  std::string cmd = std::string(PAFA_CLI) + " " + args + " 2>/dev/null";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("pafa_cli_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

void write(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

}  // namespace

TEST_CASE("validate") {
  CHECK(cli("validate " + support::scenario_path("fig3")).code == 0);
  TempDir tmp;
  auto doc = support::shipped("minimal");
  doc.functions[0].tasks[0].task_type = "Ghost";
  write(tmp / "bad.json", oaam::write_scenario(doc));
  CHECK(cli("validate " + (tmp / "bad.json")).code == 1);
  doc = support::shipped("minimal");
  doc.functions[0].period = 1500;
  write(tmp / "period.json", oaam::write_scenario(doc));
  CHECK(cli("validate " + (tmp / "period.json")).code == 1);
  write(tmp / "broken.json", "{not json");
  CHECK(cli("validate " + (tmp / "broken.json")).code == 1);
}

TEST_CASE("exit codes for usage and io errors") {
  CHECK(cli("").code == 2);
  CHECK(cli("frobnicate").code == 2);
  CHECK(cli("run " + support::scenario_path("minimal")).code == 2);  // --cycles missing
  CHECK(cli("run " + support::scenario_path("minimal") + " --cycles -3").code == 2);
  CHECK(cli("validate /nonexistent/x.json").code == 3);
  CHECK(cli("--help").code == 0);
}

TEST_CASE("plan and qualify through files match the library") {
  TempDir tmp;
  for (const char* name : {"duplex", "fig3", "shared_switch"}) {
    INFO(name);
    auto doc = support::shipped(name);
    auto planned = planner::plan(doc);
    REQUIRE(planned.config);
    auto cfg = tmp / (std::string(name) + ".cfg.json");
    REQUIRE(cli("plan " + support::scenario_path(name) + " --out " + cfg).code == 0);
    CHECK(support::read_file(cfg) == to_json(*planned.config));

    auto q = qualifier::qualify(*planned.config, oaam::build_store(doc), doc.safety_policy, doc.timing);
    auto art = tmp / (std::string(name) + ".q.json");
    auto r = cli("qualify " + support::scenario_path(name) + " --config " + cfg + " --out " + art);
    CHECK(r.code == (q.verdict == qualifier::Verdict::Accept ? 0 : 1));
    CHECK(support::read_file(art) == q.artifact);
  }
}

TEST_CASE("shared switch is rejected with the switch as a single point of failure") {
  TempDir tmp;
  auto cfg = tmp / "cfg.json";
  REQUIRE(cli("plan " + support::scenario_path("shared_switch") + " --out " + cfg).code == 0);
  auto r = cli("qualify " + support::scenario_path("shared_switch") + " --config " + cfg);
  CHECK(r.code == 1);
  auto art = nlohmann::json::parse(r.out);
  CHECK(art["verdict"] == "Reject");
  CHECK(r.out.find("\"S\"") != std::string::npos);
}

TEST_CASE("tampered configuration is rejected") {
  TempDir tmp;
  auto cfg = tmp / "cfg.json";
  REQUIRE(cli("plan " + support::scenario_path("duplex") + " --out " + cfg).code == 0);
  auto j = nlohmann::json::parse(support::read_file(cfg));
  j["version"] = j["version"].get<int>() + 1;
  write(cfg, j.dump());
  CHECK(cli("qualify " + support::scenario_path("duplex") + " --config " + cfg).code == 1);
}

TEST_CASE("run is reproducible and matches the library") {
  auto path = support::scenario_path("duplex");
  auto a = cli("run " + path + " --cycles 200 --seed 7");
  auto b = cli("run " + path + " --cycles 200 --seed 7");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out == to_hex(sim::run(support::shipped("duplex"), 200, 7).digest()) + "\n");
}

TEST_CASE("report is a function of log and scenario") {
  TempDir tmp;
  auto path = support::scenario_path("duplex");
  REQUIRE(cli("run " + path + " --cycles 150 --log " + (tmp / "run.log")).code == 0);
  auto text = support::read_file(tmp / "run.log");
  CHECK(text == sim::run(support::shipped("duplex"), 150).text());

  auto r1 = cli("report --log " + (tmp / "run.log") + " --scenario " + path);
  auto r2 = cli("report --log " + (tmp / "run.log") + " --scenario " + path);
  REQUIRE(r1.code == 0);
  CHECK(r1.out == r2.out);
  CHECK(r1.out == report::make_report(report::parse_log(text), support::shipped("duplex")));
  CHECK_NOTHROW(nlohmann::json::parse(r1.out));

  write(tmp / "junk.log", "hello\n");
  CHECK(cli("report --log " + (tmp / "junk.log") + " --scenario " + path).code == 1);
  CHECK_THROWS_WITH_AS(report::parse_log("c=1 m=M1 k=X\n"), doctest::Contains("ParseError"), Error);
}
