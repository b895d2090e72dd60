#include "doctest.h"

#include <algorithm>
#include <random>

#include "json.hpp"
#include "pafa/oaam.hpp"
#include "pafa/query.hpp"
#include "support.hpp"

using namespace pafa;
using namespace pafa::oaam;
using json = nlohmann::json;

namespace {

json minimal_json() { return json::parse(support::read_file(support::scenario_path("minimal"))); }

ErrorKind load_error(const json& j) {
  try {
    load_scenario(j.dump());
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("scenario loaded");
  return ErrorKind::InvalidArgument;
}

bool has_violation(const std::vector<Violation>& v, const std::string& kind) {
  return std::any_of(v.begin(), v.end(), [&](const auto& x) { return x.kind == kind; });
}

}  // namespace

TEST_CASE("minimal scenario loads deterministically") {
  auto text = support::read_file(support::scenario_path("minimal"));
  auto a = load_scenario(text);
  auto b = load_scenario(text);
  CHECK(a.store.digest() == b.store.digest());
  // ResourceType, DeviceType, Device, 2 TaskTypes, 2 Capabilities, 3 ResourceAmounts,
  // SystemFunction, 2 BasicTasks, Signal
  CHECK(a.store.size() == 14);
  CHECK(a.store.instances_of("Device").size() == 1);
  CHECK(a.store.instances_of("SystemFunction").size() == 1);
  CHECK(a.timing.mif == 1000);
  CHECK(validate_semantics(a.store, a.timing, a.policy).empty());
}

TEST_CASE("dangling and duplicate names are refused") {
  auto j = minimal_json();
  j["devices"][0]["type"] = "Ghost";
  CHECK(load_error(j) == ErrorKind::DanglingReference);

  j = minimal_json();
  j["functions"].push_back(j["functions"][0]);
  j["functions"][1]["priority"] = 2;
  CHECK(load_error(j) == ErrorKind::DuplicateName);

  j = minimal_json();
  j["functions"][0]["signals"][0]["to"] = "nowhere.0";
  CHECK(load_error(j) == ErrorKind::DanglingReference);

  CHECK_THROWS_WITH_AS(load_scenario("{not json"), doctest::Contains("ParseError"), Error);
}

TEST_CASE("fig3 style function validates") {
  auto doc = support::shipped("fig3");
  CHECK(validate_semantics(doc).empty());
  const auto* fn = doc.function("Elevator");
  REQUIRE(fn != nullptr);
  CHECK(fn->tasks.size() >= 5);
}

TEST_CASE("signal cycle") {
  auto j = minimal_json();
  j["task_types"].push_back({{"name", "G"}, {"kind", "Add"}, {"parameter", 0}});
  j["capabilities"].push_back({{"task_type", "G"}, {"device_type", "Computer"}, {"wcet", 10}, {"consumes", json::object()}});
  auto& f = j["functions"][0];
  f["tasks"].push_back({{"name", "a"}, {"type", "G"}});
  f["tasks"].push_back({{"name", "b"}, {"type", "G"}});
  f["signals"].push_back({{"from", "a.0"}, {"to", "b.0"}});
  f["signals"].push_back({{"from", "b.0"}, {"to", "a.0"}});
  auto v = validate_semantics(parse_scenario(j.dump()));
  CHECK(has_violation(v, "CycleViolation"));
}

TEST_CASE("period must be a multiple of mif") {
  auto j = minimal_json();
  j["functions"][0]["period"] = 1500;
  j["timing"]["maf"] = 3000;
  auto v = validate_semantics(parse_scenario(j.dump()));
  REQUIRE(has_violation(v, "PeriodViolation"));
  CHECK(v[0].element == "Hello");
}

TEST_CASE("port wiring") {
  auto j = minimal_json();
  j["functions"][0]["signals"][0]["to"] = "s.1";
  CHECK(has_violation(validate_semantics(parse_scenario(j.dump())), "PortViolation"));
  j = minimal_json();
  j["functions"][0]["signals"].push_back(j["functions"][0]["signals"][0]);
  CHECK(has_violation(validate_semantics(parse_scenario(j.dump())), "PortViolation"));
}

TEST_CASE("apply_event") {
  auto doc = support::shipped("duplex");
  Consciousness c(build_store(doc));
  auto m2 = find_named(c.store(), "Device", "M2");
  REQUIRE(m2);
  CHECK(c.store().get_enum(*m2, "status") == "Healthy");

  auto v0 = c.version();
  CHECK(c.apply({EventKind::DeviceFailed, "M2"}));
  CHECK(c.store().get_enum(*m2, "status") == "Failed");
  CHECK(c.version() > v0);
  // idempotent: no second mutation
  CHECK_FALSE(c.apply({EventKind::DeviceFailed, "M2"}));
  REQUIRE(c.journal().size() == 1);
  CHECK(c.journal()[0].kind == EventKind::DeviceFailed);

  auto devices = c.store().instances_of("Device").size();
  TopologyEvent add{EventKind::DeviceAdded, "M9"};
  add.device = DeviceSpec{"M9", "Computer", "", std::nullopt, true, false};
  CHECK(c.apply(add));
  CHECK(c.store().instances_of("Device").size() == devices + 1);

  CHECK_THROWS_WITH_AS(c.apply({EventKind::DeviceFailed, "Nope"}), doctest::Contains("UnknownElement"), Error);
  CHECK_THROWS_WITH_AS(c.apply({EventKind::LinkFailed, "Nope"}), doctest::Contains("UnknownElement"), Error);

  CHECK(c.apply({EventKind::LinkFailed, "L12"}));
  auto l12 = find_named(c.store(), "Connection", "L12");
  CHECK(c.store().get_enum(*l12, "status") == "Failed");

  CHECK(c.apply({EventKind::FunctionRemoved, "Cabin"}));
  CHECK_FALSE(find_named(c.store(), "SystemFunction", "Cabin"));
  CHECK(query::eval_query("/SystemFunction", c.store()).size() == 1);
}

TEST_CASE("load save load is a fixpoint") {
  for (const auto& name : support::shipped_names()) {
    INFO(name);
    auto a = load_scenario(support::read_file(support::scenario_path(name)));
    auto text = save_scenario(a.store, a.policy, a.timing, a.fault_script);
    auto b = load_scenario(text);
    CHECK(b.store.digest() == a.store.digest());
    CHECK(save_scenario(b.store, b.policy, b.timing, b.fault_script) == text);
  }
}

TEST_CASE("canonical digest ignores insertion order") {
  std::mt19937_64 rng(5);
  auto doc = support::shipped("duplex");
  auto base = canonical_digest(build_store(doc));
  for (int i = 0; i < 10; ++i) {
    auto shuffled = doc;
    std::shuffle(shuffled.devices.begin(), shuffled.devices.end(), rng);
    std::shuffle(shuffled.connections.begin(), shuffled.connections.end(), rng);
    std::shuffle(shuffled.functions.begin(), shuffled.functions.end(), rng);
    CHECK(canonical_digest(build_store(shuffled)) == base);
  }
}

TEST_CASE("random scenarios are valid") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    auto doc = support::random_scenario(rng, i % 2 == 0);
    auto v = validate_semantics(doc);
    INFO(i << " " << (v.empty() ? "" : v[0].kind + " " + v[0].element + " " + v[0].detail));
    CHECK(v.empty());
    // round trip through the file format
    CHECK(build_store(parse_scenario(write_scenario(doc))).digest() == build_store(doc).digest());
  }
}
