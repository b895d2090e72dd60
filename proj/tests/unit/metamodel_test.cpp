#include "doctest.h"

#include "pafa/metamodel.hpp"

using namespace pafa;
using namespace pafa::meta;

namespace {

ModelStore device_store() {
  ModelStore s;
  s.define_class("Device", {{"name", Kind::Text}, {"failRate", Kind::Real}}, {});
  return s;
}

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a pafa::Error");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("define_class registers members") {
  ModelStore s;
  const auto& c = s.define_class("Device", {{"name", Kind::Text}, {"failRate", Kind::Real}}, {});
  CHECK(c.attributes.size() == 2);
  CHECK(c.references.empty());
  CHECK(c.slot_index("failRate") == 1u);
}

TEST_CASE("define_class rejects duplicates and unknown targets") {
  auto s = device_store();
  CHECK(kind_of([&] { s.define_class("Device", {}, {}); }) == ErrorKind::DuplicateClass);
  CHECK(kind_of([&] { s.define_class("Host", {}, {{"g", "Ghost"}}); }) == ErrorKind::UnknownTargetClass);
  CHECK(kind_of([&] { s.define_class("Dup", {{"a", Kind::Int}, {"a", Kind::Real}}, {}); }) ==
        ErrorKind::DuplicateMember);
  // failed definitions leave no trace
  CHECK(s.find_class("Host") == nullptr);
  CHECK(s.find_class("Dup") == nullptr);
}

TEST_CASE("instantiate hands out ids and defaults") {
  auto s = device_store();
  CHECK(s.instantiate("Device") == 1);
  CHECK(s.instantiate("Device") == 2);
  CHECK(s.get_real(2, "failRate") == 0.0);
  CHECK(s.get_text(2, "name").empty());

  auto other = device_store();
  const auto& foreign = other.get_class("Device");
  CHECK(kind_of([&] { s.instantiate(foreign); }) == ErrorKind::UnknownClass);
  CHECK(kind_of([&] { s.instantiate("Ghost"); }) == ErrorKind::UnknownClass);
}

TEST_CASE("enum default is the first literal") {
  ModelStore s;
  s.define_class("D", {{"status", Kind::EnumRef, Multiplicity::One, {"Healthy", "Failed"}}}, {});
  auto id = s.instantiate("D");
  CHECK(s.get_enum(id, "status") == "Healthy");
  s.write(id, "status", EnumLiteral{"Failed"});
  CHECK(s.get_enum(id, "status") == "Failed");
  CHECK(kind_of([&] { s.write(id, "status", EnumLiteral{"Broken"}); }) == ErrorKind::KindMismatch);
}

TEST_CASE("write and read slots") {
  auto s = device_store();
  auto d = s.instantiate("Device");
  s.write(d, "failRate", 1e-5);
  CHECK(s.get_real(d, "failRate") == 1e-5);
  CHECK(kind_of([&] { s.write(d, "failRate", std::string("x")); }) == ErrorKind::KindMismatch);
  CHECK(kind_of([&] { s.write(d, "nope", 1.0); }) == ErrorKind::UnknownMember);
  CHECK(kind_of([&] { s.read(99, "name"); }) == ErrorKind::UnknownObject);
  CHECK(kind_of([&] { s.write_many(d, "name", {}); }) == ErrorKind::MultiplicityViolation);
}

TEST_CASE("many references keep order") {
  ModelStore s;
  s.define_class("T", {}, {});
  s.define_class("H", {}, {{"tasks", "T", Multiplicity::Many}});
  auto h = s.instantiate("H");
  auto a = s.instantiate("T"), b = s.instantiate("T"), c = s.instantiate("T");
  s.append(h, "tasks", ObjectRef{a});
  s.append(h, "tasks", ObjectRef{b});
  s.append(h, "tasks", ObjectRef{c});
  CHECK(s.get_refs(h, "tasks") == std::vector<ObjectId>{a, b, c});

  s.remove(b);
  CHECK(s.get_refs(h, "tasks") == std::vector<ObjectId>{a, c});
}

TEST_CASE("containment") {
  ModelStore s;
  s.define_class("Leaf", {}, {});
  s.define_class("Box", {}, {{"items", "Leaf", Multiplicity::Many, true}, {"inner", "Box", Multiplicity::One, true}});
  auto outer = s.instantiate("Box"), inner = s.instantiate("Box"), leaf = s.instantiate("Leaf");
  s.write(outer, "inner", ObjectRef{inner});
  s.append(inner, "items", ObjectRef{leaf});
  CHECK(s.container_of(leaf) == inner);
  CHECK(s.container_of(inner) == outer);
  CHECK(kind_of([&] { s.write(inner, "inner", ObjectRef{outer}); }) == ErrorKind::ContainmentCycle);

  s.remove(outer);
  CHECK(s.size() == 0);
}

TEST_CASE("snapshot and digest") {
  ModelStore empty;
  CHECK(empty.snapshot().digest() == empty.digest());

  auto s = device_store();
  auto d = s.instantiate("Device");
  s.write(d, "failRate", 1e-5);
  auto snap = s.snapshot();
  CHECK(snap.digest() == s.digest());
  s.write(d, "failRate", 2e-5);
  CHECK(snap.digest() != s.digest());
  CHECK(snap.get_real(d, "failRate") == 1e-5);

  // snapshot is independent in both directions
  snap.instantiate("Device");
  CHECK(s.size() == 1);
}

TEST_CASE("digest depends only on the operation sequence") {
  auto build = [](double rate) {
    auto s = device_store();
    auto d = s.instantiate("Device");
    s.write(d, "name", std::string("d1"));
    s.write(d, "failRate", rate);
    return s;
  };
  CHECK(build(1e-5).digest() == build(1e-5).digest());
  CHECK(build(1e-5).digest() != build(1.0000000000000002e-5).digest());
  // Pinned: the serialization is part of the contract across runs.
  CHECK(build(1e-5).canonical_serialization() == build(1e-5).canonical_serialization());
  CHECK(to_hex(build(1e-5).digest()).size() == 64);
}

TEST_CASE("version counts mutations") {
  auto s = device_store();
  auto v0 = s.version();
  auto d = s.instantiate("Device");
  s.write(d, "failRate", 1.0);
  CHECK(s.version() > v0);
}

TEST_CASE("check_constraints") {
  std::vector<Constraint> cons{{"nonNegative", "Device", "failRate >= 0"}};
  CHECK(check_constraints(ModelStore{}, {}).empty());
  CHECK(check_constraints(device_store(), cons).empty());

  auto s = device_store();
  std::vector<double> rates{-1.0, 1e-5, -2.0};
  for (double r : rates) s.write(s.instantiate("Device"), "failRate", r);
  auto v = check_constraints(s, cons);
  // brute-force expectation: every object evaluated individually
  std::vector<ObjectId> expected;
  for (const auto& [id, _] : s.objects()) {
    if (s.get_real(id, "failRate") < 0) expected.push_back(id);
  }
  REQUIRE(v.size() == expected.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK(v[i].object == expected[i]);
    CHECK(v[i].type == Violation::Type::Failed);
    CHECK(v[i].constraint == "nonNegative");
  }

  auto bad = check_constraints(s, {{"typo", "Device", "failrate >= 0"}});
  REQUIRE(bad.size() == 3);
  CHECK(bad[0].type == Violation::Type::EvalError);
  auto broken = check_constraints(s, {{"syntax", "Device", "failRate >="}});
  REQUIRE(broken.size() == 1);
  CHECK(broken[0].type == Violation::Type::EvalError);
}
