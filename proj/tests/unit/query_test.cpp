#include "doctest.h"

#include <random>

#include "pafa/query.hpp"
#include "support.hpp"

using namespace pafa;
using namespace pafa::meta;
using namespace pafa::query;

namespace {

ModelStore devices(const std::vector<double>& rates) {
  ModelStore s;
  s.define_class("Task", {{"wcet", Kind::Int}}, {});
  s.define_class("Device", {{"name", Kind::Text}, {"failRate", Kind::Real}},
                 {{"hostedTasks", "Task", Multiplicity::Many}});
  int i = 0;
  for (double r : rates) {
    auto d = s.instantiate("Device");
    s.write(d, "name", "d" + std::to_string(++i));
    s.write(d, "failRate", r);
  }
  return s;
}

std::vector<ObjectId> ids(const std::vector<Value>& vals) {
  std::vector<ObjectId> out;
  for (const auto& v : vals) out.push_back(std::get<ObjectRef>(v).id);
  return out;
}

}  // namespace

TEST_CASE("parse_query shapes") {
  auto q = parse_query("/Device[failRate<=1e-5]");
  REQUIRE(q.segments.size() == 1);
  REQUIRE(q.segments[0].predicate);
  CHECK(q.segments[0].predicate->op == CompareOp::Le);
  CHECK(std::get<double>(q.segments[0].predicate->rhs) == 1e-5);

  auto q2 = parse_query("/Device/hostedTasks[wcet>500]#0");
  CHECK(q2.segments.size() == 2);
  CHECK(q2.index == 0);
  CHECK(q2.segments[1].predicate->path == std::vector<std::string>{"wcet"});
}

TEST_CASE("syntax errors carry offsets") {
  try {
    parse_query("/Device[name=]");
    FAIL("no error");
  } catch (const SyntaxError& e) {
    CHECK(e.offset() == 13);
  }
  CHECK_THROWS_AS(parse_query("Device"), SyntaxError);
  CHECK_THROWS_AS(parse_query("/Device[a.b.c.d=1]"), SyntaxError);
  CHECK_THROWS_AS(parse_query("/Device#"), SyntaxError);
  CHECK_THROWS_AS(parse_query("/Device[x=1] trailing"), SyntaxError);
}

TEST_CASE("render round-trips") {
  for (const char* text : {"/Device[failRate<=1e-05]", "/Device/hostedTasks[wcet>500]#0", "/A[b.c!=\"x\\\"y\"]",
                           "/A[flag=true]/name"}) {
    auto q = parse_query(text);
    CHECK(parse_query(render(q)) == q);
  }
}

TEST_CASE("filter on real attribute") {
  auto s = devices({1e-5, 2e-5, 1e-6});
  CHECK(ids(eval_query("/Device[failRate<=1e-5]", s)) == std::vector<ObjectId>{1, 3});
  CHECK(eval_objects("/Device[name=\"d2\"]", s) == std::vector<ObjectId>{2});
}

TEST_CASE("empty store and out of range index") {
  auto empty = devices({});
  CHECK(eval_query("/Device[failRate<=1e-5]", empty).empty());
  CHECK(eval_query("/Device/hostedTasks", empty).empty());
  auto s = devices({1e-5, 2e-5, 1e-6});
  CHECK(eval_query("/Device#5", s).empty());
  CHECK(ids(eval_query("/Device#1", s)) == std::vector<ObjectId>{2});
}

TEST_CASE("navigation through references and attribute tails") {
  auto s = devices({1e-5});
  auto d = s.instantiate("Device");
  auto t1 = s.instantiate("Task"), t2 = s.instantiate("Task");
  s.write(t1, "wcet", std::int64_t{700});
  s.write(t2, "wcet", std::int64_t{300});
  s.write_many(d, "hostedTasks", {ObjectRef{t2}, ObjectRef{t1}});
  CHECK(ids(eval_query("/Device/hostedTasks[wcet>500]#0", s)) == std::vector<ObjectId>{t1});
  CHECK(eval_query("/Device/hostedTasks/wcet", s) == std::vector<Value>{std::int64_t{300}, std::int64_t{700}});
  CHECK(eval_objects("/Device[hostedTasks.wcet>600]", s) == std::vector<ObjectId>{d});
}

TEST_CASE("schema errors are static") {
  auto s = devices({});
  CHECK_THROWS_WITH_AS(eval_query("/Ghost", s), doctest::Contains("UnknownClass"), Error);
  CHECK_THROWS_WITH_AS(eval_query("/Device[nme=\"a\"]", s), doctest::Contains("UnknownMember"), Error);
  CHECK_THROWS_WITH_AS(eval_query("/Device[name>1]", s), doctest::Contains("KindMismatch"), Error);
  CHECK_THROWS_WITH_AS(eval_query("/Device/name/x", s), doctest::Contains("KindMismatch"), Error);
}

TEST_CASE("random queries agree with the naive filter") {
  std::mt19937_64 rng(20261016);
  int nonempty = 0;
  for (int i = 0; i < 300; ++i) {
    auto store = support::random_abc_store(rng);
    for (int j = 0; j < 5; ++j) {
      auto q = support::random_abc_query(rng);
      INFO(q.text());
      auto got = eval_query(q.text(), store);
      CHECK(got == support::naive_abc_eval(q, store));
      nonempty += !got.empty();
    }
  }
  CHECK(nonempty > 100);
}
