#include "doctest.h"

#include <algorithm>
#include <map>
#include <set>

#include "pafa/consensus.hpp"
#include "pafa/error.hpp"

using namespace pafa;
using namespace pafa::consensus;

namespace {

Digest dg(std::uint8_t b) {
  Digest d{};
  d.fill(b);
  return d;
}

// Modules exchanging messages with a one-cycle delay.
struct Net {
  std::map<std::string, Coordinator> nodes;
  std::map<std::string, LocalStatus> local;
  std::set<std::string> silent;
  std::vector<Envelope> in_flight;
  std::map<std::string, Outcome> outcomes;
  std::map<std::string, std::vector<Proposal>> adopted;
  std::vector<Vote> votes;

  explicit Net(std::vector<std::string> names) {
    for (auto& n : names) nodes.emplace(n, Coordinator(n));
  }

  void send(const std::vector<Envelope>& out) {
    for (const auto& e : out) {
      if (const auto* v = std::get_if<Vote>(&e.message)) votes.push_back(*v);
      in_flight.push_back(e);
    }
  }

  void propose(const std::string& who, Digest d, std::int64_t cycle, std::int64_t activation) {
    std::vector<std::string> all;
    for (auto& [n, _] : nodes) all.push_back(n);
    send(nodes.at(who).propose(d, cycle, activation, all).out);
  }

  void step(std::int64_t cycle) {
    auto delivered = std::move(in_flight);
    in_flight.clear();
    for (auto& [name, c] : nodes) {
      if (silent.count(name)) continue;
      std::vector<Envelope> inbox;
      for (const auto& e : delivered) {
        if (e.to == name) inbox.push_back(e);
      }
      auto s = c.step(cycle, inbox, local[name]);
      if (s.adopted) adopted[name].push_back(*s.adopted);
      if (s.outcome) outcomes[name] = *s.outcome;
      send(s.out);
    }
  }

  void run(std::int64_t from, std::int64_t to) {
    for (auto c = from; c < to; ++c) step(c);
  }

  void all_verified(Digest d) {
    for (auto& [n, _] : nodes) local[n] = LocalStatus{d, false, true, false};
  }
};

}  // namespace

TEST_CASE("activation lead") {
  CHECK(activation_lead(3) == 8);
  CHECK(activation_lead(1) == 6);
}

TEST_CASE("proposal reaches every participant within one cycle") {
  Net net({"M1", "M2", "M3"});
  net.propose("M1", dg(1), 0, 8);
  net.step(1);
  CHECK(net.adopted["M2"].size() == 1);
  CHECK(net.adopted["M3"].size() == 1);
  CHECK(net.adopted["M2"][0].digest == dg(1));
  CHECK(net.nodes.at("M2").busy());
}

TEST_CASE("unanimous yes commits everywhere with one activation") {
  Net net({"M1", "M2", "M3"});
  net.propose("M1", dg(1), 0, 8);
  net.all_verified(dg(1));
  net.run(1, 9);
  REQUIRE(net.outcomes.size() == 3);
  for (auto& [n, o] : net.outcomes) {
    CHECK(o.committed);
    CHECK(o.activation == 8);
    CHECK(o.digest == dg(1));
  }
  CHECK_FALSE(net.nodes.at("M1").busy());
}

TEST_CASE("commit happens before the deadline only") {
  Net net({"M1", "M2"});
  net.propose("M1", dg(1), 0, 8);
  net.step(1);
  // M2 finishes its shadow run late: its vote arrives after activation - 2
  net.local["M1"] = LocalStatus{dg(1), false, true, false};
  net.run(2, 6);
  net.local["M2"] = LocalStatus{dg(1), false, true, false};
  net.run(6, 9);
  REQUIRE(net.outcomes.count("M1"));
  CHECK_FALSE(net.outcomes["M1"].committed);
  CHECK(net.outcomes["M1"].reason == AbortReason::Timeout);
  CHECK(net.outcomes["M1"].missing == std::vector<std::string>{"M2"});
}

TEST_CASE("silent participant times out") {
  Net net({"M1", "M2", "M3"});
  net.propose("M1", dg(1), 0, 8);
  net.all_verified(dg(1));
  net.silent.insert("M3");
  net.run(1, 9);
  REQUIRE(net.outcomes.count("M1"));
  CHECK_FALSE(net.outcomes["M1"].committed);
  CHECK(net.outcomes["M1"].reason == AbortReason::Timeout);
  CHECK(net.outcomes["M1"].missing == std::vector<std::string>{"M3"});
  CHECK_FALSE(net.outcomes["M2"].committed);
  CHECK(net.outcomes.count("M3") == 0);
}

TEST_CASE("lower proposer wins a tie") {
  Net net({"M1", "M2", "M3"});
  net.propose("M1", dg(1), 0, 8);
  net.propose("M2", dg(2), 0, 8);
  net.all_verified(dg(1));
  net.run(1, 9);
  CHECK(net.outcomes["M3"].committed);
  CHECK(net.outcomes["M3"].proposer == "M1");
  CHECK(net.outcomes["M1"].committed);
  // M2 withdrew its round in favour of M1's and then committed M1's
  CHECK(net.outcomes["M2"].committed);
  CHECK(net.outcomes["M2"].proposer == "M1");
  CHECK(net.adopted["M2"].front().proposer == "M1");
}

TEST_CASE("digest mismatch votes no") {
  Net net({"M1", "M2", "M3"});
  net.propose("M1", dg(1), 0, 8);
  net.all_verified(dg(1));
  net.local["M3"].verified = dg(9);
  net.run(1, 9);
  CHECK(std::any_of(net.votes.begin(), net.votes.end(), [](auto& v) {
    return v.voter == "M3" && !v.yes && v.reason == AbortReason::DigestMismatch;
  }));
  for (auto& [n, o] : net.outcomes) {
    CHECK_FALSE(o.committed);
    CHECK(o.reason == AbortReason::DigestMismatch);
  }
}

TEST_CASE("shadow deviation aborts") {
  Net net({"M1", "M2", "M3"});
  net.propose("M1", dg(1), 0, 8);
  net.all_verified(dg(1));
  net.local["M2"] = LocalStatus{dg(1), false, false, true};
  net.run(1, 9);
  REQUIRE(net.outcomes.size() == 3);
  for (auto& [n, o] : net.outcomes) {
    CHECK_FALSE(o.committed);
    CHECK(o.reason == AbortReason::ShadowFailure);
  }
}

TEST_CASE("a second proposal while busy is rejected") {
  Coordinator c("M1");
  c.propose(dg(1), 0, 8, {"M1"});
  CHECK_THROWS_WITH_AS(c.propose(dg(2), 0, 8, {"M1"}), doctest::Contains("InvalidArgument"), Error);
}

TEST_CASE("single participant commits alone") {
  Coordinator c("M1");
  c.propose(dg(1), 0, 8, {"M1"});
  auto s = c.step(1, {}, LocalStatus{dg(1), false, true, false});
  REQUIRE(s.outcome);
  CHECK(s.outcome->committed);
  CHECK(s.out.empty());
}

TEST_CASE("wire rendering") {
  CHECK(render(Vote{"M2", 3, "M1", false, AbortReason::ShadowFailure}) ==
        "VOTE voter=M2 round=3 proposer=M1 no reason=ShadowFailure");
  CHECK(render(Abort{3, "M1", AbortReason::Timeout, {"M3"}}) == "ABORT round=3 proposer=M1 reason=Timeout missing=M3");
  CHECK(render(Commit{1, "M1", dg(0), 13}).find("cycle=13") != std::string::npos);
}
