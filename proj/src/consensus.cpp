#include "pafa/consensus.hpp"

#include <algorithm>
#include <tuple>

#include "pafa/error.hpp"

namespace pafa::consensus {

const char* to_string(AbortReason reason) {
  switch (reason) {
    case AbortReason::Timeout: return "Timeout";
    case AbortReason::DigestMismatch: return "DigestMismatch";
    case AbortReason::ShadowFailure: return "ShadowFailure";
    case AbortReason::Superseded: return "Superseded";
  }
  return "?";
}

std::int64_t activation_lead(std::int64_t verification_cycles) { return verification_cycles + 5; }

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out.empty() ? "-" : out;
}

struct Renderer {
  std::string operator()(const Proposal& p) const {
    return "PROPOSE round=" + std::to_string(p.round) + " proposer=" + p.proposer + " digest=" + to_hex(p.digest) +
           " cycle=" + std::to_string(p.cycle) + " activation=" + std::to_string(p.activation) +
           " participants=" + join(p.participants);
  }
  std::string operator()(const Vote& v) const {
    return "VOTE voter=" + v.voter + " round=" + std::to_string(v.round) + " proposer=" + v.proposer +
           (v.yes ? " yes" : std::string(" no reason=") + to_string(v.reason));
  }
  std::string operator()(const Commit& c) const {
    return "COMMIT round=" + std::to_string(c.round) + " proposer=" + c.proposer + " digest=" + to_hex(c.digest) +
           " cycle=" + std::to_string(c.activation);
  }
  std::string operator()(const Abort& a) const {
    return "ABORT round=" + std::to_string(a.round) + " proposer=" + a.proposer + " reason=" + to_string(a.reason) +
           " missing=" + join(a.missing);
  }
};

bool precedes(const Proposal& a, const Proposal& b) {
  return std::tie(a.round, a.proposer) < std::tie(b.round, b.proposer);
}

}  // namespace

std::string render(const Wire& message) { return std::visit(Renderer{}, message); }

std::vector<Envelope> Coordinator::to_all(const Wire& msg) const {
  std::vector<Envelope> out;
  for (const auto& p : current_->participants) {
    if (p != self_) out.push_back({self_, p, msg});
  }
  return out;
}

Coordinator::Step Coordinator::propose(Digest digest, std::int64_t cycle, std::int64_t activation,
                                       std::vector<std::string> participants) {
  if (current_) throw Error(ErrorKind::InvalidArgument, self_ + " already has a round in progress");
  std::sort(participants.begin(), participants.end());
  participants.erase(std::unique(participants.begin(), participants.end()), participants.end());
  Proposal p{highest_round_ + 1, self_, digest, cycle, activation, std::move(participants)};
  highest_round_ = p.round;
  current_ = p;
  votes_.clear();
  voted_ = false;
  Step s;
  s.out = to_all(p);
  return s;
}

Coordinator::Step Coordinator::finish(Outcome outcome, bool broadcast, Step s) {
  if (broadcast) {
    Wire msg = outcome.committed ? Wire{Commit{outcome.round, outcome.proposer, outcome.digest, outcome.activation}}
                                 : Wire{Abort{outcome.round, outcome.proposer, outcome.reason, outcome.missing}};
    auto out = to_all(msg);
    s.out.insert(s.out.end(), out.begin(), out.end());
  }
  current_.reset();
  votes_.clear();
  voted_ = false;
  s.outcome = std::move(outcome);
  return s;
}

Coordinator::Step Coordinator::step(std::int64_t cycle, const std::vector<Envelope>& inbox, const LocalStatus& local) {
  Step s;
  auto outcome_for = [&](bool committed, AbortReason reason, std::vector<std::string> missing = {}) {
    Outcome o;
    o.committed = committed;
    o.round = current_->round;
    o.proposer = current_->proposer;
    o.digest = current_->digest;
    o.activation = current_->activation;
    o.reason = reason;
    o.missing = std::move(missing);
    return o;
  };

  for (const auto& env : inbox) {
    if (const auto* p = std::get_if<Proposal>(&env.message)) {
      highest_round_ = std::max(highest_round_, p->round);
      if (current_ && !precedes(*p, *current_)) continue;
      if (current_) {
        // A lower (round, proposer) wins; our own round is withdrawn.
        bool mine = proposing();
        s = finish(outcome_for(false, AbortReason::Superseded), mine, std::move(s));
      }
      current_ = *p;
      votes_.clear();
      voted_ = false;
      s.adopted = *p;
    } else if (const auto* v = std::get_if<Vote>(&env.message)) {
      if (proposing() && v->round == current_->round && v->proposer == self_) votes_[v->voter] = *v;
    } else if (const auto* c = std::get_if<Commit>(&env.message)) {
      if (current_ && c->round == current_->round && c->proposer == current_->proposer) {
        return finish(outcome_for(true, AbortReason::Timeout), false, std::move(s));
      }
    } else if (const auto* a = std::get_if<Abort>(&env.message)) {
      if (current_ && a->round == current_->round && a->proposer == current_->proposer) {
        return finish(outcome_for(false, a->reason, a->missing), false, std::move(s));
      }
    }
  }
  if (!current_) return s;

  if (!voted_ && !s.adopted) {
    std::optional<Vote> vote;
    if (local.rejected || (local.verified && *local.verified != current_->digest)) {
      vote = Vote{self_, current_->round, current_->proposer, false, AbortReason::DigestMismatch};
    } else if (local.shadow_failed) {
      vote = Vote{self_, current_->round, current_->proposer, false, AbortReason::ShadowFailure};
    } else if (local.shadow_done && local.verified == current_->digest) {
      vote = Vote{self_, current_->round, current_->proposer, true, AbortReason::Timeout};
    }
    if (vote) {
      voted_ = true;
      if (proposing()) {
        votes_[self_] = *vote;
      } else {
        s.out.push_back({self_, current_->proposer, *vote});
      }
    }
  }

  if (proposing()) {
    for (const auto& [voter, v] : votes_) {
      if (!v.yes) return finish(outcome_for(false, v.reason), true, std::move(s));
    }
    std::vector<std::string> missing;
    for (const auto& p : current_->participants) {
      if (!votes_.count(p)) missing.push_back(p);
    }
    const std::int64_t deadline = current_->activation - 2;
    if (missing.empty() && cycle <= deadline) return finish(outcome_for(true, AbortReason::Timeout), true, std::move(s));
    if (cycle >= deadline) return finish(outcome_for(false, AbortReason::Timeout, missing), true, std::move(s));
  } else if (cycle >= current_->activation) {
    // The proposer went silent; give up locally.
    return finish(outcome_for(false, AbortReason::Timeout), false, std::move(s));
  }
  return s;
}

}  // namespace pafa::consensus
