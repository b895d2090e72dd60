#pragma once

// Switch coordination: one proposer broadcasts (digest, activation cycle),
// every participant votes after its own qualification and shadow run, and the
// proposer commits only on unanimous Yes before the deadline.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "pafa/digest.hpp"

namespace pafa::consensus {

enum class AbortReason { Timeout, DigestMismatch, ShadowFailure, Superseded };
const char* to_string(AbortReason reason);

struct Proposal {
  std::int64_t round = 0;
  std::string proposer;
  Digest digest{};
  std::int64_t cycle = 0;       // proposal cycle
  std::int64_t activation = 0;  // switch cycle
  std::vector<std::string> participants;
};

struct Vote {
  std::string voter;
  std::int64_t round = 0;
  std::string proposer;
  bool yes = false;
  AbortReason reason = AbortReason::Timeout;  // meaningful when !yes
};

struct Commit {
  std::int64_t round = 0;
  std::string proposer;
  Digest digest{};
  std::int64_t activation = 0;
};

struct Abort {
  std::int64_t round = 0;
  std::string proposer;
  AbortReason reason = AbortReason::Timeout;
  std::vector<std::string> missing;
};

using Wire = std::variant<Proposal, Vote, Commit, Abort>;

struct Envelope {
  std::string from;
  std::string to;
  Wire message;
};

// Canonical one-line rendering used in the event log.
std::string render(const Wire& message);

struct Outcome {
  bool committed = false;
  std::int64_t round = 0;
  std::string proposer;
  Digest digest{};
  std::int64_t activation = 0;
  AbortReason reason = AbortReason::Timeout;
  std::vector<std::string> missing;
};

// Local facts a participant contributes to its vote.
struct LocalStatus {
  std::optional<Digest> verified;  // digest this module's qualifier accepted for the round
  bool rejected = false;           // qualifier rejected the candidate
  bool shadow_done = false;        // shadow run completed without deviation
  bool shadow_failed = false;      // shadow run deviated
};

// Minimum distance between proposal and activation.
std::int64_t activation_lead(std::int64_t verification_cycles);

class Coordinator {
 public:
  explicit Coordinator(std::string self) : self_(std::move(self)) {}

  struct Step {
    std::vector<Envelope> out;
    std::optional<Outcome> outcome;
    // Proposal adopted this step (the caller qualifies and shadow-runs it).
    std::optional<Proposal> adopted;
  };

  // Starts a round as proposer. Participants include the proposer itself.
  Step propose(Digest digest, std::int64_t cycle, std::int64_t activation, std::vector<std::string> participants);

  // Processes delivered messages and local progress for this cycle.
  Step step(std::int64_t cycle, const std::vector<Envelope>& inbox, const LocalStatus& local);

  bool busy() const { return current_.has_value(); }
  const std::optional<Proposal>& current() const { return current_; }
  bool proposing() const { return current_ && current_->proposer == self_; }
  std::int64_t highest_round() const { return highest_round_; }

 private:
  Step finish(Outcome outcome, bool broadcast, Step step);
  std::vector<Envelope> to_all(const Wire& msg) const;

  std::string self_;
  std::optional<Proposal> current_;
  std::map<std::string, Vote> votes_;
  bool voted_ = false;
  std::int64_t highest_round_ = 0;
};

}  // namespace pafa::consensus
