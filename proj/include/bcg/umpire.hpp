#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bcg/agent.hpp"
#include "bcg/game.hpp"
#include "bcg/hypergame.hpp"
#include "bcg/trace.hpp"

namespace bcg {

/// Game request issued by the umpire, who takes part only as a passive pseudoplayer.
struct MatchRequest {
  GameSpec spec;
  std::array<PlayerId, 2> players;
  int round = 0;
  std::string umpire = "umpire";
};

struct PairingScheme {
  enum class Kind { AllPairs, FixedPairs, SelfPairs };
  Kind kind = Kind::FixedPairs;
  std::string model;  // agent template for SelfPairs

  static PairingScheme all_pairs() { return {Kind::AllPairs, {}}; }
  static PairingScheme fixed_pairs() { return {Kind::FixedPairs, {}}; }
  static PairingScheme self_pairs(std::string model) { return {Kind::SelfPairs, std::move(model)}; }
  std::string str() const;
};

/// Instance ids for the fresh pair of a self-paired model in a given round.
std::array<PlayerId, 2> self_pair_ids(const std::string& model, int round);

/// all_pairs: every unordered pair once, in listing order. fixed_pairs: (0,1), (2,3), ...
/// self_pairs: one fresh pair of `model` instances. Throws ConfigError on agent-count mismatch.
std::vector<MatchRequest> make_pairings(const std::vector<PlayerId>& agent_ids, const PairingScheme& scheme,
                                        int round, const GameSpec& spec = {});

struct MatchRecord {
  MatchRequest request;
  std::array<std::string, 2> groups;  // reporting group of each player
  std::array<std::optional<int>, 2> guesses;
  std::optional<Outcome> outcome;  // present iff both guesses are valid
  std::array<std::optional<ReasoningTrace>, 2> traces;
  std::optional<Hypergame> hypergame;
  std::array<bool, 2> invalid{false, false};
  std::array<std::optional<std::string>, 2> invalid_reasons;
  std::uint64_t seed = 0;
  // Wall-clock bounds; kept in memory only so persisted records stay reproducible.
  std::chrono::system_clock::time_point started;
  std::chrono::system_clock::time_point finished;
};

/// Collects both moves (concurrently), validates them without alteration, resolves the
/// outcome, attaches the hypergame when both players produced traces, and notifies both agents.
/// A replay fixture miss propagates; every other agent failure becomes an invalid move.
MatchRecord run_match(const MatchRequest& request, std::array<Agent*, 2> agents, std::uint64_t seed);

using AgentResolver = std::function<Agent*(const PlayerId&)>;

/// Runs the matches of one round and returns their records in request order. Matches that
/// share no agent run concurrently when `parallel` is set.
std::vector<MatchRecord> run_round(const std::vector<MatchRequest>& requests, const AgentResolver& resolve,
                                   const std::function<std::uint64_t(std::size_t)>& seed_of, bool parallel);

}  // namespace bcg
