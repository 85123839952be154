#pragma once

#include <optional>
#include <string>

#include "bcg/game.hpp"
#include "bcg/hypergame.hpp"
#include "bcg/trace.hpp"

namespace bcg {

struct GameRequest {
  GameSpec spec;
  PlayerId self;
  PlayerId opponent;
  int round = 0;
};

/// An agent's answer. `guess` empty means the agent gave up; `invalid_reason` says why.
struct Move {
  std::optional<int> guess;
  std::optional<ReasoningTrace> trace;
  std::optional<std::string> invalid_reason;
};

struct Feedback {
  int own_guess;
  int opponent_guess;
  double payoff;
};

class Agent {
 public:
  virtual ~Agent() = default;

  virtual std::string kind() const = 0;
  virtual Move act(const GameRequest& request) = 0;
  /// Called after every resolved match the agent took part in.
  virtual void observe(const Feedback&) {}
};

}  // namespace bcg
