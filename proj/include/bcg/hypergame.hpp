#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bcg/game.hpp"

namespace bcg {

using PlayerId = std::string;

/// Ordered perspectives (psi_1, ..., psi_kappa). The first entry is the interpreter.
class PerspectiveSeq {
 public:
  explicit PerspectiveSeq(std::vector<PlayerId> perspectives);

  const std::vector<PlayerId>& perspectives() const { return perspectives_; }
  const PlayerId& interpreter() const { return perspectives_.front(); }
  int depth() const { return static_cast<int>(perspectives_.size()); }

  friend bool operator==(const PerspectiveSeq&, const PerspectiveSeq&) = default;

 private:
  std::vector<PlayerId> perspectives_;
};

/// One player's subjective reconstruction of the contest.
struct PerceptualGame {
  PlayerId owner;
  std::array<PlayerId, 2> players;  // (owner, opponent)
  GameSpec spec;
  PerspectiveSeq perspectives;
  std::optional<int> predicted_opponent_guess;

  int kappa() const { return perspectives.depth(); }

  friend bool operator==(const PerceptualGame&, const PerceptualGame&) = default;
};

/// Perspective chain (owner, opponent, owner, ...) of length kappa.
/// Throws DomainError for kappa < 1 or owner == opponent.
PerceptualGame build_perceptual_game(const PlayerId& owner, const PlayerId& opponent,
                                     const GameSpec& spec, int kappa,
                                     std::optional<int> predicted = std::nullopt);

/// Recursive hypergame tree. Leaves are perceptual games (level 0); a composite sits one
/// level above its deepest child. Immutable after construction.
class Hypergame {
 public:
  struct Composite {
    int level;
    std::optional<PlayerId> owner;  // whose view this subtree models; empty at the root
    std::vector<Hypergame> children;
  };

  static Hypergame leaf(PerceptualGame game);
  /// Throws CompositionError for an empty child list.
  static Hypergame composite(std::vector<Hypergame> children,
                             std::optional<PlayerId> owner = std::nullopt);

  bool is_leaf() const { return std::holds_alternative<PerceptualGame>(*node_); }
  const PerceptualGame& game() const { return std::get<PerceptualGame>(*node_); }
  const Composite& node() const { return std::get<Composite>(*node_); }
  int level() const;

  /// Leaves in depth-first order.
  std::vector<PerceptualGame> leaves() const;

  friend bool operator==(const Hypergame& a, const Hypergame& b);

 private:
  using Node = std::variant<PerceptualGame, Composite>;
  explicit Hypergame(Node node) : node_(std::make_shared<const Node>(std::move(node))) {}

  std::shared_ptr<const Node> node_;
};

int hypergame_level(const Hypergame& h);

/// Joins both players' perceptual games. Each game of depth kappa becomes a subtree of level
/// kappa-1 so the root level is max(kappa_i, kappa_j).
/// Throws CompositionError when specs or player pairs differ, or owners coincide.
Hypergame compose_hypergame(const PerceptualGame& first, const PerceptualGame& second);

}  // namespace bcg
