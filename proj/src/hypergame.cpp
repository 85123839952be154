#include "bcg/hypergame.hpp"

#include <algorithm>

#include "bcg/error.hpp"

namespace bcg {

PerspectiveSeq::PerspectiveSeq(std::vector<PlayerId> perspectives)
    : perspectives_(std::move(perspectives)) {
  if (perspectives_.empty()) throw DomainError("perspective sequence must not be empty");
}

PerceptualGame build_perceptual_game(const PlayerId& owner, const PlayerId& opponent,
                                     const GameSpec& spec, int kappa,
                                     std::optional<int> predicted) {
  if (kappa < 1) throw DomainError("perceptual game needs kappa >= 1, got " + std::to_string(kappa));
  if (owner == opponent) throw DomainError("owner and opponent must differ");

  std::vector<PlayerId> chain;
  chain.reserve(static_cast<std::size_t>(kappa));
  for (int i = 0; i < kappa; ++i) chain.push_back(i % 2 == 0 ? owner : opponent);
  return PerceptualGame{owner, {owner, opponent}, spec, PerspectiveSeq(std::move(chain)), predicted};
}

Hypergame Hypergame::leaf(PerceptualGame game) { return Hypergame(Node(std::move(game))); }

Hypergame Hypergame::composite(std::vector<Hypergame> children, std::optional<PlayerId> owner) {
  if (children.empty()) throw CompositionError("composite hypergame needs at least one child");
  int deepest = 0;
  for (const auto& c : children) deepest = std::max(deepest, c.level());
  return Hypergame(Node(Composite{deepest + 1, std::move(owner), std::move(children)}));
}

int Hypergame::level() const { return is_leaf() ? 0 : node().level; }

std::vector<PerceptualGame> Hypergame::leaves() const {
  if (is_leaf()) return {game()};
  std::vector<PerceptualGame> out;
  for (const auto& c : node().children) {
    auto sub = c.leaves();
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

bool operator==(const Hypergame& a, const Hypergame& b) {
  if (a.is_leaf() != b.is_leaf()) return false;
  if (a.is_leaf()) return a.game() == b.game();
  const auto& x = a.node();
  const auto& y = b.node();
  return x.level == y.level && x.owner == y.owner && x.children == y.children;
}

int hypergame_level(const Hypergame& h) { return h.level(); }

namespace {

// Wraps a depth-kappa game in kappa-1 single-child composites, one per nested perspective.
Hypergame player_subtree(const PerceptualGame& game) {
  auto tree = Hypergame::leaf(game);
  for (int depth = 1; depth < game.kappa(); ++depth) {
    std::vector<Hypergame> child;
    child.push_back(std::move(tree));
    tree = Hypergame::composite(std::move(child), game.owner);
  }
  return tree;
}

}  // namespace

Hypergame compose_hypergame(const PerceptualGame& first, const PerceptualGame& second) {
  if (first.owner == second.owner) throw CompositionError("both perceptual games have owner " + first.owner);
  if (!(first.spec == second.spec)) throw CompositionError("perceptual games disagree on the game spec");
  auto sorted = [](std::array<PlayerId, 2> pair) {
    std::sort(pair.begin(), pair.end());
    return pair;
  };
  if (sorted(first.players) != sorted(second.players))
    throw CompositionError("perceptual games disagree on the player pair");
  if (first.players[1] != second.owner) throw CompositionError("owners are not each other's opponent");

  std::vector<Hypergame> children;
  children.push_back(player_subtree(first));
  children.push_back(player_subtree(second));
  return Hypergame::composite(std::move(children));
}

}  // namespace bcg
