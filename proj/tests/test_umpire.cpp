#include <doctest.h>

#include <atomic>
#include <map>
#include <set>
#include <thread>

#include "bcg/error.hpp"
#include "bcg/reasoners.hpp"
#include "bcg/umpire.hpp"

using namespace bcg;

namespace {

class Fixed final : public Agent {
 public:
  explicit Fixed(std::optional<int> guess, std::optional<ReasoningTrace> trace = {})
      : guess_(guess), trace_(std::move(trace)) {}
  std::string kind() const override { return "fixed"; }
  Move act(const GameRequest&) override {
    return Move{guess_, trace_, guess_ ? std::nullopt : std::optional<std::string>("refused")};
  }
  void observe(const Feedback& f) override { seen.push_back(f); }
  std::vector<Feedback> seen;

 private:
  std::optional<int> guess_;
  std::optional<ReasoningTrace> trace_;
};

class Throwing final : public Agent {
 public:
  std::string kind() const override { return "throwing"; }
  Move act(const GameRequest&) override { throw BackendError("boom"); }
};

ReasoningTrace trace_with(int kappa, int predicted) {
  ReasoningTrace t;
  t.kappa = kappa;
  t.predicted_opponent_guess = predicted;
  t.reasoning_text = "r";
  return t;
}

}  // namespace

TEST_CASE("all pairs over four agents") {
  const auto reqs = make_pairings({"a", "b", "c", "d"}, PairingScheme::all_pairs(), 3);
  REQUIRE(reqs.size() == 6);
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& r : reqs) {
    CHECK(r.round == 3);
    CHECK(r.umpire == "umpire");
    pairs.insert({r.players[0], r.players[1]});
  }
  CHECK(pairs.size() == 6);
  CHECK(reqs.front().players == std::array<PlayerId, 2>{"a", "b"});
  CHECK(reqs.back().players == std::array<PlayerId, 2>{"c", "d"});
}

TEST_CASE("fixed and self pairs") {
  const auto fixed = make_pairings({"a", "b", "c", "d"}, PairingScheme::fixed_pairs(), 1);
  REQUIRE(fixed.size() == 2);
  CHECK(fixed[1].players == std::array<PlayerId, 2>{"c", "d"});
  CHECK_THROWS_AS(make_pairings({"a", "b", "c"}, PairingScheme::fixed_pairs(), 1), ConfigError);
  CHECK_THROWS_AS(make_pairings({"a"}, PairingScheme::all_pairs(), 1), ConfigError);

  const auto self = make_pairings({"m"}, PairingScheme::self_pairs("m"), 7);
  REQUIRE(self.size() == 1);
  CHECK(self[0].players == self_pair_ids("m", 7));
  CHECK(self[0].players[0] != self[0].players[1]);
  CHECK(self_pair_ids("m", 7) != self_pair_ids("m", 8));
  CHECK_THROWS_AS(make_pairings({"m"}, PairingScheme::self_pairs("other"), 1), ConfigError);
}

TEST_CASE("level 0 against level 1") {
  LevelKAgent zero(0), one(1);
  const auto reqs = make_pairings({"zero", "one"}, PairingScheme::fixed_pairs(), 1);
  const auto rec = run_match(reqs[0], {&zero, &one}, 9);
  REQUIRE(rec.outcome.has_value());
  CHECK(rec.guesses[0] == 50);
  CHECK(rec.guesses[1] == 33);
  CHECK(rec.outcome->winner == Winner::Second);
  CHECK(rec.outcome->mean == doctest::Approx(41.5));
  CHECK(rec.outcome->target == doctest::Approx(41.5 * 2.0 / 3.0));
  CHECK(rec.seed == 9);
  CHECK_FALSE(rec.hypergame.has_value());
}

TEST_CASE("an invalid move is recorded, not repaired") {
  Fixed good(30), bad(std::nullopt), wild(250);
  MatchRequest req{GameSpec{}, {"g", "b"}, 1};
  const auto rec = run_match(req, {&good, &bad}, 1);
  CHECK_FALSE(rec.outcome.has_value());
  CHECK(rec.invalid == std::array<bool, 2>{false, true});
  CHECK(rec.invalid_reasons[1] == "refused");
  CHECK(good.seen.empty());

  const auto rec2 = run_match(MatchRequest{GameSpec{}, {"g", "w"}, 1}, {&good, &wild}, 1);
  CHECK(rec2.invalid[1]);
  CHECK_FALSE(rec2.guesses[1].has_value());
  CHECK(rec2.invalid_reasons[1]->find("250") != std::string::npos);

  Throwing thrower;
  const auto rec3 = run_match(MatchRequest{GameSpec{}, {"g", "t"}, 1}, {&good, &thrower}, 1);
  CHECK(rec3.invalid[1]);
  CHECK(rec3.invalid_reasons[1]->find("boom") != std::string::npos);
}

TEST_CASE("agents are told the outcome") {
  Fixed a(10), b(20);
  run_match(MatchRequest{GameSpec{}, {"a", "b"}, 1}, {&a, &b}, 1);
  REQUIRE(a.seen.size() == 1);
  CHECK(a.seen[0].own_guess == 10);
  CHECK(a.seen[0].opponent_guess == 20);
  CHECK(a.seen[0].payoff == doctest::Approx(-0.0));
  CHECK(b.seen[0].payoff == doctest::Approx(-10.0));
}

TEST_CASE("traced players yield a hypergame") {
  Fixed a(22, trace_with(2, 33)), b(15, trace_with(2, 22));
  const auto rec = run_match(MatchRequest{GameSpec{}, {"a", "b"}, 1}, {&a, &b}, 1);
  REQUIRE(rec.hypergame.has_value());
  CHECK(hypergame_level(*rec.hypergame) == 2);

  Fixed c(22, trace_with(4, 33)), d(15, trace_with(1, 22));
  const auto rec2 = run_match(MatchRequest{GameSpec{}, {"c", "d"}, 1}, {&c, &d}, 1);
  CHECK(hypergame_level(*rec2.hypergame) == 4);
}

TEST_CASE("run_round keeps one record per request, in order, parallel or not") {
  std::map<std::string, std::unique_ptr<Agent>> agents;
  const std::vector<PlayerId> ids = {"a", "b", "c", "d", "e", "f"};
  for (std::size_t i = 0; i < ids.size(); ++i) agents[ids[i]] = std::make_unique<LevelKAgent>(static_cast<int>(i % 3));
  const auto reqs = make_pairings(ids, PairingScheme::all_pairs(), 1);
  auto resolve = [&](const PlayerId& id) { return agents.at(id).get(); };
  auto seed_of = [](std::size_t i) { return std::uint64_t{100 + i}; };
  const auto serial = run_round(reqs, resolve, seed_of, false);
  const auto parallel = run_round(reqs, resolve, seed_of, true);
  REQUIRE(serial.size() == reqs.size());
  REQUIRE(parallel.size() == reqs.size());
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    CHECK(parallel[i].request.players == reqs[i].players);
    CHECK(parallel[i].guesses == serial[i].guesses);
    CHECK(parallel[i].seed == 100 + i);
  }
}

TEST_CASE("run_round never runs an agent in two matches at once") {
  class Exclusive final : public Agent {
   public:
    std::string kind() const override { return "exclusive"; }
    Move act(const GameRequest&) override {
      if (busy.exchange(true)) clash = true;
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
      busy = false;
      return Move{25, std::nullopt, std::nullopt};
    }
    std::atomic<bool> busy{false};
    std::atomic<bool> clash{false};
  };
  std::map<std::string, std::unique_ptr<Exclusive>> agents;
  std::vector<PlayerId> ids;
  for (int i = 0; i < 6; ++i) {
    ids.push_back("p" + std::to_string(i));
    agents[ids.back()] = std::make_unique<Exclusive>();
  }
  const auto reqs = make_pairings(ids, PairingScheme::all_pairs(), 1);
  run_round(reqs, [&](const PlayerId& id) -> Agent* { return agents.at(id).get(); }, [](std::size_t) { return 1u; },
            true);
  for (const auto& [id, a] : agents) CHECK_FALSE(a->clash.load());
}

TEST_CASE("unknown agent is a configuration error") {
  LevelKAgent a(0);
  CHECK_THROWS_AS(run_match(MatchRequest{GameSpec{}, {"a", "ghost"}, 1}, {&a, nullptr}, 1), ConfigError);
}
