#include <doctest.h>

#include <cmath>
#include <vector>

#include "bcg/reasoners.hpp"
#include "scalar_ewa.hpp"

using namespace bcg;
using bcg::testing::ScalarEwa;
using bcg::testing::scalar_step;

namespace {

GameSpec five_action_game() {
  GameSpec g;
  g.action_min = 0;
  g.action_max = 4;
  g.anchor = 2;
  return g;
}

}  // namespace

TEST_CASE("poisson weights match direct evaluation") {
  const auto w = poisson_weights(1.5, 20);
  for (int k = 0; k <= 10; ++k)
    CHECK(std::abs(w(k) - std::exp(-1.5) * std::pow(1.5, k) / std::tgamma(k + 1.0)) < 1e-12);
  CHECK(w(0) == doctest::Approx(0.22313).epsilon(1e-4));
  CHECK(w(1) == doctest::Approx(0.33470).epsilon(1e-4));
  CHECK(w(2) == doctest::Approx(0.25102).epsilon(1e-4));
  CHECK(1.0 - w.sum() < 1e-12);
}

TEST_CASE("chm distribution") {
  const GameSpec spec;
  const EwaParams prm;
  const auto d = chm_distribution(spec, prm);
  REQUIRE(d.size() == 101);
  CHECK(std::abs(d.sum() - 1.0) < 1e-12);
  const Eigen::VectorXd lv = poisson_weights(1.5, 20) / poisson_weights(1.5, 20).sum();
  const double uniform = lv(0) / 101.0;
  CHECK(d(50) == doctest::Approx(uniform));
  CHECK(d(33) == doctest::Approx(uniform + lv(1)));
  CHECK(d(22) == doctest::Approx(uniform + lv(2)));
  CHECK((d.array() > 0.0).all());
}

TEST_CASE("level_k_choose") {
  const GameSpec spec;
  CHECK(level_k_choose(spec, 0) == 50);
  CHECK(level_k_choose(spec, 1) == 33);
  CHECK(level_k_choose(spec, 2) == 22);
  CHECK(level_k_choose(spec, 4) == 10);
  CHECK(level_k_choose(spec, 40) == 0);
  CHECK_THROWS_AS(level_k_choose(spec, -1), DomainError);
}

TEST_CASE("ewa_init embeds the chm prior") {
  const GameSpec spec;
  const EwaParams prm;
  const auto s = ewa_init(spec, prm);
  CHECK(s.experience_weight == 1.0);
  CHECK(s.round == 0);
  CHECK(s.opponent_play_counts.sum() == 0);
  const auto chm = chm_distribution(spec, prm);
  const auto probs = ewa_probabilities(s);
  for (int j = 0; j < chm.size(); ++j)
    if (chm(j) > prm.epsilon) CHECK(std::abs(probs(j) - chm(j)) < 1e-9);

  const Eigen::VectorXd flat = Eigen::VectorXd::Constant(7, 1.0 / 7.0);
  const auto a = inverse_logit(flat, 2.39, 1e-6);
  CHECK((a.array() - a(0)).abs().maxCoeff() < 1e-15);
  CHECK((logit_choice(a, 2.39).array() - 1.0 / 7.0).abs().maxCoeff() < 1e-15);
}

TEST_CASE("ewa params validation") {
  EwaParams p;
  p.lambda = 0;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = EwaParams{};
  p.growth_kappa = 1.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = EwaParams{};
  p.epsilon = 0;
  CHECK_THROWS_AS(p.validate(), DomainError);
}

TEST_CASE("ewa_update surprise index and change detector") {
  const GameSpec spec;
  auto s = ewa_init(spec, EwaParams{});
  s = ewa_update(s, 30, 20, spec);
  CHECK(s.last_surprise == 0.0);
  CHECK(s.last_change_detector == 1.0);
  s = ewa_update(s, 30, 30, spec);
  CHECK(s.last_surprise == doctest::Approx(0.5));
  CHECK(s.last_change_detector == doctest::Approx(0.75));
  CHECK(s.round == 2);
  CHECK(s.opponent_play_counts.sum() == 2);
  CHECK_THROWS_AS(ewa_update(s, 101, 30, spec), DomainError);
  CHECK_THROWS_AS(ewa_update(s, 3, -2, spec), DomainError);
}

TEST_CASE("ewa_update hand-computed first step with raw payoffs") {
  const GameSpec spec;
  EwaParams prm;
  prm.payoff_offset = 0.0;
  const auto s0 = ewa_init(spec, prm);
  const auto s1 = ewa_update(s0, 30, 20, spec);
  CHECK(s1.experience_weight == 2.0);
  // j=10 hits the target 10 exactly: foregone 0 >= realized -40/3.
  CHECK(s1.attractions(10) == doctest::Approx(s0.attractions(10) / 2.0));
  // j=30 is the played strategy: realized -40/3.
  CHECK(s1.attractions(30) == doctest::Approx((s0.attractions(30) - 40.0 / 3.0) / 2.0));
  // j=15: foregone -10/3 beats realized, reinforced.
  CHECK(s1.attractions(15) == doctest::Approx((s0.attractions(15) - 10.0 / 3.0) / 2.0));
  // j=80: foregone -140/3 is worse, not reinforced.
  CHECK(s1.attractions(80) == doctest::Approx(s0.attractions(80) / 2.0));
}

TEST_CASE("ewa_update matches the scalar oracle on a five-action game") {
  const GameSpec g = five_action_game();
  const std::vector<std::pair<int, int>> plays = {{2, 3}, {1, 1}, {0, 4}, {4, 0}, {2, 2},
                                                  {1, 0}, {3, 3}, {0, 1}, {2, 4}, {1, 1}};
  for (const std::optional<double> offset : {std::optional<double>{}, std::optional<double>{0.0}}) {
    for (const double growth : {0.0, 0.3}) {
      EwaParams prm;
      prm.payoff_offset = offset;
      prm.growth_kappa = growth;
      auto state = ewa_init(g, prm);
      ScalarEwa oracle{std::vector<double>(state.attractions.data(), state.attractions.data() + 5), 1.0, 0,
                       std::vector<int>(5, 0)};
      for (auto [own, opp] : plays) {
        state = ewa_update(state, own, opp, g);
        scalar_step(oracle, g, prm, own, opp);
        REQUIRE(state.experience_weight == doctest::Approx(oracle.n).epsilon(1e-12));
        for (int j = 0; j < 5; ++j) REQUIRE(std::abs(state.attractions(j) - oracle.a[j]) < 1e-9);
      }
    }
  }
}

TEST_CASE("logit choice") {
  Eigen::VectorXd two(2);
  two << 1.0, 0.0;
  const auto p = logit_choice(two, 2.39);
  CHECK(p(0) == doctest::Approx(std::exp(2.39) / (std::exp(2.39) + 1.0)));
  CHECK(p(0) == doctest::Approx(0.9161).epsilon(1e-4));

  const Eigen::VectorXd flat = Eigen::VectorXd::Constant(101, -3.0);
  CHECK((logit_choice(flat, 2.39).array() - 1.0 / 101).abs().maxCoeff() < 1e-15);

  Eigen::VectorXd a = Eigen::VectorXd::LinSpaced(11, -4.0, 6.0);
  const auto base = logit_choice(a, 2.39);
  const Eigen::VectorXd shifted = a.array() + 123.0;
  CHECK((logit_choice(shifted, 2.39) - base).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(base.sum() - 1.0) < 1e-12);

  // Large attractions stay finite thanks to the max shift.
  const Eigen::VectorXd big = a * 1e3;
  CHECK(logit_choice(big, 2.39).allFinite());

  a(3) = std::nan("");
  CHECK_THROWS_AS(logit_choice(a, 2.39), NumericError);

  // Float instantiation.
  Eigen::VectorXf f(2);
  f << 1.0f, 0.0f;
  CHECK(logit_choice(f, 2.39f)(0) == doctest::Approx(0.9161).epsilon(1e-3));
}

TEST_CASE("first-period draws follow the chm prior") {
  const GameSpec spec;
  const EwaParams prm;
  const auto s = ewa_init(spec, prm);
  const auto chm = chm_distribution(spec, prm);
  Rng rng(2024);
  Eigen::VectorXd freq = Eigen::VectorXd::Zero(101);
  // At 10^6 draws the sampling noise in total variation is about 0.0025.
  constexpr int draws = 1'000'000;
  for (int i = 0; i < draws; ++i) freq(ewa_choose(s, spec, rng)) += 1.0;
  freq /= draws;
  CHECK(0.5 * (freq - chm).cwiseAbs().sum() < 0.005);
}

TEST_CASE("self-play keeps phi in [0,1], N >= 1 and learns downward") {
  const GameSpec spec;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    EwaAgent a(spec, EwaParams{}, derive_seed(seed, {0}));
    EwaAgent b(spec, EwaParams{}, derive_seed(seed, {1}));
    double early = 0, late = 0;
    for (int round = 0; round < 60; ++round) {
      const int x = *a.act({spec, "a", "b", round}).guess;
      const int y = *b.act({spec, "b", "a", round}).guess;
      a.observe({x, y, payoff(spec, x, y)});
      b.observe({y, x, payoff(spec, y, x)});
      for (const auto* agent : {&a, &b}) {
        const auto& st = agent->state();
        REQUIRE(st.last_change_detector >= 0.0);
        REQUIRE(st.last_change_detector <= 1.0);
        REQUIRE(st.experience_weight >= 1.0);
        REQUIRE(st.opponent_play_counts.sum() == st.round);
      }
      if (round < 10) early += x + y;
      if (round >= 50) late += x + y;
    }
    CHECK(late < early);
  }
}

TEST_CASE("random and level-k agents stay in range") {
  const GameSpec spec;
  RandomAgent r(7);
  LevelKAgent k(2);
  for (int i = 0; i < 1000; ++i) {
    const int g = *r.act({spec, "r", "k", i}).guess;
    REQUIRE(spec.in_range(g));
  }
  CHECK(*k.act({spec, "k", "r", 0}).guess == 22);
}

TEST_CASE("equally close foregone actions count as ties") {
  // Against 4 at p=2/3 the target of action x is 2(x+4)/6, so x=0 and x=4 are both 4/3 away.
  GameSpec g;
  g.action_min = 0;
  g.action_max = 4;
  g.anchor = 2;
  CHECK(scaled_distance(g, 0, 4) == scaled_distance(g, 4, 4));
  EwaParams prm;
  prm.payoff_offset = 0.0;
  const auto s0 = ewa_init(g, prm);
  const auto s1 = ewa_update(s0, 0, 4, g);
  const double phi = s1.last_change_detector;
  const double n1 = s1.experience_weight;
  // Action 4 is reinforced with its (equal) payoff despite not being played.
  CHECK(s1.attractions(4) == doctest::Approx((phi * 1.0 * s0.attractions(4) + payoff(g, 4, 4)) / n1));
  CHECK(payoff(g, 4, 4) == doctest::Approx(-4.0 / 3.0));
}
