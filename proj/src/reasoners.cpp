#include "bcg/reasoners.hpp"

#include <algorithm>
#include <string>

namespace bcg {

void EwaParams::validate() const {
  if (!(lambda > 0.0)) throw DomainError("ewa lambda must be positive");
  if (!(tau > 0.0)) throw DomainError("ewa tau must be positive");
  if (!(growth_kappa >= 0.0 && growth_kappa < 1.0)) throw DomainError("ewa growth_kappa must lie in [0, 1)");
  if (k_max < 0) throw DomainError("ewa k_max must be non-negative");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("ewa epsilon must lie in (0, 1)");
  if (payoff_offset && !std::isfinite(*payoff_offset)) throw DomainError("ewa payoff_offset must be finite");
}

Eigen::VectorXd poisson_weights(double tau, int k_max) {
  Eigen::VectorXd w(k_max + 1);
  double term = std::exp(-tau);
  for (int k = 0; k <= k_max; ++k) {
    w(k) = term;
    term *= tau / (k + 1);
  }
  return w;
}

int level_k_choose(const GameSpec& spec, int k) {
  if (k < 0) throw DomainError("level-k agents need k >= 0");
  const double guess = spec.anchor * std::pow(spec.p.value(), k);
  return std::clamp(static_cast<int>(std::lround(guess)), spec.action_min, spec.action_max);
}

Eigen::VectorXd chm_distribution(const GameSpec& spec, const EwaParams& params) {
  Eigen::VectorXd levels = poisson_weights(params.tau, params.k_max);
  levels /= levels.sum();

  Eigen::VectorXd dist = Eigen::VectorXd::Constant(spec.num_actions(), levels(0) / spec.num_actions());
  for (int k = 1; k <= params.k_max; ++k) dist(spec.index_of(level_k_choose(spec, k))) += levels(k);
  return dist;
}

EwaState ewa_init(const GameSpec& spec, const EwaParams& params) {
  spec.validate();
  params.validate();
  EwaState s;
  s.params = params;
  s.attractions = inverse_logit(chm_distribution(spec, params), params.lambda, params.epsilon);
  s.experience_weight = 1.0;
  s.round = 0;
  s.opponent_play_counts = Eigen::VectorXi::Zero(spec.num_actions());
  return s;
}

EwaState ewa_update(const EwaState& state, int own_action, int opp_action, const GameSpec& spec) {
  if (!spec.in_range(own_action) || !spec.in_range(opp_action))
    throw DomainError("ewa update with out-of-range action (" + std::to_string(own_action) + ", " +
                      std::to_string(opp_action) + ")");
  const int m = spec.num_actions();
  if (state.attractions.size() != m || state.opponent_play_counts.size() != m)
    throw DomainError("ewa state does not match the game's action count");

  const auto& params = state.params;
  EwaState next = state;
  next.round = state.round + 1;
  const int opp = spec.index_of(opp_action);
  const int own = spec.index_of(own_action);
  next.opponent_play_counts(opp) += 1;

  // Surprise: squared distance between the opponent's empirical frequencies and a one-hot
  // of their latest play.
  Eigen::VectorXd history = next.opponent_play_counts.cast<double>() / next.round;
  history(opp) -= 1.0;
  const double surprise = history.squaredNorm();
  const double phi = 1.0 - 0.5 * surprise;

  const double offset = params.offset_for(spec);
  Eigen::VectorXd foregone(m);
  for (int j = 0; j < m; ++j) foregone(j) = payoff(spec, spec.action_at(j), opp_action) + offset;

  // delta_j = 1 when j would have paid at least the realized payoff, compared exactly so that
  // equally close actions tie; the played strategy is always reinforced in full.
  const long long realized_distance = scaled_distance(spec, own_action, opp_action);
  Eigen::VectorXd weight(m);
  for (int j = 0; j < m; ++j)
    weight(j) = scaled_distance(spec, spec.action_at(j), opp_action) <= realized_distance ? 1.0 : 0.0;
  weight(own) = 1.0;

  const double prev_n = state.experience_weight;
  next.experience_weight = (1.0 - params.growth_kappa) * phi * prev_n + 1.0;
  next.attractions =
      (phi * prev_n * state.attractions + weight.cwiseProduct(foregone)) / next.experience_weight;
  next.last_surprise = surprise;
  next.last_change_detector = phi;
  return next;
}

Eigen::VectorXd ewa_probabilities(const EwaState& state) {
  return logit_choice(state.attractions, state.params.lambda);
}

int ewa_choose(const EwaState& state, const GameSpec& spec, Rng& rng) {
  return spec.action_at(static_cast<int>(sample_index(ewa_probabilities(state), rng)));
}

EwaAgent::EwaAgent(const GameSpec& spec, EwaParams params, std::uint64_t seed)
    : spec_(spec), state_(ewa_init(spec, params)), rng_(seed) {}

Move EwaAgent::act(const GameRequest& request) {
  if (!(request.spec == spec_)) throw DomainError("ewa agent was initialised for a different game");
  return Move{ewa_choose(state_, spec_, rng_), std::nullopt, std::nullopt};
}

void EwaAgent::observe(const Feedback& feedback) {
  state_ = ewa_update(state_, feedback.own_guess, feedback.opponent_guess, spec_);
}

LevelKAgent::LevelKAgent(int k) : k_(k) {
  if (k < 0) throw DomainError("level-k agents need k >= 0");
}

Move LevelKAgent::act(const GameRequest& request) {
  return Move{level_k_choose(request.spec, k_), std::nullopt, std::nullopt};
}

Move RandomAgent::act(const GameRequest& request) {
  return Move{rng_.uniform_int(request.spec.action_min, request.spec.action_max), std::nullopt,
              std::nullopt};
}

}  // namespace bcg
