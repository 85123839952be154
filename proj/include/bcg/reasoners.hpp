#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>

#include "bcg/agent.hpp"
#include "bcg/error.hpp"
#include "bcg/game.hpp"
#include "bcg/rng.hpp"

namespace bcg {

/// Self-tuning EWA parameters. Defaults are the values fitted by Ho, Camerer and Chong on
/// p-beauty contests (lambda, tau) with N(0)=1.
struct EwaParams {
  double lambda = 2.39;       // logit sensitivity
  double tau = 1.5;           // Poisson rate of the cognitive hierarchy prior
  double growth_kappa = 0.0;  // attraction growth parameter of the update rule
  int k_max = 20;             // Poisson truncation
  double epsilon = 1e-6;      // probability floor when embedding the prior into attractions
  /// Constant added to every payoff before reinforcement. Empty means the game's range
  /// (action_max - action_min), which makes all reinforcements non-negative.
  std::optional<double> payoff_offset;

  void validate() const;
  double offset_for(const GameSpec& spec) const {
    return payoff_offset.value_or(static_cast<double>(spec.range()));
  }

  friend bool operator==(const EwaParams&, const EwaParams&) = default;
};

struct EwaState {
  Eigen::VectorXd attractions;           // A^j(t), indexed by action - action_min
  double experience_weight = 1.0;        // N(t)
  int round = 0;                         // t
  Eigen::VectorXi opponent_play_counts;  // cumulative, sums to t
  EwaParams params;
  double last_surprise = 0.0;            // S(t) of the latest update
  double last_change_detector = 1.0;     // phi(t) of the latest update
};

// Dense numerics, generic over the scalar type.

/// Logit choice probabilities exp(lambda*A_j) / sum_k exp(lambda*A_k), max-shifted.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> logit_choice(
    const Eigen::MatrixBase<Derived>& attractions, typename Derived::Scalar lambda) {
  using Scalar = typename Derived::Scalar;
  if (!attractions.allFinite()) throw NumericError("non-finite attraction");
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> z = lambda * attractions.derived();
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w = (z.array() - z.maxCoeff()).exp().matrix();
  return w / w.sum();
}

/// Attractions whose logit choice reproduces `probabilities` (entries floored at `floor`).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> inverse_logit(
    const Eigen::MatrixBase<Derived>& probabilities, typename Derived::Scalar lambda,
    typename Derived::Scalar floor) {
  return (probabilities.derived().array().max(floor).log() / lambda).matrix();
}

/// Index drawn from a probability vector by inversion of one uniform draw.
template <typename Derived>
Eigen::Index sample_index(const Eigen::MatrixBase<Derived>& probabilities, Rng& rng) {
  const double u = rng.uniform() * static_cast<double>(probabilities.sum());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
    acc += static_cast<double>(probabilities(i));
    if (u < acc) return i;
  }
  // Rounding left u at the very top; return the last index carrying mass.
  for (Eigen::Index i = probabilities.size() - 1; i > 0; --i)
    if (probabilities(i) > 0) return i;
  return 0;
}

/// Unnormalized Poisson weights e^-tau tau^k / k! for k = 0..k_max.
Eigen::VectorXd poisson_weights(double tau, int k_max);

/// Cognitive-hierarchy action distribution: level 0 uniform over actions, level k >= 1 on
/// level_k_choose(spec, k), levels weighted by renormalized truncated Poisson(tau).
Eigen::VectorXd chm_distribution(const GameSpec& spec, const EwaParams& params);

/// round(anchor * p^k) clamped to the action range.
int level_k_choose(const GameSpec& spec, int k);

EwaState ewa_init(const GameSpec& spec, const EwaParams& params);

/// One self-tuning EWA step given the own and opponent actions just played.
/// Throws DomainError for out-of-range actions or a state that does not fit the spec.
EwaState ewa_update(const EwaState& state, int own_action, int opp_action, const GameSpec& spec);

/// Current logit choice distribution over actions.
Eigen::VectorXd ewa_probabilities(const EwaState& state);

/// Samples an action from the logit distribution. Returns an action, not an index.
int ewa_choose(const EwaState& state, const GameSpec& spec, Rng& rng);

class EwaAgent final : public Agent {
 public:
  EwaAgent(const GameSpec& spec, EwaParams params, std::uint64_t seed);

  std::string kind() const override { return "ewa"; }
  Move act(const GameRequest& request) override;
  void observe(const Feedback& feedback) override;

  const EwaState& state() const { return state_; }

 private:
  GameSpec spec_;
  EwaState state_;
  Rng rng_;
};

class LevelKAgent final : public Agent {
 public:
  explicit LevelKAgent(int k);

  std::string kind() const override { return "level_k"; }
  Move act(const GameRequest& request) override;

 private:
  int k_;
};

/// Level-0 player choosing uniformly over the action range.
class RandomAgent final : public Agent {
 public:
  explicit RandomAgent(std::uint64_t seed) : rng_(seed) {}

  std::string kind() const override { return "random"; }
  Move act(const GameRequest& request) override;

 private:
  Rng rng_;
};

}  // namespace bcg
