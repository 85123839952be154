#pragma once

#include <array>
#include <limits>
#include <cstdint>
#include <string>
#include <string_view>

namespace bcg {

/// Exact rational used for the contest multiplier p.
struct Ratio {
  std::int64_t num = 2;
  std::int64_t den = 3;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;
  /// Accepts "n/d" or a decimal literal such as "0.7".
  static Ratio parse(std::string_view text);
  static Ratio from_double(double v);

  friend bool operator==(const Ratio& a, const Ratio& b) { return a.num * b.den == b.num * a.den; }
};

inline const char* kDefaultDescription =
    "You and one other participant each secretly write down a whole number from ${min} to "
    "${max}. Both numbers are averaged and the average is multiplied by ${p}. Whoever wrote "
    "the number nearer to that result wins; equally near numbers share the win.";

/// Two-player guessing contest: each player picks an integer in [action_min, action_max],
/// the one nearest to p times the mean of both picks wins.
struct GameSpec {
  Ratio p{2, 3};
  int action_min = 0;
  int action_max = 100;
  int anchor = 50;  // level-0 reference guess
  std::string description = kDefaultDescription;

  /// Throws DomainError when an invariant is broken.
  void validate() const;
  bool in_range(int guess) const { return guess >= action_min && guess <= action_max; }
  int num_actions() const { return action_max - action_min + 1; }
  int range() const { return action_max - action_min; }
  int index_of(int action) const { return action - action_min; }
  int action_at(int index) const { return action_min + index; }

  friend bool operator==(const GameSpec&, const GameSpec&) = default;
};

enum class Winner { First, Second, Tie };

std::string_view to_string(Winner w);
Winner winner_from_string(std::string_view s);

struct Outcome {
  std::array<int, 2> guesses{};
  double mean = 0.0;
  double target = 0.0;
  std::array<double, 2> payoffs{};
  Winner winner = Winner::Tie;
};

/// U_i = -|a_i - p*mu| for both players, mu the mean guess.
/// Throws RangeError naming "first" or "second" for an out-of-range guess.
Outcome utility(const GameSpec& spec, int first, int second);

/// Payoff of `own` against `other`, without range checks.
double payoff(const GameSpec& spec, int own, int other);

/// |own - target| scaled by 2*den to an integer, for exact closeness comparisons.
long long scaled_distance(const GameSpec& spec, int own, int other);

/// Inverts guess = anchor * p^k. Returns +infinity for a zero guess.
/// Throws DomainError for negative guesses, guesses above action_max, or a non-positive anchor.
double k_level_from_guess(const GameSpec& spec, double guess);

inline bool is_unbounded(double k) { return k == std::numeric_limits<double>::infinity(); }

}  // namespace bcg
