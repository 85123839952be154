#include "bcg/game.hpp"

#include <charconv>
#include <cmath>
#include <numeric>

#include "bcg/error.hpp"

namespace bcg {

namespace {

std::int64_t parse_int(std::string_view s, std::string_view whole) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw DomainError("malformed ratio '" + std::string(whole) + "'");
  return v;
}

Ratio reduced(std::int64_t num, std::int64_t den) {
  if (den == 0) throw DomainError("ratio with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const auto g = std::gcd(num, den);
  return g > 1 ? Ratio{num / g, den / g} : Ratio{num, den};
}

double target_of(const GameSpec& spec, int first, int second) {
  // Exact when the quotient is representable, e.g. p=2/3 with a+b=30.
  return static_cast<double>(spec.p.num * (first + second)) / (2.0 * static_cast<double>(spec.p.den));
}

}  // namespace

std::string Ratio::str() const {
  return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

Ratio Ratio::parse(std::string_view text) {
  if (auto slash = text.find('/'); slash != std::string_view::npos)
    return reduced(parse_int(text.substr(0, slash), text), parse_int(text.substr(slash + 1), text));
  auto dot = text.find('.');
  if (dot == std::string_view::npos) return reduced(parse_int(text, text), 1);
  const auto frac = text.substr(dot + 1);
  if (frac.size() > 12) throw DomainError("too many decimal places in '" + std::string(text) + "'");
  std::int64_t den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  std::string digits(text.substr(0, dot));
  digits += frac;
  return reduced(parse_int(digits, text), den);
}

Ratio Ratio::from_double(double v) {
  if (!std::isfinite(v)) throw DomainError("non-finite ratio");
  constexpr std::int64_t den = 1'000'000'000;
  return reduced(static_cast<std::int64_t>(std::llround(v * den)), den);
}

void GameSpec::validate() const {
  if (p.den <= 0 || p.num <= 0 || p.num >= p.den)
    throw DomainError("p must lie strictly between 0 and 1, got " + p.str());
  if (action_min >= action_max)
    throw DomainError("action_min must be below action_max");
  if (anchor < action_min || anchor > action_max)
    throw DomainError("anchor must lie within the action range");
}

std::string_view to_string(Winner w) {
  switch (w) {
    case Winner::First: return "first";
    case Winner::Second: return "second";
    case Winner::Tie: return "tie";
  }
  return "tie";
}

Winner winner_from_string(std::string_view s) {
  if (s == "first") return Winner::First;
  if (s == "second") return Winner::Second;
  if (s == "tie") return Winner::Tie;
  throw ParseError("unknown winner '" + std::string(s) + "'");
}

double payoff(const GameSpec& spec, int own, int other) {
  return -std::abs(own - target_of(spec, own, other));
}

long long scaled_distance(const GameSpec& spec, int own, int other) {
  const long long num = spec.p.num, den = spec.p.den;
  const long long d = 2 * den * own - num * (static_cast<long long>(own) + other);
  return d < 0 ? -d : d;
}

Outcome utility(const GameSpec& spec, int first, int second) {
  auto check = [&](int guess, const char* who) {
    if (!spec.in_range(guess))
      throw RangeError(who, std::string("guess of ") + who + " player (" + std::to_string(guess) +
                                ") outside [" + std::to_string(spec.action_min) + ", " +
                                std::to_string(spec.action_max) + "]");
  };
  check(first, "first");
  check(second, "second");

  Outcome out;
  out.guesses = {first, second};
  out.mean = (first + second) / 2.0;
  out.target = target_of(spec, first, second);
  out.payoffs = {-std::abs(first - out.target), -std::abs(second - out.target)};
  const long long d0 = scaled_distance(spec, first, second), d1 = scaled_distance(spec, second, first);
  if (d0 < d1)
    out.winner = Winner::First;
  else if (d1 < d0)
    out.winner = Winner::Second;
  else
    out.winner = Winner::Tie;
  return out;
}

double k_level_from_guess(const GameSpec& spec, double guess) {
  if (spec.anchor <= 0) throw DomainError("k-level conversion needs a positive anchor");
  if (!(guess >= 0.0)) throw DomainError("k-level of a negative guess is undefined");
  if (guess > spec.action_max) throw DomainError("guess above action_max");
  if (guess == 0.0) return std::numeric_limits<double>::infinity();
  return std::log(guess / spec.anchor) / std::log(spec.p.value());
}

}  // namespace bcg
