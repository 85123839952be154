#include "bcg/umpire.hpp"

#include <algorithm>
#include <future>
#include <set>

#include "bcg/error.hpp"
#include "bcg/llm/reasoner.hpp"

namespace bcg {

std::string PairingScheme::str() const {
  switch (kind) {
    case Kind::AllPairs: return "all_pairs";
    case Kind::FixedPairs: return "fixed_pairs";
    case Kind::SelfPairs: return "self_pairs(" + model + ")";
  }
  return "fixed_pairs";
}

std::array<PlayerId, 2> self_pair_ids(const std::string& model, int round) {
  const auto prefix = model + "/r" + std::to_string(round) + "/";
  return {prefix + "a", prefix + "b"};
}

std::vector<MatchRequest> make_pairings(const std::vector<PlayerId>& agent_ids, const PairingScheme& scheme,
                                        int round, const GameSpec& spec) {
  std::vector<MatchRequest> out;
  switch (scheme.kind) {
    case PairingScheme::Kind::AllPairs:
      if (agent_ids.size() < 2) throw ConfigError("all_pairs needs at least two agents");
      for (std::size_t i = 0; i < agent_ids.size(); ++i)
        for (std::size_t j = i + 1; j < agent_ids.size(); ++j)
          out.push_back({spec, {agent_ids[i], agent_ids[j]}, round});
      break;
    case PairingScheme::Kind::FixedPairs:
      if (agent_ids.empty() || agent_ids.size() % 2 != 0)
        throw ConfigError("fixed_pairs needs an even, non-zero number of agents");
      for (std::size_t i = 0; i < agent_ids.size(); i += 2)
        out.push_back({spec, {agent_ids[i], agent_ids[i + 1]}, round});
      break;
    case PairingScheme::Kind::SelfPairs:
      if (std::find(agent_ids.begin(), agent_ids.end(), scheme.model) == agent_ids.end())
        throw ConfigError("self_pairs model '" + scheme.model + "' is not a configured agent");
      out.push_back({spec, self_pair_ids(scheme.model, round), round});
      break;
  }
  for (const auto& r : out)
    if (r.players[0] == r.players[1]) throw ConfigError("agent " + r.players[0] + " cannot play itself");
  return out;
}

namespace {

Move collect(Agent& agent, const GameRequest& request) {
  try {
    return agent.act(request);
  } catch (const FixtureMissError&) {
    throw;
  } catch (const Error& e) {
    return Move{std::nullopt, std::nullopt, std::string(e.what())};
  }
}

}  // namespace

MatchRecord run_match(const MatchRequest& request, std::array<Agent*, 2> agents, std::uint64_t seed) {
  if (!agents[0] || !agents[1]) throw ConfigError("match requested with an unregistered agent");
  MatchRecord record;
  record.request = request;
  record.seed = seed;
  record.started = std::chrono::system_clock::now();

  const GameRequest first{request.spec, request.players[0], request.players[1], request.round};
  const GameRequest second{request.spec, request.players[1], request.players[0], request.round};
  auto pending = std::async(std::launch::async, [&] { return collect(*agents[1], second); });
  std::array<Move, 2> moves;
  try {
    moves[0] = collect(*agents[0], first);
  } catch (...) {
    pending.wait();
    throw;
  }
  moves[1] = pending.get();

  for (int k = 0; k < 2; ++k) {
    auto& move = moves[k];
    record.traces[k] = move.trace;
    if (move.guess && request.spec.in_range(*move.guess)) {
      record.guesses[k] = move.guess;
    } else {
      record.invalid[k] = true;
      record.guesses[k] = std::nullopt;
      record.invalid_reasons[k] =
          move.guess ? "guess " + std::to_string(*move.guess) + " outside the action range"
                     : move.invalid_reason.value_or("no guess returned");
    }
  }

  if (record.guesses[0] && record.guesses[1]) {
    record.outcome = utility(request.spec, *record.guesses[0], *record.guesses[1]);
    agents[0]->observe({*record.guesses[0], *record.guesses[1], record.outcome->payoffs[0]});
    agents[1]->observe({*record.guesses[1], *record.guesses[0], record.outcome->payoffs[1]});
  }

  if (record.traces[0] && record.traces[1]) {
    record.hypergame = compose_hypergame(
        llm::to_perceptual_game(*record.traces[0], request.players[0], request.players[1], request.spec),
        llm::to_perceptual_game(*record.traces[1], request.players[1], request.players[0], request.spec));
  }
  record.finished = std::chrono::system_clock::now();
  return record;
}

std::vector<MatchRecord> run_round(const std::vector<MatchRequest>& requests, const AgentResolver& resolve,
                                   const std::function<std::uint64_t(std::size_t)>& seed_of, bool parallel) {
  std::vector<std::optional<MatchRecord>> slots(requests.size());
  auto play = [&](std::size_t i) {
    const auto& r = requests[i];
    slots[i] = run_match(r, {resolve(r.players[0]), resolve(r.players[1])}, seed_of(i));
  };

  if (!parallel) {
    for (std::size_t i = 0; i < requests.size(); ++i) play(i);
  } else {
    // Waves of matches in which no agent appears twice. A skipped match still claims its
    // agents, so every agent plays its matches in request order, as in a serial run.
    std::vector<bool> done(requests.size(), false);
    std::size_t remaining = requests.size();
    while (remaining > 0) {
      std::set<PlayerId> busy;
      std::vector<std::size_t> wave;
      for (std::size_t i = 0; i < requests.size(); ++i) {
        if (done[i]) continue;
        const auto& p = requests[i].players;
        const bool free = !busy.contains(p[0]) && !busy.contains(p[1]);
        busy.insert(p[0]);
        busy.insert(p[1]);
        if (free) wave.push_back(i);
      }
      std::vector<std::future<void>> running;
      for (auto i : wave) running.push_back(std::async(std::launch::async, play, i));
      for (auto& f : running) f.wait();
      for (auto& f : running) f.get();
      for (auto i : wave) done[i] = true;
      remaining -= wave.size();
    }
  }

  std::vector<MatchRecord> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace bcg
