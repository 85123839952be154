#include "bcg/records.hpp"

#include "bcg/error.hpp"

namespace bcg {

using nlohmann::json;

namespace {

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}

}  // namespace

json game_to_json(const GameSpec& spec) {
  return json{{"p", spec.p.str()},
              {"action_min", spec.action_min},
              {"action_max", spec.action_max},
              {"anchor", spec.anchor},
              {"description", spec.description}};
}

GameSpec game_from_json(const json& j) {
  GameSpec spec;
  spec.p = Ratio::parse(j.at("p").get<std::string>());
  spec.action_min = j.at("action_min").get<int>();
  spec.action_max = j.at("action_max").get<int>();
  spec.anchor = j.at("anchor").get<int>();
  spec.description = j.at("description").get<std::string>();
  return spec;
}

json trace_to_json(const ReasoningTrace& t) {
  return json{{"text", t.reasoning_text},
              {"predicted", t.predicted_opponent_guess},
              {"kappa", t.kappa},
              {"kappa_source", t.kappa_source == KappaSource::Analysis ? "analysis" : "heuristic"},
              {"prompts", t.prompts},
              {"responses", t.raw_responses}};
}

ReasoningTrace trace_from_json(const json& j) {
  ReasoningTrace t;
  t.reasoning_text = j.at("text").get<std::string>();
  t.predicted_opponent_guess = j.at("predicted").get<int>();
  t.kappa = j.at("kappa").get<int>();
  const auto source = j.at("kappa_source").get<std::string>();
  if (source != "analysis" && source != "heuristic") throw ParseError("unknown kappa_source " + source);
  t.kappa_source = source == "analysis" ? KappaSource::Analysis : KappaSource::Heuristic;
  t.prompts = j.at("prompts").get<std::vector<std::string>>();
  t.raw_responses = j.at("responses").get<std::vector<std::string>>();
  return t;
}

json hypergame_to_json(const Hypergame& h) {
  if (h.is_leaf()) {
    const auto& g = h.game();
    return json{{"kind", "leaf"},
                {"level", 0},
                {"owner", g.owner},
                {"players", g.players},
                {"perspectives", g.perspectives.perspectives()},
                {"predicted", optional_json(g.predicted_opponent_guess)}};
  }
  json children = json::array();
  for (const auto& c : h.node().children) children.push_back(hypergame_to_json(c));
  return json{{"kind", "composite"},
              {"level", h.level()},
              {"owner", optional_json(h.node().owner)},
              {"children", std::move(children)}};
}

Hypergame hypergame_from_json(const json& j, const GameSpec& spec) {
  const auto kind = j.at("kind").get<std::string>();
  Hypergame h = [&] {
    if (kind == "leaf") {
      PerceptualGame g{j.at("owner").get<PlayerId>(), j.at("players").get<std::array<PlayerId, 2>>(), spec,
                       PerspectiveSeq(j.at("perspectives").get<std::vector<PlayerId>>()),
                       optional_from<int>(j.at("predicted"))};
      if (g.perspectives.interpreter() != g.owner) throw ParseError("leaf owner is not its first perspective");
      return Hypergame::leaf(std::move(g));
    }
    if (kind != "composite") throw ParseError("unknown hypergame node kind " + kind);
    std::vector<Hypergame> children;
    for (const auto& c : j.at("children")) children.push_back(hypergame_from_json(c, spec));
    return Hypergame::composite(std::move(children), optional_from<PlayerId>(j.at("owner")));
  }();
  if (h.level() != j.at("level").get<int>()) throw ParseError("hypergame level does not match its children");
  return h;
}

json record_to_json(const MatchRecord& r) {
  json j;
  j["round"] = r.request.round;
  j["umpire"] = r.request.umpire;
  j["game"] = game_to_json(r.request.spec);
  j["pair"] = r.request.players;
  j["groups"] = r.groups;
  j["guesses"] = json::array({optional_json(r.guesses[0]), optional_json(r.guesses[1])});
  if (r.outcome) {
    j["mean"] = r.outcome->mean;
    j["target"] = r.outcome->target;
    j["winner"] = std::string(to_string(r.outcome->winner));
    j["payoffs"] = r.outcome->payoffs;
  } else {
    j["mean"] = nullptr;
    j["target"] = nullptr;
    j["winner"] = nullptr;
    j["payoffs"] = nullptr;
  }
  if (r.traces[0] || r.traces[1]) {
    j["traces"] = json::array();
    for (const auto& t : r.traces) j["traces"].push_back(t ? trace_to_json(*t) : json(nullptr));
  } else {
    j["traces"] = nullptr;
  }
  j["hypergame"] = r.hypergame ? hypergame_to_json(*r.hypergame) : json(nullptr);
  j["invalid"] = r.invalid;
  j["invalid_reasons"] = json::array({optional_json(r.invalid_reasons[0]), optional_json(r.invalid_reasons[1])});
  j["seed"] = r.seed;
  return j;
}

MatchRecord record_from_json(const json& j) {
  try {
    MatchRecord r;
    r.request.round = j.at("round").get<int>();
    r.request.umpire = j.at("umpire").get<std::string>();
    r.request.spec = game_from_json(j.at("game"));
    r.request.players = j.at("pair").get<std::array<PlayerId, 2>>();
    r.groups = j.at("groups").get<std::array<std::string, 2>>();
    for (int k = 0; k < 2; ++k) {
      r.guesses[k] = optional_from<int>(j.at("guesses").at(k));
      r.invalid_reasons[k] = optional_from<std::string>(j.at("invalid_reasons").at(k));
    }
    r.invalid = j.at("invalid").get<std::array<bool, 2>>();
    if (!j.at("winner").is_null()) {
      Outcome o;
      o.guesses = {r.guesses[0].value(), r.guesses[1].value()};
      o.mean = j.at("mean").get<double>();
      o.target = j.at("target").get<double>();
      o.winner = winner_from_string(j.at("winner").get<std::string>());
      o.payoffs = j.at("payoffs").get<std::array<double, 2>>();
      r.outcome = o;
    }
    if (!j.at("traces").is_null())
      for (int k = 0; k < 2; ++k)
        if (!j["traces"].at(k).is_null()) r.traces[k] = trace_from_json(j["traces"][k]);
    if (!j.at("hypergame").is_null()) r.hypergame = hypergame_from_json(j["hypergame"], r.request.spec);
    r.seed = j.at("seed").get<std::uint64_t>();
    if (r.outcome.has_value() != (r.guesses[0].has_value() && r.guesses[1].has_value()))
      throw ParseError("record has an outcome without two valid guesses, or the reverse");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed match record: ") + e.what());
  } catch (const std::bad_optional_access&) {
    throw ParseError("malformed match record: outcome without guesses");
  } catch (const DomainError& e) {
    throw ParseError(std::string("malformed match record: ") + e.what());
  }
}

std::string record_to_line(const MatchRecord& record) {
  return record_to_json(record).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

}  // namespace bcg
