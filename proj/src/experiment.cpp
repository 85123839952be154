#include "bcg/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "bcg/error.hpp"
#include "bcg/records.hpp"
#include "bcg/rng.hpp"

namespace bcg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr std::uint64_t kJsonSafeMask = (std::uint64_t{1} << 53) - 1;

std::string join(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += (out.empty() ? "" : "\n") + l;
  return out;
}

// Accumulates problems while walking a document, so every error is reported at once.
class Reader {
 public:
  std::vector<std::string> errors;

  void allow(const json& obj, const std::string& where, std::initializer_list<std::string_view> keys) {
    if (!obj.is_object()) {
      errors.push_back(where + ": expected an object");
      return;
    }
    for (const auto& [k, v] : obj.items())
      if (std::find(keys.begin(), keys.end(), k) == keys.end())
        errors.push_back(where + ": unknown key '" + k + "'");
  }

  template <typename T>
  std::optional<T> get(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) return std::nullopt;
    try {
      return obj.at(key).get<T>();
    } catch (const json::exception&) {
      errors.push_back(where + "." + key + ": wrong type");
      return std::nullopt;
    }
  }

  template <typename T>
  void read(const json& obj, const std::string& key, const std::string& where, T& into) {
    if (auto v = get<T>(obj, key, where)) into = *v;
  }

  void fail(std::string message) { errors.push_back(std::move(message)); }
};

Ratio read_ratio(Reader& rd, const json& game) {
  if (!game.contains("p")) return Ratio{2, 3};
  const auto& p = game.at("p");
  try {
    if (p.is_string()) return Ratio::parse(p.get<std::string>());
    if (p.is_number_integer()) return Ratio{p.get<std::int64_t>(), 1};
    if (p.is_number()) return Ratio::parse(p.dump());
  } catch (const DomainError& e) {
    rd.fail(std::string("game.p: ") + e.what());
    return Ratio{2, 3};
  }
  rd.fail("game.p: expected a number or an \"n/d\" string");
  return Ratio{2, 3};
}

GameSpec read_game(Reader& rd, const json& doc) {
  GameSpec spec;
  if (!doc.contains("game")) return spec;
  const auto& g = doc.at("game");
  rd.allow(g, "game", {"p", "action_min", "action_max", "anchor", "description"});
  if (!g.is_object()) return spec;
  spec.p = read_ratio(rd, g);
  rd.read(g, "action_min", "game", spec.action_min);
  rd.read(g, "action_max", "game", spec.action_max);
  rd.read(g, "anchor", "game", spec.anchor);
  rd.read(g, "description", "game", spec.description);
  try {
    spec.validate();
  } catch (const DomainError& e) {
    rd.fail(std::string("game: ") + e.what());
  }
  return spec;
}

std::optional<AgentKind> kind_from(const std::string& s) {
  if (s == "ewa") return AgentKind::Ewa;
  if (s == "level_k") return AgentKind::LevelK;
  if (s == "random") return AgentKind::Random;
  if (s == "llm") return AgentKind::Llm;
  return std::nullopt;
}

AgentConfig read_agent(Reader& rd, const json& a, std::size_t index) {
  const std::string where = "agents[" + std::to_string(index) + "]";
  AgentConfig cfg;
  rd.read(a, "id", where, cfg.id);
  const auto kind = rd.get<std::string>(a, "kind", where);
  if (!kind) {
    rd.fail(where + ": missing kind");
  } else if (auto k = kind_from(*kind)) {
    cfg.kind = *k;
  } else {
    rd.fail(where + ": unknown kind '" + *kind + "'");
  }
  if (cfg.id.empty()) rd.fail(where + ": missing id");
  if (cfg.id.find('/') != std::string::npos) rd.fail(where + ": id must not contain '/'");
  rd.read(a, "group", where, cfg.group);
  if (cfg.group.empty()) cfg.group = cfg.id;

  switch (cfg.kind) {
    case AgentKind::Ewa: {
      rd.allow(a, where, {"id", "kind", "group", "params"});
      if (a.contains("params")) {
        const auto& p = a.at("params");
        rd.allow(p, where + ".params", {"lambda", "tau", "growth_kappa", "k_max", "epsilon", "payoff_offset"});
        rd.read(p, "lambda", where + ".params", cfg.ewa.lambda);
        rd.read(p, "tau", where + ".params", cfg.ewa.tau);
        rd.read(p, "growth_kappa", where + ".params", cfg.ewa.growth_kappa);
        rd.read(p, "k_max", where + ".params", cfg.ewa.k_max);
        rd.read(p, "epsilon", where + ".params", cfg.ewa.epsilon);
        if (auto off = rd.get<double>(p, "payoff_offset", where + ".params")) cfg.ewa.payoff_offset = off;
      }
      try {
        cfg.ewa.validate();
      } catch (const DomainError& e) {
        rd.fail(where + ": " + e.what());
      }
      break;
    }
    case AgentKind::LevelK:
      rd.allow(a, where, {"id", "kind", "group", "level"});
      rd.read(a, "level", where, cfg.level);
      if (cfg.level < 0) rd.fail(where + ": level must be >= 0");
      break;
    case AgentKind::Random:
      rd.allow(a, where, {"id", "kind", "group"});
      break;
    case AgentKind::Llm:
      rd.allow(a, where, {"id", "kind", "group", "profile", "model_id", "provider", "temperature", "max_tokens",
                          "max_attempts"});
      if (auto p = rd.get<std::string>(a, "profile", where)) cfg.profile = p;
      if (auto p = rd.get<std::string>(a, "provider", where)) cfg.provider = p;
      rd.read(a, "model_id", where, cfg.model_id);
      rd.read(a, "temperature", where, cfg.temperature);
      rd.read(a, "max_tokens", where, cfg.max_tokens);
      rd.read(a, "max_attempts", where, cfg.max_attempts);
      if (cfg.model_id.empty()) rd.fail(where + ": llm agents need a model_id");
      if (!(cfg.temperature >= 0.0 && cfg.temperature <= 2.0)) rd.fail(where + ": temperature must lie in [0, 2]");
      if (cfg.max_tokens < 1) rd.fail(where + ": max_tokens must be positive");
      if (cfg.max_attempts < 1) rd.fail(where + ": max_attempts must be positive");
      break;
  }
  return cfg;
}

llm::ProviderProfile read_provider(Reader& rd, const json& p, const std::string& where) {
  if (p.is_string()) {
    try {
      return llm::ProviderProfile::preset(p.get<std::string>());
    } catch (const ConfigError& e) {
      rd.fail(where + ": " + e.what());
      return llm::ProviderProfile::openai();
    }
  }
  rd.allow(p, where, {"preset", "name", "url", "api_key_env", "headers", "body", "response_text_pointer",
                      "prompt_tokens_pointer", "completion_tokens_pointer", "timeout_seconds"});
  llm::ProviderProfile profile;
  if (auto preset = rd.get<std::string>(p, "preset", where)) {
    try {
      profile = llm::ProviderProfile::preset(*preset);
    } catch (const ConfigError& e) {
      rd.fail(where + ": " + e.what());
    }
  }
  rd.read(p, "name", where, profile.name);
  rd.read(p, "url", where, profile.url);
  rd.read(p, "api_key_env", where, profile.api_key_env);
  if (auto headers = rd.get<std::map<std::string, std::string>>(p, "headers", where))
    profile.headers.assign(headers->begin(), headers->end());
  if (p.is_object() && p.contains("body")) profile.body = p.at("body");
  rd.read(p, "response_text_pointer", where, profile.response_text_pointer);
  rd.read(p, "prompt_tokens_pointer", where, profile.prompt_tokens_pointer);
  rd.read(p, "completion_tokens_pointer", where, profile.completion_tokens_pointer);
  rd.read(p, "timeout_seconds", where, profile.timeout_seconds);
  if (profile.url.empty()) rd.fail(where + ": provider needs a url");
  if (profile.response_text_pointer.empty()) rd.fail(where + ": provider needs response_text_pointer");
  return profile;
}

BackendConfig read_backend(Reader& rd, const json& b, const fs::path& base) {
  BackendConfig cfg;
  rd.allow(b, "backend", {"mode", "fixtures", "provider", "concurrency", "retry"});
  const auto mode = rd.get<std::string>(b, "mode", "backend").value_or("replay");
  if (mode == "replay")
    cfg.mode = BackendMode::Replay;
  else if (mode == "live")
    cfg.mode = BackendMode::Live;
  else if (mode == "record")
    cfg.mode = BackendMode::Record;
  else
    rd.fail("backend.mode: unknown mode '" + mode + "'");
  if (auto f = rd.get<std::string>(b, "fixtures", "backend")) cfg.fixtures = base / *f;
  if (b.is_object() && b.contains("provider")) cfg.provider = read_provider(rd, b.at("provider"), "backend.provider");
  rd.read(b, "concurrency", "backend", cfg.concurrency);
  if (cfg.concurrency < 1) rd.fail("backend.concurrency must be at least 1");
  if (b.is_object() && b.contains("retry")) {
    const auto& r = b.at("retry");
    rd.allow(r, "backend.retry", {"max_attempts", "base_delay_ms", "factor"});
    rd.read(r, "max_attempts", "backend.retry", cfg.retry.max_attempts);
    if (auto ms = rd.get<long long>(r, "base_delay_ms", "backend.retry")) cfg.retry.base_delay = std::chrono::milliseconds(*ms);
    rd.read(r, "factor", "backend.retry", cfg.retry.factor);
  }
  if (cfg.mode != BackendMode::Live && cfg.fixtures.empty()) rd.fail("backend.fixtures is required for " + mode + " mode");
  if (cfg.mode == BackendMode::Replay && !cfg.fixtures.empty() && !fs::is_directory(cfg.fixtures))
    rd.fail("backend.fixtures: directory " + cfg.fixtures.string() + " does not exist");
  return cfg;
}

llm::PromptTemplates read_prompts(Reader& rd, const json& p) {
  llm::PromptTemplates t;
  rd.allow(p, "prompts", {"system", "revise_role", "revise_request", "revise_format", "analyze_role",
                          "analyze_request", "analyze_format", "decide_role", "decide_request", "decide_format",
                          "reminder"});
  rd.read(p, "system", "prompts", t.system);
  rd.read(p, "revise_role", "prompts", t.revise_role);
  rd.read(p, "revise_request", "prompts", t.revise_request);
  rd.read(p, "revise_format", "prompts", t.revise_format);
  rd.read(p, "analyze_role", "prompts", t.analyze_role);
  rd.read(p, "analyze_request", "prompts", t.analyze_request);
  rd.read(p, "analyze_format", "prompts", t.analyze_format);
  rd.read(p, "decide_role", "prompts", t.decide_role);
  rd.read(p, "decide_request", "prompts", t.decide_request);
  rd.read(p, "decide_format", "prompts", t.decide_format);
  rd.read(p, "reminder", "prompts", t.reminder);
  return t;
}

PairingScheme read_scheme(Reader& rd, const json& doc) {
  if (!doc.contains("scheme")) return PairingScheme::fixed_pairs();
  const auto& s = doc.at("scheme");
  if (s.is_string()) {
    const auto name = s.get<std::string>();
    if (name == "all_pairs") return PairingScheme::all_pairs();
    if (name == "fixed_pairs") return PairingScheme::fixed_pairs();
    rd.fail("scheme: unknown scheme '" + name + "' (self_pairs takes {\"kind\": \"self_pairs\", \"model\": id})");
    return {};
  }
  rd.allow(s, "scheme", {"kind", "model"});
  const auto kind = rd.get<std::string>(s, "kind", "scheme").value_or("");
  if (kind == "all_pairs") return PairingScheme::all_pairs();
  if (kind == "fixed_pairs") return PairingScheme::fixed_pairs();
  if (kind == "self_pairs") {
    const auto model = rd.get<std::string>(s, "model", "scheme");
    if (!model) rd.fail("scheme: self_pairs needs a model");
    return PairingScheme::self_pairs(model.value_or(""));
  }
  rd.fail("scheme: unknown kind '" + kind + "'");
  return {};
}

}  // namespace

ConfigErrors::ConfigErrors(std::vector<std::string> problems)
    : ConfigError(join(problems)), problems_(std::move(problems)) {}

bool ExperimentConfig::has_llm_agents() const {
  return std::any_of(agents.begin(), agents.end(), [](const auto& a) { return a.kind == AgentKind::Llm; });
}

ExperimentConfig parse_config(const json& doc, const fs::path& base_dir) {
  Reader rd;
  ExperimentConfig cfg;
  cfg.source = doc;
  rd.allow(doc, "config", {"name", "game", "agents", "scheme", "rounds", "seed", "parallel", "backend", "prompts",
                           "output"});
  if (!doc.is_object()) throw ConfigErrors(rd.errors);

  rd.read(doc, "name", "config", cfg.name);
  cfg.game = read_game(rd, doc);
  if (!doc.contains("agents") || !doc.at("agents").is_array() || doc.at("agents").empty()) {
    rd.fail("agents: expected a non-empty list");
  } else {
    std::size_t i = 0;
    for (const auto& a : doc.at("agents")) cfg.agents.push_back(read_agent(rd, a, i++));
  }
  std::set<std::string> ids;
  for (const auto& a : cfg.agents)
    if (!a.id.empty() && !ids.insert(a.id).second) rd.fail("agents: duplicate id '" + a.id + "'");

  cfg.scheme = read_scheme(rd, doc);
  rd.read(doc, "rounds", "config", cfg.rounds);
  if (cfg.rounds < 1) rd.fail("rounds must be at least 1");
  if (auto seed = rd.get<std::uint64_t>(doc, "seed", "config")) cfg.seed = *seed;
  rd.read(doc, "parallel", "config", cfg.parallel);
  if (doc.contains("backend")) cfg.backend = read_backend(rd, doc.at("backend"), base_dir);
  if (doc.contains("prompts")) cfg.prompts = read_prompts(rd, doc.at("prompts"));
  cfg.output = base_dir / rd.get<std::string>(doc, "output", "config").value_or("results");

  if (cfg.has_llm_agents() && !cfg.backend) rd.fail("backend: required when llm agents are configured");
  if (!cfg.agents.empty()) {
    std::vector<PlayerId> list;
    for (const auto& a : cfg.agents) list.push_back(a.id);
    try {
      (void)make_pairings(list, cfg.scheme, 1, cfg.game);
    } catch (const ConfigError& e) {
      rd.fail(std::string("scheme: ") + e.what());
    }
  }
  if (!rd.errors.empty()) throw ConfigErrors(rd.errors);
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigErrors({"cannot open config " + path.string()});
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigErrors({"config " + path.string() + " is not valid JSON: " + e.what()});
  }
  return parse_config(doc, path.parent_path());
}

std::shared_ptr<llm::ChatBackend> make_backend(const BackendConfig& config,
                                               const std::optional<std::string>& provider_override) {
  const auto profile = provider_override ? llm::ProviderProfile::preset(*provider_override) : config.provider;
  switch (config.mode) {
    case BackendMode::Replay:
      return std::make_shared<llm::ReplayBackend>(std::make_shared<llm::FixtureStore>(config.fixtures));
    case BackendMode::Live:
      return std::make_shared<llm::LiveBackend>(profile, config.retry, config.concurrency);
    case BackendMode::Record:
      return std::make_shared<llm::RecordingBackend>(
          std::make_shared<llm::LiveBackend>(profile, config.retry, config.concurrency),
          std::make_shared<llm::FixtureStore>(config.fixtures));
  }
  throw ConfigError("unknown backend mode");
}

namespace {

std::unique_ptr<Agent> make_agent(const AgentConfig& a, const ExperimentConfig& cfg, std::uint64_t seed,
                                  const std::shared_ptr<llm::ChatBackend>& backend) {
  switch (a.kind) {
    case AgentKind::Ewa: return std::make_unique<EwaAgent>(cfg.game, a.ewa, seed);
    case AgentKind::LevelK: return std::make_unique<LevelKAgent>(a.level);
    case AgentKind::Random: return std::make_unique<RandomAgent>(seed);
    case AgentKind::Llm: {
      llm::ReasonerConfig rc;
      rc.model_id = a.model_id;
      rc.temperature = a.temperature;
      rc.max_tokens = a.max_tokens;
      rc.profile = a.profile;
      rc.templates = cfg.prompts;
      rc.max_attempts = a.max_attempts;
      return std::make_unique<llm::LlmAgent>(rc, backend);
    }
  }
  throw ConfigError("unknown agent kind");
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, const std::optional<fs::path>& output,
                         std::shared_ptr<llm::ChatBackend> backend) {
  const fs::path dir = output.value_or(cfg.output);
  fs::create_directories(dir);
  RunResult result{dir / "records.jsonl", dir / "manifest.json", 0};
  const auto started = utc_now();

  // One backend per provider; an injected backend serves every llm agent.
  std::map<std::string, std::shared_ptr<llm::ChatBackend>> backends;
  auto backend_for = [&](const AgentConfig& a) -> std::shared_ptr<llm::ChatBackend> {
    if (a.kind != AgentKind::Llm) return nullptr;
    if (backend) return backend;
    const auto key = a.provider.value_or("");
    auto& slot = backends[key];
    if (!slot) slot = make_backend(*cfg.backend, a.provider);
    return slot;
  };

  std::map<std::string, const AgentConfig*> by_id;
  std::vector<PlayerId> ids;
  for (const auto& a : cfg.agents) {
    by_id[a.id] = &a;
    ids.push_back(a.id);
  }

  std::map<PlayerId, std::unique_ptr<Agent>> agents;
  std::map<PlayerId, std::string> groups;
  if (cfg.scheme.kind != PairingScheme::Kind::SelfPairs) {
    for (std::size_t i = 0; i < cfg.agents.size(); ++i) {
      const auto& a = cfg.agents[i];
      agents[a.id] = make_agent(a, cfg, derive_seed(cfg.seed, {1, i}), backend_for(a));
      groups[a.id] = a.group;
    }
  }

  std::ofstream out(result.records, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + result.records.string());
  std::size_t invalid_moves = 0;

  for (int round = 1; round <= cfg.rounds; ++round) {
    const auto requests = make_pairings(ids, cfg.scheme, round, cfg.game);
    if (cfg.scheme.kind == PairingScheme::Kind::SelfPairs) {
      const auto& model = *by_id.at(cfg.scheme.model);
      const auto pair = self_pair_ids(model.id, round);
      for (std::uint64_t slot = 0; slot < 2; ++slot) {
        agents[pair[slot]] =
            make_agent(model, cfg, derive_seed(cfg.seed, {2, static_cast<std::uint64_t>(round), slot}), backend_for(model));
        groups[pair[slot]] = model.group;
      }
    }
    auto records = run_round(
        requests, [&](const PlayerId& id) -> Agent* {
          auto it = agents.find(id);
          return it == agents.end() ? nullptr : it->second.get();
        },
        [&](std::size_t i) {
          return derive_seed(cfg.seed, {3, static_cast<std::uint64_t>(round), i}) & kJsonSafeMask;
        },
        cfg.parallel);
    for (auto& r : records) {
      r.groups = {groups.at(r.request.players[0]), groups.at(r.request.players[1])};
      invalid_moves += static_cast<std::size_t>(r.invalid[0]) + static_cast<std::size_t>(r.invalid[1]);
      out << record_to_line(r) << '\n';
      ++result.matches;
    }
    out.flush();
    if (cfg.scheme.kind == PairingScheme::Kind::SelfPairs)
      for (const auto& r : requests)
        for (const auto& p : r.players) agents.erase(p);
  }

  json manifest{{"name", cfg.name},
                {"version", kVersion},
                {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                              std::to_string(EIGEN_MINOR_VERSION)},
                {"seed", cfg.seed},
                {"rounds", cfg.rounds},
                {"scheme", cfg.scheme.str()},
                {"matches", result.matches},
                {"invalid_moves", invalid_moves},
                {"started_utc", started},
                {"finished_utc", utc_now()},
                {"records", result.records.filename().string()},
                {"config", cfg.source}};
  std::ofstream(result.manifest, std::ios::trunc) << manifest.dump(2) << '\n';
  return result;
}

std::vector<MatchRecord> read_records(const fs::path& jsonl) {
  std::ifstream in(jsonl);
  if (!in) throw ParseError("cannot open results " + jsonl.string());
  std::vector<MatchRecord> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw ParseError("line " + std::to_string(number) + " of " + jsonl.string() + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(number) + " of " + jsonl.string() + ": " + e.what());
    }
  }
  return out;
}

Grouping grouping_from_string(const std::string& s) {
  if (s == "group") return Grouping::Group;
  if (s == "agent") return Grouping::Agent;
  if (s == "all") return Grouping::All;
  throw ConfigError("unknown grouping '" + s + "' (expected group, agent or all)");
}

std::vector<SummaryStats> summarize(const std::vector<MatchRecord>& records, Grouping grouping) {
  struct Acc {
    std::vector<int> guesses;
    std::vector<int> kappas;
    std::size_t invalid = 0;
  };
  std::vector<std::string> order;
  std::map<std::string, Acc> acc;
  std::optional<GameSpec> spec;

  for (const auto& r : records) {
    if (!spec) spec = r.request.spec;
    for (int k = 0; k < 2; ++k) {
      const std::string key = grouping == Grouping::All     ? "all"
                              : grouping == Grouping::Agent ? r.request.players[k]
                                                            : r.groups[k];
      if (!acc.contains(key)) order.push_back(key);
      auto& a = acc[key];
      if (r.invalid[k] || !r.guesses[k])
        ++a.invalid;
      else
        a.guesses.push_back(*r.guesses[k]);
      if (r.traces[k]) a.kappas.push_back(r.traces[k]->kappa);
    }
  }

  std::vector<SummaryStats> out;
  for (const auto& key : order) {
    const auto& a = acc.at(key);
    SummaryStats s;
    s.group = key;
    s.n = a.guesses.size();
    s.invalid = a.invalid;
    s.traces = a.kappas.size();
    if (s.n + s.invalid > 0) s.invalid_rate = static_cast<double>(s.invalid) / static_cast<double>(s.n + s.invalid);
    if (s.n > 0) {
      double sum = 0.0;
      for (int g : a.guesses) sum += g;
      const double mean = sum / static_cast<double>(s.n);
      double sq = 0.0;
      for (int g : a.guesses) sq += (g - mean) * (g - mean);
      s.mean = mean;
      s.std = std::sqrt(sq / static_cast<double>(s.n));
      s.mean_k = k_level_from_guess(*spec, mean);
      s.zero_rate = static_cast<double>(std::count(a.guesses.begin(), a.guesses.end(), 0)) / static_cast<double>(s.n);
    }
    if (!a.kappas.empty()) {
      auto sorted = a.kappas;
      std::sort(sorted.begin(), sorted.end());
      double total = 0.0;
      for (int v : sorted) total += v;
      s.mean_kappa = total / static_cast<double>(sorted.size());
      const auto mid = sorted.size() / 2;
      s.median_kappa = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SummaryStats> analyze(const fs::path& results, Grouping grouping) {
  const auto file = fs::is_directory(results) ? results / "records.jsonl" : results;
  return summarize(read_records(file), grouping);
}

namespace {

std::string fmt_real(const std::optional<double>& v) {
  if (!v) return "";
  if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

std::string stats_csv(const std::vector<SummaryStats>& stats) {
  std::ostringstream ss;
  ss << "# std: population standard deviation over valid guesses; mean_k: k-level of the group mean guess\n";
  ss << "group,n,mean,std,mean_k,mean_kappa,median_kappa,zero_rate,invalid_rate\n";
  for (const auto& s : stats)
    ss << csv_field(s.group) << ',' << s.n << ',' << fmt_real(s.mean) << ',' << fmt_real(s.std) << ','
       << fmt_real(s.mean_k) << ',' << fmt_real(s.mean_kappa) << ',' << fmt_real(s.median_kappa) << ','
       << fmt_real(s.zero_rate) << ',' << fmt_real(s.invalid_rate) << '\n';
  return ss.str();
}

std::string stats_table(const std::vector<SummaryStats>& stats, const GameSpec& spec) {
  std::ostringstream ss;
  char line[256];
  auto cell = [](const std::optional<double>& v, int prec) {
    if (!v) return std::string("-");
    if (std::isinf(*v)) return std::string("inf");
    char b[32];
    std::snprintf(b, sizeof b, "%.*f", prec, *v);
    return std::string(b);
  };
  std::snprintf(line, sizeof line, "%-34s %6s %8s %8s %8s %8s %8s %8s %8s\n", "group", "n", "mean", "std", "mean_k",
                "mean_kap", "med_kap", "zero", "invalid");
  ss << line;
  for (const auto& s : stats) {
    std::snprintf(line, sizeof line, "%-34s %6zu %8s %8s %8s %8s %8s %8s %8s\n", s.group.c_str(), s.n,
                  cell(s.mean, 2).c_str(), cell(s.std, 2).c_str(), cell(s.mean_k, 2).c_str(),
                  cell(s.mean_kappa, 2).c_str(), cell(s.median_kappa, 1).c_str(), cell(s.zero_rate, 3).c_str(),
                  cell(s.invalid_rate, 3).c_str());
    ss << line;
  }
  ss << "\nhuman reference (" << spec.p.str() << "):\n";
  for (const auto& h : reference_table()) {
    const double k = k_level_from_guess(spec, h.mean_guess);
    std::snprintf(line, sizeof line, "%-34s %6d %8.2f %8s %8.2f %8s %8s %8.3f %8s\n", h.group.c_str(), h.participants,
                  h.mean_guess, "-", k, "-", "-", h.zero_rate, "-");
    ss << line;
  }
  return ss.str();
}

std::vector<HumanReference> reference_table() {
  const std::string source = "two-person guessing game, p=2/3, human subjects (Grosskopf & Nagel, 2008)";
  return {
      {"human students", 132, 35.57, 0.84, 0.0985, source + ": first-year students"},
      {"human professionals", 130, 27.73, 1.45, 0.3602, source + ": game-theory professionals"},
  };
}

}  // namespace bcg
