#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bcg/error.hpp"
#include "bcg/experiment.hpp"
#include "bcg/records.hpp"

namespace fs = std::filesystem;
using namespace bcg;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("bcg-exp-" + name);
  fs::remove_all(dir);
  return dir;
}

json small_config() {
  return json::parse(R"({
    "name": "small",
    "game": {"p": "2/3"},
    "agents": [
      {"id": "l0", "kind": "level_k", "level": 0, "group": "levels"},
      {"id": "l1", "kind": "level_k", "level": 1, "group": "levels"},
      {"id": "e", "kind": "ewa"},
      {"id": "r", "kind": "random"}
    ],
    "scheme": "all_pairs",
    "rounds": 4,
    "seed": 42
  })");
}

MatchRecord fake_record(std::optional<int> a, std::optional<int> b) {
  MatchRecord r;
  r.request = MatchRequest{GameSpec{}, {"x", "y"}, 1};
  r.groups = {"g", "g"};
  r.guesses = {a, b};
  r.invalid = {!a.has_value(), !b.has_value()};
  if (a && b) r.outcome = utility(GameSpec{}, *a, *b);
  return r;
}

}  // namespace

TEST_CASE("config parsing fills defaults") {
  const auto cfg = parse_config(small_config(), "/base");
  CHECK(cfg.name == "small");
  CHECK(cfg.agents.size() == 4);
  CHECK(cfg.agents[0].group == "levels");
  CHECK(cfg.agents[2].group == "e");
  CHECK(cfg.agents[2].ewa.lambda == doctest::Approx(2.39));
  CHECK(cfg.game == GameSpec{});
  CHECK(cfg.scheme.kind == PairingScheme::Kind::AllPairs);
  CHECK(cfg.output == fs::path("/base/results"));
  CHECK_FALSE(cfg.has_llm_agents());
}

TEST_CASE("config parsing reports every problem") {
  auto doc = small_config();
  doc["colour"] = "blue";
  doc["agents"][0]["levle"] = 2;
  doc["game"]["p"] = "3/2x";
  try {
    parse_config(doc, ".");
    FAIL("expected ConfigErrors");
  } catch (const ConfigErrors& e) {
    CHECK(e.problems().size() >= 3);
    const std::string all = e.what();
    CHECK(all.find("colour") != std::string::npos);
    CHECK(all.find("levle") != std::string::npos);
  }
}

TEST_CASE("config semantic checks") {
  auto doc = small_config();
  doc["agents"][1]["id"] = "l0";
  CHECK_THROWS_AS(parse_config(doc, "."), ConfigError);

  doc = small_config();
  doc["agents"].push_back(json{{"id", "m"}, {"kind", "llm"}, {"model_id", "x"}});
  CHECK_THROWS_AS(parse_config(doc, "."), ConfigError);  // llm agent without a backend

  doc = small_config();
  doc["scheme"] = "fixed_pairs";
  doc["agents"].erase(3);
  CHECK_THROWS_AS(parse_config(doc, "."), ConfigError);  // odd number of agents

  doc = small_config();
  doc["rounds"] = 0;
  CHECK_THROWS_AS(parse_config(doc, "."), ConfigError);
}

TEST_CASE("self pairs scheme form") {
  auto doc = json::parse(R"({
    "agents": [{"id": "m", "kind": "llm", "model_id": "x", "profile": "someone"}],
    "scheme": {"kind": "self_pairs", "model": "m"},
    "backend": {"mode": "replay", "fixtures": "fx"}
  })");
  const auto base = scratch("selfpairs");
  fs::create_directories(base / "fx");
  const auto cfg = parse_config(doc, base);
  CHECK(cfg.scheme.kind == PairingScheme::Kind::SelfPairs);
  CHECK(cfg.scheme.model == "m");
  REQUIRE(cfg.backend.has_value());
  CHECK(cfg.backend->fixtures == base / "fx");
  CHECK(cfg.agents[0].profile == "someone");
}

TEST_CASE("simulate writes one record per match and is reproducible") {
  const auto cfg = parse_config(small_config(), ".");
  const auto out1 = scratch("run1"), out2 = scratch("run2");
  const auto r1 = run_experiment(cfg, out1);
  const auto r2 = run_experiment(cfg, out2);
  CHECK(r1.matches == 4 * 6);
  CHECK(slurp(r1.records) == slurp(r2.records));
  CHECK(fs::exists(r1.manifest));
  const auto records = read_records(r1.records);
  CHECK(records.size() == 24);

  auto serial = cfg;
  serial.parallel = false;
  const auto r3 = run_experiment(serial, scratch("run3"));
  CHECK(slurp(r3.records) == slurp(r1.records));

  auto reseeded = cfg;
  reseeded.seed = 43;
  const auto r4 = run_experiment(reseeded, scratch("run4"));
  CHECK(slurp(r4.records) != slurp(r1.records));
}

TEST_CASE("JSONL round trip is a fixpoint") {
  const auto cfg = parse_config(small_config(), ".");
  const auto run = run_experiment(cfg, scratch("rt"));
  std::ifstream in(run.records);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    const auto rec = record_from_json(json::parse(line));
    CHECK(record_to_line(rec) == line);
    ++lines;
  }
  CHECK(lines == 24);
  CHECK_THROWS_AS(record_from_json(json{{"round", 1}}), ParseError);
}

TEST_CASE("records of traced matches round trip") {
  MatchRecord r = fake_record(22, 15);
  ReasoningTrace t;
  t.reasoning_text = "They expect me to pick 33. {33}";
  t.predicted_opponent_guess = 33;
  t.kappa = 3;
  t.prompts = {"p1", "p2", "p3"};
  t.raw_responses = {"a", "b", "c"};
  r.traces = {t, t};
  r.traces[1]->kappa_source = KappaSource::Heuristic;
  r.hypergame = compose_hypergame(llm::to_perceptual_game(t, "x", "y", GameSpec{}),
                                  llm::to_perceptual_game(t, "y", "x", GameSpec{}));
  const auto line = record_to_line(r);
  const auto back = record_from_json(json::parse(line));
  CHECK(record_to_line(back) == line);
  REQUIRE(back.hypergame.has_value());
  CHECK(*back.hypergame == *r.hypergame);
  CHECK(back.traces[1]->kappa_source == KappaSource::Heuristic);
}

TEST_CASE("summary statistics") {
  SUBCASE("everyone at the anchor") {
    const auto s = summarize({fake_record(50, 50), fake_record(50, 50)}, Grouping::All);
    REQUIRE(s.size() == 1);
    CHECK(s[0].n == 4);
    CHECK(*s[0].mean == doctest::Approx(50.0));
    CHECK(*s[0].std == doctest::Approx(0.0));
    CHECK(*s[0].mean_k == doctest::Approx(0.0));
    CHECK(*s[0].zero_rate == doctest::Approx(0.0));
  }
  SUBCASE("population std, zero rate, invalid rate") {
    const auto s = summarize({fake_record(0, 10), fake_record(20, std::nullopt)}, Grouping::All);
    CHECK(s[0].n == 3);
    CHECK(s[0].invalid == 1);
    CHECK(*s[0].mean == doctest::Approx(10.0));
    CHECK(*s[0].std == doctest::Approx(std::sqrt(200.0 / 3.0)));
    CHECK(*s[0].zero_rate == doctest::Approx(1.0 / 3.0));
    CHECK(*s[0].invalid_rate == doctest::Approx(0.25));
    CHECK(*s[0].mean_k == doctest::Approx(std::log(10.0 / 50.0) / std::log(2.0 / 3.0)));
  }
  SUBCASE("a group with only invalid moves still gets a row") {
    auto r = fake_record(std::nullopt, 30);
    r.groups = {"silent", "talker"};
    const auto s = summarize({r}, Grouping::Group);
    REQUIRE(s.size() == 2);
    CHECK(s[0].group == "silent");
    CHECK(s[0].n == 0);
    CHECK_FALSE(s[0].mean.has_value());
    CHECK(*s[0].invalid_rate == doctest::Approx(1.0));
    const auto csv = stats_csv(s);
    CHECK(csv.find("silent,0,,,,,,,1.000000") != std::string::npos);
  }
  SUBCASE("a zero mean reports an unbounded level") {
    const auto s = summarize({fake_record(0, 0)}, Grouping::All);
    CHECK(std::isinf(*s[0].mean_k));
    CHECK(stats_csv(s).find(",inf,") != std::string::npos);
  }
  SUBCASE("kappa mean and median") {
    auto r1 = fake_record(10, 20), r2 = fake_record(30, 40);
    ReasoningTrace t;
    t.kappa = 1;
    r1.traces = {t, t};
    t.kappa = 4;
    r2.traces[0] = t;
    t.kappa = 2;
    r2.traces[1] = t;
    const auto s = summarize({r1, r2}, Grouping::All);
    CHECK(*s[0].mean_kappa == doctest::Approx(2.0));
    CHECK(*s[0].median_kappa == doctest::Approx(1.5));
  }
}

TEST_CASE("k-level of reference means") {
  GameSpec spec;
  CHECK(k_level_from_guess(spec, 27.73) == doctest::Approx(1.45).epsilon(0.01));
  CHECK(k_level_from_guess(spec, 29.7) == doctest::Approx(1.28).epsilon(0.01));
}

TEST_CASE("human reference table") {
  const auto ref = reference_table();
  REQUIRE(ref.size() == 2);
  CHECK(ref[0].participants == 132);
  CHECK(ref[0].mean_guess == doctest::Approx(35.57));
  CHECK(ref[0].mean_k == doctest::Approx(0.84));
  CHECK(ref[1].participants == 130);
  CHECK(ref[1].mean_guess == doctest::Approx(27.73));
  CHECK(ref[1].mean_k == doctest::Approx(1.45));
  // The tabulated levels agree with the inversion of their own means.
  for (const auto& r : ref) CHECK(k_level_from_guess(GameSpec{}, r.mean_guess) == doctest::Approx(r.mean_k).epsilon(0.01));
  const auto table = stats_table({}, GameSpec{});
  CHECK(table.find("human students") != std::string::npos);
}

TEST_CASE("analysis output is byte-stable") {
  const auto cfg = parse_config(small_config(), ".");
  const auto run = run_experiment(cfg, scratch("csv"));
  const auto a = stats_csv(analyze(run.records.parent_path(), Grouping::Group));
  const auto b = stats_csv(analyze(run.records.parent_path(), Grouping::Group));
  CHECK(a == b);
  CHECK(a.rfind("# ", 0) == 0);
  CHECK(a.find("group,n,mean,std,mean_k,mean_kappa,median_kappa,zero_rate,invalid_rate\n") != std::string::npos);
  CHECK(a.find("\nlevels,") != std::string::npos);
  CHECK_THROWS_AS(grouping_from_string("team"), ConfigError);
}

TEST_CASE("replay mode with a missing fixture aborts") {
  auto doc = json::parse(R"({
    "agents": [{"id": "m", "kind": "llm", "model_id": "x"}],
    "scheme": {"kind": "self_pairs", "model": "m"},
    "backend": {"mode": "replay", "fixtures": "empty"}
  })");
  const auto base = scratch("miss");
  fs::create_directories(base / "empty");
  const auto cfg = parse_config(doc, base);
  CHECK_THROWS_AS(run_experiment(cfg, base / "out"), FixtureMissError);
}
