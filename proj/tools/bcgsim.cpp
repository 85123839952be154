// Command-line front end: simulate, analyze, chm, fixtures verify.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <unistd.h>

#include "bcg/error.hpp"
#include "bcg/experiment.hpp"
#include "bcg/llm/client.hpp"
#include "bcg/reasoners.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kConfig = 1, kRuntime = 2, kFixtureMiss = 3 };

// Replay that notes every miss and keeps going, so one pass lists them all.
class MissCollector final : public bcg::llm::ChatBackend {
 public:
  explicit MissCollector(std::shared_ptr<const bcg::llm::FixtureStore> store) : replay_(std::move(store)) {}

  bcg::llm::ChatResponse complete(const bcg::llm::ChatRequest& request) override {
    try {
      return replay_.complete(request);
    } catch (const bcg::FixtureMissError& e) {
      std::lock_guard lock(mutex_);
      misses_.emplace(e.digest(), request.label);
      throw bcg::BackendError(e.what());
    }
  }

  std::set<std::pair<std::string, std::string>> misses() const {
    std::lock_guard lock(mutex_);
    return misses_;
  }

 private:
  bcg::llm::ReplayBackend replay_;
  mutable std::mutex mutex_;
  std::set<std::pair<std::string, std::string>> misses_;
};

int simulate(const std::string& config_path, const std::string& output) {
  const auto cfg = bcg::load_config(config_path);
  const auto result = output.empty() ? bcg::run_experiment(cfg) : bcg::run_experiment(cfg, fs::path(output));
  std::cout << "wrote " << result.matches << " match records to " << result.records.string() << "\n";
  return kOk;
}

int analyze(const std::string& results, const std::string& group_by, const std::string& csv_path) {
  const auto stats = bcg::analyze(results, bcg::grouping_from_string(group_by));
  const fs::path dir = fs::is_directory(results) ? fs::path(results) : fs::path(results).parent_path();
  const fs::path csv = csv_path.empty() ? dir / "summary.csv" : fs::path(csv_path);
  std::ofstream(csv, std::ios::binary | std::ios::trunc) << bcg::stats_csv(stats);

  const auto records = bcg::read_records(fs::is_directory(results) ? dir / "records.jsonl" : fs::path(results));
  const bcg::GameSpec spec = records.empty() ? bcg::GameSpec{} : records.front().request.spec;
  std::cout << bcg::stats_table(stats, spec) << "\nsummary written to " << csv.string() << "\n";
  return kOk;
}

int chm(const std::string& p, double tau, int k_max, int lo, int hi, int anchor) {
  bcg::GameSpec spec;
  spec.p = bcg::Ratio::parse(p);
  spec.action_min = lo;
  spec.action_max = hi;
  spec.anchor = anchor;
  bcg::EwaParams params;
  params.tau = tau;
  params.k_max = k_max;
  try {
    spec.validate();
    params.validate();
  } catch (const bcg::DomainError& e) {
    throw bcg::ConfigError(e.what());
  }
  const auto dist = bcg::chm_distribution(spec, params);
  std::printf("action,probability\n");
  for (int i = 0; i < dist.size(); ++i) std::printf("%d,%.12f\n", spec.action_at(i), dist(i));
  return kOk;
}

int verify(const std::string& dir, const std::string& config_path) {
  auto store = std::make_shared<bcg::llm::FixtureStore>(dir);
  int status = kOk;
  for (const auto& problem : store->verify()) {
    std::cout << "manifest: " << problem << "\n";
    status = kFixtureMiss;
  }
  std::cout << store->manifest().size() << " manifest entries checked\n";
  if (!config_path.empty()) {
    const auto cfg = bcg::load_config(config_path);
    auto collector = std::make_shared<MissCollector>(store);
    const auto scratch = fs::temp_directory_path() / ("bcgsim-verify-" + std::to_string(::getpid()));
    bcg::run_experiment(cfg, scratch, collector);
    fs::remove_all(scratch);
    const auto misses = collector->misses();
    for (const auto& [digest, label] : misses) std::cout << "missing: " << digest << "  (" << label << ")\n";
    std::cout << (misses.empty() ? "every request of " : std::to_string(misses.size()) + " unresolved requests in ")
              << config_path << (misses.empty() ? " resolves\n" : "\n");
    if (!misses.empty()) status = kFixtureMiss;
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-player guessing-game simulator"};
  app.require_subcommand(1);

  std::string config_path, output;
  auto* sim = app.add_subcommand("simulate", "Run an experiment configuration");
  sim->add_option("config", config_path, "Experiment config (JSON)")->required();
  sim->add_option("-o,--output", output, "Results directory (overrides the config)");

  std::string results, group_by = "group", csv_path;
  auto* ana = app.add_subcommand("analyze", "Summarise a results directory or records.jsonl");
  ana->add_option("results", results, "Results directory or JSONL file")->required();
  ana->add_option("--group-by", group_by, "group, agent or all")->check(CLI::IsMember({"group", "agent", "all"}));
  ana->add_option("--csv", csv_path, "CSV output path (default: <results>/summary.csv)");

  std::string p = "2/3";
  double tau = 1.5;
  int k_max = 20, lo = 0, hi = 100, anchor = 50;
  auto* chm_cmd = app.add_subcommand("chm", "Print the cognitive-hierarchy action distribution");
  chm_cmd->add_option("--p", p, "Contest multiplier, n/d or decimal");
  chm_cmd->add_option("--tau", tau, "Poisson rate");
  chm_cmd->add_option("--k-max", k_max, "Poisson truncation");
  chm_cmd->add_option("--min", lo, "Smallest action");
  chm_cmd->add_option("--max", hi, "Largest action");
  chm_cmd->add_option("--anchor", anchor, "Level-0 guess");

  std::string fixture_dir, verify_config;
  auto* fix = app.add_subcommand("fixtures", "Replay fixture tools");
  fix->require_subcommand(1);
  auto* ver = fix->add_subcommand("verify", "Check a fixture directory, optionally against a config");
  ver->add_option("dir", fixture_dir, "Fixture directory")->required();
  ver->add_option("--config", verify_config, "Config whose requests must all resolve");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*sim) return simulate(config_path, output);
    if (*ana) return analyze(results, group_by, csv_path);
    if (*chm_cmd) return chm(p, tau, k_max, lo, hi, anchor);
    if (*ver) return verify(fixture_dir, verify_config);
  } catch (const bcg::ConfigError& e) {
    std::cerr << "configuration error:\n" << e.what() << "\n";
    return kConfig;
  } catch (const bcg::FixtureMissError& e) {
    std::cerr << "fixture miss: " << e.what() << "\n";
    return kFixtureMiss;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kOk;
}
