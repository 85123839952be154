#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bcg/game.hpp"
#include "bcg/llm/client.hpp"
#include "bcg/llm/reasoner.hpp"
#include "bcg/reasoners.hpp"
#include "bcg/umpire.hpp"

namespace bcg {

enum class AgentKind { Ewa, LevelK, Random, Llm };

struct AgentConfig {
  std::string id;
  AgentKind kind = AgentKind::Random;
  std::string group;  // defaults to id
  EwaParams ewa;
  int level = 0;
  std::optional<std::string> profile;
  std::string model_id;
  std::optional<std::string> provider;  // overrides the backend's provider in live mode
  double temperature = 1.0;
  int max_tokens = 1024;
  int max_attempts = 3;
};

enum class BackendMode { Replay, Live, Record };

struct BackendConfig {
  BackendMode mode = BackendMode::Replay;
  std::filesystem::path fixtures;
  llm::ProviderProfile provider = llm::ProviderProfile::openai();
  int concurrency = 4;
  llm::RetryPolicy retry;
};

struct ExperimentConfig {
  std::string name = "experiment";
  GameSpec game;
  std::vector<AgentConfig> agents;
  PairingScheme scheme;
  int rounds = 1;
  std::uint64_t seed = 1;
  bool parallel = true;
  std::optional<BackendConfig> backend;  // required when an llm agent is configured
  llm::PromptTemplates prompts;
  std::filesystem::path output = "results";
  nlohmann::json source;  // the document as read, echoed into the run manifest

  bool has_llm_agents() const;
};

/// Thrown with every validation problem found, one per line.
class ConfigErrors : public ConfigError {
 public:
  explicit ConfigErrors(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Parses and validates a JSON configuration document. Relative paths resolve against
/// `base_dir`. Unknown keys are errors. Throws ConfigErrors listing every problem.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Builds the chat backend a configuration asks for; live credentials are checked here.
std::shared_ptr<llm::ChatBackend> make_backend(const BackendConfig& config,
                                               const std::optional<std::string>& provider_override = {});

struct RunResult {
  std::filesystem::path records;   // records.jsonl
  std::filesystem::path manifest;  // manifest.json
  std::size_t matches = 0;
};

/// Plays every round and writes one JSONL line per match plus a run manifest into `output`
/// (or config.output). `backend` replaces the configured backend, mainly for tests.
RunResult run_experiment(const ExperimentConfig& config, const std::optional<std::filesystem::path>& output = {},
                         std::shared_ptr<llm::ChatBackend> backend = nullptr);

std::vector<MatchRecord> read_records(const std::filesystem::path& jsonl);

enum class Grouping { Group, Agent, All };
Grouping grouping_from_string(const std::string& s);

struct SummaryStats {
  std::string group;
  std::size_t n = 0;  // valid guesses
  std::size_t invalid = 0;
  std::optional<double> mean;
  std::optional<double> std;  // population formula
  std::optional<double> mean_k;  // k-level of the group mean; +inf for a zero mean
  std::optional<double> mean_kappa;
  std::optional<double> median_kappa;
  std::optional<double> zero_rate;
  std::optional<double> invalid_rate;
  std::size_t traces = 0;
};

std::vector<SummaryStats> summarize(const std::vector<MatchRecord>& records, Grouping grouping);
std::vector<SummaryStats> analyze(const std::filesystem::path& results, Grouping grouping = Grouping::Group);

/// Columns: group,n,mean,std,mean_k,mean_kappa,median_kappa,zero_rate,invalid_rate.
std::string stats_csv(const std::vector<SummaryStats>& stats);
/// Aligned table including the built-in human reference rows.
std::string stats_table(const std::vector<SummaryStats>& stats, const GameSpec& spec);

struct HumanReference {
  std::string group;
  int participants;
  double mean_guess;
  double mean_k;
  double zero_rate;
  std::string provenance;
};

std::vector<HumanReference> reference_table();

}  // namespace bcg
