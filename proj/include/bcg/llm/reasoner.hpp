#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bcg/agent.hpp"
#include "bcg/game.hpp"
#include "bcg/hypergame.hpp"
#include "bcg/llm/client.hpp"
#include "bcg/trace.hpp"

namespace bcg::llm {

enum class Stage { Revise, Analyze, Decide };

std::string_view to_string(Stage stage);

/// Four-part prompt: optional agent profile, role and task, the game or task request, and
/// the answer-format requirements.
struct PromptBundle {
  std::optional<std::string> profile;
  std::string role_task;
  std::string game_request;
  std::string format_requirements;

  std::vector<std::string> parts() const;
  /// Parts joined by blank lines.
  std::string render() const;
};

/// Prompt wording. Placeholders use ${name}: ${p}, ${min}, ${max} and ${anchor} come from the
/// game; ${description} is the rendered game description; ${reasoning} and ${prediction} carry
/// the revise-stage output; ${session} and ${attempt}/${attempts} are filled at send time.
struct PromptTemplates {
  std::string system =
      "You are taking part in a study of how people make decisions. Session ${session}.";
  std::string revise_role =
      "You are one of two participants in a game. Think carefully about the situation before you act.";
  std::string revise_request =
      "${description}\n\nBefore choosing, think about which number the other participant is "
      "likely to write down. Explain your reasoning step by step.";
  std::string revise_format =
      "End your answer with your prediction of the other participant's number and surround the "
      "predicted number in curly brackets: {n}";
  std::string analyze_role =
      "You analyse written explanations of strategic reasoning.";
  std::string analyze_request =
      "Below is a participant's reasoning about a two-person number game.\n\n\"\"\"\n${reasoning}\n\"\"\"\n\n"
      "Count the perspectives this reasoning takes: count 1 for the participant's own view, then "
      "add 1 for every nested level of belief about the other participant (what the other "
      "participant will do, what the other participant thinks the participant will do, and so on).";
  std::string analyze_format = "Surround the count in curly brackets: {n}";
  std::string decide_role = "You are one of two participants in a game and must now make your choice.";
  std::string decide_request =
      "${description}\n\nYour reasoning so far:\n${reasoning}\n\nYou expect the other participant "
      "to write down ${prediction}. Decide which number you write down.";
  std::string decide_format = "Surround the chosen number in curly brackets: {n}";
  std::string reminder =
      "Your previous reply did not contain a valid number in curly brackets (attempt ${attempt} "
      "of ${attempts}). Answer again and surround the number in curly brackets: {n}";

  std::string_view role(Stage s) const;
  std::string_view request(Stage s) const;
  std::string_view format(Stage s) const;
};

struct StageInputs {
  std::optional<std::string> reasoning;
  std::optional<int> prediction;
};

/// Replaces ${key} tokens; throws TemplateError if any ${...} is left unresolved.
std::string render_template(std::string_view text, const std::vector<std::pair<std::string, std::string>>& vars);

/// Game description with ${p}, ${min}, ${max}, ${anchor} filled in.
std::string render_description(const GameSpec& spec);

/// The profile is used only for the revise and decide stages.
PromptBundle build_prompt(const GameSpec& spec, const std::optional<std::string>& profile, Stage stage,
                          const PromptTemplates& templates = {}, const StageInputs& inputs = {});

/// Integer inside the last {...} holding an integer. Throws ParseError if none is present and
/// ValidationError if it lies outside the action range.
int parse_braced_integer(std::string_view text, const GameSpec& spec);

/// Like parse_braced_integer but for a reasoning depth; throws ValidationError below 1.
int parse_braced_count(std::string_view text);

/// Offline depth estimate: 1 for the speaker's own view plus the longest chain of alternating
/// belief or choice attributions (other, self, other, ...) found in any clause.
int heuristic_kappa(std::string_view reasoning);

struct ReasonerConfig {
  std::string model_id = "replay";
  double temperature = 1.0;
  int max_tokens = 1024;
  std::optional<std::string> profile;
  PromptTemplates templates;
  int max_attempts = 3;  // per stage, before the move is declared invalid
  std::string session = "0";
};

/// Reasoning, prediction, and depth analysis. Falls back to heuristic_kappa when the analysis
/// call fails or returns no usable count. Throws ParseError/ValidationError if no valid
/// prediction arrives within max_attempts; backend errors propagate.
ReasoningTrace revise(const GameSpec& spec, const ReasonerConfig& config, ChatBackend& backend);

/// Final guess given the trace. Throws InvalidMove after max_attempts unusable replies.
/// Prompts and replies are appended to the trace.
int decide(ReasoningTrace& trace, const GameSpec& spec, const ReasonerConfig& config, ChatBackend& backend);

PerceptualGame to_perceptual_game(const ReasoningTrace& trace, const PlayerId& owner,
                                  const PlayerId& opponent, const GameSpec& spec);

/// Revise-then-decide agent. Stateless across matches.
class LlmAgent final : public Agent {
 public:
  LlmAgent(ReasonerConfig config, std::shared_ptr<ChatBackend> backend)
      : config_(std::move(config)), backend_(std::move(backend)) {}

  std::string kind() const override { return "llm"; }
  /// Reasoner failures come back as an invalid move. A replay fixture miss propagates.
  Move act(const GameRequest& request) override;

  const ReasonerConfig& config() const { return config_; }

 private:
  ReasonerConfig config_;
  std::shared_ptr<ChatBackend> backend_;
};

}  // namespace bcg::llm
