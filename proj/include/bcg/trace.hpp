#pragma once

#include <string>
#include <vector>

namespace bcg {

enum class KappaSource { Analysis, Heuristic };

/// What an LLM reasoner said and how deep it reasoned.
struct ReasoningTrace {
  std::string reasoning_text;
  int predicted_opponent_guess = 0;
  int kappa = 1;
  KappaSource kappa_source = KappaSource::Analysis;
  std::vector<std::string> prompts;        // every user prompt sent, in order
  std::vector<std::string> raw_responses;  // matching backend replies

  friend bool operator==(const ReasoningTrace&, const ReasoningTrace&) = default;
};

}  // namespace bcg
