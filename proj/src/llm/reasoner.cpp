#include "bcg/llm/reasoner.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>

#include "bcg/error.hpp"

namespace bcg::llm {

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::Revise: return "revise";
    case Stage::Analyze: return "analyze";
    case Stage::Decide: return "decide";
  }
  return "revise";
}

std::string_view PromptTemplates::role(Stage s) const {
  return s == Stage::Revise ? revise_role : s == Stage::Analyze ? analyze_role : decide_role;
}
std::string_view PromptTemplates::request(Stage s) const {
  return s == Stage::Revise ? revise_request : s == Stage::Analyze ? analyze_request : decide_request;
}
std::string_view PromptTemplates::format(Stage s) const {
  return s == Stage::Revise ? revise_format : s == Stage::Analyze ? analyze_format : decide_format;
}

std::vector<std::string> PromptBundle::parts() const {
  std::vector<std::string> out;
  if (profile) out.push_back(*profile);
  out.push_back(role_task);
  out.push_back(game_request);
  out.push_back(format_requirements);
  return out;
}

std::string PromptBundle::render() const {
  std::string out;
  for (const auto& part : parts()) {
    if (!out.empty()) out += "\n\n";
    out += part;
  }
  return out;
}

std::string render_template(std::string_view text, const std::vector<std::pair<std::string, std::string>>& vars) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const auto open = text.find("${", pos);
    if (open == std::string_view::npos) {
      out.append(text.substr(pos));
      return out;
    }
    const auto close = text.find('}', open + 2);
    if (close == std::string_view::npos)
      throw TemplateError("unterminated placeholder in template: " + std::string(text.substr(open, 24)));
    const auto key = text.substr(open + 2, close - open - 2);
    const auto it = std::find_if(vars.begin(), vars.end(), [&](const auto& kv) { return kv.first == key; });
    if (it == vars.end()) throw TemplateError("unresolved placeholder ${" + std::string(key) + "}");
    out.append(text.substr(pos, open - pos));
    out.append(it->second);
    pos = close + 1;
  }
}

std::string render_description(const GameSpec& spec) {
  return render_template(spec.description, {{"p", spec.p.str()},
                                            {"min", std::to_string(spec.action_min)},
                                            {"max", std::to_string(spec.action_max)},
                                            {"anchor", std::to_string(spec.anchor)}});
}

PromptBundle build_prompt(const GameSpec& spec, const std::optional<std::string>& profile, Stage stage,
                          const PromptTemplates& templates, const StageInputs& inputs) {
  std::vector<std::pair<std::string, std::string>> vars = {{"description", render_description(spec)},
                                                           {"p", spec.p.str()},
                                                           {"min", std::to_string(spec.action_min)},
                                                           {"max", std::to_string(spec.action_max)}};
  if (inputs.reasoning) vars.emplace_back("reasoning", *inputs.reasoning);
  if (inputs.prediction) vars.emplace_back("prediction", std::to_string(*inputs.prediction));

  PromptBundle bundle;
  if (stage != Stage::Analyze && profile && !profile->empty()) bundle.profile = *profile;
  bundle.role_task = render_template(templates.role(stage), vars);
  bundle.game_request = render_template(templates.request(stage), vars);
  bundle.format_requirements = render_template(templates.format(stage), vars);
  if (bundle.format_requirements.find("curly brackets") == std::string::npos)
    throw TemplateError("format requirements for the " + std::string(to_string(stage)) +
                        " stage must ask for curly brackets");
  return bundle;
}

namespace {

// Last "{ integer }" in the text, if any.
std::optional<std::string_view> last_braced_integer(std::string_view text) {
  std::optional<std::string_view> found;
  for (std::size_t open = text.find('{'); open != std::string_view::npos; open = text.find('{', open + 1)) {
    const auto close = text.find('}', open + 1);
    if (close == std::string_view::npos) break;
    auto inner = text.substr(open + 1, close - open - 1);
    while (!inner.empty() && std::isspace(static_cast<unsigned char>(inner.front()))) inner.remove_prefix(1);
    while (!inner.empty() && std::isspace(static_cast<unsigned char>(inner.back()))) inner.remove_suffix(1);
    std::size_t i = (!inner.empty() && (inner[0] == '-' || inner[0] == '+')) ? 1 : 0;
    if (i == inner.size()) continue;
    bool digits = true;
    for (; i < inner.size(); ++i) digits = digits && std::isdigit(static_cast<unsigned char>(inner[i]));
    if (digits) found = inner;
  }
  return found;
}

long long to_integer(std::string_view digits) {
  if (!digits.empty() && digits.front() == '+') digits.remove_prefix(1);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (ec == std::errc::result_out_of_range)
    throw ValidationError("braced number " + std::string(digits) + " is out of range");
  return v;
}

}  // namespace

int parse_braced_integer(std::string_view text, const GameSpec& spec) {
  const auto found = last_braced_integer(text);
  if (!found) throw ParseError("no number in curly brackets found");
  const long long v = to_integer(*found);
  if (v < spec.action_min || v > spec.action_max)
    throw ValidationError("braced number " + std::to_string(v) + " outside [" + std::to_string(spec.action_min) +
                          ", " + std::to_string(spec.action_max) + "]");
  return static_cast<int>(v);
}

int parse_braced_count(std::string_view text) {
  const auto found = last_braced_integer(text);
  if (!found) throw ParseError("no count in curly brackets found");
  const long long v = to_integer(*found);
  if (v < 1 || v > 64) throw ValidationError("reasoning depth " + std::to_string(v) + " is not a positive count");
  return static_cast<int>(v);
}

// ---------------------------------------------------------------------------------------------

namespace {

enum class Ref { Self, Other };

bool starts_with_any(std::string_view word, std::initializer_list<std::string_view> stems) {
  return std::any_of(stems.begin(), stems.end(), [&](auto s) { return word.substr(0, s.size()) == s; });
}

std::optional<Ref> reference_of(std::string_view w) {
  static constexpr std::string_view self[] = {"i", "me", "my", "myself", "i'll", "i'm", "i'd", "i've"};
  static constexpr std::string_view other[] = {"opponent", "opponents", "opponent's", "other", "they",
                                               "them", "their", "they'll", "they're", "they'd", "he",
                                               "she", "him", "her", "rival", "rival's", "partner"};
  if (std::find(std::begin(self), std::end(self), w) != std::end(self)) return Ref::Self;
  if (std::find(std::begin(other), std::end(other), w) != std::end(other)) return Ref::Other;
  return std::nullopt;
}

bool attitude_or_choice(std::string_view w) {
  return starts_with_any(w, {"think", "thought", "believ", "expect", "assum", "predict", "anticipat", "reason",
                             "guess", "pick", "choos", "chose", "select", "go", "play", "figur", "realiz",
                             "realis", "know", "want", "will", "would", "might", "may", "could", "aim",
                             "write", "suspect", "imagin", "conclud", "decid"});
}

std::vector<std::vector<std::string>> clauses_of(std::string_view text) {
  std::vector<std::vector<std::string>> clauses(1);
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    if (word == "so" || word == "because" || word == "therefore" || word == "thus" || word == "but" ||
        word == "hence") {
      if (!clauses.back().empty()) clauses.emplace_back();
    } else {
      clauses.back().push_back(word);
    }
    word.clear();
  };
  for (char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isalpha(c) || c == '\'') {
      word.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
      if (c == '.' || c == '!' || c == '?' || c == ';' || c == ':' || c == ',' || c == '\n')
        if (!clauses.back().empty()) clauses.emplace_back();
    }
  }
  flush();
  return clauses;
}

int chain_length(const std::vector<std::string>& words) {
  std::vector<Ref> chain;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto ref = reference_of(words[i]);
    if (!ref) continue;
    bool attributed = false;
    for (std::size_t j = i + 1; j < words.size() && j <= i + 3 && !attributed; ++j)
      attributed = attitude_or_choice(words[j]);
    if (!attributed) continue;
    if (chain.empty() && *ref == Ref::Self) continue;  // the speaker's own view is counted separately
    if (!chain.empty() && chain.back() == *ref) continue;
    chain.push_back(*ref);
  }
  return static_cast<int>(chain.size());
}

}  // namespace

int heuristic_kappa(std::string_view reasoning) {
  int deepest = 0;
  for (const auto& clause : clauses_of(reasoning)) deepest = std::max(deepest, chain_length(clause));
  return 1 + deepest;
}

// ---------------------------------------------------------------------------------------------

namespace {

template <typename Parse>
auto ask(ChatBackend& backend, const ReasonerConfig& config, Stage stage, const PromptBundle& bundle,
         ReasoningTrace& log, Parse parse) {
  const std::string system = render_template(config.templates.system, {{"session", config.session}});
  const std::string attempts = std::to_string(config.max_attempts);
  std::string last_error = "no attempts made";
  for (int attempt = 1; attempt <= config.max_attempts; ++attempt) {
    ChatRequest request;
    request.model_id = config.model_id;
    request.system_text = system;
    request.user_text = bundle.render();
    if (attempt > 1)
      request.user_text += "\n\n" + render_template(config.templates.reminder,
                                                    {{"attempt", std::to_string(attempt)}, {"attempts", attempts}});
    request.temperature = config.temperature;
    request.max_tokens = config.max_tokens;
    request.label = config.session + " " + std::string(to_string(stage)) + " attempt " + std::to_string(attempt);

    auto response = backend.complete(request);
    log.prompts.push_back(request.user_text);
    log.raw_responses.push_back(response.text);
    try {
      return std::make_pair(parse(response.text), response.text);
    } catch (const ParseError& e) {
      last_error = e.what();
    } catch (const ValidationError& e) {
      last_error = e.what();
    }
  }
  throw InvalidMove(std::string(to_string(stage)) + " stage gave no usable answer after " + attempts +
                    " attempts: " + last_error);
}

}  // namespace

ReasoningTrace revise(const GameSpec& spec, const ReasonerConfig& config, ChatBackend& backend) {
  ReasoningTrace trace;
  const auto bundle = build_prompt(spec, config.profile, Stage::Revise, config.templates);
  try {
    auto [predicted, text] = ask(backend, config, Stage::Revise, bundle, trace,
                                 [&](const std::string& r) { return parse_braced_integer(r, spec); });
    trace.predicted_opponent_guess = predicted;
    trace.reasoning_text = std::move(text);
  } catch (const InvalidMove& e) {
    throw ParseError(e.what());
  }

  const auto analysis = build_prompt(spec, std::nullopt, Stage::Analyze, config.templates,
                                     StageInputs{trace.reasoning_text, std::nullopt});
  try {
    trace.kappa = ask(backend, config, Stage::Analyze, analysis, trace,
                      [](const std::string& r) { return parse_braced_count(r); })
                      .first;
    trace.kappa_source = KappaSource::Analysis;
  } catch (const InvalidMove&) {
    trace.kappa = heuristic_kappa(trace.reasoning_text);
    trace.kappa_source = KappaSource::Heuristic;
  } catch (const BackendError&) {
    trace.kappa = heuristic_kappa(trace.reasoning_text);
    trace.kappa_source = KappaSource::Heuristic;
  }
  return trace;
}

int decide(ReasoningTrace& trace, const GameSpec& spec, const ReasonerConfig& config, ChatBackend& backend) {
  const auto bundle = build_prompt(spec, config.profile, Stage::Decide, config.templates,
                                   StageInputs{trace.reasoning_text, trace.predicted_opponent_guess});
  return ask(backend, config, Stage::Decide, bundle, trace,
             [&](const std::string& r) { return parse_braced_integer(r, spec); })
      .first;
}

PerceptualGame to_perceptual_game(const ReasoningTrace& trace, const PlayerId& owner, const PlayerId& opponent,
                                  const GameSpec& spec) {
  return build_perceptual_game(owner, opponent, spec, trace.kappa, trace.predicted_opponent_guess);
}

Move LlmAgent::act(const GameRequest& request) {
  ReasonerConfig config = config_;
  config.session = "r" + std::to_string(request.round) + "/" + request.self;
  ReasoningTrace trace;
  try {
    trace = revise(request.spec, config, *backend_);
  } catch (const ParseError& e) {
    return Move{std::nullopt, std::nullopt, std::string(e.what())};
  } catch (const BackendError& e) {
    return Move{std::nullopt, std::nullopt, std::string("backend failure: ") + e.what()};
  }
  try {
    const int guess = decide(trace, request.spec, config, *backend_);
    return Move{guess, std::move(trace), std::nullopt};
  } catch (const InvalidMove& e) {
    return Move{std::nullopt, std::move(trace), std::string(e.what())};
  } catch (const BackendError& e) {
    return Move{std::nullopt, std::move(trace), std::string("backend failure: ") + e.what()};
  }
}

}  // namespace bcg::llm
