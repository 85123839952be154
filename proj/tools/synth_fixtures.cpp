// Regenerates the bundled replay fixtures by playing each experiment against a scripted,
// hand-annotated chat backend. Usage: synth_fixtures <experiments-dir>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <regex>
#include <string>
#include <vector>

#include "bcg/error.hpp"
#include "bcg/experiment.hpp"
#include "bcg/llm/client.hpp"
#include "bcg/llm/reasoner.hpp"

namespace fs = std::filesystem;
using namespace bcg;

namespace {

// One scripted reasoner: what it says at each stage. Empty optional = reply without braces.
struct Script {
  std::string reasoning;  // revise reply, ends with the braced prediction
  int kappa;              // annotated depth, also the analysis reply
  std::vector<std::string> decide;  // successive decide replies (last one repeats)
  std::vector<std::string> analyze = {};  // overrides the default "{kappa}" analysis reply
  std::vector<std::string> revise = {};   // overrides: successive revise replies
};

const std::vector<Script>& neutral_pool() {
  static const std::vector<Script> pool = {
      {"Two-thirds of any average lies below that average, so high numbers are poor choices. "
       "I will aim for the lower part of the range. A typical entry is probably near the middle. {45}",
       1, {"Staying below the middle of the range: {30}"}},
      {"The other participant likely picks 50 if they pick at random, so two-thirds of the average "
       "is about 33. My prediction for their number: {50}",
       2, {"Undercutting the expected 50 comfortably: {30}"}},
      {"They expect me to pick 33, so they will pick 22, so I should go lower. {22}",
       3, {"Going under 22: {15}"}},
      {"I think they believe that I expect them to pick 50, so they will pick about 33 to beat me "
       "and I should go under that. {33}",
       4, {"Below 33 with some margin: {20}"}},
      {"The result shrinks the average, so the winning number sits low. I will pick a number below "
       "the anchor since the target shrinks. {40}",
       1, {"A number well under forty: {28}"}},
      {"Opponent likely picks around 40, so the target is about 27. {40}",
       2, {"Just under the target: {26}"}},
      {"The other participant probably thinks I will choose about 30. In that case they would pick "
       "roughly 20 to undercut me. {20}",
       3, {"Undercutting 20: {13}"}},
      {"My opponent will reason that I anticipate their guess of 30, so they will choose about 20 "
       "and I need something smaller. {20}",
       4, {"Smaller than 20: {11}"}},
  };
  return pool;
}

const std::vector<Script>& student_pool() {
  static const std::vector<Script> pool = {
      {"The average gets multiplied by two thirds, so the answer should be somewhere under 50. "
       "A number in the forties feels about right. {50}",
       1, {"I'll go with a number under fifty: {40}"}},
      {"The other person will probably choose something around 50, so the target would be about 33. {50}",
       2, {"Aiming near the target: {33}"}},
      {"My guess is that the other player picks a middle number like 45, which makes the target about 30. {45}",
       2, {"Slightly under thirty: {29}"}},
      {"They expect me to choose around 35, so they will pick about 25, so I should go a little lower. {25}",
       3, {"A bit lower than 25: {20}"}},
      {"Numbers get smaller after the multiplication, so I will pick something moderate. {40}",
       1, {"Moderate choice: {35}"}},
  };
  return pool;
}

const std::vector<Script>& professional_pool() {
  static const std::vector<Script> pool = {
      {"The other participant will expect me to pick 33, so they will choose about 22, so I should "
       "undercut that. {22}",
       3, {"Undercutting 22: {14}"}},
      {"I think they believe that I expect them to pick 33, so they will choose 15 and the lower "
       "number wins. {15}",
       4, {"Below fifteen: {9}"}},
      {"Opponent likely picks about 30 after one step of reasoning, so the target is about 20. {30}",
       2, {"Near the target: {19}"}},
      {"They reason that I will pick 22, so they will pick about 15, so I should go lower still. {15}",
       3, {"Lower than fifteen: {10}"}},
      {"My rival will reason that I anticipate their choice of 22, so they will pick 15, leaving me "
       "to go toward the bottom. {15}",
       4, {"Close to the bottom: {6}"}},
  };
  return pool;
}

const std::vector<Script>& faulty_pool() {
  static const std::vector<Script> pool = {
      // Decide never uses braces: invalid after three attempts.
      {"They expect me to pick 33, so they will pick 22, so I should go lower. {22}",
       3, {"I would rather not commit to a number.", "Still thinking it over.", "Something small, I suppose."}},
      // Decide answers out of range every time.
      {"The other participant likely picks 50, so the target is about 33. {50}",
       2, {"{150}", "{150}", "{150}"}},
      // Decide recovers on the second attempt.
      {"Opponent likely picks 40, so the target is about 27. {40}",
       2, {"Probably in the twenties.", "Fine: {25}"}},
      // Analysis never answers with braces: the heuristic fills in the depth.
      {"They expect me to pick 33, so they will pick 22, so I should go lower. {22}",
       3, {"{16}"}, {"Hard to say.", "Several levels.", "It nests a few times."}},
      // Revise never produces a usable prediction.
      {"", 1, {"{10}"}, {}, {"I cannot predict that.", "{500}", "No idea."}},
      // Well-behaved.
      {"I will pick a number below the anchor since the target shrinks. {40}", 1, {"{33}"}},
  };
  return pool;
}

class ScriptedBackend final : public llm::ChatBackend {
 public:
  llm::ChatResponse complete(const llm::ChatRequest& request) override {
    const auto& script = pick(request);
    const int attempt = attempt_of(request.user_text);
    const auto nth = [&](const std::vector<std::string>& v) { return v[std::min<std::size_t>(attempt - 1, v.size() - 1)]; };
    std::string text;
    if (is_stage(request, "Count the perspectives"))
      text = script.analyze.empty() ? "Counting the nested perspectives gives {" + std::to_string(script.kappa) + "}"
                                    : nth(script.analyze);
    else if (is_stage(request, "Decide which number"))
      text = nth(script.decide);
    else
      text = script.revise.empty() ? script.reasoning : nth(script.revise);
    return {text, std::nullopt, std::chrono::milliseconds{0}};
  }

  std::string annotation(const llm::ChatRequest& request) const {
    const auto& script = pick(request);
    std::string note = "script " + std::to_string(index_of(request));
    if (is_stage(request, "Count the perspectives")) note += " annotated kappa=" + std::to_string(script.kappa);
    return note;
  }

 private:
  static bool is_stage(const llm::ChatRequest& r, const char* marker) {
    return r.user_text.find(marker) != std::string::npos;
  }

  static int attempt_of(const std::string& user) {
    static const std::regex re(R"(attempt (\d+) of)");
    std::smatch m;
    return std::regex_search(user, m, re) ? std::stoi(m[1]) : 1;
  }

  // Session "r<round>/<model>/r<round>/<slot>" selects the script.
  static std::size_t index_of(const llm::ChatRequest& r) {
    static const std::regex re(R"(Session r(\d+)/\S+/([ab])\.)");
    std::smatch m;
    if (!std::regex_search(r.system_text, m, re)) throw Error("no session in system text: " + r.system_text);
    return static_cast<std::size_t>(std::stoi(m[1]) - 1) * 2 + (m[2] == "b" ? 1 : 0);
  }

  const Script& pick(const llm::ChatRequest& r) const {
    const auto& pool = r.model_id == "scripted-faulty-v1"                                   ? faulty_pool()
                       : r.user_text.find("first years students") != std::string::npos     ? student_pool()
                       : r.user_text.find("professors with expert") != std::string::npos   ? professional_pool()
                                                                                            : neutral_pool();
    return pool[index_of(r) % pool.size()];
  }
};

class AnnotatingRecorder final : public llm::ChatBackend {
 public:
  AnnotatingRecorder(std::shared_ptr<ScriptedBackend> inner, std::shared_ptr<llm::FixtureStore> store)
      : inner_(std::move(inner)), store_(std::move(store)) {}

  llm::ChatResponse complete(const llm::ChatRequest& request) override {
    auto response = inner_->complete(request);
    store_->put(llm::request_digest(request), response.text, request.label + " | " + inner_->annotation(request));
    return response;
  }

 private:
  std::shared_ptr<ScriptedBackend> inner_;
  std::shared_ptr<llm::FixtureStore> store_;
};

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: synth_fixtures <experiments-dir>\n";
    return 1;
  }
  const fs::path root = argv[1];
  const std::vector<std::pair<fs::path, std::vector<std::string>>> sets = {
      {root / "llm_selfplay", {"config.json"}},
      {root / "profiled", {"students.json", "professionals.json"}},
      {root / "invalid_moves", {"config.json"}},
  };
  try {
    for (const auto& [dir, configs] : sets) {
      fs::remove_all(dir / "fixtures");
      fs::create_directories(dir / "fixtures");
      auto store = std::make_shared<llm::FixtureStore>(dir / "fixtures");
      auto backend = std::make_shared<AnnotatingRecorder>(std::make_shared<ScriptedBackend>(), store);
      for (const auto& name : configs) {
        const auto cfg = load_config(dir / name);
        const auto scratch = fs::temp_directory_path() / ("synth-" + cfg.name);
        const auto result = run_experiment(cfg, scratch, backend);
        fs::remove_all(scratch);
        std::cout << cfg.name << ": " << result.matches << " matches\n";
      }
      std::cout << dir.string() << ": " << store->manifest().size() << " fixtures\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
