#include "bcg/llm/client.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "bcg/error.hpp"

namespace bcg::llm {

namespace fs = std::filesystem;
using nlohmann::json;

void ChatRequest::validate() const {
  if (user_text.empty()) throw ValidationError("chat request has empty user text");
  if (!(temperature >= 0.0 && temperature <= 2.0))
    throw ValidationError("chat temperature must lie in [0, 2]");
  if (max_tokens <= 0) throw ValidationError("chat max_tokens must be positive");
}

std::string canonical_serialization(const ChatRequest& request) {
  char temperature[64];
  std::snprintf(temperature, sizeof temperature, "%.6f", request.temperature);
  const json fields = json::array(
      {request.model_id, request.system_text, request.user_text, temperature, request.max_tokens});
  return fields.dump(-1, ' ', false, json::error_handler_t::strict);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string request_digest(const ChatRequest& request) {
  return sha256_hex(canonical_serialization(request));
}

// ---------------------------------------------------------------------------------------------

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

}  // namespace

FixtureStore::FixtureStore(fs::path dir) : dir_(std::move(dir)) {
  const auto index = dir_ / "index.json";
  if (fs::exists(index)) {
    try {
      manifest_ = json::parse(read_file(index)).get<std::map<std::string, std::string>>();
    } catch (const json::exception& e) {
      throw ConfigError("malformed fixture manifest " + index.string() + ": " + e.what());
    }
  }
}

std::optional<std::string> FixtureStore::lookup(const std::string& digest) const {
  const auto p = dir_ / (digest + ".txt");
  if (!fs::exists(p)) return std::nullopt;
  return read_file(p);
}

bool FixtureStore::contains(const std::string& digest) const {
  return fs::exists(dir_ / (digest + ".txt"));
}

void FixtureStore::put(const std::string& digest, const std::string& text, const std::string& label) {
  std::lock_guard lock(mutex_);
  fs::create_directories(dir_);
  write_file(dir_ / (digest + ".txt"), text);
  manifest_[digest] = label;
  save_manifest_locked();
}

std::map<std::string, std::string> FixtureStore::manifest() const {
  std::lock_guard lock(mutex_);
  return manifest_;
}

void FixtureStore::save_manifest_locked() const {
  write_file(dir_ / "index.json", json(manifest_).dump(2) + "\n");
}

std::vector<std::string> FixtureStore::verify() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> problems;
  for (const auto& [digest, label] : manifest_)
    if (!fs::exists(dir_ / (digest + ".txt")))
      problems.push_back("manifest entry " + digest + " (" + label + ") has no response file");
  if (fs::exists(dir_)) {
    for (const auto& entry : fs::directory_iterator(dir_)) {
      if (entry.path().extension() != ".txt") continue;
      const auto digest = entry.path().stem().string();
      if (!manifest_.contains(digest)) problems.push_back("response file " + digest + ".txt is not in the manifest");
    }
  }
  return problems;
}

ChatResponse ReplayBackend::complete(const ChatRequest& request) {
  request.validate();
  const auto digest = request_digest(request);
  auto text = store_->lookup(digest);
  if (!text) throw FixtureMissError(digest);
  return ChatResponse{std::move(*text), std::nullopt, std::chrono::milliseconds{0}};
}

ChatResponse RecordingBackend::complete(const ChatRequest& request) {
  auto response = inner_->complete(request);
  store_->put(request_digest(request), response.text, request.label);
  return response;
}

// ---------------------------------------------------------------------------------------------

ConcurrencyLimiter::ConcurrencyLimiter(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw ConfigError("concurrency cap must be at least 1");
}

void ConcurrencyLimiter::acquire() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [&] { return in_flight_ < capacity_; });
  ++in_flight_;
  watermark_ = std::max(watermark_, in_flight_);
}

void ConcurrencyLimiter::release() {
  {
    std::lock_guard lock(mutex_);
    --in_flight_;
  }
  cv_.notify_one();
}

int ConcurrencyLimiter::in_flight() const {
  std::lock_guard lock(mutex_);
  return in_flight_;
}

int ConcurrencyLimiter::max_in_flight() const {
  std::lock_guard lock(mutex_);
  return watermark_;
}

std::chrono::milliseconds RetryPolicy::delay_before(int attempt) const {
  const double scale = std::pow(factor, attempt - 1);
  return std::chrono::milliseconds(static_cast<long long>(base_delay.count() * scale));
}

// ---------------------------------------------------------------------------------------------

namespace {

std::string substitute(std::string text, const std::map<std::string, std::string>& vars) {
  for (const auto& [key, value] : vars) {
    const std::string token = "${" + key + "}";
    for (auto pos = text.find(token); pos != std::string::npos; pos = text.find(token, pos + value.size()))
      text.replace(pos, token.size(), value);
  }
  return text;
}

json render(const json& node, const ChatRequest& r, const std::map<std::string, std::string>& vars) {
  if (node.is_object()) {
    json out = json::object();
    for (const auto& [k, v] : node.items()) out[k] = render(v, r, vars);
    return out;
  }
  if (node.is_array()) {
    json out = json::array();
    for (const auto& v : node) out.push_back(render(v, r, vars));
    return out;
  }
  if (node.is_string()) {
    const auto& s = node.get_ref<const std::string&>();
    if (s == "${temperature}") return r.temperature;
    if (s == "${max_tokens}") return r.max_tokens;
    return substitute(s, vars);
  }
  return node;
}

bool transient(int status) { return status == 0 || status == 408 || status == 429 || status >= 500; }

}  // namespace

ProviderProfile ProviderProfile::openai() {
  ProviderProfile p;
  p.name = "openai";
  p.url = "https://api.openai.com/v1/chat/completions";
  p.api_key_env = "OPENAI_API_KEY";
  p.headers = {{"Authorization", "Bearer ${api_key}"}, {"Content-Type", "application/json"}};
  p.body = json{{"model", "${model}"},
                {"temperature", "${temperature}"},
                {"max_tokens", "${max_tokens}"},
                {"messages",
                 json::array({json{{"role", "system"}, {"content", "${system}"}},
                              json{{"role", "user"}, {"content", "${user}"}}})}};
  p.response_text_pointer = "/choices/0/message/content";
  p.prompt_tokens_pointer = "/usage/prompt_tokens";
  p.completion_tokens_pointer = "/usage/completion_tokens";
  return p;
}

ProviderProfile ProviderProfile::anthropic() {
  ProviderProfile p;
  p.name = "anthropic";
  p.url = "https://api.anthropic.com/v1/messages";
  p.api_key_env = "ANTHROPIC_API_KEY";
  p.headers = {{"x-api-key", "${api_key}"},
               {"anthropic-version", "2023-06-01"},
               {"content-type", "application/json"}};
  p.body = json{{"model", "${model}"},
                {"temperature", "${temperature}"},
                {"max_tokens", "${max_tokens}"},
                {"system", "${system}"},
                {"messages", json::array({json{{"role", "user"}, {"content", "${user}"}}})}};
  p.response_text_pointer = "/content/0/text";
  p.prompt_tokens_pointer = "/usage/input_tokens";
  p.completion_tokens_pointer = "/usage/output_tokens";
  return p;
}

ProviderProfile ProviderProfile::preset(std::string_view name) {
  if (name == "openai") return openai();
  if (name == "anthropic") return anthropic();
  throw ConfigError("unknown provider preset '" + std::string(name) + "'");
}

json ProviderProfile::render_body(const ChatRequest& request) const {
  const std::map<std::string, std::string> vars = {
      {"model", request.model_id}, {"system", request.system_text}, {"user", request.user_text}};
  return render(body, request, vars);
}

LiveBackend::LiveBackend(ProviderProfile profile, RetryPolicy retry, int concurrency,
                         Transport transport, Sleeper sleeper)
    : profile_(std::move(profile)),
      retry_(retry),
      transport_(std::move(transport)),
      sleeper_(sleeper ? std::move(sleeper) : Sleeper([](auto d) { std::this_thread::sleep_for(d); })),
      limiter_(concurrency) {
  if (profile_.url.empty()) throw ConfigError("provider " + profile_.name + " has no url");
  if (retry_.max_attempts < 1) throw ConfigError("retry policy needs at least one attempt");
  const char* key = profile_.api_key_env.empty() ? nullptr : std::getenv(profile_.api_key_env.c_str());
  if (key == nullptr || *key == '\0')
    throw ConfigError("credential variable " + (profile_.api_key_env.empty() ? std::string("<unset>") : profile_.api_key_env) +
                      " is not set for provider " + profile_.name);
  api_key_ = key;
}

ChatResponse LiveBackend::complete(const ChatRequest& request) {
  request.validate();
  if (api_key_.empty()) throw ConfigError("missing credential for provider " + profile_.name);

  const std::map<std::string, std::string> vars = {{"api_key", api_key_}, {"model", request.model_id}};
  std::vector<HttpHeader> headers;
  for (const auto& [name, value] : profile_.headers) headers.push_back({name, substitute(value, vars)});
  const std::string body = profile_.render_body(request).dump();

  std::string last_error;
  for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
    if (attempt > 1) sleeper_(retry_.delay_before(attempt - 1));
    HttpResult result;
    const auto started = std::chrono::steady_clock::now();
    {
      ConcurrencyLimiter::Token token(limiter_);
      result = transport_(profile_.url, headers, body, profile_.timeout_seconds);
    }
    const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);

    if (result.status >= 200 && result.status < 300) {
      try {
        const auto reply = json::parse(result.body);
        ChatResponse out;
        out.text = reply.at(json::json_pointer(profile_.response_text_pointer)).get<std::string>();
        out.latency = latency;
        if (!profile_.prompt_tokens_pointer.empty() && !profile_.completion_tokens_pointer.empty()) {
          const json::json_pointer pin(profile_.prompt_tokens_pointer), pout(profile_.completion_tokens_pointer);
          if (reply.contains(pin) && reply.contains(pout))
            out.usage = TokenUsage{reply.at(pin).get<long>(), reply.at(pout).get<long>()};
        }
        return out;
      } catch (const json::exception& e) {
        throw BackendError("malformed reply from " + profile_.name + ": " + e.what());
      }
    }
    last_error = result.status == 0 ? result.error : "HTTP " + std::to_string(result.status) + ": " + result.body.substr(0, 200);
    if (!transient(result.status)) throw BackendError(profile_.name + " rejected the request: " + last_error);
  }
  throw BackendError(profile_.name + " unavailable after " + std::to_string(retry_.max_attempts) +
                     " attempts: " + last_error);
}

}  // namespace bcg::llm
