#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace bcg::llm {

struct ChatRequest {
  std::string model_id;
  std::string system_text;
  std::string user_text;
  double temperature = 1.0;
  int max_tokens = 1024;
  /// Human-readable tag for fixture manifests. Not part of the digest.
  std::string label;

  /// Throws ValidationError on empty user text or temperature outside [0, 2].
  void validate() const;
};

struct TokenUsage {
  long prompt_tokens = 0;
  long completion_tokens = 0;
};

struct ChatResponse {
  std::string text;
  std::optional<TokenUsage> usage;
  std::chrono::milliseconds latency{0};
};

/// Compact JSON array [model_id, system_text, user_text, "%.6f" temperature, max_tokens].
std::string canonical_serialization(const ChatRequest& request);
std::string sha256_hex(std::string_view bytes);
/// Lowercase hex SHA-256 of canonical_serialization.
std::string request_digest(const ChatRequest& request);

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

/// Directory of <digest>.txt response files plus an index.json manifest mapping digests to
/// labels. Reads are safe from many threads; writes are serialized.
class FixtureStore {
 public:
  explicit FixtureStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::optional<std::string> lookup(const std::string& digest) const;
  bool contains(const std::string& digest) const;
  void put(const std::string& digest, const std::string& text, const std::string& label);
  std::map<std::string, std::string> manifest() const;
  /// Manifest entries without a file, and response files missing from the manifest.
  std::vector<std::string> verify() const;

 private:
  void save_manifest_locked() const;

  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  std::map<std::string, std::string> manifest_;
};

/// Serves stored responses by request digest. Never touches the network.
class ReplayBackend final : public ChatBackend {
 public:
  explicit ReplayBackend(std::shared_ptr<const FixtureStore> store) : store_(std::move(store)) {}
  ChatResponse complete(const ChatRequest& request) override;

 private:
  std::shared_ptr<const FixtureStore> store_;
};

/// Forwards to another backend and writes every response into a fixture store.
class RecordingBackend final : public ChatBackend {
 public:
  RecordingBackend(std::shared_ptr<ChatBackend> inner, std::shared_ptr<FixtureStore> store)
      : inner_(std::move(inner)), store_(std::move(store)) {}
  ChatResponse complete(const ChatRequest& request) override;

 private:
  std::shared_ptr<ChatBackend> inner_;
  std::shared_ptr<FixtureStore> store_;
};

/// Counting limiter on simultaneous requests, with a high-water mark for inspection.
class ConcurrencyLimiter {
 public:
  explicit ConcurrencyLimiter(int capacity);

  class Token {
   public:
    explicit Token(ConcurrencyLimiter& owner) : owner_(&owner) { owner_->acquire(); }
    Token(const Token&) = delete;
    Token& operator=(const Token&) = delete;
    ~Token() { owner_->release(); }

   private:
    ConcurrencyLimiter* owner_;
  };

  int capacity() const { return capacity_; }
  int in_flight() const;
  int max_in_flight() const;

 private:
  void acquire();
  void release();

  const int capacity_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  int in_flight_ = 0;
  int watermark_ = 0;
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{1000};
  double factor = 2.0;

  std::chrono::milliseconds delay_before(int attempt) const;  // attempt >= 1
};

/// How to talk to one chat-completions provider. Header values and string leaves of the body
/// template may contain ${model}, ${system}, ${user}, ${temperature}, ${max_tokens} and
/// ${api_key}; a leaf that is exactly one numeric placeholder is emitted as a number.
struct ProviderProfile {
  std::string name;
  std::string url;
  std::string api_key_env;
  std::vector<std::pair<std::string, std::string>> headers;
  nlohmann::json body;
  std::string response_text_pointer;  // JSON pointer into the reply
  std::string prompt_tokens_pointer;
  std::string completion_tokens_pointer;
  int timeout_seconds = 120;

  static ProviderProfile openai();
  static ProviderProfile anthropic();
  static ProviderProfile preset(std::string_view name);

  nlohmann::json render_body(const ChatRequest& request) const;
};

struct HttpHeader {
  std::string name;
  std::string value;
};

struct HttpResult {
  int status = 0;  // 0 when the transport failed before a status line
  std::string body;
  std::string error;
};

using Transport =
    std::function<HttpResult(const std::string& url, const std::vector<HttpHeader>& headers,
                             const std::string& body, int timeout_seconds)>;
using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// HTTPS/HTTP POST via cpp-httplib.
Transport http_transport();

/// Live provider backend with exponential-backoff retry on transient failures
/// (transport errors, 408, 429, 5xx) and a cap on requests in flight.
class LiveBackend final : public ChatBackend {
 public:
  /// Reads the credential now; throws ConfigError if it is absent.
  LiveBackend(ProviderProfile profile, RetryPolicy retry, int concurrency,
              Transport transport = http_transport(), Sleeper sleeper = {});

  ChatResponse complete(const ChatRequest& request) override;
  const ConcurrencyLimiter& limiter() const { return limiter_; }

 private:
  ProviderProfile profile_;
  RetryPolicy retry_;
  std::string api_key_;
  Transport transport_;
  Sleeper sleeper_;
  ConcurrencyLimiter limiter_;
};

}  // namespace bcg::llm
