// Copyright 2026 The SEK Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Chat-completion backends and the client wrapper that adds retries, a
// response cache and an in-flight bound on top of them.
//
//   std::shared_ptr<Backend> backend = MockBackend::from_file(p);
//   ChatClient client(backend, ClientOptions{});
//   auto r = client.complete({{"user", prompt}}, CompletionParams{});

#ifndef SEK_LLM_CLIENT_HPP
#define SEK_LLM_CLIENT_HPP

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sek/benchmark_io.hpp"
#include "sek/error.hpp"

namespace sek {

struct Message {
  std::string role;
  std::string content;

  friend bool operator==(const Message&, const Message&) = default;
};

/// Generation settings. Defaults are greedy decoding with a 2048-token cap.
struct CompletionParams {
  std::string model = "mock";
  double temperature = 0.0;
  int max_tokens = 2048;
  std::vector<std::string> stop;
};

struct Usage {
  std::uint64_t prompt_tokens = 0;
  std::uint64_t completion_tokens = 0;
  std::uint64_t total_tokens = 0;
};

struct CompletionResult {
  std::string text;
  std::optional<Usage> usage;
  bool cached = false;
  std::optional<std::chrono::milliseconds> latency;
};

// Backend failures. Only TransientError, RateLimitError and TimeoutError are
// retried by ChatClient.
class BackendError : public Error {
 public:
  using Error::Error;
};
class AuthError : public BackendError {
 public:
  using BackendError::BackendError;
};
class RateLimitError : public BackendError {
 public:
  using BackendError::BackendError;
};
class TimeoutError : public BackendError {
 public:
  using BackendError::BackendError;
};
class TransientError : public BackendError {
 public:
  using BackendError::BackendError;
};
class MockMissError : public BackendError {
 public:
  using BackendError::BackendError;
};

/// SHA-256 (hex) of the canonical JSON of model, messages and every
/// generation parameter. Used both as cache key and as mock lookup key.
std::string request_key(std::span<const Message> messages,
                        const CompletionParams& params);

std::string sha256_hex(std::string_view data);

class Backend {
 public:
  virtual ~Backend() = default;
  virtual CompletionResult complete(std::span<const Message> messages,
                                    const CompletionParams& params) = 0;
  virtual std::string name() const = 0;
};

/// Scripted backend for offline runs. The fixture is a JSON object mapping
/// a request key (see request_key) or the literal content of the last user
/// message to either a response string or an array of responses; arrays are
/// consumed in order and their last element repeats.
class MockBackend final : public Backend {
 public:
  MockBackend() = default;
  explicit MockBackend(const std::string& fixture_json);
  static std::unique_ptr<MockBackend> from_file(
      const std::filesystem::path& path);

  void add(std::string key, std::string response);
  void add_sequence(std::string key, std::vector<std::string> responses);

  CompletionResult complete(std::span<const Message> messages,
                            const CompletionParams& params) override;
  std::string name() const override { return "mock"; }

  std::size_t call_count() const;

 private:
  struct Script {
    std::vector<std::string> responses;
    std::size_t next = 0;
  };
  mutable std::mutex mu_;
  std::unordered_map<std::string, Script> table_;
  std::size_t calls_ = 0;
};

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  std::chrono::milliseconds timeout{120000};
};

struct HttpResponse {
  long status = 0;
  std::string body;
};

/// Performs one HTTP POST. Throws TimeoutError on timeout and
/// TransientError on connection-level failures.
using HttpTransport = std::function<HttpResponse(const HttpRequest&)>;

/// libcurl-backed transport.
HttpTransport curl_transport();

struct OpenAIConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string api_key;
  std::chrono::milliseconds timeout{120000};
};

/// OpenAI-compatible chat-completions backend (works with any server that
/// speaks the same JSON shape).
class OpenAIBackend final : public Backend {
 public:
  explicit OpenAIBackend(OpenAIConfig config,
                         HttpTransport transport = curl_transport());

  CompletionResult complete(std::span<const Message> messages,
                            const CompletionParams& params) override;
  std::string name() const override { return "openai"; }

  /// Request body sent for the given call.
  static std::string request_body(std::span<const Message> messages,
                                  const CompletionParams& params);

 private:
  OpenAIConfig config_;
  HttpTransport transport_;
};

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{8000};
};

struct ClientOptions {
  RetryPolicy retry;
  std::size_t max_in_flight = 4;
  /// Minimum spacing between request starts; 0 disables rate limiting.
  double requests_per_second = 0.0;
  bool memory_cache = true;
  std::optional<std::filesystem::path> cache_dir;
  /// Replaced in tests to avoid real sleeps.
  std::function<void(std::chrono::milliseconds)> sleep;
};

struct CallOptions {
  /// When false the cache is neither read nor written.
  bool use_cache = true;
};

/// Thread-safe front end over a Backend.
class ChatClient {
 public:
  ChatClient(std::shared_ptr<Backend> backend, ClientOptions options = {});

  CompletionResult complete(std::span<const Message> messages,
                            const CompletionParams& params,
                            CallOptions call = {});

  const Backend& backend() const { return *backend_; }
  std::size_t max_in_flight() const { return options_.max_in_flight; }

  /// Number of backend calls actually issued (cache hits excluded).
  std::size_t backend_calls() const;

 private:
  std::optional<CompletionResult> cache_get(const std::string& key);
  void cache_put(const std::string& key, const CompletionParams& params,
                 const CompletionResult& result);
  void pace();

  std::shared_ptr<Backend> backend_;
  ClientOptions options_;
  std::counting_semaphore<> slots_;

  mutable std::mutex mu_;
  std::map<std::string, CompletionResult> memory_;
  std::size_t backend_calls_ = 0;
  std::chrono::steady_clock::time_point next_start_{};
};

struct ExtractedCode {
  std::string source;
  /// Set for call-based problems whose entry point is missing from source.
  std::optional<std::string> warning;
};

/// First fenced code block of the response, or the whole response when it
/// has none. Throws BackendError on an empty response.
ExtractedCode extract_code(std::string_view response,
                           const ProblemSpec& problem);

}  // namespace sek

#endif  // SEK_LLM_CLIENT_HPP
