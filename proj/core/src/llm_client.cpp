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

#include "sek/llm_client.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <curl/curl.h>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

namespace sek {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json messages_json(std::span<const Message> messages) {
  json arr = json::array();
  for (const auto& m : messages) {
    arr.push_back({{"role", m.role}, {"content", m.content}});
  }
  return arr;
}

std::string last_user_content(std::span<const Message> messages) {
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->role == "user") return it->content;
  }
  return messages.empty() ? std::string() : messages.back().content;
}

json usage_json(const Usage& u) {
  return {{"prompt_tokens", u.prompt_tokens},
          {"completion_tokens", u.completion_tokens},
          {"total_tokens", u.total_tokens}};
}

Usage usage_from_json(const json& j) {
  Usage u;
  u.prompt_tokens = j.value("prompt_tokens", std::uint64_t{0});
  u.completion_tokens = j.value("completion_tokens", std::uint64_t{0});
  u.total_tokens = j.value("total_tokens", std::uint64_t{0});
  return u;
}

std::size_t curl_write(char* data, std::size_t size, std::size_t nmemb,
                       void* user) {
  static_cast<std::string*>(user)->append(data, size * nmemb);
  return size * nmemb;
}

void curl_global_once() {
  static const bool init = [] {
    curl_global_init(CURL_GLOBAL_DEFAULT);
    return true;
  }();
  (void)init;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1) {
    throw Error("sha256 failed");
  }
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string request_key(std::span<const Message> messages,
                        const CompletionParams& params) {
  const json canonical = {{"model", params.model},
                          {"messages", messages_json(messages)},
                          {"temperature", params.temperature},
                          {"max_tokens", params.max_tokens},
                          {"stop", params.stop}};
  return sha256_hex(canonical.dump());
}

// --- MockBackend -----------------------------------------------------------

MockBackend::MockBackend(const std::string& fixture_json) {
  json j;
  try {
    j = json::parse(fixture_json);
  } catch (const json::parse_error& e) {
    throw InputError(fmt::format("mock fixture: invalid JSON: {}", e.what()));
  }
  if (!j.is_object()) throw InputError("mock fixture: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (value.is_string()) {
      add(key, value.get<std::string>());
    } else if (value.is_array() && !value.empty() &&
               std::all_of(value.begin(), value.end(),
                           [](const json& v) { return v.is_string(); })) {
      add_sequence(key, value.get<std::vector<std::string>>());
    } else {
      throw InputError(fmt::format(
          "mock fixture: entry '{}' must be a string or non-empty string array",
          key.substr(0, 60)));
    }
  }
}

std::unique_ptr<MockBackend> MockBackend::from_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("{}: cannot open file", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::make_unique<MockBackend>(ss.str());
}

void MockBackend::add(std::string key, std::string response) {
  add_sequence(std::move(key), {std::move(response)});
}

void MockBackend::add_sequence(std::string key,
                               std::vector<std::string> responses) {
  if (responses.empty()) throw InputError("mock: empty response sequence");
  std::lock_guard lock(mu_);
  table_.insert_or_assign(std::move(key), Script{std::move(responses), 0});
}

CompletionResult MockBackend::complete(std::span<const Message> messages,
                                       const CompletionParams& params) {
  const auto hash = request_key(messages, params);
  const auto literal = last_user_content(messages);
  std::lock_guard lock(mu_);
  ++calls_;
  auto it = table_.find(hash);
  if (it == table_.end()) it = table_.find(literal);
  if (it == table_.end()) {
    throw MockMissError(fmt::format("no mock response for request {}", hash));
  }
  auto& script = it->second;
  const auto idx = std::min(script.next, script.responses.size() - 1);
  if (script.next < script.responses.size()) ++script.next;
  return CompletionResult{script.responses[idx], std::nullopt, false,
                          std::nullopt};
}

std::size_t MockBackend::call_count() const {
  std::lock_guard lock(mu_);
  return calls_;
}

// --- HTTP ------------------------------------------------------------------

HttpTransport curl_transport() {
  curl_global_once();
  return [](const HttpRequest& req) -> HttpResponse {
    std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> curl(curl_easy_init(),
                                                             &curl_easy_cleanup);
    if (!curl) throw TransientError("curl_easy_init failed");
    curl_slist* raw_headers = nullptr;
    for (const auto& [k, v] : req.headers) {
      raw_headers = curl_slist_append(raw_headers, fmt::format("{}: {}", k, v).c_str());
    }
    std::unique_ptr<curl_slist, decltype(&curl_slist_free_all)> headers(
        raw_headers, &curl_slist_free_all);

    HttpResponse resp;
    curl_easy_setopt(curl.get(), CURLOPT_URL, req.url.c_str());
    curl_easy_setopt(curl.get(), CURLOPT_POST, 1L);
    curl_easy_setopt(curl.get(), CURLOPT_POSTFIELDS, req.body.data());
    curl_easy_setopt(curl.get(), CURLOPT_POSTFIELDSIZE,
                     static_cast<long>(req.body.size()));
    curl_easy_setopt(curl.get(), CURLOPT_HTTPHEADER, headers.get());
    curl_easy_setopt(curl.get(), CURLOPT_WRITEFUNCTION, &curl_write);
    curl_easy_setopt(curl.get(), CURLOPT_WRITEDATA, &resp.body);
    curl_easy_setopt(curl.get(), CURLOPT_TIMEOUT_MS,
                     static_cast<long>(req.timeout.count()));
    curl_easy_setopt(curl.get(), CURLOPT_NOSIGNAL, 1L);

    const CURLcode rc = curl_easy_perform(curl.get());
    if (rc == CURLE_OPERATION_TIMEDOUT) {
      throw TimeoutError(fmt::format("request to {} timed out", req.url));
    }
    if (rc != CURLE_OK) {
      throw TransientError(
          fmt::format("request to {} failed: {}", req.url, curl_easy_strerror(rc)));
    }
    curl_easy_getinfo(curl.get(), CURLINFO_RESPONSE_CODE, &resp.status);
    return resp;
  };
}

// --- OpenAIBackend ---------------------------------------------------------

OpenAIBackend::OpenAIBackend(OpenAIConfig config, HttpTransport transport)
    : config_(std::move(config)), transport_(std::move(transport)) {}

std::string OpenAIBackend::request_body(std::span<const Message> messages,
                                        const CompletionParams& params) {
  json body = {{"model", params.model},
               {"messages", messages_json(messages)},
               {"temperature", params.temperature},
               {"max_tokens", params.max_tokens}};
  if (!params.stop.empty()) body["stop"] = params.stop;
  return body.dump();
}

CompletionResult OpenAIBackend::complete(std::span<const Message> messages,
                                         const CompletionParams& params) {
  HttpRequest req;
  req.url = config_.endpoint;
  req.timeout = config_.timeout;
  req.headers.emplace_back("Content-Type", "application/json");
  if (!config_.api_key.empty()) {
    req.headers.emplace_back("Authorization", "Bearer " + config_.api_key);
  }
  req.body = request_body(messages, params);

  const auto start = std::chrono::steady_clock::now();
  const HttpResponse resp = transport_(req);
  const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - start);

  const auto excerpt = resp.body.substr(0, 200);
  if (resp.status == 401 || resp.status == 403) {
    throw AuthError(fmt::format("HTTP {}: {}", resp.status, excerpt));
  }
  if (resp.status == 429) {
    throw RateLimitError(fmt::format("HTTP 429: {}", excerpt));
  }
  if (resp.status == 408 || resp.status >= 500) {
    throw TransientError(fmt::format("HTTP {}: {}", resp.status, excerpt));
  }
  if (resp.status < 200 || resp.status >= 300) {
    throw BackendError(fmt::format("HTTP {}: {}", resp.status, excerpt));
  }

  json j;
  try {
    j = json::parse(resp.body);
  } catch (const json::parse_error& e) {
    throw BackendError(fmt::format("malformed response body: {}", e.what()));
  }
  const auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->empty()) {
    throw BackendError("response has no choices");
  }
  const auto& msg = (*choices)[0].value("message", json::object());
  const auto content = msg.find("content");
  if (content == msg.end() || !content->is_string() ||
      content->get<std::string>().empty()) {
    throw BackendError("response has empty content");
  }

  CompletionResult r;
  r.text = content->get<std::string>();
  if (auto u = j.find("usage"); u != j.end() && u->is_object()) {
    r.usage = usage_from_json(*u);
  }
  r.latency = latency;
  return r;
}

// --- ChatClient ------------------------------------------------------------

ChatClient::ChatClient(std::shared_ptr<Backend> backend, ClientOptions options)
    : backend_(std::move(backend)),
      options_(std::move(options)),
      slots_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, options_.max_in_flight))) {
  if (!backend_) throw ConfigError("ChatClient: null backend");
  if (options_.max_in_flight == 0) options_.max_in_flight = 1;
  if (options_.retry.max_attempts < 1) options_.retry.max_attempts = 1;
  if (!options_.sleep) {
    options_.sleep = [](std::chrono::milliseconds d) {
      std::this_thread::sleep_for(d);
    };
  }
  if (options_.cache_dir) fs::create_directories(*options_.cache_dir);
}

std::size_t ChatClient::backend_calls() const {
  std::lock_guard lock(mu_);
  return backend_calls_;
}

std::optional<CompletionResult> ChatClient::cache_get(const std::string& key) {
  if (options_.memory_cache) {
    std::lock_guard lock(mu_);
    if (auto it = memory_.find(key); it != memory_.end()) return it->second;
  }
  if (!options_.cache_dir) return std::nullopt;
  const auto path = *options_.cache_dir / key.substr(0, 2) / (key + ".json");
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  try {
    const json j = json::parse(in);
    if (j.value("key", std::string()) != key) return std::nullopt;
    CompletionResult r;
    r.text = j.at("text").get<std::string>();
    if (auto u = j.find("usage"); u != j.end() && u->is_object()) {
      r.usage = usage_from_json(*u);
    }
    if (options_.memory_cache) {
      std::lock_guard lock(mu_);
      memory_.emplace(key, r);
    }
    return r;
  } catch (const json::exception& e) {
    spdlog::warn("ignoring unreadable cache entry {}: {}", path.string(), e.what());
    return std::nullopt;
  }
}

void ChatClient::cache_put(const std::string& key,
                           const CompletionParams& params,
                           const CompletionResult& result) {
  if (options_.memory_cache) {
    std::lock_guard lock(mu_);
    memory_.insert_or_assign(key, result);
  }
  if (!options_.cache_dir) return;
  const auto dir = *options_.cache_dir / key.substr(0, 2);
  fs::create_directories(dir);
  json j = {{"key", key}, {"model", params.model}, {"text", result.text}};
  if (result.usage) j["usage"] = usage_json(*result.usage);

  // Unique temp name per writer, then an atomic rename into place.
  thread_local std::mt19937_64 rng{std::random_device{}()};
  const auto tmp = dir / fmt::format(".{}.{:016x}.tmp", key, rng());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      spdlog::warn("cannot write cache entry {}", tmp.string());
      return;
    }
    out << j.dump();
  }
  std::error_code ec;
  fs::rename(tmp, dir / (key + ".json"), ec);
  if (ec) {
    spdlog::warn("cannot commit cache entry {}: {}", key, ec.message());
    fs::remove(tmp, ec);
  }
}

void ChatClient::pace() {
  if (options_.requests_per_second <= 0.0) return;
  const auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(1.0 / options_.requests_per_second));
  std::chrono::steady_clock::time_point start;
  {
    std::lock_guard lock(mu_);
    const auto now = std::chrono::steady_clock::now();
    start = std::max(now, next_start_);
    next_start_ = start + interval;
  }
  const auto wait = start - std::chrono::steady_clock::now();
  if (wait > std::chrono::steady_clock::duration::zero()) {
    options_.sleep(std::chrono::duration_cast<std::chrono::milliseconds>(wait));
  }
}

CompletionResult ChatClient::complete(std::span<const Message> messages,
                                      const CompletionParams& params,
                                      CallOptions call) {
  const bool caching =
      call.use_cache && (options_.memory_cache || options_.cache_dir);
  const auto key = request_key(messages, params);
  if (caching) {
    if (auto hit = cache_get(key)) {
      hit->cached = true;
      hit->latency.reset();
      return *hit;
    }
  }

  auto backoff = options_.retry.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    try {
      CompletionResult r;
      {
        slots_.acquire();
        struct Release {
          std::counting_semaphore<>& s;
          ~Release() { s.release(); }
        } release{slots_};
        pace();
        {
          std::lock_guard lock(mu_);
          ++backend_calls_;
        }
        r = backend_->complete(messages, params);
      }
      if (r.text.empty()) throw BackendError("backend returned an empty response");
      r.cached = false;
      if (caching) cache_put(key, params, r);
      return r;
    } catch (const TransientError& e) {
      if (attempt >= options_.retry.max_attempts) throw;
      spdlog::warn("attempt {} failed ({}), retrying", attempt, e.what());
    } catch (const TimeoutError& e) {
      if (attempt >= options_.retry.max_attempts) throw;
      spdlog::warn("attempt {} timed out ({}), retrying", attempt, e.what());
    } catch (const RateLimitError& e) {
      if (attempt >= options_.retry.max_attempts) {
        throw RateLimitError(fmt::format(
            "rate limit persisted after {} attempts: {}", attempt, e.what()));
      }
      spdlog::warn("attempt {} rate limited, retrying", attempt);
    }
    options_.sleep(backoff);
    const auto next = std::chrono::milliseconds(static_cast<long long>(
        std::llround(static_cast<double>(backoff.count()) * options_.retry.multiplier)));
    backoff = std::min(next, options_.retry.max_backoff);
  }
}

// --- extract_code ----------------------------------------------------------

namespace {

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// True when `name` occurs in `code` as a whole identifier.
bool mentions_identifier(std::string_view code, std::string_view name) {
  if (name.empty()) return false;
  for (auto pos = code.find(name); pos != std::string_view::npos;
       pos = code.find(name, pos + 1)) {
    const bool left = pos == 0 || !is_ident_char(code[pos - 1]);
    const auto end = pos + name.size();
    const bool right = end == code.size() || !is_ident_char(code[end]);
    if (left && right) return true;
  }
  return false;
}

}  // namespace

ExtractedCode extract_code(std::string_view response, const ProblemSpec& problem) {
  if (response.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw BackendError("empty response");
  }
  ExtractedCode out;
  const auto open = response.find("```");
  if (open == std::string_view::npos) {
    out.source = std::string(response);
  } else {
    const auto body_start_nl = response.find('\n', open);
    if (body_start_nl == std::string_view::npos) {
      out.source = std::string(response);
    } else {
      const auto body_start = body_start_nl + 1;
      auto close = response.find("```", body_start);
      if (close == std::string_view::npos) close = response.size();
      out.source = std::string(response.substr(body_start, close - body_start));
    }
  }
  if (problem.io_format == IoFormat::kCallBased && problem.entry_point &&
      !mentions_identifier(out.source, *problem.entry_point)) {
    out.warning = fmt::format("entry point '{}' not found in extracted code",
                              *problem.entry_point);
  }
  return out;
}

}  // namespace sek
