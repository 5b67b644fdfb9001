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

#include "sek/sandbox.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <filesystem>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "sek/error.hpp"

namespace sek {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kExcerptLimit = 2000;

struct ProcessResult {
  bool spawned = false;
  int spawn_errno = 0;
  bool timed_out = false;
  int exit_code = -1;
  int term_signal = 0;
  std::string out;
  std::string err;
};

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  ~Fd() { reset(); }
  int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

struct Pipe {
  Fd read;
  Fd write;
};

Pipe make_pipe() {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) {
    throw Error(fmt::format("pipe: {}", std::strerror(errno)));
  }
  return {Fd(fds[0]), Fd(fds[1])};
}

void set_nonblocking(int fd) {
  ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK);
}

ProcessResult run_process(const std::vector<std::string>& argv,
                          std::string_view input,
                          std::chrono::milliseconds limit) {
  ProcessResult res;
  Pipe in = make_pipe();
  Pipe out = make_pipe();
  Pipe err = make_pipe();
  Pipe status = make_pipe();  // carries errno when exec fails

  std::vector<char*> cargv;
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) throw Error(fmt::format("fork: {}", std::strerror(errno)));
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(in.read.get(), STDIN_FILENO);
    ::dup2(out.write.get(), STDOUT_FILENO);
    ::dup2(err.write.get(), STDERR_FILENO);
    ::execvp(cargv[0], cargv.data());
    const int e = errno;
    [[maybe_unused]] auto n = ::write(status.write.get(), &e, sizeof e);
    ::_exit(127);
  }

  in.read.reset();
  out.write.reset();
  err.write.reset();
  status.write.reset();

  int exec_errno = 0;
  if (::read(status.read.get(), &exec_errno, sizeof exec_errno) ==
      static_cast<ssize_t>(sizeof exec_errno)) {
    ::waitpid(pid, nullptr, 0);
    res.spawn_errno = exec_errno;
    return res;
  }
  res.spawned = true;

  set_nonblocking(in.write.get());
  set_nonblocking(out.read.get());
  set_nonblocking(err.read.get());
  ::signal(SIGPIPE, SIG_IGN);

  const auto deadline = std::chrono::steady_clock::now() + limit;
  std::size_t written = 0;
  if (input.empty()) in.write.reset();

  char buf[65536];
  while (out.read.get() >= 0 || err.read.get() >= 0) {
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      res.timed_out = true;
      break;
    }
    std::vector<pollfd> fds;
    if (in.write.get() >= 0) fds.push_back({in.write.get(), POLLOUT, 0});
    if (out.read.get() >= 0) fds.push_back({out.read.get(), POLLIN, 0});
    if (err.read.get() >= 0) fds.push_back({err.read.get(), POLLIN, 0});
    const auto wait_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
    const int rc = ::poll(fds.data(), fds.size(),
                          static_cast<int>(std::max<long long>(1, wait_ms.count())));
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (const auto& p : fds) {
      if (p.revents == 0) continue;
      if (p.fd == in.write.get()) {
        const auto n = ::write(p.fd, input.data() + written, input.size() - written);
        if (n > 0) written += static_cast<std::size_t>(n);
        if (n < 0 && errno != EAGAIN) written = input.size();
        if (written >= input.size()) in.write.reset();
      } else {
        const auto n = ::read(p.fd, buf, sizeof buf);
        if (n > 0) {
          (p.fd == out.read.get() ? res.out : res.err).append(buf, static_cast<std::size_t>(n));
        } else if (n == 0 || errno != EAGAIN) {
          if (p.fd == out.read.get()) out.read.reset(); else err.read.reset();
        }
      }
    }
  }

  int wstatus = 0;
  if (res.timed_out) {
    ::kill(-pid, SIGKILL);
    ::kill(pid, SIGKILL);
    ::waitpid(pid, &wstatus, 0);
    return res;
  }
  // Output closed; give the process until the deadline to exit.
  while (true) {
    const pid_t w = ::waitpid(pid, &wstatus, WNOHANG);
    if (w == pid) break;
    if (std::chrono::steady_clock::now() >= deadline) {
      res.timed_out = true;
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &wstatus, 0);
      return res;
    }
    ::usleep(2000);
  }
  if (WIFEXITED(wstatus)) res.exit_code = WEXITSTATUS(wstatus);
  if (WIFSIGNALED(wstatus)) res.term_signal = WTERMSIG(wstatus);
  return res;
}

bool is_executable(const fs::path& p) {
  return ::access(p.c_str(), X_OK) == 0 && !fs::is_directory(p);
}

std::string excerpt(std::string_view s) {
  if (s.size() <= kExcerptLimit) return std::string(s);
  return std::string(s.substr(s.size() - kExcerptLimit));
}

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kPass: return "pass";
    case Verdict::kFail: return "fail";
    case Verdict::kError: return "error";
    case Verdict::kTimeout: return "timeout";
  }
  return "";
}

Verdict verdict_from_string(std::string_view s) {
  if (s == "pass") return Verdict::kPass;
  if (s == "fail") return Verdict::kFail;
  if (s == "error") return Verdict::kError;
  if (s == "timeout") return Verdict::kTimeout;
  throw InputError(fmt::format("unknown verdict '{}'", s));
}

std::string to_json(const SandboxRequest& r) {
  json j = {{"mode", to_string(r.mode)},
            {"solution_source", r.solution_source},
            {"timeout_s", r.timeout_s},
            {"entry_point", r.entry_point ? json(*r.entry_point) : json()}};
  if (r.mode == IoFormat::kCallBased) {
    j["test_source"] = r.test_source;
  } else {
    json cases = json::array();
    for (const auto& c : r.cases) {
      cases.push_back({{"input", c.input},
                       {"expected_output", json::parse(c.expected_output_json)}});
    }
    j["cases"] = std::move(cases);
  }
  return j.dump();
}

std::string to_json(const SandboxVerdict& v) {
  json j = {{"status", to_string(v.status)},
            {"failed_case", v.failed_case ? json(*v.failed_case) : json()},
            {"stderr_excerpt", v.stderr_excerpt ? json(*v.stderr_excerpt) : json()},
            {"duration_s", v.duration_s}};
  return j.dump();
}

SandboxVerdict verdict_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(fmt::format("runner verdict is not JSON: {}", e.what()));
  }
  if (!j.is_object() || !j.contains("status") || !j["status"].is_string()) {
    throw InputError("runner verdict has no status");
  }
  SandboxVerdict v;
  v.status = verdict_from_string(j["status"].get<std::string>());
  if (auto it = j.find("failed_case"); it != j.end() && it->is_number_integer()) {
    v.failed_case = it->get<int>();
  }
  if (auto it = j.find("stderr_excerpt"); it != j.end() && it->is_string()) {
    v.stderr_excerpt = it->get<std::string>();
  }
  if (auto it = j.find("duration_s"); it != j.end() && it->is_number()) {
    v.duration_s = it->get<double>();
  }
  if (v.status == Verdict::kPass) v.failed_case.reset();
  return v;
}

SandboxRequest make_sandbox_request(const ProblemSpec& problem,
                                    std::string solution, double timeout_s) {
  SandboxRequest req;
  req.mode = problem.io_format;
  req.solution_source = std::move(solution);
  req.timeout_s = timeout_s;
  req.entry_point = problem.entry_point;

  if (problem.benchmark != Benchmark::kApps) {
    req.test_source = problem.tests;
    return req;
  }

  json io;
  try {
    io = json::parse(problem.tests);
  } catch (const json::parse_error& e) {
    throw InputError(fmt::format("{}: input_output.json: {}", problem.task_id, e.what()));
  }
  const auto& inputs = io.at("inputs");
  const auto& outputs = io.at("outputs");
  if (inputs.size() != outputs.size()) {
    throw InputError(fmt::format("{}: {} inputs but {} outputs", problem.task_id,
                                 inputs.size(), outputs.size()));
  }

  if (problem.io_format == IoFormat::kStdio) {
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      StdioCase c;
      if (inputs[i].is_string()) {
        c.input = inputs[i].get<std::string>();
      } else if (inputs[i].is_array()) {
        for (const auto& line : inputs[i]) {
          c.input += line.is_string() ? line.get<std::string>() : line.dump();
          c.input += '\n';
        }
      } else {
        c.input = inputs[i].dump();
      }
      c.expected_output_json = outputs[i].dump();
      req.cases.push_back(std::move(c));
    }
    return req;
  }

  // Call-based APPS: cases are argument lists; expected values are often
  // wrapped in a one-element list. Methods of a starter `class Solution`
  // are resolved when no free function with the name exists.
  const std::string fn = problem.entry_point.value_or("solve");
  req.entry_point = fn;
  req.test_source = fmt::format(
      "import json\n"
      "\n"
      "_CASES = json.loads({cases})\n"
      "\n"
      "\n"
      "def check(candidate):\n"
      "    if candidate is None:\n"
      "        candidate = getattr(globals()['Solution'](), {fn})\n"
      "    for _args, _expected in zip(_CASES['inputs'], _CASES['outputs']):\n"
      "        _got = candidate(*_args)\n"
      "        if isinstance(_got, tuple):\n"
      "            _got = list(_got)\n"
      "        assert _got == _expected or [_got] == _expected\n",
      fmt::arg("cases", json(io.dump()).dump()), fmt::arg("fn", json(fn).dump()));
  return req;
}

SandboxClient::SandboxClient(std::vector<std::string> command,
                             std::chrono::milliseconds grace)
    : command_(std::move(command)), grace_(grace) {}

bool SandboxClient::available() const {
  if (command_.empty() || command_.front().empty()) return false;
  const fs::path exe = command_.front();
  if (exe.has_parent_path()) return is_executable(exe);
  const char* path_env = std::getenv("PATH");
  if (path_env == nullptr) return false;
  std::string_view rest = path_env;
  while (!rest.empty()) {
    const auto colon = rest.find(':');
    const auto dir = rest.substr(0, colon);
    if (!dir.empty() && is_executable(fs::path(dir) / exe)) return true;
    if (colon == std::string_view::npos) break;
    rest.remove_prefix(colon + 1);
  }
  return false;
}

SandboxVerdict SandboxClient::execute(const SandboxRequest& request) const {
  SandboxVerdict v;
  if (!available()) {
    v.stderr_excerpt = fmt::format(
        "sandbox unavailable: runner '{}' not found",
        command_.empty() ? std::string() : command_.front());
    return v;
  }
  const auto limit =
      std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::duration<double>(request.timeout_s)) + grace_;
  const auto start = std::chrono::steady_clock::now();
  ProcessResult p;
  try {
    p = run_process(command_, to_json(request), limit);
  } catch (const Error& e) {
    v.stderr_excerpt = fmt::format("sandbox unavailable: {}", e.what());
    return v;
  }
  v.duration_s = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - start).count();
  if (!p.spawned) {
    v.stderr_excerpt = fmt::format("sandbox unavailable: cannot execute '{}': {}",
                                   command_.front(), std::strerror(p.spawn_errno));
    return v;
  }
  if (p.timed_out) {
    v.status = Verdict::kTimeout;
    v.stderr_excerpt = fmt::format("killed after {:.1f}s", v.duration_s);
    return v;
  }
  if (p.exit_code != 0) {
    v.stderr_excerpt = fmt::format(
        "runner failed ({}): {}",
        p.term_signal ? fmt::format("signal {}", p.term_signal)
                      : fmt::format("exit {}", p.exit_code),
        excerpt(p.err));
    return v;
  }
  try {
    auto parsed = verdict_from_json(p.out);
    if (parsed.duration_s == 0.0) parsed.duration_s = v.duration_s;
    return parsed;
  } catch (const InputError& e) {
    v.stderr_excerpt = fmt::format("runner protocol error: {}", e.what());
    return v;
  }
}

std::vector<std::string> split_command(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool in_token = false;
  char quote = 0;
  for (const char c : line) {
    if (quote != 0) {
      if (c == quote) {
        quote = 0;
      } else {
        cur.push_back(c);
      }
    } else if (c == '\'' || c == '"') {
      quote = c;
      in_token = true;
    } else if (c == ' ' || c == '\t' || c == '\n') {
      if (in_token) {
        out.push_back(std::move(cur));
        cur.clear();
        in_token = false;
      }
    } else {
      cur.push_back(c);
      in_token = true;
    }
  }
  if (in_token) out.push_back(std::move(cur));
  return out;
}

}  // namespace sek
