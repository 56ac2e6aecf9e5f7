#include "core/reward/external.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cctype>
#include <cmath>
#include <cstring>

#include <json.hpp>

namespace prof {
namespace {

using nlohmann::json;

// Thrown internally for per-call failures; converted to EvalOutcome.
struct CallFailure {
  EvalErrorKind kind;
};

json number_array(std::span<const double> v) {
  json arr = json::array();
  for (double x : v) arr.push_back(x);
  return arr;
}

bool looks_non_finite(const std::string& line) {
  std::string low;
  low.reserve(line.size());
  for (char c : line) low.push_back(char(std::tolower(uint8_t(c))));
  return low.find("nan") != std::string::npos ||
         low.find("inf") != std::string::npos;
}

}  // namespace

ExternalReward::ExternalReward(std::vector<std::string> argv, int32_t obs_dim,
                               int32_t act_dim,
                               std::chrono::milliseconds timeout)
    : obs_dim_(obs_dim), act_dim_(act_dim), timeout_(timeout) {
  if (argv.empty()) raise(Errc::spawn, "external reward needs a command");

  int in_pipe[2];   // parent -> child
  int out_pipe[2];  // child -> parent
  if (pipe(in_pipe) != 0) raise(Errc::spawn, "pipe() failed");
  if (pipe(out_pipe) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    raise(Errc::spawn, "pipe() failed");
  }

  pid_t pid = fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
    raise(Errc::spawn, "fork() failed");
  }
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
    std::vector<char*> cargv;
    cargv.reserve(argv.size() + 1);
    for (auto& a : argv) cargv.push_back(a.data());
    cargv.push_back(nullptr);
    execvp(cargv[0], cargv.data());
    _exit(127);
  }

  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  close(in_pipe[0]);
  close(out_pipe[1]);
  fcntl(from_child_, F_SETFL, O_NONBLOCK);
  signal(SIGPIPE, SIG_IGN);

  json hello = {{"hello", "prof-reward-v1"},
                {"obs_dim", obs_dim_},
                {"act_dim", act_dim_}};
  auto deadline = std::chrono::steady_clock::now() + timeout_;
  if (!write_all(hello.dump() + "\n")) {
    shutdown(true);
    raise(Errc::spawn, "external reward program exited before handshake");
  }
  std::string line;
  try {
    line = read_line(deadline, EvalErrorKind::kTimeout);
  } catch (const CallFailure& f) {
    shutdown(true);
    if (f.kind == EvalErrorKind::kTimeout)
      raise(Errc::timeout, "external reward handshake timed out");
    raise(Errc::spawn, "external reward program closed its pipe during handshake");
  }
  json ready = json::parse(line, nullptr, false);
  if (ready.is_discarded() || !ready.is_object() ||
      ready.value("ready", false) != true) {
    shutdown(true);
    raise(Errc::protocol, "external reward handshake reply was not {\"ready\":true}");
  }
}

ExternalReward::~ExternalReward() { shutdown(false); }

void ExternalReward::shutdown(bool force) {
  if (pid_ <= 0) return;
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  to_child_ = from_child_ = -1;
  if (force) kill(pid_, SIGKILL);
  // Give a well-behaved child a moment to exit on EOF, then insist.
  for (int i = 0; i < 50; ++i) {
    int status = 0;
    pid_t r = waitpid(pid_, &status, WNOHANG);
    if (r == pid_) {
      pid_ = -1;
      return;
    }
    usleep(10000);
  }
  kill(pid_, SIGKILL);
  waitpid(pid_, nullptr, 0);
  pid_ = -1;
}

bool ExternalReward::write_all(const std::string& line) {
  size_t off = 0;
  while (off < line.size()) {
    ssize_t n = write(to_child_, line.data() + off, line.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    off += size_t(n);
  }
  return true;
}

std::string ExternalReward::read_line(
    std::chrono::steady_clock::time_point deadline, EvalErrorKind timeout_kind) {
  for (;;) {
    size_t nl = rx_buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = rx_buffer_.substr(0, nl);
      rx_buffer_.erase(0, nl + 1);
      return line;
    }
    auto now = std::chrono::steady_clock::now();
    if (now >= deadline) throw CallFailure{timeout_kind};
    auto remain =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
    struct pollfd pfd = {from_child_, POLLIN, 0};
    int rc = poll(&pfd, 1, int(std::max<int64_t>(1, remain.count())));
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw CallFailure{EvalErrorKind::kProtocol};
    }
    if (rc == 0) throw CallFailure{timeout_kind};
    char buf[4096];
    ssize_t n = read(from_child_, buf, sizeof(buf));
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw CallFailure{EvalErrorKind::kProtocol};
    }
    if (n == 0) throw CallFailure{EvalErrorKind::kProtocol};  // EOF
    rx_buffer_.append(buf, size_t(n));
  }
}

EvalOutcome ExternalReward::evaluate(std::span<const double> obs,
                                     std::span<const double> act,
                                     std::span<const double> next) {
  if (pid_ <= 0) return EvalOutcome::error(EvalErrorKind::kSpawn);
  json req = {{"obs", number_array(obs)},
              {"act", number_array(act)},
              {"next", number_array(next)}};
  if (!write_all(req.dump() + "\n")) {
    shutdown(true);
    return EvalOutcome::error(EvalErrorKind::kProtocol);
  }
  std::string line;
  try {
    line = read_line(std::chrono::steady_clock::now() + timeout_,
                     EvalErrorKind::kTimeout);
  } catch (const CallFailure& f) {
    shutdown(true);
    return EvalOutcome::error(f.kind);
  }

  json reply = json::parse(line, nullptr, false);
  if (reply.is_discarded()) {
    // JSON cannot spell inf/nan; a reply that tries is a non-finite
    // reward, anything else is a protocol violation.
    return EvalOutcome::error(looks_non_finite(line)
                                  ? EvalErrorKind::kNonFinite
                                  : EvalErrorKind::kProtocol);
  }
  if (!reply.is_object() || !reply.contains("reward") ||
      !reply["reward"].is_number())
    return EvalOutcome::error(EvalErrorKind::kProtocol);
  double value = reply["reward"].get<double>();
  if (!std::isfinite(value))
    return EvalOutcome::error(EvalErrorKind::kNonFinite);
  return EvalOutcome::value(value);
}

}  // namespace prof
