/*
 * Copyright 2026 The BLIME Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <mutex>
#include <string>
#include <utility>

#include "blime/error.h"
#include "blime/predictor.h"
#include "json.hpp"

namespace blime {

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

constexpr size_t kMaxStderrTail = 4096;

void CloseFd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

// Child process with piped stdin/stdout/stderr.
class Subprocess {
 public:
  explicit Subprocess(const std::vector<std::string>& argv) {
    if (argv.empty()) throw ProtocolError("empty predictor command");
    // Writing to a dead child must surface as EPIPE, not kill us.
    ::signal(SIGPIPE, SIG_IGN);

    int in_pipe[2], out_pipe[2], err_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) != 0 || ::pipe2(out_pipe, O_CLOEXEC) != 0 ||
        ::pipe2(err_pipe, O_CLOEXEC) != 0) {
      throw ProtocolError(std::string("pipe failed: ") + std::strerror(errno));
    }
    std::vector<char*> args;
    for (const std::string& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);

    pid_ = ::fork();
    if (pid_ < 0) {
      throw ProtocolError(std::string("fork failed: ") + std::strerror(errno));
    }
    if (pid_ == 0) {
      ::dup2(in_pipe[0], STDIN_FILENO);
      ::dup2(out_pipe[1], STDOUT_FILENO);
      ::dup2(err_pipe[1], STDERR_FILENO);
      ::execvp(args[0], args.data());
      const std::string msg = "cannot execute '" + argv[0] +
                              "': " + std::strerror(errno) + "\n";
      [[maybe_unused]] ssize_t n = ::write(STDERR_FILENO, msg.data(), msg.size());
      ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    ::close(err_pipe[1]);
    stdin_fd_ = in_pipe[1];
    stdout_fd_ = out_pipe[0];
    stderr_fd_ = err_pipe[0];
    ::fcntl(stderr_fd_, F_SETFL, ::fcntl(stderr_fd_, F_GETFL) | O_NONBLOCK);
  }

  ~Subprocess() {
    CloseFd(stdin_fd_);
    if (pid_ > 0 && !reaped_) {
      // Give the child a moment to exit on EOF, then kill it.
      for (int i = 0; i < 50 && !TryReap(); ++i) ::usleep(10000);
      if (!reaped_) {
        ::kill(pid_, SIGKILL);
        int status = 0;
        ::waitpid(pid_, &status, 0);
      }
    }
    CloseFd(stdout_fd_);
    CloseFd(stderr_fd_);
  }

  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;

  void WriteLine(const std::string& line) {
    std::string data = line + "\n";
    size_t written = 0;
    while (written < data.size()) {
      ssize_t n = ::write(stdin_fd_, data.data() + written, data.size() - written);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Failure("cannot write to predictor: " +
                      std::string(std::strerror(errno)));
      }
      written += static_cast<size_t>(n);
    }
  }

  std::string ReadLine(std::chrono::milliseconds timeout) {
    const auto deadline = Clock::now() + timeout;
    while (true) {
      const size_t eol = buffer_.find('\n');
      if (eol != std::string::npos) {
        std::string line = buffer_.substr(0, eol);
        buffer_.erase(0, eol + 1);
        return line;
      }
      const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - Clock::now());
      if (remaining.count() <= 0) {
        throw Failure("predictor timed out after " +
                      std::to_string(timeout.count()) + " ms");
      }
      pollfd fds[2] = {{stdout_fd_, POLLIN, 0}, {stderr_fd_, POLLIN, 0}};
      const int ready = ::poll(fds, 2, static_cast<int>(remaining.count()));
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw Failure(std::string("poll failed: ") + std::strerror(errno));
      }
      if (fds[1].revents) DrainStderr();
      if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
        char chunk[65536];
        ssize_t n = ::read(stdout_fd_, chunk, sizeof(chunk));
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) throw Failure("predictor closed its output");
        buffer_.append(chunk, static_cast<size_t>(n));
      }
    }
  }

  // Builds a ProtocolError carrying exit status and captured stderr.
  ProtocolError Failure(const std::string& what) {
    DrainStderr();
    std::string message = what;
    if (!reaped_) {
      for (int i = 0; i < 20 && !TryReap(); ++i) ::usleep(5000);
    }
    if (reaped_) {
      if (WIFEXITED(status_)) {
        message += "; predictor exited with status " +
                   std::to_string(WEXITSTATUS(status_));
      } else if (WIFSIGNALED(status_)) {
        message += "; predictor killed by signal " +
                   std::to_string(WTERMSIG(status_));
      }
    }
    DrainStderr();
    if (!stderr_tail_.empty()) message += "; stderr: " + stderr_tail_;
    return ProtocolError(message);
  }

 private:
  bool TryReap() {
    if (reaped_) return true;
    const pid_t r = ::waitpid(pid_, &status_, WNOHANG);
    if (r == pid_) reaped_ = true;
    return reaped_;
  }

  void DrainStderr() {
    if (stderr_fd_ < 0) return;
    char chunk[4096];
    while (true) {
      ssize_t n = ::read(stderr_fd_, chunk, sizeof(chunk));
      if (n <= 0) break;
      stderr_tail_.append(chunk, static_cast<size_t>(n));
    }
    if (stderr_tail_.size() > kMaxStderrTail) {
      stderr_tail_.erase(0, stderr_tail_.size() - kMaxStderrTail);
    }
  }

  pid_t pid_ = -1;
  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
  int stderr_fd_ = -1;
  bool reaped_ = false;
  int status_ = 0;
  std::string buffer_;
  std::string stderr_tail_;
};

json InstanceToJson(const Instance& instance) {
  if (const auto* text = std::get_if<std::string>(&instance)) return *text;
  const Image& image = std::get<Image>(instance);
  json pixels = json::array();
  pixels.get_ref<json::array_t&>().reserve(image.pixels.size());
  for (uint8_t v : image.pixels) pixels.push_back(v / 255.0);
  return json{{"width", image.width},
              {"height", image.height},
              {"channels", image.channels},
              {"pixels", std::move(pixels)}};
}

}  // namespace

class ExternalPredictor::Impl {
 public:
  Impl(std::vector<std::string> argv, ExternalPredictorOptions options)
      : options_(options), process_(argv) {
    if (options_.chunk_size == 0) options_.chunk_size = 1;
    json reply = Exchange(json{{"type", "info"}});
    try {
      if (reply.at("type") != "info") {
        throw process_.Failure("handshake reply has type " +
                               reply.at("type").dump());
      }
      n_classes_ = reply.at("n_classes").get<int>();
      n_members_ = reply.at("n_members").get<int>();
      modality_ = ParseModality(reply.at("modality").get<std::string>());
    } catch (const json::exception& e) {
      throw process_.Failure(std::string("malformed handshake: ") + e.what());
    } catch (const InputError& e) {
      throw process_.Failure(std::string("malformed handshake: ") + e.what());
    }
    if (n_classes_ < 2 || n_members_ < 1) {
      throw process_.Failure("handshake reports n_classes=" +
                             std::to_string(n_classes_) + ", n_members=" +
                             std::to_string(n_members_));
    }
  }

  std::vector<ClassProbabilities> Predict(std::span<const Instance> instances,
                                          std::optional<int> member) {
    std::lock_guard<std::mutex> lock(mu_);
    std::vector<ClassProbabilities> out;
    out.reserve(instances.size());
    for (size_t start = 0; start < instances.size();
         start += options_.chunk_size) {
      const size_t end = std::min(instances.size(), start + options_.chunk_size);
      const int64_t id = next_id_++;
      json request{{"type", "predict"}, {"id", id}};
      request["member"] = member ? json(*member) : json(nullptr);
      json list = json::array();
      for (size_t i = start; i < end; ++i) {
        list.push_back(InstanceToJson(instances[i]));
      }
      request["instances"] = std::move(list);

      json reply = Exchange(request);
      try {
        if (reply.at("type") != "result") {
          throw process_.Failure("unexpected reply type " +
                                 reply.at("type").dump());
        }
        if (reply.at("id").get<int64_t>() != id) {
          throw process_.Failure("reply id " + reply.at("id").dump() +
                                 " does not match request id " +
                                 std::to_string(id));
        }
        const json& rows = reply.at("probabilities");
        if (!rows.is_array() || rows.size() != end - start) {
          throw process_.Failure("expected " + std::to_string(end - start) +
                                 " probability rows");
        }
        for (const json& row : rows) {
          ClassProbabilities probs;
          probs.values = row.get<std::vector<double>>();
          Validate(probs);
          out.push_back(std::move(probs));
        }
      } catch (const json::exception& e) {
        throw process_.Failure(std::string("malformed result: ") + e.what());
      }
    }
    return out;
  }

  Modality modality() const { return modality_; }
  int num_classes() const { return n_classes_; }
  int num_members() const { return n_members_; }

 private:
  json Exchange(const json& request) {
    process_.WriteLine(request.dump());
    const std::string line = process_.ReadLine(options_.timeout);
    json reply;
    try {
      reply = json::parse(line);
    } catch (const json::exception&) {
      throw process_.Failure("malformed JSON from predictor: " +
                             line.substr(0, 200));
    }
    if (!reply.is_object()) {
      throw process_.Failure("predictor reply is not a JSON object");
    }
    if (reply.value("type", "") == "error") {
      throw process_.Failure("predictor error: " +
                             reply.value("message", std::string("(no message)")));
    }
    return reply;
  }

  void Validate(const ClassProbabilities& probs) {
    if (probs.values.size() != static_cast<size_t>(n_classes_)) {
      throw process_.Failure("probability row has " +
                             std::to_string(probs.values.size()) +
                             " entries, expected " + std::to_string(n_classes_));
    }
    double sum = 0.0;
    for (double v : probs.values) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw process_.Failure("probability outside [0, 1]");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw process_.Failure("probabilities sum to " + std::to_string(sum));
    }
  }

  ExternalPredictorOptions options_;
  Subprocess process_;
  std::mutex mu_;
  int64_t next_id_ = 0;
  int n_classes_ = 0;
  int n_members_ = 0;
  Modality modality_ = Modality::kImage;
};

ExternalPredictor::ExternalPredictor(std::vector<std::string> argv,
                                     ExternalPredictorOptions options)
    : impl_(std::make_unique<Impl>(std::move(argv), options)) {}

ExternalPredictor::~ExternalPredictor() = default;

Modality ExternalPredictor::modality() const { return impl_->modality(); }
int ExternalPredictor::num_classes() const { return impl_->num_classes(); }
int ExternalPredictor::num_members() const { return impl_->num_members(); }

std::vector<ClassProbabilities> ExternalPredictor::Predict(
    std::span<const Instance> instances, std::optional<int> member) const {
  if (member && (*member < 0 || *member >= impl_->num_members())) {
    throw InputError("member index " + std::to_string(*member) +
                     " out of range");
  }
  return impl_->Predict(instances, member);
}

}  // namespace blime
