#include "cpl/verifier/subprocess.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "cpl/error.hpp"

namespace cpl {

namespace {

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

}  // namespace

Subprocess::Subprocess(const std::vector<std::string>& argv, const std::filesystem::path& cwd) {
  if (argv.empty()) throw TransportError("empty verifier command");
  std::signal(SIGPIPE, SIG_IGN);

  int in_pipe[2];
  int out_pipe[2];
  int err_pipe[2];  // reports exec failure back to the parent
  if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0 || ::pipe2(err_pipe, O_CLOEXEC) != 0) {
    throw TransportError(std::string("pipe: ") + std::strerror(errno));
  }

  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  pid_ = ::fork();
  if (pid_ < 0) throw TransportError(std::string("fork: ") + std::strerror(errno));
  if (pid_ == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    int devnull = ::open("/dev/null", O_WRONLY);
    if (devnull >= 0) ::dup2(devnull, STDERR_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    ::close(err_pipe[0]);
    if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) {
      int err = errno;
      (void)!::write(err_pipe[1], &err, sizeof err);
      ::_exit(127);
    }
    ::execvp(args[0], args.data());
    int err = errno;
    (void)!::write(err_pipe[1], &err, sizeof err);
    ::_exit(127);
  }

  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);
  stdin_fd_ = in_pipe[1];
  stdout_fd_ = out_pipe[0];

  int child_errno = 0;
  ssize_t n = ::read(err_pipe[0], &child_errno, sizeof child_errno);
  ::close(err_pipe[0]);
  if (n == sizeof child_errno) {
    kill();
    throw TransportError("cannot start '" + argv.front() + "': " + std::strerror(child_errno));
  }
}

Subprocess::~Subprocess() { kill(); }

void Subprocess::write_all(std::string_view data) {
  while (!data.empty()) {
    ssize_t n = ::write(stdin_fd_, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(std::string("write to verifier: ") + std::strerror(errno));
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

Subprocess::ReadStatus Subprocess::read_until(std::string& buffer,
                                              const std::function<bool(const std::string&)>& done,
                                              Clock::time_point deadline) {
  char chunk[65536];
  while (!done(buffer)) {
    auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (remaining.count() <= 0) return ReadStatus::timeout;
    pollfd pfd{stdout_fd_, POLLIN, 0};
    int rc = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(remaining.count(), 1000)));
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw TransportError(std::string("poll: ") + std::strerror(errno));
    }
    if (rc == 0) continue;
    ssize_t n = ::read(stdout_fd_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(std::string("read from verifier: ") + std::strerror(errno));
    }
    if (n == 0) return ReadStatus::eof;
    buffer.append(chunk, static_cast<std::size_t>(n));
  }
  return ReadStatus::done;
}

void Subprocess::kill() {
  close_fd(stdin_fd_);
  close_fd(stdout_fd_);
  if (pid_ > 0) {
    ::kill(pid_, SIGKILL);
    int status = 0;
    while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
    }
    pid_ = -1;
  }
}

}  // namespace cpl
