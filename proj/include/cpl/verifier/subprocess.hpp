#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <sys/types.h>

namespace cpl {

/// A child process with piped stdin/stdout. stderr is discarded. The child
/// is killed when the object is destroyed.
class Subprocess {
 public:
  using Clock = std::chrono::steady_clock;

  /// Throws TransportError if the program cannot be started.
  Subprocess(const std::vector<std::string>& argv, const std::filesystem::path& cwd = {});
  ~Subprocess();

  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;

  /// Throws TransportError when the child has closed its stdin.
  void write_all(std::string_view data);

  enum class ReadStatus { done, timeout, eof };

  /// Appends stdout bytes to `buffer` until `done(buffer)` holds, the
  /// deadline passes, or the child closes stdout.
  ReadStatus read_until(std::string& buffer, const std::function<bool(const std::string&)>& done,
                        Clock::time_point deadline);

  void kill();
  bool running() const { return pid_ > 0; }

 private:
  pid_t pid_ = -1;
  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
};

}  // namespace cpl
