#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cpl/llm/gateway.hpp"
#include "cpl/llm/provider.hpp"

namespace cpl::test {

inline std::filesystem::path fixture(const std::string& rel) {
  return std::filesystem::path(CPL_FIXTURE_DIR) / rel;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& s) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary | std::ios::trunc) << s;
}

inline std::vector<std::string> lines_of(const std::filesystem::path& p) {
  std::vector<std::string> out;
  std::ifstream in(p);
  for (std::string l; std::getline(in, l);) {
    if (!l.empty()) out.push_back(l);
  }
  return out;
}

class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("cpl-test-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

/// Provider driven by a callback; records every request it sees.
class FnProvider : public ChatProvider {
 public:
  using Fn = std::function<std::string(const ChatRequest&, std::size_t call)>;
  explicit FnProvider(Fn fn, bool remote = false) : fn_(std::move(fn)), remote_(remote) {}
  std::string name() const override { return "fn"; }
  bool remote() const override { return remote_; }
  std::string complete(const ChatRequest& r) override {
    std::size_t call;
    {
      std::lock_guard lock(mutex_);
      requests.push_back(r);
      call = calls_++;
    }
    return fn_(r, call);
  }
  std::vector<ChatRequest> requests;

 private:
  Fn fn_;
  bool remote_;
  std::size_t calls_ = 0;
  std::mutex mutex_;
};

inline std::shared_ptr<ReplayProvider> replay(std::map<Role, std::vector<std::string>> responses) {
  std::map<Role, std::vector<ReplayEntry>> q;
  for (auto& [role, rs] : responses) {
    for (auto& r : rs) q[role].push_back({r, std::nullopt});
  }
  return std::make_shared<ReplayProvider>(std::move(q));
}

inline ChatGateway::Options quiet_options() {
  ChatGateway::Options o;
  o.sleep = [](std::chrono::milliseconds) {};
  return o;
}

}  // namespace cpl::test
