#include "cpl/llm/provider.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace cpl {

ReplayProvider::ReplayProvider(std::map<Role, std::vector<ReplayEntry>> queues)
    : queues_(std::move(queues)) {}

std::shared_ptr<ReplayProvider> ReplayProvider::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError("replay directory " + dir.string() + " does not exist");
  }
  std::map<Role, std::vector<ReplayEntry>> queues;
  for (auto role : kAllRoles) {
    auto path = dir / (to_string(role) + ".jsonl");
    std::ifstream in(path);
    if (!in) continue;
    // Later lines override earlier ones with the same index (a resumed
    // recording re-records the calls of the interrupted loop).
    std::map<std::size_t, ReplayEntry> indexed;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        auto j = nlohmann::json::parse(line);
        ReplayEntry e;
        if (j.contains("response")) e.response = j["response"].get<std::string>();
        if (j.contains("error")) e.error = j["error"].get<std::string>();
        if (!e.response && !e.error) throw ConfigError("entry has neither response nor error");
        std::size_t index = j.value("index", indexed.empty() ? std::size_t{0} : indexed.rbegin()->first + 1);
        indexed[index] = std::move(e);
      } catch (const std::exception& e) {
        throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    auto& q = queues[role];
    for (auto& [_, e] : indexed) q.push_back(std::move(e));
  }
  return std::make_shared<ReplayProvider>(std::move(queues));
}

std::string ReplayProvider::complete(const ChatRequest& request) {
  std::lock_guard lock(mutex_);
  auto& index = next_[request.role];
  const auto& q = queues_[request.role];
  if (index >= q.size()) {
    throw FixtureExhausted("replay fixtures exhausted for role " + to_string(request.role) +
                           " at call index " + std::to_string(index));
  }
  const auto& e = q[index++];
  if (e.error) throw RetriesExhausted("recorded failure: " + *e.error);
  return *e.response;
}

void ReplayProvider::fast_forward(const std::map<Role, std::size_t>& counts) {
  std::lock_guard lock(mutex_);
  for (const auto& [role, n] : counts) next_[role] = n;
}

std::size_t ReplayProvider::position(Role role) const {
  std::lock_guard lock(mutex_);
  auto it = next_.find(role);
  return it == next_.end() ? 0 : it->second;
}

std::string DryRunProvider::complete(const ChatRequest& request) {
  std::size_t n;
  {
    std::lock_guard lock(mutex_);
    n = calls_[request.role]++;
  }
  auto k = std::to_string(n);
  switch (request.role) {
    case Role::conjecturer:
      return "theorem dry_conjecture_" + k + " : (" + k + " : ℕ) + 0 = " + k + " := sorry";
    case Role::prover:
      return "by\n  exact dry_run_placeholder_" + k;
    case Role::simple_loop:
      return "theorem dry_simple_" + k + " : (" + k + " : ℕ) = " + k + " := by\n  exact dry_run_placeholder";
    case Role::nl_prover:
      return "False";
  }
  return "";
}

}  // namespace cpl
