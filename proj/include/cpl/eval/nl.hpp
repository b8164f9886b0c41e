#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpl/eval/fraction.hpp"
#include "cpl/llm/chat.hpp"
#include "cpl/run/event_log.hpp"

namespace cpl {

class ChatGateway;

enum class NlCategory { correctly_proven, gap, rejected_as_false };

std::string to_string(NlCategory c);
NlCategory nl_category_from_string(std::string_view s);

struct NlResponse {
  std::string id;  // "r01", "r02", ...
  std::size_t index = 0;
  std::string text;
  bool failed_fetch = false;
  std::string error;
};

struct NlGrade {
  std::string response_id;
  NlCategory category = NlCategory::gap;
  std::string grader;
  std::string note;
  std::string graded_at;
};

struct NlBreakdown {
  std::size_t responses = 0;
  std::size_t failed_fetches = 0;  // excluded from the rates
  std::map<NlCategory, std::size_t> counts;
  std::vector<std::string> pending;

  std::size_t graded() const;
  Fraction rate(NlCategory c) const { return {counts.count(c) ? counts.at(c) : 0, graded()}; }
  nlohmann::json to_json() const;
  std::string table() const;
};

/// A directory holding `nl_responses/` (raw texts plus a manifest) and the
/// append-only `grades.jsonl`. The newest grade for a response wins; older
/// lines stay as the audit trail.
class NlStore {
 public:
  explicit NlStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::vector<NlResponse> responses() const;
  std::vector<NlGrade> grade_history() const;
  std::map<std::string, NlGrade> current_grades() const;

  void add_response(const NlResponse& response);

  /// Throws ConfigError for an unknown id or a failed fetch.
  NlGrade grade(std::string_view response_id, NlCategory category, std::string grader, std::string note,
                std::string graded_at);

  NlBreakdown breakdown() const;

  /// Breakdown of a fully graded session. Throws InvariantError listing the
  /// ungraded ids otherwise.
  NlBreakdown finalize() const;

 private:
  std::filesystem::path dir_;
};

struct NlSessionOptions {
  std::size_t repetitions = 16;
  std::string statement_text;
  std::string system_prompt = PromptSet::defaults().nl_prover;
  Sampling sampling;
  std::string grader_name = "auto";
};

/// User content: the seed definitions followed by the statement.
std::string nl_user_content(std::string_view seed, std::string_view statement_text);

/// Sends the natural-language prompt `repetitions` times, storing every
/// response. A literal "False" is graded rejected_as_false on the spot.
std::vector<NlResponse> nl_session(std::string_view seed, NlStore& store, ChatGateway& gateway,
                                   const NlSessionOptions& options, EventSink& events);

}  // namespace cpl
