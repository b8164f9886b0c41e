#include "cpl/eval/nl.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cpl/core/text.hpp"
#include "cpl/error.hpp"
#include "cpl/llm/gateway.hpp"

namespace cpl {

namespace fs = std::filesystem;

std::string to_string(NlCategory c) {
  switch (c) {
    case NlCategory::correctly_proven:
      return "correctly_proven";
    case NlCategory::gap:
      return "gap";
    case NlCategory::rejected_as_false:
      return "rejected_as_false";
  }
  return "gap";
}

NlCategory nl_category_from_string(std::string_view s) {
  for (auto c : {NlCategory::correctly_proven, NlCategory::gap, NlCategory::rejected_as_false}) {
    if (to_string(c) == s) return c;
  }
  if (s == "correct") return NlCategory::correctly_proven;
  if (s == "false" || s == "rejected") return NlCategory::rejected_as_false;
  throw ConfigError("unknown grade '" + std::string(s) + "' (expected correctly_proven|gap|rejected_as_false)");
}

std::size_t NlBreakdown::graded() const {
  std::size_t n = 0;
  for (const auto& [c, k] : counts) n += k;
  return n;
}

nlohmann::json NlBreakdown::to_json() const {
  nlohmann::json j{{"responses", responses}, {"failed_fetches", failed_fetches}, {"graded", graded()},
                   {"pending", pending}};
  for (auto c : {NlCategory::correctly_proven, NlCategory::gap, NlCategory::rejected_as_false}) {
    auto r = rate(c);
    j[to_string(c)] = {{"count", r.numerator}, {"rate", r.exact()}, {"percent", r.percent()}};
  }
  return j;
}

std::string NlBreakdown::table() const {
  std::ostringstream out;
  out << "category            count  rate\n";
  for (auto c : {NlCategory::correctly_proven, NlCategory::gap, NlCategory::rejected_as_false}) {
    auto r = rate(c);
    auto name = to_string(c);
    out << name << std::string(20 - name.size(), ' ') << r.numerator << std::string(7 - std::to_string(r.numerator).size(), ' ')
        << r.exact() << " (" << r.percent() << ")\n";
  }
  if (failed_fetches) out << "failed fetches (excluded): " << failed_fetches << '\n';
  if (!pending.empty()) out << "pending: " << pending.size() << '\n';
  return out.str();
}

NlStore::NlStore(fs::path dir) : dir_(std::move(dir)) {}

namespace {

fs::path responses_dir(const fs::path& d) { return d / "nl_responses"; }
fs::path manifest_path(const fs::path& d) { return responses_dir(d) / "manifest.jsonl"; }
fs::path grades_path(const fs::path& d) { return d / "grades.jsonl"; }

std::vector<nlohmann::json> read_jsonl(const fs::path& path) {
  std::vector<nlohmann::json> out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (!text::trim(line).empty()) out.push_back(nlohmann::json::parse(line));
  }
  return out;
}

void append_jsonl(const fs::path& path, const nlohmann::json& j) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::app | std::ios::binary);
  out << j.dump() << '\n';
  if (!out.flush()) throw FatalError("cannot write " + path.string());
}

}  // namespace

std::vector<NlResponse> NlStore::responses() const {
  std::vector<NlResponse> out;
  if (!fs::exists(manifest_path(dir_))) return out;
  for (const auto& j : read_jsonl(manifest_path(dir_))) {
    NlResponse r;
    r.id = j.at("id").get<std::string>();
    r.index = j.at("index").get<std::size_t>();
    r.failed_fetch = j.value("failed_fetch", false);
    r.error = j.value("error", "");
    std::ifstream in(responses_dir(dir_) / (r.id + ".txt"), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    r.text = ss.str();
    out.push_back(std::move(r));
  }
  return out;
}

void NlStore::add_response(const NlResponse& r) {
  fs::create_directories(responses_dir(dir_));
  {
    std::ofstream out(responses_dir(dir_) / (r.id + ".txt"), std::ios::binary | std::ios::trunc);
    out << r.text;
  }
  nlohmann::json j{{"id", r.id}, {"index", r.index}, {"failed_fetch", r.failed_fetch}};
  if (r.failed_fetch) j["error"] = r.error;
  append_jsonl(manifest_path(dir_), j);
}

std::vector<NlGrade> NlStore::grade_history() const {
  std::vector<NlGrade> out;
  if (!fs::exists(grades_path(dir_))) return out;
  for (const auto& j : read_jsonl(grades_path(dir_))) {
    out.push_back({j.at("response_id").get<std::string>(),
                   nl_category_from_string(j.at("category").get<std::string>()), j.value("grader", ""),
                   j.value("note", ""), j.value("graded_at", "")});
  }
  return out;
}

std::map<std::string, NlGrade> NlStore::current_grades() const {
  std::map<std::string, NlGrade> out;
  for (auto& g : grade_history()) out[g.response_id] = g;
  return out;
}

NlGrade NlStore::grade(std::string_view response_id, NlCategory category, std::string grader, std::string note,
                       std::string graded_at) {
  auto all = responses();
  auto it = std::find_if(all.begin(), all.end(), [&](const auto& r) { return r.id == response_id; });
  if (it == all.end()) throw ConfigError("unknown response id '" + std::string(response_id) + "'");
  if (it->failed_fetch) throw ConfigError("response " + it->id + " is a failed fetch and cannot be graded");
  NlGrade g{it->id, category, std::move(grader), std::move(note), std::move(graded_at)};
  nlohmann::json j{{"response_id", g.response_id}, {"category", to_string(category)}, {"grader", g.grader},
                   {"note", g.note}, {"graded_at", g.graded_at}};
  auto previous = current_grades();
  if (auto p = previous.find(g.response_id); p != previous.end()) j["supersedes"] = to_string(p->second.category);
  append_jsonl(grades_path(dir_), j);
  return g;
}

NlBreakdown NlStore::breakdown() const {
  NlBreakdown b;
  auto grades = current_grades();
  for (const auto& r : responses()) {
    ++b.responses;
    if (r.failed_fetch) {
      ++b.failed_fetches;
      continue;
    }
    auto g = grades.find(r.id);
    if (g == grades.end()) {
      b.pending.push_back(r.id);
    } else {
      ++b.counts[g->second.category];
    }
  }
  return b;
}

NlBreakdown NlStore::finalize() const {
  auto b = breakdown();
  if (!b.pending.empty()) {
    std::string ids;
    for (const auto& id : b.pending) ids += (ids.empty() ? "" : ", ") + id;
    throw InvariantError("cannot finalize: ungraded responses: " + ids);
  }
  return b;
}

std::string nl_user_content(std::string_view seed, std::string_view statement_text) {
  std::string out(seed);
  if (!out.empty() && out.back() != '\n') out += '\n';
  out += '\n';
  out += statement_text;
  return out;
}

std::vector<NlResponse> nl_session(std::string_view seed, NlStore& store, ChatGateway& gateway,
                                   const NlSessionOptions& options, EventSink& events) {
  if (options.repetitions == 0) throw ConfigError("repetitions must be positive");
  auto user = nl_user_content(seed, options.statement_text);
  std::size_t first = store.responses().size();
  std::vector<NlResponse> out;
  for (std::size_t k = 0; k < options.repetitions; ++k) {
    NlResponse r;
    r.index = first + k + 1;
    char id[16];
    std::snprintf(id, sizeof id, "r%02zu", r.index);
    r.id = id;
    try {
      r.text = gateway.complete({Role::nl_prover, options.system_prompt, user, options.sampling}).text;
    } catch (const FatalError&) {
      throw;
    } catch (const TransportError& e) {
      r.failed_fetch = true;
      r.error = e.what();
    }
    store.add_response(r);
    bool literal_false = !r.failed_fetch && text::trim(r.text) == "False";
    if (literal_false) {
      store.grade(r.id, NlCategory::rejected_as_false, options.grader_name, "literal False response",
                  events.next_timestamp());
    }
    nlohmann::json payload{{"id", r.id}, {"failed_fetch", r.failed_fetch},
                           {"grade", literal_false ? "rejected_as_false" : r.failed_fetch ? "none" : "pending"}};
    if (r.failed_fetch) payload["error"] = r.error;
    events.emit(EventKind::nl_response, payload);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace cpl
