#include "cpl/verifier/lean_repl.hpp"

#include <algorithm>

#include "cpl/core/text.hpp"

namespace cpl {

namespace repl {

std::string encode_request(std::string_view cmd, std::optional<int> env) {
  nlohmann::json j{{"cmd", cmd}};
  if (env) j["env"] = *env;
  return j.dump() + "\n\n";
}

std::optional<std::size_t> frame_object(std::string_view buffer) {
  std::size_t i = 0;
  while (i < buffer.size() && text::is_space(buffer[i])) ++i;
  if (i == buffer.size()) return std::nullopt;
  int depth = 0;
  bool in_string = false;
  for (; i < buffer.size(); ++i) {
    char c = buffer[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{' || c == '[') {
      ++depth;
    } else if (c == '}' || c == ']') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::nullopt;
}

namespace {

Position read_pos(const nlohmann::json& j) {
  if (!j.is_object()) return {};
  return {j.value("line", 1), j.value("column", 0)};
}

}  // namespace

Response decode_response(const nlohmann::json& j) {
  Response r;
  if (j.contains("env") && j["env"].is_number_integer()) r.env = j["env"].get<int>();
  if (j.contains("message") && j["message"].is_string()) r.repl_error = j["message"].get<std::string>();
  if (j.contains("messages") && j["messages"].is_array()) {
    for (const auto& m : j["messages"]) {
      Diagnostic d;
      try {
        d.severity = severity_from_string(m.value("severity", "error"));
      } catch (const InvariantError&) {
        d.severity = Severity::error;
      }
      d.position = read_pos(m.value("pos", nlohmann::json::object()));
      d.message = m.value("data", "");
      r.messages.push_back(std::move(d));
    }
  }
  if (j.contains("sorries") && j["sorries"].is_array()) {
    for (const auto& s : j["sorries"]) r.sorries.push_back(read_pos(s.value("pos", nlohmann::json::object())));
  }
  return r;
}

std::vector<Diagnostic> rebase(const std::vector<Diagnostic>& messages, int first_line) {
  std::vector<Diagnostic> out;
  std::vector<std::string> context_errors;
  for (const auto& m : messages) {
    if (m.position.line >= first_line) {
      Diagnostic d = m;
      d.position.line = m.position.line - first_line + 1;
      out.push_back(std::move(d));
    } else if (m.severity == Severity::error) {
      context_errors.push_back(m.message);
    }
  }
  if (!context_errors.empty()) {
    std::string msg = "error in context (before the submitted snippet): " + context_errors.front();
    if (context_errors.size() > 1) msg += " (+" + std::to_string(context_errors.size() - 1) + " more)";
    out.insert(out.begin(), Diagnostic{Severity::error, {1, 0}, std::move(msg)});
  }
  return out;
}

std::optional<std::string> closing_term(const std::vector<Diagnostic>& messages) {
  constexpr std::string_view kTry = "Try this:";
  for (const auto& m : messages) {
    auto pos = m.message.find(kTry);
    if (pos == std::string::npos) continue;
    std::string_view term = text::trim(std::string_view(m.message).substr(pos + kTry.size()));
    if (term.starts_with("exact ")) term = text::trim(term.substr(6));
    return std::string(term);
  }
  return std::nullopt;
}

}  // namespace repl

LeanReplSession::LeanReplSession(VerifierSettings settings, std::string seed)
    : VerifierSession(std::move(seed)), settings_(std::move(settings)) {
  start();
}

void LeanReplSession::start() {
  process_ = std::make_unique<Subprocess>(settings_.command, settings_.project_dir);
  bool timed_out = false;
  auto response = exchange(repl::encode_request(seed_source(), std::nullopt), settings_.open_timeout, timed_out);
  if (timed_out) {
    process_.reset();
    throw TransportError("verifier timed out elaborating the seed");
  }
  std::vector<Diagnostic> errors;
  for (const auto& m : response.messages) {
    if (m.severity == Severity::error) errors.push_back(m);
  }
  if (response.repl_error) errors.push_back({Severity::error, {1, 0}, *response.repl_error});
  if (!errors.empty() || !response.env) {
    process_.reset();
    if (errors.empty()) errors.push_back({Severity::error, {1, 0}, "verifier returned no environment"});
    throw SessionStartupError("seed does not elaborate: " + errors.front().message, errors);
  }
  base_env_ = *response.env;
}

repl::Response LeanReplSession::exchange(const std::string& request, std::chrono::milliseconds timeout,
                                         bool& timed_out) {
  timed_out = false;
  process_->write_all(request);
  std::string buffer;
  auto status = process_->read_until(
      buffer, [](const std::string& b) { return repl::frame_object(b).has_value(); },
      Subprocess::Clock::now() + timeout);
  if (status == Subprocess::ReadStatus::timeout) {
    timed_out = true;
    process_.reset();
    return {};
  }
  if (status == Subprocess::ReadStatus::eof) {
    process_.reset();
    throw TransportError("verifier process exited unexpectedly");
  }
  auto end = *repl::frame_object(buffer);
  try {
    return repl::decode_response(nlohmann::json::parse(buffer.substr(0, end)));
  } catch (const nlohmann::json::exception& e) {
    process_.reset();
    throw TransportError(std::string("malformed verifier response: ") + e.what());
  }
}

LeanReplSession::Outcome LeanReplSession::run(std::string_view context, const std::string& snippet,
                                              std::chrono::milliseconds timeout) {
  std::lock_guard lock(mutex_);
  if (!context.starts_with(seed_source())) {
    throw InvariantError("verifier context does not begin with the session seed");
  }
  if (!process_) start();

  std::string rest(context.substr(seed_source().size()));
  std::string cmd;
  if (!text::trim(rest).empty()) {
    cmd = rest;
    if (cmd.back() != '\n') cmd.push_back('\n');
    cmd.push_back('\n');
  }
  int first_line = 1 + static_cast<int>(std::count(cmd.begin(), cmd.end(), '\n'));
  cmd += snippet;
  cmd.push_back('\n');

  auto started = Subprocess::Clock::now();
  bool timed_out = false;
  auto response = exchange(repl::encode_request(cmd, base_env_), timeout, timed_out);
  Outcome out;
  out.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(Subprocess::Clock::now() - started);
  if (timed_out) {
    out.timed_out = true;
    warn("verifier command timed out after " + std::to_string(timeout.count()) + " ms; restarting");
    return out;
  }
  out.diagnostics = repl::rebase(response.messages, first_line);
  if (response.repl_error) out.diagnostics.push_back({Severity::error, {1, 0}, *response.repl_error});
  for (const auto& s : response.sorries) {
    if (s.line >= first_line) ++out.snippet_sorries;
  }
  return out;
}

namespace {

bool any_error(const std::vector<Diagnostic>& ds) {
  return std::any_of(ds.begin(), ds.end(), [](const Diagnostic& d) { return d.severity == Severity::error; });
}

}  // namespace

CheckResult LeanReplSession::do_validity(std::string_view context, const TheoremStatement& stmt) {
  auto out = run(context, stmt.source_text(), settings_.command_timeout);
  if (out.timed_out) return CheckResult::synthetic(Verdict::invalid, "timeout: validity check exceeded its limit");
  CheckResult r;
  r.diagnostics = std::move(out.diagnostics);
  r.verdict = any_error(r.diagnostics) ? Verdict::invalid : Verdict::valid;
  r.elapsed = out.elapsed;
  return r;
}

CheckResult LeanReplSession::do_novelty(std::string_view context, const TheoremStatement& stmt) {
  auto out = run(context, stmt.as_example("by exact?"), settings_.novelty_timeout);
  CheckResult r;
  r.elapsed = out.elapsed;
  if (out.timed_out) {
    r.verdict = Verdict::novel;
    r.diagnostics.push_back({Severity::warning, {1, 0}, "timeout: exact? did not finish; treated as novel"});
    return r;
  }
  r.diagnostics = std::move(out.diagnostics);
  if (any_error(r.diagnostics)) {
    r.verdict = Verdict::novel;
  } else {
    r.verdict = Verdict::known;
    r.closing_term = repl::closing_term(r.diagnostics).value_or("");
  }
  return r;
}

CheckResult LeanReplSession::do_verify(std::string_view context, const TheoremStatement& stmt,
                                       const ProofScript& proof) {
  auto out = run(context, stmt.with_proof(proof.text()), settings_.command_timeout);
  if (out.timed_out) return CheckResult::synthetic(Verdict::failed, "timeout: proof check exceeded its limit");
  CheckResult r;
  r.elapsed = out.elapsed;
  r.diagnostics = std::move(out.diagnostics);
  bool uses_sorry = out.snippet_sorries > 0 ||
                    std::any_of(r.diagnostics.begin(), r.diagnostics.end(), [](const Diagnostic& d) {
                      return d.message.find("declaration uses 'sorry'") != std::string::npos;
                    });
  if (uses_sorry && !any_error(r.diagnostics)) {
    r.diagnostics.push_back({Severity::error, {1, 0}, "proof leaves goals closed by sorry"});
  }
  r.verdict = any_error(r.diagnostics) ? Verdict::failed : Verdict::verified;
  return r;
}

}  // namespace cpl
