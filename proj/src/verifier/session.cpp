#include "cpl/verifier/session.hpp"

#include "cpl/verifier/lean_repl.hpp"
#include "cpl/verifier/scripted.hpp"

namespace cpl {

CheckResult VerifierSession::check_validity(std::string_view context, const TheoremStatement& stmt) {
  ++validity_calls_;
  return do_validity(context, stmt);
}

CheckResult VerifierSession::check_novelty(std::string_view context, const TheoremStatement& stmt) {
  ++novelty_calls_;
  return do_novelty(context, stmt);
}

CheckResult VerifierSession::verify_proof(std::string_view context, const TheoremStatement& stmt,
                                          const ProofScript& proof) {
  ++proof_calls_;
  return do_verify(context, stmt, proof);
}

std::optional<CheckResult> reject_before_submission(std::string_view proof_text) {
  if (auto why = ProofScript::violation(proof_text)) {
    return CheckResult::synthetic(Verdict::failed, "rejected before submission: " + *why);
  }
  return std::nullopt;
}

std::unique_ptr<VerifierSession> open_session(const VerifierSettings& settings,
                                              const std::string& seed_source) {
  if (settings.backend == VerifierSettings::Backend::lean) {
    return std::make_unique<LeanReplSession>(settings, seed_source);
  }
  ScriptedFixtures fixtures;
  fixtures.log_misses = settings.log_fixture_misses;
  if (!settings.fixtures.empty()) fixtures = ScriptedFixtures::load(settings.fixtures);
  return std::make_unique<ScriptedSession>(seed_source, std::move(fixtures));
}

SessionPool::SessionPool(const VerifierSettings& settings, const std::string& seed_source) {
  std::size_t n = std::max<std::size_t>(1, settings.pool_size);
  for (std::size_t i = 0; i < n; ++i) sessions_.push_back(open_session(settings, seed_source));
  busy_.assign(n, false);
}

SessionPool::SessionPool(std::vector<std::unique_ptr<VerifierSession>> sessions)
    : sessions_(std::move(sessions)), busy_(sessions_.size(), false) {
  if (sessions_.empty()) throw ConfigError("session pool needs at least one session");
}

SessionPool::Lease SessionPool::acquire() {
  std::unique_lock lock(mutex_);
  std::size_t index = 0;
  cv_.wait(lock, [&] {
    for (index = 0; index < busy_.size(); ++index) {
      if (!busy_[index]) return true;
    }
    return false;
  });
  busy_[index] = true;
  return Lease(*this, index);
}

void SessionPool::release(std::size_t index) {
  {
    std::lock_guard lock(mutex_);
    busy_[index] = false;
  }
  cv_.notify_one();
}

void SessionPool::set_warning_sink(const WarningSink& sink) {
  for (auto& s : sessions_) s->set_warning_sink(sink);
}

}  // namespace cpl
