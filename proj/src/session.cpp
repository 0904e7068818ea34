#include "preassess/session.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>

#include "preassess/error.hpp"

namespace preassess {

Timestamp now_millis() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string format_timestamp(Timestamp t) {
  const std::time_t secs = static_cast<std::time_t>(t >= 0 ? t / 1000 : (t - 999) / 1000);
  const int millis = static_cast<int>(t - static_cast<Timestamp>(secs) * 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                tm.tm_hour, tm.tm_min, tm.tm_sec, millis);
  return buf;
}

Timestamp parse_timestamp(std::string_view text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0, ms = 0;
  char z = 0;
  const std::string str(text);
  if (text.size() != 24 ||
      std::sscanf(str.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%3d%c", &y, &mo, &d, &h, &mi, &s, &ms, &z) != 8 || z != 'Z') {
    throw Error(ErrorCode::ParseError, "bad timestamp '" + str + "'");
  }
  using namespace std::chrono;
  const auto days = sys_days(year{y} / month{static_cast<unsigned>(mo)} / day{static_cast<unsigned>(d)});
  const auto tp = days + hours{h} + minutes{mi} + seconds{s} + milliseconds{ms};
  return duration_cast<milliseconds>(tp.time_since_epoch()).count();
}

std::string_view to_string(SessionMode m) { return m == SessionMode::Prerequisite ? "prerequisite" : "direct"; }

SessionMode parse_mode(std::string_view text) {
  if (text == "prerequisite") return SessionMode::Prerequisite;
  if (text == "direct") return SessionMode::Direct;
  throw Error(ErrorCode::BadRequest, "mode must be 'prerequisite' or 'direct', got '" + std::string(text) + "'");
}

std::string_view to_string(SessionStatus s) { return s == SessionStatus::Active ? "active" : "complete"; }

bool AssessmentSession::is_queued(std::string_view leaf) const {
  return std::any_of(queue.begin(), queue.end(), [&](const QueuedLeaf& q) { return q.leaf == leaf; });
}

std::vector<NodeId> AssessmentSession::queued_parents() const {
  std::vector<NodeId> out;
  for (const auto& q : queue) {
    if (std::find(out.begin(), out.end(), q.parent) == out.end()) out.push_back(q.parent);
  }
  return out;
}

std::string AssessmentSession::performance_string(std::string_view parent) const {
  std::string out;
  for (const auto& q : queue) {
    if (q.parent != parent) continue;
    if (auto it = outcomes.find(q.leaf); it != outcomes.end()) out.push_back(it->second == Outcome::Pass ? 'P' : 'F');
  }
  return out;
}

AssessmentSession start_session(const KnowledgeGraph& g, std::string_view desired, SessionMode mode,
                                std::string id, Timestamp now) {
  if (!g.is_parent(desired)) {
    if (g.is_leaf(desired)) {
      throw Error(ErrorCode::NotAParent, "'" + std::string(desired) + "' is a leaf, not a parent concept");
    }
    throw Error(ErrorCode::UnknownNode, "unknown node '" + std::string(desired) + "'");
  }
  const auto parents =
      mode == SessionMode::Prerequisite ? g.prerequisites_of(desired) : std::vector<NodeId>{NodeId(desired)};
  std::vector<QueuedLeaf> queue;
  for (const auto& p : parents) {
    for (const auto& leaf : g.leaves_under(p)) queue.push_back({p, leaf});
  }
  return open_session(std::move(id), desired, mode, std::move(queue), now);
}

AssessmentSession open_session(std::string id, std::string_view desired, SessionMode mode,
                               std::vector<QueuedLeaf> queue, Timestamp now) {
  AssessmentSession s;
  s.id = std::move(id);
  s.desired = NodeId(desired);
  s.mode = mode;
  s.created_at = now;
  s.updated_at = now;
  for (std::size_t i = 0; i < queue.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (queue[i].leaf == queue[j].leaf) {
        throw Error(ErrorCode::ValidationError, "leaf '" + queue[i].leaf + "' queued twice");
      }
    }
  }
  s.queue = std::move(queue);
  s.status = s.queue.empty() ? SessionStatus::Complete : SessionStatus::Active;
  return s;
}

AssessmentSession record_outcome(const AssessmentSession& s, std::string_view leaf, Outcome outcome, Timestamp now) {
  if (s.status == SessionStatus::Complete) {
    throw Error(ErrorCode::SessionComplete, "session '" + s.id + "' is already complete");
  }
  if (!s.is_queued(leaf)) {
    throw Error(ErrorCode::LeafNotQueued, "leaf '" + std::string(leaf) + "' is not queued in session '" + s.id + "'");
  }
  if (auto it = s.outcomes.find(std::string(leaf)); it != s.outcomes.end()) {
    if (it->second == outcome) return s;
    throw Error(ErrorCode::AlreadyRecordedDifferently,
                "leaf '" + std::string(leaf) + "' was already recorded as " + std::string(to_string(it->second)));
  }
  AssessmentSession next = s;
  next.outcomes.emplace(std::string(leaf), outcome);
  next.updated_at = now;
  if (next.outcomes.size() == next.queue.size()) next.status = SessionStatus::Complete;
  return next;
}

QuizGrade grade_quiz(const KnowledgeGraph& g, std::string_view leaf, const std::vector<std::size_t>& answers) {
  const auto& quiz = g.quiz_for(leaf);
  if (quiz.empty()) throw Error(ErrorCode::NoQuizDefined, "leaf '" + std::string(leaf) + "' has no quiz");
  if (answers.size() != quiz.size()) {
    throw Error(ErrorCode::AnswerCountMismatch, "leaf '" + std::string(leaf) + "' has " +
                                                    std::to_string(quiz.size()) + " quiz items, got " +
                                                    std::to_string(answers.size()) + " answers");
  }
  QuizGrade grade{NodeId(leaf), answers, Outcome::Pass};
  for (std::size_t i = 0; i < quiz.size(); ++i) {
    if (answers[i] >= quiz[i].choices.size()) {
      throw Error(ErrorCode::IndexOutOfRange, "answer " + std::to_string(i) + " is out of range");
    }
    if (answers[i] != quiz[i].correct_index) grade.outcome = Outcome::Fail;
  }
  return grade;
}

Recommendation finalize(const KnowledgeGraph& g, const AssessmentSession& s) {
  if (s.status != SessionStatus::Complete) {
    throw Error(ErrorCode::SessionNotComplete, "session '" + s.id + "' still has unanswered leaves");
  }
  if (s.queue.empty()) return Progress{s.desired, false};

  std::vector<PerformanceEntry> pooled;
  for (const auto& q : s.queue) pooled.push_back({q.leaf, s.outcomes.at(q.leaf)});
  const PerformanceVector all(std::move(pooled));
  const Rational weight = fail_weight(all);

  if (weight == 0) {
    if (s.mode == SessionMode::Prerequisite) return Progress{s.desired, false};
    auto next = g.next_higher(s.desired);
    return Progress{next, !next.has_value()};
  }
  Relearn r;
  r.weight = weight;
  for (const auto& e : all.entries()) {
    if (e.outcome == Outcome::Fail) r.leaves.push_back(e.leaf);
  }
  for (const auto& parent : s.queued_parents()) {
    std::vector<PerformanceEntry> group;
    for (const auto& q : s.queue) {
      if (q.parent == parent) group.push_back({q.leaf, s.outcomes.at(q.leaf)});
    }
    r.per_parent.push_back({parent, fail_weight(PerformanceVector(std::move(group)))});
  }
  return r;
}

}  // namespace preassess
