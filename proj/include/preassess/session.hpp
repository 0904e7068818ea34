#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "preassess/graph.hpp"
#include "preassess/probability.hpp"

namespace preassess {

/// Milliseconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

Timestamp now_millis();
/// "2026-10-16T08:30:00.125Z"
std::string format_timestamp(Timestamp t);
/// Inverse of format_timestamp. Throws ParseError.
Timestamp parse_timestamp(std::string_view text);

enum class SessionMode {
  /// Assess the leaves of every transitive prerequisite of the desired concept.
  Prerequisite,
  /// Assess the desired concept's own leaves.
  Direct,
};

std::string_view to_string(SessionMode m);
/// "prerequisite" or "direct". Throws BadRequest.
SessionMode parse_mode(std::string_view text);

enum class SessionStatus { Active, Complete };

std::string_view to_string(SessionStatus s);

struct QueuedLeaf {
  NodeId parent;
  NodeId leaf;

  bool operator==(const QueuedLeaf&) const = default;
};

struct AssessmentSession {
  std::string id;
  NodeId desired;
  SessionMode mode = SessionMode::Prerequisite;
  std::vector<QueuedLeaf> queue;
  std::map<NodeId, Outcome> outcomes;
  SessionStatus status = SessionStatus::Active;
  Timestamp created_at = 0;
  Timestamp updated_at = 0;

  bool is_queued(std::string_view leaf) const;
  /// Parents of the queue in queue order, without repeats.
  std::vector<NodeId> queued_parents() const;
  /// Answered outcomes of one parent's leaves as a P/F string, in queue order.
  std::string performance_string(std::string_view parent) const;

  bool operator==(const AssessmentSession&) const = default;
};

/// Opens a session. Prerequisite mode queues the leaves of every
/// prerequisites_of(desired) parent, parent-major; direct mode queues the
/// desired concept's leaves. An empty queue yields a complete session.
/// Throws UnknownNode, NotAParent.
AssessmentSession start_session(const KnowledgeGraph& g, std::string_view desired, SessionMode mode,
                                std::string id, Timestamp now);

/// Opens a session over an explicit queue; start_session and event replay
/// both go through here. Throws ValidationError on a repeated leaf.
AssessmentSession open_session(std::string id, std::string_view desired, SessionMode mode,
                               std::vector<QueuedLeaf> queue, Timestamp now);

/// Returns the session with the outcome stored. Re-recording the identical
/// outcome returns the session unchanged.
/// Throws SessionComplete, LeafNotQueued, AlreadyRecordedDifferently.
AssessmentSession record_outcome(const AssessmentSession& s, std::string_view leaf, Outcome outcome, Timestamp now);

struct QuizGrade {
  NodeId leaf;
  std::vector<std::size_t> answers;
  Outcome outcome = Outcome::Fail;

  bool operator==(const QuizGrade&) const = default;
};

/// Pass iff every answer matches its item's correct index.
/// Throws UnknownNode, NoQuizDefined, AnswerCountMismatch, IndexOutOfRange.
QuizGrade grade_quiz(const KnowledgeGraph& g, std::string_view leaf, const std::vector<std::size_t>& answers);

/// Pools every queued outcome into one fail weight. Zero means Progress
/// (to the desired concept in prerequisite mode, to its progression
/// successor in direct mode); otherwise Relearn with the pooled weight plus
/// one weight per assessed parent. Throws SessionNotComplete.
Recommendation finalize(const KnowledgeGraph& g, const AssessmentSession& s);

}  // namespace preassess
