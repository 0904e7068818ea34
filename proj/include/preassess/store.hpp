#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "preassess/infotheory.hpp"
#include "preassess/json_io.hpp"
#include "preassess/probability.hpp"
#include "preassess/session.hpp"

namespace preassess {

/// Whole-file helpers. Throw StorageFailure.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

/// RFC 4180 reader: comma separated, optional double-quoted fields, LF or
/// CRLF line ends, blank lines skipped. Each row keeps its 1-based line.
struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};
std::vector<CsvRow> parse_csv(std::string_view text);
/// Quotes a field only when it holds a comma, quote or line break.
std::string csv_field(std::string_view field);

/// Header `parent,leaf,pass,fail`; counts are non-negative integers.
/// Throws ParseError ("line L, column C: reason"), DuplicateRow.
AggregateCounts parse_counts_csv(std::string_view text);
std::string serialize_counts_csv(const AggregateCounts& counts);

/// Attribute columns followed by a final `Outcome` column of Pass/Fail.
/// Throws ParseError, UnknownLabel, EmptyDataset.
EpisodeDataset parse_episodes_csv(std::string_view text);
std::string serialize_episodes_csv(const EpisodeDataset& d);

enum class EventKind { Created, OutcomeRecorded, Finalized };

std::string_view to_string(EventKind k);

struct SessionEvent {
  std::string session_id;
  std::int64_t seq = 0;
  EventKind kind = EventKind::Created;
  Json payload;
  Timestamp at = 0;

  bool operator==(const SessionEvent&) const = default;
};

/// One compact JSON object, no trailing newline.
std::string event_to_line(const SessionEvent& e);
/// Throws ParseError.
SessionEvent event_from_line(std::string_view line);

SessionEvent created_event(const AssessmentSession& s);
SessionEvent outcome_event(const std::string& session_id, std::int64_t seq, std::string_view leaf, Outcome outcome,
                           Timestamp at);
SessionEvent finalized_event(const std::string& session_id, std::int64_t seq, const Recommendation& r, Timestamp at);

/// Folds one event into the session map through the session transitions.
/// Throws CorruptLog when the event cannot apply.
void apply_event(std::map<std::string, AssessmentSession>& sessions, const SessionEvent& e);

struct ReplayResult {
  std::map<std::string, AssessmentSession> sessions;
  std::vector<std::string> warnings;
  /// Byte length of the well-formed prefix of the log.
  std::size_t valid_bytes = 0;
  std::map<std::string, std::int64_t> last_seq;
  std::map<std::pair<std::string, std::int64_t>, std::string> event_lines;
};

/// Replays newline-delimited events. A torn final line (no trailing
/// newline, not parseable) is dropped with a warning; duplicate (id, seq)
/// lines with identical content are skipped. Throws CorruptLog otherwise.
ReplayResult replay_log(std::string_view text);

/// Replays a log file; a missing file is an empty log.
std::map<std::string, AssessmentSession> load_sessions(const std::string& path,
                                                       std::vector<std::string>* warnings = nullptr);

enum class AppendStatus { Appended, Duplicate };

/// Append-only session event log backed by one file. Holds an exclusive
/// advisory lock for its lifetime; a second writer fails with
/// StorageFailure. Appends are fsync'ed before returning.
class EventLog {
 public:
  /// Opens or creates the file, replays it, and truncates a torn tail.
  explicit EventLog(std::string path);
  ~EventLog();
  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;

  /// Throws SequenceGap (seq != last + 1, or a conflicting duplicate),
  /// StorageFailure.
  AppendStatus append(const SessionEvent& e);

  const std::map<std::string, AssessmentSession>& sessions() const { return replay_.sessions; }
  const std::vector<std::string>& warnings() const { return replay_.warnings; }
  std::int64_t last_seq(const std::string& session_id) const;
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  int fd_ = -1;
  ReplayResult replay_;
};

}  // namespace preassess
