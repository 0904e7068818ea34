#include "preassess/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "preassess/error.hpp"

namespace preassess {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::StorageFailure, "cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::StorageFailure, "cannot write '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::StorageFailure, "short write to '" + path + "'");
}

// ---------------------------------------------------------------- CSV

namespace {

[[noreturn]] void csv_error(std::size_t line, std::size_t column, const std::string& reason) {
  throw Error(ErrorCode::ParseError,
              "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + reason);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::vector<CsvRow> parse_csv(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  std::size_t line = 1;
  row.line = 1;
  bool quoted = false;
  bool field_was_quoted = false;
  bool any_content = false;

  auto end_field = [&] {
    row.fields.push_back(field_was_quoted ? field : trim(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_row = [&] {
    end_field();
    const bool blank = row.fields.size() == 1 && row.fields[0].empty() && !any_content;
    if (!blank) rows.push_back(std::move(row));
    row = CsvRow{};
    any_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!trim(field).empty()) csv_error(line, row.fields.size() + 1, "quote inside unquoted field");
        field.clear();
        quoted = true;
        field_was_quoted = true;
        any_content = true;
        break;
      case ',':
        any_content = true;
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        field.push_back(c);
        break;
      case '\n':
        end_row();
        row.line = ++line;
        break;
      default:
        if (field_was_quoted) csv_error(line, row.fields.size() + 1, "text after closing quote");
        if (c != ' ' && c != '\t') any_content = true;
        field.push_back(c);
    }
  }
  if (quoted) csv_error(line, row.fields.size() + 1, "unterminated quoted field");
  if (!field.empty() || !row.fields.empty() || field_was_quoted) end_row();
  return rows;
}

std::string csv_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

AggregateCounts parse_counts_csv(std::string_view text) {
  const auto rows = parse_csv(text);
  if (rows.empty()) csv_error(1, 1, "missing header");
  const std::vector<std::string> header{"parent", "leaf", "pass", "fail"};
  if (rows[0].fields != header) csv_error(rows[0].line, 1, "header must be exactly 'parent,leaf,pass,fail'");

  AggregateCounts counts;
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != 4) {
      csv_error(row.line, std::min<std::size_t>(row.fields.size(), 4) + (row.fields.size() < 4 ? 1 : 0),
                "expected 4 fields, got " + std::to_string(row.fields.size()));
    }
    CountRow c;
    c.parent = row.fields[0];
    c.leaf = row.fields[1];
    if (c.parent.empty()) csv_error(row.line, 1, "empty parent");
    if (c.leaf.empty()) csv_error(row.line, 2, "empty leaf");
    for (int k = 0; k < 2; ++k) {
      const auto& f = row.fields[static_cast<std::size_t>(2 + k)];
      std::int64_t v = -1;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || ec != std::errc{} || ptr != f.data() + f.size() || v < 0) {
        csv_error(row.line, static_cast<std::size_t>(3 + k), "count must be a non-negative integer, got '" + f + "'");
      }
      (k == 0 ? c.pass_count : c.fail_count) = v;
    }
    if (!seen.insert({c.parent, c.leaf}).second) {
      throw Error(ErrorCode::DuplicateRow, "line " + std::to_string(row.line) + ": duplicate row (" + c.parent +
                                               ", " + c.leaf + ")");
    }
    counts.rows.push_back(std::move(c));
  }
  return counts;
}

std::string serialize_counts_csv(const AggregateCounts& counts) {
  std::string out = "parent,leaf,pass,fail\n";
  for (const auto& r : counts.rows) {
    out += csv_field(r.parent) + "," + csv_field(r.leaf) + "," + std::to_string(r.pass_count) + "," +
           std::to_string(r.fail_count) + "\n";
  }
  return out;
}

EpisodeDataset parse_episodes_csv(std::string_view text) {
  const auto rows = parse_csv(text);
  if (rows.empty()) csv_error(1, 1, "missing header");
  const auto& header = rows[0].fields;
  if (header.size() < 2 || header.back() != "Outcome") {
    csv_error(rows[0].line, header.size(), "last column must be named 'Outcome' after at least one attribute");
  }
  std::vector<std::string> attributes(header.begin(), header.end() - 1);
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    if (attributes[i].empty()) csv_error(rows[0].line, i + 1, "empty attribute name");
    if (std::find(attributes.begin(), attributes.begin() + static_cast<std::ptrdiff_t>(i), attributes[i]) !=
        attributes.begin() + static_cast<std::ptrdiff_t>(i)) {
      csv_error(rows[0].line, i + 1, "duplicate attribute '" + attributes[i] + "'");
    }
  }
  std::vector<Episode> records;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != header.size()) {
      csv_error(row.line, std::min(row.fields.size(), header.size()) + 1,
                "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(row.fields.size()));
    }
    Episode e;
    e.features.assign(row.fields.begin(), row.fields.end() - 1);
    for (std::size_t i = 0; i < e.features.size(); ++i) {
      if (e.features[i].empty()) csv_error(row.line, i + 1, "empty feature");
    }
    const auto& label = row.fields.back();
    if (label == "Pass") {
      e.label = Outcome::Pass;
    } else if (label == "Fail") {
      e.label = Outcome::Fail;
    } else {
      throw Error(ErrorCode::UnknownLabel, "line " + std::to_string(row.line) + ", column " +
                                               std::to_string(header.size()) + ": outcome must be Pass or Fail, got '" +
                                               label + "'");
    }
    records.push_back(std::move(e));
  }
  if (records.empty()) throw Error(ErrorCode::EmptyDataset, "episodes file has no records");
  return EpisodeDataset(std::move(attributes), std::move(records));
}

std::string serialize_episodes_csv(const EpisodeDataset& d) {
  std::string out;
  for (const auto& a : d.attributes()) out += csv_field(a) + ",";
  out += "Outcome\n";
  for (const auto& r : d.records()) {
    for (const auto& f : r.features) out += csv_field(f) + ",";
    out += std::string(to_string(r.label)) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------- events

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::Created: return "created";
    case EventKind::OutcomeRecorded: return "outcome_recorded";
    case EventKind::Finalized: return "finalized";
  }
  return "unknown";
}

namespace {

EventKind parse_kind(std::string_view s) {
  if (s == "created") return EventKind::Created;
  if (s == "outcome_recorded") return EventKind::OutcomeRecorded;
  if (s == "finalized") return EventKind::Finalized;
  throw Error(ErrorCode::ParseError, "unknown event kind '" + std::string(s) + "'");
}

}  // namespace

std::string event_to_line(const SessionEvent& e) {
  Json j;
  j["session_id"] = e.session_id;
  j["seq"] = e.seq;
  j["kind"] = std::string(to_string(e.kind));
  j["payload"] = e.payload;
  j["at"] = format_timestamp(e.at);
  return j.dump();
}

SessionEvent event_from_line(std::string_view line) {
  try {
    const Json j = Json::parse(line);
    SessionEvent e;
    e.session_id = j.at("session_id").get<std::string>();
    e.seq = j.at("seq").get<std::int64_t>();
    e.kind = parse_kind(j.at("kind").get<std::string>());
    e.payload = j.at("payload");
    e.at = parse_timestamp(j.at("at").get<std::string>());
    if (e.session_id.empty() || e.seq < 1) throw Error(ErrorCode::ParseError, "bad session id or seq");
    return e;
  } catch (const Json::exception& ex) {
    throw Error(ErrorCode::ParseError, std::string("malformed event: ") + ex.what());
  }
}

SessionEvent created_event(const AssessmentSession& s) {
  Json queue = Json::array();
  for (const auto& q : s.queue) queue.push_back({{"parent", q.parent}, {"leaf", q.leaf}});
  return SessionEvent{s.id, 1, EventKind::Created,
                      Json{{"desired", s.desired}, {"mode", std::string(to_string(s.mode))}, {"queue", queue}},
                      s.created_at};
}

SessionEvent outcome_event(const std::string& session_id, std::int64_t seq, std::string_view leaf, Outcome outcome,
                           Timestamp at) {
  return SessionEvent{session_id, seq, EventKind::OutcomeRecorded,
                      Json{{"leaf", std::string(leaf)}, {"outcome", std::string(to_string(outcome))}}, at};
}

SessionEvent finalized_event(const std::string& session_id, std::int64_t seq, const Recommendation& r, Timestamp at) {
  return SessionEvent{session_id, seq, EventKind::Finalized, Json{{"recommendation", recommendation_json(r)}}, at};
}

void apply_event(std::map<std::string, AssessmentSession>& sessions, const SessionEvent& e) {
  auto corrupt = [&](const std::string& why) {
    throw Error(ErrorCode::CorruptLog, "event " + e.session_id + "#" + std::to_string(e.seq) + ": " + why);
  };
  try {
    switch (e.kind) {
      case EventKind::Created: {
        if (e.seq != 1) corrupt("created must be seq 1");
        if (sessions.count(e.session_id)) corrupt("session created twice");
        std::vector<QueuedLeaf> queue;
        for (const auto& q : e.payload.at("queue")) {
          queue.push_back({q.at("parent").get<std::string>(), q.at("leaf").get<std::string>()});
        }
        sessions.emplace(e.session_id,
                         open_session(e.session_id, e.payload.at("desired").get<std::string>(),
                                      parse_mode(e.payload.at("mode").get<std::string>()), std::move(queue), e.at));
        break;
      }
      case EventKind::OutcomeRecorded: {
        auto it = sessions.find(e.session_id);
        if (it == sessions.end()) corrupt("outcome for unknown session");
        it->second = record_outcome(it->second, e.payload.at("leaf").get<std::string>(),
                                    parse_outcome(e.payload.at("outcome").get<std::string>()), e.at);
        break;
      }
      case EventKind::Finalized: {
        auto it = sessions.find(e.session_id);
        if (it == sessions.end()) corrupt("finalized unknown session");
        if (it->second.status != SessionStatus::Complete) corrupt("finalized an incomplete session");
        break;
      }
    }
  } catch (const Json::exception& ex) {
    corrupt(std::string("bad payload: ") + ex.what());
  } catch (const Error& err) {
    if (err.code() == ErrorCode::CorruptLog) throw;
    corrupt(err.what());
  }
}

ReplayResult replay_log(std::string_view text) {
  ReplayResult result;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const bool terminated = nl != std::string_view::npos;
    const auto line = text.substr(pos, terminated ? nl - pos : text.size() - pos);
    ++line_no;
    const std::size_t next = terminated ? nl + 1 : text.size();
    if (line.empty()) {
      pos = next;
      result.valid_bytes = pos;
      continue;
    }
    SessionEvent e;
    try {
      e = event_from_line(line);
    } catch (const Error&) {
      if (!terminated) {
        result.warnings.push_back("dropped torn trailing line " + std::to_string(line_no));
        break;
      }
      throw Error(ErrorCode::CorruptLog, "line " + std::to_string(line_no) + " is not a valid event");
    }
    const auto key = std::make_pair(e.session_id, e.seq);
    const std::string canonical = event_to_line(e);
    if (auto it = result.event_lines.find(key); it != result.event_lines.end()) {
      if (it->second != canonical) {
        throw Error(ErrorCode::CorruptLog, "line " + std::to_string(line_no) + " conflicts with an earlier event " +
                                               e.session_id + "#" + std::to_string(e.seq));
      }
      result.warnings.push_back("skipped duplicate event " + e.session_id + "#" + std::to_string(e.seq));
    } else {
      auto& last = result.last_seq[e.session_id];
      if (e.seq != last + 1) {
        throw Error(ErrorCode::CorruptLog, "line " + std::to_string(line_no) + ": sequence gap for session " +
                                               e.session_id);
      }
      apply_event(result.sessions, e);
      last = e.seq;
      result.event_lines.emplace(key, canonical);
    }
    pos = next;
    result.valid_bytes = pos;
  }
  return result;
}

std::map<std::string, AssessmentSession> load_sessions(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) return {};
  auto result = replay_log(read_file(path));
  if (warnings) *warnings = result.warnings;
  return std::move(result.sessions);
}

EventLog::EventLog(std::string path) : path_(std::move(path)) {
  fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    throw Error(ErrorCode::StorageFailure, "cannot open log '" + path_ + "': " + std::strerror(errno));
  }
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw Error(ErrorCode::StorageFailure, "log '" + path_ + "' is locked by another writer");
  }
  try {
    const std::string text = read_file(path_);
    replay_ = replay_log(text);
    if (replay_.valid_bytes < text.size()) {
      if (::ftruncate(fd_, static_cast<off_t>(replay_.valid_bytes)) != 0) {
        throw Error(ErrorCode::StorageFailure, "cannot truncate torn tail of '" + path_ + "'");
      }
    }
  } catch (...) {
    ::close(fd_);
    fd_ = -1;
    throw;
  }
}

EventLog::~EventLog() {
  if (fd_ >= 0) ::close(fd_);  // releases the flock
}

std::int64_t EventLog::last_seq(const std::string& session_id) const {
  auto it = replay_.last_seq.find(session_id);
  return it == replay_.last_seq.end() ? 0 : it->second;
}

AppendStatus EventLog::append(const SessionEvent& e) {
  const auto key = std::make_pair(e.session_id, e.seq);
  const std::string line = event_to_line(e);
  if (auto it = replay_.event_lines.find(key); it != replay_.event_lines.end()) {
    if (it->second == line) return AppendStatus::Duplicate;
    throw Error(ErrorCode::SequenceGap, "event " + e.session_id + "#" + std::to_string(e.seq) +
                                            " already exists with different content");
  }
  const auto last = last_seq(e.session_id);
  if (e.seq != last + 1) {
    throw Error(ErrorCode::SequenceGap, "session " + e.session_id + " expects seq " + std::to_string(last + 1) +
                                            ", got " + std::to_string(e.seq));
  }
  // validate the transition before it becomes durable
  std::map<std::string, AssessmentSession> scratch;
  if (auto it = replay_.sessions.find(e.session_id); it != replay_.sessions.end()) scratch.insert(*it);
  apply_event(scratch, e);

  const std::string data = line + "\n";
  std::size_t written = 0;
  while (written < data.size()) {
    const auto n = ::write(fd_, data.data() + written, data.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::StorageFailure, "write to '" + path_ + "' failed: " + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) {
    throw Error(ErrorCode::StorageFailure, "fsync of '" + path_ + "' failed: " + std::strerror(errno));
  }
  replay_.sessions.insert_or_assign(e.session_id, std::move(scratch.at(e.session_id)));
  replay_.last_seq[e.session_id] = e.seq;
  replay_.event_lines.emplace(key, line);
  return AppendStatus::Appended;
}

}  // namespace preassess
