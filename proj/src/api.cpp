#include "preassess/api.hpp"

#include <charconv>
#include <sstream>

#include "httplib.h"

#include "preassess/dtree.hpp"
#include "preassess/infotheory.hpp"
#include "preassess/probability.hpp"

namespace preassess {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
    case ErrorCode::BadRequest:
    case ErrorCode::EmptyPerformance:
    case ErrorCode::UnknownLabel:
    case ErrorCode::DuplicateRow:
    case ErrorCode::AnswerCountMismatch:
    case ErrorCode::IndexOutOfRange:
    case ErrorCode::NotAParent:
    case ErrorCode::MissingAttribute:
      return 400;
    case ErrorCode::UnknownNode:
    case ErrorCode::UnknownSession:
    case ErrorCode::UnknownLeaf:
    case ErrorCode::UnknownAttribute:
    case ErrorCode::UnknownFeature:
    case ErrorCode::NotFound:
    case ErrorCode::SessionNotComplete:
      return 404;
    case ErrorCode::SessionComplete:
    case ErrorCode::LeafNotQueued:
    case ErrorCode::AlreadyRecordedDifferently:
    case ErrorCode::SequenceGap:
      return 409;
    case ErrorCode::LeafNotUnderParent:
    case ErrorCode::AllZeroWeights:
    case ErrorCode::ZeroDenominator:
    case ErrorCode::InsufficientGroups:
    case ErrorCode::EmptyCounts:
    case ErrorCode::EmptyDataset:
    case ErrorCode::DegenerateSplit:
    case ErrorCode::NoQuizDefined:
      return 422;
    case ErrorCode::StorageFailure:
    case ErrorCode::CorruptLog:
    case ErrorCode::BindFailure:
    case ErrorCode::InvalidGraph:
    case ErrorCode::FixtureMissing:
      return 500;
  }
  return 500;
}

std::pair<std::string, int> parse_addr(std::string_view addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw Error(ErrorCode::BadRequest, "address must be host:port, got '" + std::string(addr) + "'");
  }
  const auto port_text = addr.substr(colon + 1);
  int port = -1;
  auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port < 0 || port > 65535) {
    throw Error(ErrorCode::BadRequest, "bad port in address '" + std::string(addr) + "'");
  }
  return {std::string(addr.substr(0, colon)), port};
}

namespace {

ApiResponse json_response(int status, const Json& body) { return {status, body.dump(2) + "\n", "application/json"}; }

ApiResponse error_response(ErrorCode code, const std::string& message) {
  return json_response(http_status(code),
                       Json{{"error", {{"code", std::string(code_name(code))}, {"message", message}}}});
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos < path.size()) {
    const auto next = path.find('/', pos);
    const auto part = path.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
    if (!part.empty()) parts.emplace_back(part);
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return parts;
}

Json parse_body(const std::string& body) {
  if (body.empty()) return Json::object();
  try {
    Json j = Json::parse(body);
    if (!j.is_object()) throw Error(ErrorCode::BadRequest, "request body must be a JSON object");
    return j;
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::BadRequest, std::string("request body is not valid JSON: ") + e.what());
  }
}

std::string string_field(const Json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || !it->is_string()) {
    throw Error(ErrorCode::BadRequest, "field '" + std::string(key) + "' must be a string");
  }
  return it->get<std::string>();
}

int int_param(const std::map<std::string, std::string>& query, const std::string& key, int fallback) {
  auto it = query.find(key);
  if (it == query.end()) return fallback;
  int v = 0;
  auto [ptr, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
  if (ec != std::errc{} || ptr != it->second.data() + it->second.size()) {
    throw Error(ErrorCode::BadRequest, "query parameter '" + key + "' must be an integer");
  }
  return v;
}

Rational weight_value(const Json& w) {
  if (w.is_string()) return parse_rational(w.get<std::string>());
  if (w.is_number_integer()) return Rational(w.get<std::int64_t>());
  if (w.is_number()) return parse_rational(w.dump());
  throw Error(ErrorCode::BadRequest, "weight must be a number or a fraction string");
}

AggregateCounts counts_from_payload(const Json& payload) {
  if (auto csv = payload.find("counts_csv"); csv != payload.end()) {
    if (!csv->is_string()) throw Error(ErrorCode::BadRequest, "counts_csv must be a string");
    return parse_counts_csv(csv->get<std::string>());
  }
  auto rows = payload.find("rows");
  if (rows == payload.end() || !rows->is_array()) {
    throw Error(ErrorCode::BadRequest, "payload needs counts_csv or rows");
  }
  // route rows through the CSV parser so both forms share validation
  AggregateCounts counts;
  for (const auto& r : *rows) {
    if (!r.is_object()) throw Error(ErrorCode::BadRequest, "each row must be an object");
    const auto pass = r.value("pass", std::int64_t{-1});
    const auto fail = r.value("fail", std::int64_t{-1});
    counts.rows.push_back({string_field(r, "parent"), string_field(r, "leaf"), pass, fail});
  }
  return parse_counts_csv(serialize_counts_csv(counts));
}

}  // namespace

Service::Service(KnowledgeGraph graph, const std::string& log_path, Clock clock)
    : graph_(std::move(graph)), clock_(std::move(clock)), log_(log_path) {}

ApiResponse Service::handle(const ApiRequest& req) {
  try {
    const auto parts = split_path(req.path);
    if (parts.empty() || parts[0] != "v1") throw Error(ErrorCode::NotFound, "no route for " + req.path);
    const std::size_t n = parts.size();
    const bool get = req.method == "GET";
    const bool post = req.method == "POST";

    if (get && n == 2 && parts[1] == "health") return json_response(200, Json{{"status", "ok"}});
    if (get && n == 2 && parts[1] == "graph") return json_response(200, graph_view());
    if (get && n == 5 && parts[1] == "graph" && parts[2] == "parents" && parts[4] == "leaves") {
      const auto id = graph_.resolve(parts[3]);
      return json_response(200, Json{{"parent", id}, {"leaves", graph_.leaves_under(id)}});
    }
    if (n >= 2 && parts[1] == "sessions") {
      if (post && n == 2) return json_response(201, create_session(parse_body(req.body)));
      if (get && n == 3) return json_response(200, get_session(parts[2]));
      if (post && n == 4 && parts[3] == "outcomes") return json_response(200, post_outcome(parts[2], parse_body(req.body)));
      if (get && n == 4 && parts[3] == "recommendation") return json_response(200, get_recommendation(parts[2]));
    }
    if (n == 3 && parts[1] == "analytics") {
      const auto& what = parts[2];
      if (post && what == "fail-weight") return json_response(200, fail_weight_view(parse_body(req.body)));
      if (post && what == "bayes") return json_response(200, bayes_view(parse_body(req.body)));
      if (post && what == "entropy") {
        auto it = req.query.find("precision");
        const bool full = it != req.query.end() && it->second == "full";
        return {200, gain_report_json(gain_report(parse_episodes_csv(req.body)), full) + "\n", "application/json"};
      }
      if (post && what == "tree") return json_response(200, tree_view(req));
      if (get && what == "weight-table") {
        const int size = int_param(req.query, "n", 0);
        if (size < 1 || size > 10000) throw Error(ErrorCode::BadRequest, "n must lie within 1..10000");
        return json_response(200, weight_row_json(weight_table_row(size)));
      }
    }
    throw Error(ErrorCode::NotFound, "no route for " + req.method + " " + req.path);
  } catch (const Error& e) {
    return error_response(e.code(), e.what());
  } catch (const Json::exception& e) {
    return error_response(ErrorCode::BadRequest, e.what());
  }
}

Json Service::graph_view() const {
  Json doc;
  doc["parents"] = Json::array();
  for (const auto& p : graph_.parents()) {
    Json pj;
    pj["id"] = p.id;
    pj["leaves"] = Json::array();
    for (const auto& l : p.leaves) {
      Json lj{{"id", l.id}, {"quiz", Json::array()}};
      // correct answers stay on the server
      for (const auto& q : l.quiz) lj["quiz"].push_back({{"prompt", q.prompt}, {"choices", q.choices}});
      pj["leaves"].push_back(std::move(lj));
    }
    pj["prerequisites"] = graph_.prerequisites_of(p.id);
    const auto next = graph_.next_higher(p.id);
    pj["next_higher"] = next ? Json(*next) : Json(nullptr);
    doc["parents"].push_back(std::move(pj));
  }
  auto edges = [](const std::vector<Edge>& es) {
    Json arr = Json::array();
    for (const auto& e : es) arr.push_back({{"from", e.from}, {"to", e.to}});
    return arr;
  };
  doc["prerequisites"] = edges(graph_.prerequisite_edges());
  doc["progression"] = edges(graph_.progression_edges());
  doc["aliases"] = Json::object();
  for (const auto& [a, t] : graph_.aliases()) doc["aliases"][a] = t;
  return doc;
}

const AssessmentSession& Service::session_or_throw(const std::string& id) const {
  auto it = log_.sessions().find(id);
  if (it == log_.sessions().end()) throw Error(ErrorCode::UnknownSession, "no session '" + id + "'");
  return it->second;
}

Json Service::create_session(const Json& body) {
  const auto desired = graph_.resolve(string_field(body, "desired"));
  const auto mode = body.contains("mode") ? parse_mode(string_field(body, "mode")) : SessionMode::Prerequisite;

  std::lock_guard lock(mu_);
  std::size_t next = log_.sessions().size() + 1;
  auto make_id = [](std::size_t k) {
    std::string digits = std::to_string(k);
    return "s" + std::string(digits.size() < 6 ? 6 - digits.size() : 0, '0') + digits;
  };
  while (log_.sessions().count(make_id(next))) ++next;
  const auto now = clock_();
  const auto session = start_session(graph_, desired, mode, make_id(next), now);
  log_.append(created_event(session));
  Json out{{"session", session_json(session)}};
  if (session.status == SessionStatus::Complete) {
    const auto rec = finalize(graph_, session);
    log_.append(finalized_event(session.id, 2, rec, now));
    out["recommendation"] = recommendation_json(rec);
  }
  return out;
}

Json Service::get_session(const std::string& id) {
  std::lock_guard lock(mu_);
  return Json{{"session", session_json(session_or_throw(id))}};
}

Json Service::post_outcome(const std::string& id, const Json& body) {
  std::string leaf = string_field(body, "leaf");
  if (graph_.is_leaf(leaf) || graph_.aliases().count(leaf)) leaf = graph_.resolve(leaf);

  std::optional<QuizGrade> grade;
  Outcome outcome = Outcome::Fail;
  if (auto answers = body.find("answers"); answers != body.end()) {
    if (!answers->is_array()) throw Error(ErrorCode::BadRequest, "answers must be an array of indices");
    std::vector<std::size_t> picks;
    for (const auto& a : *answers) {
      if (!a.is_number_unsigned()) throw Error(ErrorCode::BadRequest, "answers must be non-negative integers");
      picks.push_back(a.get<std::size_t>());
    }
    grade = grade_quiz(graph_, leaf, picks);
    outcome = grade->outcome;
  } else {
    outcome = parse_outcome(string_field(body, "outcome"));
  }

  std::lock_guard lock(mu_);
  const auto& current = session_or_throw(id);
  const auto now = clock_();
  const auto updated = record_outcome(current, leaf, outcome, now);
  if (!(updated == current)) {
    const auto seq = log_.last_seq(id) + 1;
    log_.append(outcome_event(id, seq, leaf, outcome, now));
    if (updated.status == SessionStatus::Complete) {
      log_.append(finalized_event(id, seq + 1, finalize(graph_, updated), now));
    }
  }
  const auto& stored = session_or_throw(id);
  Json out{{"session", session_json(stored)}};
  if (grade) out["grade"] = {{"leaf", grade->leaf}, {"answers", grade->answers},
                             {"outcome", std::string(to_string(grade->outcome))}};
  if (stored.status == SessionStatus::Complete) out["recommendation"] = recommendation_json(finalize(graph_, stored));
  return out;
}

Json Service::get_recommendation(const std::string& id) {
  std::lock_guard lock(mu_);
  const auto& s = session_or_throw(id);
  return Json{{"session_id", s.id}, {"recommendation", recommendation_json(finalize(graph_, s))}};
}

Json Service::fail_weight_view(const Json& body) const {
  const auto perf = string_field(body, "performance");
  const auto outcomes = parse_pf_string(perf);
  Json out{{"performance", perf},
           {"weight", rational_json(fail_weight(outcomes))},
           {"pass_weight", rational_json(pass_weight(outcomes))}};
  if (body.contains("parent")) {
    const auto parent = graph_.resolve(string_field(body, "parent"));
    const auto pv = PerformanceVector::zip(graph_.leaves_under(parent), outcomes);
    out["parent"] = parent;
    out["recommendation"] = recommendation_json(recommend(graph_, parent, pv));
  }
  return out;
}

Json Service::bayes_view(const Json& body) const {
  const auto scheme = string_field(body, "scheme");
  const Json payload = body.contains("payload") ? body.at("payload") : Json::object();
  if (!payload.is_object()) throw Error(ErrorCode::BadRequest, "payload must be an object");
  Json out{{"scheme", scheme}};

  if (scheme == "uniform" || scheme == "joints") {
    std::vector<JointWeight> joints;
    if (scheme == "uniform") {
      GroupPerformance groups;
      if (!payload.contains("groups") || !payload.at("groups").is_array()) {
        throw Error(ErrorCode::BadRequest, "uniform scheme needs payload.groups");
      }
      for (const auto& g : payload.at("groups")) {
        const auto parent = graph_.resolve(string_field(g, "parent"));
        const auto outcomes = parse_pf_string(string_field(g, "performance"));
        groups.push_back({parent, PerformanceVector::zip(graph_.leaves_under(parent), outcomes)});
      }
      joints = uniform_scheme_joints(groups);
    } else {
      if (!payload.contains("joints") || !payload.at("joints").is_array()) {
        throw Error(ErrorCode::BadRequest, "joints scheme needs payload.joints");
      }
      for (const auto& j : payload.at("joints")) {
        if (!j.contains("weight")) throw Error(ErrorCode::BadRequest, "joint needs a weight");
        joints.push_back({string_field(j, "target"), weight_value(j.at("weight"))});
      }
    }
    out["joints"] = Json::array();
    for (const auto& j : joints) out["joints"].push_back({{"target", j.target}, {"weight", rational_json(j.weight)}});
    out["posteriors"] = posterior_json(bayes_fail_posterior(joints));
    return out;
  }

  const auto bscheme = parse_scheme(scheme);
  const auto counts = counts_from_payload(payload);
  PosteriorTable table;
  if (payload.contains("leaf")) {
    const auto leaf = string_field(payload, "leaf");
    table.push_back({leaf, aggregate_scheme_posterior(counts, leaf, bscheme)});
  } else {
    for (const auto& r : counts.rows) table.push_back({r.leaf, aggregate_scheme_posterior(counts, r.leaf, bscheme)});
  }
  out["posteriors"] = posterior_json(table);
  return out;
}

Json Service::tree_view(const ApiRequest& req) const {
  std::string csv = req.body;
  TrainConfig cfg;
  std::optional<SplitSpec> split;
  auto apply = [&](const std::string& key, const std::string& value) {
    if (key == "criterion") cfg.criterion = parse_criterion(value);
  };
  if (req.content_type.rfind("application/json", 0) == 0) {
    const Json body = parse_body(req.body);
    csv = string_field(body, "episodes_csv");
    if (body.contains("criterion")) apply("criterion", string_field(body, "criterion"));
    if (body.contains("min_leaf")) cfg.min_leaf = body.at("min_leaf").get<int>();
    if (body.contains("split")) split = SplitSpec{body.at("split").get<double>(), body.value("seed", std::uint64_t{0})};
  } else {
    if (auto it = req.query.find("criterion"); it != req.query.end()) apply("criterion", it->second);
    cfg.min_leaf = int_param(req.query, "min_leaf", cfg.min_leaf);
    if (auto it = req.query.find("split"); it != req.query.end()) {
      SplitSpec s;
      try {
        s.train_fraction = std::stod(it->second);
      } catch (const std::exception&) {
        throw Error(ErrorCode::BadRequest, "split must be a number");
      }
      s.seed = static_cast<std::uint64_t>(int_param(req.query, "seed", 0));
      split = s;
    }
  }
  const auto data = parse_episodes_csv(csv);
  EpisodeDataset train = data;
  EpisodeDataset test = data;
  if (split) std::tie(train, test) = split_dataset(data, *split);
  const auto tree = build_tree(train, cfg);
  return Json{{"criterion", std::string(to_string(cfg.criterion))},
              {"min_leaf", cfg.min_leaf},
              {"tree", Json::parse(tree_to_json(tree))},
              {"rendering", render_tree(tree)},
              {"evaluated_on", split ? "test" : "training"},
              {"train_records", train.size()},
              {"test_records", split ? test.size() : 0},
              {"confusion", confusion_json(evaluate(tree, split ? test : train))}};
}

ApiServer::ApiServer(const ServeConfig& config, Service::Clock clock) : config_(config) {
  KnowledgeGraph graph;
  try {
    graph = load_graph_file(config.graph_path);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidGraph, std::string("cannot load graph: ") + e.what());
  }
  service_ = std::make_unique<Service>(std::move(graph), config.log_path, std::move(clock));
  server_ = std::make_unique<httplib::Server>();

  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest r;
    r.method = req.method;
    r.path = req.path;
    for (const auto& [k, v] : req.params) r.query[k] = v;
    r.body = req.body;
    r.content_type = req.get_header_value("Content-Type");
    const auto out = service_->handle(r);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  server_->Get(R"(/v1/.*)", handler);
  server_->Post(R"(/v1/.*)", handler);
  server_->Put(R"(/v1/.*)", handler);
  server_->Delete(R"(/v1/.*)", handler);
  if (!config.static_dir.empty() && !server_->set_mount_point("/", config.static_dir)) {
    throw Error(ErrorCode::StorageFailure, "static directory '" + config.static_dir + "' does not exist");
  }
}

ApiServer::~ApiServer() {
  if (server_) server_->stop();
}

int ApiServer::bind() {
  if (config_.port == 0) {
    port_ = server_->bind_to_any_port(config_.host);
  } else {
    port_ = server_->bind_to_port(config_.host, config_.port) ? config_.port : -1;
  }
  if (port_ <= 0) {
    throw Error(ErrorCode::BindFailure, "cannot bind " + config_.host + ":" + std::to_string(config_.port));
  }
  return port_;
}

void ApiServer::run() { server_->listen_after_bind(); }

void ApiServer::stop() { server_->stop(); }

}  // namespace preassess
