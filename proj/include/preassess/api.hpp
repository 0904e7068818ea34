#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>

#include "preassess/error.hpp"
#include "preassess/graph.hpp"
#include "preassess/session.hpp"
#include "preassess/store.hpp"

namespace httplib {
class Server;
}

namespace preassess {

/// HTTP status used for each error code.
int http_status(ErrorCode code);

/// "host:port". Throws BadRequest.
std::pair<std::string, int> parse_addr(std::string_view addr);

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
  std::string content_type;
};

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// The /v1 endpoint set, independent of the HTTP transport. Responses are a
/// function of the graph, the event log and the request (plus the clock for
/// timestamps). Session mutations are serialized.
class Service {
 public:
  using Clock = std::function<Timestamp()>;

  Service(KnowledgeGraph graph, const std::string& log_path, Clock clock = now_millis);

  ApiResponse handle(const ApiRequest& request);

  const KnowledgeGraph& graph() const { return graph_; }

 private:
  Json graph_view() const;
  Json create_session(const Json& body);
  Json get_session(const std::string& id);
  Json post_outcome(const std::string& id, const Json& body);
  Json get_recommendation(const std::string& id);
  Json fail_weight_view(const Json& body) const;
  Json bayes_view(const Json& body) const;
  Json tree_view(const ApiRequest& request) const;

  const AssessmentSession& session_or_throw(const std::string& id) const;

  KnowledgeGraph graph_;
  Clock clock_;
  std::mutex mu_;
  EventLog log_;
};

struct ServeConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string graph_path;
  std::string log_path;
  std::string static_dir;  // optional console assets mounted at /
};

/// HTTP front end for Service. Construction loads the graph (InvalidGraph)
/// and opens the log; bind() claims the socket (BindFailure).
class ApiServer {
 public:
  explicit ApiServer(const ServeConfig& config, Service::Clock clock = now_millis);
  ~ApiServer();

  /// Returns the bound port.
  int bind();
  /// Blocks until stop(); in-flight requests finish first.
  void run();
  void stop();
  int port() const { return port_; }
  Service& service() { return *service_; }

 private:
  ServeConfig config_;
  std::unique_ptr<Service> service_;
  std::unique_ptr<httplib::Server> server_;
  int port_ = 0;
};

}  // namespace preassess
