#include "preassess/cli.hpp"

#include <pthread.h>
#include <signal.h>

#include <atomic>
#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "preassess/api.hpp"
#include "preassess/dtree.hpp"
#include "preassess/error.hpp"
#include "preassess/graph.hpp"
#include "preassess/infotheory.hpp"
#include "preassess/json_io.hpp"
#include "preassess/probability.hpp"
#include "preassess/reproduce.hpp"
#include "preassess/store.hpp"

namespace preassess {

namespace {

constexpr const char* kGrammar =
    "usage: preassess <command> [options] [--json]\n"
    "  validate-graph <file>\n"
    "  recommend --graph <file> --parent <id> --perf <PF-string>\n"
    "  fail-weight --perf <PF-string>\n"
    "  bayes --counts <csv> --leaf <id> [--scheme paper|consistent] [--graph <file>]\n"
    "  entropy-report --episodes <csv>\n"
    "  tree train|eval --episodes <csv> [--criterion gain_ratio|info_gain] [--min-leaf 2]\n"
    "                  [--split 0.8 --seed N] [--out <tree.json>] [--tree <tree.json>]\n"
    "  weight-table --n <k> [--csv]\n"
    "  serve --graph <file> --log <file> [--addr host:port] [--static <dir>]\n"
    "  reproduce-paper [--fixtures <dir>] [--table6-paper-values]\n";

/// Human display: 4 decimals, trailing zeros trimmed.
std::string show(const Rational& r) { return to_decimal_string(r, 4); }

std::string show(double v) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(4);
  out << (std::abs(v) < 5e-5 ? 0.0 : v);
  return out.str();
}

std::string describe(const Recommendation& rec) {
  if (const auto* p = std::get_if<Progress>(&rec)) {
    if (!p->target) return "Progress: curriculum complete (no higher concept)";
    return "Progress to: " + *p->target;
  }
  const auto& r = std::get<Relearn>(rec);
  std::string leaves;
  for (const auto& l : r.leaves) leaves += (leaves.empty() ? "" : ", ") + l;
  std::string out = "Relearn " + leaves + " (weight " + show(r.weight) + " = " + to_fraction_string(r.weight) + ")";
  for (const auto& pw : r.per_parent) out += "\n  " + pw.parent + ": " + show(pw.weight);
  return out;
}

struct Options {
  bool json = false;
  std::string file;
  std::string graph;
  std::string parent;
  std::string perf;
  std::string counts;
  std::string leaf;
  std::string scheme = "paper";
  std::string episodes;
  std::string criterion = "gain_ratio";
  int min_leaf = 2;
  double split = 0.0;
  std::uint64_t seed = 0;
  std::string out_path;
  std::string tree_path;
  int n = 0;
  bool csv = false;
  std::string log;
  std::string addr;
  std::string static_dir;
  std::string fixtures;
  bool table6 = false;
};

int serve(const Options& o, std::ostream& out, std::ostream& err) {
  std::string addr = o.addr;
  if (addr.empty()) {
    const char* env = std::getenv("PREASSESS_ADDR");
    addr = env && *env ? env : "127.0.0.1:8080";
  }
  const auto [host, port] = parse_addr(addr);
  ServeConfig cfg;
  cfg.host = host;
  cfg.port = port;
  cfg.graph_path = o.graph;
  cfg.log_path = o.log;
  cfg.static_dir = o.static_dir;

  // signals are taken synchronously by a watcher thread; server threads
  // inherit the blocked mask
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  sigset_t previous;
  pthread_sigmask(SIG_BLOCK, &set, &previous);
  struct MaskRestore {
    sigset_t mask;
    ~MaskRestore() { pthread_sigmask(SIG_SETMASK, &mask, nullptr); }
  } restore{previous};

  ApiServer server(cfg);
  const int bound = server.bind();
  err << "listening on " << host << ":" << bound << "\n";
  err.flush();
  std::atomic<bool> done{false};
  std::thread watcher([&] {
    const timespec tick{0, 200'000'000};
    while (!done.load()) {
      if (sigtimedwait(&set, nullptr, &tick) > 0) {
        server.stop();
        return;
      }
    }
  });
  server.run();
  done = true;
  watcher.join();
  if (o.json) out << Json{{"stopped", true}}.dump() << "\n";
  return kExitOk;
}

int reproduce(const Options& o, std::ostream& out) {
  const auto report = reproduce_paper(o.fixtures.empty() ? default_fixture_dir() : o.fixtures, o.table6);
  if (o.json) {
    Json doc{{"ok", report.ok()}, {"checks", Json::array()}};
    for (const auto& c : report.checks) {
      doc["checks"].push_back({{"name", c.name},
                               {"source", c.source},
                               {"printed", c.printed},
                               {"computed", c.computed},
                               {"verdict", std::string(to_string(c.verdict))},
                               {"note", c.note}});
    }
    out << doc.dump(2) << "\n";
  } else {
    std::size_t width = 4;
    for (const auto& c : report.checks) width = std::max(width, c.name.size());
    out << std::left << std::setw(static_cast<int>(width)) << "check" << "  " << std::setw(8) << "printed"
        << "  " << std::setw(18) << "verdict" << "computed\n";
    std::size_t divergent = 0;
    for (const auto& c : report.checks) {
      out << std::setw(static_cast<int>(width)) << c.name << "  " << std::setw(8) << (c.printed.empty() ? "-" : c.printed)
          << "  " << std::setw(18) << to_string(c.verdict) << c.computed;
      if (!c.note.empty()) out << "  [" << c.note << "]";
      out << "\n";
      if (c.verdict == Verdict::KnownDivergence) ++divergent;
    }
    out << "\n" << report.checks.size() << " checks, " << divergent << " documented divergences, "
        << (report.ok() ? "all reproduced" : "FAILURES present") << "\n";
  }
  return report.ok() ? kExitOk : kExitDomain;
}

int tree_command(const std::string& mode, const Options& o, std::ostream& out) {
  const auto data = parse_episodes_csv(read_file(o.episodes));
  EpisodeDataset train = data;
  EpisodeDataset test = data;
  const bool split = o.split > 0.0;
  if (split) std::tie(train, test) = split_dataset(data, SplitSpec{o.split, o.seed});

  DecisionTree tree;
  if (mode == "train") {
    TrainConfig cfg;
    cfg.criterion = parse_criterion(o.criterion);
    cfg.min_leaf = o.min_leaf;
    tree = build_tree(train, cfg);
    if (!o.out_path.empty()) write_file(o.out_path, tree_to_json(tree) + "\n");
  } else {
    if (o.tree_path.empty()) throw Error(ErrorCode::BadRequest, "tree eval needs --tree <tree.json>");
    tree = tree_from_json(read_file(o.tree_path));
  }
  const auto& target = split ? test : (mode == "train" ? train : data);
  const auto m = evaluate(tree, target);
  if (o.json) {
    out << Json{{"tree", Json::parse(tree_to_json(tree))},
                {"evaluated_on", split ? "test" : (mode == "train" ? "training" : "dataset")},
                {"records", target.size()},
                {"confusion", confusion_json(m)}}
               .dump(2)
        << "\n";
    return kExitOk;
  }
  out << render_tree(tree);
  out << "Evaluated on " << (split ? "test split" : (mode == "train" ? "training data" : "dataset")) << " ("
      << target.size() << " records): " << m.correct() << " correct, " << m.incorrect() << " incorrect\n";
  out << "             pred Pass  pred Fail\n";
  out << "true Pass    " << std::setw(9) << m.true_pass_pred_pass << "  " << std::setw(9) << m.true_pass_pred_fail
      << "\n";
  out << "true Fail    " << std::setw(9) << m.true_fail_pred_pass << "  " << std::setw(9) << m.true_fail_pred_fail
      << "\n";
  return kExitOk;
}

int dispatch(const std::string& cmd, const std::string& tree_mode, const Options& o, std::ostream& out,
             std::ostream& err) {
  if (cmd == "validate-graph") {
    const auto g = load_graph(read_file(o.file));
    std::size_t leaves = 0;
    for (const auto& p : g.parents()) leaves += p.leaves.size();
    if (o.json) {
      out << Json{{"valid", true}, {"parents", g.parents().size()}, {"leaves", leaves}}.dump() << "\n";
    } else {
      out << "ok: " << g.parents().size() << " parents, " << leaves << " leaves\n";
    }
    return kExitOk;
  }
  if (cmd == "fail-weight") {
    const auto outcomes = parse_pf_string(o.perf);
    const auto w = fail_weight(outcomes);
    if (o.json) {
      out << Json{{"performance", o.perf}, {"weight", rational_json(w)}, {"pass_weight", rational_json(pass_weight(outcomes))}}
                 .dump()
          << "\n";
    } else {
      out << show(w) << "\n";
    }
    return kExitOk;
  }
  if (cmd == "recommend") {
    const auto g = load_graph(read_file(o.graph));
    const auto parent = g.resolve(o.parent);
    const auto perf = PerformanceVector::zip(g.leaves_under(parent), parse_pf_string(o.perf));
    const auto rec = recommend(g, parent, perf);
    if (o.json) {
      out << Json{{"parent", parent}, {"performance", o.perf}, {"recommendation", recommendation_json(rec)}}.dump()
          << "\n";
    } else {
      out << describe(rec) << "\n";
    }
    return kExitOk;
  }
  if (cmd == "bayes") {
    const auto counts = parse_counts_csv(read_file(o.counts));
    std::string leaf = o.leaf;
    if (!o.graph.empty()) leaf = load_graph(read_file(o.graph)).resolve(leaf);
    const auto scheme = parse_scheme(o.scheme);
    const auto p = aggregate_scheme_posterior(counts, leaf, scheme);
    if (o.json) {
      out << Json{{"leaf", leaf}, {"scheme", std::string(to_string(scheme))}, {"posterior", rational_json(p)}}.dump()
          << "\n";
    } else {
      out << show(p) << "\n";
    }
    return kExitOk;
  }
  if (cmd == "entropy-report") {
    const auto report = gain_report(parse_episodes_csv(read_file(o.episodes)));
    if (o.json) {
      out << gain_report_json(report, true) << "\n";
      return kExitOk;
    }
    out << "H(S) = " << show(report.dataset_entropy) << " (" << report.labels.pass_count << " Pass, "
        << report.labels.fail_count << " Fail)\n\n";
    out << std::left << std::setw(10) << "attribute" << std::setw(11) << "info_gain" << std::setw(12) << "split_info"
        << std::setw(12) << "gain_ratio" << "\n";
    for (const auto& a : report.attributes) {
      out << std::setw(10) << a.attribute << std::setw(11) << show(a.info_gain) << std::setw(12) << show(a.split_info)
          << std::setw(12) << show(a.gain_ratio) << "\n";
      for (const auto& f : a.features) {
        out << "    " << std::setw(16) << f.feature << show(f.weighted_entropy) << "  (" << f.counts.pass_count << "P/"
            << f.counts.fail_count << "F)" << (f.weighted_entropy == 0.0 ? "  zero impurity" : "") << "\n";
      }
    }
    return kExitOk;
  }
  if (cmd == "tree") return tree_command(tree_mode, o, out);
  if (cmd == "weight-table") {
    const auto rows = weight_table(o.n);
    if (o.json) {
      Json doc = Json::array();
      for (const auto& r : rows) doc.push_back(weight_row_json(r));
      out << doc.dump() << "\n";
    } else if (o.csv) {
      out << "n,j,pass_weight,fail_weight\n";
      for (const auto& r : rows) {
        for (std::size_t j = 0; j < r.pairs.size(); ++j) {
          out << r.n << "," << j << "," << show(r.pairs[j].pass_weight) << "," << show(r.pairs[j].fail_weight) << "\n";
        }
      }
    } else {
      for (const auto& r : rows) {
        out << "n=" << r.n << ":";
        for (const auto& p : r.pairs) out << "  " << to_decimal_string(p.pass_weight, 2) << "/" << to_decimal_string(p.fail_weight, 2);
        out << "\n";
      }
    }
    return kExitOk;
  }
  if (cmd == "serve") return serve(o, out, err);
  if (cmd == "reproduce-paper") return reproduce(o, out);
  throw Error(ErrorCode::BadRequest, "unknown command '" + cmd + "'");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pre-assessment recommendation engine", "preassess"};
  app.require_subcommand(1);
  Options o;
  app.add_flag("--json", o.json, "Emit one JSON document on stdout");

  auto* validate = app.add_subcommand("validate-graph", "Validate a graph file");
  validate->add_option("file", o.file, "Graph JSON file")->required();

  auto* recommend_cmd = app.add_subcommand("recommend", "Recommend progress or relearning for one parent");
  recommend_cmd->add_option("--graph", o.graph)->required();
  recommend_cmd->add_option("--parent", o.parent)->required();
  recommend_cmd->add_option("--perf", o.perf, "P/F string in leaf order")->required();

  auto* fw = app.add_subcommand("fail-weight", "Fail weight of a performance string");
  fw->add_option("--perf", o.perf, "P/F string")->required();

  auto* bayes = app.add_subcommand("bayes", "Aggregate-scheme fail posterior for one leaf");
  bayes->add_option("--counts", o.counts)->required();
  bayes->add_option("--leaf", o.leaf)->required();
  bayes->add_option("--scheme", o.scheme)->check(CLI::IsMember({"paper", "consistent"}));
  bayes->add_option("--graph", o.graph, "Resolve leaf aliases through this graph");

  auto* entropy_cmd = app.add_subcommand("entropy-report", "Entropy and information gain report");
  entropy_cmd->add_option("--episodes", o.episodes)->required();

  auto* tree = app.add_subcommand("tree", "Train or evaluate a decision tree");
  std::string tree_mode;
  tree->add_option("mode", tree_mode)->required()->check(CLI::IsMember({"train", "eval"}));
  tree->add_option("--episodes", o.episodes)->required();
  tree->add_option("--criterion", o.criterion)->check(CLI::IsMember({"gain_ratio", "info_gain"}));
  tree->add_option("--min-leaf", o.min_leaf)->check(CLI::PositiveNumber);
  tree->add_option("--split", o.split, "Train fraction in (0,1)")->check(CLI::Range(0.0, 1.0));
  tree->add_option("--seed", o.seed);
  tree->add_option("--out", o.out_path, "Write the trained tree JSON here");
  tree->add_option("--tree", o.tree_path, "Tree JSON to evaluate");

  auto* wt = app.add_subcommand("weight-table", "Pass/fail weight table rows 1..n");
  wt->add_option("--n", o.n)->required()->check(CLI::Range(1, 10000));
  wt->add_flag("--csv", o.csv);

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
  serve_cmd->add_option("--graph", o.graph)->required();
  serve_cmd->add_option("--log", o.log)->required();
  serve_cmd->add_option("--addr", o.addr, "host:port (default $PREASSESS_ADDR or 127.0.0.1:8080)");
  serve_cmd->add_option("--static", o.static_dir, "Directory of console assets served at /");

  auto* repro = app.add_subcommand("reproduce-paper", "Recompute every published number");
  repro->add_option("--fixtures", o.fixtures);
  repro->add_flag("--table6-paper-values", o.table6, "List every recomputed entropy and gain cell");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<const char*> argv{"preassess"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << kGrammar;
    return kExitUsage;
  }

  const auto* chosen = app.get_subcommands().front();
  try {
    return dispatch(chosen->get_name(), tree_mode, o, out, err);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::BadRequest) {
      err << "error: " << e.what() << "\n" << kGrammar;
      return kExitUsage;
    }
    if (o.json) out << Json{{"error", {{"code", std::string(e.code_name())}, {"message", e.what()}}}}.dump() << "\n";
    err << e.code_name() << ": " << e.what() << "\n";
    return kExitDomain;
  }
}

}  // namespace preassess
