#include "preassess/cli.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "preassess/json_io.hpp"
#include "test_support.hpp"

using preassess::Json;
using testing_support::fixture_path;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = preassess::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST(Cli, FailWeight) {
  const auto r = run({"fail-weight", "--perf", "FPPP"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "0.25\n");
  EXPECT_EQ(run({"fail-weight", "--perf", "PFF"}).out, "0.6667\n");
}

TEST(Cli, FailWeightJson) {
  const auto r = run({"--json", "fail-weight", "--perf", "PFF"});
  ASSERT_EQ(r.code, 0);
  const auto doc = Json::parse(r.out);
  EXPECT_EQ(doc["weight"]["exact"], "2/3");
  EXPECT_EQ(doc["weight"]["decimal"], "0.66666666666666667");
}

TEST(Cli, JsonFlagAfterSubcommand) {
  const auto r = run({"fail-weight", "--perf", "FPPP", "--json"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(Json::parse(r.out)["weight"]["exact"], "1/4");
}

TEST(Cli, Recommend) {
  const auto graph = fixture_path("sql_ontology.graph.json");
  EXPECT_EQ(run({"recommend", "--graph", graph, "--parent", "delete", "--perf", "PPP"}).out, "Progress to: update\n");
  const auto relearn = run({"--json", "recommend", "--graph", graph, "--parent", "select", "--perf", "FPPP"});
  ASSERT_EQ(relearn.code, 0);
  const auto doc = Json::parse(relearn.out);
  EXPECT_EQ(doc["recommendation"]["leaves"], Json({"selectOrderBy"}));
  const auto mismatch = run({"recommend", "--graph", graph, "--parent", "select", "--perf", "PP"});
  EXPECT_EQ(mismatch.code, 1);
  EXPECT_NE(mismatch.err.find("VALIDATION_ERROR"), std::string::npos);
}

TEST(Cli, Bayes) {
  const auto counts = fixture_path("table4.counts.csv");
  EXPECT_EQ(run({"bayes", "--counts", counts, "--leaf", "deleteSelect", "--scheme", "paper"}).out, "0.7952\n");
  EXPECT_EQ(run({"bayes", "--counts", counts, "--leaf", "deleteSelect", "--scheme", "consistent"}).out, "0.6627\n");
  const auto alias = run({"bayes", "--counts", counts, "--leaf", "DS", "--graph", fixture_path("sql_ontology.graph.json")});
  EXPECT_EQ(alias.out, "0.7952\n");
  const auto unknown = run({"bayes", "--counts", counts, "--leaf", "DS"});
  EXPECT_EQ(unknown.code, 1);
  EXPECT_NE(unknown.err.find("UNKNOWN_LEAF"), std::string::npos);
}

TEST(Cli, EntropyReport) {
  const auto r = run({"entropy-report", "--episodes", fixture_path("table5.episodes.csv")});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("H(S) = 0.9183"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("0.5577"), std::string::npos);
  const auto j = run({"--json", "entropy-report", "--episodes", fixture_path("table5.episodes.csv")});
  EXPECT_NEAR(Json::parse(j.out)["dataset_entropy"].get<double>(), 0.918295834, 1e-9);
}

TEST(Cli, TreeTrainAndEval) {
  testing_support::TempDir dir;
  const auto episodes = fixture_path("table5.episodes.csv");
  const auto tree_file = dir.file("tree.json");
  const auto train = run({"tree", "train", "--episodes", episodes, "--out", tree_file});
  ASSERT_EQ(train.code, 0) << train.err;
  EXPECT_NE(train.out.find("Update = UpdateSelect: Fail (4/1)"), std::string::npos) << train.out;
  EXPECT_NE(train.out.find("8 correct, 1 incorrect"), std::string::npos);
  const auto eval = run({"--json", "tree", "eval", "--episodes", episodes, "--tree", tree_file});
  ASSERT_EQ(eval.code, 0) << eval.err;
  EXPECT_EQ(Json::parse(eval.out)["confusion"]["correct"], 8);
  const auto split = run({"--json", "tree", "train", "--episodes", episodes, "--split", "0.8", "--seed", "7"});
  ASSERT_EQ(split.code, 0) << split.err;
  EXPECT_EQ(Json::parse(split.out)["records"], 1);
}

TEST(Cli, WeightTableCsv) {
  const auto r = run({"weight-table", "--n", "7", "--csv"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("7,1,0.8571,0.1429\n"), std::string::npos);
  EXPECT_NE(r.out.find("7,7,0,1\n"), std::string::npos);
  const auto j = run({"--json", "weight-table", "--n", "3"});
  EXPECT_EQ(Json::parse(j.out).size(), 3u);
}

TEST(Cli, ValidateGraph) {
  EXPECT_EQ(run({"validate-graph", fixture_path("sql_ontology.graph.json")}).out, "ok: 5 parents, 14 leaves\n");
  testing_support::TempDir dir;
  const auto bad = dir.file("bad.json");
  {
    std::ofstream f(bad);
    f << R"({"parents": [{"id": "a", "leaves": []}]})";
  }
  const auto r = run({"--json", "validate-graph", bad});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(Json::parse(r.out)["error"]["code"], "VALIDATION_ERROR");
}

TEST(Cli, UsageErrorsExitTwoWithGrammar) {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {}, {"bogus"}, {"fail-weight"}, {"weight-table", "--n", "0"}, {"tree", "grow", "--episodes", "x"},
           {"bayes", "--counts", "x", "--leaf", "y", "--scheme", "odd"}}) {
    const auto r = run(args);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("usage: preassess"), std::string::npos);
  }
}

TEST(Cli, DomainErrorsExitOneWithCode) {
  const auto r = run({"fail-weight", "--perf", "PXF"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("PARSE_ERROR: ", 0), 0u) << r.err;
  const auto missing = run({"entropy-report", "--episodes", "/nonexistent.csv"});
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.err.find("STORAGE_FAILURE"), std::string::npos);
}

TEST(Cli, JsonOutputIsDeterministic) {
  const std::vector<std::string> args{"--json", "reproduce-paper", "--fixtures", PREASSESS_FIXTURE_DIR};
  const auto a = run(args);
  const auto b = run(args);
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_TRUE(Json::parse(a.out)["ok"].get<bool>());
}

TEST(Cli, ReproducePaperFlagsDivergences) {
  const auto r = run({"reproduce-paper", "--fixtures", PREASSESS_FIXTURE_DIR, "--table6-paper-values"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("weighted H(DS)"), std::string::npos);
  EXPECT_NE(r.out.find("known-divergence"), std::string::npos);
}

TEST(Cli, ReproducePaperMissingFixtures) {
  const auto r = run({"reproduce-paper", "--fixtures", "/nonexistent-fixtures"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("FIXTURE_MISSING"), std::string::npos);
}

TEST(Cli, ServeRejectsBadGraph) {
  const auto r = run({"serve", "--graph", "/nonexistent.json", "--log", "/tmp/unused.log", "--addr", "127.0.0.1:0"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("INVALID_GRAPH"), std::string::npos);
}
