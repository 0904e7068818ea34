#include "preassess/probability.hpp"

#include <gtest/gtest.h>

#include "preassess/error.hpp"
#include "preassess/graph.hpp"
#include "preassess/store.hpp"
#include "test_support.hpp"

using namespace preassess;

namespace {

KnowledgeGraph fixture() { return load_graph_file(testing_support::fixture_path("sql_ontology.graph.json")); }

template <typename F>
ErrorCode error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::NotFound;
}

AggregateCounts table4() { return parse_counts_csv(testing_support::slurp(testing_support::fixture_path("table4.counts.csv"))); }

}  // namespace

TEST(FailWeight, GoldenValues) {
  EXPECT_EQ(fail_weight(parse_pf_string("FPPP")), Rational(1, 4));
  EXPECT_EQ(fail_weight(parse_pf_string("PFF")), Rational(2, 3));
  EXPECT_EQ(fail_weight(parse_pf_string("PPPP")), Rational(0));
  EXPECT_EQ(fail_weight(parse_pf_string("FFF")), Rational(1));
}

TEST(FailWeight, PassWeightIsComplement) {
  const auto o = parse_pf_string("PFPFF");
  EXPECT_EQ(pass_weight(o), Rational(2, 5));
  EXPECT_EQ(complement(pass_weight(o)), fail_weight(o));
  EXPECT_EQ(complement(Rational(3, 4)), Rational(1, 4));
}

TEST(FailWeight, EmptyIsRejected) {
  EXPECT_EQ(error_of([] { fail_weight(std::span<const Outcome>{}); }), ErrorCode::EmptyPerformance);
  EXPECT_EQ(error_of([] { PerformanceVector({}); }), ErrorCode::EmptyPerformance);
}

TEST(PfString, ParseAndFormat) {
  EXPECT_EQ(parse_pf_string("PF"), (std::vector<Outcome>{Outcome::Pass, Outcome::Fail}));
  const auto o = parse_pf_string("FPPF");
  EXPECT_EQ(to_pf_string(o), "FPPF");
  EXPECT_EQ(error_of([] { parse_pf_string(""); }), ErrorCode::ParseError);
  EXPECT_EQ(error_of([] { parse_pf_string("PXF"); }), ErrorCode::ParseError);
  EXPECT_EQ(error_of([] { parse_pf_string("pf"); }), ErrorCode::ParseError);
}

TEST(Outcome, ParseLabels) {
  EXPECT_EQ(parse_outcome("Pass"), Outcome::Pass);
  EXPECT_EQ(parse_outcome("F"), Outcome::Fail);
  EXPECT_EQ(error_of([] { parse_outcome("maybe"); }), ErrorCode::UnknownLabel);
}

TEST(PerformanceVector, RejectsDuplicateLeafAndLengthMismatch) {
  EXPECT_EQ(error_of([] { PerformanceVector({{"a", Outcome::Pass}, {"a", Outcome::Fail}}); }),
            ErrorCode::ValidationError);
  const std::vector<NodeId> leaves{"a", "b"};
  EXPECT_EQ(error_of([&] { PerformanceVector::zip(leaves, parse_pf_string("P")); }), ErrorCode::ValidationError);
  const auto v = PerformanceVector::zip(leaves, parse_pf_string("PF"));
  EXPECT_EQ(v.passes(), 1u);
  EXPECT_EQ(v.fails(), 1u);
}

TEST(Recommend, AllPassProgressesToNextHigher) {
  const auto g = fixture();
  const auto rec = recommend(g, "delete", PerformanceVector::zip(g.leaves_under("delete"), parse_pf_string("PPP")));
  EXPECT_EQ(rec, Recommendation(Progress{"update", false}));
}

TEST(Recommend, TerminalParentCompletesCurriculum) {
  const auto g = fixture();
  const auto rec = recommend(g, "join", PerformanceVector::zip(g.leaves_under("join"), parse_pf_string("PPP")));
  EXPECT_EQ(rec, Recommendation(Progress{std::nullopt, true}));
}

TEST(Recommend, FailuresYieldWeightedRelearn) {
  const auto g = fixture();
  const auto rec = recommend(g, "select", PerformanceVector::zip(g.leaves_under("select"), parse_pf_string("FPPP")));
  const Relearn expected{{"selectOrderBy"}, Rational(1, 4), {{"select", Rational(1, 4)}}};
  EXPECT_EQ(rec, Recommendation(expected));
}

TEST(Recommend, ForeignLeafIsRejected) {
  const auto g = fixture();
  EXPECT_EQ(error_of([&] { recommend(g, "select", PerformanceVector({{"deleteSelect", Outcome::Fail}})); }),
            ErrorCode::LeafNotUnderParent);
}

TEST(Bayes, UniformSchemeGivesOneThirdForSelect) {
  const auto g = fixture();
  const GroupPerformance groups{
      {"select", PerformanceVector::zip(g.leaves_under("select"), parse_pf_string("FPPP"))},
      {"delete", PerformanceVector::zip(g.leaves_under("delete"), parse_pf_string("PFF"))}};
  const auto joints = uniform_scheme_joints(groups);
  ASSERT_EQ(joints.size(), 2u);
  EXPECT_EQ(joints[0].weight, Rational(1, 2) * Rational(1, 7));
  EXPECT_EQ(joints[1].weight, Rational(1, 2) * Rational(2, 7));
  const auto table = bayes_fail_posterior(joints);
  EXPECT_EQ(table[0], (PosteriorEntry{"select", Rational(1, 3)}));
  EXPECT_EQ(table[1], (PosteriorEntry{"delete", Rational(2, 3)}));
}

TEST(Bayes, PosteriorErrors) {
  const std::vector<JointWeight> zeros{{"a", Rational(0)}, {"b", Rational(0)}};
  EXPECT_EQ(error_of([&] { bayes_fail_posterior(zeros); }), ErrorCode::AllZeroWeights);
  const std::vector<JointWeight> negative{{"a", Rational(-1)}, {"b", Rational(2)}};
  EXPECT_EQ(error_of([&] { bayes_fail_posterior(negative); }), ErrorCode::ValidationError);
}

TEST(Bayes, AggregateTotals) {
  const auto c = table4();
  EXPECT_EQ(c.total_pass(), 88);
  EXPECT_EQ(c.total_fail(), 24);
  EXPECT_EQ(c.grand_total(), 112);
  EXPECT_EQ(c.parents(), (std::vector<NodeId>{"select", "delete"}));
}

TEST(Bayes, PaperSchemeOnTable4) {
  // priors 57/112 (select) and 55/112 (delete); target likelihood 16 of
  // delete's 20 fails; group likelihoods 4/24 and 20/24 in the denominator
  const auto p = aggregate_scheme_posterior(table4(), "deleteSelect", BayesScheme::Paper);
  const Rational expected = Rational(55, 112) * Rational(16, 20) /
                            (Rational(57, 112) * Rational(4, 24) + Rational(55, 112) * Rational(20, 24));
  EXPECT_EQ(p, expected);
  EXPECT_EQ(p, Rational(66, 83));
  EXPECT_NEAR(to_double(p), 0.7951, 0.0005);
  EXPECT_NEAR(to_double(p), 0.78, 0.02);
}

TEST(Bayes, ConsistentSchemeOnTable4) {
  const auto p = aggregate_scheme_posterior(table4(), "deleteSelect", BayesScheme::Consistent);
  EXPECT_EQ(p, Rational(55, 83));
}

TEST(Bayes, AggregateErrors) {
  const auto c = table4();
  EXPECT_EQ(error_of([&] { aggregate_scheme_posterior(c, "nope"); }), ErrorCode::UnknownLeaf);
  AggregateCounts one{{{"select", "a", 1, 1}, {"select", "b", 1, 0}}};
  EXPECT_EQ(error_of([&] { aggregate_scheme_posterior(one, "a"); }), ErrorCode::InsufficientGroups);
  AggregateCounts no_fails{{{"x", "a", 1, 0}, {"y", "b", 2, 0}}};
  EXPECT_EQ(error_of([&] { aggregate_scheme_posterior(no_fails, "a"); }), ErrorCode::ZeroDenominator);
  EXPECT_EQ(error_of([] { parse_scheme("bogus"); }), ErrorCode::BadRequest);
}

TEST(WeightTable, RowSevenMatchesPrintedTwoDecimalValues) {
  const auto row = weight_table_row(7);
  ASSERT_EQ(row.pairs.size(), 8u);
  const std::vector<std::string> pass{"1", "0.86", "0.71", "0.57", "0.43", "0.29", "0.14", "0"};
  for (std::size_t j = 0; j < pass.size(); ++j) {
    EXPECT_EQ(to_decimal_string(row.pairs[j].pass_weight, 2), pass[j]) << j;
    EXPECT_EQ(row.pairs[j].pass_weight + row.pairs[j].fail_weight, Rational(1));
  }
}

TEST(WeightTable, Bounds) {
  EXPECT_EQ(weight_table(7).size(), 7u);
  EXPECT_EQ(error_of([] { weight_table(0); }), ErrorCode::ValidationError);
  EXPECT_EQ(error_of([] { weight_table(10001); }), ErrorCode::ValidationError);
}
