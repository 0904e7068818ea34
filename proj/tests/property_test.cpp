// Property suites. Generators are hand-rolled over a seeded mt19937_64 so
// every failure reproduces; exhaustive enumeration is used wherever the
// domain is small enough.

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "preassess/dtree.hpp"
#include "preassess/error.hpp"
#include "preassess/graph.hpp"
#include "preassess/infotheory.hpp"
#include "preassess/probability.hpp"
#include "preassess/session.hpp"
#include "preassess/store.hpp"
#include "test_support.hpp"

using namespace preassess;
using testing_support::EnumerationOracle;

namespace {

constexpr std::uint64_t kSeed = 20261016;

/// Every P/F string of length `n`, in binary counting order.
std::vector<std::string> all_pf_strings(int n) {
  std::vector<std::string> out;
  for (int mask = 0; mask < (1 << n); ++mask) {
    std::string s;
    for (int i = 0; i < n; ++i) s += (mask >> i) & 1 ? 'F' : 'P';
    out.push_back(s);
  }
  return out;
}

std::vector<NodeId> leaf_names(const std::string& prefix, std::size_t n) {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

Rational random_probability(std::mt19937_64& rng) {
  const std::int64_t q = 1 + static_cast<std::int64_t>(rng() % 1000);
  const std::int64_t p = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(q + 1));
  return Rational(p, q);
}

/// Random categorical dataset: 1-3 attributes with 2-3 values, 1-12 records.
EpisodeDataset random_dataset(std::mt19937_64& rng) {
  const std::size_t attrs = 1 + rng() % 3;
  const std::size_t records = 1 + rng() % 12;
  std::vector<std::string> names;
  std::vector<std::size_t> arity;
  for (std::size_t a = 0; a < attrs; ++a) {
    names.push_back("A" + std::to_string(a));
    arity.push_back(2 + rng() % 2);
  }
  std::vector<Episode> rows;
  for (std::size_t r = 0; r < records; ++r) {
    Episode e;
    for (std::size_t a = 0; a < attrs; ++a) e.features.push_back("v" + std::to_string(rng() % arity[a]));
    e.label = rng() % 2 ? Outcome::Pass : Outcome::Fail;
    rows.push_back(std::move(e));
  }
  return EpisodeDataset(names, rows);
}

std::string dataset_csv(const EpisodeDataset& d) { return serialize_episodes_csv(d); }

/// A random DAG of 2-6 parents with 1-4 leaves each; edges only go from
/// lower to higher index, so the graph is acyclic by construction.
KnowledgeGraph random_graph(std::mt19937_64& rng) {
  const std::size_t parents = 2 + rng() % 5;
  std::vector<KnowledgeGraph::ParentSpec> specs;
  for (std::size_t p = 0; p < parents; ++p) {
    KnowledgeGraph::ParentSpec spec{"p" + std::to_string(p), {}};
    const std::size_t leaves = 1 + rng() % 4;
    for (std::size_t l = 0; l < leaves; ++l) {
      KnowledgeGraph::LeafSpec leaf{"p" + std::to_string(p) + "l" + std::to_string(l), {}};
      if (rng() % 2) leaf.quiz.push_back({"q?", {"a", "b", "c"}, static_cast<std::size_t>(rng() % 3)});
      spec.leaves.push_back(std::move(leaf));
    }
    specs.push_back(std::move(spec));
  }
  std::vector<Edge> prereqs;
  for (std::size_t a = 0; a < parents; ++a) {
    for (std::size_t b = a + 1; b < parents; ++b) {
      if (rng() % 3 == 0) prereqs.push_back({"p" + std::to_string(a), "p" + std::to_string(b)});
    }
  }
  std::vector<Edge> progression;
  for (std::size_t p = 0; p + 1 < parents; ++p) {
    progression.push_back({"p" + std::to_string(p), "p" + std::to_string(p + 1)});
  }
  return KnowledgeGraph::build(std::move(specs), std::move(prereqs), std::move(progression));
}

}  // namespace

// ---------------------------------------------------------------------------
// probability

TEST(ProbabilityProperties, ComplementIsAnInvolution) {
  std::mt19937_64 rng(kSeed);
  for (int i = 0; i < 5000; ++i) {
    const auto p = random_probability(rng);
    EXPECT_EQ(complement(complement(p)), p);
    EXPECT_EQ(p + complement(p), Rational(1));
  }
}

TEST(ProbabilityProperties, FailWeightMatchesCountingOracleExhaustively) {
  for (int n = 1; n <= 10; ++n) {
    for (const auto& pf : all_pf_strings(n)) {
      const auto [f, total] = testing_support::pf_fail_fraction(pf);
      const auto outcomes = parse_pf_string(pf);
      ASSERT_EQ(fail_weight(outcomes), Rational(f, total)) << pf;
      ASSERT_EQ(fail_weight(outcomes) + pass_weight(outcomes), Rational(1)) << pf;
      ASSERT_EQ(to_pf_string(outcomes), pf);
    }
  }
}

TEST(ProbabilityProperties, FailWeightIsPermutationInvariant) {
  std::mt19937_64 rng(kSeed);
  for (int i = 0; i < 2000; ++i) {
    std::string pf;
    const std::size_t n = 1 + rng() % 20;
    for (std::size_t k = 0; k < n; ++k) pf += rng() % 2 ? 'P' : 'F';
    const auto base = fail_weight(parse_pf_string(pf));
    std::shuffle(pf.begin(), pf.end(), rng);
    ASSERT_EQ(fail_weight(parse_pf_string(pf)), base);
  }
}

TEST(ProbabilityProperties, PosteriorsNormalizeAndAreScaleInvariant) {
  std::mt19937_64 rng(kSeed);
  for (int i = 0; i < 2000; ++i) {
    std::vector<JointWeight> joints;
    const std::size_t n = 1 + rng() % 6;
    for (std::size_t k = 0; k < n; ++k) joints.push_back({"t" + std::to_string(k), random_probability(rng)});
    if (std::all_of(joints.begin(), joints.end(), [](const auto& j) { return j.weight == 0; })) {
      joints[0].weight = Rational(1, 7);
    }
    const auto table = bayes_fail_posterior(joints);
    Rational sum(0);
    for (const auto& e : table) {
      ASSERT_GE(e.posterior, 0);
      sum += e.posterior;
    }
    ASSERT_EQ(sum, Rational(1));

    const Rational k(1 + static_cast<std::int64_t>(rng() % 50), 1 + static_cast<std::int64_t>(rng() % 50));
    auto scaled = joints;
    for (auto& j : scaled) j.weight *= k;
    ASSERT_EQ(bayes_fail_posterior(scaled), table);
  }
}

TEST(ProbabilityProperties, TwoGroupUniformPosteriorIsFailShareByEnumeration) {
  for (int n1 = 1; n1 <= 5; ++n1) {
    for (int n2 = 1; n2 <= 5; ++n2) {
      const auto leaves1 = leaf_names("a", static_cast<std::size_t>(n1));
      const auto leaves2 = leaf_names("b", static_cast<std::size_t>(n2));
      for (const auto& pf1 : all_pf_strings(n1)) {
        for (const auto& pf2 : all_pf_strings(n2)) {
          const auto f1 = testing_support::pf_fail_fraction(pf1).first;
          const auto f2 = testing_support::pf_fail_fraction(pf2).first;
          const GroupPerformance groups{{"a", PerformanceVector::zip(leaves1, parse_pf_string(pf1))},
                                        {"b", PerformanceVector::zip(leaves2, parse_pf_string(pf2))}};
          const auto joints = uniform_scheme_joints(groups);
          if (f1 + f2 == 0) {
            EXPECT_THROW(bayes_fail_posterior(joints), Error);
            continue;
          }
          const auto table = bayes_fail_posterior(joints);
          ASSERT_EQ(table[0].posterior, Rational(f1, f1 + f2)) << pf1 << " " << pf2;
          ASSERT_EQ(table[1].posterior, Rational(f2, f1 + f2)) << pf1 << " " << pf2;
        }
      }
    }
  }
}

TEST(ProbabilityProperties, AggregatePosteriorsSumToOneUnderConsistentScheme) {
  std::mt19937_64 rng(kSeed);
  for (int i = 0; i < 500; ++i) {
    AggregateCounts c;
    const std::size_t groups = 2 + rng() % 3;
    for (std::size_t g = 0; g < groups; ++g) {
      const std::size_t leaves = 1 + rng() % 4;
      for (std::size_t l = 0; l < leaves; ++l) {
        c.rows.push_back({"g" + std::to_string(g), "g" + std::to_string(g) + "l" + std::to_string(l),
                          static_cast<std::int64_t>(rng() % 20), static_cast<std::int64_t>(rng() % 20)});
      }
    }
    if (c.total_fail() == 0) c.rows[0].fail_count = 1;
    Rational sum(0);
    for (const auto& r : c.rows) sum += aggregate_scheme_posterior(c, r.leaf, BayesScheme::Consistent);
    // priors weight each group, so the posteriors of a group's leaves share
    // its posterior mass; summing over every leaf covers every group once
    ASSERT_EQ(sum, Rational(1));
  }
}

TEST(ProbabilityProperties, WeightTablePairsSumToOneAndAreMonotone) {
  const auto rows = weight_table(1000);
  ASSERT_EQ(rows.size(), 1000u);
  for (const auto& row : rows) {
    ASSERT_EQ(row.pairs.size(), static_cast<std::size_t>(row.n) + 1);
    ASSERT_EQ(row.pairs.front().pass_weight, Rational(1));
    ASSERT_EQ(row.pairs.back().fail_weight, Rational(1));
    for (std::size_t j = 0; j < row.pairs.size(); ++j) {
      ASSERT_EQ(row.pairs[j].pass_weight + row.pairs[j].fail_weight, Rational(1));
      ASSERT_EQ(row.pairs[j].fail_weight, Rational(static_cast<std::int64_t>(j), row.n));
      if (j > 0) {
        ASSERT_LT(row.pairs[j].pass_weight, row.pairs[j - 1].pass_weight);
        ASSERT_GT(row.pairs[j].fail_weight, row.pairs[j - 1].fail_weight);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// information theory

TEST(InfoTheoryProperties, GainIsNonNegativeOnExhaustiveSmallDatasets) {
  // every sequence of 1-4 records over two binary attributes and a label
  const std::vector<std::string> attrs{"A", "B"};
  int checked = 0;
  for (int size = 1; size <= 4; ++size) {
    int combos = 1;
    for (int i = 0; i < size; ++i) combos *= 8;
    for (int code = 0; code < combos; ++code) {
      std::vector<Episode> rows;
      int c = code;
      for (int i = 0; i < size; ++i) {
        const int r = c % 8;
        c /= 8;
        rows.push_back({{(r & 1) ? "x1" : "x0", (r & 2) ? "y1" : "y0"}, (r & 4) ? Outcome::Pass : Outcome::Fail});
      }
      const EpisodeDataset d(attrs, rows);
      const double h = entropy(d.label_counts());
      const EnumerationOracle oracle(dataset_csv(d));
      for (const auto& a : attrs) {
        const double ig = info_gain(d, a);
        ASSERT_GE(ig, -1e-12);
        ASSERT_LE(ig, h + 1e-12);
        ASSERT_NEAR(ig, oracle.info_gain(a), 1e-12);
        ASSERT_GE(gain_ratio(d, a), -1e-12);
        ASSERT_GE(split_info(d, a), 0.0);
      }
      ++checked;
    }
  }
  EXPECT_EQ(checked, 8 + 64 + 512 + 4096);
}

TEST(InfoTheoryProperties, EntropyBoundsAndSymmetry) {
  for (std::int64_t p = 0; p <= 40; ++p) {
    for (std::int64_t f = 0; f <= 40; ++f) {
      if (p + f == 0) continue;
      const double h = entropy({p, f});
      ASSERT_GE(h, 0.0);
      ASSERT_LE(h, 1.0 + 1e-12);
      ASSERT_DOUBLE_EQ(h, entropy({f, p}));
      ASSERT_NEAR(h, EnumerationOracle::h(static_cast<double>(p), static_cast<double>(f)), 1e-12);
    }
  }
}

// ---------------------------------------------------------------------------
// decision tree

TEST(TreeProperties, TrainingAccuracyAtLeastMajorityBaseline) {
  std::mt19937_64 rng(kSeed);
  for (int i = 0; i < 1000; ++i) {
    const auto d = random_dataset(rng);
    for (auto criterion : {SplitCriterion::GainRatio, SplitCriterion::InfoGain}) {
      for (int min_leaf : {1, 2, 3}) {
        const auto tree = build_tree(d, {criterion, min_leaf, 2});
        const auto m = evaluate(tree, d);
        const auto counts = d.label_counts();
        ASSERT_GE(m.correct(), std::max(counts.pass_count, counts.fail_count)) << dataset_csv(d);
      }
    }
  }
}

TEST(TreeProperties, BuildIsDeterministicAndOrderIndependent) {
  std::mt19937_64 rng(kSeed);
  for (int i = 0; i < 500; ++i) {
    const auto d = random_dataset(rng);
    const auto tree = build_tree(d);
    ASSERT_EQ(build_tree(d), tree);
    auto rows = d.records();
    std::shuffle(rows.begin(), rows.end(), rng);
    ASSERT_EQ(build_tree(d.with_records(rows)), tree) << dataset_csv(d);
  }
}

TEST(TreeProperties, JsonRoundTrip) {
  std::mt19937_64 rng(kSeed);
  for (int i = 0; i < 500; ++i) {
    const auto tree = build_tree(random_dataset(rng), {SplitCriterion::InfoGain, 1, 2});
    const auto text = tree_to_json(tree);
    ASSERT_EQ(tree_from_json(text), tree);
    ASSERT_EQ(tree_to_json(tree_from_json(text)), text);
  }
}

TEST(TreeProperties, SplitIsDeterministicPartition) {
  std::mt19937_64 rng(kSeed);
  for (int i = 0; i < 500; ++i) {
    const auto d = random_dataset(rng);
    if (d.size() < 2) continue;
    const SplitSpec spec{0.5 + static_cast<double>(rng() % 40) / 100.0, rng()};
    std::pair<EpisodeDataset, EpisodeDataset> parts;
    try {
      parts = split_dataset(d, spec);
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), ErrorCode::DegenerateSplit);
      continue;
    }
    const auto again = split_dataset(d, spec);
    ASSERT_EQ(again.first, parts.first);
    ASSERT_EQ(again.second, parts.second);
    ASSERT_EQ(parts.first.size() + parts.second.size(), d.size());
    ASSERT_FALSE(parts.first.empty());
    ASSERT_FALSE(parts.second.empty());
  }
}

// ---------------------------------------------------------------------------
// graph, sessions and storage

TEST(GraphProperties, SerializeRoundTripAndPrerequisiteOrder) {
  std::mt19937_64 rng(kSeed);
  for (int i = 0; i < 300; ++i) {
    const auto g = random_graph(rng);
    ASSERT_TRUE(load_graph(serialize_graph(g)) == g);
    for (const auto& p : g.parents()) {
      const auto pre = g.prerequisites_of(p.id);
      // every listed prerequisite appears after all of its own prerequisites
      for (std::size_t k = 0; k < pre.size(); ++k) {
        for (const auto& inner : g.prerequisites_of(pre[k])) {
          const auto pos = std::find(pre.begin(), pre.end(), inner);
          ASSERT_NE(pos, pre.end());
          ASSERT_LT(static_cast<std::size_t>(pos - pre.begin()), k);
        }
      }
      ASSERT_EQ(std::find(pre.begin(), pre.end(), p.id), pre.end());
    }
  }
}

TEST(SessionProperties, EventReplayReproducesLiveState) {
  std::mt19937_64 rng(kSeed);
  for (int i = 0; i < 300; ++i) {
    const auto g = random_graph(rng);
    const auto& desired = g.parents()[rng() % g.parents().size()].id;
    const auto mode = rng() % 2 ? SessionMode::Direct : SessionMode::Prerequisite;
    const std::string id = "r" + std::to_string(i);
    auto live = start_session(g, desired, mode, id, 1000);
    std::vector<SessionEvent> events{created_event(live)};
    auto order = live.queue;
    std::shuffle(order.begin(), order.end(), rng);
    Timestamp now = 1001;
    for (const auto& q : order) {
      const auto outcome = rng() % 2 ? Outcome::Pass : Outcome::Fail;
      live = record_outcome(live, q.leaf, outcome, now);
      events.push_back(outcome_event(id, static_cast<std::int64_t>(events.size()) + 1, q.leaf, outcome, now));
      ++now;
    }
    ASSERT_EQ(live.status, SessionStatus::Complete);
    events.push_back(finalized_event(id, static_cast<std::int64_t>(events.size()) + 1, finalize(g, live), now));

    std::string log;
    for (const auto& e : events) log += event_to_line(e) + "\n";
    const auto first = replay_log(log);
    const auto second = replay_log(log);
    ASSERT_EQ(first.sessions.at(id), live);
    ASSERT_EQ(second.sessions, first.sessions);
    for (const auto& e : events) ASSERT_EQ(event_from_line(event_to_line(e)), e);

    // pooled weight equals the brute-force fail fraction over the queue
    const auto rec = finalize(g, live);
    std::int64_t fails = 0;
    for (const auto& [leaf, o] : live.outcomes) fails += o == Outcome::Fail;
    if (const auto* r = std::get_if<Relearn>(&rec)) {
      ASSERT_EQ(r->weight, Rational(fails, static_cast<std::int64_t>(live.queue.size())));
    } else {
      ASSERT_EQ(fails, 0);
    }
  }
}

TEST(StoreProperties, CountsCsvRoundTripWithAwkwardNames) {
  std::mt19937_64 rng(kSeed);
  const std::vector<std::string> pieces{"a", "b c", "x,y", "q\"t", "z"};
  for (int i = 0; i < 500; ++i) {
    AggregateCounts c;
    const std::size_t rows = 1 + rng() % 8;
    for (std::size_t r = 0; r < rows; ++r) {
      const auto parent = pieces[rng() % pieces.size()] + std::to_string(rng() % 3);
      const auto leaf = pieces[rng() % pieces.size()] + "_" + std::to_string(r);
      c.rows.push_back({parent, leaf, static_cast<std::int64_t>(rng() % 1000), static_cast<std::int64_t>(rng() % 1000)});
    }
    ASSERT_EQ(parse_counts_csv(serialize_counts_csv(c)), c);
  }
}

TEST(StoreProperties, EpisodesCsvRoundTrip) {
  std::mt19937_64 rng(kSeed);
  for (int i = 0; i < 500; ++i) {
    const auto d = random_dataset(rng);
    ASSERT_EQ(parse_episodes_csv(serialize_episodes_csv(d)), d);
  }
}
