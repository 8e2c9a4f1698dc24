#include "support.hpp"

#include "semisup/selftrain.hpp"

#include <gtest/gtest.h>

namespace semisup {
namespace {

TEST(Confidence, RelativeMarginOfTheTopTwo) {
  EXPECT_DOUBLE_EQ(confidence((Vector(3) << 0.2, 0.8, 0.4).finished()), 0.5);
  EXPECT_DOUBLE_EQ(confidence((Vector(2) << 0.5, 0.5).finished()), 0.0);
  EXPECT_DOUBLE_EQ(confidence(Vector::Zero(3)), 0.0);
  EXPECT_DOUBLE_EQ(confidence((Vector(2) << 1.0, 0.0).finished()), 1.0);
}

TEST(Thresholds, DecayGeometricallyToTheFinalValue) {
  const DecisionThresholds t;
  const auto traj = t.trajectory(4);
  ASSERT_EQ(traj.size(), 5U);
  EXPECT_DOUBLE_EQ(traj.front(), 0.6);
  EXPECT_DOUBLE_EQ(traj.back(), 0.4);
  const double r = std::pow(0.4 / 0.6, 0.25);
  for (int p = 1; p < 4; ++p) EXPECT_NEAR(traj[static_cast<std::size_t>(p)], 0.6 * std::pow(r, p), 1e-15);
  for (std::size_t i = 1; i < traj.size(); ++i) EXPECT_LT(traj[i], traj[i - 1]);
}

TEST(Thresholds, ValidateOrdering) {
  DecisionThresholds t;
  t.low = 0.7;
  EXPECT_THROW(t.validate(), ValidationError);
  t = DecisionThresholds{};
  t.final_high = 0.9;
  EXPECT_THROW(t.validate(), ValidationError);
  t = DecisionThresholds{0.5, 0.5, 0.5};
  EXPECT_NO_THROW(t.validate());
}

TEST(Refinement, AddsTheMostSimilarGroup) {
  const Vector base = (Vector(2) << 0.5, 0.5).finished();
  const Vector sims = (Vector(4) << 0.9, 0.85, 0.1, 0.05).finished();
  const Matrix out = (Matrix(4, 2) << 1, 0, 0.8, 0.2, 0, 1, 0, 1).finished();
  const Refinement r = refine_from_similarities(base, sims, out, 2);
  EXPECT_EQ(r.members, (std::vector<Index>{0, 1}));
  // Normalised similarities: 1 and 0.94117...
  const double s1 = (0.85 - 0.05) / (0.9 - 0.05);
  EXPECT_NEAR(r.scores[0], 0.5 + 1.0 + 0.8 * s1, 1e-12);
  EXPECT_NEAR(r.scores[1], 0.5 + 0.2 * s1, 1e-12);
}

TEST(Refinement, EqualSimilaritiesUseEveryRowRaw) {
  const Vector base = Vector::Zero(2);
  const Vector sims = Vector::Constant(3, 0.25);
  const Matrix out = (Matrix(3, 2) << 1, 0, 0, 1, 1, 0).finished();
  const Refinement r = refine_from_similarities(base, sims, out, 2);
  EXPECT_EQ(r.members.size(), 3U);
  EXPECT_NEAR(r.scores[0], 0.5, 1e-15);
  EXPECT_NEAR(r.scores[1], 0.25, 1e-15);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Refinement, SimilarityIsInverseDistance) {
  const Matrix labeled = (Matrix(2, 1) << 0.0, 10.0).finished();
  const Matrix out = (Matrix(2, 2) << 1, 0, 0, 1).finished();
  const Refinement r = similarity_refine((Vector(1) << 1.0).finished(), Vector::Zero(2), labeled, out, 2);
  EXPECT_EQ(r.members, (std::vector<Index>{0}));
  EXPECT_GT(r.scores[0], r.scores[1]);
}

TEST(AnyPositive, FiresWhenOneNeighbourIsPositive) {
  const Matrix labeled = (Matrix(3, 1) << 0.0, 1.0, 5.0).finished();
  const std::vector<bool> pos{false, true, false};
  EXPECT_TRUE(any_positive_rule((Vector(1) << 0.1).finished(), labeled, pos, 2));
  EXPECT_FALSE(any_positive_rule((Vector(1) << 0.1).finished(), labeled, pos, 1));
  EXPECT_FALSE(any_positive_rule((Vector(1) << 6.0).finished(), labeled, pos, 1));
}

TEST(Consensus, SmallClusterVotesPositive) {
  Matrix x(10, 2);
  for (Index i = 0; i < 8; ++i) x.row(i) << 0.01 * static_cast<double>(i), 0.0;
  x.row(8) << 5.0, 5.0;
  x.row(9) << 5.1, 5.0;
  const ConsensusResult r =
      consensus_init(x, {Metric::Euclidean, Metric::L1, Metric::Cosine}, {0.4, 0.4, 0.2}, 3);
  EXPECT_TRUE(r.positive[8]);
  EXPECT_TRUE(r.positive[9]);
  for (Index i = 0; i < 8; ++i) EXPECT_FALSE(r.positive[static_cast<std::size_t>(i)]);
  EXPECT_EQ(r.votes.cols(), 3);
}

TEST(Consensus, WeightsMustSumToOne) {
  Matrix x(4, 1);
  x << 0.0, 0.1, 0.2, 9.0;
  EXPECT_TRUE(consensus_init(x, {Metric::Euclidean, Metric::L1}, {0.5, 0.5}, 0).positive[3]);
  EXPECT_THROW(consensus_init(x, {Metric::Euclidean}, {0.5}, 0), ValidationError);
}

struct Fixture {
  Matrix table = (Matrix(4, 2) << 0.9, 0.1, 0.1, 0.9, 0.55, 0.45, 0.95, 0.05).finished();
  Matrix seed_x = (Matrix(2, 2) << 0, 0, 1, 100).finished();
  Matrix stream = (Matrix(2, 2) << 2, 50, 3, 10).finished();
};

TEST(Selftrain, LowConfidenceGoesToTheOracleOnce) {
  Fixture f;
  testing::TableClassifier base(f.table);
  OracleContract oracle{[](Index) { return 2; }, 0};
  SelftrainConfig cfg;
  cfg.passes = 3;
  const SelftrainResult r = selftrain_run(base, f.seed_x, {1, 2}, 2, f.stream, oracle, cfg, {"u0", "u1"});
  EXPECT_EQ(oracle.queries, 1);
  EXPECT_EQ(r.seed_items, (std::vector<Index>{0}));
  EXPECT_FALSE(r.pseudo[0].has_value());
  EXPECT_EQ(r.pseudo[1], 1);
  EXPECT_EQ(r.log.items_per_pass, (std::vector<Index>{2, 1, 1}));
  EXPECT_EQ(r.log.outcomes.front().sample_id, "u0");
  EXPECT_TRUE(testing::audit_conserved(r.log, 2, 2, 3));
}

TEST(Selftrain, OracleFailureAbortsWithPartialLog) {
  Fixture f;
  testing::TableClassifier base(f.table);
  OracleContract thrower{[](Index) -> int { throw std::runtime_error("expert offline"); }, 0};
  try {
    selftrain_run(base, f.seed_x, {1, 2}, 2, f.stream, thrower, SelftrainConfig{});
    FAIL() << "expected SelftrainAborted";
  } catch (const SelftrainAborted& e) {
    EXPECT_TRUE(e.log.aborted);
    EXPECT_NE(e.log.abort_reason.find("expert offline"), std::string::npos);
  }
  OracleContract invalid{[](Index) { return 7; }, 0};
  EXPECT_THROW(selftrain_run(base, f.seed_x, {1, 2}, 2, f.stream, invalid, SelftrainConfig{}), SelftrainAborted);
}

TEST(Selftrain, RejectsSeedsMissingAClass) {
  Fixture f;
  testing::TableClassifier base(f.table);
  OracleContract oracle{[](Index) { return 1; }, 0};
  EXPECT_THROW(selftrain_run(base, f.seed_x, {1, 1}, 2, f.stream, oracle, SelftrainConfig{}), ValidationError);
  OracleContract unset;
  EXPECT_THROW(selftrain_run(base, f.seed_x, {1, 2}, 2, f.stream, unset, SelftrainConfig{}), ValidationError);
}

TEST(Selftrain, RealModelConservesTheStream) {
  const Dataset d = gen_four_gaussians(25, 0.2, 8);
  std::vector<Index> seed_rows, stream_rows;
  for (Index i = 0; i < d.size(); ++i) (i % 25 < 2 ? seed_rows : stream_rows).push_back(i);
  const Dataset s = d.subset(seed_rows), u = d.subset(stream_rows);
  std::vector<int> sy;
  for (const auto& l : s.labels) sy.push_back(*l);
  OracleContract truth{[&](Index j) { return *u.labels[static_cast<std::size_t>(j)]; }, 0};
  ClassifierSpec spec;
  spec.kind = "linreg";
  const SelftrainResult r = selftrain_run(*make_classifier(spec), s.features, sy, 4, u.features, truth, SelftrainConfig{});
  std::string why;
  EXPECT_TRUE(testing::audit_conserved(r.log, u.size(), s.size(), 5, &why)) << why;
  const std::string csv = audit_to_csv(r.log);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "item,pass,scenario,confidence,oracle,label");
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), r.log.outcomes.size() + 1);
}

}  // namespace
}  // namespace semisup
