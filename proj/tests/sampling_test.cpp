#include "support.hpp"

#include "semisup/sampling.hpp"

#include <gtest/gtest.h>

#include <set>

namespace semisup {
namespace {

TEST(KennardStone, StartsFromTheFarthestPair) {
  Matrix x(4, 1);
  x << 0.0, 5.0, 1.0, 2.5;
  const SamplingPlan p = kennard_stone(x, 4);
  EXPECT_EQ(p.selected, (std::vector<Index>{0, 1, 3, 2}));
  EXPECT_EQ(p.audit, (std::vector<double>{5.0, 2.5, 1.0}));
}

TEST(KennardStone, MaxMinSequenceNeverIncreases) {
  Rng rng(31);
  for (int t = 0; t < 20; ++t) {
    const Matrix x = testing::random_matrix(30, 2, rng);
    for (const KsStart s : {KsStart::MaxPair, KsStart::NearestMean}) {
      const SamplingPlan p = kennard_stone(x, 30, s);
      EXPECT_EQ(std::set<Index>(p.selected.begin(), p.selected.end()).size(), 30U);
      for (std::size_t i = 1; i < p.audit.size(); ++i) EXPECT_LE(p.audit[i], p.audit[i - 1]);
    }
  }
}

TEST(KennardStone, NearestMeanStartsAtTheCentre) {
  Matrix x(3, 1);
  x << -1.0, 0.1, 1.0;
  EXPECT_EQ(kennard_stone(x, 2, KsStart::NearestMean).selected.front(), 1);
}

TEST(Kmeans, BestRestartMatchesExhaustiveOptimum) {
  Rng rng(32);
  for (int t = 0; t < 10; ++t) {
    const Matrix x = testing::random_matrix(9, 2, rng);
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t s = 0; s < 10; ++s) best = std::min(best, kmeans(x, 2, Metric::SqEuclidean, s).objective);
    EXPECT_NEAR(best, testing::exhaustive_two_means(x), 1e-9);
  }
}

TEST(Kmeans, ObjectiveTraceNeverIncreases) {
  const Dataset d = gen_four_gaussians(50, 0.2, 3);
  for (const Metric m : {Metric::SqEuclidean, Metric::Euclidean, Metric::L1, Metric::Cosine}) {
    const ClusterResult r = kmeans(d.features, 4, m, 1);
    for (std::size_t i = 1; i < r.objective_trace.size(); ++i)
      EXPECT_LE(r.objective_trace[i], r.objective_trace[i - 1] + 1e-12) << to_string(m);
    EXPECT_NEAR(r.objective, cluster_objective(d.features, r.assignment, r.centroids, m), 1e-9);
    EXPECT_EQ(r.k(), 4);
  }
}

TEST(Kmeans, L1PrototypesAreMedians) {
  Matrix x(3, 1);
  x << 0.0, 1.0, 10.0;
  const ClusterResult r = kmeans(x, 1, Metric::L1, 0);
  EXPECT_DOUBLE_EQ(r.centroids(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(r.objective, 10.0);
}

TEST(Heuristics, ClusterCountAndQuota) {
  EXPECT_EQ(heuristic_cluster_count(2800), 38);
  EXPECT_EQ(heuristic_cluster_quota(2800, 38), 73);
  EXPECT_EQ(heuristic_cluster_count(2), 1);
  EXPECT_EQ(heuristic_cluster_count(8), 2);
  EXPECT_EQ(heuristic_cluster_count(9), 3);
}

TEST(Optics, FourSeparatedCloudsGiveFourValleys) {
  const Dataset d = gen_four_gaussians(50, 0.03, 4);
  const ReachabilityProfile prof = optics(d.features, 5);
  ASSERT_EQ(prof.ordering.size(), 200U);
  EXPECT_EQ(std::set<Index>(prof.ordering.begin(), prof.ordering.end()).size(), 200U);
  EXPECT_EQ(prof.reachability.front(), kUndefined);
  const auto valleys = optics_valleys(prof, 10);
  ASSERT_EQ(valleys.size(), 4U);
  for (const auto& v : valleys) {
    std::set<int> classes;
    for (Index i : v) classes.insert(*d.labels[static_cast<std::size_t>(i)]);
    EXPECT_EQ(classes.size(), 1U);
  }
}

TEST(Optics, CoreDistanceExcludesThePointItself) {
  Matrix x(3, 1);
  x << 0.0, 1.0, 3.0;
  const ReachabilityProfile prof = optics(x, 2);
  EXPECT_DOUBLE_EQ(prof.core_distances[0], 3.0);
  EXPECT_DOUBLE_EQ(prof.core_distances[1], 2.0);
  const ReachabilityProfile tight = optics(x, 2, 2.5);
  EXPECT_EQ(tight.core_distances[0], kUndefined);
}

// Undefined reachability does not count as a neighbour value.
TEST(Optics, ExtremaIgnoreTheEnds) {
  ReachabilityProfile prof;
  prof.ordering = {0, 1, 2, 3, 4, 5, 6};
  prof.reachability = {kUndefined, 1.0, 3.0, 1.0, 0.5, 2.0, 9.0};
  const Extrema e = optics_extrema(prof, 1);
  EXPECT_EQ(e.maxima, (std::vector<Index>{2}));
  EXPECT_EQ(e.minima, (std::vector<Index>{1, 4}));
}

TEST(Smrs, ConstraintHoldsAndRepresentativesSpanTheData) {
  Rng rng(33);
  for (int t = 0; t < 5; ++t) {
    const Matrix x = testing::random_matrix(40, 3, rng);
    const SmrsResult r = smrs(x);
    EXPECT_LE(r.constraint_residual, 1e-4);
    EXPECT_TRUE(r.plan.converged);
    EXPECT_FALSE(r.plan.selected.empty());
    EXPECT_DOUBLE_EQ(r.lambda, 0.5 * r.lambda_max);
    for (std::size_t i = 1; i < r.plan.selected.size(); ++i)
      EXPECT_GE(r.row_norms[r.plan.selected[i - 1]], r.row_norms[r.plan.selected[i]]);
  }
}

TEST(Smrs, ConvexHullVerticesAreRepresentatives) {
  // Square corners plus interior points: only corners are needed.
  Matrix x(9, 2);
  x << 0, 0, 1, 0, 0, 1, 1, 1, 0.5, 0.5, 0.25, 0.5, 0.5, 0.25, 0.75, 0.5, 0.5, 0.75;
  SmrsOptions opt;
  opt.alpha = 0.05;
  opt.tolerance = 1e-7;
  opt.max_iterations = 20000;
  opt.row_threshold = 0.1;
  const SmrsResult r = smrs(x, opt);
  EXPECT_EQ(std::set<Index>(r.plan.selected.begin(), r.plan.selected.end()), (std::set<Index>{0, 1, 2, 3}));
}

TEST(Smrs, IdenticalPointsPickTheFirst) {
  const SmrsResult r = smrs(Matrix::Ones(5, 2));
  EXPECT_EQ(r.plan.selected, (std::vector<Index>{0}));
  EXPECT_EQ(r.constraint_residual, 0.0);
}

TEST(Smrs, RejectsBadOptions) {
  SmrsOptions opt;
  opt.alpha = 0.0;
  EXPECT_THROW(smrs(Matrix::Ones(3, 2), opt), ValidationError);
  EXPECT_THROW(smrs(Matrix::Ones(1, 2)), ValidationError);
}

TEST(Strategies, NamesRoundTrip) {
  EXPECT_EQ(all_strategies().size(), 7U);
  for (const Strategy s : all_strategies()) EXPECT_EQ(parse_strategy(to_string(s)), s);
  EXPECT_THROW(parse_strategy("BOGUS"), ValidationError);
}

TEST(Strategies, EveryStrategyIncludesTheWholeMinority) {
  ImbalancedConfig cfg;
  cfg.n = 300;
  const Dataset d = gen_imbalanced(cfg, 6);
  std::vector<Index> minority;
  for (Index i = 0; i < d.size(); ++i)
    if (d.labels[static_cast<std::size_t>(i)] == 2) minority.push_back(i);
  ASSERT_EQ(minority.size(), 15U);
  for (const Strategy s : all_strategies()) {
    StrategySpec spec;
    spec.strategy = s;
    spec.seed = 3;
    const SamplingPlan p = sample(d, spec);
    const std::set<Index> chosen(p.selected.begin(), p.selected.end());
    EXPECT_EQ(chosen.size(), p.selected.size()) << to_string(s);
    for (Index i : minority) EXPECT_TRUE(chosen.count(i)) << to_string(s);
    EXPECT_TRUE(p.augmented_minority);
  }
}

TEST(Strategies, RandomTakesFortyPercentAndIsSeeded) {
  const Dataset d = gen_four_gaussians(50, 0.2, 1);
  StrategySpec spec;
  spec.augment = AugmentPolicy::None;
  spec.seed = 4;
  const SamplingPlan a = sample(d, spec);
  EXPECT_EQ(a.selected.size(), 80U);
  EXPECT_EQ(a.selected, sample(d, spec).selected);
  spec.seed = 5;
  EXPECT_NE(a.selected, sample(d, spec).selected);
}

TEST(Strategies, KmeansRandomTakesQuotaPerCluster) {
  const Dataset d = gen_four_gaussians(50, 0.2, 1);
  StrategySpec spec;
  spec.strategy = Strategy::KmeansRandom;
  spec.augment = AugmentPolicy::None;
  const SamplingPlan p = sample(d, spec);
  const Index k = heuristic_cluster_count(200);
  EXPECT_EQ(k, 10);
  EXPECT_LE(static_cast<Index>(p.selected.size()), k * heuristic_cluster_quota(200, k));
  EXPECT_GT(p.selected.size(), 0U);
}

TEST(Strategies, PlanCsvFlagsAugmentedRows) {
  ImbalancedConfig cfg;
  cfg.n = 100;
  cfg.minority_fraction = 0.1;
  const Dataset d = gen_imbalanced(cfg, 1);
  StrategySpec spec;
  spec.strategy = Strategy::KenStone;
  spec.budget = 5;
  const SamplingPlan p = sample(d, spec);
  const std::string csv = plan_to_csv(p, d);
  EXPECT_NE(csv.find("augmented"), std::string::npos);
  EXPECT_EQ(static_cast<Index>(std::count(csv.begin(), csv.end(), '\n')), static_cast<Index>(p.selected.size()) + 1);
  EXPECT_NE(plan_summary_json(p, d).find("\"augmented_minority\""), std::string::npos);
}

}  // namespace
}  // namespace semisup
