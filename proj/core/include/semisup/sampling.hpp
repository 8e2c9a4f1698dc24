#pragma once

#include "semisup/dataset.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace semisup {

/// Ordered training-subset selection with audit data.
struct SamplingPlan {
  std::vector<Index> selected;  // distinct, in selection order
  std::string strategy;
  std::map<std::string, std::string> parameters;
  bool augmented_minority = false;
  Index minority_added = 0;
  double seconds = 0.0;
  bool converged = true;
  std::vector<std::string> warnings;
  /// Strategy-specific audit trail (Kennard-Stone: max-min distance per pick).
  std::vector<double> audit;
};

enum class KsStart { MaxPair, NearestMean };

/// Kennard-Stone: seed with the farthest pair (or the point closest to the
/// mean), then repeatedly add the candidate whose distance to the selected set
/// is largest. Ties go to the smaller index. `audit` holds the winning min-distance per step.
SamplingPlan kennard_stone(const Matrix& points, Index m, KsStart start = KsStart::MaxPair);

struct ClusterResult {
  std::vector<Index> assignment;  // 1..k
  Matrix centroids;               // k x d
  double objective = 0.0;
  Metric metric = Metric::SqEuclidean;
  int iterations = 0;
  std::vector<double> objective_trace;  // after each assignment step
  Index k() const { return centroids.rows(); }
};

/// Lloyd iterations from k-means++ seeding. SQEUCLID/EUCLID prototypes are
/// means, L1 prototypes coordinate-wise medians, COSINE prototypes normalised
/// means. Empty clusters steal the farthest point of the largest cluster.
ClusterResult kmeans(const Matrix& points, Index k, Metric metric, std::uint64_t seed, int max_iterations = 300);

/// Sum over samples of distance to the assigned prototype.
double cluster_objective(const Matrix& points, const std::vector<Index>& assignment, const Matrix& centroids,
                         Metric metric);

inline constexpr double kUndefined = std::numeric_limits<double>::infinity();

struct ReachabilityProfile {
  std::vector<Index> ordering;          // permutation of 0..n-1
  std::vector<double> reachability;     // by ordering position; kUndefined when undefined
  std::vector<double> core_distances;   // by sample index; kUndefined when not a core point
  Index minpts = 0;
  double epsilon = kUndefined;
};

/// OPTICS ordering. The core distance of p is the distance to its minpts-th
/// nearest other point, when that lies within epsilon. Seeds are taken
/// by smallest reachability, ties by sample index; unprocessed points restart
/// from the smallest index.
ReachabilityProfile optics(const Matrix& points, Index minpts, double epsilon = kUndefined);

/// Ordering positions (not sample indices) whose finite reachability is a strict
/// local maximum or minimum within +-window positions; the first and last
/// positions never qualify.
struct Extrema {
  std::vector<Index> maxima;
  std::vector<Index> minima;
  std::vector<std::string> warnings;
};
Extrema optics_extrema(const ReachabilityProfile& profile, Index window = 3);

/// Sample indices of the extrema (maxima and minima merged in ordering order).
std::vector<Index> optics_extrema_samples(const ReachabilityProfile& profile, Index window = 3);

/// Clusters as runs of the ordering between consecutive local maxima.
std::vector<std::vector<Index>> optics_valleys(const ReachabilityProfile& profile, Index window = 3);

struct SmrsOptions {
  double alpha = 0.5;           // lambda = alpha * lambda_max
  double tolerance = 1e-4;
  int max_iterations = 1000;
  double row_threshold = 0.01;  // representative if row norm >= threshold * max row norm
  double penalty = 10.0;        // ADMM step parameter
};

struct SmrsResult {
  SamplingPlan plan;
  Matrix coefficients;           // C, n x n
  Vector row_norms;
  double lambda = 0.0;
  double lambda_max = 0.0;
  double constraint_residual = 0.0;  // |1^T C - 1^T|_inf
  int iterations = 0;
  std::vector<double> objective_trace;
};

/// lambda |C|_{1,2} + 1/2 |X - X C|_F^2 subject to 1^T C = 1^T, solved by ADMM.
/// Columns of X are samples, i.e. X = points^T.
SmrsResult smrs(const Matrix& points, const SmrsOptions& opt = {});

/// Objective value of a coefficient matrix (without the constraint).
double smrs_objective(const Matrix& points, const Matrix& c, double lambda);

enum class Strategy { OpticsExtrema, Smrs, OpticsSmrs, KmeansSmrs, KenStone, Random, KmeansRandom };
Strategy parse_strategy(const std::string& name);
std::string to_string(Strategy s);
const std::vector<Strategy>& all_strategies();

enum class AugmentPolicy { None, Minority, Majority };
AugmentPolicy parse_augment_policy(const std::string& name);

struct StrategySpec {
  Strategy strategy = Strategy::Random;
  std::uint64_t seed = 0;
  double random_fraction = 0.4;
  std::optional<Index> budget;    // Kennard-Stone count; default random_fraction * n
  KsStart ks_start = KsStart::MaxPair;
  std::optional<Index> minpts;    // OPTICS; default ceil(log2 n)
  double epsilon = kUndefined;
  Index window = 3;
  SmrsOptions smrs;
  AugmentPolicy augment = AugmentPolicy::Minority;
};

/// k = ceil(sqrt(n / 2)).
Index heuristic_cluster_count(Index n);
/// m_c = floor(n / k).
Index heuristic_cluster_quota(Index n, Index k);
Index default_minpts(Index n);

/// Runs one of the seven named strategies on `d` and appends every labeled
/// sample of the augmentation class (fewest labeled members by default).
SamplingPlan sample(const Dataset& d, const StrategySpec& spec);

/// CSV rows: position, sample_id, strategy, flags ("augmented" for appended rows).
std::string plan_to_csv(const SamplingPlan& plan, const Dataset& d);
void save_plan(const SamplingPlan& plan, const Dataset& d, const std::filesystem::path& path);
/// JSON summary with counts per class and sampling seconds.
std::string plan_summary_json(const SamplingPlan& plan, const Dataset& d);

}  // namespace semisup
