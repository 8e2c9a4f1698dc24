#pragma once

#include "semisup/classify.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace semisup {

/// (v1 - v2) / |v1| for the two largest scores; 0 when v1 == 0.
double confidence(const Eigen::Ref<const Vector>& scores);

struct DecisionThresholds {
  double high = 0.6;
  double low = 0.2;
  double final_high = 0.4;

  /// 0 <= low <= final_high <= high <= 1.
  void validate() const;
  /// max(final_high, high * r^pass) with r = (final_high / high)^(1 / passes).
  double high_at(int pass, int passes) const;
  /// high_at(0..passes): passes + 1 values from high down to final_high.
  std::vector<double> trajectory(int passes) const;
};

/// Refinement from raw similarities: min-max normalise, cluster the
/// normalised values into `class_count` groups, and add the similarity-weighted
/// outputs of the group with the largest mean similarity to `base`.
/// If all similarities are equal the raw values are used with every point.
struct Refinement {
  Vector scores;
  std::vector<Index> members;     // rows contributing to the sum
  std::vector<double> similarity; // weight actually used per row
  std::vector<std::string> warnings;
};
Refinement refine_from_similarities(const Vector& base, const Vector& similarities, const Matrix& outputs,
                                    int class_count, std::uint64_t seed = 0);

/// Similarity 1 / (1 + d(u, l_i)) under `metric`, then refine_from_similarities.
Refinement similarity_refine(const Eigen::Ref<const Vector>& u, const Vector& base, const Matrix& labeled,
                             const Matrix& outputs, int class_count, Metric metric = Metric::Euclidean,
                             std::uint64_t seed = 0);

/// True when any of the k nearest labeled rows is positive.
bool any_positive_rule(const Eigen::Ref<const Vector>& u, const Matrix& labeled, const std::vector<bool>& positive,
                       Index k);

struct ConsensusResult {
  std::vector<bool> positive;
  Vector score;        // weighted positive vote per sample
  Matrix votes;        // n x metrics, 1 = positive under that metric
  std::vector<std::string> log;
};

/// Two-means per metric, the smaller cluster voting positive (equal sizes:
/// the cluster whose centroid has the smaller norm). Positive iff weighted vote > 0.5.
ConsensusResult consensus_init(const Matrix& points, const std::vector<Metric>& metrics,
                               const std::vector<double>& weights, std::uint64_t seed);

struct ScenarioOutcome {
  Index item = 0;             // position in the unlabeled stream
  std::string sample_id;
  int pass = 0;
  int scenario = 0;           // 1, 2 or 3
  double confidence = 0.0;
  double threshold = 0.0;
  Vector base_output;
  std::optional<Vector> refined_output;
  int resolved_label = 0;
  bool oracle_queried = false;
};

struct AuditLog {
  std::vector<ScenarioOutcome> outcomes;
  std::vector<double> thresholds;       // high threshold used by each pass, then the final value
  std::vector<Index> seed_pool_sizes;   // after each pass
  std::vector<Index> pseudo_pool_sizes; // after each pass
  std::vector<Index> items_per_pass;    // stream items still unresolved at pass start
  bool aborted = false;
  std::string abort_reason;
};

std::string audit_to_csv(const AuditLog& log);
void save_audit(const AuditLog& log, const std::filesystem::path& path);

/// Expert labelling callback with a query counter.
struct OracleContract {
  std::function<int(Index item)> label;
  int queries = 0;
};

class SelftrainAborted : public RuntimeError {
 public:
  SelftrainAborted(const std::string& what, AuditLog partial) : RuntimeError(what), log(std::move(partial)) {}
  AuditLog log;
};

struct SelftrainConfig {
  DecisionThresholds thresholds;
  int passes = 5;
  Metric metric = Metric::Euclidean;
  std::uint64_t seed = 0;
};

struct SelftrainResult {
  std::unique_ptr<Classifier> model;
  AuditLog log;
  std::vector<Index> seed_items;            // stream items labeled by the oracle
  std::vector<std::optional<int>> pseudo;   // current pseudo label per stream item
};

/// Dual-classifier self-training over an ordered unlabeled stream. Scenario 1
/// pseudo-labels, scenario 2 refines and pseudo-labels on argmax agreement,
/// scenario 3 asks the oracle and grows the seed pool. The model is retrained
/// on seed + pseudo pools after every pass. Oracle failures throw SelftrainAborted.
SelftrainResult selftrain_run(const Classifier& base, const Matrix& seed_x, const std::vector<int>& seed_y,
                              int class_count, const Matrix& stream, OracleContract& oracle,
                              const SelftrainConfig& cfg, const std::vector<std::string>& stream_ids = {});

}  // namespace semisup
