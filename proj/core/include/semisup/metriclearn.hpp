#pragma once

#include "semisup/dataset.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace semisup {

/// Symmetric PSD d x d matrix defining d_A(x, y) = sqrt((x-y)^T A (x-y)).
struct MetricMatrix {
  Matrix a;

  static MetricMatrix identity(Index d);
  /// Symmetric within 1e-12, min eigenvalue >= -1e-9, trace <= cap + 1e-9.
  void validate(double trace_cap) const;
  double min_eigenvalue() const;
};

double mahalanobis(const MetricMatrix& m, const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y);

using IndexPair = std::pair<Index, Index>;

struct ConstraintSets {
  std::vector<IndexPair> similar;
  std::vector<IndexPair> dissimilar;

  void validate(Index n) const;
};

/// W_ij = 1 iff i is among j's k nearest or j among i's; zero diagonal.
Matrix knn_indicator(const Matrix& points, Index k);

struct DmlConfig {
  double gamma_s = 1.0;
  double gamma_d = 1.0;
  Index k = 5;
  double trace_cap = 0.0;   // <= 0 means d
  double step = 1.0;
  double backtrack = 0.5;
  double relative_tolerance = 1e-6;
  int max_iterations = 500;
};

struct DmlResult {
  MetricMatrix metric;
  std::vector<double> objective_trace;  // A0 and every accepted iterate
  std::vector<double> min_eigenvalues;  // per accepted iterate
  std::vector<double> traces;           // per accepted iterate
  int iterations = 0;
  bool converged = false;
};

/// Linear objective gamma_S sum_S |xi-xj|_A^2 - gamma_D sum_D |xi-xj|_A^2 + tr(X L X^T A).
double dml_objective(const Matrix& points, const ConstraintSets& cs, const DmlConfig& cfg, const Matrix& laplacian,
                     const Matrix& a);

/// Projected gradient from A0 = (cap/d) I: gradient step, symmetrise, clip
/// negative eigenvalues, rescale to the trace cap. Steps that do not lower the
/// objective are halved. The optional observer sees every accepted iterate.
DmlResult dml_fit(const Matrix& points, const ConstraintSets& cs, const DmlConfig& cfg,
                  const std::function<void(const MetricMatrix&)>& observer = {});

struct FeedbackWeights {
  Vector positive;
  Vector negative;
};

/// w_i = r_i / |R| normalised to sum 1.
Vector feedback_weights(const std::vector<int>& ranks);
FeedbackWeights feedback_weights(const std::vector<int>& positive_ranks, const std::vector<int>& negative_ranks);

inline constexpr double kDistanceFloor = 1e-9;

struct RankingResult {
  Vector score;                // per sample; annotated samples hold NaN
  std::vector<Index> order;    // unannotated samples by descending score, ties by index
  std::vector<Index> retrieved;
  double threshold = 0.0;      // smallest retrieved score
};

/// r_j = sum_P 1/(w_i max(d_A, floor)) - sum_N 1/(w_i max(d_A, floor)) over unannotated j.
RankingResult rank_images(const Matrix& points, const std::vector<Index>& positive, const std::vector<Index>& negative,
                          const FeedbackWeights& weights, const MetricMatrix& metric, Index top_n = 16);

std::string metric_to_csv(const MetricMatrix& m);
MetricMatrix metric_from_csv(const std::string& text);
void save_metric(const MetricMatrix& m, const std::filesystem::path& path);
MetricMatrix load_metric(const std::filesystem::path& path);

/// sample_id, score, retrieved (annotated samples are omitted).
std::string ranking_to_csv(const RankingResult& r, const std::vector<std::string>& sample_ids);

}  // namespace semisup
