#pragma once

#include "semisup/graph.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace semisup {

/// Per-sample per-class real scores from any propagation/classification method.
struct SoftLabelField {
  Matrix scores;             // n x c
  int class_count = 0;
  std::vector<int> hardened; // 1-based argmax per row, ties -> smallest class id
  double ridge = 0.0;        // ridge added to the solve (0 when none was needed)
  std::vector<std::string> warnings;

  Index size() const { return scores.rows(); }
};

/// Row-wise argmax with smallest-id tie break, returned as 1-based class ids.
std::vector<int> harden(const Matrix& scores);

SoftLabelField make_field(Matrix scores);

struct PropagationConfig {
  double gamma = 1.0;    // anchor-graph smoothness weight
  double ridge = 0.0;    // explicit ridge; 0 -> automatic fallback only
  double lambda1 = 1e-3; // ambient (value-norm) penalty of the regularized variant
  double lambda2 = 1.0;  // graph-smoothness penalty of the regularized variant

  void validate() const;
};

/// Harmonic solution: labeled rows keep their one-hot labels, unlabeled rows
/// solve L_uu f_u = W_ul Y_l. A tiny ridge is added when some unlabeled
/// component touches no labeled node (scores there are ~0, with a warning).
SoftLabelField harmonic_solve(const Graph& g, const LabelVector& labels, int class_count);

/// f = (J + lambda1 I + lambda2 L)^-1 J Y with J the labeled-indicator diagonal.
/// Labeled rows are soft constraints and may move away from Y.
SoftLabelField regularized_solve(const Graph& g, const LabelVector& labels, int class_count,
                                 const PropagationConfig& cfg);

enum class AnchorSearch { Swap, Incremental };

/// Simplex-volume representatives for one class.
struct AnchorSet {
  std::vector<Index> indices;  // rows of the input point set
  Index beta = 0;
  double volume = 0.0;
  /// Volume after the initial draw and after every accepted swap / growth step.
  std::vector<double> volume_trace;
};

/// Regularisation added to the Gram matrix so collinear sets stay defined.
inline constexpr double kSimplexRidge = 1e-12;

/// sqrt|det(W W^T + eps I)| / (beta-1)! where W holds v_j - v_1 for j = 2..beta.
double simplex_volume(const Matrix& points, const std::vector<Index>& vertices);

/// Swap mode: seeded random beta-subset, then for every candidate point try
/// it in place of every current anchor and keep the best strict improvement;
/// repeat until a full pass makes no swap. Incremental mode grows from the
/// farthest pair, adding the point maximising the enlarged volume each step.
AnchorSet select_anchors(const Matrix& points, Index beta, std::uint64_t seed,
                         AnchorSearch mode = AnchorSearch::Swap);

/// Anchors of every class among the labeled rows of `d`; indices refer to rows of `d`.
/// beta is clamped to the labeled size of each class.
struct ClassAnchors {
  std::vector<Index> indices;    // all anchors, grouped by class
  std::vector<int> anchor_class; // class id of each anchor
  std::vector<AnchorSet> per_class;
};
ClassAnchors select_class_anchors(const Dataset& d, Index beta, std::uint64_t seed,
                                  AnchorSearch mode = AnchorSearch::Swap);

/// Convex reconstruction weights of every sample from its s nearest anchors.
struct AnchorWeights {
  SparseMatrix z;  // n x m, row-stochastic
  Index s = 0;
};

struct SimplexSolveOptions {
  double tolerance = 1e-8;
  int max_iterations = 500;
};

/// Euclidean projection onto the probability simplex.
Vector project_simplex(const Vector& v);

/// min 1/2 |x - R z|^2 s.t. z >= 0, 1^T z = 1, by projected gradient.
/// `basis` is d x s (anchors as columns).
Vector simplex_least_squares(const Matrix& basis, const Vector& x, const SimplexSolveOptions& opt = {});

AnchorWeights anchor_weights(const Matrix& points, const Matrix& anchors, Index s,
                             const SimplexSolveOptions& opt = {});

/// Anchor-graph propagation: A = (Z^T Z + gamma Z^T L Z)^-1 Z^T Y with the
/// Laplacian of W = Z Lambda^-1 Z^T; sample scores Z_i a_j / lambda_j with
/// lambda_j = 1^T Z a_j. Unlabeled rows of Y are zero.
struct AnchorPropagation {
  SoftLabelField field;
  Matrix anchor_labels;  // m x c
};
AnchorPropagation anchor_propagate(const AnchorWeights& z, const LabelVector& labels, int class_count,
                                   const PropagationConfig& cfg);

/// Soft per-part value to defect code: -1 below -0.5, +1 above 0.5, else 0.
int map_defect(double p);

/// CSV with sample_id, one score column per class and the hardened label.
void save_soft_labels(const SoftLabelField& f, const std::vector<std::string>& sample_ids,
                      const std::filesystem::path& path);
std::string soft_labels_to_csv(const SoftLabelField& f, const std::vector<std::string>& sample_ids);

}  // namespace semisup
