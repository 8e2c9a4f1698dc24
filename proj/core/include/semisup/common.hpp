#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace semisup {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Deterministic engine used everywhere randomness appears. All randomness is
/// seeded explicitly by the caller.
using Rng = std::mt19937_64;

/// Per-sample class assignment. Class ids are 1-based; std::nullopt = unlabeled.
using LabelVector = std::vector<std::optional<int>>;

/// Input violates a documented precondition.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input file (carries row/column context in the message).
class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Numerical or algorithmic failure at run time (singular system, disconnected graph...).
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Metric { SqEuclidean, Euclidean, L1, Cosine };

Metric parse_metric(const std::string& name);
std::string to_string(Metric m);

/// Distance between two rows under `m`. Cosine distance is 1 - cos(angle);
/// a zero vector is treated as orthogonal to everything.
double distance(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b, Metric m);

/// n x n matrix of Euclidean distances between the rows of `points`.
Matrix pairwise_distances(const Matrix& points);

/// n x n matrix of squared Euclidean distances between the rows of `points`.
Matrix pairwise_sq_distances(const Matrix& points);

/// Row indices of `reference` sorted by distance to `query`, ties broken by
/// smaller index. Only the first `k` are returned (all when k >= rows).
std::vector<Index> nearest_rows(const Matrix& reference, const Eigen::Ref<const Vector>& query,
                                Index k, Metric m = Metric::Euclidean,
                                std::optional<Index> exclude = std::nullopt);

/// Decimal text with 17 significant digits (round-trips any double).
std::string format_real(double value);

/// Index of the largest entry, ties resolved toward the smaller index.
Index argmax_first(const Eigen::Ref<const Vector>& v);

/// One-hot encoding of labels into an n x c matrix; unlabeled rows are zero.
Matrix one_hot(const LabelVector& labels, int class_count);

}  // namespace semisup
