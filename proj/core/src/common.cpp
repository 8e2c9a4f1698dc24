#include "semisup/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace semisup {

Metric parse_metric(const std::string& name) {
  if (name == "sqeuclid" || name == "sqeuclidean") return Metric::SqEuclidean;
  if (name == "euclid" || name == "euclidean") return Metric::Euclidean;
  if (name == "l1" || name == "manhattan") return Metric::L1;
  if (name == "cosine") return Metric::Cosine;
  throw ValidationError("unknown metric '" + name + "'");
}

std::string to_string(Metric m) {
  switch (m) {
    case Metric::SqEuclidean: return "sqeuclid";
    case Metric::Euclidean: return "euclid";
    case Metric::L1: return "l1";
    case Metric::Cosine: return "cosine";
  }
  return "unknown";
}

double distance(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b, Metric m) {
  if (a.size() != b.size()) throw ValidationError("distance: dimension mismatch");
  switch (m) {
    case Metric::SqEuclidean: return (a - b).squaredNorm();
    case Metric::Euclidean: return (a - b).norm();
    case Metric::L1: return (a - b).lpNorm<1>();
    case Metric::Cosine: {
      const double na = a.norm();
      const double nb = b.norm();
      if (na == 0.0 || nb == 0.0) return 1.0;
      return 1.0 - a.dot(b) / (na * nb);
    }
  }
  return 0.0;
}

Matrix pairwise_sq_distances(const Matrix& points) {
  const Index n = points.rows();
  Matrix d(n, n);
  for (Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (Index j = i + 1; j < n; ++j) {
      const double v = (points.row(i) - points.row(j)).squaredNorm();
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

Matrix pairwise_distances(const Matrix& points) {
  return pairwise_sq_distances(points).cwiseSqrt();
}

std::vector<Index> nearest_rows(const Matrix& reference, const Eigen::Ref<const Vector>& query,
                                Index k, Metric m, std::optional<Index> exclude) {
  const Index n = reference.rows();
  std::vector<double> dist(static_cast<std::size_t>(n));
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    if (exclude && *exclude == i) continue;
    dist[static_cast<std::size_t>(i)] = distance(reference.row(i).transpose(), query, m);
    order.push_back(i);
  }
  const auto less = [&](Index a, Index b) {
    const double da = dist[static_cast<std::size_t>(a)];
    const double db = dist[static_cast<std::size_t>(b)];
    return da < db || (da == db && a < b);
  };
  const auto keep = std::min<std::size_t>(static_cast<std::size_t>(std::max<Index>(k, 0)), order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(), less);
  order.resize(keep);
  return order;
}

std::string format_real(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

Index argmax_first(const Eigen::Ref<const Vector>& v) {
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

Matrix one_hot(const LabelVector& labels, int class_count) {
  Matrix y = Matrix::Zero(static_cast<Index>(labels.size()), class_count);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!labels[i]) continue;
    const int c = *labels[i];
    if (c < 1 || c > class_count) {
      throw ValidationError("label " + std::to_string(c) + " at sample " + std::to_string(i) +
                            " outside 1.." + std::to_string(class_count));
    }
    y(static_cast<Index>(i), c - 1) = 1.0;
  }
  return y;
}

}  // namespace semisup
