#include "semisup/propagation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace semisup {

double simplex_volume(const Matrix& points, const std::vector<Index>& vertices) {
  const auto beta = static_cast<Index>(vertices.size());
  if (beta < 2) return 0.0;
  Matrix edges(beta - 1, points.cols());
  for (Index j = 1; j < beta; ++j)
    edges.row(j - 1) = points.row(vertices[static_cast<std::size_t>(j)]) - points.row(vertices[0]);
  Matrix gram = edges * edges.transpose();
  gram.diagonal().array() += kSimplexRidge;
  const double det = std::abs(gram.determinant());
  return std::sqrt(det) / std::tgamma(static_cast<double>(beta));
}

namespace {

AnchorSet swap_search(const Matrix& points, Index beta, std::uint64_t seed) {
  const Index n = points.rows();
  std::vector<Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Index{0});
  Rng rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  AnchorSet set;
  set.beta = beta;
  set.indices.assign(all.begin(), all.begin() + beta);
  std::sort(set.indices.begin(), set.indices.end());
  set.volume = simplex_volume(points, set.indices);
  set.volume_trace.push_back(set.volume);

  bool swapped = true;
  while (swapped) {
    swapped = false;
    for (Index cand = 0; cand < n; ++cand) {
      if (std::find(set.indices.begin(), set.indices.end(), cand) != set.indices.end()) continue;
      double best = set.volume;
      Index best_slot = -1;
      for (Index slot = 0; slot < beta; ++slot) {
        auto trial = set.indices;
        trial[static_cast<std::size_t>(slot)] = cand;
        const double v = simplex_volume(points, trial);
        if (v > best) {
          best = v;
          best_slot = slot;
        }
      }
      if (best_slot >= 0 && best - set.volume > 1e-12 * set.volume && best > set.volume) {
        set.indices[static_cast<std::size_t>(best_slot)] = cand;
        set.volume = best;
        set.volume_trace.push_back(best);
        swapped = true;
      }
    }
  }
  return set;
}

AnchorSet incremental_search(const Matrix& points, Index beta) {
  const Index n = points.rows();
  AnchorSet set;
  set.beta = beta;
  // Seed with the farthest pair (the best 2-vertex simplex).
  double far = -1.0;
  Index a = 0, b = 1;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const double d = (points.row(i) - points.row(j)).squaredNorm();
      if (d > far) {
        far = d;
        a = i;
        b = j;
      }
    }
  set.indices = {a, b};
  set.volume = simplex_volume(points, set.indices);
  set.volume_trace.push_back(set.volume);
  while (static_cast<Index>(set.indices.size()) < beta) {
    double best = -1.0;
    Index pick = -1;
    for (Index cand = 0; cand < n; ++cand) {
      if (std::find(set.indices.begin(), set.indices.end(), cand) != set.indices.end()) continue;
      auto trial = set.indices;
      trial.push_back(cand);
      const double v = simplex_volume(points, trial);
      if (v > best) {
        best = v;
        pick = cand;
      }
    }
    set.indices.push_back(pick);
    set.volume = best;
    set.volume_trace.push_back(best);
  }
  return set;
}

}  // namespace

AnchorSet select_anchors(const Matrix& points, Index beta, std::uint64_t seed, AnchorSearch mode) {
  if (beta < 2) throw ValidationError("select_anchors: beta must be >= 2");
  if (beta > points.rows())
    throw ValidationError("select_anchors: beta = " + std::to_string(beta) + " exceeds class size " +
                          std::to_string(points.rows()));
  return mode == AnchorSearch::Swap ? swap_search(points, beta, seed) : incremental_search(points, beta);
}

ClassAnchors select_class_anchors(const Dataset& d, Index beta, std::uint64_t seed, AnchorSearch mode) {
  ClassAnchors out;
  for (int c = 1; c <= d.class_count; ++c) {
    std::vector<Index> rows;
    for (Index i = 0; i < d.size(); ++i)
      if (d.labels[static_cast<std::size_t>(i)] == c) rows.push_back(i);
    if (rows.empty()) continue;
    Matrix pts(static_cast<Index>(rows.size()), d.dim());
    for (std::size_t r = 0; r < rows.size(); ++r) pts.row(static_cast<Index>(r)) = d.features.row(rows[r]);
    const Index b = std::min<Index>(beta, static_cast<Index>(rows.size()));
    AnchorSet set;
    if (b >= 2) {
      set = select_anchors(pts, b, seed + static_cast<std::uint64_t>(c), mode);
    } else {
      set.indices = {0};
      set.beta = 1;
    }
    for (auto& idx : set.indices) {
      idx = rows[static_cast<std::size_t>(idx)];
      out.indices.push_back(idx);
      out.anchor_class.push_back(c);
    }
    out.per_class.push_back(std::move(set));
  }
  return out;
}

}  // namespace semisup
