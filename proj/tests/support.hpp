#pragma once

#include "semisup/classify.hpp"
#include "semisup/eval.hpp"
#include "semisup/graph.hpp"
#include "semisup/selftrain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace semisup::testing {

// Entries uniform in [-1, 1].
inline Matrix random_matrix(Index rows, Index cols, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = u(rng);
  return m;
}

// Connected random graph: a random spanning tree plus extra edges.
inline Matrix random_connected_weights(Index n, Rng& rng, double extra_p = 0.2) {
  std::uniform_real_distribution<double> w(0.05, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix a = Matrix::Zero(n, n);
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::shuffle(order.begin(), order.end(), rng);
  for (Index i = 1; i < n; ++i) {
    std::uniform_int_distribution<Index> pick(0, i - 1);
    const Index p = order[static_cast<std::size_t>(pick(rng))];
    const Index q = order[static_cast<std::size_t>(i)];
    a(p, q) = a(q, p) = w(rng);
  }
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (a(i, j) == 0.0 && u(rng) < extra_p) a(i, j) = a(j, i) = w(rng);
  return a;
}

// Random labels with at least one labeled node; every class id in 1..c.
inline LabelVector random_labels(Index n, int c, Rng& rng, double labeled_p = 0.3) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> cls(1, c);
  LabelVector labels(static_cast<std::size_t>(n));
  for (auto& l : labels)
    if (u(rng) < labeled_p) l = cls(rng);
  if (std::none_of(labels.begin(), labels.end(), [](const auto& l) { return l.has_value(); }))
    labels[static_cast<std::size_t>(std::uniform_int_distribution<Index>(0, n - 1)(rng))] = cls(rng);
  return labels;
}

// Fixed-point sweep f_i <- sum_j w_ij f_j / d_i over unlabeled nodes.
inline Matrix gauss_seidel_harmonic(const Matrix& w, const LabelVector& labels, int c, double tol = 1e-14,
                                    int max_sweeps = 1000000) {
  const Index n = w.rows();
  Matrix f = Matrix::Zero(n, c);
  for (Index i = 0; i < n; ++i)
    if (labels[static_cast<std::size_t>(i)]) f(i, *labels[static_cast<std::size_t>(i)] - 1) = 1.0;
  const Vector d = w.rowwise().sum();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double change = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (labels[static_cast<std::size_t>(i)]) continue;
      const Eigen::RowVectorXd next = w.row(i) * f / d[i];
      change = std::max(change, (next - f.row(i)).cwiseAbs().maxCoeff());
      f.row(i) = next;
    }
    if (change < tol) break;
  }
  return f;
}

// Exhaustive two-cluster optimum of the squared-Euclidean k-means objective.
inline double exhaustive_two_means(const Matrix& x) {
  const Index n = x.rows();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << (n - 1)); ++mask) {
    double total = 0.0;
    for (int side = 0; side < 2; ++side) {
      Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(x.cols());
      Index count = 0;
      for (Index i = 0; i < n; ++i)
        if (((mask >> i) & 1U) == static_cast<std::uint64_t>(side)) {
          mean += x.row(i);
          ++count;
        }
      mean /= static_cast<double>(count);
      for (Index i = 0; i < n; ++i)
        if (((mask >> i) & 1U) == static_cast<std::uint64_t>(side)) total += (x.row(i) - mean).squaredNorm();
    }
    best = std::min(best, total);
  }
  return best;
}

// Fraction of (positive, negative) pairs ordered correctly, ties as 1/2.
inline double pair_counting_auc(const std::vector<double>& s, const std::vector<bool>& pos) {
  double good = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!pos[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (pos[j]) continue;
      pairs += 1.0;
      if (s[i] > s[j]) good += 1.0;
      else if (s[i] == s[j]) good += 0.5;
    }
  }
  return good / pairs;
}

// Base model with engineered scores: row r of the table answers inputs whose
// first coordinate equals r. Training data is ignored.
class TableClassifier : public Classifier {
 public:
  explicit TableClassifier(Matrix table) : table_(std::move(table)) {}
  void fit(const Matrix&, const std::vector<int>&, int, const Vector&, const Matrix&) override { ++fits_; }
  Matrix score(const Matrix& x) const override {
    Matrix out(x.rows(), table_.cols());
    for (Index i = 0; i < x.rows(); ++i) out.row(i) = table_.row(static_cast<Index>(std::lround(x(i, 0))));
    return out;
  }
  std::unique_ptr<Classifier> clone() const override { return std::make_unique<TableClassifier>(*this); }
  std::string name() const override { return "table"; }
  int fits() const { return fits_; }

 private:
  Matrix table_;
  int fits_ = 0;
};

// Every stream item is resolved exactly once per pass, oracle items leave the
// stream, and the pools account for the whole stream after each pass.
inline bool audit_conserved(const AuditLog& log, Index stream_size, Index initial_seed, int passes,
                            std::string* why = nullptr) {
  const auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  if (static_cast<int>(log.items_per_pass.size()) != passes) return fail("items_per_pass length");
  if (static_cast<int>(log.thresholds.size()) != passes + 1) return fail("thresholds length");
  std::vector<bool> seeded(static_cast<std::size_t>(stream_size), false);
  Index oracle_total = 0;
  std::size_t at = 0;
  for (int p = 0; p < passes; ++p) {
    Index expected = 0;
    for (Index j = 0; j < stream_size; ++j) expected += seeded[static_cast<std::size_t>(j)] ? 0 : 1;
    if (log.items_per_pass[static_cast<std::size_t>(p)] != expected) return fail("items at pass start");
    Index seen = 0;
    while (at < log.outcomes.size() && log.outcomes[at].pass == p) {
      const auto& o = log.outcomes[at++];
      ++seen;
      if (o.scenario < 1 || o.scenario > 3) return fail("scenario id");
      if (seeded[static_cast<std::size_t>(o.item)]) return fail("seeded item revisited");
      if (o.oracle_queried != (o.scenario == 3)) return fail("oracle flag");
      if (o.scenario == 3) {
        seeded[static_cast<std::size_t>(o.item)] = true;
        ++oracle_total;
      }
    }
    if (seen != expected) return fail("outcome count");
    if (log.seed_pool_sizes[static_cast<std::size_t>(p)] != initial_seed + oracle_total) return fail("seed pool size");
    if (log.pseudo_pool_sizes[static_cast<std::size_t>(p)] + oracle_total != stream_size)
      return fail("pseudo + oracle != stream");
  }
  return at == log.outcomes.size() || fail("trailing outcomes");
}

}  // namespace semisup::testing
