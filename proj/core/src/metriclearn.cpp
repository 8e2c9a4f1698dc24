#include "semisup/metriclearn.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace semisup {

MetricMatrix MetricMatrix::identity(Index d) { return MetricMatrix{Matrix::Identity(d, d)}; }

double MetricMatrix::min_eigenvalue() const {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

void MetricMatrix::validate(double trace_cap) const {
  if (a.rows() != a.cols()) throw ValidationError("metric matrix is not square");
  if (!a.allFinite()) throw ValidationError("metric matrix has non-finite entries");
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw ValidationError("metric matrix is not symmetric");
  if (min_eigenvalue() < -1e-9) throw ValidationError("metric matrix is not positive semidefinite");
  if (trace_cap > 0.0 && a.trace() > trace_cap + 1e-9)
    throw ValidationError("metric matrix trace " + format_real(a.trace()) + " exceeds cap " + format_real(trace_cap));
}

double mahalanobis(const MetricMatrix& m, const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) {
  if (x.size() != y.size() || x.size() != m.a.rows())
    throw ValidationError("mahalanobis: dimension mismatch");
  const Vector diff = x - y;
  return std::sqrt(std::max(0.0, diff.dot(m.a * diff)));
}

void ConstraintSets::validate(Index n) const {
  const auto norm = [](IndexPair p) { return p.first < p.second ? p : IndexPair{p.second, p.first}; };
  std::set<IndexPair> s;
  for (const auto& p : similar) {
    if (p.first < 0 || p.second < 0 || p.first >= n || p.second >= n)
      throw ValidationError("constraints: similar pair index out of range");
    s.insert(norm(p));
  }
  for (const auto& p : dissimilar) {
    if (p.first < 0 || p.second < 0 || p.first >= n || p.second >= n)
      throw ValidationError("constraints: dissimilar pair index out of range");
    if (s.count(norm(p)))
      throw ValidationError("constraints: pair (" + std::to_string(p.first) + "," + std::to_string(p.second) +
                            ") is both similar and dissimilar");
  }
}

Matrix knn_indicator(const Matrix& points, Index k) {
  if (k < 1) throw ValidationError("knn_indicator: k must be >= 1");
  const Index n = points.rows();
  Matrix w = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (const Index j : nearest_rows(points, points.row(i).transpose(), k, Metric::Euclidean, i)) {
      w(i, j) = 1.0;
      w(j, i) = 1.0;
    }
  return w;
}

namespace {

Matrix objective_gradient(const Matrix& points, const ConstraintSets& cs, const DmlConfig& cfg,
                          const Matrix& laplacian) {
  const Index d = points.cols();
  Matrix g = points.transpose() * laplacian * points;
  Matrix sim = Matrix::Zero(d, d), dis = Matrix::Zero(d, d);
  for (const auto& [i, j] : cs.similar) {
    const Vector diff = (points.row(i) - points.row(j)).transpose();
    sim.noalias() += diff * diff.transpose();
  }
  for (const auto& [i, j] : cs.dissimilar) {
    const Vector diff = (points.row(i) - points.row(j)).transpose();
    dis.noalias() += diff * diff.transpose();
  }
  g += cfg.gamma_s * sim - cfg.gamma_d * dis;
  return 0.5 * (g + g.transpose());
}

Matrix graph_laplacian(const Matrix& w) {
  Matrix l = -w;
  l.diagonal() += w.rowwise().sum();
  return l;
}

Matrix project(const Matrix& a, double cap) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (a + a.transpose()));
  const Vector values = eig.eigenvalues().cwiseMax(0.0);
  Matrix p = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
  p = 0.5 * (p + p.transpose()).eval();
  const double tr = p.trace();
  if (tr > cap) p *= cap / tr;
  return p;
}

}  // namespace

double dml_objective(const Matrix& points, const ConstraintSets& cs, const DmlConfig& cfg, const Matrix& laplacian,
                     const Matrix& a) {
  return (objective_gradient(points, cs, cfg, laplacian).cwiseProduct(a)).sum();
}

DmlResult dml_fit(const Matrix& points, const ConstraintSets& cs, const DmlConfig& cfg,
                  const std::function<void(const MetricMatrix&)>& observer) {
  if (cs.similar.empty() || cs.dissimilar.empty())
    throw ValidationError("dml_fit: both similar and dissimilar constraint sets must be nonempty");
  if (!(cfg.gamma_s > 0.0 && cfg.gamma_d > 0.0)) throw ValidationError("dml_fit: gamma_s and gamma_d must be > 0");
  if (cfg.max_iterations < 1) throw ValidationError("dml_fit: max_iterations must be >= 1");
  cs.validate(points.rows());
  const Index d = points.cols();
  const double cap = cfg.trace_cap > 0.0 ? cfg.trace_cap : static_cast<double>(d);
  const Index k = std::min<Index>(cfg.k, points.rows() - 1);
  const Matrix lap = k >= 1 ? graph_laplacian(knn_indicator(points, k)) : Matrix::Zero(points.rows(), points.rows());
  const Matrix g = objective_gradient(points, cs, cfg, lap);
  const auto objective = [&](const Matrix& a) { return g.cwiseProduct(a).sum(); };

  DmlResult out;
  out.metric.a = Matrix::Identity(d, d) * (cap / static_cast<double>(d));
  const auto record = [&](const Matrix& a, double obj) {
    out.objective_trace.push_back(obj);
    MetricMatrix m{a};
    out.min_eigenvalues.push_back(m.min_eigenvalue());
    out.traces.push_back(a.trace());
    m.validate(cap);
    if (observer) observer(m);
  };
  double obj = objective(out.metric.a);
  record(out.metric.a, obj);
  const double gnorm = g.norm();
  if (gnorm == 0.0) {
    out.converged = true;
    return out;
  }
  double step = cfg.step * cap / gnorm;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    Matrix next;
    double next_obj = obj;
    bool accepted = false;
    double t = step;
    for (int tries = 0; tries < 60; ++tries, t *= cfg.backtrack) {
      next = project(out.metric.a - t * g, cap);
      next_obj = objective(next);
      if (next_obj <= obj) {
        accepted = true;
        break;
      }
    }
    out.iterations = it + 1;
    if (!accepted) {
      out.converged = true;
      break;
    }
    const double change = std::abs(obj - next_obj);
    out.metric.a = next;
    record(next, next_obj);
    const double prev = obj;
    obj = next_obj;
    step = t;
    if (change <= cfg.relative_tolerance * std::max(std::abs(prev), 1e-300)) {
      out.converged = true;
      break;
    }
  }
  return out;
}

Vector feedback_weights(const std::vector<int>& ranks) {
  if (ranks.empty()) throw ValidationError("feedback_weights: at least one rank is required");
  const double size = static_cast<double>(ranks.size());
  Vector w(static_cast<Index>(ranks.size()));
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (ranks[i] < 1) throw ValidationError("feedback_weights: ranks must be >= 1");
    w[static_cast<Index>(i)] = ranks[i] / size;
  }
  return w / w.sum();
}

FeedbackWeights feedback_weights(const std::vector<int>& positive_ranks, const std::vector<int>& negative_ranks) {
  return FeedbackWeights{feedback_weights(positive_ranks), feedback_weights(negative_ranks)};
}

RankingResult rank_images(const Matrix& points, const std::vector<Index>& positive, const std::vector<Index>& negative,
                          const FeedbackWeights& weights, const MetricMatrix& metric, Index top_n) {
  const Index n = points.rows();
  if (positive.empty() || negative.empty()) throw ValidationError("rank_images: P and N must be nonempty");
  if (weights.positive.size() != static_cast<Index>(positive.size()) ||
      weights.negative.size() != static_cast<Index>(negative.size()))
    throw ValidationError("rank_images: one weight per annotation is required");
  if (metric.a.rows() != points.cols()) throw ValidationError("rank_images: metric dimension mismatch");
  if (top_n < 1) throw ValidationError("rank_images: top_n must be >= 1");
  std::vector<bool> annotated(static_cast<std::size_t>(n), false);
  for (const Index i : positive) {
    if (i < 0 || i >= n) throw ValidationError("rank_images: positive index out of range");
    annotated[static_cast<std::size_t>(i)] = true;
  }
  for (const Index i : negative) {
    if (i < 0 || i >= n) throw ValidationError("rank_images: negative index out of range");
    if (annotated[static_cast<std::size_t>(i)])
      throw ValidationError("rank_images: sample " + std::to_string(i) + " is annotated both positive and negative");
    annotated[static_cast<std::size_t>(i)] = true;
  }

  RankingResult out;
  out.score = Vector::Constant(n, std::numeric_limits<double>::quiet_NaN());
  for (Index j = 0; j < n; ++j) {
    if (annotated[static_cast<std::size_t>(j)]) continue;
    const Vector xj = points.row(j).transpose();
    double r = 0.0;
    for (std::size_t i = 0; i < positive.size(); ++i) {
      const double dist = std::max(mahalanobis(metric, points.row(positive[i]).transpose(), xj), kDistanceFloor);
      r += 1.0 / (weights.positive[static_cast<Index>(i)] * dist);
    }
    for (std::size_t i = 0; i < negative.size(); ++i) {
      const double dist = std::max(mahalanobis(metric, points.row(negative[i]).transpose(), xj), kDistanceFloor);
      r -= 1.0 / (weights.negative[static_cast<Index>(i)] * dist);
    }
    out.score[j] = r;
    out.order.push_back(j);
  }
  std::stable_sort(out.order.begin(), out.order.end(), [&](Index a, Index b) { return out.score[a] > out.score[b]; });
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(top_n), out.order.size());
  out.retrieved.assign(out.order.begin(), out.order.begin() + static_cast<std::ptrdiff_t>(take));
  out.threshold = out.retrieved.empty() ? 0.0 : out.score[out.retrieved.back()];
  return out;
}

std::string metric_to_csv(const MetricMatrix& m) {
  std::ostringstream os;
  for (Index i = 0; i < m.a.rows(); ++i) {
    for (Index j = 0; j < m.a.cols(); ++j) os << (j ? "," : "") << format_real(m.a(i, j));
    os << '\n';
  }
  return os.str();
}

MetricMatrix metric_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ParseError("metric matrix, line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  const auto d = static_cast<Index>(rows.size());
  if (d == 0) throw ParseError("metric matrix: empty input");
  MetricMatrix m{Matrix(d, d)};
  for (Index i = 0; i < d; ++i) {
    if (static_cast<Index>(rows[static_cast<std::size_t>(i)].size()) != d)
      throw ParseError("metric matrix, line " + std::to_string(i + 1) + ": expected " + std::to_string(d) + " values");
    for (Index j = 0; j < d; ++j) m.a(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

void save_metric(const MetricMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write " + path.string());
  out << metric_to_csv(m);
}

MetricMatrix load_metric(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return metric_from_csv(ss.str());
}

std::string ranking_to_csv(const RankingResult& r, const std::vector<std::string>& sample_ids) {
  std::set<Index> retrieved(r.retrieved.begin(), r.retrieved.end());
  std::ostringstream os;
  os << "sample_id,score,retrieved\n";
  for (const Index j : r.order)
    os << sample_ids.at(static_cast<std::size_t>(j)) << ',' << format_real(r.score[j]) << ','
       << (retrieved.count(j) ? 1 : 0) << '\n';
  return os.str();
}

}  // namespace semisup
