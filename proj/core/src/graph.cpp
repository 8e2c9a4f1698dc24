#include "semisup/graph.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

namespace semisup {

GraphKind parse_graph_kind(const std::string& name) {
  if (name == "full" || name == "full_rbf" || name == "FULL_RBF") return GraphKind::FullRbf;
  if (name == "knn" || name == "KNN") return GraphKind::Knn;
  if (name == "eps" || name == "EPS") return GraphKind::Eps;
  throw ValidationError("unknown graph kind '" + name + "'");
}

std::string to_string(GraphKind k) {
  switch (k) {
    case GraphKind::FullRbf: return "full";
    case GraphKind::Knn: return "knn";
    case GraphKind::Eps: return "eps";
  }
  return "?";
}

void GraphSpec::validate() const {
  if (kind == GraphKind::Knn && k < 1) throw ValidationError("graph: k must be >= 1 for a kNN graph");
  if (kind == GraphKind::Eps && !(epsilon > 0.0)) throw ValidationError("graph: epsilon must be > 0 for an EPS graph");
  if (sigma && !(*sigma > 0.0)) throw ValidationError("graph: sigma must be > 0");
}

Index Graph::edge_count() const { return weights.nonZeros() / 2; }

double median_pairwise_distance(const Matrix& points) {
  const Index n = points.rows();
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) d.push_back((points.row(i) - points.row(j)).norm());
  if (d.empty()) return 1.0;
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  double med = *mid;
  if (d.size() % 2 == 0) med = 0.5 * (med + *std::max_element(d.begin(), mid));
  return med > 0.0 ? med : 1.0;
}

Graph build_graph(const Matrix& points, const GraphSpec& spec) {
  spec.validate();
  const Index n = points.rows();
  if (n < 2) throw ValidationError("build_graph: need at least 2 samples");
  if (spec.kind == GraphKind::Knn && spec.k >= n)
    throw ValidationError("build_graph: k = " + std::to_string(spec.k) + " must be < n = " + std::to_string(n));

  Graph g;
  g.n = n;
  g.spec = spec;
  const bool rbf = spec.kind == GraphKind::FullRbf || spec.weighting == Weighting::Rbf;
  g.sigma = spec.sigma ? *spec.sigma : (rbf ? median_pairwise_distance(points) : 0.0);
  const Matrix sq = pairwise_sq_distances(points);
  const auto weight = [&](Index i, Index j) {
    return rbf ? std::exp(-sq(i, j) / (2.0 * g.sigma * g.sigma)) : 1.0;
  };

  // Upper-triangle adjacency decided first, weights computed once per pair.
  std::vector<std::vector<Index>> adj(static_cast<std::size_t>(n));
  if (spec.kind == GraphKind::FullRbf) {
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) adj[static_cast<std::size_t>(i)].push_back(j);
  } else if (spec.kind == GraphKind::Eps) {
    const double eps2 = spec.epsilon * spec.epsilon;
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j)
        if (sq(i, j) <= eps2) adj[static_cast<std::size_t>(i)].push_back(j);
  } else {
    std::vector<Index> order(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      order.resize(static_cast<std::size_t>(n));
      std::iota(order.begin(), order.end(), Index{0});
      order.erase(order.begin() + i);
      std::partial_sort(order.begin(), order.begin() + spec.k, order.end(), [&](Index a, Index b) {
        return sq(i, a) < sq(i, b) || (sq(i, a) == sq(i, b) && a < b);
      });
      for (Index r = 0; r < spec.k; ++r) {
        const Index j = order[static_cast<std::size_t>(r)];
        adj[static_cast<std::size_t>(std::min(i, j))].push_back(std::max(i, j));
      }
    }
    for (auto& row : adj) {
      std::sort(row.begin(), row.end());
      row.erase(std::unique(row.begin(), row.end()), row.end());
    }
  }

  std::vector<Eigen::Triplet<double>> trips;
  for (Index i = 0; i < n; ++i) {
    for (const Index j : adj[static_cast<std::size_t>(i)]) {
      const double w = weight(i, j);
      if (w <= 0.0) continue;
      trips.emplace_back(i, j, w);
      trips.emplace_back(j, i, w);
    }
  }
  g.weights.resize(n, n);
  g.weights.setFromTriplets(trips.begin(), trips.end());
  g.weights.makeCompressed();
  if (g.weights.nonZeros() == 0) g.warnings.push_back("graph has no edges");
  return g;
}

Graph build_graph(const Dataset& d, const GraphSpec& spec) { return build_graph(d.features, spec); }

Graph graph_from_weights(const Matrix& weights) {
  if (weights.rows() != weights.cols()) throw ValidationError("graph_from_weights: matrix not square");
  const Index n = weights.rows();
  std::vector<Eigen::Triplet<double>> trips;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double w = weights(i, j);
      if (w != weights(j, i)) throw ValidationError("graph_from_weights: matrix not symmetric");
      if (w < 0.0) throw ValidationError("graph_from_weights: negative weight");
      if (w == 0.0) continue;
      trips.emplace_back(i, j, w);
      trips.emplace_back(j, i, w);
    }
  }
  Graph g;
  g.n = n;
  g.weights.resize(n, n);
  g.weights.setFromTriplets(trips.begin(), trips.end());
  g.weights.makeCompressed();
  return g;
}

Laplacian laplacian(const Graph& g) {
  Laplacian l;
  l.degree = Vector::Zero(g.n);
  std::vector<Eigen::Triplet<double>> trips;
  for (Index col = 0; col < g.weights.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(g.weights, col); it; ++it) {
      l.degree[it.row()] += it.value();
      trips.emplace_back(it.row(), it.col(), -it.value());
    }
  }
  for (Index i = 0; i < g.n; ++i) trips.emplace_back(i, i, l.degree[i]);
  l.matrix.resize(g.n, g.n);
  l.matrix.setFromTriplets(trips.begin(), trips.end());
  l.matrix.makeCompressed();
  return l;
}

double smoothness(const Graph& g, const Vector& f) {
  if (f.size() != g.n)
    throw ValidationError("smoothness: vector length " + std::to_string(f.size()) + " != node count " +
                          std::to_string(g.n));
  double total = 0.0;
  for (Index col = 0; col < g.weights.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(g.weights, col); it; ++it) {
      if (it.row() < it.col()) {
        const double diff = f[it.row()] - f[it.col()];
        total += it.value() * diff * diff;
      }
    }
  }
  return total;
}

std::vector<Index> connected_components(const Graph& g) {
  std::vector<Index> comp(static_cast<std::size_t>(g.n), -1);
  Index next = 0;
  std::vector<Index> stack;
  for (Index s = 0; s < g.n; ++s) {
    if (comp[static_cast<std::size_t>(s)] >= 0) continue;
    comp[static_cast<std::size_t>(s)] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const Index u = stack.back();
      stack.pop_back();
      for (SparseMatrix::InnerIterator it(g.weights, u); it; ++it) {
        auto& c = comp[static_cast<std::size_t>(it.row())];
        if (c < 0) {
          c = next;
          stack.push_back(it.row());
        }
      }
    }
    ++next;
  }
  return comp;
}

std::string to_edge_list(const Graph& g) {
  std::ostringstream out;
  for (Index col = 0; col < g.weights.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(g.weights, col); it; ++it) {
      if (it.row() < it.col()) out << it.row() << ',' << it.col() << ',' << format_real(it.value()) << '\n';
    }
  }
  return out.str();
}

void save_edge_list(const Graph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write '" + path.string() + "'");
  out << to_edge_list(g);
}

PathDistanceMatrix rho_path_distances(const Graph& base, const Matrix& points, double rho) {
  if (!(rho > 0.0)) throw ValidationError("rho_path_distances: rho must be > 0");
  if (points.rows() != base.n) throw ValidationError("rho_path_distances: point count != node count");
  const auto comp = connected_components(base);
  const Index n_comp = comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
  if (n_comp > 1) {
    std::ostringstream msg;
    msg << "rho_path_distances: base graph is disconnected (" << n_comp << " components:";
    for (Index c = 0; c < n_comp; ++c) {
      msg << " {";
      bool first = true;
      Index shown = 0;
      for (std::size_t i = 0; i < comp.size(); ++i) {
        if (comp[i] != c) continue;
        if (shown == 8) {
          msg << ",...";
          break;
        }
        msg << (first ? "" : ",") << i;
        first = false;
        ++shown;
      }
      msg << "}";
    }
    msg << ")";
    throw RuntimeError(msg.str());
  }

  const Index n = base.n;
  // Adjacency with rho-stretched edge lengths.
  std::vector<std::vector<std::pair<Index, double>>> adj(static_cast<std::size_t>(n));
  for (Index col = 0; col < base.weights.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(base.weights, col); it; ++it) {
      const double dist = (points.row(it.row()) - points.row(it.col())).norm();
      adj[static_cast<std::size_t>(it.row())].emplace_back(it.col(), std::expm1(rho * dist));
    }
  }

  PathDistanceMatrix out;
  out.rho = rho;
  out.squared.resize(n, n);
  using Item = std::pair<double, Index>;
  std::vector<double> best(static_cast<std::size_t>(n));
  for (Index s = 0; s < n; ++s) {
    std::fill(best.begin(), best.end(), std::numeric_limits<double>::infinity());
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    best[static_cast<std::size_t>(s)] = 0.0;
    heap.emplace(0.0, s);
    while (!heap.empty()) {
      const auto [du, u] = heap.top();
      heap.pop();
      if (du > best[static_cast<std::size_t>(u)]) continue;
      for (const auto& [v, len] : adj[static_cast<std::size_t>(u)]) {
        const double alt = du + len;
        if (alt < best[static_cast<std::size_t>(v)]) {
          best[static_cast<std::size_t>(v)] = alt;
          heap.emplace(alt, v);
        }
      }
    }
    for (Index t = 0; t < n; ++t) {
      const double path = std::log1p(best[static_cast<std::size_t>(t)]) / rho;
      out.squared(s, t) = path * path;
    }
  }
  // Dijkstra from both ends can differ in the last bit; keep the matrix exactly symmetric.
  for (Index i = 0; i < n; ++i) {
    out.squared(i, i) = 0.0;
    for (Index j = i + 1; j < n; ++j) {
      const double v = 0.5 * (out.squared(i, j) + out.squared(j, i));
      out.squared(i, j) = v;
      out.squared(j, i) = v;
    }
  }
  return out;
}

PathDistanceMatrix rho_path_distances(const Matrix& points, const GraphSpec& base, double rho) {
  return rho_path_distances(build_graph(points, base), points, rho);
}

Embedding mds_embed(const Matrix& squared, Index p) {
  if (p < 1) throw ValidationError("mds_embed: target dimension must be >= 1");
  if (squared.rows() != squared.cols()) throw ValidationError("mds_embed: distance matrix not square");
  const Index n = squared.rows();
  // Double centering without forming H explicitly.
  const Vector row_mean = squared.rowwise().mean();
  const Vector col_mean = squared.colwise().mean().transpose();
  const double grand = squared.mean();
  Matrix b(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) b(i, j) = -0.5 * (squared(i, j) - row_mean[i] - col_mean[j] + grand);
  b = 0.5 * (b + b.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(b);
  if (eig.info() != Eigen::Success) throw RuntimeError("mds_embed: eigendecomposition failed");
  const Vector& values = eig.eigenvalues();  // ascending
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  const double tol = 1e-12 * scale * static_cast<double>(n);
  Index positive = 0;
  for (Index i = 0; i < n; ++i)
    if (values[i] > tol) ++positive;
  if (positive == 0) throw RuntimeError("mds_embed: no positive eigenvalues (degenerate distance matrix)");
  const Index keep = std::min(p, positive);

  Embedding e;
  e.coords.resize(n, keep);
  e.eigenvalues.resize(keep);
  for (Index k = 0; k < keep; ++k) {
    const Index src = n - 1 - k;
    e.eigenvalues[k] = values[src];
    Vector u = eig.eigenvectors().col(src);
    // Sign convention: largest-magnitude entry positive.
    Index big = 0;
    u.cwiseAbs().maxCoeff(&big);
    if (u[big] < 0.0) u = -u;
    e.coords.col(k) = u * std::sqrt(values[src]);
  }
  return e;
}

}  // namespace semisup
