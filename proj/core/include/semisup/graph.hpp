#pragma once

#include "semisup/dataset.hpp"

#include <Eigen/SparseCore>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace semisup {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class GraphKind { FullRbf, Knn, Eps };
enum class Weighting { Unit, Rbf };

GraphKind parse_graph_kind(const std::string& name);
std::string to_string(GraphKind k);

/// Recipe for a similarity graph over samples.
///
/// RBF weights are exp(-|xi - xj|^2 / (2 sigma^2)). When `sigma` is unset the
/// median pairwise distance of the data is used.
struct GraphSpec {
  GraphKind kind = GraphKind::Knn;
  Index k = 5;
  double epsilon = 0.0;
  std::optional<double> sigma;
  Weighting weighting = Weighting::Rbf;

  void validate() const;
};

/// Symmetric nonnegative weighted adjacency with zero diagonal.
struct Graph {
  Index n = 0;
  SparseMatrix weights;
  GraphSpec spec;
  /// Bandwidth actually used for RBF weights (resolved default).
  double sigma = 0.0;
  std::vector<std::string> warnings;

  Index edge_count() const;
};

struct Laplacian {
  Vector degree;
  SparseMatrix matrix;  // D - W
};

/// kNN edges follow the OR rule: (i,j) is an edge when either endpoint is
/// among the other's k nearest. Distance ties go to the smaller index.
Graph build_graph(const Matrix& points, const GraphSpec& spec);
Graph build_graph(const Dataset& d, const GraphSpec& spec);

/// Graph from an explicit symmetric weight matrix (tests, custom kernels).
Graph graph_from_weights(const Matrix& weights);

Laplacian laplacian(const Graph& g);

/// Sum over unordered edges of w_ij (f_i - f_j)^2, i.e. f^T L f.
double smoothness(const Graph& g, const Vector& f);

/// Component id per node (0-based, in order of smallest member).
std::vector<Index> connected_components(const Graph& g);

double median_pairwise_distance(const Matrix& points);

/// "i,j,w" lines, 0-based, upper triangle only, 17 significant digits.
void save_edge_list(const Graph& g, const std::filesystem::path& path);
std::string to_edge_list(const Graph& g);

/// Squared rho-path distances over a base graph.
struct PathDistanceMatrix {
  Matrix squared;
  double rho = 1.0;
};

/// Edge lengths exp(rho * |xi - xj|) - 1, all-pairs Dijkstra, then
/// D_ij = (log(1 + d_sp(i,j)) / rho)^2. Throws RuntimeError on a
/// disconnected base graph, naming the components.
PathDistanceMatrix rho_path_distances(const Matrix& points, const GraphSpec& base, double rho);
PathDistanceMatrix rho_path_distances(const Graph& base, const Matrix& points, double rho);

struct Embedding {
  Matrix coords;      // n x p
  Vector eigenvalues; // p, strictly positive, descending
};

/// Classical MDS of a squared-distance matrix: B = -1/2 H D H, keep the
/// largest min(p, #positive) eigenpairs, coordinates U sqrt(Lambda).
Embedding mds_embed(const Matrix& squared_distances, Index p);
inline Embedding mds_embed(const PathDistanceMatrix& dm, Index p) { return mds_embed(dm.squared, p); }

}  // namespace semisup
