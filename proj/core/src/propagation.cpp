#include "semisup/propagation.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace semisup {

std::vector<int> harden(const Matrix& scores) {
  std::vector<int> out(static_cast<std::size_t>(scores.rows()));
  for (Index i = 0; i < scores.rows(); ++i)
    out[static_cast<std::size_t>(i)] = static_cast<int>(argmax_first(scores.row(i).transpose())) + 1;
  return out;
}

SoftLabelField make_field(Matrix scores) {
  SoftLabelField f;
  f.class_count = static_cast<int>(scores.cols());
  f.hardened = harden(scores);
  f.scores = std::move(scores);
  return f;
}

void PropagationConfig::validate() const {
  if (gamma < 0.0 || ridge < 0.0 || lambda1 < 0.0 || lambda2 < 0.0)
    throw ValidationError("propagation: gamma, ridge, lambda1 and lambda2 must be nonnegative");
}

namespace {

void check_labels(const Graph& g, const LabelVector& labels, int class_count) {
  if (static_cast<Index>(labels.size()) != g.n)
    throw ValidationError("propagation: label vector length " + std::to_string(labels.size()) +
                          " != node count " + std::to_string(g.n));
  if (class_count < 1) throw ValidationError("propagation: class_count must be >= 1");
}

double trace_scale(const SparseMatrix& m) {
  double t = 0.0;
  for (Index i = 0; i < m.rows(); ++i) t += std::abs(m.coeff(i, i));
  return m.rows() > 0 && t > 0.0 ? t / static_cast<double>(m.rows()) : 1.0;
}

SparseMatrix add_identity(const SparseMatrix& m, double eps) {
  SparseMatrix id(m.rows(), m.cols());
  id.setIdentity();
  return m + eps * id;
}

}  // namespace

SoftLabelField harmonic_solve(const Graph& g, const LabelVector& labels, int class_count) {
  check_labels(g, labels, class_count);
  const Matrix y = one_hot(labels, class_count);
  std::vector<Index> lab, unl;
  std::vector<Index> pos(static_cast<std::size_t>(g.n));
  for (Index i = 0; i < g.n; ++i) {
    auto& bucket = labels[static_cast<std::size_t>(i)] ? lab : unl;
    pos[static_cast<std::size_t>(i)] = static_cast<Index>(bucket.size());
    bucket.push_back(i);
  }
  if (lab.empty()) throw ValidationError("harmonic_solve: at least one labeled node is required");

  SoftLabelField out;
  out.class_count = class_count;
  out.scores = Matrix::Zero(g.n, class_count);
  for (const Index i : lab) out.scores.row(i) = y.row(i);
  if (unl.empty()) {
    out.hardened = harden(out.scores);
    return out;
  }

  const auto u = static_cast<Index>(unl.size());
  std::vector<Eigen::Triplet<double>> trips;
  Matrix rhs = Matrix::Zero(u, class_count);
  Vector degree = Vector::Zero(g.n);
  for (Index col = 0; col < g.weights.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(g.weights, col); it; ++it) degree[it.row()] += it.value();
  for (Index col = 0; col < g.weights.outerSize(); ++col) {
    const bool col_labeled = labels[static_cast<std::size_t>(col)].has_value();
    for (SparseMatrix::InnerIterator it(g.weights, col); it; ++it) {
      const Index row = it.row();
      if (labels[static_cast<std::size_t>(row)]) continue;
      const Index r = pos[static_cast<std::size_t>(row)];
      if (col_labeled) {
        rhs.row(r) += it.value() * y.row(col);
      } else {
        trips.emplace_back(r, pos[static_cast<std::size_t>(col)], -it.value());
      }
    }
  }
  for (Index r = 0; r < u; ++r) trips.emplace_back(r, r, degree[unl[static_cast<std::size_t>(r)]]);
  SparseMatrix luu(u, u);
  luu.setFromTriplets(trips.begin(), trips.end());

  // Components without a labeled node make L_uu singular.
  const auto comp = connected_components(g);
  const Index n_comp = comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
  std::vector<bool> anchored(static_cast<std::size_t>(n_comp), false);
  for (const Index i : lab) anchored[static_cast<std::size_t>(comp[static_cast<std::size_t>(i)])] = true;
  Index floating = 0;
  for (const Index i : unl)
    if (!anchored[static_cast<std::size_t>(comp[static_cast<std::size_t>(i)])]) ++floating;
  if (floating > 0) {
    out.ridge = 1e-10 * trace_scale(luu);
    out.warnings.push_back(std::to_string(floating) +
                           " unlabeled node(s) are disconnected from every labeled node; ridge fallback applied");
    luu = add_identity(luu, out.ridge);
  }

  Eigen::SimplicialLDLT<SparseMatrix> solver(luu);
  if (solver.info() != Eigen::Success) {
    out.ridge = std::max(out.ridge, 1e-10 * trace_scale(luu));
    out.warnings.push_back("L_uu factorisation failed; ridge fallback applied");
    solver.compute(add_identity(luu, out.ridge));
    if (solver.info() != Eigen::Success) throw RuntimeError("harmonic_solve: factorisation failed");
  }
  const Matrix fu = solver.solve(rhs);
  for (Index r = 0; r < u; ++r) out.scores.row(unl[static_cast<std::size_t>(r)]) = fu.row(r);
  out.hardened = harden(out.scores);
  return out;
}

SoftLabelField regularized_solve(const Graph& g, const LabelVector& labels, int class_count,
                                 const PropagationConfig& cfg) {
  cfg.validate();
  check_labels(g, labels, class_count);
  const Matrix y = one_hot(labels, class_count);
  Index labeled = 0;
  for (const auto& l : labels)
    if (l) ++labeled;
  if (cfg.lambda1 == 0.0) {
    if (labeled == 0) throw RuntimeError("regularized_solve: singular system (lambda1 = 0 and no labeled node)");
    if (cfg.lambda2 == 0.0 && labeled < g.n)
      throw RuntimeError("regularized_solve: singular system (lambda1 = lambda2 = 0 with unlabeled nodes)");
    const auto comp = connected_components(g);
    const Index n_comp = *std::max_element(comp.begin(), comp.end()) + 1;
    std::vector<bool> anchored(static_cast<std::size_t>(n_comp), false);
    for (Index i = 0; i < g.n; ++i)
      if (labels[static_cast<std::size_t>(i)]) anchored[static_cast<std::size_t>(comp[static_cast<std::size_t>(i)])] = true;
    if (std::find(anchored.begin(), anchored.end(), false) != anchored.end())
      throw RuntimeError("regularized_solve: singular system (a component has no labeled node and lambda1 = 0)");
  }

  const Laplacian lap = laplacian(g);
  SparseMatrix m = cfg.lambda2 * lap.matrix;
  std::vector<Eigen::Triplet<double>> diag;
  for (Index i = 0; i < g.n; ++i) {
    const double j = labels[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
    diag.emplace_back(i, i, j + cfg.lambda1 + cfg.ridge);
  }
  SparseMatrix d(g.n, g.n);
  d.setFromTriplets(diag.begin(), diag.end());
  m += d;

  Eigen::SimplicialLDLT<SparseMatrix> solver(m);
  if (solver.info() != Eigen::Success) throw RuntimeError("regularized_solve: singular system");
  SoftLabelField out = make_field(solver.solve(y));
  out.ridge = cfg.ridge;
  return out;
}

int map_defect(double p) {
  if (p < -0.5) return -1;
  if (p > 0.5) return 1;
  return 0;
}

Vector project_simplex(const Vector& v) {
  const Index n = v.size();
  std::vector<double> sorted(v.data(), v.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Index k = 0; k < n; ++k) {
    cumulative += sorted[static_cast<std::size_t>(k)];
    const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[static_cast<std::size_t>(k)] - t > 0.0) theta = t;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

Vector simplex_least_squares(const Matrix& basis, const Vector& x, const SimplexSolveOptions& opt) {
  const Index s = basis.cols();
  if (s < 1) throw ValidationError("simplex_least_squares: empty basis");
  const Matrix gram = basis.transpose() * basis;
  const Vector bx = basis.transpose() * x;
  const double lipschitz = Eigen::SelfAdjointEigenSolver<Matrix>(gram, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  const auto objective = [&](const Vector& z) { return 0.5 * (x - basis * z).squaredNorm(); };

  Vector z = Vector::Constant(s, 1.0 / static_cast<double>(s));
  if (!(lipschitz > 0.0)) return z;  // every anchor at the origin: any convex combination is optimal
  const double step = 1.0 / lipschitz;
  double obj = objective(z);
  for (int it = 0; it < opt.max_iterations; ++it) {
    const Vector grad = gram * z - bx;
    const Vector next = project_simplex(z - step * grad);
    const double next_obj = objective(next);
    const double change = std::abs(obj - next_obj);
    z = next;
    if (change <= opt.tolerance * std::max(obj, 1e-300) || next_obj == 0.0) break;
    obj = next_obj;
  }
  return z;
}

AnchorWeights anchor_weights(const Matrix& points, const Matrix& anchors, Index s, const SimplexSolveOptions& opt) {
  const Index m = anchors.rows();
  if (s < 1 || s > m)
    throw ValidationError("anchor_weights: s = " + std::to_string(s) + " outside 1.." + std::to_string(m));
  if (points.cols() != anchors.cols()) throw ValidationError("anchor_weights: dimension mismatch");
  std::vector<Eigen::Triplet<double>> trips;
  for (Index i = 0; i < points.rows(); ++i) {
    const Vector x = points.row(i).transpose();
    const auto near = nearest_rows(anchors, x, s);
    Matrix basis(points.cols(), s);
    for (Index k = 0; k < s; ++k) basis.col(k) = anchors.row(near[static_cast<std::size_t>(k)]).transpose();
    const Vector z = simplex_least_squares(basis, x, opt);
    for (Index k = 0; k < s; ++k)
      if (z[k] > 0.0) trips.emplace_back(i, near[static_cast<std::size_t>(k)], z[k]);
  }
  AnchorWeights w;
  w.s = s;
  w.z.resize(points.rows(), m);
  w.z.setFromTriplets(trips.begin(), trips.end());
  w.z.makeCompressed();
  return w;
}

AnchorPropagation anchor_propagate(const AnchorWeights& zw, const LabelVector& labels, int class_count,
                                   const PropagationConfig& cfg) {
  cfg.validate();
  const SparseMatrix& z = zw.z;
  if (static_cast<Index>(labels.size()) != z.rows())
    throw ValidationError("anchor_propagate: label count != sample count");
  const Matrix y = one_hot(labels, class_count);
  const Index m = z.cols();

  const Matrix ztz = Matrix(z.transpose() * z);
  // W = Z Lambda^-1 Z^T has unit degrees, so L = I - W and Z^T L Z = ZtZ - ZtZ Lambda^-1 ZtZ.
  const Vector lambda = Matrix(z).colwise().sum().transpose();
  Vector lambda_inv(m);
  for (Index k = 0; k < m; ++k) lambda_inv[k] = lambda[k] > 0.0 ? 1.0 / lambda[k] : 0.0;
  const Matrix l_hat = ztz - ztz * lambda_inv.asDiagonal() * ztz;

  AnchorPropagation out;
  Matrix system = ztz + cfg.gamma * l_hat;
  system = 0.5 * (system + system.transpose()).eval();
  const Matrix rhs = z.transpose() * y;
  double ridge = cfg.ridge;
  if (ridge > 0.0) system.diagonal().array() += ridge;
  Eigen::LDLT<Matrix> ldlt(system);
  const double scale = std::max(system.diagonal().cwiseAbs().mean(), 1e-300);
  const Vector pivots = ldlt.vectorD();
  const bool singular = ldlt.info() != Eigen::Success || pivots.cwiseAbs().minCoeff() <= 1e-12 * scale;
  if (singular) {
    ridge = std::max(ridge, 1e-10 * scale);
    system.diagonal().array() += ridge;
    ldlt.compute(system);
    out.field.warnings.push_back("anchor system near-singular; ridge fallback applied");
  }
  out.anchor_labels = ldlt.solve(rhs);

  Matrix scores = z * out.anchor_labels;
  const Vector column_mass = scores.colwise().sum().transpose();
  for (Index j = 0; j < class_count; ++j) {
    if (column_mass[j] == 0.0) {
      out.field.warnings.push_back("class " + std::to_string(j + 1) + " has zero mass; normalisation skipped");
      continue;
    }
    scores.col(j) /= column_mass[j];
  }
  std::vector<std::string> warnings = std::move(out.field.warnings);
  out.field = make_field(std::move(scores));
  out.field.warnings = std::move(warnings);
  out.field.ridge = ridge;
  return out;
}

std::string soft_labels_to_csv(const SoftLabelField& f, const std::vector<std::string>& sample_ids) {
  std::ostringstream out;
  out << "sample_id";
  for (int j = 1; j <= f.class_count; ++j) out << ",score_" << j;
  out << ",label\n";
  for (Index i = 0; i < f.size(); ++i) {
    out << (static_cast<std::size_t>(i) < sample_ids.size() ? sample_ids[static_cast<std::size_t>(i)] : std::to_string(i));
    for (int j = 0; j < f.class_count; ++j) out << ',' << format_real(f.scores(i, j));
    out << ',' << f.hardened[static_cast<std::size_t>(i)] << '\n';
  }
  return out.str();
}

void save_soft_labels(const SoftLabelField& f, const std::vector<std::string>& sample_ids,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write '" + path.string() + "'");
  out << soft_labels_to_csv(f, sample_ids);
}

}  // namespace semisup
