#include "semisup/sampling.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace semisup {

double smrs_objective(const Matrix& points, const Matrix& c, double lambda) {
  const Matrix x = points.transpose();
  return lambda * c.rowwise().norm().sum() + 0.5 * (x - x * c).squaredNorm();
}

// The affine constraint makes the problem translation invariant, so the
// solver works on centred data. lambda_max = max_i |x_i^T X| on that data.
SmrsResult smrs(const Matrix& points, const SmrsOptions& opt) {
  const Index n = points.rows();
  if (n < 2) throw ValidationError("smrs: need at least 2 samples");
  if (!(opt.alpha > 0.0 && opt.alpha <= 1.0)) throw ValidationError("smrs: alpha must lie in (0, 1]");
  if (!(opt.tolerance > 0.0)) throw ValidationError("smrs: tolerance must be > 0");
  if (!(opt.penalty > 0.0)) throw ValidationError("smrs: penalty must be > 0");

  SmrsResult out;
  out.plan.strategy = "SMRS";
  const Eigen::RowVectorXd mean = points.colwise().mean();
  const Matrix x = (points.rowwise() - mean).transpose();  // d x n
  const Matrix gram = x.transpose() * x;                    // n x n
  out.lambda_max = gram.rowwise().norm().maxCoeff();
  out.lambda = opt.alpha * out.lambda_max;
  out.plan.parameters["alpha"] = format_real(opt.alpha);
  out.plan.parameters["lambda"] = format_real(out.lambda);

  if (out.lambda_max == 0.0) {
    // Every sample is the same point: one representative reconstructs all.
    out.coefficients = Matrix::Zero(n, n);
    out.coefficients.row(0).setOnes();
    out.row_norms = out.coefficients.rowwise().norm();
    out.plan.selected = {0};
    out.objective_trace.push_back(smrs_objective(points, out.coefficients, out.lambda));
    return out;
  }

  double rho = opt.penalty;
  const double lam = out.lambda;
  const Index d = x.rows();
  // (X^T X + rho 1 1^T + rho I)^-1 via Woodbury with U = [X^T, sqrt(rho) 1].
  Matrix u(n, d + 1);
  u.leftCols(d) = x.transpose();
  Eigen::LLT<Matrix> k_llt;
  const auto factor = [&]() {
    u.col(d).setConstant(std::sqrt(rho));
    k_llt.compute(rho * Matrix::Identity(d + 1, d + 1) + u.transpose() * u);
  };
  factor();

  Matrix c = Matrix::Zero(n, n);
  Matrix z = Matrix::Zero(n, n);
  Matrix dual = Matrix::Zero(n, n);
  Matrix rhs(n, n);
  Eigen::RowVectorXd dual_sum = Eigen::RowVectorXd::Zero(n);
  Vector row_sq(n);
  Vector scale(n);
  const Eigen::RowVectorXd ones_row = Eigen::RowVectorXd::Ones(n);

  out.plan.converged = false;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    const double shrink = lam / rho;
    const Eigen::RowVectorXd shift = rho * ones_row - dual_sum;
    rhs = gram - dual + rho * z;
    rhs.rowwise() += shift;
    const Matrix t = k_llt.solve(u.transpose() * rhs);
    c.noalias() = rhs / rho;
    c.noalias() -= (u / rho) * t;

    // Row-wise group shrinkage of V = C + dual / rho, walked column by column.
    row_sq.setZero();
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) {
        const double vij = c(i, j) + dual(i, j) / rho;
        row_sq[i] += vij * vij;
      }
    for (Index i = 0; i < n; ++i) {
      const double norm = std::sqrt(row_sq[i]);
      scale[i] = norm > shrink ? 1.0 - shrink / norm : 0.0;
    }
    double primal = 0.0;
    double dual_res = 0.0;
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) {
        const double zn = scale[i] * (c(i, j) + dual(i, j) / rho);
        dual_res = std::max(dual_res, std::abs(zn - z(i, j)));
        z(i, j) = zn;
        const double gap = c(i, j) - zn;
        primal = std::max(primal, std::abs(gap));
        dual(i, j) += rho * gap;
      }
    dual_res *= rho;
    const Eigen::RowVectorXd col_residual = c.colwise().sum() - ones_row;
    dual_sum += rho * col_residual;

    out.objective_trace.push_back(smrs_objective(points, c, lam));
    const double affine = col_residual.cwiseAbs().maxCoeff();
    if (primal < opt.tolerance && affine < opt.tolerance && dual_res < opt.tolerance) {
      out.plan.converged = true;
      ++it;
      break;
    }
    // Residual balancing keeps primal and dual progress comparable.
    if (primal > 10.0 * dual_res) {
      rho *= 2.0;
      factor();
    } else if (dual_res > 10.0 * primal) {
      rho /= 2.0;
      factor();
    }
  }
  out.iterations = it;
  out.coefficients = c;
  out.constraint_residual = (c.colwise().sum() - ones_row).cwiseAbs().maxCoeff();
  out.row_norms = c.rowwise().norm();
  if (!out.plan.converged) out.plan.warnings.push_back("smrs: iteration cap reached before convergence");

  const double top = out.row_norms.maxCoeff();
  std::vector<Index> reps;
  for (Index i = 0; i < n; ++i)
    if (out.row_norms[i] >= opt.row_threshold * top) reps.push_back(i);
  std::stable_sort(reps.begin(), reps.end(), [&](Index a, Index b) { return out.row_norms[a] > out.row_norms[b]; });
  out.plan.selected = std::move(reps);
  return out;
}

}  // namespace semisup
