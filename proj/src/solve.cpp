#include "llb/solve.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/LU>
#include <limits>

namespace llb {

namespace {

bool finite_sparse(const SparseOperator& A) {
  return Eigen::Map<const Eigen::ArrayXd>(A.valuePtr(), A.nonZeros()).allFinite();
}

double rel_residual(const SparseOperator& A, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& b) {
  const double bn = b.norm();
  const double rn = (A * x - b).norm();
  return bn > 0.0 ? rn / bn : rn;
}

}  // namespace

Eigen::VectorXd solve_sparse(const SparseOperator& A, const Eigen::VectorXd& b,
                             double tol, SolveMethod method, SolveStats* stats) {
  if (A.rows() != A.cols() || A.rows() != b.size())
    throw ConfigError("solve_sparse: dimension mismatch");
  if (!finite_sparse(A) || !b.allFinite())
    throw NumericError("solve_sparse: non-finite entries in the system");

  const bool dense = (method == SolveMethod::Dense) ||
                     (method == SolveMethod::Auto && A.rows() < kDenseFallbackDim);

  Eigen::VectorXd x;
  int iterations = 0;
  if (dense) {
    const Eigen::MatrixXd Ad(A);
    x = Eigen::PartialPivLU<Eigen::MatrixXd>(Ad).solve(b);
  } else {
    Eigen::BiCGSTAB<SparseOperator, Eigen::DiagonalPreconditioner<double>> solver;
    solver.setTolerance(0.1 * tol);  // margin: acceptance uses the true residual
    solver.setMaxIterations(10 * A.rows());
    solver.compute(A);
    x = solver.solve(b);
    iterations = static_cast<int>(solver.iterations());
  }

  if (!x.allFinite()) {
    // Singular or otherwise broken system: report as nonconvergence with the
    // (infinite) residual rather than handing NaNs to the caller.
    throw SolveError("solve_sparse: non-finite solution (singular system?)",
                     std::numeric_limits<double>::infinity());
  }
  const double res = rel_residual(A, x, b);
  if (stats) {
    stats->iterations = iterations;
    stats->residual = res;
    stats->dense = dense;
  }
  if (!(res <= tol))
    throw SolveError("solve_sparse: no convergence to tol=" + fmt_g17(tol) +
                         " (residual " + fmt_g17(res) + ")",
                     res);
  return x;
}

}  // namespace llb
