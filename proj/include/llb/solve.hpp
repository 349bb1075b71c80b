// Sparse linear solves for the per-step systems. The matrices are
// nonsymmetric (cross-convection term), so the iterative route is BiCGSTAB
// with diagonal preconditioning; small systems fall back to a dense LU.
// Convergence is judged on the recomputed true residual |Ax - b| / |b|.
#pragma once

#include <Eigen/Dense>

#include "llb/space.hpp"
#include "llb/util.hpp"

namespace llb {

struct SolveError : LlbError {
  double residual;
  SolveError(const std::string& what, double r) : LlbError(what), residual(r) {}
};

enum class SolveMethod {
  Auto,       // dense below kDenseFallbackDim unknowns, iterative above
  Iterative,  // force BiCGSTAB + Jacobi
  Dense,      // force PartialPivLU on a dense copy
};

inline constexpr int kDenseFallbackDim = 128;

struct SolveStats {
  int iterations = 0;
  double residual = 0.0;
  bool dense = false;
};

// Solves A x = b to relative residual <= tol. Raises NumericError on
// non-finite input or output, SolveError (carrying the final residual) on
// nonconvergence. Deterministic for fixed inputs.
Eigen::VectorXd solve_sparse(const SparseOperator& A, const Eigen::VectorXd& b,
                             double tol, SolveMethod method = SolveMethod::Auto,
                             SolveStats* stats = nullptr);

}  // namespace llb
