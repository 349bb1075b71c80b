// 1D spectral Galerkin reference in the Neumann cosine eigenbasis:
// independent discretisation used to cross-validate the finite element
// scheme and to realise the regularisation-removal study. Nonlinear terms are
// evaluated pseudo-spectrally on a 2x-oversampled midpoint grid; the time
// stepper treats the diagonal linear part implicitly and lags the rest.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "llb/noise.hpp"
#include "llb/scheme.hpp"

namespace llb {

struct SpectralState {
  int n_modes = 0;  // basis functions e_0 .. e_{n_modes-1}
  double L = 1.0;
  Eigen::Matrix3Xd c;  // 3 x n_modes coefficients, orthonormal basis
};

// lambda_i = (i pi / L)^2 (lambda_0 = 0, constant mode).
double spectral_eigenvalue(int i, double L);

// L2 projection onto the first n_modes cosine modes (midpoint cosine
// transform on a heavily oversampled grid; exact for band-limited inputs).
SpectralState project_Pn(const PointFn& f, int n_modes, double L);

// Pointwise reconstruction of one component.
double eval_spectral(const SpectralState& s, int comp, double x);

double spectral_l2_sq(const SpectralState& s);       // Parseval
double spectral_h1semi_sq(const SpectralState& s);   // sum lambda_i |c_i|^2

struct SpectralRhs {
  // Full Ito drift: -(eps lam^2 + kappa1 lam + kappa2) c + P_n(gamma m x Lap m
  // - kappa2 mu |m|^2 m + 1/2 sum_k (m x g_k) x g_k). The integrator splits
  // off the diagonal linear part and treats it implicitly.
  Eigen::Matrix3Xd drift;
  std::vector<Eigen::Matrix3Xd> diffusion;  // per mode k: P_n(g_k + m x g_k)
};

SpectralRhs galerkin_rhs(const SpectralState& s, const SchemeParams& params,
                         const std::vector<NoiseMode>& modes);

struct SpectralTrajectory {
  std::vector<SpectralState> states;  // one per fine step, incl. t = 0
};

// Advances through path.dW with n_substeps drift substeps per fine increment;
// the diffusion increment is applied once per fine step at the step start.
SpectralState integrate(const SpectralState& s0, const WienerPath& path,
                        const SchemeParams& params, int n_substeps,
                        const std::vector<NoiseMode>& modes,
                        SpectralTrajectory* record = nullptr);

// max over shared time points of the L2 distance between a FEM trajectory and
// a spectral trajectory (spectral recorded at stride * n for FEM step n),
// integrated with the FEM space's quadrature rule.
double fem_spectral_discrepancy(const TrajectoryRecord& fem,
                                const SpectralTrajectory& spec,
                                const SpacePtr& space, int stride);

}  // namespace llb
