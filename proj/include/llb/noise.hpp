// Wiener noise: the truncated cosine mode family g_k, counter-based path
// sampling, coupled-level increment aggregation, and the two noise loads of
// the scheme (Stratonovich correction and diffusion).
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "llb/space.hpp"

namespace llb {

struct NoiseMode {
  int k = 0;                 // mode index (1-based)
  double amplitude = 0.0;    // sigma * k^(-decay)
  Eigen::Vector3d dir = Eigen::Vector3d::Zero();
  double L = 1.0;            // profile period base: cos(k pi x / L)
  // amplitude * cos(k pi x / L) cached at the quadrature points of a space
  // (filled by cache_mode_values / the space-taking build_modes overload).
  std::vector<double> qvals;
};

// amplitude a_k = sigma * k^(-decay), direction e_{(k mod 3) + 1}.
// decay must exceed 7/2 or the H^3-weighted amplitude tail diverges.
std::vector<NoiseMode> build_modes(int count, double decay, double sigma, double L);
std::vector<NoiseMode> build_modes(int count, double decay, double sigma,
                                   const FeSpace& space);
void cache_mode_values(std::vector<NoiseMode>& modes, const FeSpace& space);

double mode_value(const NoiseMode& mode, double x);

// Reported tail bound sum_{k > count} a_k^2 (1 + k^2)^3.
double mode_tail_bound(int count, double decay, double sigma);

struct WienerPath {
  std::uint64_t seed = 0;
  int n_fine = 0;
  double dt_fine = 0.0;
  Eigen::MatrixXd dW;  // modes x n_fine, increments ~ N(0, dt_fine)
};

// dW(k, j) depends only on (seed, k, j): order-independent and reproducible.
WienerPath sample_path(std::uint64_t seed, int n_modes, int n_fine, double dt_fine);

// Block-sums consecutive fine increments; coarsening must divide n_fine.
WienerPath aggregate_increments(const WienerPath& path, int coarsening);

// (1/2) sum_k <(m_prev x g_k) x g_k, phi>  (modes must be cached on m_prev's space).
Eigen::VectorXd stratonovich_load(const std::vector<NoiseMode>& modes,
                                  const Field& m_prev);

// sum_k dW_k <g_k + m_prev x g_k, phi>.
Eigen::VectorXd diffusion_load(const std::vector<NoiseMode>& modes,
                               const Field& m_prev, const Eigen::VectorXd& dWn);

namespace test_hooks {
// Fault injection for the validation suite: flips the sign of the
// Stratonovich load (the energy-identity check must catch this).
extern bool flip_strat_sign;
}  // namespace test_hooks

}  // namespace llb
