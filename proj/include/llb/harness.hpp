// Monte Carlo convergence laboratory: truncation-parameter selection,
// coupled-path multi-level studies against the finest level, rate regression
// with bootstrap intervals, exceedance-probability experiments, and the
// regularisation-removal study on the spectral reference.
#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "llb/galerkin.hpp"
#include "llb/scheme.hpp"

namespace llb {

struct Params2d {
  double radius;
  double epsilon;
};

// R(h, dt) = (-(q beta / (2 c*)) ln(h + dt^(alpha/2)))^(1/9),
// eps = max{ R^(-1/3), (dt^((alpha q / 2)(beta + 3)))^(3/8) }.
// Requires h + dt^(alpha/2) < 1 (the log must be negative).
Params2d select_parameters_2d(double h, double dt, double q, double beta,
                              double alpha, double c_star);

// R(h, dt) = (-(q beta / c*) ln(h + dt^alpha))^(1/4); requires h + dt^alpha < 1.
double select_radius_1d(double h, double dt, double q, double beta, double alpha,
                        double c_star);

struct StudyLevel {
  int cells = 0;    // 1D: intervals; 2D: quads per side in x
  int cells_y = 0;  // 2D only
  int steps = 0;
};

struct ExperimentPlan {
  int dimension = 1;
  double lx = 1.0, ly = 1.0;
  std::vector<StudyLevel> levels;  // coarse -> fine, dyadically nested;
                                   // the last entry is the reference level
  int n_paths = 0;
  std::uint64_t base_seed = 0;
  double gamma = 1.0, q = 0.5, beta = 0.5, c_star = 1.0;
  bool radius_auto = true;  // per-level R from the selection formulas
  double radius_fixed = std::numeric_limits<double>::infinity();
  int threads = 1;
  SchemeParams base;  // kappas, mu, epsilon (2D), alpha, T, solve_tol
  int noise_count = 0;
  double noise_decay = 4.0, noise_sigma = 0.5;
  PointFn m0;
};

struct PathLevelError {
  double e_max_sq = 0.0;   // max_n |e|_{L2}^2 at stopped times
  double e_grad_sq = 0.0;  // sum_n |grad e|^2 dtau_n
  double stopped_at = 0.0;
};

struct LevelAggregate {
  double h = 0.0, dt = 0.0, radius = 0.0;
  double mean_e_max_sq = 0.0, mean_e_grad_sq = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;  // bootstrap 95% CI on mean_e_max_sq
  double exceed_freq = 0.0;
  bool is_reference = false;
};

struct ErrorReport {
  std::vector<StudyLevel> levels;
  std::vector<double> hs, dts, radii;
  std::vector<std::vector<PathLevelError>> per_path;  // [level][path]
  std::vector<char> path_ok;                          // 0 = aborted, excluded
  int n_aborted = 0;
  double gamma = 1.0, beta = 0.5, alpha = 0.45;
  std::uint64_t base_seed = 0;
  std::vector<LevelAggregate> agg;
};

// Runs every path coupled: one fine Wiener path per path index, the reference
// level once, coarser levels on aggregated increments under the stopping time
// read off the reference H1 monitor, errors prolonged to the reference space.
// Deterministic for a fixed plan, independent of plan.threads.
ErrorReport run_coupled_study(const ExperimentPlan& plan);

enum class RateAxis { H, Dt };

struct RateEstimate {
  double slope = 0.0;
  double se = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;  // bootstrap percentile 95%
};

// Log-log regression of level means against h or dt over the non-reference
// levels; needs >= 3 levels that vary only along the chosen axis. Bootstrap
// over paths, 1000 resamples, deterministic.
RateEstimate estimate_rates(const ErrorReport& report, RateAxis axis,
                            bool use_grad = false);

struct Exceedance {
  double freq = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;  // Wilson 95% binomial interval
};

// Frequency of e_max_sq + e_grad_sq > gamma * rate_base^(1-beta) per level.
std::vector<Exceedance> exceedance_probability(const ErrorReport& report,
                                               double gamma, double beta,
                                               const std::vector<double>& rate_base);

struct EpsilonStudyConfig {
  double L = 1.0, T = 0.5;
  int n_modes = 48;
  int n_steps = 256;
  int substeps = 1;
  int n_paths = 50;
  std::uint64_t base_seed = 0;
  std::vector<double> eps_values;  // strictly decreasing, in (0,1)
  double gamma = 1.0, beta = 0.5;
  SchemeParams base;
  int noise_count = 4;
  double noise_decay = 4.0, noise_sigma = 0.5;
  PointFn m0;
  int threads = 1;
  int dimension = 1;  // anything else is rejected
};

struct EpsilonRow {
  double eps = 0.0;
  double mean_sup_l2_sq = 0.0;  // mean over paths of sup_t |m^eps - m|_{L2}^2
  double mean_grad_int = 0.0;   // mean of int |grad(m^eps - m)|^2 dt
  Exceedance exceed;            // vs threshold gamma * eps^(1-beta)
};

// eps -> 0 study on the spectral reference with shared paths (1D only: the
// P1 scheme has no eps term, and the statement concerns the PDE solutions).
std::vector<EpsilonRow> epsilon_convergence_study(const EpsilonStudyConfig& cfg);

}  // namespace llb
