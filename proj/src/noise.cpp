#include "llb/noise.hpp"

#include <cmath>

#include "llb/philox.hpp"
#include "llb/util.hpp"

namespace llb {

namespace test_hooks {
bool flip_strat_sign = false;
}

std::vector<NoiseMode> build_modes(int count, double decay, double sigma, double L) {
  if (count < 0) throw ConfigError("build_modes: count must be >= 0");
  if (!(decay > 3.5))
    throw ConfigError(
        "build_modes: decay s must exceed 7/2, otherwise the H^3-weighted "
        "amplitude tail sum a_k^2 (1+k^2)^3 is not summable");
  if (sigma < 0.0) throw ConfigError("build_modes: sigma must be >= 0");
  if (L <= 0.0) throw ConfigError("build_modes: domain length must be positive");
  std::vector<NoiseMode> modes(count);
  for (int i = 0; i < count; ++i) {
    const int k = i + 1;
    modes[i].k = k;
    modes[i].amplitude = sigma * std::pow(static_cast<double>(k), -decay);
    modes[i].dir = Eigen::Vector3d::Zero();
    modes[i].dir[k % 3] = 1.0;  // e_{(k mod 3) + 1}
    modes[i].L = L;
  }
  return modes;
}

void cache_mode_values(std::vector<NoiseMode>& modes, const FeSpace& space) {
  const int nqp = static_cast<int>(space.qx.size());
  for (auto& m : modes) {
    m.qvals.resize(nqp);
    for (int i = 0; i < nqp; ++i) m.qvals[i] = mode_value(m, space.qx[i]);
  }
}

std::vector<NoiseMode> build_modes(int count, double decay, double sigma,
                                   const FeSpace& space) {
  auto modes = build_modes(count, decay, sigma, space.mesh->lx);
  cache_mode_values(modes, space);
  return modes;
}

double mode_value(const NoiseMode& mode, double x) {
  constexpr double kPi = 3.14159265358979323846264338328;
  return mode.amplitude * std::cos(mode.k * kPi * x / mode.L);
}

double mode_tail_bound(int count, double decay, double sigma) {
  if (!(decay > 3.5))
    throw ConfigError("mode_tail_bound: decay s must exceed 7/2 (summability)");
  double acc = 0.0;
  for (long k = count + 1; k <= 10'000'000; ++k) {
    const double kk = static_cast<double>(k);
    const double a = sigma * std::pow(kk, -decay);
    const double t = a * a * std::pow(1.0 + kk * kk, 3.0);
    acc += t;
    if (t < acc * 1e-18) break;
  }
  return acc;
}

WienerPath sample_path(std::uint64_t seed, int n_modes, int n_fine, double dt_fine) {
  if (n_modes < 0 || n_fine < 1 || dt_fine <= 0.0)
    throw ConfigError("sample_path: need n_modes >= 0, n_fine >= 1, dt_fine > 0");
  WienerPath p;
  p.seed = seed;
  p.n_fine = n_fine;
  p.dt_fine = dt_fine;
  p.dW.resize(n_modes, n_fine);
  const double sq = std::sqrt(dt_fine);
  for (int k = 0; k < n_modes; ++k)
    for (int j = 0; j < n_fine; ++j)
      // stream k+1: stream 0 is reserved for auxiliary draws (bootstrap etc.)
      p.dW(k, j) = sq * philox_normal(seed, static_cast<std::uint64_t>(k) + 1,
                                      static_cast<std::uint64_t>(j));
  return p;
}

WienerPath aggregate_increments(const WienerPath& path, int coarsening) {
  if (coarsening < 1 || path.n_fine % coarsening != 0)
    throw ConfigError("aggregate_increments: coarsening must divide n_fine");
  WienerPath out;
  out.seed = path.seed;
  out.n_fine = path.n_fine / coarsening;
  out.dt_fine = path.dt_fine * coarsening;
  out.dW.resize(path.dW.rows(), out.n_fine);
  for (int k = 0; k < path.dW.rows(); ++k)
    for (int j = 0; j < out.n_fine; ++j) {
      double s = 0.0;  // left-to-right, fixed order
      for (int i = 0; i < coarsening; ++i) s += path.dW(k, j * coarsening + i);
      out.dW(k, j) = s;
    }
  return out;
}

namespace {

void check_cached(const std::vector<NoiseMode>& modes, const FeSpace& s) {
  const std::size_t nqp = s.qx.size();
  for (const auto& m : modes)
    if (m.qvals.size() != nqp)
      throw ConfigError("noise load: mode values not cached for this space");
}

}  // namespace

Eigen::VectorXd stratonovich_load(const std::vector<NoiseMode>& modes,
                                  const Field& m_prev) {
  const FeSpace& s = *m_prev.space;
  check_cached(modes, s);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(s.n_dofs());
  const double sign = test_hooks::flip_strat_sign ? -1.0 : 1.0;
  for (int c = 0; c < s.mesh->n_cells(); ++c)
    for (int q = 0; q < s.nq; ++q) {
      const int idx = c * s.nq + q;
      const Eigen::Vector3d m = field_value_at_q(m_prev, c, q);
      Eigen::Vector3d v = Eigen::Vector3d::Zero();
      for (const auto& mode : modes) {
        const Eigen::Vector3d g = mode.qvals[idx] * mode.dir;
        v += 0.5 * (m.cross(g)).cross(g);
      }
      v *= sign * s.qw[idx];
      for (int l = 0; l < s.ndof_cell; ++l) {
        const double N = s.qN[idx * s.ndof_cell + l];
        const int d = s.cell_dofs[c * s.ndof_cell + l];
        for (int k = 0; k < 3; ++k) b[k * s.n_scalar + d] += v[k] * N;
      }
    }
  return b;
}

Eigen::VectorXd diffusion_load(const std::vector<NoiseMode>& modes,
                               const Field& m_prev, const Eigen::VectorXd& dWn) {
  const FeSpace& s = *m_prev.space;
  check_cached(modes, s);
  if (dWn.size() != static_cast<Eigen::Index>(modes.size()))
    throw ConfigError("diffusion_load: increment count does not match modes");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(s.n_dofs());
  for (int c = 0; c < s.mesh->n_cells(); ++c)
    for (int q = 0; q < s.nq; ++q) {
      const int idx = c * s.nq + q;
      const Eigen::Vector3d m = field_value_at_q(m_prev, c, q);
      Eigen::Vector3d v = Eigen::Vector3d::Zero();
      for (std::size_t ki = 0; ki < modes.size(); ++ki) {
        const Eigen::Vector3d g = modes[ki].qvals[idx] * modes[ki].dir;
        v += dWn[static_cast<Eigen::Index>(ki)] * (g + m.cross(g));
      }
      v *= s.qw[idx];
      for (int l = 0; l < s.ndof_cell; ++l) {
        const double N = s.qN[idx * s.ndof_cell + l];
        const int d = s.cell_dofs[c * s.ndof_cell + l];
        for (int k = 0; k < 3; ++k) b[k * s.n_scalar + d] += v[k] * N;
      }
    }
  return b;
}

}  // namespace llb
