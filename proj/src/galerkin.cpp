#include "llb/galerkin.hpp"

#include <algorithm>
#include <cmath>

#include "llb/util.hpp"

namespace llb {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Basis values e_i(x_j) on the midpoint grid x_j = (j + 1/2) L / M.
// e_0 = 1/sqrt(L), e_i = sqrt(2/L) cos(i pi x / L).
Eigen::MatrixXd basis_matrix(int n_modes, double L, int M) {
  Eigen::MatrixXd E(n_modes, M);
  const double c0 = 1.0 / std::sqrt(L);
  const double ci = std::sqrt(2.0 / L);
  for (int j = 0; j < M; ++j) {
    const double theta = kPi * (j + 0.5) / M;  // = i-free part of i pi x_j / L
    E(0, j) = c0;
    for (int i = 1; i < n_modes; ++i) E(i, j) = ci * std::cos(i * theta);
  }
  return E;
}

// Everything galerkin_rhs needs that depends only on (state shape, modes):
// basis table on the dealiasing grid, eigenvalues, noise values on the grid.
struct RhsWorkspace {
  int n_modes = 0;
  int M = 0;  // dealiasing grid size, 2x the band limit of the state
  double L = 1.0;
  Eigen::MatrixXd E;                  // n_modes x M
  Eigen::VectorXd lam;                // eigenvalues
  Eigen::MatrixXd gprof;              // modes.size() x M scalar profiles
  std::vector<Eigen::Vector3d> gdir;  // unit directions
};

RhsWorkspace make_workspace(int n_modes, double L,
                            const std::vector<NoiseMode>& modes) {
  if (n_modes < 1) throw ConfigError("spectral: need at least one mode");
  RhsWorkspace w;
  w.n_modes = n_modes;
  // 2x oversampling dealiases the cubic term exactly; the noise profiles have
  // much lower frequency than the band limit in every configuration we run.
  w.M = 2 * n_modes;
  w.L = L;
  w.E = basis_matrix(n_modes, L, w.M);
  w.lam.resize(n_modes);
  for (int i = 0; i < n_modes; ++i) w.lam[i] = spectral_eigenvalue(i, L);
  w.gprof.resize(static_cast<Eigen::Index>(modes.size()), w.M);
  w.gdir.reserve(modes.size());
  for (std::size_t k = 0; k < modes.size(); ++k) {
    w.gdir.push_back(modes[k].dir);
    for (int j = 0; j < w.M; ++j) {
      const double x = (j + 0.5) * L / w.M;
      w.gprof(static_cast<Eigen::Index>(k), j) = mode_value(modes[k], x);
    }
  }
  return w;
}

SpectralRhs rhs_core(const SpectralState& s, const SchemeParams& p,
                     const RhsWorkspace& w) {
  // Grid values of m and of Lap m (diagonal in this basis).
  const Eigen::Matrix3Xd Vm = s.c * w.E;
  const Eigen::Matrix3Xd Vlap = (s.c * (-w.lam).asDiagonal()) * w.E;

  const Eigen::Index nk = w.gprof.rows();
  Eigen::Matrix3Xd nl(3, w.M);
  std::vector<Eigen::Matrix3Xd> dval;
  dval.reserve(static_cast<std::size_t>(nk));
  for (Eigen::Index k = 0; k < nk; ++k) dval.emplace_back(3, w.M);
  for (int j = 0; j < w.M; ++j) {
    const Eigen::Vector3d m = Vm.col(j);
    Eigen::Vector3d v = p.gamma * m.cross(Eigen::Vector3d(Vlap.col(j)));
    v -= p.kappa2 * p.mu * m.squaredNorm() * m;
    for (Eigen::Index k = 0; k < nk; ++k) {
      const Eigen::Vector3d g = w.gprof(k, j) * w.gdir[static_cast<std::size_t>(k)];
      const Eigen::Vector3d mxg = m.cross(g);
      v += 0.5 * mxg.cross(g);
      dval[static_cast<std::size_t>(k)].col(j) = g + mxg;
    }
    nl.col(j) = v;
  }

  const double scale = w.L / w.M;  // midpoint quadrature weight
  SpectralRhs out;
  out.drift = scale * (nl * w.E.transpose());
  out.diffusion.reserve(static_cast<std::size_t>(nk));
  for (Eigen::Index k = 0; k < nk; ++k)
    out.diffusion.push_back(scale *
                            (dval[static_cast<std::size_t>(k)] * w.E.transpose()));
  return out;
}

}  // namespace

double spectral_eigenvalue(int i, double L) {
  const double v = i * kPi / L;
  return v * v;
}

SpectralState project_Pn(const PointFn& f, int n_modes, double L) {
  if (n_modes < 1) throw ConfigError("project_Pn: need at least one mode");
  if (!(L > 0.0)) throw ConfigError("project_Pn: domain length must be positive");
  const int M = std::max(256, 8 * n_modes);
  const Eigen::MatrixXd E = basis_matrix(n_modes, L, M);
  Eigen::Matrix3Xd vals(3, M);
  for (int j = 0; j < M; ++j) {
    const double x = (j + 0.5) * L / M;
    vals.col(j) = f(x, 0.0);
  }
  SpectralState s;
  s.n_modes = n_modes;
  s.L = L;
  s.c = (L / M) * (vals * E.transpose());
  return s;
}

double eval_spectral(const SpectralState& s, int comp, double x) {
  double acc = s.c(comp, 0) / std::sqrt(s.L);
  const double ci = std::sqrt(2.0 / s.L);
  for (int i = 1; i < s.n_modes; ++i)
    acc += s.c(comp, i) * ci * std::cos(i * kPi * x / s.L);
  return acc;
}

double spectral_l2_sq(const SpectralState& s) { return s.c.squaredNorm(); }

double spectral_h1semi_sq(const SpectralState& s) {
  double acc = 0.0;
  for (int i = 1; i < s.n_modes; ++i)
    acc += spectral_eigenvalue(i, s.L) * s.c.col(i).squaredNorm();
  return acc;
}

SpectralRhs galerkin_rhs(const SpectralState& s, const SchemeParams& params,
                         const std::vector<NoiseMode>& modes) {
  const RhsWorkspace w = make_workspace(s.n_modes, s.L, modes);
  SpectralRhs r = rhs_core(s, params, w);
  // rhs_core carries the explicitly treated terms; complete the Ito drift
  // with the diagonal linear part.
  for (int i = 0; i < s.n_modes; ++i)
    r.drift.col(i) -= (params.epsilon * w.lam[i] * w.lam[i] +
                       params.kappa1 * w.lam[i] + params.kappa2) *
                      s.c.col(i);
  return r;
}

SpectralState integrate(const SpectralState& s0, const WienerPath& path,
                        const SchemeParams& params, int n_substeps,
                        const std::vector<NoiseMode>& modes,
                        SpectralTrajectory* record) {
  if (n_substeps < 1) throw ConfigError("integrate: need n_substeps >= 1");
  if (path.dW.rows() != static_cast<Eigen::Index>(modes.size()))
    throw ConfigError("integrate: increment rows do not match modes");
  const RhsWorkspace w = make_workspace(s0.n_modes, s0.L, modes);

  const double delta = path.dt_fine / n_substeps;
  Eigen::VectorXd denom(s0.n_modes);
  for (int i = 0; i < s0.n_modes; ++i)
    denom[i] = 1.0 + delta * (params.epsilon * w.lam[i] * w.lam[i] +
                              params.kappa1 * w.lam[i] + params.kappa2);

  SpectralState s = s0;
  if (record) {
    record->states.clear();
    record->states.reserve(path.n_fine + 1);
    record->states.push_back(s);
  }
  for (int n = 0; n < path.n_fine; ++n) {
    for (int sub = 0; sub < n_substeps; ++sub) {
      const SpectralRhs r = rhs_core(s, params, w);
      Eigen::Matrix3Xd num = s.c + delta * r.drift;
      if (sub == 0)  // diffusion enters once, at the fine-step start state
        for (std::size_t k = 0; k < modes.size(); ++k)
          num += path.dW(static_cast<Eigen::Index>(k), n) * r.diffusion[k];
      s.c = num * denom.cwiseInverse().asDiagonal();
    }
    if (!s.c.allFinite())
      throw NumericError("spectral integration diverged at step " +
                         std::to_string(n + 1));
    if (record) record->states.push_back(s);
  }
  return s;
}

double fem_spectral_discrepancy(const TrajectoryRecord& fem,
                                const SpectralTrajectory& spec,
                                const SpacePtr& space, int stride) {
  if (stride < 1) throw ConfigError("discrepancy: stride must be >= 1");
  if (fem.fields.empty())
    throw ConfigError("discrepancy: trajectory has no recorded fields");
  const std::size_t need =
      static_cast<std::size_t>(stride) * (fem.fields.size() - 1) + 1;
  if (spec.states.size() < need)
    throw ConfigError("discrepancy: spectral record too short for stride");
  const FeSpace& s = *space;
  double worst = 0.0;
  for (std::size_t n = 0; n < fem.fields.size(); ++n) {
    const SpectralState& ss = spec.states[static_cast<std::size_t>(stride) * n];
    double acc = 0.0;
    for (int c = 0; c < s.mesh->n_cells(); ++c)
      for (int q = 0; q < s.nq; ++q) {
        const int idx = c * s.nq + q;
        Eigen::Vector3d d = field_value_at_q(fem.fields[n], c, q);
        for (int comp = 0; comp < 3; ++comp)
          d[comp] -= eval_spectral(ss, comp, s.qx[idx]);
        acc += s.qw[idx] * d.squaredNorm();
      }
    worst = std::max(worst, std::sqrt(acc));
  }
  return worst;
}

}  // namespace llb
