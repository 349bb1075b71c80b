#include "llb/scheme.hpp"

#include <cmath>

#include "llb/assemble.hpp"
#include "llb/solve.hpp"
#include "llb/util.hpp"

namespace llb {

namespace {

void check_params(const SchemeParams& p, const FeSpace& s) {
  if (p.epsilon < 0.0 || p.epsilon >= 1.0)
    throw ConfigError("scheme: epsilon must lie in [0, 1)");
  if (p.epsilon != 0.0 && s.degree != 2)
    throw ConfigError("scheme: epsilon > 0 requires the degree-2 (2D) space");
  if (!(p.T > 0.0) || p.n_steps < 1)
    throw ConfigError("scheme: need T > 0 and n_steps >= 1");
}

}  // namespace

Field step(const Field& m_prev, double delta_tau, const Eigen::VectorXd& dWn,
           const SchemeParams& p, const std::vector<NoiseMode>& modes) {
  const FeSpace& s = *m_prev.space;
  check_params(p, s);
  if (delta_tau == 0.0) return m_prev;  // frozen step: bitwise unchanged
  if (delta_tau != p.dt())
    throw ConfigError("step: delta_tau must be 0 or dt = T / n_steps");

  SparseOperator A = s.M + (delta_tau * p.kappa1) * s.K;
  if (p.epsilon != 0.0) A += (delta_tau * p.epsilon) * s.B;
  const SparseOperator C = assemble_cross_convection(s, m_prev);
  const SparseOperator G = assemble_weighted_mass(s, m_prev, p.mu);
  A += (delta_tau * p.gamma) * C + (delta_tau * p.kappa2) * G;

  Eigen::VectorXd rhs = s.M * m_prev.coeffs;
  rhs += delta_tau * stratonovich_load(modes, m_prev);
  rhs += diffusion_load(modes, m_prev, dWn);

  Field out(m_prev.space);
  out.coeffs = solve_sparse(A, rhs, p.solve_tol);
  return out;
}

double energy_identity_residual(const Field& m_prev, const Field& m_new,
                                double delta_tau, const Eigen::VectorXd& dWn,
                                const SchemeParams& p,
                                const std::vector<NoiseMode>& modes) {
  const FeSpace& s = *m_prev.space;
  // Every term is evaluated directly at the quadrature level (the same rule
  // the assembly uses, but through an independent code path), so a faulty
  // assembled operator or load shows up as a nonzero residual.
  double lhs = 0.0;
  double dissipation = 0.0;  // eps |Lap|^2 + kappa1 |grad|^2 + kappa2 weighted
  double strat = 0.0;
  double diff = 0.0;
  for (int c = 0; c < s.mesh->n_cells(); ++c) {
    if (p.epsilon != 0.0) {
      const Eigen::Vector3d lap = field_lap_on_cell(m_new, c);
      dissipation += p.epsilon * s.mesh->cell_measure(c) * lap.squaredNorm();
    }
    for (int q = 0; q < s.nq; ++q) {
      const int idx = c * s.nq + q;
      const double w = s.qw[idx];
      const Eigen::Vector3d mn = field_value_at_q(m_new, c, q);
      const Eigen::Vector3d mp = field_value_at_q(m_prev, c, q);
      lhs += w * (0.5 * mn.squaredNorm() + 0.5 * (mn - mp).squaredNorm() -
                  0.5 * mp.squaredNorm());
      const auto gn = field_grad_at_q(m_new, c, q);
      dissipation += w * p.kappa1 * gn.squaredNorm();
      dissipation +=
          w * p.kappa2 * (1.0 + p.mu * mp.squaredNorm()) * mn.squaredNorm();
      for (std::size_t ki = 0; ki < modes.size(); ++ki) {
        const Eigen::Vector3d g = modes[ki].qvals[idx] * modes[ki].dir;
        strat += w * 0.5 * mp.cross(g).dot(-mn.cross(g));
        diff += w * dWn[static_cast<Eigen::Index>(ki)] * (g + mp.cross(g)).dot(mn);
      }
    }
  }
  const bool active = delta_tau != 0.0;
  const double rhs =
      -delta_tau * dissipation + delta_tau * strat + (active ? diff : 0.0);
  return std::abs(lhs - rhs);
}

void update_stopping(StoppingState& st, double h1_monitor, double radius,
                     double t_now) {
  if (!st.active) return;
  st.tau = t_now;
  if (h1_monitor >= radius) st.active = false;
}

TrajectoryRecord run_trajectory(const PointFn& m0, const Eigen::MatrixXd& dW,
                                const SchemeParams& p, const SpacePtr& space,
                                const std::vector<NoiseMode>& modes,
                                const TrajectoryOptions& opts) {
  const FeSpace& s = *space;
  check_params(p, s);
  // The scheme pairs the spaces and the regularisation: 1D <=> eps = 0.
  if ((s.mesh->dim == 1) != (p.epsilon == 0.0))
    throw ConfigError(
        "run_trajectory: epsilon must be 0 exactly in 1D and positive in 2D");
  if (!(p.alpha > 0.0 && p.alpha < 0.5))
    throw ConfigError("run_trajectory: alpha must lie in (0, 1/2)");
  if (dW.rows() != static_cast<Eigen::Index>(modes.size()))
    throw ConfigError("run_trajectory: increment rows do not match modes");
  if (dW.cols() != p.n_steps)
    throw ConfigError("run_trajectory: increment columns do not match n_steps");

  const double dt = p.dt();
  const int N = p.n_steps;
  TrajectoryRecord rec;
  rec.h1_norms.reserve(N + 1);
  rec.delta_tau.reserve(N);
  rec.energy_resid.reserve(N);
  if (opts.record_fields) rec.fields.reserve(N + 1);

  Field m_prev = l2_project(space, m0, p.solve_tol);
  Norms nm = norms(m_prev);
  rec.h1_norms.push_back(nm.h1);
  if (opts.record_fields) rec.fields.push_back(m_prev);

  StoppingState st;
  long shared_active = -1;
  if (opts.shared_tau)
    shared_active = static_cast<long>(std::floor(*opts.shared_tau / dt + 1e-9));
  else
    update_stopping(st, nm.h1, p.radius, 0.0);

  double last_active_t = 0.0;
  for (int n = 1; n <= N; ++n) {
    const double t_n = n * dt;
    const double delta_tau = opts.shared_tau ? (n <= shared_active ? dt : 0.0)
                                             : (st.active ? dt : 0.0);
    Field m_new;
    try {
      m_new = step(m_prev, delta_tau, dW.col(n - 1), p, modes);
    } catch (const NumericError& e) {
      rec.aborted = true;
      rec.abort_step = n;
      rec.abort_msg = e.what();
      break;
    } catch (const SolveError& e) {
      rec.aborted = true;
      rec.abort_step = n;
      rec.abort_msg = e.what();
      break;
    }
    const double resid =
        (opts.record_energy && delta_tau != 0.0)
            ? energy_identity_residual(m_prev, m_new, delta_tau, dW.col(n - 1), p,
                                       modes)
            : 0.0;
    nm = norms(m_new);
    if (!std::isfinite(nm.h1)) {
      rec.aborted = true;
      rec.abort_step = n;
      rec.abort_msg = "non-finite H1 norm";
      break;
    }
    rec.delta_tau.push_back(delta_tau);
    rec.energy_resid.push_back(resid);
    rec.h1_norms.push_back(nm.h1);
    if (opts.record_fields) rec.fields.push_back(m_new);
    if (delta_tau != 0.0) last_active_t = t_n;
    if (!opts.shared_tau) update_stopping(st, nm.h1, p.radius, t_n);
    m_prev = std::move(m_new);
  }
  rec.stopped_at = opts.shared_tau ? last_active_t : st.tau;
  return rec;
}

}  // namespace llb
