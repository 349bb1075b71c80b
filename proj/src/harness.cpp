#include "llb/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <thread>

#include "llb/assemble.hpp"
#include "llb/philox.hpp"
#include "llb/util.hpp"

namespace llb {

namespace {

constexpr double kZ95 = 1.96;
constexpr int kResamples = 1000;

// Bootstrap index stream. Streams >= 2^32 can never collide with the
// per-mode path streams (k + 1 with k a small mode index).
std::uint64_t boot_index(std::uint64_t seed, int resample, int draw, int n) {
  return philox_u64(seed, (std::uint64_t{1} << 32) | std::uint64_t(resample),
                    std::uint64_t(draw)) %
         std::uint64_t(n);
}

Exceedance wilson_interval(int hits, int n) {
  Exceedance e;
  if (n <= 0) return e;
  const double p = double(hits) / n;
  const double z2 = kZ95 * kZ95;
  const double den = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / den;
  const double half =
      kZ95 * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / den;
  e.freq = p;
  e.ci_lo = std::max(0.0, center - half);
  e.ci_hi = std::min(1.0, center + half);
  return e;
}

// Runs fn(p) for p in [0, n) over the requested worker count. Results must go
// into preallocated per-p slots; aggregation stays ordered and outside.
void parallel_paths(int n, int threads, const std::function<void(int)>& fn) {
  const int workers = std::max(1, std::min(threads, n));
  if (workers == 1) {
    for (int p = 0; p < n; ++p) fn(p);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int p = next.fetch_add(1); p < n; p = next.fetch_add(1)) fn(p);
    });
  for (auto& t : pool) t.join();
}

bool is_pow2_multiple(int coarse, int fine) {
  if (coarse <= 0 || fine % coarse != 0) return false;
  const int q = fine / coarse;
  return (q & (q - 1)) == 0;
}

struct StudySetup {
  std::vector<SpacePtr> spaces;               // per level
  std::vector<std::vector<NoiseMode>> modes;  // per level, values cached
  std::vector<int> coarsen;                   // N_ref / N_level
  std::vector<double> hs, dts, radii;
};

StudySetup prepare_study(const ExperimentPlan& plan) {
  if (plan.dimension != 1 && plan.dimension != 2)
    throw ConfigError("study: dimension must be 1 or 2");
  if (plan.levels.size() < 2)
    throw ConfigError("study: need at least one level plus the reference");
  if (plan.n_paths < 1) throw ConfigError("study: need at least one path");
  if (!plan.m0) throw ConfigError("study: initial data not set");
  const StudyLevel& ref = plan.levels.back();
  if (ref.cells < 1 || ref.steps < 1)
    throw ConfigError("study: reference level is empty");

  int min_nx = ref.cells, min_ny = ref.cells_y;
  for (const StudyLevel& lv : plan.levels) {
    if (lv.cells < 1 || lv.steps < 1)
      throw ConfigError("study: every level needs cells >= 1 and steps >= 1");
    if (!is_pow2_multiple(lv.steps, ref.steps))
      throw ConfigError("study: level steps must divide the reference steps dyadically");
    if (!is_pow2_multiple(lv.cells, ref.cells))
      throw ConfigError("study: level meshes must be dyadic coarsenings of the reference");
    if (plan.dimension == 2) {
      if (lv.cells_y < 1 || !is_pow2_multiple(lv.cells_y, ref.cells_y) ||
          ref.cells / lv.cells != ref.cells_y / lv.cells_y)
        throw ConfigError("study: 2D levels must coarsen both directions together");
      min_ny = std::min(min_ny, lv.cells_y);
    }
    min_nx = std::min(min_nx, lv.cells);
  }

  // One mesh per distinct resolution, chained by refine() so prolongation can
  // walk the parent links.
  std::vector<MeshPtr> chain;
  MeshPtr m = plan.dimension == 1
                  ? build_interval_mesh(plan.lx, min_nx)
                  : build_structured_tri_mesh(plan.lx, plan.ly, min_nx, min_ny);
  chain.push_back(m);
  int nx = min_nx;
  while (nx < ref.cells) {
    m = refine(m);
    chain.push_back(m);
    nx *= 2;
  }

  const int degree = plan.dimension == 1 ? 1 : 2;
  std::vector<SpacePtr> space_by_chain(chain.size());
  StudySetup s;
  for (const StudyLevel& lv : plan.levels) {
    int j = 0;
    while (chain[j]->nx != lv.cells) ++j;
    if (!space_by_chain[j]) space_by_chain[j] = make_space(chain[j], degree);
    const SpacePtr& sp = space_by_chain[j];
    s.spaces.push_back(sp);
    s.modes.push_back(build_modes(plan.noise_count, plan.noise_decay,
                                  plan.noise_sigma, *sp));
    s.coarsen.push_back(ref.steps / lv.steps);
    const double h = sp->mesh->h();
    const double dt = plan.base.T / lv.steps;
    s.hs.push_back(h);
    s.dts.push_back(dt);
    if (plan.radius_auto) {
      s.radii.push_back(plan.dimension == 1
                            ? select_radius_1d(h, dt, plan.q, plan.beta,
                                               plan.base.alpha, plan.c_star)
                            : select_parameters_2d(h, dt, plan.q, plan.beta,
                                                   plan.base.alpha, plan.c_star)
                                  .radius);
    } else {
      s.radii.push_back(plan.radius_fixed);
    }
  }
  return s;
}

double level_mean(const ErrorReport& r, const std::vector<int>& ok, int level,
                  bool use_grad) {
  double acc = 0.0;
  for (int p : ok)
    acc += use_grad ? r.per_path[level][p].e_grad_sq
                    : r.per_path[level][p].e_max_sq;
  return acc / double(ok.size());
}

std::vector<int> ok_paths(const ErrorReport& r) {
  std::vector<int> ok;
  ok.reserve(r.path_ok.size());
  for (std::size_t p = 0; p < r.path_ok.size(); ++p)
    if (r.path_ok[p]) ok.push_back(int(p));
  return ok;
}

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = int(x.size());
  double xm = 0.0, ym = 0.0;
  for (int i = 0; i < n; ++i) {
    xm += x[i];
    ym += y[i];
  }
  xm /= n;
  ym /= n;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    num += (x[i] - xm) * (y[i] - ym);
    den += (x[i] - xm) * (x[i] - xm);
  }
  return num / den;
}

}  // namespace

Params2d select_parameters_2d(double h, double dt, double q, double beta,
                              double alpha, double c_star) {
  if (!(h > 0.0) || !(dt > 0.0) || !(q > 0.0) || !(beta > 0.0) ||
      !(beta < 1.0) || !(alpha > 0.0) || !(alpha < 0.5) || !(c_star > 0.0))
    throw ConfigError("select_parameters_2d: parameters out of range");
  const double base = h + std::pow(dt, alpha / 2.0);
  if (base >= 1.0)
    throw ConfigError(
        "select_parameters_2d: h + dt^(alpha/2) must be below 1 for the "
        "radius to be defined");
  Params2d out;
  out.radius = std::pow(-(q * beta / (2.0 * c_star)) * std::log(base), 1.0 / 9.0);
  const double from_radius = std::pow(out.radius, -1.0 / 3.0);
  const double from_dt = std::pow(dt, 0.375 * (alpha * q / 2.0) * (beta + 3.0));
  out.epsilon = std::max(from_radius, from_dt);
  return out;
}

double select_radius_1d(double h, double dt, double q, double beta, double alpha,
                        double c_star) {
  if (!(h > 0.0) || !(dt > 0.0) || !(q > 0.0) || !(beta > 0.0) ||
      !(beta < 1.0) || !(alpha > 0.0) || !(alpha < 0.5) || !(c_star > 0.0))
    throw ConfigError("select_radius_1d: parameters out of range");
  const double base = h + std::pow(dt, alpha);
  if (base >= 1.0)
    throw ConfigError(
        "select_radius_1d: h + dt^alpha must be below 1 for the radius to be "
        "defined");
  return std::pow(-(q * beta / c_star) * std::log(base), 1.0 / 4.0);
}

ErrorReport run_coupled_study(const ExperimentPlan& plan) {
  const StudySetup setup = prepare_study(plan);
  const int n_levels = int(plan.levels.size());
  const int n_paths = plan.n_paths;
  const StudyLevel& ref_level = plan.levels.back();
  const SpacePtr& ref_space = setup.spaces.back();
  const double dt_ref = plan.base.T / ref_level.steps;
  const SparseOperator& Mref = ref_space->M;
  const SparseOperator& Kref = ref_space->K;

  ErrorReport report;
  report.levels = plan.levels;
  report.hs = setup.hs;
  report.dts = setup.dts;
  report.radii = setup.radii;
  report.gamma = plan.gamma;
  report.beta = plan.beta;
  report.alpha = plan.base.alpha;
  report.base_seed = plan.base_seed;
  report.per_path.assign(n_levels, std::vector<PathLevelError>(n_paths));
  report.path_ok.assign(n_paths, 1);

  auto one_path = [&](int p) {
    try {
      const WienerPath fine = sample_path(plan.base_seed + std::uint64_t(p),
                                          plan.noise_count, ref_level.steps,
                                          dt_ref);
      SchemeParams pref = plan.base;
      pref.n_steps = ref_level.steps;
      pref.radius = std::numeric_limits<double>::infinity();
      TrajectoryOptions ropts;
      ropts.record_fields = true;
      ropts.record_energy = false;
      const TrajectoryRecord ref =
          run_trajectory(plan.m0, fine.dW, pref, ref_space, setup.modes.back(),
                         ropts);
      if (ref.aborted) {
        report.path_ok[p] = 0;
        return;
      }
      for (int l = 0; l < n_levels; ++l) {
        // Stopping time read off the reference H1 monitor with this level's R.
        double tau = plan.base.T;
        for (int j = 0; j <= ref_level.steps; ++j)
          if (ref.h1_norms[j] >= setup.radii[l]) {
            tau = j * dt_ref;
            break;
          }
        const WienerPath agg = aggregate_increments(fine, setup.coarsen[l]);
        SchemeParams pl = plan.base;
        pl.n_steps = plan.levels[l].steps;
        pl.radius = setup.radii[l];
        TrajectoryOptions lopts;
        lopts.record_fields = true;
        lopts.record_energy = false;
        lopts.shared_tau = tau;
        const TrajectoryRecord run = run_trajectory(
            plan.m0, agg.dW, pl, setup.spaces[l], setup.modes[l], lopts);
        if (run.aborted) {
          report.path_ok[p] = 0;
          return;
        }
        const double dt_l = setup.dts[l];
        const int n_active = int(std::floor(tau / dt_l + 1e-9));
        PathLevelError pe;
        pe.stopped_at = run.stopped_at;
        for (int n = 0; n <= n_active; ++n) {
          const Field pro = prolongate(run.fields[n], ref_space);
          const Eigen::VectorXd d =
              pro.coeffs - ref.fields[std::size_t(n) * setup.coarsen[l]].coeffs;
          pe.e_max_sq = std::max(pe.e_max_sq, d.dot(Mref * d));
          if (n >= 1) pe.e_grad_sq += d.dot(Kref * d) * dt_l;
        }
        report.per_path[l][p] = pe;
      }
    } catch (const std::exception&) {
      // A failed path is excluded from the aggregates, never fatal.
      report.path_ok[p] = 0;
    }
  };
  parallel_paths(n_paths, plan.threads, one_path);

  const std::vector<int> ok = ok_paths(report);
  report.n_aborted = n_paths - int(ok.size());
  if (ok.empty())
    throw NumericError("run_coupled_study: every path aborted");

  const int n_ok = int(ok.size());
  for (int l = 0; l < n_levels; ++l) {
    LevelAggregate a;
    a.h = setup.hs[l];
    a.dt = setup.dts[l];
    a.radius = setup.radii[l];
    a.is_reference = (l == n_levels - 1);
    a.mean_e_max_sq = level_mean(report, ok, l, false);
    a.mean_e_grad_sq = level_mean(report, ok, l, true);

    std::vector<double> boot(kResamples);
    for (int r = 0; r < kResamples; ++r) {
      double acc = 0.0;
      for (int i = 0; i < n_ok; ++i)
        acc += report.per_path[l][ok[boot_index(plan.base_seed, r, i, n_ok)]]
                   .e_max_sq;
      boot[r] = acc / n_ok;
    }
    std::sort(boot.begin(), boot.end());
    a.ci_lo = boot[25];
    a.ci_hi = boot[974];

    const double thr =
        plan.dimension == 1
            ? plan.gamma * std::pow(a.h + std::pow(a.dt, plan.base.alpha),
                                    1.0 - plan.beta)
            : plan.gamma *
                  (std::pow(plan.base.epsilon, 1.0 - plan.beta) +
                   std::pow(a.h + std::pow(a.dt, plan.base.alpha / 2.0),
                            1.0 - plan.beta));
    int hits = 0;
    for (int p : ok)
      if (report.per_path[l][p].e_max_sq + report.per_path[l][p].e_grad_sq > thr)
        ++hits;
    a.exceed_freq = double(hits) / n_ok;
    report.agg.push_back(a);
  }
  return report;
}

RateEstimate estimate_rates(const ErrorReport& report, RateAxis axis,
                            bool use_grad) {
  const int n_levels = int(report.levels.size());
  const int n_fit = n_levels - 1;  // reference excluded
  if (n_fit < 3)
    throw ConfigError("estimate_rates: need at least 3 non-reference levels");
  std::vector<double> x(n_fit);
  for (int l = 0; l < n_fit; ++l) {
    const double v = axis == RateAxis::H ? report.hs[l] : report.dts[l];
    const double other = axis == RateAxis::H ? report.dts[l] : report.hs[l];
    const double other0 = axis == RateAxis::H ? report.dts[0] : report.hs[0];
    if (other != other0)
      throw ConfigError(
          "estimate_rates: levels must vary only along the chosen axis");
    for (int m = 0; m < l; ++m)
      if ((axis == RateAxis::H ? report.hs[m] : report.dts[m]) == v)
        throw ConfigError("estimate_rates: duplicate level on the chosen axis");
    x[l] = std::log(v);
  }

  const std::vector<int> ok = ok_paths(report);
  if (ok.empty()) throw NumericError("estimate_rates: no usable paths");
  const int n_ok = int(ok.size());

  auto fit = [&](const std::vector<std::vector<double>>& means_by_level,
                 int r) -> double {
    std::vector<double> y(n_fit);
    for (int l = 0; l < n_fit; ++l) {
      const double m = means_by_level[l][r];
      y[l] = std::log(std::max(m, 1e-300));
    }
    return lsq_slope(x, y);
  };

  // means_by_level[l][0] is the plain mean; [l][1..kResamples] the resamples,
  // with the same resampled path set shared across levels (paths are coupled).
  std::vector<std::vector<double>> means(n_fit,
                                         std::vector<double>(kResamples + 1));
  for (int l = 0; l < n_fit; ++l)
    means[l][0] = level_mean(report, ok, l, use_grad);
  for (int r = 0; r < kResamples; ++r) {
    for (int l = 0; l < n_fit; ++l) means[l][r + 1] = 0.0;
    for (int i = 0; i < n_ok; ++i) {
      const int p = ok[boot_index(report.base_seed, r, i, n_ok)];
      for (int l = 0; l < n_fit; ++l)
        means[l][r + 1] += use_grad ? report.per_path[l][p].e_grad_sq
                                    : report.per_path[l][p].e_max_sq;
    }
    for (int l = 0; l < n_fit; ++l) means[l][r + 1] /= n_ok;
  }

  RateEstimate est;
  est.slope = fit(means, 0);
  std::vector<double> slopes(kResamples);
  for (int r = 0; r < kResamples; ++r) slopes[r] = fit(means, r + 1);
  double sm = 0.0;
  for (double s : slopes) sm += s;
  sm /= kResamples;
  double var = 0.0;
  for (double s : slopes) var += (s - sm) * (s - sm);
  est.se = std::sqrt(var / (kResamples - 1));
  std::sort(slopes.begin(), slopes.end());
  est.ci_lo = slopes[25];
  est.ci_hi = slopes[974];
  return est;
}

std::vector<Exceedance> exceedance_probability(
    const ErrorReport& report, double gamma, double beta,
    const std::vector<double>& rate_base) {
  if (rate_base.size() != report.levels.size())
    throw ConfigError("exceedance_probability: one rate base per level required");
  const std::vector<int> ok = ok_paths(report);
  if (ok.empty()) throw NumericError("exceedance_probability: no usable paths");
  std::vector<Exceedance> out;
  out.reserve(rate_base.size());
  for (std::size_t l = 0; l < rate_base.size(); ++l) {
    const double thr = gamma * std::pow(rate_base[l], 1.0 - beta);
    int hits = 0;
    for (int p : ok)
      if (report.per_path[l][p].e_max_sq + report.per_path[l][p].e_grad_sq > thr)
        ++hits;
    out.push_back(wilson_interval(hits, int(ok.size())));
  }
  return out;
}

std::vector<EpsilonRow> epsilon_convergence_study(const EpsilonStudyConfig& cfg) {
  if (cfg.dimension != 1)
    throw ConfigError(
        "epsilon study: only the 1D spectral reference is supported (the 1D "
        "scheme itself carries no regularisation term)");
  if (cfg.eps_values.empty())
    throw ConfigError("epsilon study: need at least one epsilon value");
  for (std::size_t i = 0; i < cfg.eps_values.size(); ++i) {
    const double e = cfg.eps_values[i];
    if (!(e > 0.0 && e < 1.0))
      throw ConfigError("epsilon study: epsilon values must lie in (0, 1)");
    if (i > 0 && e >= cfg.eps_values[i - 1])
      throw ConfigError("epsilon study: epsilon values must strictly decrease");
  }
  if (cfg.n_paths < 1 || cfg.n_modes < 1 || cfg.n_steps < 1 || cfg.substeps < 1)
    throw ConfigError("epsilon study: counts must be positive");
  if (!(cfg.T > 0.0)) throw ConfigError("epsilon study: need T > 0");
  if (!cfg.m0) throw ConfigError("epsilon study: initial data not set");

  const std::vector<NoiseMode> modes =
      build_modes(cfg.noise_count, cfg.noise_decay, cfg.noise_sigma, cfg.L);
  const SpectralState s0 = project_Pn(cfg.m0, cfg.n_modes, cfg.L);
  const double dt = cfg.T / cfg.n_steps;
  const int n_eps = int(cfg.eps_values.size());

  std::vector<std::vector<double>> sup(n_eps,
                                       std::vector<double>(cfg.n_paths, 0.0));
  std::vector<std::vector<double>> grad(n_eps,
                                        std::vector<double>(cfg.n_paths, 0.0));
  std::vector<char> ok(cfg.n_paths, 1);

  Eigen::VectorXd lam(cfg.n_modes);
  for (int i = 0; i < cfg.n_modes; ++i) lam[i] = spectral_eigenvalue(i, cfg.L);

  auto one_path = [&](int p) {
    try {
      const WienerPath path = sample_path(cfg.base_seed + std::uint64_t(p),
                                          cfg.noise_count, cfg.n_steps, dt);
      SchemeParams base = cfg.base;
      base.T = cfg.T;
      base.n_steps = cfg.n_steps;
      base.epsilon = 0.0;
      SpectralTrajectory limit;
      integrate(s0, path, base, cfg.substeps, modes, &limit);
      for (int e = 0; e < n_eps; ++e) {
        SchemeParams pe = base;
        pe.epsilon = cfg.eps_values[e];
        SpectralTrajectory traj;
        integrate(s0, path, pe, cfg.substeps, modes, &traj);
        double worst = 0.0, gacc = 0.0;
        for (int n = 0; n <= cfg.n_steps; ++n) {
          const Eigen::Matrix3Xd d =
              traj.states[n].c - limit.states[n].c;
          worst = std::max(worst, d.squaredNorm());
          if (n >= 1) {
            double h1 = 0.0;
            for (int i = 1; i < cfg.n_modes; ++i)
              h1 += lam[i] * d.col(i).squaredNorm();
            gacc += h1 * dt;
          }
        }
        sup[e][p] = worst;
        grad[e][p] = gacc;
      }
    } catch (const std::exception&) {
      ok[p] = 0;
    }
  };
  parallel_paths(cfg.n_paths, cfg.threads, one_path);

  std::vector<int> okidx;
  for (int p = 0; p < cfg.n_paths; ++p)
    if (ok[p]) okidx.push_back(p);
  if (okidx.empty())
    throw NumericError("epsilon study: every path aborted");

  std::vector<EpsilonRow> rows;
  rows.reserve(n_eps);
  for (int e = 0; e < n_eps; ++e) {
    EpsilonRow row;
    row.eps = cfg.eps_values[e];
    int hits = 0;
    for (int p : okidx) {
      row.mean_sup_l2_sq += sup[e][p];
      row.mean_grad_int += grad[e][p];
      if (sup[e][p] + grad[e][p] >
          cfg.gamma * std::pow(row.eps, 1.0 - cfg.beta))
        ++hits;
    }
    row.mean_sup_l2_sq /= double(okidx.size());
    row.mean_grad_int /= double(okidx.size());
    row.exceed = wilson_interval(hits, int(okidx.size()));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace llb
