#include "llb/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "llb/assemble.hpp"
#include "llb/config.hpp"
#include "llb/harness.hpp"
#include "llb/philox.hpp"
#include "llb/scheme.hpp"
#include "llb/solve.hpp"
#include "llb/util.hpp"

namespace llb {

namespace {

namespace fs = std::filesystem;

// First line of every CSV output. The digest covers the effective
// configuration text (seed overrides are appended to it), so equal digests
// imply equal result bytes; thread/out overrides never reach the digest.
std::string out_header(const RunConfig& cfg) {
  return "# llb-lab version=" + std::string(kVersion) +
         " config=" + config_digest(cfg) + " seed=" + std::to_string(cfg.seed) +
         " c_star=" + fmt_g17(cfg.c_star) + "\n";
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw ConfigError("cannot write '" + p.string() + "'");
  os << content;
  if (!os) throw ConfigError("failed writing '" + p.string() + "'");
}

SpacePtr space_from(const RunConfig& cfg) {
  const MeshPtr mesh =
      cfg.dimension == 1
          ? build_interval_mesh(cfg.lx, cfg.n_cells)
          : build_structured_tri_mesh(cfg.lx, cfg.ly, cfg.nx, cfg.ny);
  return make_space(mesh, cfg.dimension == 1 ? 1 : 2);
}

SchemeParams scheme_params(const RunConfig& cfg) {
  SchemeParams p;
  p.kappa1 = cfg.kappa1;
  p.kappa2 = cfg.kappa2;
  p.gamma = cfg.gamma;
  p.mu = cfg.mu;
  p.epsilon = cfg.epsilon;
  p.T = cfg.T;
  p.n_steps = cfg.n_steps;
  p.alpha = cfg.alpha;
  p.solve_tol = cfg.solve_tol;
  return p;
}

double pick_radius(const RunConfig& cfg, double h, double dt) {
  if (!cfg.radius_auto) return cfg.radius_value;
  return cfg.dimension == 1
             ? select_radius_1d(h, dt, cfg.q, cfg.beta, cfg.alpha, cfg.c_star)
             : select_parameters_2d(h, dt, cfg.q, cfg.beta, cfg.alpha,
                                    cfg.c_star)
                   .radius;
}

// ---------------------------------------------------------------- run ----

int cmd_run(const RunConfig& cfg) {
  validate_config(cfg);
  const SpacePtr space = space_from(cfg);
  const std::vector<NoiseMode> modes =
      build_modes(cfg.noise_modes, cfg.noise_decay, cfg.noise_sigma, *space);
  SchemeParams p = scheme_params(cfg);
  p.radius = pick_radius(cfg, space->mesh->h(), p.dt());
  const WienerPath path =
      sample_path(cfg.seed, cfg.noise_modes, cfg.n_steps, p.dt());

  TrajectoryOptions opts;
  opts.record_fields = cfg.dump_fields;
  opts.record_energy = true;
  const TrajectoryRecord rec =
      run_trajectory(make_m0(cfg), path.dW, p, space, modes, opts);

  fs::create_directories(cfg.out_dir);
  std::ostringstream csv;
  csv << out_header(cfg) << "step, t, delta_tau, h1_norm, energy_residual\n";
  const double dt = p.dt();
  for (std::size_t n = 0; n < rec.h1_norms.size(); ++n)
    csv << n << ", " << fmt_g17(double(n) * dt) << ", "
        << fmt_g17(n == 0 ? 0.0 : rec.delta_tau[n - 1]) << ", "
        << fmt_g17(rec.h1_norms[n]) << ", "
        << fmt_g17(n == 0 ? 0.0 : rec.energy_resid[n - 1]) << "\n";
  write_file(fs::path(cfg.out_dir) / "trajectory.csv", csv.str());

  if (cfg.dump_fields)
    for (std::size_t n = 0; n < rec.fields.size(); ++n) {
      char name[32];
      std::snprintf(name, sizeof name, "field_%06zu.field", n);
      std::ofstream os(fs::path(cfg.out_dir) / name, std::ios::binary);
      dump_field(rec.fields[n], os);
    }

  std::cout << "run: " << rec.h1_norms.size() - 1 << " steps, radius "
            << fmt_g17(p.radius) << ", stopped_at " << fmt_g17(rec.stopped_at)
            << ", final H1 " << fmt_g17(rec.h1_norms.back()) << "\n"
            << "run: wrote " << (fs::path(cfg.out_dir) / "trajectory.csv").string()
            << "\n";
  if (rec.aborted) {
    std::cerr << "run: numeric abort at step " << rec.abort_step << ": "
              << rec.abort_msg << "\n";
    return 3;
  }
  return 0;
}

// -------------------------------------------------------- convergence ----

int cmd_convergence(const RunConfig& cfg) {
  validate_config(cfg);
  if (cfg.levels.size() < 2)
    throw ConfigError(
        "experiment.levels needs at least 2 entries (the last is the "
        "reference level)");
  ExperimentPlan plan;
  plan.dimension = cfg.dimension;
  plan.lx = cfg.lx;
  plan.ly = cfg.ly;
  plan.levels = cfg.levels;
  plan.n_paths = cfg.paths;
  plan.base_seed = cfg.seed;
  plan.gamma = cfg.exp_gamma;
  plan.q = cfg.q;
  plan.beta = cfg.beta;
  plan.c_star = cfg.c_star;
  plan.radius_auto = cfg.radius_auto;
  if (!cfg.radius_auto) plan.radius_fixed = cfg.radius_value;
  plan.threads = cfg.threads;
  plan.base = scheme_params(cfg);
  plan.noise_count = cfg.noise_modes;
  plan.noise_decay = cfg.noise_decay;
  plan.noise_sigma = cfg.noise_sigma;
  plan.m0 = make_m0(cfg);

  const ErrorReport rep = run_coupled_study(plan);
  const int n_levels = int(rep.levels.size());

  fs::create_directories(cfg.out_dir);
  std::ostringstream pc;
  pc << out_header(cfg) << "level, h, dt, path, e_max_sq, e_grad_sq, stopped_at\n";
  for (int l = 0; l < n_levels; ++l)
    for (std::size_t p = 0; p < rep.per_path[l].size(); ++p) {
      if (!rep.path_ok[p]) continue;
      const PathLevelError& e = rep.per_path[l][p];
      pc << l << ", " << fmt_g17(rep.hs[l]) << ", " << fmt_g17(rep.dts[l])
         << ", " << p << ", " << fmt_g17(e.e_max_sq) << ", "
         << fmt_g17(e.e_grad_sq) << ", " << fmt_g17(e.stopped_at) << "\n";
    }
  write_file(fs::path(cfg.out_dir) / "report.csv", pc.str());

  std::ostringstream ac;
  ac << out_header(cfg)
     << "level, h, dt, mean_e_max_sq, mean_e_grad_sq, ci_lo, ci_hi, exceed_freq\n";
  for (int l = 0; l < n_levels; ++l) {
    const LevelAggregate& a = rep.agg[l];
    ac << l << ", " << fmt_g17(a.h) << ", " << fmt_g17(a.dt) << ", "
       << fmt_g17(a.mean_e_max_sq) << ", " << fmt_g17(a.mean_e_grad_sq) << ", "
       << fmt_g17(a.ci_lo) << ", " << fmt_g17(a.ci_hi) << ", "
       << fmt_g17(a.exceed_freq) << "\n";
  }
  write_file(fs::path(cfg.out_dir) / "aggregate.csv", ac.str());

  std::cout << "convergence: " << plan.n_paths << " paths ("
            << rep.n_aborted << " aborted), " << n_levels
            << " levels, base seed " << plan.base_seed << "\n";
  for (int l = 0; l < n_levels; ++l) {
    const LevelAggregate& a = rep.agg[l];
    int stopped = 0;
    for (std::size_t p = 0; p < rep.per_path[l].size(); ++p)
      if (rep.path_ok[p] &&
          rep.per_path[l][p].stopped_at < plan.base.T - 1e-12)
        ++stopped;
    std::cout << "  level " << l << (a.is_reference ? " (reference)" : "")
              << ": h=" << fmt_g17(a.h) << " dt=" << fmt_g17(a.dt)
              << " R=" << fmt_g17(a.radius)
              << " mean_e_max_sq=" << fmt_g17(a.mean_e_max_sq) << " ci=["
              << fmt_g17(a.ci_lo) << ", " << fmt_g17(a.ci_hi) << "]"
              << " exceed=" << fmt_g17(a.exceed_freq) << " stopped_paths="
              << stopped << "\n";
  }

  // Rate table. The stopped functionals are what the CSVs carry; the stopped
  // path counts above flag when they differ from unstopped errors.
  std::string axis = cfg.axis;
  if (axis == "auto") {
    bool hvar = false, dtvar = false;
    for (int l = 1; l + 1 < n_levels; ++l) {
      hvar = hvar || rep.hs[l] != rep.hs[0];
      dtvar = dtvar || rep.dts[l] != rep.dts[0];
    }
    axis = (hvar && !dtvar) ? "h" : (!hvar && dtvar) ? "dt" : "none";
  }
  if (axis == "none" || n_levels - 1 < 3) {
    std::cout << "  rate fit skipped (need >= 3 non-reference levels varying "
                 "along one axis)\n";
  } else {
    const RateAxis ra = axis == "h" ? RateAxis::H : RateAxis::Dt;
    const RateEstimate em = estimate_rates(rep, ra, false);
    const RateEstimate eg = estimate_rates(rep, ra, true);
    std::cout << "  rate of mean_e_max_sq vs " << axis << ": slope "
              << fmt_g17(em.slope) << " se " << fmt_g17(em.se) << " ci=["
              << fmt_g17(em.ci_lo) << ", " << fmt_g17(em.ci_hi) << "]\n"
              << "  rate of mean_e_grad_sq vs " << axis << ": slope "
              << fmt_g17(eg.slope) << " se " << fmt_g17(eg.se) << " ci=["
              << fmt_g17(eg.ci_lo) << ", " << fmt_g17(eg.ci_hi) << "]\n";
  }
  return 0;
}

// ------------------------------------------------------ epsilon study ----

int cmd_epsilon(const RunConfig& cfg) {
  validate_config(cfg);
  if (cfg.eps_values.empty())
    throw ConfigError(
        "epsilon.values must be set for the epsilon-study subcommand");
  EpsilonStudyConfig ec;
  ec.L = cfg.lx;
  ec.T = cfg.T;
  ec.n_modes = cfg.spectral_modes;
  ec.n_steps = cfg.n_steps;
  ec.substeps = cfg.spectral_substeps;
  ec.n_paths = cfg.paths;
  ec.base_seed = cfg.seed;
  ec.eps_values = cfg.eps_values;
  ec.gamma = cfg.exp_gamma;
  ec.beta = cfg.beta;
  ec.base = scheme_params(cfg);
  ec.noise_count = cfg.noise_modes;
  ec.noise_decay = cfg.noise_decay;
  ec.noise_sigma = cfg.noise_sigma;
  ec.m0 = make_m0(cfg);
  ec.threads = cfg.threads;
  ec.dimension = cfg.dimension;

  const std::vector<EpsilonRow> rows = epsilon_convergence_study(ec);

  fs::create_directories(cfg.out_dir);
  std::ostringstream csv;
  csv << out_header(cfg)
      << "eps, mean_sup_l2_sq, mean_grad_int, exceed_freq, ci_lo, ci_hi\n";
  for (const EpsilonRow& r : rows)
    csv << fmt_g17(r.eps) << ", " << fmt_g17(r.mean_sup_l2_sq) << ", "
        << fmt_g17(r.mean_grad_int) << ", " << fmt_g17(r.exceed.freq) << ", "
        << fmt_g17(r.exceed.ci_lo) << ", " << fmt_g17(r.exceed.ci_hi) << "\n";
  write_file(fs::path(cfg.out_dir) / "epsilon.csv", csv.str());

  std::cout << "epsilon-study: " << ec.n_paths << " paths, " << rows.size()
            << " epsilon values, " << ec.n_modes << " modes\n";
  for (const EpsilonRow& r : rows)
    std::cout << "  eps=" << fmt_g17(r.eps) << " mean_sup_l2_sq="
              << fmt_g17(r.mean_sup_l2_sq) << " mean_grad_int="
              << fmt_g17(r.mean_grad_int) << " exceed=" << fmt_g17(r.exceed.freq)
              << " ci=[" << fmt_g17(r.exceed.ci_lo) << ", "
              << fmt_g17(r.exceed.ci_hi) << "]\n";
  return 0;
}

// ----------------------------------------------------------- validate ----

PointFn smooth_preset(int dimension, double scale) {
  RunConfig rc;
  rc.dimension = dimension;
  rc.m0 = "smooth:" + fmt_g17(scale);
  return make_m0(rc);
}

std::string check_mass_oracle() {
  const SpacePtr sp = make_space(build_interval_mesh(1.0, 8), 1);
  const double h = 1.0 / 8.0;
  const struct { int i, j; double v; } expect[] = {
      {4, 3, h / 6.0}, {4, 4, 4.0 * h / 6.0}, {4, 5, h / 6.0},
      {0, 0, 2.0 * h / 6.0}, {8, 8, 2.0 * h / 6.0}};
  for (const auto& e : expect)
    if (std::abs(sp->M.coeff(e.i, e.j) - e.v) > 1e-13)
      return "scalar mass entry (" + std::to_string(e.i) + "," +
             std::to_string(e.j) + ") off the h/6 stencil";
  if (sp->M.coeff(4, sp->n_scalar + 4) != 0.0)
    return "mass matrix couples components";
  return {};
}

std::string check_stiffness_oracle() {
  const SpacePtr sp = make_space(build_interval_mesh(1.0, 8), 1);
  const double h = 1.0 / 8.0;
  const struct { int i, j; double v; } expect[] = {
      {4, 3, -1.0 / h}, {4, 4, 2.0 / h}, {4, 5, -1.0 / h}};
  for (const auto& e : expect)
    if (std::abs(sp->K.coeff(e.i, e.j) - e.v) > 1e-12)
      return "scalar stiffness entry off the 1/h stencil";
  const Field u = interpolate(
      sp, [](double x, double) { return Eigen::Vector3d(x, 0.0, 0.0); });
  const double uku = u.coeffs.dot(sp->K * u.coeffs);
  if (std::abs(uku - 1.0) > 1e-12)
    return "grad-energy of u=x is " + fmt_g17(uku) + ", want 1";
  return {};
}

std::string check_bilaplacian_oracle() {
  const SpacePtr sp = make_space(build_structured_tri_mesh(1.0, 1.0, 4, 4), 2);
  const Field u = interpolate(
      sp, [](double x, double) { return Eigen::Vector3d(x * x, 0.0, 0.0); });
  const double ubu = u.coeffs.dot(sp->B * u.coeffs);
  if (std::abs(ubu - 4.0) > 1e-10)
    return "elementwise |Lap x^2|^2 is " + fmt_g17(ubu) + ", want 4";
  return {};
}

std::string check_cross_skew() {
  const SpacePtr sp = make_space(build_interval_mesh(1.0, 16), 1);
  Field m(sp);
  for (int i = 0; i < m.coeffs.size(); ++i)
    m.coeffs[i] = philox_normal(901, 0, std::uint64_t(i));
  const SparseOperator C = assemble_cross_convection(*sp, m);
  for (int v = 0; v < 100; ++v) {
    Eigen::VectorXd x(sp->n_dofs());
    for (int i = 0; i < x.size(); ++i)
      x[i] = philox_normal(902, std::uint64_t(v) + 1, std::uint64_t(i));
    x.normalize();
    const double r = x.dot(C * x);
    if (std::abs(r) > 1e-12)
      return "x'Cx = " + fmt_g17(r) + " on vector " + std::to_string(v);
  }
  return {};
}

std::string check_energy_identity() {
  {
    const SpacePtr sp = make_space(build_interval_mesh(1.0, 32), 1);
    const std::vector<NoiseMode> modes = build_modes(4, 4.0, 0.5, *sp);
    SchemeParams p;
    p.T = 0.5;
    p.n_steps = 50;
    const WienerPath path = sample_path(4242, 4, 50, p.dt());
    TrajectoryOptions opts;
    opts.record_fields = false;
    const TrajectoryRecord rec =
        run_trajectory(smooth_preset(1, 0.25), path.dW, p, sp, modes, opts);
    if (rec.aborted) return "1D trajectory aborted: " + rec.abort_msg;
    for (std::size_t n = 0; n < rec.energy_resid.size(); ++n) {
      const double h1 = rec.h1_norms[n + 1];
      if (rec.energy_resid[n] > 1e-9 * (1.0 + h1 * h1))
        return "1D step " + std::to_string(n + 1) + " residual " +
               fmt_g17(rec.energy_resid[n]);
    }
  }
  {
    const SpacePtr sp = make_space(build_structured_tri_mesh(1.0, 1.0, 6, 6), 2);
    const std::vector<NoiseMode> modes = build_modes(1, 4.0, 0.5, *sp);
    SchemeParams p;
    p.epsilon = 0.1;
    p.T = 0.2;
    p.n_steps = 20;
    const WienerPath path = sample_path(4243, 1, 20, p.dt());
    TrajectoryOptions opts;
    opts.record_fields = false;
    const TrajectoryRecord rec =
        run_trajectory(smooth_preset(2, 0.25), path.dW, p, sp, modes, opts);
    if (rec.aborted) return "2D trajectory aborted: " + rec.abort_msg;
    for (std::size_t n = 0; n < rec.energy_resid.size(); ++n) {
      const double h1 = rec.h1_norms[n + 1];
      if (rec.energy_resid[n] > 1e-9 * (1.0 + h1 * h1))
        return "2D step " + std::to_string(n + 1) + " residual " +
               fmt_g17(rec.energy_resid[n]);
    }
  }
  return {};
}

std::string check_stopping_invariants() {
  const SpacePtr sp = make_space(build_interval_mesh(1.0, 16), 1);
  const std::vector<NoiseMode> modes = build_modes(2, 4.0, 0.5, *sp);
  SchemeParams p;
  p.T = 1.0;
  p.n_steps = 40;
  const WienerPath path = sample_path(515, 2, 40, p.dt());
  for (double radius : {0.0, 0.6, 1e9}) {
    p.radius = radius;
    TrajectoryOptions opts;
    const TrajectoryRecord rec =
        run_trajectory(smooth_preset(1, 0.25), path.dW, p, sp, modes, opts);
    if (rec.aborted) return "trajectory aborted";
    bool seen_zero = false;
    for (std::size_t n = 0; n < rec.delta_tau.size(); ++n) {
      const double dtau = rec.delta_tau[n];
      if (dtau != 0.0 && dtau != p.dt())
        return "delta_tau outside {0, dt} at step " + std::to_string(n + 1);
      if (seen_zero && dtau != 0.0)
        return "indicator re-activated at step " + std::to_string(n + 1);
      if (dtau == 0.0) {
        seen_zero = true;
        if (!(rec.fields[n + 1].coeffs.array() == rec.fields[n].coeffs.array())
                 .all())
          return "field changed on a frozen step";
      }
    }
    if (radius == 0.0 &&
        (rec.stopped_at != 0.0 ||
         !(rec.fields.back().coeffs.array() == rec.fields[0].coeffs.array())
              .all()))
      return "R = 0 did not freeze the trajectory at the initial datum";
    if (radius == 1e9 && rec.stopped_at != p.T)
      return "R = 1e9 run claims to have stopped early";
  }
  return {};
}

std::string check_coupling_exactness() {
  const WienerPath path = sample_path(99, 3, 16, 1.0 / 16.0);
  const WienerPath same = aggregate_increments(path, 1);
  if (!(same.dW.array() == path.dW.array()).all())
    return "factor-1 aggregation is not a bitwise copy";

  ExperimentPlan plan;
  plan.dimension = 1;
  plan.levels = {{16, 0, 16}, {16, 0, 16}};  // duplicate of the reference
  plan.n_paths = 2;
  plan.base_seed = 77;
  plan.radius_auto = false;
  plan.radius_fixed = std::numeric_limits<double>::infinity();
  plan.base.T = 0.25;
  plan.noise_count = 2;
  plan.m0 = smooth_preset(1, 0.25);
  const ErrorReport rep = run_coupled_study(plan);
  if (rep.n_aborted != 0) return "paths aborted in the duplicate-level study";
  for (const PathLevelError& e : rep.per_path[0])
    if (e.e_max_sq != 0.0 || e.e_grad_sq != 0.0)
      return "self-comparison errors are not exactly zero";
  return {};
}

std::string check_riccati_oracle() {
  const SpacePtr sp = make_space(build_interval_mesh(1.0, 8), 1);
  const std::vector<NoiseMode> modes;  // deterministic
  SchemeParams p;
  p.T = 1.0;
  p.n_steps = 64;
  const Eigen::MatrixXd dW(0, 64);
  TrajectoryOptions opts;
  const TrajectoryRecord rec = run_trajectory(
      [](double, double) { return Eigen::Vector3d(1.0, 0.0, 0.0); }, dW, p, sp,
      modes, opts);
  if (rec.aborted) return "trajectory aborted";
  const double dt = p.dt();
  double y = 1.0;  // lagged-coefficient scalar recursion for constant data
  for (int n = 1; n <= p.n_steps; ++n) {
    y = y / (1.0 + dt * p.kappa2 * (1.0 + p.mu * y * y));
    const double got = rec.fields[n].at(0, 4);
    if (std::abs(got - y) > 1e-10)
      return "FEM step " + std::to_string(n) +
             " deviates from the scalar recursion by " + fmt_g17(got - y);
  }
  const double e2 = std::exp(-2.0);
  const double m_exact = std::sqrt(e2 / (1.0 + (1.0 - e2)));
  if (std::abs(y - m_exact) > 0.05)
    return "recursion end value " + fmt_g17(y) + " far from closed form " +
           fmt_g17(m_exact);
  return {};
}

std::string check_solver_dual_route() {
  const SpacePtr sp = make_space(build_interval_mesh(1.0, 50), 1);
  Field m(sp);
  for (int i = 0; i < m.coeffs.size(); ++i)
    m.coeffs[i] = 0.5 * philox_normal(31, 0, std::uint64_t(i));
  SparseOperator A = sp->M + 0.01 * sp->K;
  A += 0.01 * assemble_cross_convection(*sp, m);
  Eigen::VectorXd b(sp->n_dofs());
  for (int i = 0; i < b.size(); ++i)
    b[i] = philox_normal(32, 0, std::uint64_t(i));
  const Eigen::VectorXd xd = solve_sparse(A, b, 1e-12, SolveMethod::Dense);
  const Eigen::VectorXd xi = solve_sparse(A, b, 1e-12, SolveMethod::Iterative);
  const double rel = (xd - xi).norm() / xd.norm();
  if (rel > 1e-8) return "dense and iterative routes differ by " + fmt_g17(rel);
  return {};
}

int cmd_validate(const std::string& fault) {
  if (!fault.empty() && fault != "strat-sign")
    throw ConfigError("unknown fault '" + fault +
                      "' (available: strat-sign)");
  test_hooks::flip_strat_sign = (fault == "strat-sign");

  const std::vector<std::pair<const char*, std::function<std::string()>>>
      checks = {
          {"assembly-mass-oracle", check_mass_oracle},
          {"assembly-stiffness-oracle", check_stiffness_oracle},
          {"assembly-bilaplacian-oracle", check_bilaplacian_oracle},
          {"assembly-cross-skew", check_cross_skew},
          {"energy-identity", check_energy_identity},
          {"stopping-invariants", check_stopping_invariants},
          {"coupling-exactness", check_coupling_exactness},
          {"riccati-oracle", check_riccati_oracle},
          {"solver-dual-route", check_solver_dual_route},
      };
  int failed = 0;
  for (const auto& [name, fn] : checks) {
    std::string msg;
    try {
      msg = fn();
    } catch (const std::exception& e) {
      msg = e.what();
    }
    if (msg.empty()) {
      std::cout << "[PASS] " << name << "\n";
    } else {
      std::cout << "[FAIL] " << name << ": " << msg << "\n";
      ++failed;
    }
  }
  test_hooks::flip_strat_sign = false;
  std::cout << "validate: " << checks.size() - failed << "/" << checks.size()
            << " checks passed\n";
  return failed == 0 ? 0 : 2;
}

struct CommonOpts {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
};

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--config", o.config, "configuration file")->required();
  sub->add_option("--seed", o.seed, "override noise.seed");
  sub->add_option("--threads", o.threads, "override run.threads");
  sub->add_option("--out", o.out, "override output.dir");
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"truncated stochastic Landau-Lifshitz-Bloch laboratory"};
  app.require_subcommand(1);

  CommonOpts run_o, conv_o, eps_o;
  CLI::App* c_run =
      app.add_subcommand("run", "single trajectory with per-step CSV");
  add_common(c_run, run_o);
  CLI::App* c_conv = app.add_subcommand(
      "convergence", "coupled multi-level Monte Carlo study");
  add_common(c_conv, conv_o);
  CLI::App* c_eps = app.add_subcommand(
      "epsilon-study", "regularisation-removal study on the spectral reference");
  add_common(c_eps, eps_o);
  std::string fault;
  CLI::App* c_val =
      app.add_subcommand("validate", "built-in property suite (no config)");
  c_val->add_option("--inject-fault", fault)->group("");  // test hook

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (c_val->parsed()) return cmd_validate(fault);
    CommonOpts& o = c_run->parsed() ? run_o
                    : c_conv->parsed() ? conv_o
                                       : eps_o;
    RunConfig cfg = load_config(o.config);
    if (o.seed) {
      cfg.seed = *o.seed;
      if (!cfg.raw_text.empty() && cfg.raw_text.back() != '\n')
        cfg.raw_text += '\n';
      cfg.raw_text += "noise.seed = " + std::to_string(*o.seed) + "\n";
    }
    if (o.threads) cfg.threads = *o.threads;
    if (o.out) cfg.out_dir = *o.out;
    if (c_run->parsed()) return cmd_run(cfg);
    if (c_conv->parsed()) return cmd_convergence(cfg);
    return cmd_epsilon(cfg);
  } catch (const SolveError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const LlbError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace llb
