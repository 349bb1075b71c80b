// Flat key-value run configuration ("key = value" lines, '#' comments,
// dotted keys). Unknown keys and ill-typed values are rejected with the
// offending key named.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "llb/harness.hpp"

namespace llb {

struct RunConfig {
  // domain / model
  int dimension = 1;
  double lx = 1.0, ly = 1.0;
  double kappa1 = 1.0, kappa2 = 1.0, gamma = 1.0, mu = 1.0;
  double epsilon = 0.0;
  // discretisation
  double T = 1.0;
  int n_cells = 64, nx = 8, ny = 8;
  int n_steps = 128;
  double alpha = 0.45;
  double solve_tol = 1e-10;
  // stopping
  bool radius_auto = true;
  double radius_value = 0.0;  // used when !radius_auto
  double q = 0.5, beta = 0.5, c_star = 1.0;
  // noise
  int noise_modes = 8;
  double noise_decay = 4.0, noise_sigma = 0.5;
  std::uint64_t seed = 12345;
  // initial data preset: zero | constant:a,b,c | smooth | smooth:scale
  std::string m0 = "smooth:0.25";
  // convergence experiment
  std::vector<StudyLevel> levels;
  int paths = 100;
  double exp_gamma = 1.0;
  std::string axis = "auto";  // auto | h | dt
  // epsilon study
  std::vector<double> eps_values;
  int spectral_modes = 48;
  int spectral_substeps = 1;
  // output / execution
  std::string out_dir = "out";
  bool dump_fields = false;
  int threads = 1;

  std::string raw_text;  // exact file contents, for the digest
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

// Cross-field checks (dimension vs epsilon, ranges, level nesting shape).
void validate_config(const RunConfig& cfg);

// Pointwise initial-data preset named by cfg.m0.
PointFn make_m0(const RunConfig& cfg);

// FNV-1a digest of the raw config text, as stamped into output headers.
std::string config_digest(const RunConfig& cfg);

}  // namespace llb
