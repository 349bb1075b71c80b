#include "llb/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "llb/util.hpp"

namespace llb {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const char* want,
                            const std::string& got) {
  throw ConfigError("config: key '" + key + "' expects " + want + ", got '" +
                    got + "'");
}

long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const char* first = v.data();
  const char* last = v.data() + v.size();
  const auto r = std::from_chars(first, last, out);
  if (r.ec != std::errc{} || r.ptr != last) bad_value(key, "an integer", v);
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const char* last = v.data() + v.size();
  const auto r = std::from_chars(v.data(), last, out);
  if (r.ec != std::errc{} || r.ptr != last)
    bad_value(key, "a nonnegative integer", v);
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) bad_value(key, "a real number", v);
    return out;
  } catch (const std::logic_error&) {
    bad_value(key, "a real number", v);
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, "a boolean (true/false)", v);
}

// "cells:steps" in 1D, "nx,ny:steps" in 2D; entries whitespace-separated.
std::vector<StudyLevel> parse_levels(const std::string& key,
                                     const std::string& v) {
  std::vector<StudyLevel> out;
  for (const std::string& tok : split_ws(v)) {
    const std::size_t colon = tok.find(':');
    if (colon == std::string::npos)
      bad_value(key, "entries of the form cells:steps or nx,ny:steps", tok);
    const std::string cells = tok.substr(0, colon);
    StudyLevel lv;
    lv.steps = static_cast<int>(parse_int(key, tok.substr(colon + 1)));
    const std::size_t comma = cells.find(',');
    if (comma == std::string::npos) {
      lv.cells = static_cast<int>(parse_int(key, cells));
    } else {
      lv.cells = static_cast<int>(parse_int(key, cells.substr(0, comma)));
      lv.cells_y = static_cast<int>(parse_int(key, cells.substr(comma + 1)));
    }
    out.push_back(lv);
  }
  return out;
}

std::vector<double> parse_real_list(const std::string& key,
                                    const std::string& v) {
  std::vector<double> out;
  for (const std::string& tok : split_ws(v)) out.push_back(parse_real(key, tok));
  return out;
}

void apply_key(RunConfig& c, const std::string& key, const std::string& v) {
  if (key == "model.dimension") c.dimension = int(parse_int(key, v));
  else if (key == "model.lx") c.lx = parse_real(key, v);
  else if (key == "model.ly") c.ly = parse_real(key, v);
  else if (key == "model.kappa1") c.kappa1 = parse_real(key, v);
  else if (key == "model.kappa2") c.kappa2 = parse_real(key, v);
  else if (key == "model.gamma") c.gamma = parse_real(key, v);
  else if (key == "model.mu") c.mu = parse_real(key, v);
  else if (key == "model.epsilon") c.epsilon = parse_real(key, v);
  else if (key == "time.T") c.T = parse_real(key, v);
  else if (key == "time.steps") c.n_steps = int(parse_int(key, v));
  else if (key == "time.alpha") c.alpha = parse_real(key, v);
  else if (key == "mesh.cells") c.n_cells = int(parse_int(key, v));
  else if (key == "mesh.nx") c.nx = int(parse_int(key, v));
  else if (key == "mesh.ny") c.ny = int(parse_int(key, v));
  else if (key == "solver.tol") c.solve_tol = parse_real(key, v);
  else if (key == "stopping.radius") {
    if (v == "auto") {
      c.radius_auto = true;
    } else {
      c.radius_auto = false;
      c.radius_value = parse_real(key, v);
    }
  }
  else if (key == "stopping.q") c.q = parse_real(key, v);
  else if (key == "stopping.beta") c.beta = parse_real(key, v);
  else if (key == "stopping.c_star") c.c_star = parse_real(key, v);
  else if (key == "noise.modes") c.noise_modes = int(parse_int(key, v));
  else if (key == "noise.decay") c.noise_decay = parse_real(key, v);
  else if (key == "noise.sigma") c.noise_sigma = parse_real(key, v);
  else if (key == "noise.seed") c.seed = parse_u64(key, v);
  else if (key == "init.m0") c.m0 = v;
  else if (key == "experiment.levels") c.levels = parse_levels(key, v);
  else if (key == "experiment.paths") c.paths = int(parse_int(key, v));
  else if (key == "experiment.gamma") c.exp_gamma = parse_real(key, v);
  else if (key == "experiment.axis") c.axis = v;
  else if (key == "epsilon.values") c.eps_values = parse_real_list(key, v);
  else if (key == "epsilon.modes") c.spectral_modes = int(parse_int(key, v));
  else if (key == "epsilon.substeps") c.spectral_substeps = int(parse_int(key, v));
  else if (key == "output.dir") c.out_dir = v;
  else if (key == "output.dump_fields") c.dump_fields = parse_bool(key, v);
  else if (key == "run.threads") c.threads = int(parse_int(key, v));
  else throw ConfigError("config: unknown key '" + key + "'");
}

[[noreturn]] void invalid(const std::string& what) {
  throw ConfigError("config: " + what);
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  cfg.raw_text = text;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected 'key = value' at line " +
                        std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config: empty key or value at line " +
                        std::to_string(lineno));
    apply_key(cfg, key, value);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void validate_config(const RunConfig& c) {
  if (c.dimension != 1 && c.dimension != 2)
    invalid("model.dimension must be 1 or 2");
  if (!(c.lx > 0.0)) invalid("model.lx must be positive");
  if (c.dimension == 2 && !(c.ly > 0.0)) invalid("model.ly must be positive");
  if (c.kappa1 < 0.0) invalid("model.kappa1 must be nonnegative");
  if (c.kappa2 < 0.0) invalid("model.kappa2 must be nonnegative");
  if (c.mu < 0.0) invalid("model.mu must be nonnegative");
  if (c.dimension == 1 && c.epsilon != 0.0)
    invalid("model.epsilon must be 0 in 1D (the regularisation exists only in 2D)");
  if (c.dimension == 2 && !(c.epsilon > 0.0 && c.epsilon < 1.0))
    invalid("model.epsilon must lie in (0, 1) in 2D");
  if (!(c.T > 0.0)) invalid("time.T must be positive");
  if (c.n_steps < 1) invalid("time.steps must be at least 1");
  if (!(c.alpha > 0.0 && c.alpha < 0.5))
    invalid("time.alpha must lie in (0, 0.5)");
  if (!(c.solve_tol > 0.0)) invalid("solver.tol must be positive");
  if (c.dimension == 1 && c.n_cells < 1) invalid("mesh.cells must be at least 1");
  if (c.dimension == 2 && (c.nx < 1 || c.ny < 1))
    invalid("mesh.nx and mesh.ny must be at least 1");
  if (!c.radius_auto && c.radius_value < 0.0)
    invalid("stopping.radius must be nonnegative or 'auto'");
  if (!(c.q > 0.0)) invalid("stopping.q must be positive");
  if (!(c.beta > 0.0 && c.beta < 1.0)) invalid("stopping.beta must lie in (0, 1)");
  if (!(c.c_star > 0.0)) invalid("stopping.c_star must be positive");
  if (c.noise_modes < 0) invalid("noise.modes must be nonnegative");
  if (c.noise_modes > 0 && !(c.noise_decay > 3.5))
    invalid("noise.decay must exceed 3.5 (H^3-weighted tail summability)");
  if (c.noise_sigma < 0.0) invalid("noise.sigma must be nonnegative");
  for (const StudyLevel& lv : c.levels) {
    if (lv.cells < 1 || lv.steps < 1)
      invalid("experiment.levels entries need cells >= 1 and steps >= 1");
    if (c.dimension == 2 && lv.cells_y < 1)
      invalid("experiment.levels entries need nx,ny:steps in 2D");
  }
  if (c.paths < 1) invalid("experiment.paths must be at least 1");
  if (!(c.exp_gamma > 0.0)) invalid("experiment.gamma must be positive");
  if (c.axis != "auto" && c.axis != "h" && c.axis != "dt")
    invalid("experiment.axis must be auto, h, or dt");
  for (std::size_t i = 0; i < c.eps_values.size(); ++i) {
    if (!(c.eps_values[i] > 0.0 && c.eps_values[i] < 1.0))
      invalid("epsilon.values must lie in (0, 1)");
    if (i > 0 && c.eps_values[i] >= c.eps_values[i - 1])
      invalid("epsilon.values must strictly decrease");
  }
  if (c.spectral_modes < 1) invalid("epsilon.modes must be at least 1");
  if (c.spectral_substeps < 1) invalid("epsilon.substeps must be at least 1");
  if (c.out_dir.empty()) invalid("output.dir must not be empty");
  if (c.threads < 1) invalid("run.threads must be at least 1");
  make_m0(c);  // rejects unknown presets with the key named
}

PointFn make_m0(const RunConfig& cfg) {
  const std::string& spec = cfg.m0;
  const double lx = cfg.lx, ly = cfg.ly;
  const bool two_d = cfg.dimension == 2;
  if (spec == "zero")
    return [](double, double) { return Eigen::Vector3d::Zero().eval(); };
  if (spec.rfind("constant:", 0) == 0) {
    const std::vector<std::string> parts = [&] {
      std::vector<std::string> p;
      std::string rest = spec.substr(9);
      std::size_t pos = 0;
      while ((pos = rest.find(',')) != std::string::npos) {
        p.push_back(rest.substr(0, pos));
        rest.erase(0, pos + 1);
      }
      p.push_back(rest);
      return p;
    }();
    if (parts.size() != 3)
      throw ConfigError("init.m0: constant preset needs three values a,b,c");
    Eigen::Vector3d v;
    for (int i = 0; i < 3; ++i) v[i] = parse_real("init.m0", trim(parts[i]));
    return [v](double, double) { return v; };
  }
  if (spec == "smooth" || spec.rfind("smooth:", 0) == 0) {
    const double scale =
        spec == "smooth" ? 1.0 : parse_real("init.m0", spec.substr(7));
    if (!two_d)
      return [scale, lx](double x, double) {
        return Eigen::Vector3d(scale * (0.6 + 0.3 * std::cos(kPi * x / lx)),
                               scale * 0.4 * std::cos(2.0 * kPi * x / lx),
                               scale * (0.2 + 0.2 * std::cos(kPi * x / lx)));
      };
    return [scale, lx, ly](double x, double y) {
      return Eigen::Vector3d(
          scale * (0.6 + 0.3 * std::cos(kPi * x / lx) * std::cos(kPi * y / ly)),
          scale * 0.4 * std::cos(kPi * x / lx),
          scale * (0.2 + 0.2 * std::cos(kPi * y / ly)));
    };
  }
  throw ConfigError("init.m0: unknown preset '" + spec +
                    "' (use zero | constant:a,b,c | smooth | smooth:scale)");
}

std::string config_digest(const RunConfig& cfg) {
  return hex64(fnv1a64(cfg.raw_text));
}

}  // namespace llb
