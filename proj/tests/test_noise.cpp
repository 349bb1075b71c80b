// Counter-based noise: Philox known-answer vectors, path sampling and
// aggregation, the cosine mode family, and the two noise loads.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "llb/assemble.hpp"
#include "llb/noise.hpp"
#include "llb/philox.hpp"
#include "llb/util.hpp"

using namespace llb;

namespace {

SpacePtr interval_space(int n, double lx = 1.0) {
  return make_space(build_interval_mesh(lx, n), 1);
}

NoiseMode constant_mode(double amplitude, const Eigen::Vector3d& dir,
                        const FeSpace& space) {
  NoiseMode m;
  m.k = 0;  // cos(0) = 1: spatially constant profile
  m.amplitude = amplitude;
  m.dir = dir;
  m.L = space.mesh->lx;
  std::vector<NoiseMode> v{m};
  cache_mode_values(v, space);
  return v[0];
}

Field constant_field(const SpacePtr& s, const Eigen::Vector3d& v) {
  return interpolate(s, [v](double, double) { return v; });
}

}  // namespace

TEST_CASE("Philox4x32-10 known-answer vectors") {
  // Zero counter, zero key.
  const auto z = philox4x32({0u, 0u, 0u, 0u}, 0u, 0u);
  CHECK(z[0] == 0x6627e8d5u);
  CHECK(z[1] == 0xe169c58du);
  CHECK(z[2] == 0xbc57ac4cu);
  CHECK(z[3] == 0x9b00dbd8u);
  // All-ones counter and key.
  const auto f = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                            0xffffffffu, 0xffffffffu);
  CHECK(f[0] == 0x408f276du);
  CHECK(f[1] == 0x41c83b0eu);
  CHECK(f[2] == 0xa20bc7c6u);
  CHECK(f[3] == 0x6d5451fdu);
  // Pi-digit counter/key.
  const auto p = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                            0xa4093822u, 0x299f31d0u);
  CHECK(p[0] == 0xd16cfe09u);
  CHECK(p[1] == 0x94fdccebu);
  CHECK(p[2] == 0x5001e420u);
  CHECK(p[3] == 0x24126ea1u);
}

TEST_CASE("64-bit packing of the Philox words") {
  const auto w = philox_u64x2(0, 0, 0);
  CHECK(w[0] == 0xe169c58d6627e8d5ull);
  CHECK(w[1] == 0x9b00dbd8bc57ac4cull);
  CHECK(philox_u64(0, 0, 0) == w[0]);
}

TEST_CASE("philox_normal is a pure function with normal statistics") {
  CHECK(philox_normal(42, 3, 7) == philox_normal(42, 3, 7));
  CHECK(philox_normal(42, 3, 7) != philox_normal(42, 3, 8));
  CHECK(philox_normal(42, 3, 7) != philox_normal(42, 4, 7));
  CHECK(philox_normal(43, 3, 7) != philox_normal(42, 3, 7));

  const int n = 100000;
  double mean = 0.0, var = 0.0;
  int exceed = 0;
  for (int i = 0; i < n; ++i) {
    const double z = philox_normal(2026, 1, i);
    mean += z;
    var += z * z;
    if (std::abs(z) > 1.96) ++exceed;
  }
  mean /= n;
  var = var / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
  CHECK(static_cast<double>(exceed) / n == doctest::Approx(0.05).epsilon(0.2));
}

TEST_CASE("build_modes: power-law amplitudes and cycling directions") {
  const auto modes = build_modes(5, 4.0, 2.0, 1.0);
  REQUIRE(modes.size() == 5);
  CHECK(modes[0].k == 1);
  CHECK(modes[0].amplitude == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(modes[1].amplitude == doctest::Approx(2.0 / 16.0).epsilon(1e-15));
  CHECK(modes[4].amplitude == doctest::Approx(2.0 / 625.0).epsilon(1e-15));
  CHECK(modes[0].dir == Eigen::Vector3d(0, 1, 0));  // k=1 -> e2
  CHECK(modes[1].dir == Eigen::Vector3d(0, 0, 1));  // k=2 -> e3
  CHECK(modes[2].dir == Eigen::Vector3d(1, 0, 0));  // k=3 -> e1
  CHECK(modes[3].dir == Eigen::Vector3d(0, 1, 0));
  // Profile values.
  CHECK(mode_value(modes[0], 0.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(mode_value(modes[0], 1.0) == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(mode_value(modes[1], 0.25) == doctest::Approx(0.0).epsilon(1e-14));

  CHECK_THROWS_AS(build_modes(4, 3.5, 1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(build_modes(4, 3.4, 1.0, 1.0), ConfigError);
  CHECK_NOTHROW(build_modes(4, 3.6, 1.0, 1.0));

  // The space-taking overload caches profile values at the quadrature points.
  SpacePtr s = interval_space(8);
  const auto cached = build_modes(3, 4.0, 1.0, *s);
  REQUIRE(cached[1].qvals.size() == s->qx.size());
  for (std::size_t i = 0; i < s->qx.size(); ++i)
    CHECK(cached[1].qvals[i] == doctest::Approx(mode_value(cached[1], s->qx[i]))
                                    .epsilon(1e-15));
}

TEST_CASE("mode_tail_bound matches an independent high-precision sum") {
  const int count = 8;
  const double s = 5.0, sigma = 0.7;
  const double got = mode_tail_bound(count, s, sigma);
  long double acc = 0.0L;  // reverse order, extended precision
  for (long k = 1'000'000; k > count; --k) {
    const long double kk = static_cast<long double>(k);
    const long double a = sigma * powl(kk, -static_cast<long double>(s));
    acc += a * a * powl(1.0L + kk * kk, 3.0L);
  }
  CHECK(got == doctest::Approx(static_cast<double>(acc)).epsilon(1e-12));
  // Monotone in the truncation point, exactly quadratic in sigma.
  CHECK(mode_tail_bound(16, s, sigma) < got);
  CHECK(mode_tail_bound(count, s, 2.0 * sigma) == 4.0 * got);
  CHECK_THROWS_AS(mode_tail_bound(4, 3.5, 1.0), ConfigError);
}

TEST_CASE("sample_path: counter addressing, submatrix property, variance") {
  const double dt = 0.25;
  const WienerPath p = sample_path(314, 3, 8, dt);
  CHECK(p.seed == 314);
  CHECK(p.n_fine == 8);
  CHECK(p.dt_fine == dt);
  // dW(k, j) is exactly sqrt(dt) * philox_normal(seed, k+1, j).
  const double sq = std::sqrt(dt);
  CHECK(p.dW(0, 0) == sq * philox_normal(314, 1, 0));
  CHECK(p.dW(2, 5) == sq * philox_normal(314, 3, 5));
  // Extending the horizon preserves the earlier increments bitwise.
  const WienerPath longer = sample_path(314, 3, 16, dt);
  CHECK((longer.dW.leftCols(8).array() == p.dW.array()).all());
  // Mode rows are independent streams: extending the mode count too.
  const WienerPath wider = sample_path(314, 5, 8, dt);
  CHECK((wider.dW.topRows(3).array() == p.dW.array()).all());

  const WienerPath stat = sample_path(2718, 1, 100000, dt);
  const double var = stat.dW.row(0).squaredNorm() / stat.n_fine;
  CHECK(var == doctest::Approx(dt).epsilon(0.03));

  CHECK_THROWS_AS(sample_path(1, 2, 0, dt), ConfigError);
  CHECK_THROWS_AS(sample_path(1, 2, 8, 0.0), ConfigError);
}

TEST_CASE("aggregate_increments: block sums, metadata, staging invariance") {
  const WienerPath p = sample_path(99, 3, 16, 1.0 / 16.0);
  // Factor 1 is the identity, bitwise.
  const WienerPath same = aggregate_increments(p, 1);
  CHECK((same.dW.array() == p.dW.array()).all());
  // Factor 4 directly vs staged 2 then 2.
  const WienerPath a4 = aggregate_increments(p, 4);
  const WienerPath a22 = aggregate_increments(aggregate_increments(p, 2), 2);
  CHECK(a4.n_fine == 4);
  CHECK(a4.dt_fine == doctest::Approx(0.25).epsilon(1e-15));
  CHECK((a4.dW - a22.dW).lpNorm<Eigen::Infinity>() < 1e-13);
  // Full aggregation reproduces the row sums.
  const WienerPath all = aggregate_increments(p, 16);
  for (int k = 0; k < 3; ++k)
    CHECK(all.dW(k, 0) == doctest::Approx(p.dW.row(k).sum()).epsilon(1e-13));
  // Hand check of one block sum.
  CHECK(a4.dW(1, 2) ==
        doctest::Approx(p.dW(1, 8) + p.dW(1, 9) + p.dW(1, 10) + p.dW(1, 11))
            .epsilon(1e-15));

  CHECK_THROWS_AS(aggregate_increments(p, 3), ConfigError);
  CHECK_THROWS_AS(aggregate_increments(p, 0), ConfigError);
}

TEST_CASE("stratonovich_load: constant-mode hand oracle") {
  SpacePtr s = interval_space(12);
  // g = 0.7 e3 constant, m = 0.4 e1: (1/2)(m x g) x g = -(1/2)(0.4)(0.49) e1.
  std::vector<NoiseMode> modes{constant_mode(0.7, {0.0, 0.0, 1.0}, *s)};
  Field m = constant_field(s, {0.4, 0.0, 0.0});
  const Eigen::VectorXd b = stratonovich_load(modes, m);
  const Field expect = constant_field(s, {-0.5 * 0.4 * 0.49, 0.0, 0.0});
  const Eigen::VectorXd want = s->M * expect.coeffs;
  CHECK((b - want).lpNorm<Eigen::Infinity>() < 1e-14);
  // m parallel to g contributes nothing.
  Field para = constant_field(s, {0.0, 0.0, 2.0});
  CHECK(stratonovich_load(modes, para).lpNorm<Eigen::Infinity>() < 1e-16);
}

TEST_CASE("stratonovich_load fault hook flips the sign") {
  SpacePtr s = interval_space(8);
  std::vector<NoiseMode> modes{constant_mode(0.5, {0.0, 0.0, 1.0}, *s)};
  Field m = constant_field(s, {0.3, -0.2, 0.1});
  const Eigen::VectorXd normal = stratonovich_load(modes, m);
  test_hooks::flip_strat_sign = true;
  const Eigen::VectorXd flipped = stratonovich_load(modes, m);
  test_hooks::flip_strat_sign = false;
  CHECK((flipped + normal).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(normal.lpNorm<Eigen::Infinity>() > 0.0);
}

TEST_CASE("diffusion_load: hand oracles and shape checks") {
  SpacePtr s = interval_space(12);
  std::vector<NoiseMode> modes{constant_mode(0.6, {0.0, 1.0, 0.0}, *s)};
  Eigen::VectorXd dWn(1);
  dWn << 0.8;
  // m = 0: the load is dW * <g, phi>.
  Field zero(s);
  const Eigen::VectorXd b0 = diffusion_load(modes, zero, dWn);
  const Eigen::VectorXd want0 =
      s->M * constant_field(s, {0.0, 0.8 * 0.6, 0.0}).coeffs;
  CHECK((b0 - want0).lpNorm<Eigen::Infinity>() < 1e-14);
  // Constant m: g + m x g stays constant.
  Field m = constant_field(s, {1.0, 0.0, 0.0});
  const Eigen::VectorXd b1 = diffusion_load(modes, m, dWn);
  // g = 0.6 e2, m x g = 0.6 (e1 x e2) = 0.6 e3.
  const Eigen::VectorXd want1 =
      s->M * constant_field(s, {0.0, 0.8 * 0.6, 0.8 * 0.6}).coeffs;
  CHECK((b1 - want1).lpNorm<Eigen::Infinity>() < 1e-14);

  Eigen::VectorXd wrong(2);
  wrong << 1.0, 2.0;
  CHECK_THROWS_AS(diffusion_load(modes, m, wrong), ConfigError);
  // Modes without cached profile values are rejected.
  auto uncached = build_modes(1, 4.0, 1.0, 1.0);
  Eigen::VectorXd one(1);
  one << 1.0;
  CHECK_THROWS_AS(diffusion_load(uncached, m, one), ConfigError);
  CHECK_THROWS_AS(stratonovich_load(uncached, m), ConfigError);
}

TEST_CASE("diffusion_load of an oscillatory mode integrates to zero") {
  SpacePtr s = interval_space(16);
  auto modes = build_modes(1, 4.0, 1.0, *s);  // k=1: cos(pi x), dir e2
  Eigen::VectorXd dWn(1);
  dWn << 1.0;
  Field zero(s);
  const Eigen::VectorXd b = diffusion_load(modes, zero, dWn);
  // Testing against the constant 1 integrates the profile over the domain.
  CHECK(std::abs(b.segment(s->n_scalar, s->n_scalar).sum()) < 1e-13);
  // Components e1/e3 receive nothing from a e2-directed mode.
  CHECK(b.segment(0, s->n_scalar).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(b.segment(2 * s->n_scalar, s->n_scalar).lpNorm<Eigen::Infinity>() == 0.0);
}
