// Assembly oracles: hand-computed P1/P2 matrix entries, exactness and
// structure properties of every bilinear form, projection, prolongation,
// norms, and the field dump format.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>
#include <string>

#include "llb/assemble.hpp"
#include "llb/philox.hpp"
#include "llb/space.hpp"
#include "llb/util.hpp"

using namespace llb;

namespace {

SpacePtr interval_space(int n, double lx = 1.0) {
  return make_space(build_interval_mesh(lx, n), 1);
}

SpacePtr tri_space(int nx, int ny, double lx = 1.0, double ly = 1.0) {
  return make_space(build_structured_tri_mesh(lx, ly, nx, ny), 2);
}

// Quadrature-rule L2 distance between a field and a pointwise function.
double quad_l2_error(const Field& u, const PointFn& f) {
  const FeSpace& s = *u.space;
  double acc = 0.0;
  for (int c = 0; c < s.mesh->n_cells(); ++c)
    for (int q = 0; q < s.nq; ++q) {
      const int idx = c * s.nq + q;
      const Eigen::Vector3d d = field_value_at_q(u, c, q) - f(s.qx[idx], s.qy[idx]);
      acc += s.qw[idx] * d.squaredNorm();
    }
  return std::sqrt(acc);
}

Eigen::VectorXd random_coeffs(int n, std::uint64_t seed, std::uint64_t stream) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = philox_normal(seed, stream, i);
  return v;
}

}  // namespace

TEST_CASE("P1 mass matrix rows: (h/6)[1, 4, 1]") {
  const int n = 8;
  SpacePtr s = interval_space(n);
  const double h = 1.0 / n;
  CHECK(s->M.coeff(4, 3) == doctest::Approx(h / 6.0).epsilon(1e-13));
  CHECK(s->M.coeff(4, 4) == doctest::Approx(4.0 * h / 6.0).epsilon(1e-13));
  CHECK(s->M.coeff(4, 5) == doctest::Approx(h / 6.0).epsilon(1e-13));
  CHECK(s->M.coeff(0, 0) == doctest::Approx(2.0 * h / 6.0).epsilon(1e-13));
  CHECK(s->M.coeff(n, n) == doctest::Approx(2.0 * h / 6.0).epsilon(1e-13));
  // The cached matrix is the assembled one.
  const SparseOperator M2 = assemble_mass(*s);
  CHECK((SparseOperator(s->M - M2)).norm() < 1e-15);
}

TEST_CASE("P1 stiffness matrix rows: (1/h)[-1, 2, -1] and exact Dirichlet energy") {
  const int n = 8;
  SpacePtr s = interval_space(n);
  const double h = 1.0 / n;
  CHECK(s->K.coeff(4, 3) == doctest::Approx(-1.0 / h).epsilon(1e-13));
  CHECK(s->K.coeff(4, 4) == doctest::Approx(2.0 / h).epsilon(1e-13));
  CHECK(s->K.coeff(4, 5) == doctest::Approx(-1.0 / h).epsilon(1e-13));
  // Row sums vanish (constants are in the kernel).
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(s->n_dofs());
  CHECK((s->K * ones).lpNorm<Eigen::Infinity>() < 1e-13);
  // u = x in component 0: integral of |u'|^2 is 1.
  Field u = interpolate(s, [](double x, double) {
    return Eigen::Vector3d(x, 0.0, 0.0);
  });
  CHECK(u.coeffs.dot(s->K * u.coeffs) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("operators act componentwise (block-diagonal expansion)") {
  SpacePtr s = interval_space(12);
  Field u(s);
  for (int i = 0; i < s->n_scalar; ++i) u.at(1, i) = philox_normal(7, 0, i);
  for (const SparseOperator* op : {&s->M, &s->K}) {
    Eigen::VectorXd r = *op * u.coeffs;
    CHECK(r.segment(0, s->n_scalar).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(r.segment(2 * s->n_scalar, s->n_scalar).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(r.segment(s->n_scalar, s->n_scalar).lpNorm<Eigen::Infinity>() > 0.0);
  }
}

TEST_CASE("partition of unity: total mass equals 3 x domain measure") {
  SpacePtr s1 = interval_space(9, 2.0);
  Eigen::VectorXd ones1 = Eigen::VectorXd::Ones(s1->n_dofs());
  CHECK(ones1.dot(s1->M * ones1) == doctest::Approx(3.0 * 2.0).epsilon(1e-13));

  SpacePtr s2 = tri_space(3, 4, 1.25, 0.75);
  Eigen::VectorXd ones2 = Eigen::VectorXd::Ones(s2->n_dofs());
  CHECK(ones2.dot(s2->M * ones2) == doctest::Approx(3.0 * 1.25 * 0.75).epsilon(1e-12));
  // And the P2 stiffness is exact on polynomials: u = x gives |grad u|^2 = area.
  Field u = interpolate(s2, [](double x, double) {
    return Eigen::Vector3d(x, 0.0, 0.0);
  });
  CHECK(u.coeffs.dot(s2->K * u.coeffs) == doctest::Approx(1.25 * 0.75).epsilon(1e-12));
}

TEST_CASE("P2 bi-Laplacian: exact on quadratics, annihilates linears") {
  SpacePtr s = tri_space(4, 4);
  const SparseOperator B = assemble_bilaplacian(*s);
  CHECK((SparseOperator(s->B - B)).norm() < 1e-15);
  // u = x^2: Lap u = 2, so u^T B u = 4 * area.
  Field ux2 = interpolate(s, [](double x, double) {
    return Eigen::Vector3d(x * x, 0.0, 0.0);
  });
  CHECK(ux2.coeffs.dot(B * ux2.coeffs) == doctest::Approx(4.0).epsilon(1e-10));
  // u = x^2 + y^2: Lap u = 4, so u^T B u = 16 * area.
  Field uxy = interpolate(s, [](double x, double y) {
    return Eigen::Vector3d(x * x + y * y, 0.0, 0.0);
  });
  CHECK(uxy.coeffs.dot(B * uxy.coeffs) == doctest::Approx(16.0).epsilon(1e-10));
  // Linear fields have vanishing cellwise Laplacian.
  Field lin = interpolate(s, [](double x, double y) {
    return Eigen::Vector3d(2.0 * x - y, 0.5 * y, 1.0 - x);
  });
  CHECK((B * lin.coeffs).lpNorm<Eigen::Infinity>() < 1e-12);
  // P1 spaces have no cellwise Laplacian to assemble.
  SpacePtr p1 = interval_space(8);
  CHECK_THROWS_AS(assemble_bilaplacian(*p1), ConfigError);
}

TEST_CASE("cross-convection for m = e3: +/- stiffness blocks") {
  const int n = 16;
  SpacePtr s = interval_space(n);
  Field m = interpolate(s, [](double, double) {
    return Eigen::Vector3d(0.0, 0.0, 1.0);
  });
  const SparseOperator C = assemble_cross_convection(*s, m);
  const int ns = s->n_scalar;
  for (int i = 0; i < ns; ++i)
    for (int j = std::max(0, i - 1); j <= std::min(ns - 1, i + 1); ++j) {
      const double ks = s->K.coeff(i, j);
      CHECK(C.coeff(ns + i, j) == doctest::Approx(ks).epsilon(1e-13));
      CHECK(C.coeff(i, ns + j) == doctest::Approx(-ks).epsilon(1e-13));
    }
  // Component 2 never couples when m points along e3.
  Eigen::VectorXd v = random_coeffs(s->n_dofs(), 11, 0);
  Eigen::VectorXd r = C * v;
  CHECK(r.segment(2 * ns, ns).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("cross-convection is skew for arbitrary m") {
  SpacePtr s1 = interval_space(16);
  Field m1(s1);
  m1.coeffs = random_coeffs(s1->n_dofs(), 901, 0);
  const SparseOperator C1 = assemble_cross_convection(*s1, m1);
  for (int v = 0; v < 100; ++v) {
    Eigen::VectorXd x = random_coeffs(s1->n_dofs(), 902, v + 1).normalized();
    CHECK(std::abs(x.dot(C1 * x)) <= 1e-12);
  }
  SpacePtr s2 = tri_space(3, 3);
  Field m2(s2);
  m2.coeffs = random_coeffs(s2->n_dofs(), 903, 0);
  const SparseOperator C2 = assemble_cross_convection(*s2, m2);
  for (int v = 0; v < 20; ++v) {
    Eigen::VectorXd x = random_coeffs(s2->n_dofs(), 904, v + 1).normalized();
    CHECK(std::abs(x.dot(C2 * x)) <= 1e-12);
  }
}

TEST_CASE("weighted mass: constant |m| collapses to a mass multiple") {
  SpacePtr s = interval_space(10);
  Field unit = interpolate(s, [](double, double) {
    return Eigen::Vector3d(0.0, 1.0, 0.0);
  });
  const SparseOperator G1 = assemble_weighted_mass(*s, unit, 1.0);  // 1 + 1 = 2
  CHECK((SparseOperator(G1 - SparseOperator(2.0 * s->M))).norm() < 1e-13);
  const SparseOperator G0 = assemble_weighted_mass(*s, unit, 0.0);  // weight 1
  CHECK((SparseOperator(G0 - s->M)).norm() < 1e-13);
  Field two = interpolate(s, [](double, double) {
    return Eigen::Vector3d(2.0, 0.0, 0.0);
  });
  const SparseOperator G3 = assemble_weighted_mass(*s, two, 3.0);  // 1 + 3*4 = 13
  CHECK((SparseOperator(G3 - SparseOperator(13.0 * s->M))).norm() < 1e-12);
}

TEST_CASE("fields from another space are rejected") {
  SpacePtr a = interval_space(8);
  SpacePtr b = interval_space(8);
  Field m(b);
  CHECK_THROWS_AS(assemble_cross_convection(*a, m), ConfigError);
  CHECK_THROWS_AS(assemble_weighted_mass(*a, m), ConfigError);
}

TEST_CASE("L2 projection: reproduces members, second-order for smooth data") {
  SpacePtr s = interval_space(16);
  // u = x lies in P1: projection equals interpolation to solver accuracy.
  const PointFn linear = [](double x, double) {
    return Eigen::Vector3d(x, -0.5 * x, 1.0);
  };
  Field pi = interpolate(s, linear);
  Field pr = l2_project(s, linear);
  CHECK((pi.coeffs - pr.coeffs).lpNorm<Eigen::Infinity>() < 1e-9);
  // sin(pi x): error drops by ~4x per mesh halving.
  const PointFn f = [](double x, double) {
    return Eigen::Vector3d(std::sin(M_PI * x), 0.0, 0.0);
  };
  const double e16 = quad_l2_error(l2_project(interval_space(16), f), f);
  const double e32 = quad_l2_error(l2_project(interval_space(32), f), f);
  CHECK(e32 / e16 > 0.2);
  CHECK(e32 / e16 < 0.3);
}

TEST_CASE("prolongation: identity on the same mesh, exact on nested meshes") {
  SpacePtr coarse = interval_space(8);
  Field u = interpolate(coarse, [](double x, double) {
    return Eigen::Vector3d(0.3 + x, x * 0.5, 1.0 - x);
  });
  // Same mesh: bitwise copy.
  Field same = prolongate(u, coarse);
  CHECK((same.coeffs.array() == u.coeffs.array()).all());
  // One and two refinement levels: the piecewise-linear function transfers
  // exactly, so all norms are preserved.
  SpacePtr fine = make_space(refine(coarse->mesh), 1);
  SpacePtr finer = make_space(refine(fine->mesh), 1);
  for (const SpacePtr& target : {fine, finer}) {
    Field v = prolongate(u, target);
    const Norms nu = norms(u), nv = norms(v);
    CHECK(nv.l2 == doctest::Approx(nu.l2).epsilon(1e-12));
    CHECK(nv.h1_semi == doctest::Approx(nu.h1_semi).epsilon(1e-12));
    const Eigen::Vector3d at = eval_field(v, 0.3141);
    const Eigen::Vector3d ref = eval_field(u, 0.3141);
    CHECK((at - ref).lpNorm<Eigen::Infinity>() < 1e-13);
  }
  // Unrelated meshes are rejected.
  SpacePtr stranger = interval_space(12);
  CHECK_THROWS_AS(prolongate(u, stranger), ConfigError);
}

TEST_CASE("norms of u = (x, 0, 0) on the unit interval") {
  SpacePtr s = interval_space(64);
  Field u = interpolate(s, [](double x, double) {
    return Eigen::Vector3d(x, 0.0, 0.0);
  });
  const Norms n = norms(u);
  // P1 interpolation of x is exact: |u|_L2^2 = 1/3, |u'|_L2^2 = 1.
  CHECK(n.l2 == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-12));
  CHECK(n.h1_semi == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(n.h1 == doctest::Approx(std::sqrt(4.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("eval_field agrees with the nodal interpolant") {
  SpacePtr s1 = interval_space(10);
  Field u1 = interpolate(s1, [](double x, double) {
    return Eigen::Vector3d(1.0 - x, 2.0 * x, 0.25);
  });
  for (double x : {0.0, 0.05, 0.42, 0.97, 1.0}) {
    const Eigen::Vector3d v = eval_field(u1, x);
    CHECK(v[0] == doctest::Approx(1.0 - x).epsilon(1e-13));
    CHECK(v[1] == doctest::Approx(2.0 * x).epsilon(1e-13));
    CHECK(v[2] == doctest::Approx(0.25).epsilon(1e-13));
  }
  // P2 reproduces quadratics pointwise.
  SpacePtr s2 = tri_space(3, 3);
  Field u2 = interpolate(s2, [](double x, double y) {
    return Eigen::Vector3d(x * y, x * x - y, 1.0 + y * y);
  });
  for (auto [x, y] : {std::pair{0.21, 0.73}, {0.5, 0.5}, {0.99, 0.01}}) {
    const Eigen::Vector3d v = eval_field(u2, x, y);
    CHECK(v[0] == doctest::Approx(x * y).epsilon(1e-12));
    CHECK(v[1] == doctest::Approx(x * x - y).epsilon(1e-12));
    CHECK(v[2] == doctest::Approx(1.0 + y * y).epsilon(1e-12));
  }
}

TEST_CASE("dump_field format: header, row count, 17-digit round trip") {
  SpacePtr s = interval_space(4);
  Field u = interpolate(s, [](double x, double) {
    return Eigen::Vector3d(x / 3.0, -x, 1.0 / 7.0);
  });
  std::ostringstream os;
  dump_field(u, os);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header == "llb-field dim=1 degree=1 ndofs=5");
  int rows = 0;
  double x = 0.0, m1 = 0.0, m2 = 0.0, m3 = 0.0;
  while (is >> x >> m1 >> m2 >> m3) {
    CHECK(m1 == u.at(0, rows));  // exact round trip through 17 digits
    CHECK(m2 == u.at(1, rows));
    CHECK(m3 == u.at(2, rows));
    CHECK(x == s->dof_x[rows]);
    ++rows;
  }
  CHECK(rows == 5);
}
