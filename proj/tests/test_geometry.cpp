#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "qgeom/geometry.hpp"
#include "qgeom/numdiff.hpp"
#include "test_support.hpp"

using namespace qgeom;
using namespace qgeom::testing;

namespace {

StateFamily linear_z_family() {
  return family_from_bloch(1, [](const ParamPoint& x) { return BlochVector(0, 0, x[0]); });
}

StateFamily great_circle_family() {
  return family_from_bloch(
      1, [](const ParamPoint& x) { return BlochVector(std::sin(x[0]), 0.0, std::cos(x[0])); });
}

}  // namespace

TEST_CASE("sld on diagonal families") {
  const SLDMatrix l = sld(linear_z_family(), param_point({0.5}), 0);
  CHECK(std::abs(l.L(0, 0).real() - 2.0 / 3.0) <= 1e-9);
  CHECK(std::abs(l.L(1, 1).real() + 2.0) <= 1e-9);
  CHECK(std::abs(l.L(0, 1)) <= 1e-9);

  const SLDMatrix zero = sld(constant_bloch_family(BlochVector(0.2, 0.1, -0.3)),
                             param_point({0.0}), 0);
  CHECK(zero.L.norm() <= 1e-12);

  // spin at b = 0: L = sigma_z
  const SLDMatrix s = sld(spin_family(), param_point({0.0}), 0);
  CHECK(std::abs(s.L(0, 0).real() - 1.0) <= 1e-9);
  CHECK(std::abs(s.L(1, 1).real() + 1.0) <= 1e-9);
  // SLD reproduces d rho = (rho L + L rho)/2 at the FD scale
  const StateFamily fam = linear_z_family();
  const double h = 1e-5;
  const ComplexMatrix drho =
      (fam.rho(param_point({0.5 + h})) - fam.rho(param_point({0.5 - h}))) / (2 * h);
  const ComplexMatrix rho = fam.rho(param_point({0.5}));
  const SLDMatrix l2 = sld(fam, param_point({0.5}), 0);
  CHECK((0.5 * (rho * l2.L + l2.L * rho) - drho).norm() <= 1e-9);
}

TEST_CASE("qfim_sld examples") {
  CHECK(qfim_sld(linear_z_family(), param_point({0.5})).qfim(0, 0) ==
        doctest::Approx(4.0 / 3.0).epsilon(1e-7));
  CHECK(qfim_sld(constant_bloch_family(BlochVector(0.1, 0.0, 0.4)), param_point({1.0})).qfim(0, 0) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(qfim_sld(spin_family(), param_point({1.0})).qfim(0, 0) ==
        doctest::Approx(0.4199743416140261).epsilon(1e-7));
}

TEST_CASE("qfim_bloch examples") {
  CHECK(qfim_bloch(spin_family(), param_point({0.0})).qfim(0, 0) ==
        doctest::Approx(1.0).epsilon(1e-9));
  // pure great circle: F = 1 with the purity branch active
  const GeometryReport pure = qfim_bloch(great_circle_family(), param_point({0.7}));
  CHECK(pure.qfim(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(pure.metric(0, 0) == doctest::Approx(0.25).epsilon(1e-9));
  // SSH at T = 0.5 is mitigated at the band edge relative to T = 0
  const double f_cold = qfim_bloch(ssh_family(0.2, 0.0), param_point({M_PI})).qfim(0, 0);
  const double f_warm = qfim_bloch(ssh_family(0.2, 0.5), param_point({M_PI})).qfim(0, 0);
  CHECK(f_cold == doctest::Approx(4.0).epsilon(1e-8));
  CHECK(f_warm < f_cold);
  CHECK(f_warm == doctest::Approx(4.0 * std::pow(std::tanh(0.8), 2)).epsilon(1e-8));
}

TEST_CASE("qfim_bloch purity singularity guard") {
  // |r| pinned near 1 with a radial derivative: no closed-form value exists
  const StateFamily bad = family_from_bloch(1, [](const ParamPoint& x) {
    return BlochVector(0, 0, 1.0 - 1e-9 - 0.1 * (x[0] - 1.0));
  });
  CHECK_THROWS_WITH_AS(qfim_bloch(bad, param_point({1.0})), doctest::Contains("PuritySingularity"),
                       Error);
  const StateFamily out = family_from_bloch(1, [](const ParamPoint&) {
    return BlochVector(0, 0, 1.0 + 1e-6);
  });
  CHECK_THROWS_WITH_AS(qfim_bloch(out, param_point({0.0})), doctest::Contains("BlochOutOfBall"),
                       Error);
}

TEST_CASE("christoffel_bloch spin values and symmetry") {
  CHECK(std::abs(christoffel_bloch(spin_family(), param_point({0.0}))(0, 0, 0)) <= 1e-8);
  const double expect = -std::tanh(1.0) / std::pow(std::cosh(1.0), 2);
  CHECK(christoffel_bloch(spin_family(), param_point({1.0}))(0, 0, 0) ==
        doctest::Approx(expect).epsilon(1e-4));
  CHECK(christoffel_bloch(constant_bloch_family(BlochVector(0.3, 0, 0)), param_point({0.0}))
            .max_abs() <= 1e-12);
}

TEST_CASE("1D identity: christoffel = dF/dx / 2") {
  const double h = 1e-4;
  auto check_family = [&](const StateFamily& fam, double x0) {
    const double gamma = christoffel_bloch(fam, param_point({x0}))(0, 0, 0);
    const double df = (qfim_bloch(fam, param_point({x0 + h})).qfim(0, 0) -
                       qfim_bloch(fam, param_point({x0 - h})).qfim(0, 0)) /
                      (2 * h);
    CHECK(std::abs(gamma - 0.5 * df) <= 2e-4);
  };
  check_family(spin_family(), 1.0);
  check_family(spin_family(), -0.7);
  check_family(ssh_family(0.2, 0.5), 2.0);
  std::mt19937 rng(8);
  for (int rep = 0; rep < 5; ++rep) {
    const StateFamily fam = random_bloch_family(rng, 1);
    check_family(fam, 0.3 + 0.1 * rep);
  }
}

TEST_CASE("qgt_pure at the dirac point and on SSH") {
  // m = +1 at the origin: ket gauge poles there but the projector is smooth
  const GeometryReport rep = qgt_pure(dirac2d_family(1.0), param_point({0.0, 0.0}));
  CHECK(rep.metric(0, 0) == doctest::Approx(0.25).epsilon(1e-8));
  CHECK(rep.metric(1, 1) == doctest::Approx(0.25).epsilon(1e-8));
  CHECK((*rep.berry)(0, 1) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK((*rep.berry)(1, 0) == doctest::Approx(-0.5).epsilon(1e-8));
  // qgt = metric - (i/2) berry
  const Eigen::MatrixXcd q = *rep.qgt;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(std::abs(q(i, j) - std::complex<double>(rep.metric(i, j),
                                                    -0.5 * (*rep.berry)(i, j))) <= 1e-9);

  const GeometryReport ssh = qgt_pure(ssh_family(0.2, 0.0), param_point({M_PI}));
  CHECK(ssh.metric(0, 0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK((*ssh.berry)(0, 0) == doctest::Approx(0.0));  // 1D: no curvature

  CHECK_THROWS_WITH_AS(qgt_pure(ssh_family(0.2, 0.5), param_point({1.0})),
                       doctest::Contains("NotPure"), Error);
}

TEST_CASE("dirac_geometry_closed") {
  const GeometryReport ssh = dirac_geometry_closed(ssh_family(0.2, 0.0), param_point({M_PI}));
  CHECK(ssh.metric(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ssh.qfim(0, 0) == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(ssh.qfim(0, 0) == 4.0 * ssh.metric(0, 0));  // exact by construction

  const GeometryReport dirac = dirac_geometry_closed(dirac2d_family(1.0), param_point({0.0, 0.0}));
  CHECK((*dirac.berry)(0, 1) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(dirac.metric(0, 0) == doctest::Approx(0.25).epsilon(1e-9));

  // Gamma = dg/dk / 2 in the metric convention (tensor stored in the QFIM
  // convention, so compare against dF/dk / 2)
  const double h = 1e-4;
  const StateFamily cold = ssh_family(0.2, 0.0);
  for (double k : {M_PI, 2.0}) {
    const double gamma = (*dirac_geometry_closed(cold, param_point({k})).christoffel)(0, 0, 0);
    const double df = (dirac_geometry_closed(cold, param_point({k + h})).qfim(0, 0) -
                       dirac_geometry_closed(cold, param_point({k - h})).qfim(0, 0)) /
                      (2 * h);
    CHECK(std::abs(gamma - 0.5 * df) <= 1e-6 * std::max(1.0, std::abs(gamma)));
  }

  // gap closure: d -> 0 at k = pi when delta_t -> 1 is rejected upstream;
  // directly probe the dvec guard
  const StateFamily gapless = family_from_dvec(
      1, [](const ParamPoint& x) { return DVector{Eigen::Vector3d(x[0], 0, 0)}; }, 0.0);
  CHECK_THROWS_WITH_AS(dirac_geometry_closed(gapless, param_point({0.0})),
                       doctest::Contains("GapClosure"), Error);
}

TEST_CASE("classical_fim") {
  const StateFamily fam = cos_sin_family();
  CHECK(classical_fim(fam, param_point({M_PI / 4})).qfim(0, 0) ==
        doctest::Approx(4.0).epsilon(1e-8));
  // matches 4x the quantum metric everywhere in the safe window
  for (double x : {0.2, 0.6, 1.0, 1.4}) {
    const double i_cl = classical_fim(fam, param_point({x})).qfim(0, 0);
    const double g = qgt_pure(fam, param_point({x})).metric(0, 0);
    CHECK(std::abs(i_cl - 4.0 * g) <= 1e-8);
  }
  const StateFamily constant = family_from_ket(
      1, 2,
      [](const ParamPoint&) {
        Eigen::VectorXcd psi(2);
        psi << std::sqrt(0.5), std::sqrt(0.5);
        return psi;
      },
      true, true);
  CHECK(classical_fim(constant, param_point({0.3})).qfim(0, 0) == doctest::Approx(0.0));
  // component crossing zero at x = pi/2
  CHECK_THROWS_WITH_AS(classical_fim(fam, param_point({M_PI / 2})),
                       doctest::Contains("SignFlipAtStencil"), Error);
  CHECK_THROWS_WITH_AS(classical_fim(ssh_family(0.2, 0.0), param_point({1.0})),
                       doctest::Contains("UnsupportedKind"), Error);
}

TEST_CASE("christoffel_from_metric") {
  const double expect = -std::tanh(1.0) / std::pow(std::cosh(1.0), 2);
  CHECK(christoffel_from_metric(spin_family(), param_point({1.0}))(0, 0, 0) ==
        doctest::Approx(expect).epsilon(1e-4));
  CHECK(christoffel_from_metric(constant_bloch_family(BlochVector(0, 0.2, 0)), param_point({0.0}))
            .max_abs() <= 1e-12);
  std::mt19937 rng(15);
  for (int rep = 0; rep < 5; ++rep) {
    const StateFamily fam = random_bloch_family(rng, 1);
    const ParamPoint x = random_point(rng, 1);
    const double a = christoffel_from_metric(fam, x)(0, 0, 0);
    const double b = christoffel_bloch(fam, x)(0, 0, 0);
    CHECK(std::abs(a - b) <= 5e-4);
  }
}

TEST_CASE("route equivalence on random smooth Bloch families") {
  std::mt19937 rng(123);
  double worst = 0.0;
  for (int fam_i = 0; fam_i < 100; ++fam_i) {
    const int d = 1 + fam_i % 2;
    const StateFamily fam = random_bloch_family(rng, d);
    for (int rep = 0; rep < 5; ++rep) {
      const ParamPoint x = random_point(rng, d);
      const Eigen::MatrixXd a = qfim_sld(fam, x).qfim;
      const Eigen::MatrixXd b = qfim_bloch(fam, x).qfim;
      worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
      // positive semidefinite within tolerance
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b);
      CHECK(es.eigenvalues().minCoeff() >= -1e-8);
    }
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("pure-state hierarchy: qfim_sld = 4 x qgt metric") {
  std::mt19937 rng(54);
  const StateFamily fams[] = {ssh_family(0.2, 0.0), dirac2d_family(1.0)};
  for (const StateFamily& fam : fams) {
    for (int rep = 0; rep < 10; ++rep) {
      const ParamPoint x = random_point(rng, fam.param_dim, 0.4, 2.6);
      const GeometryReport rep_sld = qfim_sld(fam, x);
      const Eigen::MatrixXd g = qgt_pure(fam, x).metric;
      CHECK((rep_sld.qfim - 4.0 * g).cwiseAbs().maxCoeff() <= 1e-6);
      // rank-1 states drop the zero-support SLD elements, and that shows up
      // in the diagnostics rather than aborting the computation
      CHECK(rep_sld.sld_truncations > 0);
    }
  }
}

TEST_CASE("three-level real ket: sld, projector, classical and fidelity routes agree") {
  // psi = (cos x, sin x cos 0.7x, sin x sin 0.7x): g = 1 + 0.49 sin^2 x,
  // <psi|d psi> = 0, so F = I = 4g with an analytic oracle.
  const StateFamily fam = family_from_ket(
      1, 3,
      [](const ParamPoint& x) {
        Eigen::VectorXcd psi(3);
        psi << std::cos(x[0]), std::sin(x[0]) * std::cos(0.7 * x[0]),
            std::sin(x[0]) * std::sin(0.7 * x[0]);
        return psi;
      },
      true, true);
  for (double x : {0.4, 0.9, 1.3}) {
    const double g_exact = 1.0 + 0.49 * std::pow(std::sin(x), 2);
    const ParamPoint p = param_point({x});
    CHECK(qfim_sld(fam, p).qfim(0, 0) == doctest::Approx(4.0 * g_exact).epsilon(1e-7));
    CHECK(qgt_pure(fam, p).metric(0, 0) == doctest::Approx(g_exact).epsilon(1e-7));
    CHECK(classical_fim(fam, p).qfim(0, 0) == doctest::Approx(4.0 * g_exact).epsilon(1e-7));
    // no Bloch path at n = 3, so the fidelity oracle runs the spectral route
    CHECK(qfim_from_genfun(fam, p).qfim(0, 0) == doctest::Approx(4.0 * g_exact).epsilon(1e-5));
  }
}

TEST_CASE("closed forms vs projector route on fixed-seed dirac points") {
  std::mt19937 rng(77);
  const StateFamily fam = dirac2d_family(1.0);
  for (int rep = 0; rep < 50; ++rep) {
    const ParamPoint x = random_point(rng, 2, -1.5, 1.5);
    const GeometryReport closed = dirac_geometry_closed(fam, x);
    const GeometryReport proj = qgt_pure(fam, x);
    CHECK((closed.metric - proj.metric).cwiseAbs().maxCoeff() <= 1e-7);
    CHECK((*closed.berry - *proj.berry).cwiseAbs().maxCoeff() <= 1e-7);
  }
}
