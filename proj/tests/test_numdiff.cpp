#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "qgeom/numdiff.hpp"
#include "test_support.hpp"

using namespace qgeom;
using namespace qgeom::testing;

namespace {

double spin_qfim(double b) { return 1.0 / std::pow(std::cosh(b), 2); }
double spin_christoffel(double b) { return -std::tanh(b) / std::pow(std::cosh(b), 2); }

TwoSlotFn log_fidelity_fn(const StateFamily& fam) {
  return [&fam](const ParamPoint& a, const ParamPoint& b) {
    return genfun_eval(fam, a, b, GenFunKind::LogFidelity);
  };
}

}  // namespace

TEST_CASE("mixed_second is exact on bilinear test functions") {
  // no truncation bias on bilinear inputs; the only residue is roundoff
  // amplified by 1/h^2, so probe at a step where that sits below 1e-12
  const StencilConfig wide{5e-2, 1e-2, true};
  const TwoSlotFn bilinear = [](const ParamPoint& x, const ParamPoint& xp) {
    return x[0] * xp[0];
  };
  CHECK(std::abs(mixed_second(bilinear, param_point({0.3}), 0, 0, wide) - 1.0) <= 1e-12);
  CHECK(std::abs(mixed_second(bilinear, param_point({0.3}), 0, 0) - 1.0) <= 1e-10);

  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int rep = 0; rep < 20; ++rep) {
    const double a = u(rng);
    const TwoSlotFn gf = [a](const ParamPoint& x, const ParamPoint& xp) {
      return a * x[1] * xp[0] + 0.7 * x[0] + 0.1 * xp[1];
    };
    // d_{0'} d_1 picks out a
    CHECK(std::abs(mixed_second(gf, param_point({0.2, -0.4}), 0, 1, wide) - a) <= 1e-12);
  }
}

TEST_CASE("mixed_second of spin log-fidelity gives F/4") {
  const StateFamily spin = spin_family();
  const TwoSlotFn gf = log_fidelity_fn(spin);
  CHECK(mixed_second(gf, param_point({0.0}), 0, 0) == doctest::Approx(0.25).epsilon(1e-7));
  const StateFamily constant = constant_bloch_family(BlochVector(0.2, 0.0, 0.1));
  CHECK(std::abs(mixed_second(log_fidelity_fn(constant), param_point({0.0}), 0, 0)) <= 1e-12);
}

TEST_CASE("stencil config validation") {
  StencilConfig cfg;
  cfg.h2 = 1e-7;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("ConfigInvalid"), Error);
  cfg.h2 = 0.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("qfim_from_genfun matches closed forms") {
  const StateFamily spin = spin_family();
  CHECK(qfim_from_genfun(spin, param_point({1.0})).qfim(0, 0) ==
        doctest::Approx(spin_qfim(1.0)).epsilon(1e-5));
  const StateFamily lin = family_from_bloch(
      1, [](const ParamPoint& x) { return BlochVector(0, 0, x[0]); });
  CHECK(qfim_from_genfun(lin, param_point({0.5})).qfim(0, 0) ==
        doctest::Approx(4.0 / 3.0).epsilon(1e-5));
  CHECK(qfim_from_genfun(ssh_family(0.2, 0.0), param_point({M_PI})).qfim(0, 0) ==
        doctest::Approx(4.0).epsilon(1e-4));
}

TEST_CASE("log and no-log generating functions agree") {
  const StateFamily fams[] = {spin_family(), ssh_family(0.2, 0.5)};
  for (const StateFamily& fam : fams) {
    for (double x : {0.5, 1.5}) {
      const double with_log = qfim_from_genfun(fam, param_point({x}), {}, true).qfim(0, 0);
      const double no_log = qfim_from_genfun(fam, param_point({x}), {}, false).qfim(0, 0);
      CHECK(std::abs(with_log - no_log) <= 1e-6);
    }
  }
}

TEST_CASE("richardson strictly improves the spin QFIM") {
  const StateFamily spin = spin_family();
  for (double h : {1e-2, 1e-3}) {
    StencilConfig plain{h, 1e-2, false};
    StencilConfig rich{h, 1e-2, true};
    const double exact = spin_qfim(1.0);
    const double err_plain =
        std::abs(qfim_from_genfun(spin, param_point({1.0}), plain).qfim(0, 0) - exact);
    const double err_rich =
        std::abs(qfim_from_genfun(spin, param_point({1.0}), rich).qfim(0, 0) - exact);
    CHECK(err_rich < err_plain);
  }
}

TEST_CASE("bar_third on the hand-differentiated cubic oracle") {
  // f(x, x') = -(x - x')^2 (x + x') / 8: third partials are constant 1/4,
  // and the six-term combination gives Gamma = dF/dx / 2 = 1.
  const TwoSlotFn cubic = [](const ParamPoint& x, const ParamPoint& xp) {
    const double u = x[0] - xp[0], s = x[0] + xp[0];
    return -u * u * s / 8.0;
  };
  const ParamPoint x0 = param_point({0.9});
  const BarDerivative r_pp = bar_third(cubic, x0, {0, 0}, {0});
  const BarDerivative r_uu = bar_third(cubic, x0, {0}, {0, 0});
  CHECK(r_pp.value == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(r_uu.value == doctest::Approx(0.25).epsilon(1e-6));
  // i-factor bookkeeping: two primed indices -> -i, one primed -> +i
  CHECK(std::abs(r_pp.full() - std::complex<double>(0, -0.25)) <= 1e-6);
  CHECK(std::abs(r_uu.full() - std::complex<double>(0, 0.25)) <= 1e-6);
  const std::complex<double> gamma =
      std::complex<double>(0, 2) *
      (r_pp.full() - r_uu.full() + r_pp.full() - r_uu.full() - r_pp.full() + r_uu.full());
  CHECK(gamma.real() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(gamma.imag()) <= 1e-12);

  const TwoSlotFn constant = [](const ParamPoint&, const ParamPoint&) { return 0.0; };
  CHECK(bar_third(constant, x0, {0, 0}, {0}).value == doctest::Approx(0.0));
  CHECK_THROWS_AS(bar_third(cubic, x0, {0, 0, 0}, {}), Error);
}

TEST_CASE("bar_third spin combination reproduces -i dF / 4") {
  const StateFamily spin = spin_family();
  const TwoSlotFn gf = log_fidelity_fn(spin);
  const ParamPoint b1 = param_point({1.0});
  const std::complex<double> combo =
      bar_third(gf, b1, {0, 0}, {0}).full() - bar_third(gf, b1, {0}, {0, 0}).full();
  const double dF = 2.0 * spin_christoffel(1.0);  // dF = 2 Gamma in 1D
  CHECK(std::abs(combo.real()) <= 1e-12);
  CHECK(combo.imag() == doctest::Approx(-dF / 4.0).epsilon(1e-3));
}

TEST_CASE("christoffel_from_genfun") {
  const StateFamily spin = spin_family();
  CHECK(christoffel_from_genfun(spin, param_point({1.0}))(0, 0, 0) ==
        doctest::Approx(spin_christoffel(1.0)).epsilon(1e-3));
  CHECK(std::abs(christoffel_from_genfun(spin, param_point({0.0}))(0, 0, 0)) <= 1e-6);

  std::mt19937 rng(6);
  for (int rep = 0; rep < 6; ++rep) {
    const int d = 1 + rep % 2;
    const StateFamily fam = random_bloch_family(rng, d);
    const ParamPoint x = random_point(rng, d);
    const Tensor3 a = christoffel_from_genfun(fam, x);
    const Tensor3 b = christoffel_bloch(fam, x);
    double maxdev = 0.0, scale = 1e-2;
    for (int l = 0; l < d; ++l)
      for (int m = 0; m < d; ++m)
        for (int n = 0; n < d; ++n) {
          maxdev = std::max(maxdev, std::abs(a(l, m, n) - b(l, m, n)));
          scale = std::max({scale, std::abs(a(l, m, n)), std::abs(b(l, m, n))});
        }
    CHECK(maxdev / scale <= 5e-3);
    // report symmetry in the trailing index pair is exact after assembly
    for (int l = 0; l < d; ++l)
      for (int m = 0; m < d; ++m)
        for (int n = 0; n < d; ++n) CHECK(a(l, m, n) == a(l, n, m));
  }
}

TEST_CASE("christoffel genfun vs metric-differentiation on the built-in models") {
  double worst = 0.0;
  auto check = [&worst](const StateFamily& fam, const ParamPoint& x) {
    const int d = fam.param_dim;
    const Tensor3 a = christoffel_from_genfun(fam, x);
    const Tensor3 b = christoffel_from_metric(fam, x);
    double dev = 0.0, scale = 1e-2;
    for (int l = 0; l < d; ++l)
      for (int m = 0; m < d; ++m)
        for (int n = 0; n < d; ++n) {
          dev = std::max(dev, std::abs(a(l, m, n) - b(l, m, n)));
          scale = std::max({scale, std::abs(a(l, m, n)), std::abs(b(l, m, n))});
        }
    worst = std::max(worst, dev / scale);
  };
  for (double b : {-2.0, -1.0, -0.3, 0.0, 0.4, 1.2, 2.5}) check(spin_family(), param_point({b}));
  const StateFamily ssh = ssh_family(0.2, 0.5);
  for (double k : {0.3, 1.0, 1.8, 2.4, 2.9, M_PI, -1.3}) check(ssh, param_point({k}));
  const StateFamily dirac = dirac2d_family(1.0);
  for (double s : {-0.9, -0.4, 0.2, 0.7, 1.1, 1.6}) check(dirac, param_point({s, 0.4 - s / 3}));
  CHECK(worst <= 5e-3);
}

TEST_CASE("berry_from_phase on the dirac model") {
  for (double mass : {1.0, -1.0}) {
    const StateFamily fam = dirac2d_family(mass);
    const double omega = berry_from_phase(fam, param_point({0.0, 0.0}), 0, 1);
    CHECK(omega == doctest::Approx(0.5 * (mass > 0 ? 1.0 : -1.0)).epsilon(1e-5));
    // antisymmetry and the diagonal
    CHECK(berry_from_phase(fam, param_point({0.0, 0.0}), 1, 0) ==
          doctest::Approx(-omega).epsilon(1e-5));
    CHECK(berry_from_phase(fam, param_point({0.3, 0.2}), 0, 0) == doctest::Approx(0.0));
  }
  // closed-form cross-check away from the origin
  const StateFamily fam = dirac2d_family(1.0);
  const ParamPoint x = param_point({0.5, 0.3});
  const double omega = berry_from_phase(fam, x, 0, 1);
  CHECK(omega == doctest::Approx((*dirac_geometry_closed(fam, x).berry)(0, 1)).epsilon(1e-5));
}

TEST_CASE("berry_from_phase cancels separable gauges") {
  const StateFamily fam = dirac2d_family(1.0);
  const StateFamily twisted = with_gauge_twist(fam);
  for (const ParamPoint& x : {param_point({0.0, 0.0}), param_point({0.4, -0.2})}) {
    const double a = berry_from_phase(fam, x, 0, 1);
    const double b = berry_from_phase(twisted, x, 0, 1);
    CHECK(std::abs(a - b) <= 1e-8);
  }
}

TEST_CASE("berry_from_phase raises PhaseWrap once step shrinking is exhausted") {
  // level crossing through the stencil: overlaps stay orthogonal at every
  // shrunken step, so no branch choice is defensible
  const StateFamily crossing = family_from_ket(
      2, 2,
      [](const ParamPoint& x) {
        Eigen::VectorXcd psi(2);
        if (x[0] + x[1] < 0.0)
          psi << 1, 0;
        else
          psi << 0, 1;
        return psi;
      },
      true, true);
  CHECK_THROWS_WITH_AS(berry_from_phase(crossing, param_point({0.0, 0.0}), 0, 1),
                       doctest::Contains("PhaseWrap"), Error);
}

TEST_CASE("berry_from_im on analytic gauges") {
  // south pole: the analytic gauge is regular, both routes agree
  const StateFamily south = dirac2d_family(-1.0);
  CHECK(berry_from_im(south, param_point({0.0, 0.0}), 0, 1) ==
        doctest::Approx(-0.5).epsilon(1e-4));
  const StateFamily north = dirac2d_family(1.0);
  const ParamPoint x = param_point({0.5, 0.3});
  CHECK(berry_from_im(north, x, 0, 1) ==
        doctest::Approx((*dirac_geometry_closed(north, x).berry)(0, 1)).epsilon(1e-4));
  CHECK(berry_from_im(north, x, 0, 1) ==
        doctest::Approx(berry_from_phase(north, x, 0, 1)).epsilon(1e-4));
  // per-point fixed gauges are rejected
  CHECK_THROWS_WITH_AS(berry_from_im(with_gauge_twist(north), x, 0, 1),
                       doctest::Contains("GaugeNotSmooth"), Error);
}

TEST_CASE("metric_from_overlap") {
  CHECK(metric_from_overlap(ssh_family(0.2, 0.0), param_point({M_PI}))(0, 0) ==
        doctest::Approx(1.0).epsilon(1e-5));
  const StateFamily dirac = dirac2d_family(1.0);
  const Eigen::MatrixXd g = metric_from_overlap(dirac, param_point({0.3, -0.6}));
  const Eigen::MatrixXd g_closed = dirac_geometry_closed(dirac, param_point({0.3, -0.6})).metric;
  CHECK((g - g_closed).cwiseAbs().maxCoeff() <= 1e-5);
  // no-log variant
  const Eigen::MatrixXd g2 =
      metric_from_overlap(dirac, param_point({0.3, -0.6}), {}, /*use_log=*/false);
  CHECK((g2 - g_closed).cwiseAbs().maxCoeff() <= 1e-5);
  // constant ket
  const StateFamily constant = family_from_ket(
      1, 2,
      [](const ParamPoint&) {
        Eigen::VectorXcd psi(2);
        psi << 1.0, 0.0;
        return psi;
      },
      true, true);
  CHECK(std::abs(metric_from_overlap(constant, param_point({0.0}))(0, 0)) <= 1e-12);
}

TEST_CASE("ray_series_fit contracts") {
  const StateFamily spin = spin_family();
  Eigen::VectorXd u1(1);
  u1 << 1.0;
  const RayFit f0 = ray_series_fit(spin, param_point({0.0}), u1);
  CHECK(std::abs(f0.c0) <= 1e-10);
  CHECK(std::abs(f0.c1) <= 1e-7);
  CHECK(f0.c2 == doctest::Approx(-1.0 / 8.0).epsilon(1e-4));
  CHECK(f0.residual <= 1e-8);

  const StateFamily lin = family_from_bloch(
      1, [](const ParamPoint& x) { return BlochVector(0, 0, x[0]); });
  const RayFit fl = ray_series_fit(lin, param_point({0.5}), u1);
  CHECK(fl.c2 == doctest::Approx(-(4.0 / 3.0) / 8.0).epsilon(1e-4));

  const StateFamily constant = constant_bloch_family(BlochVector(0.1, 0.2, 0.0));
  const RayFit fc = ray_series_fit(constant, param_point({0.0}), u1);
  CHECK(std::abs(fc.c1) <= 1e-12);
  CHECK(std::abs(fc.c2) <= 1e-12);
  CHECK(std::abs(fc.c3) <= 1e-12);

  CHECK_THROWS_WITH_AS(ray_series_fit(spin, param_point({0.0}), u1, {0.0, 0.0, 0.0, 0.0, 0.0, 0.0}),
                       doctest::Contains("FitIllConditioned"), Error);
  Eigen::VectorXd zero(1);
  zero << 0.0;
  CHECK_THROWS_AS(ray_series_fit(spin, param_point({0.0}), zero), Error);
}

TEST_CASE("ray residual stays small on smooth families") {
  std::mt19937 rng(9);
  for (int rep = 0; rep < 5; ++rep) {
    const int d = 1 + rep % 2;
    const StateFamily fam = random_bloch_family(rng, d);
    const ParamPoint x = random_point(rng, d);
    Eigen::VectorXd u(d);
    for (int i = 0; i < d; ++i) u[i] = (i == 0) ? 1.0 : 0.5;
    const RayFit fit = ray_series_fit(fam, x, u);
    CHECK(fit.residual <= 1e-8);
    CHECK(std::abs(fit.c0) <= 1e-10);
  }
}
