#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "qgeom/genfun.hpp"
#include "qgeom/geometry.hpp"

namespace qgeom {

/// Two-slot scalar f(x, x'); derivatives are taken per slot and the
/// coincidence limit applied after differencing.
using TwoSlotFn = std::function<double(const ParamPoint&, const ParamPoint&)>;

/// Steps for the two-slot stencils. richardson combines the h and h/2
/// stencils as (4 f_{h/2} - f_h)/3, lifting the O(h^2) stencils to O(h^4).
struct StencilConfig {
  double h2 = 1e-3;
  double h3 = 1e-2;
  bool richardson = true;

  void validate() const;  // 1e-6 <= h2, h3 <= 1e-1
};

/// Mixed second derivative d_{mu'} d_nu f at coincidence:
///   [f(+,+) - f(+,-) - f(-,+) + f(-,-)] / (4 h^2)
/// with the nu offset in the first slot and the mu offset in the second.
/// Exact on bilinear functions.
double mixed_second(const TwoSlotFn& gf, const ParamPoint& x, int mu_primed, int nu_unprimed,
                    const StencilConfig& cfg = {});

/// A third derivative of ln|B| at coincidence with index bookkeeping: each
/// primed index carries a factor -i, each unprimed +i. `value` is the real
/// finite-difference partial; full() attaches the i factors.
struct BarDerivative {
  std::vector<int> primed;
  std::vector<int> unprimed;
  double value = 0.0;

  std::complex<double> full() const;
};

/// Third mixed partial with |primed| + |unprimed| == 3 (2+1 or 1+2).
BarDerivative bar_third(const TwoSlotFn& lngf, const ParamPoint& x, std::vector<int> primed,
                        std::vector<int> unprimed, const StencilConfig& cfg = {});

/// QFIM from the fidelity generating function: F_mn = 4 d_{m'} d_n G with
/// G = ln fidelity (use_log) or the fidelity itself; symmetrized.
GeometryReport qfim_from_genfun(const StateFamily& fam, const ParamPoint& x,
                                const StencilConfig& cfg = {}, bool use_log = true);

/// Christoffel tensor from the six-term third-derivative combination
///   Gamma_lmn = 2i { B_{nl;m} - B_{l;nm} + B_{ml;n} - B_{l;mn}
///                  - B_{lm;n} + B_{m;ln} }
/// of log-fidelity bar derivatives; result symmetrized in (m, n) after an
/// asymmetry check.
Tensor3 christoffel_from_genfun(const StateFamily& fam, const ParamPoint& x,
                                const StencilConfig& cfg = {});

/// Berry curvature from the overlap phase: Omega_mn = -2 d_{m'} d_n phi.
/// Stencil kets are phase-normalized per point (separable gauge terms
/// cancel in the mixed stencil); steps are halved up to 4 times until all
/// stencil phases lie in (-pi/2, pi/2), else PhaseWrap.
double berry_from_phase(const StateFamily& fam, const ParamPoint& x, int mu, int nu,
                        const StencilConfig& cfg = {});

/// Berry curvature from -2 Im <psi(x')|psi(x)>. Valid only for families
/// whose ket gauge is an analytic closed form (GaugeNotSmooth otherwise);
/// not gauge-invariant pointwise.
double berry_from_im(const StateFamily& fam, const ParamPoint& x, int mu, int nu,
                     const StencilConfig& cfg = {});

/// Pure-state metric from the overlap modulus (or its log).
Eigen::MatrixXd metric_from_overlap(const StateFamily& fam, const ParamPoint& x,
                                    const StencilConfig& cfg = {}, bool use_log = true);

/// Least-squares ray expansion of ln fidelity along x + t u. Coefficients
/// satisfy c0 ~ 0, c1 ~ 0 (vanishing first-order trace) and c2 = -F_uu/8;
/// residual is the fit RMS.
struct RayFit {
  Eigen::VectorXd direction;
  double c0 = 0.0, c1 = 0.0, c2 = 0.0, c3 = 0.0;
  double residual = 0.0;
};

std::vector<double> default_ray_grid();  // 9 points spanning [-0.04, 0.04]

RayFit ray_series_fit(const StateFamily& fam, const ParamPoint& x, const Eigen::VectorXd& u,
                      const std::vector<double>& t_grid = default_ray_grid());

}  // namespace qgeom
