#include "qgeom/numdiff.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace qgeom {

namespace {

constexpr double kPi = 3.14159265358979323846;

ParamPoint shifted(const ParamPoint& x, int mu, double h) {
  ParamPoint y = x;
  y[mu] += h;
  return y;
}

double stencil_mixed(const TwoSlotFn& gf, const ParamPoint& x, int mu_primed, int nu_unprimed,
                     double h) {
  double acc = 0.0;
  for (int s1 : {+1, -1})
    for (int s2 : {+1, -1})
      acc += s1 * s2 * gf(shifted(x, nu_unprimed, s1 * h), shifted(x, mu_primed, s2 * h));
  return acc / (4.0 * h * h);
}

double richardson(const std::function<double(double)>& stencil, double h, bool enabled) {
  if (!enabled) return stencil(h);
  return (4.0 * stencil(h / 2.0) - stencil(h)) / 3.0;
}

// One-dimensional stencil taps: (step multiple, weight).
using Taps = std::vector<std::pair<int, double>>;

Taps first_taps(double h) { return {{+1, 1.0 / (2.0 * h)}, {-1, -1.0 / (2.0 * h)}}; }
Taps second_taps(double h) {
  return {{+1, 1.0 / (h * h)}, {0, -2.0 / (h * h)}, {-1, 1.0 / (h * h)}};
}

// Offsets applied to one slot for a list of indices with multiplicities.
struct SlotStencil {
  std::vector<std::pair<std::vector<std::pair<int, int>>, double>> taps;  // ((index, step)..., weight)
};

SlotStencil slot_stencil(const std::vector<int>& indices, double h) {
  SlotStencil out;
  if (indices.empty()) {
    out.taps.push_back({{}, 1.0});
    return out;
  }
  if (indices.size() == 1) {
    for (auto [s, w] : first_taps(h)) out.taps.push_back({{{indices[0], s}}, w});
    return out;
  }
  // two indices in this slot
  if (indices[0] == indices[1]) {
    for (auto [s, w] : second_taps(h)) out.taps.push_back({{{indices[0], s}}, w});
    return out;
  }
  for (auto [sa, wa] : first_taps(h))
    for (auto [sb, wb] : first_taps(h))
      out.taps.push_back({{{indices[0], sa}, {indices[1], sb}}, wa * wb});
  return out;
}

double stencil_third(const TwoSlotFn& gf, const ParamPoint& x, const std::vector<int>& primed,
                     const std::vector<int>& unprimed, double h) {
  const SlotStencil sp = slot_stencil(primed, h);
  const SlotStencil su = slot_stencil(unprimed, h);
  double acc = 0.0;
  for (const auto& [offs_u, wu] : su.taps) {
    ParamPoint xu = x;
    for (auto [idx, s] : offs_u) xu[idx] += s * h;
    for (const auto& [offs_p, wp] : sp.taps) {
      ParamPoint xp = x;
      for (auto [idx, s] : offs_p) xp[idx] += s * h;
      acc += wu * wp * gf(xu, xp);
    }
  }
  return acc;
}

TwoSlotFn fidelity_fn(const StateFamily& fam, bool use_log) {
  const GenFunKind kind = use_log ? GenFunKind::LogFidelity : GenFunKind::Fidelity;
  return [&fam, kind](const ParamPoint& a, const ParamPoint& b) {
    return genfun_eval(fam, a, b, kind);
  };
}

}  // namespace

void StencilConfig::validate() const {
  if (h2 < 1e-6 || h2 > 1e-1 || h3 < 1e-6 || h3 > 1e-1)
    throw Error(Errc::ConfigInvalid, "stencil steps must lie in [1e-6, 1e-1]");
}

double mixed_second(const TwoSlotFn& gf, const ParamPoint& x, int mu_primed, int nu_unprimed,
                    const StencilConfig& cfg) {
  cfg.validate();
  try {
    return richardson(
        [&](double h) { return stencil_mixed(gf, x, mu_primed, nu_unprimed, h); }, cfg.h2,
        cfg.richardson);
  } catch (const Error& e) {
    if (e.code() == Errc::OracleFailure) throw;
    throw Error(Errc::OracleFailure, std::string(e.what()) + " while evaluating a stencil at mu=" +
                                         std::to_string(mu_primed) + " nu=" +
                                         std::to_string(nu_unprimed));
  }
}

std::complex<double> BarDerivative::full() const {
  std::complex<double> f(1.0, 0.0);
  for (size_t i = 0; i < primed.size(); ++i) f *= std::complex<double>(0.0, -1.0);
  for (size_t i = 0; i < unprimed.size(); ++i) f *= std::complex<double>(0.0, 1.0);
  return f * value;
}

BarDerivative bar_third(const TwoSlotFn& lngf, const ParamPoint& x, std::vector<int> primed,
                        std::vector<int> unprimed, const StencilConfig& cfg) {
  cfg.validate();
  if (primed.size() + unprimed.size() != 3 || primed.empty() || unprimed.empty())
    throw Error(Errc::ConfigInvalid, "bar_third needs a 2+1 or 1+2 index split");
  BarDerivative out;
  out.primed = primed;
  out.unprimed = unprimed;
  try {
    out.value = richardson(
        [&](double h) { return stencil_third(lngf, x, primed, unprimed, h); }, cfg.h3,
        cfg.richardson);
  } catch (const Error& e) {
    if (e.code() == Errc::OracleFailure) throw;
    throw Error(Errc::OracleFailure, std::string(e.what()) + " while evaluating a third-order stencil");
  }
  return out;
}

GeometryReport qfim_from_genfun(const StateFamily& fam, const ParamPoint& x,
                                const StencilConfig& cfg, bool use_log) {
  const int d = fam.param_dim;
  const TwoSlotFn gf = fidelity_fn(fam, use_log);
  Eigen::MatrixXd f(d, d);
  for (int mu = 0; mu < d; ++mu)
    for (int nu = 0; nu < d; ++nu) f(mu, nu) = 4.0 * mixed_second(gf, x, mu, nu, cfg);
  f = 0.5 * (f + f.transpose().eval());
  GeometryReport rep;
  rep.at = x;
  rep.qfim = std::move(f);
  rep.metric = rep.qfim / 4.0;
  rep.method = GeomMethod::GenFun;
  return rep;
}

Tensor3 christoffel_from_genfun(const StateFamily& fam, const ParamPoint& x,
                                const StencilConfig& cfg) {
  const int d = fam.param_dim;
  const TwoSlotFn gf = fidelity_fn(fam, true);

  // Raw third partials depend only on the index multisets per slot.
  std::map<std::pair<std::vector<int>, std::vector<int>>, double> cache;
  auto raw = [&](std::vector<int> p, std::vector<int> u) {
    std::sort(p.begin(), p.end());
    std::sort(u.begin(), u.end());
    const auto key = std::make_pair(p, u);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const double v = bar_third(gf, x, p, u, cfg).value;
    cache.emplace(key, v);
    return v;
  };
  // Bar values: two primed indices carry (-i)^2 (i) = -i, one primed carries i.
  auto bar2 = [&](int a, int b, int c) { return std::complex<double>(0.0, -1.0) * raw({a, b}, {c}); };
  auto bar1 = [&](int a, int b, int c) { return std::complex<double>(0.0, 1.0) * raw({a}, {b, c}); };

  Tensor3 g(d);
  Tensor3 rawg(d);
  for (int l = 0; l < d; ++l)
    for (int m = 0; m < d; ++m)
      for (int n = 0; n < d; ++n) {
        const std::complex<double> sum = bar2(n, l, m) - bar1(l, n, m) + bar2(m, l, n) -
                                         bar1(l, m, n) - bar2(l, m, n) + bar1(m, l, n);
        const std::complex<double> v = std::complex<double>(0.0, 2.0) * sum;
        if (std::abs(v.imag()) > 1e-8 * std::max(1.0, std::abs(v.real())))
          throw Error(Errc::OracleFailure, "imaginary residue in the Christoffel combination");
        rawg(l, m, n) = v.real();
      }
  // (m, n) symmetry holds only to stencil accuracy; check, then symmetrize.
  const double scale = std::max(1.0, rawg.max_abs());
  for (int l = 0; l < d; ++l)
    for (int m = 0; m < d; ++m)
      for (int n = 0; n <= m; ++n) {
        if (std::abs(rawg(l, m, n) - rawg(l, n, m)) > 1e-3 * scale)
          throw Error(Errc::OracleFailure, "Christoffel (mu, nu) asymmetry beyond stencil accuracy");
        const double v = 0.5 * (rawg(l, m, n) + rawg(l, n, m));
        g(l, m, n) = v;
        g(l, n, m) = v;
      }
  return g;
}

double berry_from_phase(const StateFamily& fam, const ParamPoint& x, int mu, int nu,
                        const StencilConfig& cfg) {
  cfg.validate();
  if (!fam.has_ket())
    throw Error(Errc::UnsupportedKind, "berry_from_phase needs a ket path");

  auto ket = [&fam](const ParamPoint& p) { return fix_ket_phase(fam.ket(p)); };
  // phi(x', x) at one stencil pair; modulus and wrap guards per evaluation.
  auto phase = [&](const ParamPoint& xu, const ParamPoint& xp) {
    const OverlapValue o = pure_overlap(ket(xp), ket(xu));
    if (o.modulus < 0.1)
      throw Error(Errc::PhaseWrap, "stencil overlap modulus below 0.1 (gauge pole nearby?)");
    if (std::abs(o.phase) > kPi / 2.0)
      throw Error(Errc::PhaseWrap, "stencil phase beyond pi/2");
    return o.phase;
  };
  auto stencil = [&](double h) {
    double acc = 0.0;
    for (int s1 : {+1, -1})
      for (int s2 : {+1, -1})
        acc += s1 * s2 * phase(shifted(x, nu, s1 * h), shifted(x, mu, s2 * h));
    return acc / (4.0 * h * h);
  };

  double h = cfg.h2;
  for (int attempt = 0;; ++attempt) {
    try {
      const double mixed = richardson(stencil, h, cfg.richardson);
      return -2.0 * mixed;
    } catch (const Error& e) {
      if (e.code() != Errc::PhaseWrap || attempt >= 4) throw;
      h /= 2.0;  // shrink until the stencil phases unwrap
    }
  }
}

double berry_from_im(const StateFamily& fam, const ParamPoint& x, int mu, int nu,
                     const StencilConfig& cfg) {
  if (!fam.has_ket())
    throw Error(Errc::UnsupportedKind, "berry_from_im needs a ket path");
  if (!fam.analytic_gauge)
    throw Error(Errc::GaugeNotSmooth,
                "berry_from_im needs an analytic ket gauge; use berry_from_phase");
  const TwoSlotFn gf = [&fam](const ParamPoint& a, const ParamPoint& b) {
    return genfun_eval(fam, a, b, GenFunKind::OverlapNeg2Im);
  };
  return mixed_second(gf, x, mu, nu, cfg);
}

Eigen::MatrixXd metric_from_overlap(const StateFamily& fam, const ParamPoint& x,
                                    const StencilConfig& cfg, bool use_log) {
  if (!fam.has_ket())
    throw Error(Errc::UnsupportedKind, "metric_from_overlap needs a ket path");
  const GenFunKind kind = use_log ? GenFunKind::OverlapLogModulus : GenFunKind::OverlapModulus;
  const TwoSlotFn gf = [&fam, kind](const ParamPoint& a, const ParamPoint& b) {
    return genfun_eval(fam, a, b, kind);
  };
  const int d = fam.param_dim;
  Eigen::MatrixXd g(d, d);
  for (int mu = 0; mu < d; ++mu)
    for (int nu = 0; nu < d; ++nu) g(mu, nu) = mixed_second(gf, x, mu, nu, cfg);
  return 0.5 * (g + g.transpose().eval());
}

std::vector<double> default_ray_grid() {
  std::vector<double> t(9);
  for (int i = 0; i < 9; ++i) t[static_cast<size_t>(i)] = -0.04 + 0.01 * i;
  return t;
}

RayFit ray_series_fit(const StateFamily& fam, const ParamPoint& x, const Eigen::VectorXd& u,
                      const std::vector<double>& t_grid) {
  if (u.size() != fam.param_dim)
    throw Error(Errc::DimensionMismatch, "ray direction dimension mismatch");
  const double un = u.norm();
  if (un < 1e-12) throw Error(Errc::DomainError, "ray direction must be nonzero");
  const Eigen::VectorXd dir = u / un;

  const int npts = static_cast<int>(t_grid.size());
  // Degree 5 keeps the reported c0..c3 free of the higher-order bias a plain
  // cubic picks up on this grid width.
  const int ncoef = 6;
  if (npts < ncoef)
    throw Error(Errc::FitIllConditioned, "ray fit needs at least 6 grid points");
  double tmax = 0.0;
  for (double t : t_grid) tmax = std::max(tmax, std::abs(t));
  if (tmax <= 0.0) throw Error(Errc::FitIllConditioned, "degenerate t grid");

  Eigen::MatrixXd vand(npts, ncoef);
  Eigen::VectorXd y(npts);
  for (int i = 0; i < npts; ++i) {
    const double t = t_grid[static_cast<size_t>(i)];
    const double s = t / tmax;
    double p = 1.0;
    for (int j = 0; j < ncoef; ++j) {
      vand(i, j) = p;
      p *= s;
    }
    y[i] = genfun_eval(fam, x, x + t * dir, GenFunKind::LogFidelity);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(vand);
  if (qr.rank() < ncoef)
    throw Error(Errc::FitIllConditioned, "rank-deficient ray grid (repeated t values?)");
  const Eigen::VectorXd c = qr.solve(y);
  const double rms = std::sqrt((vand * c - y).squaredNorm() / npts);

  RayFit fit;
  fit.direction = dir;
  fit.c0 = c[0];
  fit.c1 = c[1] / tmax;
  fit.c2 = c[2] / (tmax * tmax);
  fit.c3 = c[3] / (tmax * tmax * tmax);
  fit.residual = rms;
  return fit;
}

}  // namespace qgeom
