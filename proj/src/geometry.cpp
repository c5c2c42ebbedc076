#include "qgeom/geometry.hpp"

#include <cmath>

namespace qgeom {

namespace {

ParamPoint shifted(const ParamPoint& x, int mu, double h) {
  ParamPoint y = x;
  y[mu] += h;
  return y;
}

template <class F>
auto central_first(F&& f, const ParamPoint& x, int mu, double h) {
  return ((f(shifted(x, mu, h)) - f(shifted(x, mu, -h))) / (2.0 * h)).eval();
}

template <class F>
auto central_second(F&& f, const ParamPoint& x, int mu, int nu, double h) {
  if (mu == nu) {
    return ((f(shifted(x, mu, h)) - 2.0 * f(x) + f(shifted(x, mu, -h))) / (h * h)).eval();
  }
  ParamPoint pp = shifted(shifted(x, mu, h), nu, h);
  ParamPoint pm = shifted(shifted(x, mu, h), nu, -h);
  ParamPoint mp = shifted(shifted(x, mu, -h), nu, h);
  ParamPoint mm = shifted(shifted(x, mu, -h), nu, -h);
  return ((f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h * h)).eval();
}

void require_bloch(const StateFamily& fam) {
  if (!fam.has_bloch())
    throw Error(Errc::UnsupportedKind, "operation needs a Bloch path");
}

BlochVector checked_bloch(const StateFamily& fam, const ParamPoint& x) {
  BlochVector r = fam.bloch(x);
  if (r.norm() > 1.0 + 1e-9)
    throw Error(Errc::BlochOutOfBall, "|r| = " + std::to_string(r.norm()));
  return r;
}

GeometryReport report_from_qfim(const ParamPoint& x, Eigen::MatrixXd f, GeomMethod method) {
  GeometryReport rep;
  rep.at = x;
  rep.qfim = std::move(f);
  rep.metric = rep.qfim / 4.0;
  rep.method = method;
  return rep;
}

}  // namespace

const char* to_string(GeomMethod m) {
  switch (m) {
    case GeomMethod::Direct: return "direct";
    case GeomMethod::GenFun: return "genfun";
    case GeomMethod::ClosedForm: return "closed_form";
  }
  return "?";
}

SLDMatrix sld(const StateFamily& fam, const ParamPoint& x, int mu, double h, double rank_tol) {
  const ComplexMatrix rho = fam.rho(x);
  const HermitianEigen eg = eig_hermitian(rho);
  auto rho_fn = [&fam](const ParamPoint& p) { return fam.rho(p); };
  const ComplexMatrix drho = central_first(rho_fn, x, mu, h);
  // Eigenbasis elements <i|L|j> = 2 <i|drho|j> / (l_i + l_j) on the support.
  const ComplexMatrix dtil = eg.vectors.adjoint() * drho * eg.vectors;
  ComplexMatrix ltil = ComplexMatrix::Zero(rho.rows(), rho.cols());
  int truncated = 0;
  for (Eigen::Index i = 0; i < rho.rows(); ++i) {
    for (Eigen::Index j = 0; j < rho.cols(); ++j) {
      const double s = eg.values[i] + eg.values[j];
      if (s > rank_tol)
        ltil(i, j) = 2.0 * dtil(i, j) / s;
      else
        ++truncated;
    }
  }
  SLDMatrix out;
  out.L = eg.vectors * ltil * eg.vectors.adjoint();
  out.L = 0.5 * (out.L + out.L.adjoint().eval());
  out.truncated = truncated;
  return out;
}

GeometryReport qfim_sld(const StateFamily& fam, const ParamPoint& x, double h, double rank_tol) {
  const int d = fam.param_dim;
  const ComplexMatrix rho = fam.rho(x);
  std::vector<SLDMatrix> ls;
  ls.reserve(d);
  int truncations = 0;
  for (int mu = 0; mu < d; ++mu) {
    ls.push_back(sld(fam, x, mu, h, rank_tol));
    truncations += ls.back().truncated;
  }
  Eigen::MatrixXd f(d, d);
  for (int mu = 0; mu < d; ++mu)
    for (int nu = 0; nu <= mu; ++nu) {
      const double v =
          0.5 * (rho * (ls[mu].L * ls[nu].L + ls[nu].L * ls[mu].L)).trace().real();
      f(mu, nu) = v;
      f(nu, mu) = v;
    }
  GeometryReport rep = report_from_qfim(x, std::move(f), GeomMethod::Direct);
  rep.sld_truncations = truncations;
  return rep;
}

GeometryReport qfim_bloch(const StateFamily& fam, const ParamPoint& x, double h,
                          double purity_tol) {
  require_bloch(fam);
  const int d = fam.param_dim;
  const BlochVector r = checked_bloch(fam, x);
  auto bloch_fn = [&fam](const ParamPoint& p) { return fam.bloch(p); };
  std::vector<BlochVector> dr(d);
  for (int mu = 0; mu < d; ++mu) dr[mu] = central_first(bloch_fn, x, mu, h);

  const double rr = r.squaredNorm();
  const bool pure = rr >= 1.0 - purity_tol;
  if (pure) {
    for (int mu = 0; mu < d; ++mu)
      if (std::abs(r.dot(dr[mu])) > 1e-6)
        throw Error(Errc::PuritySingularity, "|r.dr| nonzero on the Bloch sphere");
  }
  Eigen::MatrixXd f(d, d);
  for (int mu = 0; mu < d; ++mu)
    for (int nu = 0; nu <= mu; ++nu) {
      double v = dr[mu].dot(dr[nu]);
      if (!pure) v += r.dot(dr[mu]) * r.dot(dr[nu]) / (1.0 - rr);
      f(mu, nu) = v;
      f(nu, mu) = v;
    }
  return report_from_qfim(x, std::move(f), GeomMethod::Direct);
}

Tensor3 christoffel_bloch(const StateFamily& fam, const ParamPoint& x, DiffSteps steps,
                          double purity_tol) {
  require_bloch(fam);
  const int d = fam.param_dim;
  const BlochVector r = checked_bloch(fam, x);
  auto bloch_fn = [&fam](const ParamPoint& p) { return fam.bloch(p); };

  std::vector<BlochVector> dr(d);
  for (int mu = 0; mu < d; ++mu) dr[mu] = central_first(bloch_fn, x, mu, steps.first);
  std::vector<std::vector<BlochVector>> ddr(d, std::vector<BlochVector>(d));
  for (int mu = 0; mu < d; ++mu)
    for (int nu = 0; nu <= mu; ++nu) {
      ddr[mu][nu] = central_second(bloch_fn, x, mu, nu, steps.second);
      ddr[nu][mu] = ddr[mu][nu];
    }

  const double rr = r.squaredNorm();
  const bool pure = rr >= 1.0 - purity_tol;
  if (pure) {
    for (int mu = 0; mu < d; ++mu)
      if (std::abs(r.dot(dr[mu])) > 1e-6)
        throw Error(Errc::PuritySingularity, "|r.dr| nonzero on the Bloch sphere");
  }
  const double u = 1.0 - rr;
  Tensor3 g(d);
  for (int l = 0; l < d; ++l)
    for (int m = 0; m < d; ++m)
      for (int n = 0; n <= m; ++n) {
        double v = dr[l].dot(ddr[m][n]);
        if (!pure) {
          const double al = r.dot(dr[l]), am = r.dot(dr[m]), an = r.dot(dr[n]);
          v += al / u * (dr[m].dot(dr[n]) + r.dot(ddr[m][n]));
          v += al * am * an / (u * u);
        }
        g(l, m, n) = v;
        g(l, n, m) = v;
      }
  return g;
}

GeometryReport qgt_pure(const StateFamily& fam, const ParamPoint& x, double h,
                        double purity_tol) {
  const int d = fam.param_dim;
  const ComplexMatrix p = fam.rho(x);
  {
    const HermitianEigen eg = eig_hermitian(p);
    for (Eigen::Index i = 0; i < eg.values.size(); ++i) {
      const double l = eg.values[i];
      if (std::min(std::abs(l), std::abs(l - 1.0)) > purity_tol)
        throw Error(Errc::NotPure, "projector eigenvalue " + std::to_string(l));
    }
  }
  auto rho_fn = [&fam](const ParamPoint& q) { return fam.rho(q); };
  std::vector<ComplexMatrix> dp(d);
  for (int mu = 0; mu < d; ++mu) dp[mu] = central_first(rho_fn, x, mu, h);

  const ComplexMatrix hole = ComplexMatrix::Identity(p.rows(), p.cols()) - p;
  Eigen::MatrixXcd t(d, d);
  for (int mu = 0; mu < d; ++mu)
    for (int nu = 0; nu < d; ++nu) t(mu, nu) = (dp[mu] * hole * dp[nu]).trace();

  Eigen::MatrixXd metric = 0.5 * (t.real() + t.real().transpose());
  Eigen::MatrixXd berry = -(t.imag() - t.imag().transpose());  // -2 Im T, antisymmetrized

  GeometryReport rep = report_from_qfim(x, Eigen::MatrixXd(4.0 * metric), GeomMethod::Direct);
  rep.berry = std::move(berry);
  rep.qgt = std::move(t);
  return rep;
}

GeometryReport dirac_geometry_closed(const StateFamily& fam, const ParamPoint& x,
                                     DiffSteps steps) {
  if (!fam.has_dvec())
    throw Error(Errc::UnsupportedKind, "operation needs a d-vector path");
  const int d = fam.param_dim;
  auto n_fn = [&fam](const ParamPoint& p) { return Eigen::Vector3d(fam.dvec(p).unit(1e-10)); };
  const Eigen::Vector3d n = n_fn(x);

  std::vector<Eigen::Vector3d> dn(d);
  for (int mu = 0; mu < d; ++mu) dn[mu] = central_first(n_fn, x, mu, steps.first);
  std::vector<std::vector<Eigen::Vector3d>> ddn(d, std::vector<Eigen::Vector3d>(d));
  for (int mu = 0; mu < d; ++mu)
    for (int nu = 0; nu <= mu; ++nu) {
      ddn[mu][nu] = central_second(n_fn, x, mu, nu, steps.second);
      ddn[nu][mu] = ddn[mu][nu];
    }

  Eigen::MatrixXd metric(d, d), berry(d, d);
  Tensor3 gamma(d);
  for (int mu = 0; mu < d; ++mu)
    for (int nu = 0; nu < d; ++nu) {
      metric(mu, nu) = 0.25 * dn[mu].dot(dn[nu]);
      berry(mu, nu) = 0.5 * n.dot(dn[mu].cross(dn[nu]));
    }
  for (int l = 0; l < d; ++l)
    for (int m = 0; m < d; ++m)
      for (int nn = 0; nn <= m; ++nn) {
        // metric-convention value dn.ddn/4; stored in the QFIM convention (x4)
        const double v = dn[l].dot(ddn[m][nn]);
        gamma(l, m, nn) = v;
        gamma(l, nn, m) = v;
      }

  GeometryReport rep = report_from_qfim(x, Eigen::MatrixXd(4.0 * metric), GeomMethod::ClosedForm);
  rep.berry = berry;
  rep.qgt = Eigen::MatrixXcd(metric.cast<std::complex<double>>() -
                             std::complex<double>(0.0, 0.5) *
                                 berry.cast<std::complex<double>>());
  rep.christoffel = gamma;
  return rep;
}

GeometryReport classical_fim(const StateFamily& fam, const ParamPoint& x, double h) {
  if (!fam.has_ket() || !fam.real_ket)
    throw Error(Errc::UnsupportedKind, "classical_fim needs a real-ket family");
  const int d = fam.param_dim;
  auto raw_fn = [&fam](const ParamPoint& p) -> Eigen::VectorXd {
    const Eigen::VectorXcd psi = fam.ket(p);
    Eigen::VectorXd a(psi.size());
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
      if (std::abs(psi[i].imag()) > 1e-12)
        throw Error(Errc::UnsupportedKind, "ket has a complex component");
      a[i] = psi[i].real();
    }
    return a;
  };
  // |psi_i| is differentiable only where psi_i stays away from zero; guard
  // against both small magnitudes and sign changes across the stencil.
  const Eigen::VectorXd center = raw_fn(x);
  auto guard = [&center](const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (std::abs(v[i]) < 1e-8 || v[i] * center[i] < 0.0)
        throw Error(Errc::SignFlipAtStencil,
                    "psi component vanishes or flips sign inside the stencil");
  };
  guard(center);
  std::vector<Eigen::VectorXd> da(d);
  for (int mu = 0; mu < d; ++mu) {
    const Eigen::VectorXd plus = raw_fn(shifted(x, mu, h));
    const Eigen::VectorXd minus = raw_fn(shifted(x, mu, -h));
    guard(plus);
    guard(minus);
    da[mu] = (plus.cwiseAbs() - minus.cwiseAbs()) / (2.0 * h);
  }
  Eigen::MatrixXd f(d, d);
  for (int mu = 0; mu < d; ++mu)
    for (int nu = 0; nu <= mu; ++nu) {
      const double v = 4.0 * da[mu].dot(da[nu]);
      f(mu, nu) = v;
      f(nu, mu) = v;
    }
  return report_from_qfim(x, std::move(f), GeomMethod::Direct);
}

Tensor3 christoffel_from_metric(const std::function<Eigen::MatrixXd(const ParamPoint&)>& qfim_fn,
                                const ParamPoint& x, int param_dim, double h) {
  const int d = param_dim;
  std::vector<Eigen::MatrixXd> df(d);
  for (int l = 0; l < d; ++l) df[l] = central_first(qfim_fn, x, l, h);
  Tensor3 g(d);
  for (int l = 0; l < d; ++l)
    for (int m = 0; m < d; ++m)
      for (int n = 0; n < d; ++n)
        g(l, m, n) = 0.5 * (df[n](l, m) + df[m](l, n) - df[l](m, n));
  return g;
}

Tensor3 christoffel_from_metric(const StateFamily& fam, const ParamPoint& x, double h) {
  std::function<Eigen::MatrixXd(const ParamPoint&)> provider;
  if (fam.has_bloch())
    provider = [&fam](const ParamPoint& p) { return qfim_bloch(fam, p).qfim; };
  else
    provider = [&fam](const ParamPoint& p) { return qfim_sld(fam, p).qfim; };
  return christoffel_from_metric(provider, x, fam.param_dim, h);
}

}  // namespace qgeom
