#include "qgeom/genfun.hpp"

#include <algorithm>
#include <cmath>

namespace qgeom {

namespace {

double clamp_fidelity(double f) {
  if (f > 1.0 + 1e-9)
    throw Error(Errc::DomainError, "fidelity overshoot " + std::to_string(f));
  return std::clamp(f, 0.0, 1.0);
}

// Tr sqrt(sqrt(a) b sqrt(a)) = sum of singular values of sqrt(b) sqrt(a).
// The singular-value form avoids the sqrt(eps) ~ 1e-8 trace noise the
// eigenvalues of the squared product pick up for rank-deficient states.
double uhlmann_raw(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows())
    throw Error(Errc::DimensionMismatch, "density matrices of different dimension");
  const ComplexMatrix prod = sqrt_psd(b) * sqrt_psd(a);
  Eigen::JacobiSVD<ComplexMatrix> svd(prod);
  return clamp_fidelity(svd.singularValues().sum());
}

double checked_log(double v) {
  if (v <= 0.0)
    throw Error(Errc::DomainError, "log of non-positive generating function value");
  return std::log(v);
}

Eigen::VectorXd real_ket_probs(const StateFamily& fam, const ParamPoint& x) {
  const Eigen::VectorXcd psi = fam.ket(x);
  Eigen::VectorXd p(psi.size());
  for (Eigen::Index i = 0; i < psi.size(); ++i) p[i] = std::norm(psi[i]);
  return p;
}

}  // namespace

GenFunKind genfun_kind_from_string(const std::string& s) {
  if (s == "fidelity") return GenFunKind::Fidelity;
  if (s == "log_fidelity") return GenFunKind::LogFidelity;
  if (s == "overlap_modulus") return GenFunKind::OverlapModulus;
  if (s == "overlap_log_modulus") return GenFunKind::OverlapLogModulus;
  if (s == "overlap_phase") return GenFunKind::OverlapPhase;
  if (s == "overlap_neg2im") return GenFunKind::OverlapNeg2Im;
  if (s == "divergence") return GenFunKind::Divergence;
  if (s == "log_divergence") return GenFunKind::LogDivergence;
  throw Error(Errc::UnsupportedKind, "unknown generating-function kind '" + s + "'");
}

const char* to_string(GenFunKind k) {
  switch (k) {
    case GenFunKind::Fidelity: return "fidelity";
    case GenFunKind::LogFidelity: return "log_fidelity";
    case GenFunKind::OverlapModulus: return "overlap_modulus";
    case GenFunKind::OverlapLogModulus: return "overlap_log_modulus";
    case GenFunKind::OverlapPhase: return "overlap_phase";
    case GenFunKind::OverlapNeg2Im: return "overlap_neg2im";
    case GenFunKind::Divergence: return "divergence";
    case GenFunKind::LogDivergence: return "log_divergence";
  }
  return "?";
}

double uhlmann_fidelity(const DensityMatrix& rho, const DensityMatrix& rho_primed) {
  return uhlmann_raw(rho.matrix(), rho_primed.matrix());
}

double fidelity_2x2_closed(const BlochVector& r, const BlochVector& r_primed) {
  const double m1 = r.norm(), m2 = r_primed.norm();
  if (m1 > 1.0 + 1e-9 || m2 > 1.0 + 1e-9)
    throw Error(Errc::BlochOutOfBall, "|r| beyond the Bloch ball");
  const double inside = 0.5 * (1.0 + r.dot(r_primed)) +
                        0.5 * std::sqrt(std::max(0.0, 1.0 - m1 * m1)) *
                            std::sqrt(std::max(0.0, 1.0 - m2 * m2));
  return clamp_fidelity(std::sqrt(std::max(0.0, inside)));
}

OverlapValue pure_overlap(const Eigen::VectorXcd& psi_primed, const Eigen::VectorXcd& psi) {
  if (psi_primed.size() != psi.size())
    throw Error(Errc::DimensionMismatch, "kets of different dimension");
  if (std::abs(psi.norm() - 1.0) > 1e-10 || std::abs(psi_primed.norm() - 1.0) > 1e-10)
    throw Error(Errc::NotNormalized, "pure_overlap expects normalized kets");
  const std::complex<double> c = psi_primed.adjoint() * psi;
  double phase = std::arg(c);
  if (phase <= -M_PI) phase = M_PI;  // report phase in (-pi, pi]
  return {c, std::min(std::abs(c), 1.0 + 1e-12), phase};
}

DiracOverlap dirac_overlap_closed(const Eigen::Vector3d& n, const Eigen::Vector3d& n_primed) {
  if (std::abs(n.norm() - 1.0) > 1e-9 || std::abs(n_primed.norm() - 1.0) > 1e-9)
    throw Error(Errc::NotNormalized, "dirac_overlap_closed expects unit vectors");
  if (n[2] >= 1.0 - 1e-12 || n_primed[2] >= 1.0 - 1e-12)
    throw Error(Errc::GaugePole, "phase/imaginary branches singular at n3 -> 1");
  DiracOverlap out;
  out.modulus = std::sqrt(std::max(0.0, 0.5 * (1.0 + n_primed.dot(n))));
  out.neg2phase = -2.0 * std::atan2(n_primed[0] * n[1] - n_primed[1] * n[0],
                                    1.0 - n[2] - n_primed[2] + n_primed.dot(n));
  out.neg2im = (n_primed[1] * n[0] - n_primed[0] * n[1]) /
               (std::sqrt(1.0 - n_primed[2]) * std::sqrt(1.0 - n[2]));
  return out;
}

double classical_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& p_primed) {
  if (p.size() != p_primed.size())
    throw Error(Errc::DimensionMismatch, "probability vectors of different length");
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p[i] < -1e-12 || p_primed[i] < -1e-12)
      throw Error(Errc::DomainError, "negative probability mass");
  if (std::abs(p.sum() - 1.0) > 1e-9 || std::abs(p_primed.sum() - 1.0) > 1e-9)
    throw Error(Errc::DomainError, "probability mass does not sum to 1");
  double v = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    v += std::sqrt(std::max(0.0, p[i]) * std::max(0.0, p_primed[i]));
  return std::min(v, 1.0);
}

double genfun_eval(const StateFamily& fam, const ParamPoint& x, const ParamPoint& x_primed,
                   GenFunKind kind) {
  switch (kind) {
    case GenFunKind::Fidelity:
    case GenFunKind::LogFidelity: {
      double f;
      if (fam.has_bloch() && fam.hilbert_dim == 2)
        f = fidelity_2x2_closed(fam.bloch(x), fam.bloch(x_primed));
      else
        f = uhlmann_raw(fam.rho(x), fam.rho(x_primed));
      return kind == GenFunKind::Fidelity ? f : checked_log(f);
    }
    case GenFunKind::OverlapModulus:
    case GenFunKind::OverlapLogModulus:
    case GenFunKind::OverlapPhase:
    case GenFunKind::OverlapNeg2Im: {
      if (!fam.has_ket())
        throw Error(Errc::UnsupportedKind, "overlap kinds need a ket path");
      const OverlapValue o = pure_overlap(fam.ket(x_primed), fam.ket(x));
      switch (kind) {
        case GenFunKind::OverlapModulus: return o.modulus;
        case GenFunKind::OverlapLogModulus: return checked_log(o.modulus);
        case GenFunKind::OverlapPhase: return o.phase;
        default: return -2.0 * o.c.imag();
      }
    }
    case GenFunKind::Divergence:
    case GenFunKind::LogDivergence: {
      if (!fam.has_ket() || !fam.real_ket)
        throw Error(Errc::UnsupportedKind, "divergence kinds need a real-ket family");
      const double d = classical_divergence(real_ket_probs(fam, x), real_ket_probs(fam, x_primed));
      return kind == GenFunKind::Divergence ? d : checked_log(d);
    }
  }
  throw Error(Errc::UnsupportedKind, "unhandled kind");
}

}  // namespace qgeom
