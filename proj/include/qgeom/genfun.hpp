#pragma once

#include <complex>
#include <string>

#include "qgeom/states.hpp"

namespace qgeom {

/// Two-point scalar generating functions. The second argument of
/// genfun_eval is the primed point x'.
enum class GenFunKind {
  Fidelity,
  LogFidelity,
  OverlapModulus,
  OverlapLogModulus,
  OverlapPhase,
  OverlapNeg2Im,
  Divergence,
  LogDivergence,
};

GenFunKind genfun_kind_from_string(const std::string& s);
const char* to_string(GenFunKind k);

/// Overlap C = <psi'|psi> = |C| e^{i phi}, phi in (-pi, pi].
struct OverlapValue {
  std::complex<double> c;
  double modulus;
  double phase;
};

/// Closed-form overlap data for two lower eigenstates of n.sigma:
///   modulus   = sqrt((1 + n'.n)/2)
///   neg2phase = -2 atan2(n1' n2 - n2' n1, 1 - n3 - n3' + n'.n)
///   neg2im    = (n2' n1 - n1' n2) / (sqrt(1-n3') sqrt(1-n3))
struct DiracOverlap {
  double modulus;
  double neg2phase;
  double neg2im;
};

/// Uhlmann fidelity Tr sqrt(sqrt(rho) rho' sqrt(rho)), via two spectral
/// square roots. Symmetric in its arguments; 1 at coincidence; clamped to
/// [0, 1] (overshoot beyond 1 + 1e-9 is DomainError, not a clamp).
double uhlmann_fidelity(const DensityMatrix& rho, const DensityMatrix& rho_primed);

/// Two-level closed form
///   [ (1 + r.r')/2 + sqrt(1-|r|^2) sqrt(1-|r'|^2) / 2 ]^(1/2).
double fidelity_2x2_closed(const BlochVector& r, const BlochVector& r_primed);

/// <psi'|psi> for normalized kets (NotNormalized beyond 1e-10).
OverlapValue pure_overlap(const Eigen::VectorXcd& psi_primed, const Eigen::VectorXcd& psi);

/// Closed-form overlap for unit vectors n, n'. The phase and imaginary
/// branches are gauge-singular at the north pole: n3 or n3' >= 1 - 1e-12
/// raises GaugePole.
DiracOverlap dirac_overlap_closed(const Eigen::Vector3d& n, const Eigen::Vector3d& n_primed);

/// Classical fidelity sum_i sqrt(p_i p'_i) between probability mass
/// functions (the divergence of information geometry). Value in [0, 1],
/// 1 iff p = p' for strictly positive vectors.
double classical_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& p_primed);

/// Evaluates the requested generating function on a family, dispatching to
/// the most accurate available oracle (closed form for two-level Bloch
/// families, spectral otherwise). Log kinds return the natural log of the
/// non-log kind; log of zero is DomainError. Kinds a family cannot support
/// raise UnsupportedKind.
double genfun_eval(const StateFamily& fam, const ParamPoint& x, const ParamPoint& x_primed,
                   GenFunKind kind);

}  // namespace qgeom
