#include "qgeom/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace qgeom {

HermitianEigen eig_hermitian(const ComplexMatrix& h, double herm_tol) {
  if (h.rows() != h.cols())
    throw Error(Errc::WrongDimension, "eig_hermitian expects a square matrix");
  const double scale = std::max(1.0, h.norm());
  if ((h - h.adjoint()).norm() > herm_tol * scale)
    throw Error(Errc::NonHermitianInput, "asymmetry exceeds tolerance");

  const ComplexMatrix hs = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hs);
  if (solver.info() != Eigen::Success)
    throw Error(Errc::ConvergenceFailure, "SelfAdjointEigenSolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

ComplexMatrix sqrt_psd(const ComplexMatrix& m, double clamp_tol) {
  const HermitianEigen eg = eig_hermitian(m);
  if (eg.values.minCoeff() < -clamp_tol)
    throw Error(Errc::NotPositiveSemidefinite,
                "smallest eigenvalue " + std::to_string(eg.values.minCoeff()));
  Eigen::VectorXd roots = eg.values.cwiseMax(0.0).cwiseSqrt();
  ComplexMatrix r = eg.vectors * roots.asDiagonal() * eg.vectors.adjoint();
  return 0.5 * (r + r.adjoint().eval());
}

ComplexMatrix sqrt_2x2(const ComplexMatrix& m, double t_min) {
  if (m.rows() != 2 || m.cols() != 2)
    throw Error(Errc::WrongDimension, "sqrt_2x2 expects a 2x2 matrix");
  const std::complex<double> det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const std::complex<double> s = std::sqrt(det);
  const std::complex<double> t = std::sqrt(m(0, 0) + m(1, 1) + 2.0 * s);
  if (std::abs(t) <= t_min)
    throw Error(Errc::DegenerateBranch, "|t| below t_min; use sqrt_psd");
  ComplexMatrix r = m;
  r(0, 0) += s;
  r(1, 1) += s;
  return r / t;
}

DensityMatrix validate_density(const ComplexMatrix& m, const DensityTolerances& tol) {
  if (m.rows() != m.cols())
    throw Error(Errc::WrongDimension, "density matrix must be square");
  const double scale = std::max(1.0, m.norm());
  if ((m - m.adjoint()).norm() > tol.hermitian * scale)
    throw Error(Errc::NotHermitian, "density matrix asymmetry exceeds tolerance");
  const double tr = m.trace().real();
  if (std::abs(tr - 1.0) > tol.trace || std::abs(m.trace().imag()) > tol.trace)
    throw Error(Errc::TraceNotOne, "trace is " + std::to_string(tr));
  const HermitianEigen eg = eig_hermitian(0.5 * (m + m.adjoint()));
  if (eg.values.minCoeff() < -tol.eig_floor)
    throw Error(Errc::NegativeEigenvalue,
                "smallest eigenvalue " + std::to_string(eg.values.minCoeff()));
  return DensityMatrix(m);
}

}  // namespace qgeom
