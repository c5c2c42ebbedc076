#pragma once

#include <Eigen/Dense>

#include "qgeom/error.hpp"

namespace qgeom {

using ComplexMatrix = Eigen::MatrixXcd;

/// Spectral decomposition of a Hermitian matrix. Eigenvalues ascending,
/// eigenvector columns orthonormal:
///   || V diag(w) V^dag - H ||_F <= 1e-12 * max(1, ||H||_F)
///   || V^dag V - I ||_F       <= 1e-12
struct HermitianEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
};

struct DensityTolerances {
  double hermitian = 1e-12;  // scaled Frobenius asymmetry
  double trace = 1e-12;
  double eig_floor = 1e-10;  // smallest eigenvalue >= -eig_floor
};

/// A validated density matrix: Hermitian, unit trace, positive semidefinite
/// within DensityTolerances. Construct through validate_density().
class DensityMatrix {
 public:
  const ComplexMatrix& matrix() const { return mat_; }
  Eigen::Index dim() const { return mat_.rows(); }

  friend DensityMatrix validate_density(const ComplexMatrix& m, const DensityTolerances& tol);

 private:
  explicit DensityMatrix(ComplexMatrix m) : mat_(std::move(m)) {}
  ComplexMatrix mat_;
};

/// Hermitian eigendecomposition. The input is symmetrized as (H + H^dag)/2
/// before solving; asymmetry beyond herm_tol (scaled) is NonHermitianInput.
HermitianEigen eig_hermitian(const ComplexMatrix& h, double herm_tol = 1e-10);

/// Spectral square root of a PSD Hermitian matrix: V diag(sqrt(max(w,0))) V^dag.
/// Eigenvalues below -clamp_tol raise NotPositiveSemidefinite; small negative
/// eigenvalues from roundoff are clamped to zero.
ComplexMatrix sqrt_psd(const ComplexMatrix& m, double clamp_tol = 1e-10);

/// Closed-form square root of a 2x2 matrix:
///   s = sqrt(det M), t = sqrt(tr M + 2s), sqrt(M) = (M + s I) / t,
/// with the principal (positive) branch for both roots. |t| <= t_min raises
/// DegenerateBranch; callers fall back to sqrt_psd there.
ComplexMatrix sqrt_2x2(const ComplexMatrix& m, double t_min = 1e-12);

/// Checks the density-matrix invariants and returns the validated value.
/// Violations raise NotHermitian, TraceNotOne or NegativeEigenvalue.
DensityMatrix validate_density(const ComplexMatrix& m, const DensityTolerances& tol = {});

}  // namespace qgeom
