#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "qgeom/states.hpp"

namespace qgeom {

/// Rank-3 tensor indexed (lambda, mu, nu), dense row-major storage.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(int dim) : dim_(dim), v_(static_cast<size_t>(dim) * dim * dim, 0.0) {}

  int dim() const { return dim_; }
  double& operator()(int a, int b, int c) { return v_[idx(a, b, c)]; }
  double operator()(int a, int b, int c) const { return v_[idx(a, b, c)]; }

  double max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }

  Tensor3 scaled(double f) const {
    Tensor3 t = *this;
    for (double& x : t.v_) x *= f;
    return t;
  }

 private:
  size_t idx(int a, int b, int c) const {
    return (static_cast<size_t>(a) * dim_ + b) * dim_ + c;
  }
  int dim_ = 0;
  std::vector<double> v_;
};

enum class GeomMethod { Direct, GenFun, ClosedForm };
const char* to_string(GeomMethod m);

/// Geometric tensors at one parameter point. qfim is D x D symmetric PSD;
/// metric = qfim/4 exactly. berry/qgt are present only for pure families.
/// christoffel is stored in the QFIM convention
///   Gamma_lmn = (d_n F_lm + d_m F_ln - d_l F_mn) / 2,
/// symmetric in its last two indices; scale by 1/4 for the metric
/// convention (Tensor3::scaled).
struct GeometryReport {
  ParamPoint at;
  Eigen::MatrixXd qfim;
  Eigen::MatrixXd metric;
  std::optional<Eigen::MatrixXd> berry;
  std::optional<Eigen::MatrixXcd> qgt;
  std::optional<Tensor3> christoffel;
  GeomMethod method = GeomMethod::Direct;
  int sld_truncations = 0;
};

/// Symmetric logarithmic derivative for one parameter direction, in the
/// computational basis. `truncated` counts matrix elements dropped by the
/// support convention (eigenvalue pairs with lambda_i + lambda_j <= rank_tol).
struct SLDMatrix {
  Eigen::MatrixXcd L;
  int truncated = 0;
};

/// Finite-difference steps for model-function derivatives.
struct DiffSteps {
  double first = 1e-6;
  double second = 1e-4;
};

/// SLD from the eigenbasis of rho(x): <i|L|j> = 2 <i|d_mu rho|j> / (l_i + l_j)
/// on the support, 0 elsewhere; d_mu rho by central difference with step h.
SLDMatrix sld(const StateFamily& fam, const ParamPoint& x, int mu, double h = 1e-5,
              double rank_tol = 1e-10);

/// QFIM from the SLD anticommutator F_mn = Tr rho {L_m, L_n} / 2.
GeometryReport qfim_sld(const StateFamily& fam, const ParamPoint& x, double h = 1e-5,
                        double rank_tol = 1e-10);

/// Two-level closed form F_mn = d_m r . d_n r + (r.d_m r)(r.d_n r)/(1-|r|^2).
/// At |r| >= 1 - purity_tol the second term is dropped after checking
/// |r . d_mu r| <= 1e-6 (PuritySingularity otherwise).
GeometryReport qfim_bloch(const StateFamily& fam, const ParamPoint& x, double h = 1e-6,
                          double purity_tol = 1e-8);

/// Two-level closed-form Christoffel tensor (QFIM convention):
///   G_lmn = d_l r . d_m d_n r
///         + (r.d_l r) [d_m r . d_n r + r . d_m d_n r] / (1-|r|^2)
///         + (r.d_l r)(r.d_m r)(r.d_n r) / (1-|r|^2)^2.
Tensor3 christoffel_bloch(const StateFamily& fam, const ParamPoint& x, DiffSteps steps = {},
                          double purity_tol = 1e-8);

/// Gauge-invariant quantum geometric tensor from the pure-state projector
/// P(x) = rho(x): T_mn = Tr[(d_m P)(I - P)(d_n P)]. metric is the
/// symmetrized real part, berry = -2 x antisymmetrized imaginary part.
GeometryReport qgt_pure(const StateFamily& fam, const ParamPoint& x, double h = 1e-5,
                        double purity_tol = 1e-8);

/// Unit-vector closed forms for pure two-level Hamiltonian families:
///   g = dn.dn/4, Omega = n.(dn x dn)/2, Gamma(metric conv.) = dn.ddn/4,
/// with n = d/|d| differentiated by central differences.
GeometryReport dirac_geometry_closed(const StateFamily& fam, const ParamPoint& x,
                                     DiffSteps steps = {});

/// Classical Fisher information I_mn = 4 sum_i d_m |psi_i| d_n |psi_i| for
/// real-ket families, reported in the qfim slot (I = 4g). Components with
/// magnitude below 1e-8 at any stencil point raise SignFlipAtStencil.
GeometryReport classical_fim(const StateFamily& fam, const ParamPoint& x, double h = 1e-6);

/// Christoffel symbols of the first kind by finite differences of a QFIM
/// provider, step h.
Tensor3 christoffel_from_metric(const std::function<Eigen::MatrixXd(const ParamPoint&)>& qfim_fn,
                                const ParamPoint& x, int param_dim, double h = 1e-3);

/// Same, differentiating the family's most accurate direct QFIM route.
Tensor3 christoffel_from_metric(const StateFamily& fam, const ParamPoint& x, double h = 1e-3);

}  // namespace qgeom
