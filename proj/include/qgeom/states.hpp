#pragma once

#include <functional>
#include <initializer_list>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "qgeom/matcore.hpp"

namespace qgeom {

/// A point in the D-dimensional real parameter manifold.
using ParamPoint = Eigen::VectorXd;

inline ParamPoint param_point(std::initializer_list<double> coords) {
  ParamPoint p(static_cast<Eigen::Index>(coords.size()));
  Eigen::Index i = 0;
  for (double c : coords) p[i++] = c;
  return p;
}

/// Bloch vector r of a 2x2 density matrix rho = (sigma_0 + r.sigma)/2,
/// constrained to |r| <= 1.
using BlochVector = Eigen::Vector3d;

/// Coefficient vector d of a two-level Hamiltonian H = d.sigma.
struct DVector {
  Eigen::Vector3d d;

  double magnitude() const { return d.norm(); }

  /// Unit direction n = d/|d|. Throws GapClosure when |d| <= d_min.
  Eigen::Vector3d unit(double d_min = 1e-12) const;
};

/// A parametrized family of density matrices. rho() is always available;
/// the remaining evaluators are optional fast paths:
///   ket    pure families, |psi(x)><psi(x)| = rho(x)
///   bloch  two-level families, rho = (sigma_0 + r.sigma)/2
///   dvec   two-level Hamiltonian families, H = d(x).sigma
/// Evaluators are pure functions and safe to share across threads.
struct StateFamily {
  int hilbert_dim = 2;
  int param_dim = 1;
  std::function<ComplexMatrix(const ParamPoint&)> rho;
  std::function<Eigen::VectorXcd(const ParamPoint&)> ket;
  std::function<BlochVector(const ParamPoint&)> bloch;
  std::function<DVector(const ParamPoint&)> dvec;
  bool pure = false;           // rho(x) is rank one for all x
  bool analytic_gauge = false; // ket gauge is a smooth closed-form choice
  bool real_ket = false;       // ket components are real for all x

  bool has_ket() const { return static_cast<bool>(ket); }
  bool has_bloch() const { return static_cast<bool>(bloch); }
  bool has_dvec() const { return static_cast<bool>(dvec); }
};

// ---------------------------------------------------------------------------
// Two-level building blocks
// ---------------------------------------------------------------------------

/// rho = (sigma_0 + r.sigma)/2. |r| beyond 1 + 1e-9 raises BlochOutOfBall;
/// overshoot within that margin is clamped onto the unit sphere.
DensityMatrix rho_from_bloch(const BlochVector& r);

/// Inverse map r_i = Tr(rho sigma_i). WrongDimension unless 2x2.
BlochVector bloch_from_rho(const DensityMatrix& rho);

/// Canonical-ensemble Bloch vector for H = d.sigma at inverse temperature
/// beta: r = -(d/|d|) tanh(beta |d|). |d| <= d_min raises GapClosure.
BlochVector canonical_bloch(const DVector& d, double beta, double d_min = 1e-12);

/// SSH model d-vector at momentum k (hopping unit t = 1):
///   d1 = (1+dt) + (1-dt) cos k,  d2 = (1-dt) sin k,  d3 = 0.
DVector ssh_dvector(double k, double delta_t);

/// Lower eigenstate of H = d.sigma in the gauge
///   psi = (n3 - 1, n1 + i n2) / sqrt(2 (1 - n3)),  n = d/|d|.
/// The representation is singular at the north pole: n3 >= 1 - 1e-12 raises
/// GaugePole.
Eigen::VectorXcd dirac_ground_ket(const DVector& d);

/// Thermal spin-1/2 Bloch vector r = (0, 0, tanh b), b = mu_B B / k_B T.
BlochVector spin_bloch(double b);

/// Per-point phase convention for numerically produced kets: the
/// largest-magnitude component is made real positive.
Eigen::VectorXcd fix_ket_phase(const Eigen::VectorXcd& psi);

// ---------------------------------------------------------------------------
// Family constructors
// ---------------------------------------------------------------------------

StateFamily family_from_bloch(int param_dim, std::function<BlochVector(const ParamPoint&)> fn);

StateFamily family_from_ket(int param_dim, int hilbert_dim,
                            std::function<Eigen::VectorXcd(const ParamPoint&)> fn,
                            bool analytic_gauge, bool real_ket);

/// Two-level Hamiltonian family. temperature > 0 gives the canonical
/// ensemble; temperature == 0 gives the pure ground-state family with the
/// analytic ket gauge.
StateFamily family_from_dvec(int param_dim, std::function<DVector(const ParamPoint&)> fn,
                             double temperature);

// ---------------------------------------------------------------------------
// Model configuration (JSON ingestion; field names are the CLI contract)
// ---------------------------------------------------------------------------

struct SpinModel {};

struct SshModel {
  double delta_t = 0.2;
  double temperature = 0.0;
};

struct Dirac2dModel {
  double mass = 1.0;
};

/// One multiplicative factor of a custom-family term, acting on coordinate
/// `param`: poly -> (scale*x + shift)^degree, otherwise fn(scale*x + shift)
/// with fn in {sin, cos, tanh}.
struct CustomFactor {
  enum class Kind { Poly, Sin, Cos, Tanh };
  int param = 0;
  Kind kind = Kind::Poly;
  int degree = 1;  // poly only
  double scale = 1.0;
  double shift = 0.0;
};

struct CustomTerm {
  double coef = 0.0;
  std::vector<CustomFactor> factors;
};

/// Custom family from coefficient tables. target selects what the component
/// tables define:
///   "bloch"    3 tables for r(x)
///   "dvec"     3 tables for d(x), combined with `temperature`
///   "real_ket" n >= 2 tables for a real wave function (normalized at
///              evaluation)
struct CustomModel {
  enum class Target { Bloch, Dvec, RealKet };
  int param_dim = 1;
  Target target = Target::Bloch;
  double temperature = 0.0;  // dvec target only
  std::vector<std::vector<CustomTerm>> components;
};

struct ModelConfig {
  std::variant<SpinModel, SshModel, Dirac2dModel, CustomModel> model;

  static ModelConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  /// Model id string: spin | ssh | dirac2d | custom.
  std::string id() const;
  int param_dim() const;
  /// Coordinate names used in scan output ("b"; "k"; "kx","ky"; "x0",...).
  std::vector<std::string> coord_names() const;
};

/// Builds the family a validated config describes, exposing every fast path
/// the model supports. ConfigInvalid carries field-level diagnostics.
StateFamily build_family(const ModelConfig& cfg);

}  // namespace qgeom
