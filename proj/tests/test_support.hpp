#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "qgeom/states.hpp"

namespace qgeom::testing {

// Smooth random Bloch family r_i(x) = A_i sin(w_i . x + phi_i) with
// sum A_i^2 <= 0.81, so |r| <= 0.9 everywhere and all derivatives exist.
struct RandomBlochFamily {
  int param_dim;
  Eigen::Matrix<double, 3, Eigen::Dynamic> w;
  Eigen::Vector3d phi;
  Eigen::Vector3d amp;

  BlochVector operator()(const ParamPoint& x) const {
    BlochVector r;
    for (int i = 0; i < 3; ++i) r[i] = amp[i] * std::sin(w.row(i).dot(x) + phi[i]);
    return r;
  }
};

inline RandomBlochFamily random_bloch_spec(std::mt19937& rng, int param_dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.3, 1.0);
  RandomBlochFamily f;
  f.param_dim = param_dim;
  f.w.resize(3, param_dim);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < param_dim; ++j) f.w(i, j) = gauss(rng);
    f.phi[i] = gauss(rng);
    f.amp[i] = unif(rng);
  }
  f.amp *= 0.85 / f.amp.norm();  // |r| <= 0.85 < 0.9
  return f;
}

inline StateFamily random_bloch_family(std::mt19937& rng, int param_dim) {
  const RandomBlochFamily f = random_bloch_spec(rng, param_dim);
  return family_from_bloch(param_dim, f);
}

inline ParamPoint random_point(std::mt19937& rng, int param_dim, double lo = -1.0,
                               double hi = 1.0) {
  std::uniform_real_distribution<double> unif(lo, hi);
  ParamPoint x(param_dim);
  for (int i = 0; i < param_dim; ++i) x[i] = unif(rng);
  return x;
}

// Multiplies the ket gauge by exp(i alpha(x)); used to probe gauge
// cancellation in the two-slot stencils.
inline StateFamily with_gauge_twist(const StateFamily& fam, double amplitude = 3.0,
                                    double frequency = 2.0) {
  StateFamily out = fam;
  auto base = fam.ket;
  out.ket = [base, amplitude, frequency](const ParamPoint& x) {
    const std::complex<double> phase(0.0, amplitude * std::sin(frequency * x[0]));
    return Eigen::VectorXcd(std::exp(phase) * base(x));
  };
  out.analytic_gauge = false;  // the twist is not the family's closed-form gauge
  return out;
}

inline StateFamily spin_family() {
  ModelConfig cfg;
  cfg.model = SpinModel{};
  return build_family(cfg);
}

inline StateFamily ssh_family(double delta_t, double temperature) {
  ModelConfig cfg;
  cfg.model = SshModel{delta_t, temperature};
  return build_family(cfg);
}

inline StateFamily dirac2d_family(double mass) {
  ModelConfig cfg;
  cfg.model = Dirac2dModel{mass};
  return build_family(cfg);
}

// psi(x) = (cos x, sin x): the real-wave-function testbed with I = 4g = 4.
inline StateFamily cos_sin_family() {
  return family_from_ket(
      1, 2,
      [](const ParamPoint& x) {
        Eigen::VectorXcd psi(2);
        psi[0] = std::cos(x[0]);
        psi[1] = std::sin(x[0]);
        return psi;
      },
      /*analytic_gauge=*/true, /*real_ket=*/true);
}

inline StateFamily constant_bloch_family(const BlochVector& r) {
  return family_from_bloch(1, [r](const ParamPoint&) { return r; });
}

}  // namespace qgeom::testing
