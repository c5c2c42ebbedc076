#include "qgeom/states.hpp"

#include <cmath>
#include <complex>
#include <utility>

namespace qgeom {

namespace {

using Cplx = std::complex<double>;

ComplexMatrix pauli(int i) {
  ComplexMatrix s(2, 2);
  switch (i) {
    case 0: s << 1, 0, 0, 1; break;
    case 1: s << 0, 1, 1, 0; break;
    case 2: s << 0, Cplx(0, -1), Cplx(0, 1), 0; break;
    default: s << 1, 0, 0, -1; break;
  }
  return s;
}

ComplexMatrix bloch_matrix(const BlochVector& r) {
  ComplexMatrix m(2, 2);
  m(0, 0) = 0.5 * (1.0 + r[2]);
  m(1, 1) = 0.5 * (1.0 - r[2]);
  m(0, 1) = 0.5 * Cplx(r[0], -r[1]);
  m(1, 0) = 0.5 * Cplx(r[0], r[1]);
  return m;
}

}  // namespace

Eigen::Vector3d DVector::unit(double d_min) const {
  const double mag = d.norm();
  if (mag <= d_min)
    throw Error(Errc::GapClosure, "|d| = " + std::to_string(mag));
  return d / mag;
}

DensityMatrix rho_from_bloch(const BlochVector& r) {
  const double mag = r.norm();
  if (mag > 1.0 + 1e-9)
    throw Error(Errc::BlochOutOfBall, "|r| = " + std::to_string(mag));
  BlochVector rc = (mag > 1.0) ? BlochVector(r / mag) : r;
  return validate_density(bloch_matrix(rc));
}

BlochVector bloch_from_rho(const DensityMatrix& rho) {
  if (rho.dim() != 2)
    throw Error(Errc::WrongDimension, "bloch_from_rho expects a 2x2 density matrix");
  BlochVector r;
  for (int i = 0; i < 3; ++i)
    r[i] = (rho.matrix() * pauli(i + 1)).trace().real();
  return r;
}

BlochVector canonical_bloch(const DVector& d, double beta, double d_min) {
  if (beta <= 0.0)
    throw Error(Errc::DomainError, "canonical_bloch requires beta > 0");
  const Eigen::Vector3d n = d.unit(d_min);
  return -n * std::tanh(beta * d.magnitude());
}

DVector ssh_dvector(double k, double delta_t) {
  DVector d{Eigen::Vector3d((1.0 + delta_t) + (1.0 - delta_t) * std::cos(k),
                            (1.0 - delta_t) * std::sin(k), 0.0)};
  if (d.magnitude() < 1e-12)
    throw Error(Errc::GapClosure, "SSH gap closes at this (k, delta_t)");
  return d;
}

Eigen::VectorXcd dirac_ground_ket(const DVector& d) {
  const Eigen::Vector3d n = d.unit();
  if (n[2] >= 1.0 - 1e-12)
    throw Error(Errc::GaugePole, "ket gauge singular at n3 = " + std::to_string(n[2]));
  Eigen::VectorXcd psi(2);
  const double norm = std::sqrt(2.0 * (1.0 - n[2]));
  psi[0] = Cplx(n[2] - 1.0, 0.0) / norm;
  psi[1] = Cplx(n[0], n[1]) / norm;
  // near the pole the 1 - n3 cancellation costs a few ulps of norm
  psi /= psi.norm();
  return psi;
}

BlochVector spin_bloch(double b) { return BlochVector(0.0, 0.0, std::tanh(b)); }

Eigen::VectorXcd fix_ket_phase(const Eigen::VectorXcd& psi) {
  Eigen::Index imax = 0;
  psi.cwiseAbs().maxCoeff(&imax);
  const Cplx a = psi[imax];
  if (std::abs(a) == 0.0) return psi;
  return psi * (std::conj(a) / std::abs(a));
}

// ---------------------------------------------------------------------------
// Family constructors
// ---------------------------------------------------------------------------

StateFamily family_from_bloch(int param_dim, std::function<BlochVector(const ParamPoint&)> fn) {
  StateFamily fam;
  fam.hilbert_dim = 2;
  fam.param_dim = param_dim;
  fam.bloch = fn;
  fam.rho = [fn](const ParamPoint& x) { return rho_from_bloch(fn(x)).matrix(); };
  return fam;
}

StateFamily family_from_ket(int param_dim, int hilbert_dim,
                            std::function<Eigen::VectorXcd(const ParamPoint&)> fn,
                            bool analytic_gauge, bool real_ket) {
  StateFamily fam;
  fam.hilbert_dim = hilbert_dim;
  fam.param_dim = param_dim;
  fam.ket = fn;
  fam.rho = [fn](const ParamPoint& x) {
    const Eigen::VectorXcd psi = fn(x);
    return ComplexMatrix(psi * psi.adjoint());
  };
  if (hilbert_dim == 2) {
    fam.bloch = [fn](const ParamPoint& x) {
      const Eigen::VectorXcd psi = fn(x);
      return BlochVector(2.0 * (std::conj(psi[0]) * psi[1]).real(),
                         2.0 * (std::conj(psi[0]) * psi[1]).imag(),
                         std::norm(psi[0]) - std::norm(psi[1]));
    };
  }
  fam.pure = true;
  fam.analytic_gauge = analytic_gauge;
  fam.real_ket = real_ket;
  return fam;
}

StateFamily family_from_dvec(int param_dim, std::function<DVector(const ParamPoint&)> fn,
                             double temperature) {
  StateFamily fam;
  fam.hilbert_dim = 2;
  fam.param_dim = param_dim;
  fam.dvec = fn;
  if (temperature > 0.0) {
    const double beta = 1.0 / temperature;
    fam.bloch = [fn, beta](const ParamPoint& x) { return canonical_bloch(fn(x), beta); };
  } else {
    // Ground-state projector: r = -n, smooth everywhere off the gap closure.
    fam.bloch = [fn](const ParamPoint& x) { return BlochVector(-fn(x).unit()); };
    fam.ket = [fn](const ParamPoint& x) { return dirac_ground_ket(fn(x)); };
    fam.pure = true;
    fam.analytic_gauge = true;
  }
  auto bl = fam.bloch;
  fam.rho = [bl](const ParamPoint& x) { return rho_from_bloch(bl(x)).matrix(); };
  return fam;
}

// ---------------------------------------------------------------------------
// Custom coefficient tables
// ---------------------------------------------------------------------------

namespace {

double eval_factor(const CustomFactor& f, const ParamPoint& x) {
  const double arg = f.scale * x[f.param] + f.shift;
  switch (f.kind) {
    case CustomFactor::Kind::Poly: return std::pow(arg, f.degree);
    case CustomFactor::Kind::Sin: return std::sin(arg);
    case CustomFactor::Kind::Cos: return std::cos(arg);
    case CustomFactor::Kind::Tanh: return std::tanh(arg);
  }
  return 0.0;
}

double eval_table(const std::vector<CustomTerm>& terms, const ParamPoint& x) {
  double v = 0.0;
  for (const CustomTerm& t : terms) {
    double w = t.coef;
    for (const CustomFactor& f : t.factors) w *= eval_factor(f, x);
    v += w;
  }
  return v;
}

CustomFactor::Kind factor_kind_from_string(const std::string& s) {
  if (s == "poly") return CustomFactor::Kind::Poly;
  if (s == "sin") return CustomFactor::Kind::Sin;
  if (s == "cos") return CustomFactor::Kind::Cos;
  if (s == "tanh") return CustomFactor::Kind::Tanh;
  throw Error(Errc::ConfigInvalid, "factor kind must be poly|sin|cos|tanh, got '" + s + "'");
}

const char* factor_kind_name(CustomFactor::Kind k) {
  switch (k) {
    case CustomFactor::Kind::Poly: return "poly";
    case CustomFactor::Kind::Sin: return "sin";
    case CustomFactor::Kind::Cos: return "cos";
    case CustomFactor::Kind::Tanh: return "tanh";
  }
  return "?";
}

double require_number(const nlohmann::json& j, const std::string& field) {
  if (!j.contains(field) || !j[field].is_number())
    throw Error(Errc::ConfigInvalid, "missing or non-numeric field '" + field + "'");
  return j[field].get<double>();
}

std::vector<std::vector<CustomTerm>> parse_components(const nlohmann::json& j, int param_dim) {
  if (!j.contains("components") || !j["components"].is_array())
    throw Error(Errc::ConfigInvalid, "custom model needs a 'components' array");
  std::vector<std::vector<CustomTerm>> comps;
  for (const auto& comp : j["components"]) {
    std::vector<CustomTerm> terms;
    for (const auto& jt : comp) {
      CustomTerm t;
      t.coef = require_number(jt, "coef");
      if (jt.contains("factors")) {
        for (const auto& jf : jt["factors"]) {
          CustomFactor f;
          if (!jf.contains("param") || !jf["param"].is_number_integer())
            throw Error(Errc::ConfigInvalid, "factor needs integer field 'param'");
          f.param = jf["param"].get<int>();
          if (f.param < 0 || f.param >= param_dim)
            throw Error(Errc::ConfigInvalid,
                        "factor param " + std::to_string(f.param) + " out of range for param_dim " +
                            std::to_string(param_dim));
          f.kind = factor_kind_from_string(jf.value("kind", std::string("poly")));
          f.degree = jf.value("degree", 1);
          if (f.degree < 0) throw Error(Errc::ConfigInvalid, "factor degree must be >= 0");
          f.scale = jf.value("scale", 1.0);
          f.shift = jf.value("shift", 0.0);
          t.factors.push_back(f);
        }
      }
      terms.push_back(std::move(t));
    }
    comps.push_back(std::move(terms));
  }
  return comps;
}

nlohmann::json components_to_json(const std::vector<std::vector<CustomTerm>>& comps) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& comp : comps) {
    nlohmann::json jc = nlohmann::json::array();
    for (const auto& t : comp) {
      nlohmann::json jt;
      jt["coef"] = t.coef;
      jt["factors"] = nlohmann::json::array();
      for (const auto& f : t.factors) {
        jt["factors"].push_back({{"param", f.param},
                                 {"kind", factor_kind_name(f.kind)},
                                 {"degree", f.degree},
                                 {"scale", f.scale},
                                 {"shift", f.shift}});
      }
      jc.push_back(jt);
    }
    out.push_back(jc);
  }
  return out;
}

}  // namespace

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("model") || !j["model"].is_string())
    throw Error(Errc::ConfigInvalid, "config needs a string field 'model'");
  const std::string id = j["model"].get<std::string>();
  ModelConfig cfg;
  if (id == "spin") {
    cfg.model = SpinModel{};
  } else if (id == "ssh") {
    SshModel m;
    m.delta_t = require_number(j, "delta_t");
    m.temperature = require_number(j, "temperature");
    if (std::abs(std::abs(m.delta_t) - 1.0) < 1e-12)
      throw Error(Errc::ConfigInvalid, "ssh delta_t must differ from +-1 (gap closure at k = pi)");
    if (m.temperature < 0.0)
      throw Error(Errc::ConfigInvalid, "ssh temperature must be >= 0");
    cfg.model = m;
  } else if (id == "dirac2d") {
    Dirac2dModel m;
    m.mass = require_number(j, "mass");
    cfg.model = m;
  } else if (id == "custom") {
    CustomModel m;
    if (!j.contains("param_dim") || !j["param_dim"].is_number_integer())
      throw Error(Errc::ConfigInvalid, "custom model needs integer field 'param_dim'");
    m.param_dim = j["param_dim"].get<int>();
    if (m.param_dim < 1) throw Error(Errc::ConfigInvalid, "param_dim must be >= 1");
    const std::string target = j.value("target", std::string("bloch"));
    if (target == "bloch") m.target = CustomModel::Target::Bloch;
    else if (target == "dvec") m.target = CustomModel::Target::Dvec;
    else if (target == "real_ket") m.target = CustomModel::Target::RealKet;
    else throw Error(Errc::ConfigInvalid, "target must be bloch|dvec|real_ket, got '" + target + "'");
    m.temperature = j.value("temperature", 0.0);
    if (m.temperature < 0.0) throw Error(Errc::ConfigInvalid, "temperature must be >= 0");
    m.components = parse_components(j, m.param_dim);
    const size_t n = m.components.size();
    if (m.target == CustomModel::Target::RealKet) {
      if (n < 2) throw Error(Errc::ConfigInvalid, "real_ket target needs >= 2 component tables");
    } else if (n != 3) {
      throw Error(Errc::ConfigInvalid, "bloch/dvec targets need exactly 3 component tables");
    }
    cfg.model = m;
  } else {
    throw Error(Errc::ConfigInvalid, "unknown model '" + id + "'");
  }
  return cfg;
}

nlohmann::json ModelConfig::to_json() const {
  nlohmann::json j;
  if (std::holds_alternative<SpinModel>(model)) {
    j["model"] = "spin";
  } else if (const auto* m = std::get_if<SshModel>(&model)) {
    j["model"] = "ssh";
    j["delta_t"] = m->delta_t;
    j["temperature"] = m->temperature;
  } else if (const auto* m = std::get_if<Dirac2dModel>(&model)) {
    j["model"] = "dirac2d";
    j["mass"] = m->mass;
  } else if (const auto* m = std::get_if<CustomModel>(&model)) {
    j["model"] = "custom";
    j["param_dim"] = m->param_dim;
    switch (m->target) {
      case CustomModel::Target::Bloch: j["target"] = "bloch"; break;
      case CustomModel::Target::Dvec: j["target"] = "dvec"; break;
      case CustomModel::Target::RealKet: j["target"] = "real_ket"; break;
    }
    j["temperature"] = m->temperature;
    j["components"] = components_to_json(m->components);
  }
  return j;
}

std::string ModelConfig::id() const {
  if (std::holds_alternative<SpinModel>(model)) return "spin";
  if (std::holds_alternative<SshModel>(model)) return "ssh";
  if (std::holds_alternative<Dirac2dModel>(model)) return "dirac2d";
  return "custom";
}

int ModelConfig::param_dim() const {
  if (const auto* m = std::get_if<CustomModel>(&model)) return m->param_dim;
  if (std::holds_alternative<Dirac2dModel>(model)) return 2;
  return 1;
}

std::vector<std::string> ModelConfig::coord_names() const {
  if (std::holds_alternative<SpinModel>(model)) return {"b"};
  if (std::holds_alternative<SshModel>(model)) return {"k"};
  if (std::holds_alternative<Dirac2dModel>(model)) return {"kx", "ky"};
  std::vector<std::string> names;
  for (int i = 0; i < param_dim(); ++i) names.push_back("x" + std::to_string(i));
  return names;
}

StateFamily build_family(const ModelConfig& cfg) {
  if (std::holds_alternative<SpinModel>(cfg.model)) {
    StateFamily fam = family_from_bloch(1, [](const ParamPoint& x) { return spin_bloch(x[0]); });
    fam.dvec = [](const ParamPoint& x) { return DVector{Eigen::Vector3d(0.0, 0.0, -x[0])}; };
    return fam;
  }
  if (const auto* m = std::get_if<SshModel>(&cfg.model)) {
    const double dt = m->delta_t;
    StateFamily fam = family_from_dvec(
        1, [dt](const ParamPoint& x) { return ssh_dvector(x[0], dt); }, m->temperature);
    return fam;
  }
  if (const auto* m = std::get_if<Dirac2dModel>(&cfg.model)) {
    const double mass = m->mass;
    return family_from_dvec(
        2, [mass](const ParamPoint& x) { return DVector{Eigen::Vector3d(x[0], x[1], mass)}; },
        0.0);
  }
  const auto& m = std::get<CustomModel>(cfg.model);
  auto tables = m.components;  // copy into the evaluators
  if (m.target == CustomModel::Target::Bloch) {
    return family_from_bloch(m.param_dim, [tables](const ParamPoint& x) {
      return BlochVector(eval_table(tables[0], x), eval_table(tables[1], x),
                         eval_table(tables[2], x));
    });
  }
  if (m.target == CustomModel::Target::Dvec) {
    return family_from_dvec(
        m.param_dim,
        [tables](const ParamPoint& x) {
          return DVector{Eigen::Vector3d(eval_table(tables[0], x), eval_table(tables[1], x),
                                         eval_table(tables[2], x))};
        },
        m.temperature);
  }
  const int n = static_cast<int>(tables.size());
  return family_from_ket(
      m.param_dim, n,
      [tables, n](const ParamPoint& x) {
        Eigen::VectorXcd psi(n);
        for (int i = 0; i < n; ++i) psi[i] = eval_table(tables[static_cast<size_t>(i)], x);
        const double norm = psi.norm();
        if (norm < 1e-12)
          throw Error(Errc::DomainError, "real_ket component tables vanish at this point");
        return Eigen::VectorXcd(psi / norm);
      },
      /*analytic_gauge=*/true, /*real_ket=*/true);
}

}  // namespace qgeom
