// qgeom command-line tool: grid scans, route-comparison audits, single-point
// geometry dumps, and model-config validation.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qgeom/scan.hpp"

namespace {

using namespace qgeom;

// Exit codes: 0 success, 1 compare tolerance violation, 2 config error,
// 3 partial failure (error rows present).
constexpr int kExitOk = 0;
constexpr int kExitToleranceViolation = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitPartialFailure = 3;

ModelConfig load_model_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open model config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ConfigInvalid, "model config is not valid JSON: " + std::string(e.what()));
  }
  return ModelConfig::from_json(j);
}

GridAxis parse_axis(const std::string& s) {
  GridAxis a;
  char c1 = 0, c2 = 0;
  std::istringstream in(s);
  if (!(in >> a.min >> c1 >> a.max >> c2 >> a.count) || c1 != ':' || c2 != ':')
    throw Error(Errc::ConfigInvalid, "grid axis must be min:max:count, got '" + s + "'");
  a.validate();
  return a;
}

std::vector<double> parse_coords(const std::string& s) {
  std::vector<double> out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

struct CommonOpts {
  std::string model_path;
  std::vector<std::string> grid;
  std::string grid2;
  std::string quantities = "qfim";
  double h2 = 1e-3;
  double h3 = 1e-2;
  bool richardson = true;
  bool use_log = true;
  std::string format = "csv";
  std::string out;
  int threads = 0;
};

void add_stencil_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--h2", o.h2, "Step for second-order two-slot stencils");
  cmd->add_option("--h3", o.h3, "Step for third-order two-slot stencils");
  cmd->add_flag("--richardson,!--no-richardson", o.richardson,
                "Richardson-combine the h and h/2 stencils");
  cmd->add_flag("--use-log,!--no-use-log", o.use_log,
                "Differentiate the log of the generating function");
}

ScanSpec make_spec(const CommonOpts& o) {
  ScanSpec spec;
  spec.model = load_model_config(o.model_path);
  for (const std::string& g : o.grid) spec.grid.push_back(parse_axis(g));
  if (!o.grid2.empty()) spec.grid_primed = parse_axis(o.grid2);
  std::istringstream qs(o.quantities);
  std::string tok;
  while (std::getline(qs, tok, ',')) spec.quantities.push_back(quantity_from_string(tok));
  spec.stencil.h2 = o.h2;
  spec.stencil.h3 = o.h3;
  spec.stencil.richardson = o.richardson;
  spec.use_log = o.use_log;
  spec.threads = o.threads;
  return spec;
}

void write_result(const ScanResult& result, const CommonOpts& o) {
  if (o.out.empty()) {
    if (o.format == "csv")
      emit_csv(result, std::cout);
    else
      emit_json(result, std::cout);
  } else {
    emit_to_file(result, o.out, o.format);
    std::cerr << "wrote " << result.rows.size() << " rows to " << o.out << "\n";
  }
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json tensor_json(const Tensor3& t) {
  nlohmann::json out = nlohmann::json::array();
  for (int l = 0; l < t.dim(); ++l) {
    nlohmann::json plane = nlohmann::json::array();
    for (int m = 0; m < t.dim(); ++m) {
      nlohmann::json row = nlohmann::json::array();
      for (int n = 0; n < t.dim(); ++n) row.push_back(t(l, m, n));
      plane.push_back(std::move(row));
    }
    out.push_back(std::move(plane));
  }
  return out;
}

int run_point(const CommonOpts& o, const std::string& at, bool metric_convention) {
  const ModelConfig cfg = load_model_config(o.model_path);
  const StateFamily fam = build_family(cfg);
  const std::vector<double> coords = parse_coords(at);
  if (coords.size() != static_cast<size_t>(fam.param_dim))
    throw Error(Errc::ConfigInvalid, "--at needs " + std::to_string(fam.param_dim) +
                                         " comma-separated coordinates");
  ParamPoint x(fam.param_dim);
  for (int i = 0; i < fam.param_dim; ++i) x[i] = coords[static_cast<size_t>(i)];

  StencilConfig stencil{o.h2, o.h3, o.richardson};
  nlohmann::json out;
  out["model"] = cfg.to_json();
  out["at"] = coords;
  bool partial = false;
  auto record_error = [&](const char* key, const Error& e) {
    out[key] = {{"error", to_string(e.code())}, {"detail", e.what()}};
    partial = true;
  };

  try {
    GeometryReport rep = fam.pure && fam.has_dvec() ? dirac_geometry_closed(fam, x)
                         : fam.has_bloch()          ? qfim_bloch(fam, x)
                                                    : qfim_sld(fam, x);
    out["qfim"] = matrix_json(rep.qfim);
    out["metric"] = matrix_json(rep.metric);
    out["qfim_method"] = to_string(rep.method);
    out["sld_truncations"] = rep.sld_truncations;
  } catch (const Error& e) {
    record_error("qfim", e);
  }
  try {
    Eigen::MatrixXd f = qfim_from_genfun(fam, x, stencil, o.use_log).qfim;
    out["qfim_genfun"] = matrix_json(f);
  } catch (const Error& e) {
    record_error("qfim_genfun", e);
  }
  try {
    Tensor3 gamma = fam.pure && fam.has_dvec() ? *dirac_geometry_closed(fam, x).christoffel
                    : fam.has_bloch()          ? christoffel_bloch(fam, x)
                                               : christoffel_from_metric(fam, x);
    out["christoffel"] = tensor_json(metric_convention ? gamma.scaled(0.25) : gamma);
    out["christoffel_convention"] = metric_convention ? "metric" : "qfim";
  } catch (const Error& e) {
    record_error("christoffel", e);
  }
  if (fam.pure) {
    try {
      GeometryReport rep = qgt_pure(fam, x);
      out["berry"] = matrix_json(*rep.berry);
    } catch (const Error& e) {
      record_error("berry", e);
    }
  }

  if (o.out.empty()) {
    std::cout << out.dump(2) << "\n";
  } else {
    std::ofstream f(o.out);
    if (!f) throw Error(Errc::IoError, "cannot open '" + o.out + "'");
    f << out.dump(2) << "\n";
  }
  return partial ? kExitPartialFailure : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantum information geometry: QFIM, quantum metric, Berry curvature and their"
               " generating-function extraction"};
  app.require_subcommand(1);

  CommonOpts o;
  std::string at = "0";
  bool metric_convention = false;
  double tol_qfim = 1e-5, tol_christoffel = 5e-3;

  auto add_common = [&](CLI::App* cmd, bool needs_grid) {
    cmd->add_option("--model-config", o.model_path, "Path to the model JSON")->required();
    if (needs_grid) {
      cmd->add_option("--grid", o.grid, "Grid axis min:max:count (repeat per parameter)")
          ->required();
      cmd->add_option("--grid2", o.grid2, "Primed axis for fidelity surfaces (min:max:count)");
      cmd->add_option("--quantities", o.quantities,
                      "Comma list: fidelity_surface,qfim,metric,berry,christoffel,ray_check,"
                      "compare_routes");
      cmd->add_option("--threads", o.threads, "Worker threads (0 = hardware)");
    }
    add_stencil_flags(cmd, o);
    cmd->add_option("--format", o.format, "csv | json");
    cmd->add_option("--out", o.out, "Output path (stdout when omitted)");
  };

  CLI::App* scan = app.add_subcommand("scan", "Sweep a parameter grid and emit rows");
  add_common(scan, true);

  CLI::App* compare = app.add_subcommand("compare", "Audit agreement between computation routes");
  add_common(compare, true);
  compare->add_option("--tol-qfim", tol_qfim, "Absolute tolerance for QFIM/metric/berry routes");
  compare->add_option("--tol-christoffel", tol_christoffel,
                      "Relative tolerance for Christoffel routes");

  CLI::App* point = app.add_subcommand("point", "Geometry report at a single parameter point");
  point->add_option("--model-config", o.model_path, "Path to the model JSON")->required();
  point->add_option("--at", at, "Comma-separated parameter coordinates")->required();
  point->add_flag("--metric-convention", metric_convention,
                  "Report Christoffel symbols in the metric (QFIM/4) convention");
  add_stencil_flags(point, o);
  point->add_option("--out", o.out, "Output path (stdout when omitted)");

  CLI::App* validate = app.add_subcommand("validate-config", "Check a model JSON");
  validate->add_option("--model-config", o.model_path, "Path to the model JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (scan->parsed()) {
      const ScanResult result = run_scan(make_spec(o));
      write_result(result, o);
      return result.has_error_rows() ? kExitPartialFailure : kExitOk;
    }
    if (compare->parsed()) {
      CompareTolerances tol;
      tol.qfim = tol_qfim;
      tol.metric = tol_qfim / 4.0;
      tol.berry = tol_qfim;
      tol.christoffel_rel = tol_christoffel;
      ScanSpec spec = make_spec(o);
      if (std::find(spec.quantities.begin(), spec.quantities.end(), Quantity::CompareRoutes) ==
          spec.quantities.end())
        spec.quantities.push_back(Quantity::CompareRoutes);
      const CompareReport rep = compare_routes(spec, tol);
      write_result(rep.values, o);
      std::cerr << "route deviations: max " << rep.max_abs << ", median " << rep.median_abs
                << (rep.within_tolerance ? " (within tolerance)\n" : " (TOLERANCE EXCEEDED)\n");
      for (const CompareDeviation& d : rep.deviations) {
        if (d.abs_dev == rep.max_abs) {
          std::cerr << "  worst: " << d.quantity << " " << d.route_a << " vs " << d.route_b
                    << " abs " << d.abs_dev << " rel " << d.rel_dev << "\n";
          break;
        }
      }
      if (!rep.within_tolerance) return kExitToleranceViolation;
      return rep.values.has_error_rows() ? kExitPartialFailure : kExitOk;
    }
    if (point->parsed()) return run_point(o, at, metric_convention);
    if (validate->parsed()) {
      const ModelConfig cfg = load_model_config(o.model_path);
      const StateFamily fam = build_family(cfg);
      std::cout << "ok: model=" << cfg.id() << " param_dim=" << fam.param_dim
                << " hilbert_dim=" << fam.hilbert_dim << " paths:rho"
                << (fam.has_ket() ? ",ket" : "") << (fam.has_bloch() ? ",bloch" : "")
                << (fam.has_dvec() ? ",dvec" : "") << (fam.pure ? " (pure)" : "") << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    const bool config = e.code() == Errc::ConfigInvalid || e.code() == Errc::IoError ||
                        e.code() == Errc::UnsupportedKind;
    return config ? kExitConfigError : kExitPartialFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitConfigError;
}
