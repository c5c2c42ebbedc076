#include "qgeom/scan.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <thread>

namespace qgeom {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string index_suffix(std::initializer_list<int> idx) {
  std::string s = "_";
  for (int i : idx) s += std::to_string(i);
  return s;
}

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------------------------
// Per-point route evaluation
// ---------------------------------------------------------------------------

using Entries = std::vector<std::pair<std::string, double>>;

Entries matrix_entries(const std::string& name, const Eigen::MatrixXd& m, bool antisym) {
  Entries out;
  const int d = static_cast<int>(m.rows());
  for (int i = 0; i < d; ++i)
    for (int j = antisym ? i + 1 : i; j < d; ++j)
      out.emplace_back(name + index_suffix({i, j}), m(i, j));
  return out;
}

Entries tensor_entries(const std::string& name, const Tensor3& t) {
  Entries out;
  for (int l = 0; l < t.dim(); ++l)
    for (int m = 0; m < t.dim(); ++m)
      for (int n = m; n < t.dim(); ++n)
        out.emplace_back(name + index_suffix({l, m, n}), t(l, m, n));
  return out;
}

std::vector<std::string> qfim_routes(const StateFamily& fam, bool all) {
  std::vector<std::string> r;
  if (fam.pure && fam.has_dvec()) r.push_back("closed_form");
  if (fam.has_bloch()) r.push_back("bloch");
  r.push_back("sld");
  r.push_back("genfun");
  if (!all) r.resize(1);
  return r;
}

std::vector<std::string> metric_routes(const StateFamily& fam, bool all) {
  std::vector<std::string> r;
  if (fam.pure && fam.has_dvec()) r.push_back("closed_form");
  if (fam.pure) r.push_back("qgt");
  if (fam.has_bloch()) r.push_back("bloch");
  r.push_back("sld");
  if (fam.has_ket()) r.push_back("overlap");
  if (!all) r.resize(1);
  return r;
}

std::vector<std::string> berry_routes(const StateFamily& fam, bool all) {
  std::vector<std::string> r;
  if (fam.pure && fam.has_dvec()) r.push_back("closed_form");
  if (fam.pure) r.push_back("qgt");
  if (fam.has_ket()) r.push_back("phase");
  if (fam.has_ket() && fam.analytic_gauge) r.push_back("im");
  if (!all) r.resize(1);
  return r;
}

std::vector<std::string> christoffel_routes(const StateFamily& fam, bool all) {
  std::vector<std::string> r;
  if (fam.pure && fam.has_dvec()) r.push_back("closed_form");
  if (fam.has_bloch()) r.push_back("bloch");
  r.push_back("metric_fd");
  r.push_back("genfun");
  if (!all) r.resize(1);
  return r;
}

Eigen::MatrixXd qfim_by_route(const StateFamily& fam, const ParamPoint& x,
                              const std::string& route, const ScanSpec& spec) {
  if (route == "closed_form") return dirac_geometry_closed(fam, x).qfim;
  if (route == "bloch") return qfim_bloch(fam, x).qfim;
  if (route == "sld") return qfim_sld(fam, x).qfim;
  return qfim_from_genfun(fam, x, spec.stencil, spec.use_log).qfim;
}

Eigen::MatrixXd metric_by_route(const StateFamily& fam, const ParamPoint& x,
                                const std::string& route, const ScanSpec& spec) {
  if (route == "qgt") return qgt_pure(fam, x).metric;
  if (route == "overlap") return metric_from_overlap(fam, x, spec.stencil, spec.use_log);
  return qfim_by_route(fam, x, route, spec) / 4.0;
}

Eigen::MatrixXd berry_by_route(const StateFamily& fam, const ParamPoint& x,
                               const std::string& route, const ScanSpec& spec) {
  const int d = fam.param_dim;
  if (route == "closed_form") return *dirac_geometry_closed(fam, x).berry;
  if (route == "qgt") return *qgt_pure(fam, x).berry;
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(d, d);
  for (int mu = 0; mu < d; ++mu)
    for (int nu = mu + 1; nu < d; ++nu) {
      const double v = (route == "phase") ? berry_from_phase(fam, x, mu, nu, spec.stencil)
                                          : berry_from_im(fam, x, mu, nu, spec.stencil);
      omega(mu, nu) = v;
      omega(nu, mu) = -v;
    }
  return omega;
}

Tensor3 christoffel_by_route(const StateFamily& fam, const ParamPoint& x,
                             const std::string& route, const ScanSpec& spec) {
  if (route == "closed_form") return *dirac_geometry_closed(fam, x).christoffel;
  if (route == "bloch") return christoffel_bloch(fam, x);
  if (route == "metric_fd") return christoffel_from_metric(fam, x);
  return christoffel_from_genfun(fam, x, spec.stencil);
}

Entries quantity_by_route(const StateFamily& fam, const ParamPoint& x, Quantity q,
                          const std::string& route, const ScanSpec& spec) {
  switch (q) {
    case Quantity::Qfim:
      return matrix_entries("qfim", qfim_by_route(fam, x, route, spec), false);
    case Quantity::Metric:
      return matrix_entries("metric", metric_by_route(fam, x, route, spec), false);
    case Quantity::Berry:
      return matrix_entries("berry", berry_by_route(fam, x, route, spec), true);
    case Quantity::Christoffel:
      return tensor_entries("christoffel", christoffel_by_route(fam, x, route, spec));
    case Quantity::RayCheck: {
      Eigen::VectorXd u = Eigen::VectorXd::Zero(fam.param_dim);
      u[0] = 1.0;  // ray along the first parameter axis
      const RayFit fit = ray_series_fit(fam, x, u);
      return {{"ray_c0", fit.c0},
              {"ray_c1", fit.c1},
              {"ray_c2", fit.c2},
              {"ray_c3", fit.c3},
              {"ray_residual", fit.residual}};
    }
    default:
      throw Error(Errc::ConfigInvalid, "unsupported quantity for pointwise evaluation");
  }
}

std::vector<std::string> routes_for(const StateFamily& fam, Quantity q, bool all) {
  switch (q) {
    case Quantity::Qfim: return qfim_routes(fam, all);
    case Quantity::Metric: return metric_routes(fam, all);
    case Quantity::Berry: return berry_routes(fam, all);
    case Quantity::Christoffel: return christoffel_routes(fam, all);
    case Quantity::RayCheck: return {"genfun"};
    default: return {};
  }
}

std::vector<ParamPoint> grid_points(const std::vector<GridAxis>& axes) {
  std::vector<std::vector<double>> vals;
  size_t total = 1;
  for (const GridAxis& a : axes) {
    vals.push_back(a.values());
    total *= vals.back().size();
  }
  std::vector<ParamPoint> pts;
  pts.reserve(total);
  const int d = static_cast<int>(axes.size());
  for (size_t flat = 0; flat < total; ++flat) {
    ParamPoint p(d);
    size_t rem = flat;
    for (int ax = d - 1; ax >= 0; --ax) {
      const size_t n = vals[static_cast<size_t>(ax)].size();
      p[ax] = vals[static_cast<size_t>(ax)][rem % n];
      rem /= n;
    }
    pts.push_back(std::move(p));
  }
  return pts;
}

void parallel_for(size_t n, int threads, const std::function<void(size_t)>& body) {
  unsigned hw = std::thread::hardware_concurrency();
  size_t nworkers = threads > 0 ? static_cast<size_t>(threads) : (hw ? hw : 1);
  nworkers = std::min(nworkers, n);
  if (nworkers <= 1) {
    for (size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<size_t> next{0};
  for (size_t w = 0; w < nworkers; ++w) {
    pool.emplace_back([&]() {
      for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

nlohmann::json make_metadata(const ScanSpec& spec) {
  nlohmann::json meta;
  meta["tool"] = "qgeom";
  meta["version"] = kToolVersion;
  meta["model"] = spec.model.to_json();
  nlohmann::json axes = nlohmann::json::array();
  for (const GridAxis& a : spec.grid)
    axes.push_back({{"min", a.min}, {"max", a.max}, {"count", a.count}});
  meta["grid"] = axes;
  if (spec.grid_primed)
    meta["grid_primed"] = {{"min", spec.grid_primed->min},
                           {"max", spec.grid_primed->max},
                           {"count", spec.grid_primed->count}};
  meta["stencil"] = {{"h2", spec.stencil.h2},
                     {"h3", spec.stencil.h3},
                     {"richardson", spec.stencil.richardson}};
  meta["use_log"] = spec.use_log;
  meta["created_at"] = iso_now();
  return meta;
}

// Quantities actually evaluated per point. A compare_routes entry switches
// every tensor quantity to all-routes mode (defaulting to qfim+christoffel
// when nothing else is listed).
std::pair<std::vector<Quantity>, bool> pointwise_quantities(const ScanSpec& spec) {
  std::vector<Quantity> qs;
  bool all_routes = false;
  for (Quantity q : spec.quantities) {
    if (q == Quantity::FidelitySurface) continue;
    if (q == Quantity::CompareRoutes) {
      all_routes = true;
      continue;
    }
    qs.push_back(q);
  }
  if (all_routes && qs.empty()) qs = {Quantity::Qfim, Quantity::Christoffel};
  return {qs, all_routes};
}

std::vector<ScanRow> scan_point(const StateFamily& fam, const ScanSpec& spec,
                                const std::vector<Quantity>& qs, bool all_routes,
                                const ParamPoint& x) {
  std::vector<ScanRow> rows;
  std::vector<double> coords(x.data(), x.data() + x.size());
  for (Quantity q : qs) {
    for (const std::string& route : routes_for(fam, q, all_routes)) {
      try {
        for (const auto& [name, value] : quantity_by_route(fam, x, q, route, spec))
          rows.push_back({coords, name, route, value});
      } catch (const Error& e) {
        rows.push_back({coords, to_string(q), std::string("error:") + to_string(e.code()), kNan});
      }
    }
  }
  return rows;
}

}  // namespace

std::vector<double> GridAxis::values() const {
  validate();
  std::vector<double> v(static_cast<size_t>(count));
  const double step = (max - min) / (count - 1);
  for (int i = 0; i < count; ++i) v[static_cast<size_t>(i)] = min + step * i;
  return v;
}

void GridAxis::validate() const {
  if (count < 2) throw Error(Errc::ConfigInvalid, "grid count must be >= 2");
  if (!std::isfinite(min) || !std::isfinite(max) || !(min < max))
    throw Error(Errc::ConfigInvalid, "grid bounds must be finite with min < max");
}

Quantity quantity_from_string(const std::string& s) {
  if (s == "fidelity_surface") return Quantity::FidelitySurface;
  if (s == "qfim") return Quantity::Qfim;
  if (s == "metric") return Quantity::Metric;
  if (s == "berry") return Quantity::Berry;
  if (s == "christoffel") return Quantity::Christoffel;
  if (s == "ray_check") return Quantity::RayCheck;
  if (s == "compare_routes") return Quantity::CompareRoutes;
  throw Error(Errc::ConfigInvalid, "unknown quantity '" + s + "'");
}

const char* to_string(Quantity q) {
  switch (q) {
    case Quantity::FidelitySurface: return "fidelity_surface";
    case Quantity::Qfim: return "qfim";
    case Quantity::Metric: return "metric";
    case Quantity::Berry: return "berry";
    case Quantity::Christoffel: return "christoffel";
    case Quantity::RayCheck: return "ray_check";
    case Quantity::CompareRoutes: return "compare_routes";
  }
  return "?";
}

void ScanSpec::validate() const {
  stencil.validate();
  if (quantities.empty()) throw Error(Errc::ConfigInvalid, "no quantities requested");
  if (grid.size() != static_cast<size_t>(model.param_dim()))
    throw Error(Errc::ConfigInvalid, "expected one grid axis per model parameter (" +
                                         std::to_string(model.param_dim()) + ")");
  for (const GridAxis& a : grid) a.validate();
  if (grid_primed) grid_primed->validate();

  const bool surface = std::count(quantities.begin(), quantities.end(),
                                  Quantity::FidelitySurface) > 0;
  if (surface) {
    if (model.param_dim() != 1)
      throw Error(Errc::ConfigInvalid, "fidelity_surface needs a 1-parameter family");
    if (quantities.size() != 1)
      throw Error(Errc::ConfigInvalid, "run fidelity_surface as its own scan");
  }
  const bool berry = std::count(quantities.begin(), quantities.end(), Quantity::Berry) > 0;
  if (berry && model.param_dim() < 2)
    throw Error(Errc::ConfigInvalid, "berry needs a family with >= 2 parameters");
}

bool ScanResult::has_error_rows() const {
  return std::any_of(rows.begin(), rows.end(), [](const ScanRow& r) {
    return r.method.rfind("error:", 0) == 0;
  });
}

ScanResult run_scan(const ScanSpec& spec) {
  spec.validate();
  const StateFamily fam = build_family(spec.model);

  ScanResult result;
  result.columns = spec.model.coord_names();
  result.metadata = make_metadata(spec);

  const bool surface = !spec.quantities.empty() && spec.quantities[0] == Quantity::FidelitySurface;
  if (surface) {
    result.columns.push_back(result.columns[0] + "_prime");
    const std::vector<double> ks = spec.grid[0].values();
    const std::vector<double> kps = (spec.grid_primed ? *spec.grid_primed : spec.grid[0]).values();
    const std::string method = (fam.has_bloch() && fam.hilbert_dim == 2) ? "closed_form"
                                                                         : "spectral";
    std::vector<std::vector<ScanRow>> buckets(ks.size() * kps.size());
    parallel_for(buckets.size(), spec.threads, [&](size_t flat) {
      const size_t i = flat / kps.size(), j = flat % kps.size();
      const ParamPoint x = param_point({ks[i]});
      const ParamPoint xp = param_point({kps[j]});
      ScanRow row{{ks[i], kps[j]}, "fidelity", method, kNan};
      try {
        row.value = genfun_eval(fam, x, xp, GenFunKind::Fidelity);
      } catch (const Error& e) {
        row.method = std::string("error:") + to_string(e.code());
      }
      buckets[flat].push_back(std::move(row));
    });
    for (auto& b : buckets)
      for (auto& r : b) result.rows.push_back(std::move(r));
  } else {
    const auto pw = pointwise_quantities(spec);
    const std::vector<Quantity>& qs = pw.first;
    const bool all_routes = pw.second;
    const std::vector<ParamPoint> pts = grid_points(spec.grid);
    std::vector<std::vector<ScanRow>> buckets(pts.size());
    parallel_for(pts.size(), spec.threads, [&](size_t i) {
      buckets[i] = scan_point(fam, spec, qs, all_routes, pts[i]);
    });
    for (auto& b : buckets)
      for (auto& r : b) result.rows.push_back(std::move(r));
  }
  result.columns.insert(result.columns.end(), {"quantity", "method", "value"});
  return result;
}

CompareReport compare_routes(const ScanSpec& spec, const CompareTolerances& tol) {
  spec.validate();
  const StateFamily fam = build_family(spec.model);

  CompareReport rep;
  rep.values.columns = spec.model.coord_names();
  rep.values.columns.insert(rep.values.columns.end(), {"quantity", "method", "value"});
  rep.values.metadata = make_metadata(spec);

  std::vector<Quantity> tensors;
  for (Quantity q : spec.quantities)
    if (q != Quantity::FidelitySurface && q != Quantity::CompareRoutes &&
        q != Quantity::RayCheck)
      tensors.push_back(q);
  if (tensors.empty())
    throw Error(Errc::ConfigInvalid, "compare needs at least one of qfim|metric|berry|christoffel");

  const std::vector<ParamPoint> pts = grid_points(spec.grid);
  std::vector<std::vector<ScanRow>> buckets(pts.size());
  parallel_for(pts.size(), spec.threads, [&](size_t i) {
    std::vector<ScanRow> rows;
    const std::vector<double> coords(pts[i].data(), pts[i].data() + pts[i].size());
    for (Quantity q : tensors) {
      for (const std::string& route : routes_for(fam, q, /*all=*/true)) {
        try {
          for (const auto& [name, value] : quantity_by_route(fam, pts[i], q, route, spec))
            rows.push_back({coords, name, route, value});
        } catch (const Error& e) {
          rows.push_back({coords, to_string(q), std::string("error:") + to_string(e.code()), kNan});
        }
      }
    }
    buckets[i] = std::move(rows);
  });

  std::vector<double> all_abs;
  for (size_t i = 0; i < pts.size(); ++i) {
    // group rows by quantity id, then deviate route pairs
    for (const ScanRow& r : buckets[i]) rep.values.rows.push_back(r);
    for (Quantity q : tensors) {
      const std::vector<std::string> routes = routes_for(fam, q, true);
      if (routes.size() < 2) continue;
      // collect per-route entry maps
      std::vector<std::pair<std::string, std::vector<const ScanRow*>>> per_route;
      for (const std::string& route : routes) {
        std::vector<const ScanRow*> rs;
        for (const ScanRow& r : buckets[i])
          if (r.method == route && r.quantity.rfind(to_string(q), 0) == 0) rs.push_back(&r);
        if (!rs.empty()) per_route.emplace_back(route, std::move(rs));
      }
      const double tol_abs = q == Quantity::Qfim      ? tol.qfim
                             : q == Quantity::Metric  ? tol.metric
                             : q == Quantity::Berry   ? tol.berry
                                                      : 0.0;
      for (size_t a = 0; a < per_route.size(); ++a)
        for (size_t b = a + 1; b < per_route.size(); ++b) {
          const auto& [ra, rows_a] = per_route[a];
          const auto& [rb, rows_b] = per_route[b];
          if (rows_a.size() != rows_b.size()) continue;
          double max_abs = 0.0, scale = 0.0;
          for (size_t k = 0; k < rows_a.size(); ++k) {
            max_abs = std::max(max_abs, std::abs(rows_a[k]->value - rows_b[k]->value));
            scale = std::max({scale, std::abs(rows_a[k]->value), std::abs(rows_b[k]->value)});
          }
          CompareDeviation dev;
          dev.coords = std::vector<double>(pts[i].data(), pts[i].data() + pts[i].size());
          dev.quantity = to_string(q);
          dev.route_a = ra;
          dev.route_b = rb;
          dev.abs_dev = max_abs;
          dev.rel_dev = max_abs / std::max(scale, 1e-2);
          rep.deviations.push_back(dev);
          all_abs.push_back(max_abs);
          const bool ok = (q == Quantity::Christoffel) ? dev.rel_dev <= tol.christoffel_rel
                                                       : dev.abs_dev <= tol_abs;
          if (!ok) rep.within_tolerance = false;
        }
    }
  }
  if (!all_abs.empty()) {
    rep.max_abs = *std::max_element(all_abs.begin(), all_abs.end());
    std::nth_element(all_abs.begin(), all_abs.begin() + all_abs.size() / 2, all_abs.end());
    rep.median_abs = all_abs[all_abs.size() / 2];
  }
  return rep;
}

void emit_csv(const ScanResult& result, std::ostream& os) {
  for (size_t i = 0; i < result.columns.size(); ++i) {
    if (i) os << ',';
    os << result.columns[i];
  }
  os << '\n';
  for (const ScanRow& r : result.rows) {
    for (double c : r.coords) os << fmt17(c) << ',';
    os << r.quantity << ',' << r.method << ',' << fmt17(r.value) << '\n';
  }
}

void emit_json(const ScanResult& result, std::ostream& os) {
  nlohmann::json j;
  j["metadata"] = result.metadata;
  j["columns"] = result.columns;
  nlohmann::json rows = nlohmann::json::array();
  for (const ScanRow& r : result.rows) {
    nlohmann::json row = nlohmann::json::array();
    for (double c : r.coords) row.push_back(c);
    row.push_back(r.quantity);
    row.push_back(r.method);
    if (std::isnan(r.value))
      row.push_back(nullptr);
    else
      row.push_back(r.value);
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  os << j.dump(2) << '\n';
}

ScanResult parse_json_result(std::istream& is) {
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::IoError, std::string("cannot parse result JSON: ") + e.what());
  }
  ScanResult result;
  result.metadata = j.value("metadata", nlohmann::json::object());
  result.columns = j.value("columns", std::vector<std::string>{});
  const size_t ncoord = result.columns.size() >= 3 ? result.columns.size() - 3 : 0;
  for (const auto& row : j.value("rows", nlohmann::json::array())) {
    ScanRow r;
    for (size_t i = 0; i < ncoord; ++i) r.coords.push_back(row.at(i).get<double>());
    r.quantity = row.at(ncoord).get<std::string>();
    r.method = row.at(ncoord + 1).get<std::string>();
    const auto& v = row.at(ncoord + 2);
    r.value = v.is_null() ? kNan : v.get<double>();
    result.rows.push_back(std::move(r));
  }
  return result;
}

void emit_to_file(const ScanResult& result, const std::string& path, const std::string& format) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot open '" + path + "' for writing");
  if (format == "csv")
    emit_csv(result, out);
  else if (format == "json")
    emit_json(result, out);
  else
    throw Error(Errc::ConfigInvalid, "format must be csv or json, got '" + format + "'");
  out.flush();
  if (!out) throw Error(Errc::IoError, "write to '" + path + "' failed");
}

}  // namespace qgeom
