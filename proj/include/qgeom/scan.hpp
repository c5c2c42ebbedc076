#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qgeom/numdiff.hpp"

namespace qgeom {

inline constexpr const char* kToolVersion = "0.1.0";

/// Uniform grid over one parameter: count points from min to max inclusive.
struct GridAxis {
  double min = 0.0;
  double max = 1.0;
  int count = 2;

  std::vector<double> values() const;
  void validate() const;
};

enum class Quantity {
  FidelitySurface,
  Qfim,
  Metric,
  Berry,
  Christoffel,
  RayCheck,
  CompareRoutes,
};

Quantity quantity_from_string(const std::string& s);
const char* to_string(Quantity q);

struct ScanSpec {
  ModelConfig model;
  std::vector<GridAxis> grid;          // one axis per parameter
  std::optional<GridAxis> grid_primed; // x' axis for surfaces; defaults to grid[0]
  std::vector<Quantity> quantities;
  StencilConfig stencil;
  bool use_log = true;
  int threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

struct ScanRow {
  std::vector<double> coords;  // grid coordinates, then primed coordinates for surfaces
  std::string quantity;        // e.g. "qfim_00", "christoffel_000", "fidelity"
  std::string method;          // route id, or "error:<Code>" with value NaN
  double value = 0.0;
};

struct ScanResult {
  std::vector<std::string> columns;  // coordinate names, then quantity/method/value
  std::vector<ScanRow> rows;
  nlohmann::json metadata;

  bool has_error_rows() const;
};

/// Evaluates the requested quantities over the grid. Grid points run on a
/// worker pool; output order is by grid index regardless of completion
/// order, so repeated runs are byte-identical. Per-point failures become
/// error rows and the scan continues.
ScanResult run_scan(const ScanSpec& spec);

struct CompareTolerances {
  double qfim = 1e-5;             // absolute
  double metric = 2.5e-6;         // absolute (qfim/4)
  double berry = 1e-5;            // absolute
  double christoffel_rel = 5e-3;  // relative, scale floored at 1e-2
};

struct CompareDeviation {
  std::vector<double> coords;
  std::string quantity;
  std::string route_a;
  std::string route_b;
  double abs_dev = 0.0;
  double rel_dev = 0.0;
};

struct CompareReport {
  ScanResult values;  // per-route value rows
  std::vector<CompareDeviation> deviations;
  double max_abs = 0.0;
  double median_abs = 0.0;
  bool within_tolerance = true;
};

/// Computes every available route for the requested tensor quantities and
/// audits pairwise deviations against the tolerances.
CompareReport compare_routes(const ScanSpec& spec, const CompareTolerances& tol = {});

void emit_csv(const ScanResult& result, std::ostream& os);
void emit_json(const ScanResult& result, std::ostream& os);
ScanResult parse_json_result(std::istream& is);

/// Writes in the requested format ("csv" | "json"); IO failures raise IoError.
void emit_to_file(const ScanResult& result, const std::string& path, const std::string& format);

}  // namespace qgeom
