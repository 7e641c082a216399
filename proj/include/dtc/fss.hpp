#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dtc/csv.hpp"

namespace dtc {

struct CurvePoint {
  double x;
  double y;
  double sigma;
};

struct CurveSeries {
  double L;
  std::vector<CurvePoint> points;
};

/// Curves of one observable against a control parameter for several sizes.
/// Requires >= 3 distinct sizes, each series sorted in x, sigma > 0.
class CurveFamily {
 public:
  explicit CurveFamily(std::vector<CurveSeries> series);

  /// Columns L,x,y[,sigma]. Without a sigma column every point gets sigma = 1
  /// and sigma_assigned() is set; Q is then only a relative objective.
  static CurveFamily from_table(const io::Table& table);
  io::Table to_table() const;

  const std::vector<CurveSeries>& series() const noexcept { return series_; }
  std::size_t point_count() const noexcept;
  bool sigma_assigned() const noexcept { return sigma_assigned_; }
  double min_size() const noexcept;
  double max_size() const noexcept;

 private:
  CurveFamily() = default;
  std::vector<CurveSeries> series_;
  bool sigma_assigned_ = false;
};

/// Scaling form y = L^(zeta/nu) G(L^(1/nu) (x - x_c)).
struct CollapseParams {
  double x_c = 0.0;
  double zeta = 0.0;
  double nu = 1.0;

  std::array<double, 3> as_array() const { return {x_c, zeta, nu}; }
  static CollapseParams from_array(const std::array<double, 3>& v) { return {v[0], v[1], v[2]}; }
};

/// x' = L^(1/nu) (x - x_c), y' = L^(-zeta/nu) y, sigma' = L^(-zeta/nu) sigma.
/// The result is not re-validated (sizes are kept as labels).
std::vector<CurveSeries> rescale(const CurveFamily& family, const CollapseParams& params);

struct QualityDetail {
  double Q;
  std::size_t used;
  std::size_t excluded;
};

/// Reduced chi-square of every scaled point against a weighted straight-line
/// fit through the bracketing points of all other sizes. Points that no other
/// size brackets are excluded. Fewer than 2 usable points: DegenerateInputError.
QualityDetail collapse_quality_detail(const CurveFamily& family, const CollapseParams& params);
double collapse_quality(const CurveFamily& family, const CollapseParams& params);

struct CollapseBounds {
  CollapseParams lower{-1e300, -1e300, -1e300};
  CollapseParams upper{1e300, 1e300, 1e300};
};

struct CollapseOptions {
  int restarts = 3;
  /// Relative size of the random offset applied to each restart's start point.
  double jitter = 0.1;
  int max_iterations = 4000;
  /// Stop when the spread of Q over the simplex falls below this.
  double f_tol = 1e-12;
  /// ... and the simplex extent (relative to the bound widths) below this.
  double x_tol = 1e-9;
  std::uint64_t seed = 20240917;
};

struct TraceEntry {
  int restart;
  int iteration;
  CollapseParams params;
  double Q;
};

struct CollapseResult {
  CollapseParams params;
  double Q = 0.0;
  std::size_t n_points_used = 0;
  std::size_t n_points_excluded = 0;
  bool converged = true;
  bool degenerate = false;
  std::vector<std::string> warnings;
  std::vector<TraceEntry> trace;

  /// {x_c, zeta, nu, Q, n_points_used, warnings}.
  std::string to_json() const;
};

/// Nelder-Mead with bound clipping and jittered restarts; the best Q wins.
/// The initial point must lie within the bounds.
CollapseResult optimize_collapse(const CurveFamily& family, const CollapseParams& initial, const CollapseBounds& bounds,
                                 const CollapseOptions& options = {});

}  // namespace dtc
