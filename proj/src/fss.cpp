#include "dtc/fss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <json.hpp>

#include "dtc/errors.hpp"
#include "dtc/random.hpp"

namespace dtc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool finite_width(double lo, double hi) { return std::isfinite(lo) && std::isfinite(hi) && hi - lo < 1e299; }

}  // namespace

CurveFamily::CurveFamily(std::vector<CurveSeries> series) : series_(std::move(series)) {
  std::vector<double> sizes;
  for (const auto& s : series_) {
    if (!(s.L > 0.0)) throw ArgumentError("curve sizes must be positive");
    if (s.points.empty()) throw ArgumentError("empty curve for L=" + io::fmt(s.L));
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      const auto& p = s.points[i];
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ArgumentError("non-finite point for L=" + io::fmt(s.L));
      if (!(p.sigma > 0.0)) throw ArgumentError("sigma must be positive (L=" + io::fmt(s.L) + ")");
      if (i > 0 && !(s.points[i - 1].x <= p.x)) throw ArgumentError("curve for L=" + io::fmt(s.L) + " is not sorted in x");
    }
    sizes.push_back(s.L);
  }
  std::sort(sizes.begin(), sizes.end());
  if (std::unique(sizes.begin(), sizes.end()) - sizes.begin() != static_cast<long>(series_.size())) {
    throw ArgumentError("each size may appear only once in a curve family");
  }
  if (series_.size() < 3) throw ArgumentError("a curve family needs at least 3 distinct sizes");
}

CurveFamily CurveFamily::from_table(const io::Table& table) {
  const bool has_sigma = table.has_column("sigma");
  std::map<double, CurveSeries> by_size;
  for (std::size_t r = 0; r < table.size(); ++r) {
    const double L = table.number(r, "L");
    auto& s = by_size[L];
    s.L = L;
    s.points.push_back({table.number(r, "x"), table.number(r, "y"), has_sigma ? table.number(r, "sigma") : 1.0});
  }
  std::vector<CurveSeries> series;
  for (auto& [L, s] : by_size) {
    std::stable_sort(s.points.begin(), s.points.end(), [](const CurvePoint& a, const CurvePoint& b) { return a.x < b.x; });
    series.push_back(std::move(s));
  }
  CurveFamily f(std::move(series));
  f.sigma_assigned_ = !has_sigma;
  return f;
}

io::Table CurveFamily::to_table() const {
  io::Table t({"L", "x", "y", "sigma"});
  for (const auto& s : series_) {
    for (const auto& p : s.points) t.add(s.L, p.x, p.y, p.sigma);
  }
  return t;
}

std::size_t CurveFamily::point_count() const noexcept {
  std::size_t n = 0;
  for (const auto& s : series_) n += s.points.size();
  return n;
}

double CurveFamily::min_size() const noexcept {
  double m = kInf;
  for (const auto& s : series_) m = std::min(m, s.L);
  return m;
}

double CurveFamily::max_size() const noexcept {
  double m = 0.0;
  for (const auto& s : series_) m = std::max(m, s.L);
  return m;
}

std::vector<CurveSeries> rescale(const CurveFamily& family, const CollapseParams& params) {
  if (params.nu == 0.0 || !std::isfinite(params.nu)) throw DomainError("nu must be finite and non-zero");
  std::vector<CurveSeries> out;
  out.reserve(family.series().size());
  for (const auto& s : family.series()) {
    const double xs = std::pow(s.L, 1.0 / params.nu);
    const double ys = std::pow(s.L, -params.zeta / params.nu);
    CurveSeries r{s.L, {}};
    r.points.reserve(s.points.size());
    for (const auto& p : s.points) r.points.push_back({xs * (p.x - params.x_c), ys * p.y, ys * p.sigma});
    out.push_back(std::move(r));
  }
  return out;
}

QualityDetail collapse_quality_detail(const CurveFamily& family, const CollapseParams& params) {
  const auto scaled = rescale(family, params);
  double chi2 = 0.0;
  QualityDetail d{0.0, 0, 0};
  std::vector<const CurvePoint*> neighbours;
  for (std::size_t si = 0; si < scaled.size(); ++si) {
    for (const auto& p : scaled[si].points) {
      neighbours.clear();
      for (std::size_t ti = 0; ti < scaled.size(); ++ti) {
        if (ti == si) continue;
        const auto& pts = scaled[ti].points;
        if (pts.size() < 2 || p.x < pts.front().x || p.x > pts.back().x) continue;
        auto hi = std::upper_bound(pts.begin(), pts.end(), p.x, [](double x, const CurvePoint& q) { return x < q.x; });
        if (hi == pts.end()) --hi;  // p.x equals the last abscissa
        neighbours.push_back(&*(hi - 1));
        neighbours.push_back(&*hi);
      }
      if (neighbours.empty()) {
        ++d.excluded;
        continue;
      }
      // Moments about p.x, accumulated in extended precision, keep the fit well
      // conditioned and Q invariant under a common rescaling of y and sigma.
      long double K = 0, Kx = 0, Ky = 0, Kxx = 0, Kxy = 0;
      for (const CurvePoint* q : neighbours) {
        const long double w = 1.0L / (static_cast<long double>(q->sigma) * q->sigma);
        const long double dx = static_cast<long double>(q->x) - p.x;
        K += w;
        Kx += w * dx;
        Ky += w * q->y;
        Kxx += w * dx * dx;
        Kxy += w * dx * q->y;
      }
      const long double delta = K * Kxx - Kx * Kx;
      if (!(delta > 0.0L)) {
        ++d.excluded;
        continue;
      }
      const double Y = static_cast<double>((Kxx * Ky - Kx * Kxy) / delta);
      const double dY2 = static_cast<double>(Kxx / delta);
      const double r = p.y - Y;
      chi2 += r * r / (p.sigma * p.sigma + dY2);
      ++d.used;
    }
  }
  if (d.used < 2) {
    throw DegenerateInputError("collapse quality needs at least 2 usable points, got " + std::to_string(d.used));
  }
  d.Q = chi2 / static_cast<double>(d.used);
  return d;
}

double collapse_quality(const CurveFamily& family, const CollapseParams& params) {
  return collapse_quality_detail(family, params).Q;
}

std::string CollapseResult::to_json() const {
  nlohmann::ordered_json j;
  j["x_c"] = params.x_c;
  j["zeta"] = params.zeta;
  j["nu"] = params.nu;
  j["Q"] = Q;
  j["n_points_used"] = n_points_used;
  j["warnings"] = warnings;
  return j.dump(2);
}

namespace {

using Vec3 = std::array<double, 3>;

struct Box {
  Vec3 lo, hi, scale;

  Vec3 clip(Vec3 v) const {
    for (int i = 0; i < 3; ++i) v[i] = std::clamp(v[i], lo[i], hi[i]);
    return v;
  }
};

double safe_quality(const CurveFamily& family, const Vec3& v) {
  try {
    const double q = collapse_quality(family, CollapseParams::from_array(v));
    return std::isfinite(q) ? q : kInf;
  } catch (const DomainError&) {
    return kInf;
  } catch (const DegenerateInputError&) {
    return kInf;
  }
}

struct NelderMeadOutcome {
  Vec3 best;
  double f;
  bool converged;
};

NelderMeadOutcome nelder_mead(const CurveFamily& family, const Vec3& start, const Box& box,
                              const CollapseOptions& opt, int restart, std::vector<TraceEntry>& trace) {
  std::array<Vec3, 4> v;
  std::array<double, 4> f;
  v[0] = box.clip(start);
  for (int i = 0; i < 3; ++i) {
    Vec3 w = v[0];
    const double step = 0.1 * box.scale[i];
    w[i] += step;
    w = box.clip(w);
    if (w[i] == v[0][i]) w[i] = std::clamp(v[0][i] - step, box.lo[i], box.hi[i]);
    v[i + 1] = w;
  }
  for (int i = 0; i < 4; ++i) f[i] = safe_quality(family, v[i]);

  auto order = [&]() {
    std::array<int, 4> idx{0, 1, 2, 3};
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return f[a] < f[b]; });
    std::array<Vec3, 4> v2;
    std::array<double, 4> f2;
    for (int i = 0; i < 4; ++i) {
      v2[i] = v[idx[i]];
      f2[i] = f[idx[i]];
    }
    v = v2;
    f = f2;
  };

  for (int it = 0; it < opt.max_iterations; ++it) {
    order();
    trace.push_back({restart, it, CollapseParams::from_array(v[0]), f[0]});
    double extent = 0.0;
    for (int k = 1; k < 4; ++k) {
      for (int i = 0; i < 3; ++i) extent = std::max(extent, std::abs(v[k][i] - v[0][i]) / box.scale[i]);
    }
    const bool flat = std::isfinite(f[3]) && f[3] - f[0] <= opt.f_tol * std::max(1.0, std::abs(f[0]));
    if (flat && extent <= opt.x_tol) return {v[0], f[0], true};
    if (extent <= 1e-14) return {v[0], f[0], true};  // simplex cannot shrink further

    Vec3 centroid{0, 0, 0};
    for (int k = 0; k < 3; ++k) {
      for (int i = 0; i < 3; ++i) centroid[i] += v[k][i] / 3.0;
    }
    auto along = [&](double t) {
      Vec3 p;
      for (int i = 0; i < 3; ++i) p[i] = centroid[i] + t * (v[3][i] - centroid[i]);
      return box.clip(p);
    };
    const Vec3 xr = along(-1.0);
    const double fr = safe_quality(family, xr);
    if (fr < f[0]) {
      const Vec3 xe = along(-2.0);
      const double fe = safe_quality(family, xe);
      if (fe < fr) {
        v[3] = xe;
        f[3] = fe;
      } else {
        v[3] = xr;
        f[3] = fr;
      }
      continue;
    }
    if (fr < f[2]) {
      v[3] = xr;
      f[3] = fr;
      continue;
    }
    const bool outside = fr < f[3];
    const Vec3 xc = along(outside ? -0.5 : 0.5);
    const double fc = safe_quality(family, xc);
    if (fc < (outside ? fr : f[3])) {
      v[3] = xc;
      f[3] = fc;
      continue;
    }
    for (int k = 1; k < 4; ++k) {
      for (int i = 0; i < 3; ++i) v[k][i] = v[0][i] + 0.5 * (v[k][i] - v[0][i]);
      v[k] = box.clip(v[k]);
      f[k] = safe_quality(family, v[k]);
    }
  }
  order();
  return {v[0], f[0], false};
}

}  // namespace

CollapseResult optimize_collapse(const CurveFamily& family, const CollapseParams& initial, const CollapseBounds& bounds,
                                 const CollapseOptions& options) {
  if (options.restarts < 1) throw ArgumentError("at least one optimizer start is required");
  Box box;
  box.lo = bounds.lower.as_array();
  box.hi = bounds.upper.as_array();
  const Vec3 x0 = initial.as_array();
  for (int i = 0; i < 3; ++i) {
    if (!(box.lo[i] <= x0[i] && x0[i] <= box.hi[i])) throw ArgumentError("initial collapse parameters lie outside the bounds");
    box.scale[i] = finite_width(box.lo[i], box.hi[i]) && box.hi[i] > box.lo[i] ? box.hi[i] - box.lo[i]
                                                                                 : std::max(std::abs(x0[i]), 1.0);
  }

  CollapseResult result;
  Rng rng(options.seed);
  double best_f = kInf;
  Vec3 best = x0;
  bool all_converged = true;
  for (int r = 0; r < options.restarts; ++r) {
    Vec3 start = x0;
    if (r > 0) {
      for (int i = 0; i < 3; ++i) start[i] += options.jitter * box.scale[i] * rng.uniform(-1.0, 1.0);
      start = box.clip(start);
    }
    const auto outcome = nelder_mead(family, start, box, options, r, result.trace);
    all_converged = all_converged && outcome.converged;
    if (outcome.f < best_f) {
      best_f = outcome.f;
      best = outcome.best;
    }
  }
  if (!std::isfinite(best_f)) throw DegenerateInputError("no parameter point inside the bounds yields a usable collapse");

  result.params = CollapseParams::from_array(best);
  const auto detail = collapse_quality_detail(family, result.params);
  result.Q = detail.Q;
  result.n_points_used = detail.used;
  result.n_points_excluded = detail.excluded;
  result.converged = all_converged;
  if (!all_converged) result.warnings.push_back("maximum iterations reached before convergence; best point returned");
  if (detail.excluded > 0) {
    result.warnings.push_back(std::to_string(detail.excluded) + " points had no bracketing neighbours and were excluded");
  }
  for (int i = 0; i < 3; ++i) {
    if (finite_width(box.lo[i], box.hi[i]) && (best[i] <= box.lo[i] || best[i] >= box.hi[i])) {
      static constexpr const char* kNames[3] = {"x_c", "zeta", "nu"};
      result.warnings.push_back(std::string(kNames[i]) + " is at its bound");
    }
  }
  // Size dependence is negligible when neither axis is rescaled by more than
  // a few percent across the family: the collapse carries no information.
  const double span = std::log(family.max_size() / family.min_size());
  const double y_stretch = std::abs(result.params.zeta / result.params.nu) * span;
  const double x_stretch = span / std::abs(result.params.nu);
  const bool nu_at_upper = finite_width(box.lo[2], box.hi[2]) && best[2] >= box.hi[2] * (1 - 1e-9);
  result.degenerate = y_stretch < 0.05 && (x_stretch < 0.05 || nu_at_upper);
  if (result.degenerate) result.warnings.push_back("degenerate: the data show no size dependence");
  if (family.sigma_assigned()) result.warnings.push_back("no sigma column: uniform sigma = 1, Q is relative only");
  return result;
}

}  // namespace dtc
