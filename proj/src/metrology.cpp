#include "dtc/metrology.hpp"

#include <algorithm>
#include <cmath>

#include "dtc/errors.hpp"

namespace dtc {

TangentPair TangentPair::start(StateVector psi0) {
  const Eigen::Index dim = psi0.dimension();
  return TangentPair{std::move(psi0), Eigen::VectorXcd::Zero(dim)};
}

double TangentPair::norm_identity_residual() const { return std::abs(psi.amplitudes().dot(dpsi).real()); }

void tangent_step(TangentPair& pair, const FloquetEngine& engine) {
  if (pair.sites() != engine.sites() || pair.dpsi.size() != pair.psi.dimension()) {
    throw DimensionError("tangent pair does not match the Floquet spec");
  }
  const auto phases = engine.phases();
  const auto energies = engine.energies();
  cplx* psi = pair.psi.amplitudes().data();
  cplx* d = pair.dpsi.data();
  const std::size_t dim = phases.size();
  for (std::size_t z = 0; z < dim; ++z) {
    const cplx a = phases[z] * psi[z];
    d[z] = phases[z] * d[z] + cplx(0.0, -energies[z]) * a;
    psi[z] = a;
  }
  engine.apply_x_layer({psi, dim});
  engine.apply_x_layer({d, dim});
}

TangentPair tangent_step(TangentPair pair, const FloquetSpec& spec) {
  tangent_step(pair, FloquetEngine(spec));
  return pair;
}

TangentPair tangent_evolve(TangentPair pair, const FloquetEngine& engine, std::size_t periods,
                           const TangentObserver& observer) {
  for (std::size_t n = 1; n <= periods; ++n) {
    tangent_step(pair, engine);
    if (n % kNormCheckInterval == 0) {
      const double drift = std::abs(pair.psi.norm() - 1.0);
      if (!(drift <= kNormTolerance)) {
        throw NumericalFailureError("norm drifted by " + std::to_string(drift) + " after " + std::to_string(n) +
                                    " periods");
      }
    }
    if (observer) observer(n, pair);
  }
  return pair;
}

double qfi(const TangentPair& pair) {
  const double dd = pair.dpsi.squaredNorm();
  const double overlap = std::norm(pair.dpsi.dot(pair.psi.amplitudes()));
  return std::max(0.0, 4.0 * (dd - overlap));
}

CfiResult cfi_computational(const TangentPair& pair, double floor) {
  if (!(floor > 0.0)) throw ArgumentError("probability floor must be positive");
  CfiResult r;
  const auto& psi = pair.psi.amplitudes();
  for (Eigen::Index z = 0; z < psi.size(); ++z) {
    const double p = std::norm(psi[z]);
    if (p <= floor) {
      r.skipped_mass += p;
      ++r.skipped_outcomes;
      continue;
    }
    const double dp = 2.0 * (std::conj(psi[z]) * pair.dpsi[z]).real();
    r.value += dp * dp / p;
  }
  return r;
}

std::vector<FisherSample> fisher_at(const FloquetSpec& spec, const StateVector& psi0,
                                    std::span<const std::size_t> periods) {
  std::vector<FisherSample> out(periods.size());
  std::size_t longest = 0;
  for (std::size_t i = 0; i < periods.size(); ++i) {
    out[i].period = periods[i];
    longest = std::max(longest, periods[i]);
  }
  auto record = [&](std::size_t n, const TangentPair& pair) {
    bool computed = false;
    FisherSample s{n, 0.0, 0.0};
    for (auto& o : out) {
      if (o.period != n) continue;
      if (!computed) {
        s.qfi = qfi(pair);
        s.cfi = cfi_computational(pair).value;
        computed = true;
      }
      o = s;
    }
  };
  TangentPair pair = TangentPair::start(psi0);
  record(0, pair);
  tangent_evolve(std::move(pair), FloquetEngine(spec), longest, record);
  return out;
}

double qfi_at(const FloquetSpec& spec, const StateVector& psi0, std::size_t periods) {
  return qfi(tangent_evolve(TangentPair::start(psi0), FloquetEngine(spec), periods));
}

TimeAveragedFisher time_averaged_fi(const FloquetSpec& spec, const StateVector& psi0, std::size_t samples,
                                    std::size_t stride) {
  if (samples < 1) throw ArgumentError("time average needs at least one sample");
  if (stride < 1) throw ArgumentError("sampling stride must be >= 1");
  TimeAveragedFisher avg{0.0, 0.0};
  tangent_evolve(TangentPair::start(psi0), FloquetEngine(spec), samples * stride,
                 [&](std::size_t n, const TangentPair& pair) {
                   if (n % stride != 0) return;
                   avg.qfi += qfi(pair);
                   avg.cfi += cfi_computational(pair).value;
                 });
  avg.qfi /= static_cast<double>(samples);
  avg.cfi /= static_cast<double>(samples);
  return avg;
}

std::vector<double> log_grid(double lo, double hi, int per_decade) {
  if (!(lo > 0.0) || !(hi >= lo)) throw ArgumentError("log grid needs 0 < lo <= hi");
  if (per_decade < 1) throw ArgumentError("points per decade must be >= 1");
  const double slack = 1e-9;
  const auto k_lo = static_cast<long>(std::ceil(std::log10(lo * (1 - slack)) * per_decade));
  const auto k_hi = static_cast<long>(std::floor(std::log10(hi * (1 + slack)) * per_decade));
  std::vector<double> grid;
  for (long k = k_lo; k <= k_hi; ++k) {
    const double v = std::pow(10.0, static_cast<double>(k) / per_decade);
    if (v >= lo * (1 - slack) && v <= hi * (1 + slack)) grid.push_back(v);
  }
  return grid;
}

std::vector<double> dtc_boundary_grid(int per_decade) { return log_grid(1e-4 * kHalfPi, 1e-1 * kHalfPi, per_decade); }

PeakEstimate find_peak(std::span<const double> grid, std::span<const double> values) {
  if (grid.size() != values.size()) throw DimensionError("grid and values differ in length");
  if (grid.size() < 8) throw ArgumentError("peak search needs at least 8 grid points");
  if (!std::is_sorted(grid.begin(), grid.end())) throw ArgumentError("peak search grid must be sorted");
  const auto it = std::max_element(values.begin(), values.end());
  const auto i = static_cast<std::size_t>(it - values.begin());
  PeakEstimate peak{grid[i], values[i], i, i == 0 || i + 1 == grid.size()};
  if (peak.at_boundary) return peak;

  // Vertex of the parabola through three (possibly unevenly spaced) points.
  const double x0 = grid[i - 1], x1 = grid[i], x2 = grid[i + 1];
  const double y0 = values[i - 1], y1 = values[i], y2 = values[i + 1];
  const double d01 = (y1 - y0) / (x1 - x0);
  const double d12 = (y2 - y1) / (x2 - x1);
  const double a = (d12 - d01) / (x2 - x0);
  if (!(a < 0.0)) return peak;
  const double b = d01 - a * (x0 + x1);
  const double xv = std::clamp(-b / (2.0 * a), x0, x2);
  peak.omega = xv;
  peak.value = y1 + (xv - x1) * (d01 + a * (xv - x0));
  return peak;
}

PeakEstimate find_omega_max(const FloquetSpec& tmpl, std::span<const double> omega_grid, const StateVector& psi0,
                            std::size_t periods) {
  std::vector<double> values(omega_grid.size());
  for (std::size_t i = 0; i < omega_grid.size(); ++i) {
    values[i] = qfi_at(tmpl.with_deviation(omega_grid[i]), psi0, periods);
  }
  return find_peak(omega_grid, values);
}

PowerLawFit powerlaw_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("x and y differ in length");
  if (x.size() < 3) throw ArgumentError("power-law fit needs at least 3 points");
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("power-law fit needs strictly positive data");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  const double cxx = sxx - sx * sx / n;
  const double cxy = sxy - sx * sy / n;
  const double cyy = syy - sy * sy / n;
  if (!(cxx > 0.0)) throw DegenerateInputError("power-law fit needs at least two distinct x values");
  const double slope = cxy / cxx;
  const double intercept = (sy - slope * sx) / n;
  const double r2 = cyy > 0.0 ? (cxy * cxy) / (cxx * cyy) : 1.0;
  return {slope, std::exp(intercept), r2};
}

bool satisfies_hierarchy(double qfi, double cfi) {
  return qfi >= 0.0 && cfi >= 0.0 && cfi <= qfi + kHierarchyRelativeSlack * qfi + kHierarchyAbsoluteSlack;
}

}  // namespace dtc
