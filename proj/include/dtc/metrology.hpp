#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dtc/evolve.hpp"
#include "dtc/lattice.hpp"

namespace dtc {

/// Default probability floor for the computational-basis CFI.
inline constexpr double kDefaultProbabilityFloor = 1e-12;
/// Relative slack of the F_C <= F_Q check.
inline constexpr double kHierarchyRelativeSlack = 1e-8;
/// Absolute slack of the F_C <= F_Q check. Needed when F_Q is exactly zero
/// and F_C is pure roundoff (~1e-30).
inline constexpr double kHierarchyAbsoluteSlack = 1e-12;

/// A state and its exact derivative with respect to Omega, co-propagated.
struct TangentPair {
  StateVector psi;
  Eigen::VectorXcd dpsi;

  /// Pair at n = 0: the derivative of a fixed initial state is zero.
  static TangentPair start(StateVector psi0);

  int sites() const noexcept { return psi.sites(); }
  /// |Re <psi|dpsi>|, zero for exact arithmetic.
  double norm_identity_residual() const;
};

/// psi' = P D psi, dpsi' = P (D dpsi - i H_I D psi).
void tangent_step(TangentPair& pair, const FloquetEngine& engine);
TangentPair tangent_step(TangentPair pair, const FloquetSpec& spec);

using TangentObserver = std::function<void(std::size_t period, const TangentPair& pair)>;
TangentPair tangent_evolve(TangentPair pair, const FloquetEngine& engine, std::size_t periods,
                           const TangentObserver& observer = {});

/// F_Q = 4 (<d|d> - |<d|psi>|^2), clamped at zero.
double qfi(const TangentPair& pair);

struct CfiResult {
  double value = 0.0;
  /// Total probability of outcomes at or below the floor (not summed).
  double skipped_mass = 0.0;
  std::size_t skipped_outcomes = 0;
};

/// Fisher information of a computational-basis measurement.
CfiResult cfi_computational(const TangentPair& pair, double floor = kDefaultProbabilityFloor);

struct FisherSample {
  std::size_t period;
  double qfi;
  double cfi;
};

/// F_Q and F_C after each listed period count (any order, duplicates allowed).
std::vector<FisherSample> fisher_at(const FloquetSpec& spec, const StateVector& psi0,
                                    std::span<const std::size_t> periods);

/// F_Q after `periods` periods.
double qfi_at(const FloquetSpec& spec, const StateVector& psi0, std::size_t periods);

struct TimeAveragedFisher {
  double qfi;
  double cfi;
};

/// Means of F_Q and F_C over periods stride, 2 stride, ..., samples*stride.
/// stride = 2 averages over stroboscopic times 2nT, n = 1..samples.
TimeAveragedFisher time_averaged_fi(const FloquetSpec& spec, const StateVector& psi0, std::size_t samples,
                                    std::size_t stride = 1);

/// 10^(k/per_decade) for every integer k with the value inside [lo, hi]
/// (relative slack 1e-9 at both ends), ascending.
std::vector<double> log_grid(double lo, double hi, int per_decade);

/// Log grid over the window where the DTC boundary sits at desk sizes,
/// omega in [1e-4, 1e-1] * pi/2.
std::vector<double> dtc_boundary_grid(int per_decade = 40);

struct PeakEstimate {
  double omega;       // refined location
  double value;       // refined maximum
  std::size_t index;  // grid argmax
  bool at_boundary;   // argmax on the first or last grid point
};

/// Argmax over a sorted grid refined by the parabola through the peak triple.
PeakEstimate find_peak(std::span<const double> grid, std::span<const double> values);

/// QFI peak in omega for the given period count. All other spec fields come
/// from the template.
PeakEstimate find_omega_max(const FloquetSpec& tmpl, std::span<const double> omega_grid, const StateVector& psi0,
                            std::size_t periods);

struct PowerLawFit {
  double exponent;
  double prefactor;
  double r2;
};

/// Least squares line through (ln x, ln y).
PowerLawFit powerlaw_fit(std::span<const double> x, std::span<const double> y);

struct SensitivityRecord {
  int L;
  double omega;
  double epsilon;
  std::size_t n;
  double qfi;
  double cfi;
  std::uint64_t seed;
  std::string profile;
};

bool satisfies_hierarchy(double qfi, double cfi);
inline bool satisfies_hierarchy(const SensitivityRecord& r) { return satisfies_hierarchy(r.qfi, r.cfi); }

}  // namespace dtc
