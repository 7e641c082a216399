#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "dtc/lattice.hpp"

namespace dtc {

/// Norm drift allowed before an evolution is declared numerically failed.
inline constexpr double kNormTolerance = 1e-10;
/// Periods between norm checks.
inline constexpr std::size_t kNormCheckInterval = 1000;

namespace kernels {

/// psi_z <- phase_z psi_z.
void multiply_diagonal(std::span<cplx> amplitudes, std::span<const cplx> phases);

/// Applies exp(-i Phi_j sigma^x_j) for every site, Phi_j = angles[j-1].
void x_layer(std::span<cplx> amplitudes, int L, std::span<const double> angles);

/// exp(-i theta sigma^x) on one 1-based site.
void x_rotation(std::span<cplx> amplitudes, int L, int site, double theta);

/// exp(-i theta sigma^z_a sigma^z_b) on 1-based sites a, b.
void zz_rotation(std::span<cplx> amplitudes, int L, int site_a, int site_b, double theta);

}  // namespace kernels

/// Precomputed per-spec data for repeated Floquet periods: the diagonal
/// energies, phases exp(-i Omega E_z), and pulse angles.
class FloquetEngine {
 public:
  explicit FloquetEngine(const FloquetSpec& spec);

  const FloquetSpec& spec() const noexcept { return spec_; }
  int sites() const noexcept { return spec_.sites(); }
  std::span<const double> energies() const noexcept { return energies_; }
  std::span<const cplx> phases() const noexcept { return phases_; }

  void apply_diagonal(std::span<cplx> amplitudes) const;
  void apply_x_layer(std::span<cplx> amplitudes) const;
  /// One period: diagonal phase, then the X layer.
  void step(std::span<cplx> amplitudes) const;
  void step(StateVector& psi) const;

 private:
  FloquetSpec spec_;
  std::vector<double> energies_;
  std::vector<cplx> phases_;
};

StateVector apply_diagonal(StateVector psi, double Omega, const CouplingProfile& coupling);
StateVector apply_x_layer(StateVector psi, const PulseProfile& pulse);
StateVector floquet_step(StateVector psi, const FloquetSpec& spec);

/// Callback invoked after each period with the period index (1-based).
using PeriodObserver = std::function<void(std::size_t period, const StateVector& psi)>;

/// Applies n periods. Norm is checked every kNormCheckInterval periods.
StateVector evolve(StateVector psi, const FloquetSpec& spec, std::size_t periods);
StateVector evolve(StateVector psi, const FloquetEngine& engine, std::size_t periods,
                   const PeriodObserver& observer = {});

/// |<psi0|U_F^n|psi0>|^2.
double revival_fidelity(const FloquetSpec& spec, const StateVector& psi0, std::size_t periods);

/// Mean revival fidelity over the listed period counts.
double average_fidelity(const FloquetSpec& spec, const StateVector& psi0, std::span<const std::size_t> periods);

struct TrajectoryPoint {
  std::size_t n;
  double fidelity;
  double norm;
};

/// Fidelity and norm after every period 1..periods (n = 0 row included).
std::vector<TrajectoryPoint> fidelity_trajectory(const FloquetSpec& spec, const StateVector& psi0,
                                                 std::size_t periods);
/// CSV with header `n,F,norm`.
void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryPoint> trajectory);

/// Dense one-period unitary. Column k is floquet_step(|k>).
struct DenseUnitary {
  int L;
  Eigen::MatrixXcd matrix;

  /// max |U^dagger U - I|.
  double unitarity_defect() const;
};

DenseUnitary build_dense_unitary(const FloquetSpec& spec);

double overlap_probability(const StateVector& a, const StateVector& b);

}  // namespace dtc
