#pragma once

#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dtc/lattice.hpp"

namespace dtc {

/// Basis chosen inside an exactly degenerate eigenspace.
enum class DegenerateBasis {
  /// Canonical tie-break basis rotated by a fixed seeded Haar-random unitary:
  /// typical vectors of the eigenspace, still reproducible bit for bit.
  Generic,
  /// Canonical tie-break basis itself (maximally localized in W, see below).
  Localized,
};

std::string to_string(DegenerateBasis basis);
/// "localized" or "generic"; ArgumentError otherwise.
DegenerateBasis parse_degenerate_basis(const std::string& text);

struct DiagonalizeOptions {
  /// Eigenvalues of (U + U^dagger)/2 closer than this are solved together.
  double cosine_cluster_tol = 1e-6;
  /// Eigenphases closer than this (circularly) count as degenerate; the basis
  /// inside such a cluster is fixed by a deterministic tie-break.
  double degeneracy_tol = 1e-9;
  /// Maximum allowed |U - V diag(e^{-i phi}) V^dagger| and |V^dagger V - I|.
  double check_tol = 1e-8;
  DegenerateBasis degenerate_basis = DegenerateBasis::Localized;
  std::uint64_t basis_seed = 0x5eed0f10c;
};

/// Complete eigensystem of the one-period unitary, U = sum_k e^{-i phi_k} |k><k|.
///
/// U commutes with the global spin flip, so every eigenvector is chosen with
/// definite flip parity. Inside a degenerate eigenspace of one parity sector
/// a canonical basis diagonalizes the flip-symmetric diagonal operator
/// W_z = min(z, 2^L-1-z) + 1; any degeneracy W leaves is split by a fixed
/// pseudo-random flip-symmetric diagonal operator, and each vector's phase is
/// fixed by its largest component. With DegenerateBasis::Generic the canonical
/// basis is then rotated by a seeded Haar unitary. Either way per-state
/// quantities such as entropies do not depend on the eigensolver; their
/// averages do depend on the choice, since entropies are not basis invariant.
struct FloquetSpectrum {
  int L = 0;
  /// Eigenphases in (-pi, pi], ascending.
  std::vector<double> phases;
  /// +1 or -1 under the global spin flip.
  std::vector<int> parity;
  /// Eigenvectors as columns, computational basis.
  Eigen::MatrixXcd vectors;
  double reconstruction_residual = 0.0;
  double orthonormality_residual = 0.0;
  /// Size of the largest degenerate cluster seen.
  std::size_t largest_degenerate_cluster = 0;
  /// Smallest eigenvalue gap of the tie-break operators inside any degenerate
  /// cluster (infinite when there is none). Near zero means part of the basis
  /// is still solver-dependent.
  double min_tie_break_gap = std::numeric_limits<double>::infinity();

  std::size_t size() const noexcept { return phases.size(); }
  StateVector state(std::size_t k) const;
};

/// Throws ResourceLimitError above kMaxDenseSites and NumericalFailureError
/// when the checks exceed options.check_tol.
FloquetSpectrum diagonalize_floquet(const FloquetSpec& spec, const DiagonalizeOptions& options = {});

/// Maps an angle onto (-pi, pi].
double wrap_phase(double phi);
/// Distance on the circle, in [0, pi].
double circular_distance(double a, double b);

struct HalfChainEntropies {
  double entanglement;  // -Tr rho ln rho
  double diagonal;      // -sum_z rho_zz ln rho_zz
};

/// Entropies of the left half (sites 1..L/2) after tracing out the right
/// half, i.e. the L/2 least significant bits. Natural log.
HalfChainEntropies half_chain_entropies(const StateVector& state);
HalfChainEntropies half_chain_entropies(std::span<const cplx> amplitudes, int L);

/// (L ln 2 - 1)/2.
double page_entanglement_entropy(int L);
/// ln(0.48 * 2^(L/2)) + ln 2.
double page_diagonal_entropy(int L);

struct EntropyReport {
  int L = 0;
  std::vector<double> phases;
  std::vector<double> entanglement;
  std::vector<double> diagonal;
  double mean_entanglement = 0.0;
  double mean_diagonal = 0.0;

  double page_entanglement() const { return page_entanglement_entropy(L); }
  double page_diagonal() const { return page_diagonal_entropy(L); }
};

EntropyReport entropy_report(const FloquetSpectrum& spectrum);
/// diagonalize_floquet followed by entropy_report.
EntropyReport averaged_entropies(const FloquetSpec& spec, const DiagonalizeOptions& options = {});

/// Fraction of phases matched to a distinct partner lying pi away within
/// `tolerance`, using greedy one-to-one matching in ascending phase order.
double pi_pairing_measure(std::span<const double> phases, double tolerance);
inline double pi_pairing_measure(const FloquetSpectrum& s, double tolerance) {
  return pi_pairing_measure(s.phases, tolerance);
}

/// CSV with header `k,phase,S_EE,S_DE`.
void write_entropy_csv(std::ostream& out, const EntropyReport& report);

}  // namespace dtc
