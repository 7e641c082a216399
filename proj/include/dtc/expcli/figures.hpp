#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dtc/csv.hpp"
#include "dtc/expcli/run.hpp"

namespace dtc {

/// Figure-data bundles, each a set of tidy CSVs named by role:
///   fidelity-trace          L,omega_rad,epsilon,n,F
///   fidelity-map            omega,epsilon,F_n<k>            (one file per L)
///   qfi-vs-omega            omega_rad,FQ                    (one file per L, epsilon, n)
///   qfi-vs-time             L,omega_rad,epsilon,n,FQ,FC
///   qfi-size-scaling        L,FQ_dtc,FQ_peak                (at one n)
///   qfi-collapse-input      L,x,y,sigma                     (x = omega_rad, y = FQ at one n)
///   fisher-time-averaged    L,omega_rad,epsilon,FQ_avg,FC_avg
///   entropy-vs-epsilon      L,omega_rad,epsilon,S_EE,S_DE
///   thermal-entropy         L,omega_rad,epsilon,S_EE,S_DE,S_EE_page,S_DE_page
///   entropy-collapse-input  L,x,y                           (x = epsilon, y = S_EE)
///   quasienergy-pairing     L,omega_rad,epsilon,pairing_fraction
///   ensemble-fidelity       L,omega_rad,epsilon,n,F_mean,F_std,realizations
///   ensemble-qfi            L,omega_rad,epsilon,n,FQ_mean,FQ_std,FC_mean,realizations
struct FigureOptions {
  /// Period count for single-time bundles; defaults to 100 for fidelity-map
  /// and to the smallest recorded period count > 0 otherwise.
  std::optional<std::size_t> n;
  /// Relative sigma assigned to FQ in qfi-collapse-input.
  double relative_sigma = 0.005;
};

using FigureBundle = std::vector<std::pair<std::string, io::Table>>;

std::vector<std::string> figure_ids();

/// MissingColumnError when the result set lacks the observable the bundle
/// needs; ArgumentError for an unknown id.
FigureBundle emit_figure_data(const ResultSet& results, const std::string& figure_id,
                              const FigureOptions& options = {});

/// Writes <name>.csv for every bundle entry into `dir` (created if needed).
void write_bundle(const FigureBundle& bundle, const std::string& dir);

}  // namespace dtc
