#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <json.hpp>

#include "dtc/csv.hpp"
#include "dtc/expcli/config.hpp"
#include "dtc/lattice.hpp"

namespace dtc {

/// Everything a run produced. Tables are keyed by file stem:
///   fidelity       L,omega_rad,epsilon,realization,seed,n,F
///   fidelity_mean  L,omega_rad,epsilon,n,F_mean,F_std,realizations
///   fisher         L,omega_rad,epsilon,n,FQ,FC,seed
///   fisher_mean    L,omega_rad,epsilon,n,FQ_mean,FQ_std,FC_mean,FC_std,realizations
///   spectrum       L,omega_rad,epsilon,realization,seed,S_EE_mean,S_DE_mean,
///                  S_EE_page,S_DE_page,pairing_fraction,largest_degenerate_cluster,
///                  min_tie_break_gap
///   spectrum_mean  L,omega_rad,epsilon,S_EE_mean,S_DE_mean,S_EE_page,S_DE_page,
///                  pairing_fraction,realizations
///   states_g<g>_r<r>  k,phase,S_EE,S_DE  (per_state_entropies only)
/// Row order follows the work-unit order, independent of thread count.
struct ResultSet {
  RunConfig config;
  std::map<std::string, io::Table> tables;
  /// Config echo, per-unit seeds, PRNG, library versions, wall-times.
  nlohmann::json manifest;

  bool has(const std::string& name) const { return tables.count(name) != 0; }
  /// MissingColumnError naming the table if absent.
  const io::Table& table(const std::string& name) const;

  /// Creates `dir` and writes <name>.csv for every table plus manifest.json.
  void write(const std::string& dir) const;
};

/// Grid index of (L, epsilon, omega) positions: L-major, omega fastest.
std::uint32_t grid_index(const RunConfig& config, std::size_t l, std::size_t e, std::size_t w);

/// Model of one work unit. Coupling disorder is drawn from `seed`, site-random
/// pulse deviations from splitmix64(seed).
FloquetSpec unit_spec(const RunConfig& config, int L, double omega, double epsilon, std::uint64_t seed);

/// Validates, applies the resource guards (refusing the whole run), then
/// executes every (grid point, realization) work unit.
ResultSet run(const RunConfig& config);

/// Library and toolchain versions recorded in manifests.
nlohmann::json version_info();

}  // namespace dtc
