#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "dtc/lattice.hpp"
#include "dtc/spectrum.hpp"

namespace dtc {

enum class Observable { Fidelity, Qfi, Cfi, Entropies, Pairing };

std::string to_string(Observable o);
Observable parse_observable(const std::string& text);
/// Observables computed from time evolution (as opposed to the spectrum).
bool is_dynamical(Observable o);

/// One experiment: the cross product of sizes, epsilons and omegas, each
/// repeated over disorder realizations.
///
/// JSON fields (all optional except L, omega, observables):
///   L              int or [int]
///   omega          number, [number], {"log": {min, max, per_decade}} or
///                  {"linear": {min, max, count}}
///   omega_units    "rad" (default) or "half_pi" (values are multiples of pi/2)
///   epsilon        number, [number] or {"linear": {min, max, count}}; default 0
///   pulse_mode     "uniform" (default) or "site-random"
///   disorder       D >= 0; default 0
///   realizations   R >= 1; default 1
///   initial_state  "all-up" (default), "neel", "basis:<z>", "random:<seed>"
///   cycles         int, [int] or {"range": {start, stop, step}} (stop inclusive)
///   observables    non-empty subset of fidelity, qfi, cfi, entropies, pairing
///   output_dir     default "out"
///   master_seed    default 0
///   degenerate_basis  "localized" (default) or "generic"
///   pairing_tolerance, probability_floor, per_state_entropies, threads
struct RunConfig {
  std::vector<int> L;
  std::vector<double> omega;  // radians
  std::vector<double> epsilon{0.0};
  PulseMode pulse_mode = PulseMode::Uniform;
  double disorder = 0.0;
  int realizations = 1;
  InitialState initial_state;
  std::vector<std::size_t> cycles;  // ascending, unique
  std::vector<Observable> observables;
  std::string output_dir = "out";
  std::uint64_t master_seed = 0;
  DegenerateBasis degenerate_basis = DegenerateBasis::Localized;
  double pairing_tolerance = 0.05;
  double probability_floor = 1e-12;
  bool per_state_entropies = false;
  int threads = 1;

  bool wants(Observable o) const;
  bool wants_dynamics() const;
  bool wants_spectrum() const;
  std::size_t grid_points() const { return L.size() * epsilon.size() * omega.size(); }

  /// Parses and validates; ValidationError carries the JSON path of the field.
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);
  /// Canonical, fully resolved form (grids expanded, units in radians).
  nlohmann::json to_json() const;

  /// Re-checks invariants of a programmatically built config.
  void validate() const;
  /// ResourceLimitError if any requested work exceeds the size guards.
  void check_resources() const;
};

}  // namespace dtc
