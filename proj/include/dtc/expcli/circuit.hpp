#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "dtc/lattice.hpp"

namespace dtc {

/// ZZ(theta) = exp(-i theta sigma^z_a sigma^z_b) on sites (a, a+1), or
/// X(theta) = exp(-i theta sigma^x_a). Sites are 1-based.
struct Gate {
  enum class Kind { ZZ, X };
  Kind kind;
  int site_a;
  int site_b;  // ZZ only; 0 for X
  double angle;

  static Gate zz(int a, int b, double angle) { return {Kind::ZZ, a, b, angle}; }
  static Gate x(int a, double angle) { return {Kind::X, a, 0, angle}; }
  bool operator==(const Gate&) const = default;
};

/// Layer durations and coherence time. A cycle is one ZZ layer plus one X layer.
///
/// The ZZ layer default (40 ns) is two consecutive ~20 ns two-qubit layers
/// (even bonds, then odd bonds); converting ZZ(theta) into a hardware
/// controlled-phase plus single-qubit phases is not performed here.
struct GateBudget {
  double zz_layer_ns = 40.0;
  double x_layer_ns = 20.0;
  double t2_star_ns = 6000.0;

  double cycle_ns() const { return zz_layer_ns + x_layer_ns; }
  /// floor(T2* / cycle duration).
  std::size_t max_cycles() const;
  nlohmann::json to_json() const;
};

/// One Floquet period as a gate list, repeated `cycles` times.
struct GateSchedule {
  int L = 0;
  std::size_t cycles = 0;
  /// L-1 ZZ gates on bonds 1..L-1, then L X gates on sites 1..L.
  std::vector<Gate> cycle;
  GateBudget budget;

  /// ArgumentError unless the per-cycle structure and angles are well formed.
  void validate() const;
  /// Whether the requested cycle count fits in the coherence budget.
  bool within_budget() const { return cycles <= budget.max_cycles(); }

  nlohmann::json to_json() const;
  static GateSchedule from_json(const nlohmann::json& j);
  /// Flat gate list: a `# L=<L> cycles=<n>` header, then one line per gate
  /// of a single cycle, `ZZ <a> <b> <angle>` or `X <a> <angle>`.
  std::string to_text() const;
  static GateSchedule from_text(const std::string& text);
};

/// Gate-level form of the drive: bond j gets ZZ angle c_j Omega, site j an X
/// angle Phi_j. Any chain length >= 2 is accepted at this level.
GateSchedule build_gate_schedule(std::span<const double> bond_coefficients, double Omega,
                                 std::span<const double> pulse_angles, std::size_t cycles,
                                 const GateBudget& budget = {});

/// Schedule reproducing U_F^n for the spec. ArgumentError if n < 1.
GateSchedule export_circuit(const FloquetSpec& spec, std::size_t n, const GateBudget& budget = {});

/// Applies the schedule gate by gate to an amplitude vector of dimension 2^L.
Eigen::VectorXcd simulate_schedule(const GateSchedule& schedule, const Eigen::VectorXcd& psi0);

}  // namespace dtc
