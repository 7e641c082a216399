#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace dtc {

using cplx = std::complex<double>;

inline constexpr double kHalfPi = std::numbers::pi / 2.0;
/// Largest chain for state-vector dynamics.
inline constexpr int kMaxDynamicsSites = 24;
/// Largest chain for dense 2^L x 2^L work (unitaries, spectra).
inline constexpr int kMaxDenseSites = 12;

/// Throws UnsupportedConfigurationError unless 2 <= L <= kMaxDynamicsSites and L is even.
void require_even_chain(int L);

inline std::uint64_t hilbert_dim(int L) { return std::uint64_t{1} << L; }

/// Computational basis label. Site 1 is the most significant bit; bit value 0
/// is spin up, so z = 0 is the all-up state.
class SpinBasisState {
 public:
  SpinBasisState(std::uint64_t z, int L);

  std::uint64_t z() const noexcept { return z_; }
  int sites() const noexcept { return L_; }
  /// +1 (up) or -1 (down) for 1-based site k.
  int spin(int site) const noexcept { return ((z_ >> (L_ - site)) & 1U) ? -1 : 1; }
  /// Number of down spins.
  int down_count() const noexcept;
  SpinBasisState flipped() const noexcept { return SpinBasisState(hilbert_dim(L_) - 1 - z_, L_); }

 private:
  std::uint64_t z_;
  int L_;
};

/// Bond coefficients c_j = j (1 - d_j), j = 1..L-1.
class CouplingProfile {
 public:
  static CouplingProfile clean(int L);
  /// d_j uniform on [-D, D], drawn in bond order from Rng(seed).
  static CouplingProfile disordered(int L, double strength, std::uint64_t seed);

  int sites() const noexcept { return static_cast<int>(coefficients_.size()) + 1; }
  std::span<const double> coefficients() const noexcept { return coefficients_; }
  std::span<const double> disorder() const noexcept { return disorder_; }
  double strength() const noexcept { return strength_; }
  std::uint64_t seed() const noexcept { return seed_; }
  bool is_clean() const noexcept { return strength_ == 0.0; }

 private:
  CouplingProfile() = default;
  std::vector<double> coefficients_;
  std::vector<double> disorder_;
  double strength_ = 0.0;
  std::uint64_t seed_ = 0;
};

enum class PulseMode { Uniform, SiteRandom };

std::string to_string(PulseMode mode);
PulseMode parse_pulse_mode(const std::string& text);

/// Per-site X-rotation angles Phi_j = (1 - eps_j) pi/2.
class PulseProfile {
 public:
  static PulseProfile uniform(int L, double epsilon);
  /// eps_j uniform on [-epsilon, epsilon], drawn in site order from Rng(seed).
  static PulseProfile site_random(int L, double epsilon, std::uint64_t seed);
  /// Arbitrary angles; used by tests and the circuit importer.
  static PulseProfile from_angles(std::vector<double> angles);

  int sites() const noexcept { return static_cast<int>(angles_.size()); }
  std::span<const double> angles() const noexcept { return angles_; }
  double epsilon() const noexcept { return epsilon_; }
  PulseMode mode() const noexcept { return mode_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  PulseProfile() = default;
  std::vector<double> angles_;
  double epsilon_ = 0.0;
  PulseMode mode_ = PulseMode::Uniform;
  std::uint64_t seed_ = 0;
};

/// Full model: chain length, free-evolution angle Omega = J T, couplings and pulse.
///
/// Omega is stored; the deviation omega = pi/2 - Omega is derived and signed.
class FloquetSpec {
 public:
  FloquetSpec(double Omega, CouplingProfile coupling, PulseProfile pulse);
  static FloquetSpec from_deviation(double omega, CouplingProfile coupling, PulseProfile pulse);
  /// Clean chain with a uniform pulse.
  static FloquetSpec clean(int L, double omega, double epsilon);

  int sites() const noexcept { return coupling_.sites(); }
  double Omega() const noexcept { return Omega_; }
  double omega() const noexcept { return kHalfPi - Omega_; }
  const CouplingProfile& coupling() const noexcept { return coupling_; }
  const PulseProfile& pulse() const noexcept { return pulse_; }

  FloquetSpec with_Omega(double Omega) const { return FloquetSpec(Omega, coupling_, pulse_); }
  FloquetSpec with_deviation(double omega) const { return with_Omega(kHalfPi - omega); }

 private:
  double Omega_;
  CouplingProfile coupling_;
  PulseProfile pulse_;
};

/// E_z = sum_j c_j s_j s_{j+1}.
double diag_energy(const SpinBasisState& state, const CouplingProfile& coupling);

/// All 2^L diagonal energies, indexed by z.
std::vector<double> diag_energies(const CouplingProfile& coupling);

/// Exact value of exp(-i (pi/2) E_z) for the clean chain: (-i)^{L/2} (-1)^{u_z}.
cplx dtc_phase(const SpinBasisState& state);

/// Normalized amplitude vector of dimension 2^L.
class StateVector {
 public:
  StateVector(int L, Eigen::VectorXcd amplitudes);
  static StateVector basis(int L, std::uint64_t z);

  int sites() const noexcept { return L_; }
  Eigen::Index dimension() const noexcept { return amplitudes_.size(); }
  const Eigen::VectorXcd& amplitudes() const noexcept { return amplitudes_; }
  Eigen::VectorXcd& amplitudes() noexcept { return amplitudes_; }
  cplx operator[](std::uint64_t z) const { return amplitudes_[static_cast<Eigen::Index>(z)]; }
  double norm() const { return amplitudes_.norm(); }

 private:
  int L_;
  Eigen::VectorXcd amplitudes_;
};

struct InitialState {
  enum class Kind { AllUp, Basis, Neel, Random };
  Kind kind = Kind::AllUp;
  std::uint64_t z = 0;
  std::uint64_t seed = 0;

  static InitialState all_up() { return {}; }
  static InitialState basis(std::uint64_t z) { return {Kind::Basis, z, 0}; }
  static InitialState neel() { return {Kind::Neel, 0, 0}; }
  static InitialState random(std::uint64_t seed) { return {Kind::Random, 0, seed}; }

  /// "all-up", "neel", "basis:<z>", "random:<seed>".
  static InitialState parse(const std::string& text);
  std::string to_string() const;
};

/// Basis index of the alternating state starting with site 1 up.
std::uint64_t neel_index(int L);

/// Random kind draws independent standard complex Gaussians and normalizes.
StateVector initial_state(const InitialState& kind, int L);

}  // namespace dtc
