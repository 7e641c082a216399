#include "dtc/lattice.hpp"

#include <bit>
#include <cmath>

#include "dtc/errors.hpp"
#include "dtc/random.hpp"

namespace dtc {

void require_even_chain(int L) {
  if (L < 2 || L % 2 != 0) {
    throw UnsupportedConfigurationError("chain length must be even and >= 2, got L=" + std::to_string(L));
  }
  if (L > kMaxDynamicsSites) {
    throw ResourceLimitError("L=" + std::to_string(L) + " exceeds the dynamics limit of " +
                             std::to_string(kMaxDynamicsSites) + " sites");
  }
}

SpinBasisState::SpinBasisState(std::uint64_t z, int L) : z_(z), L_(L) {
  if (L < 1 || L > 63) throw ArgumentError("site count out of range: " + std::to_string(L));
  if (z >= hilbert_dim(L)) {
    throw IndexError("basis label " + std::to_string(z) + " out of range for L=" + std::to_string(L));
  }
}

int SpinBasisState::down_count() const noexcept { return std::popcount(z_); }

CouplingProfile CouplingProfile::clean(int L) {
  require_even_chain(L);
  CouplingProfile p;
  p.coefficients_.resize(L - 1);
  p.disorder_.assign(L - 1, 0.0);
  for (int j = 1; j < L; ++j) p.coefficients_[j - 1] = j;
  return p;
}

CouplingProfile CouplingProfile::disordered(int L, double strength, std::uint64_t seed) {
  if (!(strength >= 0.0)) throw ArgumentError("disorder strength must be >= 0");
  CouplingProfile p = clean(L);
  p.strength_ = strength;
  p.seed_ = seed;
  if (strength == 0.0) return p;
  Rng rng(seed);
  for (int j = 1; j < L; ++j) {
    const double d = rng.uniform(-strength, strength);
    p.disorder_[j - 1] = d;
    p.coefficients_[j - 1] = j * (1.0 - d);
  }
  return p;
}

std::string to_string(PulseMode mode) { return mode == PulseMode::Uniform ? "uniform" : "site-random"; }

PulseMode parse_pulse_mode(const std::string& text) {
  if (text == "uniform") return PulseMode::Uniform;
  if (text == "site-random") return PulseMode::SiteRandom;
  throw ArgumentError("unknown pulse mode '" + text + "'");
}

PulseProfile PulseProfile::uniform(int L, double epsilon) {
  require_even_chain(L);
  PulseProfile p;
  p.angles_.assign(L, (1.0 - epsilon) * kHalfPi);
  p.epsilon_ = epsilon;
  return p;
}

PulseProfile PulseProfile::site_random(int L, double epsilon, std::uint64_t seed) {
  require_even_chain(L);
  PulseProfile p;
  p.epsilon_ = epsilon;
  p.mode_ = PulseMode::SiteRandom;
  p.seed_ = seed;
  p.angles_.resize(L);
  Rng rng(seed);
  for (int j = 0; j < L; ++j) p.angles_[j] = (1.0 - rng.uniform(-epsilon, epsilon)) * kHalfPi;
  return p;
}

PulseProfile PulseProfile::from_angles(std::vector<double> angles) {
  require_even_chain(static_cast<int>(angles.size()));
  PulseProfile p;
  p.angles_ = std::move(angles);
  p.mode_ = PulseMode::SiteRandom;
  return p;
}

FloquetSpec::FloquetSpec(double Omega, CouplingProfile coupling, PulseProfile pulse)
    : Omega_(Omega), coupling_(std::move(coupling)), pulse_(std::move(pulse)) {
  if (coupling_.sites() != pulse_.sites()) {
    throw DimensionError("coupling covers " + std::to_string(coupling_.sites()) + " sites but pulse covers " +
                         std::to_string(pulse_.sites()));
  }
  if (!std::isfinite(Omega_)) throw ArgumentError("Omega must be finite");
}

FloquetSpec FloquetSpec::from_deviation(double omega, CouplingProfile coupling, PulseProfile pulse) {
  return FloquetSpec(kHalfPi - omega, std::move(coupling), std::move(pulse));
}

FloquetSpec FloquetSpec::clean(int L, double omega, double epsilon) {
  return from_deviation(omega, CouplingProfile::clean(L), PulseProfile::uniform(L, epsilon));
}

double diag_energy(const SpinBasisState& state, const CouplingProfile& coupling) {
  if (state.sites() != coupling.sites()) {
    throw DimensionError("state has " + std::to_string(state.sites()) + " sites, coupling has " +
                         std::to_string(coupling.sites()));
  }
  const auto c = coupling.coefficients();
  double e = 0.0;
  for (int j = 1; j < state.sites(); ++j) e += c[j - 1] * state.spin(j) * state.spin(j + 1);
  return e;
}

std::vector<double> diag_energies(const CouplingProfile& coupling) {
  const int L = coupling.sites();
  const auto c = coupling.coefficients();
  const std::uint64_t dim = hilbert_dim(L);
  std::vector<double> energies(dim);
  for (std::uint64_t z = 0; z < dim; ++z) {
    // Bond j joins bits L-j and L-j-1; aligned bits give +c_j.
    const std::uint64_t domain_walls = z ^ (z >> 1);
    double e = 0.0;
    for (int j = 1; j < L; ++j) e += ((domain_walls >> (L - j - 1)) & 1U) ? -c[j - 1] : c[j - 1];
    energies[z] = e;
  }
  return energies;
}

cplx dtc_phase(const SpinBasisState& state) {
  const int L = state.sites();
  if (L % 2 != 0) throw UnsupportedConfigurationError("dtc_phase requires even L");
  static constexpr cplx kMinusIPowers[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
  const cplx phase = kMinusIPowers[(L / 2) % 4];
  return (state.down_count() % 2 == 0) ? phase : -phase;
}

StateVector::StateVector(int L, Eigen::VectorXcd amplitudes) : L_(L), amplitudes_(std::move(amplitudes)) {
  if (L < 1 || L > kMaxDynamicsSites) throw ArgumentError("site count out of range: " + std::to_string(L));
  if (static_cast<std::uint64_t>(amplitudes_.size()) != hilbert_dim(L)) {
    throw DimensionError("amplitude vector has length " + std::to_string(amplitudes_.size()) +
                         ", expected 2^" + std::to_string(L));
  }
}

StateVector StateVector::basis(int L, std::uint64_t z) {
  const SpinBasisState label(z, L);
  Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(hilbert_dim(L)));
  amp[static_cast<Eigen::Index>(label.z())] = 1.0;
  return StateVector(L, std::move(amp));
}

InitialState InitialState::parse(const std::string& text) {
  if (text == "all-up") return all_up();
  if (text == "neel") return neel();
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const std::string head = text.substr(0, colon);
    const std::string tail = text.substr(colon + 1);
    std::size_t used = 0;
    std::uint64_t value = 0;
    try {
      value = std::stoull(tail, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == tail.size() && used > 0) {
      if (head == "basis") return basis(value);
      if (head == "random") return random(value);
    }
  }
  throw ArgumentError("unknown initial state '" + text + "' (expected all-up, neel, basis:<z>, random:<seed>)");
}

std::string InitialState::to_string() const {
  switch (kind) {
    case Kind::AllUp: return "all-up";
    case Kind::Neel: return "neel";
    case Kind::Basis: return "basis:" + std::to_string(z);
    case Kind::Random: return "random:" + std::to_string(seed);
  }
  return {};
}

std::uint64_t neel_index(int L) {
  std::uint64_t z = 0;
  for (int site = 2; site <= L; site += 2) z |= std::uint64_t{1} << (L - site);
  return z;
}

StateVector initial_state(const InitialState& kind, int L) {
  require_even_chain(L);
  switch (kind.kind) {
    case InitialState::Kind::AllUp: return StateVector::basis(L, 0);
    case InitialState::Kind::Basis: return StateVector::basis(L, kind.z);
    case InitialState::Kind::Neel: return StateVector::basis(L, neel_index(L));
    case InitialState::Kind::Random: {
      Rng rng(kind.seed);
      Eigen::VectorXcd amp(static_cast<Eigen::Index>(hilbert_dim(L)));
      for (Eigen::Index i = 0; i < amp.size(); ++i) {
        const double re = rng.normal();
        const double im = rng.normal();
        amp[i] = cplx(re, im);
      }
      amp /= amp.norm();
      return StateVector(L, std::move(amp));
    }
  }
  throw ArgumentError("unhandled initial state kind");
}

}  // namespace dtc
