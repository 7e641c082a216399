#include "dtc/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "dtc/csv.hpp"
#include "dtc/errors.hpp"

namespace dtc {

namespace {

void require_dimension(std::span<const cplx> amplitudes, int L) {
  if (amplitudes.size() != hilbert_dim(L)) {
    throw DimensionError("amplitude vector has length " + std::to_string(amplitudes.size()) + ", expected 2^" +
                         std::to_string(L));
  }
}

void require_same_sites(int a, int b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": state has " + std::to_string(a) + " sites, profile has " +
                         std::to_string(b));
  }
}

std::span<cplx> span_of(StateVector& psi) {
  return {psi.amplitudes().data(), static_cast<std::size_t>(psi.dimension())};
}

void check_norm(const StateVector& psi, std::size_t period) {
  const double drift = std::abs(psi.norm() - 1.0);
  if (!(drift <= kNormTolerance)) {
    throw NumericalFailureError("norm drifted by " + std::to_string(drift) + " after " + std::to_string(period) +
                                " periods");
  }
}

}  // namespace

namespace kernels {

void multiply_diagonal(std::span<cplx> amplitudes, std::span<const cplx> phases) {
  if (amplitudes.size() != phases.size()) throw DimensionError("phase table does not match state dimension");
  for (std::size_t z = 0; z < amplitudes.size(); ++z) amplitudes[z] *= phases[z];
}

void x_rotation(std::span<cplx> amplitudes, int L, int site, double theta) {
  require_dimension(amplitudes, L);
  if (site < 1 || site > L) throw IndexError("site " + std::to_string(site) + " out of range");
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const std::size_t stride = std::size_t{1} << (L - site);
  const std::size_t dim = amplitudes.size();
  // (c I - i s X) on the pair (lo, hi): lo' = c lo - i s hi, hi' = c hi - i s lo.
  for (std::size_t block = 0; block < dim; block += 2 * stride) {
    cplx* lo = amplitudes.data() + block;
    cplx* hi = lo + stride;
    for (std::size_t k = 0; k < stride; ++k) {
      const double ar = lo[k].real(), ai = lo[k].imag();
      const double br = hi[k].real(), bi = hi[k].imag();
      lo[k] = cplx(c * ar + s * bi, c * ai - s * br);
      hi[k] = cplx(c * br + s * ai, c * bi - s * ar);
    }
  }
}

void x_layer(std::span<cplx> amplitudes, int L, std::span<const double> angles) {
  if (angles.size() != static_cast<std::size_t>(L)) throw DimensionError("pulse angles do not match site count");
  for (int site = 1; site <= L; ++site) x_rotation(amplitudes, L, site, angles[site - 1]);
}

void zz_rotation(std::span<cplx> amplitudes, int L, int site_a, int site_b, double theta) {
  require_dimension(amplitudes, L);
  if (site_a < 1 || site_a > L || site_b < 1 || site_b > L || site_a == site_b) {
    throw IndexError("invalid ZZ site pair (" + std::to_string(site_a) + ", " + std::to_string(site_b) + ")");
  }
  const int shift_a = L - site_a;
  const int shift_b = L - site_b;
  const cplx aligned = std::polar(1.0, -theta);
  const cplx anti = std::conj(aligned);
  for (std::size_t z = 0; z < amplitudes.size(); ++z) {
    const bool differ = ((z >> shift_a) ^ (z >> shift_b)) & 1U;
    amplitudes[z] *= differ ? anti : aligned;
  }
}

}  // namespace kernels

FloquetEngine::FloquetEngine(const FloquetSpec& spec) : spec_(spec), energies_(diag_energies(spec.coupling())) {
  phases_.resize(energies_.size());
  for (std::size_t z = 0; z < energies_.size(); ++z) phases_[z] = std::polar(1.0, -spec_.Omega() * energies_[z]);
}

void FloquetEngine::apply_diagonal(std::span<cplx> amplitudes) const {
  require_dimension(amplitudes, sites());
  kernels::multiply_diagonal(amplitudes, phases_);
}

void FloquetEngine::apply_x_layer(std::span<cplx> amplitudes) const {
  require_dimension(amplitudes, sites());
  kernels::x_layer(amplitudes, sites(), spec_.pulse().angles());
}

void FloquetEngine::step(std::span<cplx> amplitudes) const {
  apply_diagonal(amplitudes);
  apply_x_layer(amplitudes);
}

void FloquetEngine::step(StateVector& psi) const {
  require_same_sites(psi.sites(), sites(), "floquet step");
  step(span_of(psi));
}

StateVector apply_diagonal(StateVector psi, double Omega, const CouplingProfile& coupling) {
  require_same_sites(psi.sites(), coupling.sites(), "apply_diagonal");
  const std::vector<double> energies = diag_energies(coupling);
  auto amp = span_of(psi);
  for (std::size_t z = 0; z < amp.size(); ++z) amp[z] *= std::polar(1.0, -Omega * energies[z]);
  return psi;
}

StateVector apply_x_layer(StateVector psi, const PulseProfile& pulse) {
  require_same_sites(psi.sites(), pulse.sites(), "apply_x_layer");
  kernels::x_layer(span_of(psi), psi.sites(), pulse.angles());
  return psi;
}

StateVector floquet_step(StateVector psi, const FloquetSpec& spec) {
  FloquetEngine(spec).step(psi);
  return psi;
}

StateVector evolve(StateVector psi, const FloquetSpec& spec, std::size_t periods) {
  return evolve(std::move(psi), FloquetEngine(spec), periods);
}

StateVector evolve(StateVector psi, const FloquetEngine& engine, std::size_t periods, const PeriodObserver& observer) {
  require_same_sites(psi.sites(), engine.sites(), "evolve");
  for (std::size_t n = 1; n <= periods; ++n) {
    engine.step(span_of(psi));
    if (n % kNormCheckInterval == 0) check_norm(psi, n);
    if (observer) observer(n, psi);
  }
  return psi;
}

double overlap_probability(const StateVector& a, const StateVector& b) {
  if (a.sites() != b.sites()) throw DimensionError("overlap of states with different site counts");
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

double revival_fidelity(const FloquetSpec& spec, const StateVector& psi0, std::size_t periods) {
  return overlap_probability(psi0, evolve(psi0, spec, periods));
}

double average_fidelity(const FloquetSpec& spec, const StateVector& psi0, std::span<const std::size_t> periods) {
  if (periods.empty()) throw ArgumentError("average_fidelity needs a non-empty cycle set");
  std::size_t longest = 0;
  for (auto p : periods) longest = std::max(longest, p);
  // One pass up to the longest period; each listed count is sampled on the way.
  std::vector<double> fidelity(longest + 1, 0.0);
  fidelity[0] = overlap_probability(psi0, psi0);
  evolve(psi0, FloquetEngine(spec), longest,
         [&](std::size_t n, const StateVector& psi) { fidelity[n] = overlap_probability(psi0, psi); });
  double sum = 0.0;
  for (auto p : periods) sum += fidelity[p];
  return sum / static_cast<double>(periods.size());
}

std::vector<TrajectoryPoint> fidelity_trajectory(const FloquetSpec& spec, const StateVector& psi0,
                                                 std::size_t periods) {
  std::vector<TrajectoryPoint> out;
  out.reserve(periods + 1);
  out.push_back({0, overlap_probability(psi0, psi0), psi0.norm()});
  evolve(psi0, FloquetEngine(spec), periods, [&](std::size_t n, const StateVector& psi) {
    out.push_back({n, overlap_probability(psi0, psi), psi.norm()});
  });
  return out;
}

void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryPoint> trajectory) {
  out << "n,F,norm\n";
  for (const auto& p : trajectory) out << p.n << ',' << io::fmt(p.fidelity) << ',' << io::fmt(p.norm) << '\n';
}

double DenseUnitary::unitarity_defect() const {
  const Eigen::Index dim = matrix.rows();
  return (matrix.adjoint() * matrix - Eigen::MatrixXcd::Identity(dim, dim)).cwiseAbs().maxCoeff();
}

DenseUnitary build_dense_unitary(const FloquetSpec& spec) {
  const int L = spec.sites();
  if (L > kMaxDenseSites) {
    throw ResourceLimitError("dense unitary refused for L=" + std::to_string(L) + " (limit " +
                             std::to_string(kMaxDenseSites) + ")");
  }
  const FloquetEngine engine(spec);
  const auto dim = static_cast<Eigen::Index>(hilbert_dim(L));
  DenseUnitary u{L, Eigen::MatrixXcd::Identity(dim, dim)};
  for (Eigen::Index k = 0; k < dim; ++k) {
    engine.step(std::span<cplx>(u.matrix.col(k).data(), static_cast<std::size_t>(dim)));
  }
  return u;
}

}  // namespace dtc
