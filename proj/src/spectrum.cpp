#include "dtc/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <cblas.h>
#include <lapacke.h>

#include "dtc/csv.hpp"
#include "dtc/errors.hpp"
#include "dtc/evolve.hpp"
#include "dtc/random.hpp"

namespace dtc {

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

constexpr double kPi = std::numbers::pi;
// Tie-break eigenvalues closer than this are treated as still degenerate.
constexpr double kTieTolerance = 1e-7;

// C = op(A) * op(B) through BLAS; the dense blocks here reach 2048 x 2048.
MatrixXcd gemm(const Eigen::Ref<const MatrixXcd>& A, bool adjoint_a, const Eigen::Ref<const MatrixXcd>& B,
               bool adjoint_b) {
  const Index m = adjoint_a ? A.cols() : A.rows();
  const Index k = adjoint_a ? A.rows() : A.cols();
  const Index n = adjoint_b ? B.rows() : B.cols();
  MatrixXcd C(m, n);
  const cplx one(1.0, 0.0), zero(0.0, 0.0);
  cblas_zgemm(CblasColMajor, adjoint_a ? CblasConjTrans : CblasNoTrans, adjoint_b ? CblasConjTrans : CblasNoTrans,
              static_cast<int>(m), static_cast<int>(n), static_cast<int>(k), &one, A.data(),
              static_cast<int>(A.outerStride()), B.data(), static_cast<int>(B.outerStride()), &zero, C.data(),
              static_cast<int>(C.rows()));
  return C;
}

// A^dagger B.
MatrixXcd inner(const Eigen::Ref<const MatrixXcd>& A, const Eigen::Ref<const MatrixXcd>& B) {
  return gemm(A, true, B, false);
}

// A B.
MatrixXcd product(const Eigen::Ref<const MatrixXcd>& A, const Eigen::Ref<const MatrixXcd>& B) {
  return gemm(A, false, B, false);
}

struct BlockSolution {
  std::vector<double> phases;
  MatrixXcd vectors;
  double reconstruction = 0.0;
  double orthonormality = 0.0;
  std::size_t largest_cluster = 1;
  double min_tie_gap = std::numeric_limits<double>::infinity();
};

struct HermitianEigen {
  VectorXd values;   // ascending
  MatrixXcd vectors;
};

HermitianEigen hermitian_eigen(MatrixXcd H) {
  const Index n = H.rows();
  HermitianEigen e{VectorXd(n), MatrixXcd(n, n)};
  if (n == 1) {
    e.values[0] = H(0, 0).real();
    e.vectors(0, 0) = 1.0;
    return e;
  }
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  const lapack_int info =
      LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'A', 'L', static_cast<lapack_int>(n), H.data(), static_cast<lapack_int>(n),
                     0.0, 0.0, 0, 0, 0.0, &found, e.values.data(), e.vectors.data(), static_cast<lapack_int>(n),
                     support.data());
  if (info != 0 || found != n) {
    throw NumericalFailureError("Hermitian eigensolver failed (info=" + std::to_string(info) + ")");
  }
  return e;
}

// Runs [begin, end) of ascending values whose neighbouring gaps are <= tol.
std::vector<std::pair<Index, Index>> runs(const VectorXd& values, double tol) {
  std::vector<std::pair<Index, Index>> out;
  for (Index i = 0; i < values.size();) {
    Index j = i + 1;
    while (j < values.size() && values[j] - values[j - 1] <= tol) ++j;
    out.emplace_back(i, j);
    i = j;
  }
  return out;
}

// Groups indices (already sorted by phase) into circular runs whose neighbouring
// gaps are <= tol.
std::vector<std::vector<std::size_t>> circular_clusters(const std::vector<double>& phases,
                                                        const std::vector<std::size_t>& order, double tol) {
  const std::size_t m = order.size();
  std::vector<std::vector<std::size_t>> clusters;
  if (m == 0) return clusters;
  auto gap_before = [&](std::size_t pos) {
    const std::size_t prev = (pos + m - 1) % m;
    return circular_distance(phases[order[prev]], phases[order[pos]]);
  };
  std::size_t start = 0;
  bool found_gap = false;
  for (std::size_t pos = 0; pos < m; ++pos) {
    if (m == 1 || gap_before(pos) > tol) {
      start = pos;
      found_gap = true;
      break;
    }
  }
  if (!found_gap) {
    clusters.push_back(order);
    return clusters;
  }
  for (std::size_t step = 0; step < m; ++step) {
    const std::size_t pos = (start + step) % m;
    if (step == 0 || gap_before(pos) > tol) clusters.emplace_back();
    clusters.back().push_back(order[pos]);
  }
  return clusters;
}

double circular_mean(const std::vector<double>& phases, const std::vector<std::size_t>& members) {
  cplx s(0.0, 0.0);
  for (auto k : members) s += std::polar(1.0, phases[k]);
  return wrap_phase(std::arg(s));
}

// Eigenvectors of the (normal) unitary M restricted to a subspace where its
// Hermitian part is nearly constant. The Schur form of a normal matrix is
// diagonal, so the Schur vectors are orthonormal eigenvectors.
MatrixXcd split_cluster(const MatrixXcd& M) {
  Eigen::ComplexSchur<MatrixXcd> schur(M);
  if (schur.info() != Eigen::Success) throw NumericalFailureError("Schur decomposition of a phase cluster failed");
  return schur.matrixU();
}

// Makes the largest-magnitude component of every column real and positive.
void fix_phases(MatrixXcd& V) {
  for (Index k = 0; k < V.cols(); ++k) {
    Index z = 0;
    V.col(k).cwiseAbs2().maxCoeff(&z);
    const double a = std::abs(V(z, k));
    if (a > 0.0) V.col(k) *= std::conj(V(z, k)) / a;
  }
}

// Haar-random c x c unitary: QR of a complex Gaussian matrix with the phases
// of R's diagonal moved into Q.
MatrixXcd haar_unitary(Index c, std::uint64_t seed) {
  Rng rng(seed);
  MatrixXcd G(c, c);
  for (Index j = 0; j < c; ++j) {
    for (Index i = 0; i < c; ++i) G(i, j) = cplx(rng.normal(), rng.normal());
  }
  Eigen::HouseholderQR<MatrixXcd> qr(G);
  MatrixXcd Q = qr.householderQ();
  const MatrixXcd& R = qr.matrixQR();
  for (Index k = 0; k < c; ++k) {
    const double a = std::abs(R(k, k));
    if (a > 0.0) Q.col(k) *= R(k, k) / a;
  }
  return Q;
}

BlockSolution solve_block(const MatrixXcd& U, const VectorXd& weights, const VectorXd& secondary,
                          const DiagonalizeOptions& opt, std::uint64_t block_seed) {
  const Index m = U.rows();
  BlockSolution out;

  // Hermitian part: its eigenvalues are cos(phi), and each eigenspace is
  // invariant under U, holding at most the pair of phases +-phi.
  const HermitianEigen ek = hermitian_eigen(0.5 * (U + U.adjoint()));
  const MatrixXcd& Z = ek.vectors;
  const MatrixXcd UZ = product(U, Z);
  MatrixXcd V(m, m);
  std::vector<cplx> eigenvalues(static_cast<std::size_t>(m));
  for (const auto& [i, j] : runs(ek.values, opt.cosine_cluster_tol)) {
    const Index c = j - i;
    if (c == 1) {
      eigenvalues[i] = Z.col(i).dot(UZ.col(i));
      V.col(i) = Z.col(i);
      continue;
    }
    const MatrixXcd M = inner(Z.middleCols(i, c), UZ.middleCols(i, c));
    const MatrixXcd Q = split_cluster(M);
    V.middleCols(i, c) = product(Z.middleCols(i, c), Q);
    const MatrixXcd D = inner(Q, product(M, Q));
    for (Index k = 0; k < c; ++k) eigenvalues[i + k] = D(k, k);
  }

  out.phases.resize(static_cast<std::size_t>(m));
  for (Index k = 0; k < m; ++k) out.phases[k] = wrap_phase(-std::arg(eigenvalues[k]));

  // Deterministic basis inside degenerate eigenspaces.
  std::vector<std::size_t> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return out.phases[a] < out.phases[b]; });
  for (const auto& cluster : circular_clusters(out.phases, order, opt.degeneracy_tol)) {
    if (cluster.size() < 2) continue;
    out.largest_cluster = std::max(out.largest_cluster, cluster.size());
    const auto c = static_cast<Index>(cluster.size());
    MatrixXcd Vc(m, c);
    for (Index k = 0; k < c; ++k) Vc.col(k) = V.col(static_cast<Index>(cluster[k]));
    HermitianEigen tie = hermitian_eigen(inner(Vc, weights.asDiagonal() * Vc));
    MatrixXcd rotated = product(Vc, tie.vectors);
    // Symmetries shared by U and the first tie-break operator can leave exact
    // degeneracies; a generic diagonal operator resolves what remains.
    for (const auto& [b, e] : runs(tie.values, kTieTolerance)) {
      if (e - b < 2) continue;
      const MatrixXcd Vs = rotated.middleCols(b, e - b);
      const HermitianEigen second = hermitian_eigen(inner(Vs, secondary.asDiagonal() * Vs));
      for (Index k = 1; k < e - b; ++k) {
        out.min_tie_gap = std::min(out.min_tie_gap, second.values[k] - second.values[k - 1]);
      }
      rotated.middleCols(b, e - b) = product(Vs, second.vectors);
    }
    for (Index k = 1; k < c; ++k) {
      const double gap = tie.values[k] - tie.values[k - 1];
      if (gap > kTieTolerance) out.min_tie_gap = std::min(out.min_tie_gap, gap);
    }
    const double phase = circular_mean(out.phases, cluster);
    // Cluster members keep their slots in phase order.
    std::vector<std::size_t> slots = cluster;
    std::sort(slots.begin(), slots.end());
    fix_phases(rotated);
    if (opt.degenerate_basis == DegenerateBasis::Generic) {
      rotated = product(rotated, haar_unitary(c, splitmix64(block_seed ^ static_cast<std::uint64_t>(slots.front()))));
    }
    for (Index k = 0; k < c; ++k) {
      V.col(static_cast<Index>(slots[k])) = rotated.col(k);
      out.phases[slots[k]] = phase;
    }
  }

  // Checks: U = V diag(e^{-i phi}) V^dagger and V^dagger V = I.
  MatrixXcd VL = V;
  for (Index k = 0; k < m; ++k) VL.col(k) *= std::polar(1.0, -out.phases[k]);
  out.reconstruction = (gemm(VL, false, V, true) - U).cwiseAbs().maxCoeff();
  out.orthonormality = (inner(V, V) - MatrixXcd::Identity(m, m)).cwiseAbs().maxCoeff();
  out.vectors = std::move(V);
  return out;
}

double shannon(double p) { return p > 0.0 ? -p * std::log(p) : 0.0; }

}  // namespace

std::string to_string(DegenerateBasis basis) {
  return basis == DegenerateBasis::Generic ? "generic" : "localized";
}

DegenerateBasis parse_degenerate_basis(const std::string& text) {
  if (text == "localized") return DegenerateBasis::Localized;
  if (text == "generic") return DegenerateBasis::Generic;
  throw ArgumentError("unknown degenerate basis '" + text + "' (expected localized or generic)");
}

double wrap_phase(double phi) {
  double r = std::remainder(phi, 2.0 * kPi);  // [-pi, pi]
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

double circular_distance(double a, double b) { return std::abs(std::remainder(a - b, 2.0 * kPi)); }

StateVector FloquetSpectrum::state(std::size_t k) const {
  if (k >= size()) throw IndexError("Floquet state " + std::to_string(k) + " out of range");
  return StateVector(L, vectors.col(static_cast<Index>(k)));
}

FloquetSpectrum diagonalize_floquet(const FloquetSpec& spec, const DiagonalizeOptions& options) {
  const int L = spec.sites();
  if (L > kMaxDenseSites) {
    throw ResourceLimitError("Floquet diagonalization refused for L=" + std::to_string(L) + " (limit " +
                             std::to_string(kMaxDenseSites) + ")");
  }
  require_even_chain(L);
  const FloquetEngine engine(spec);
  const auto N = static_cast<Index>(hilbert_dim(L));
  const Index m = N / 2;

  // Flip-parity blocks in the basis (|a> +- |N-1-a>)/sqrt2, a < N/2:
  // <b,s|U|a,s> = u_b + s u_{N-1-b} with u = U|a>.
  MatrixXcd Uplus(m, m), Uminus(m, m);
  VectorXcd u(N);
  for (Index a = 0; a < m; ++a) {
    u.setZero();
    u[a] = 1.0;
    engine.step(std::span<cplx>(u.data(), static_cast<std::size_t>(N)));
    for (Index b = 0; b < m; ++b) {
      Uplus(b, a) = u[b] + u[N - 1 - b];
      Uminus(b, a) = u[b] - u[N - 1 - b];
    }
  }
  VectorXd weights(m), secondary(m);
  for (Index a = 0; a < m; ++a) {
    weights[a] = static_cast<double>(a + 1);
    secondary[a] = static_cast<double>(splitmix64(static_cast<std::uint64_t>(a)) >> 11) * 0x1.0p-53;
  }

  const BlockSolution plus = solve_block(Uplus, weights, secondary, options, splitmix64(options.basis_seed));
  Uplus.resize(0, 0);
  const BlockSolution minus = solve_block(Uminus, weights, secondary, options, splitmix64(~options.basis_seed));
  Uminus.resize(0, 0);

  struct Entry {
    double phase;
    int parity;
    Index column;
  };
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(N));
  for (Index k = 0; k < m; ++k) entries.push_back({plus.phases[k], +1, k});
  for (Index k = 0; k < m; ++k) entries.push_back({minus.phases[k], -1, k});
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.phase != b.phase) return a.phase < b.phase;
    return a.parity > b.parity;
  });

  FloquetSpectrum s;
  s.L = L;
  s.vectors.resize(N, N);
  s.phases.reserve(static_cast<std::size_t>(N));
  s.parity.reserve(static_cast<std::size_t>(N));
  const double r = 1.0 / std::sqrt(2.0);
  for (Index k = 0; k < N; ++k) {
    const Entry& e = entries[static_cast<std::size_t>(k)];
    const MatrixXcd& block = e.parity > 0 ? plus.vectors : minus.vectors;
    auto col = s.vectors.col(k);
    for (Index a = 0; a < m; ++a) {
      const cplx c = r * block(a, e.column);
      col[a] = c;
      col[N - 1 - a] = e.parity > 0 ? c : -c;
    }
    s.phases.push_back(e.phase);
    s.parity.push_back(e.parity);
  }
  // The change of basis has entries +-1/sqrt2, so block residuals bound the
  // full-basis residuals entrywise.
  s.reconstruction_residual = std::max(plus.reconstruction, minus.reconstruction);
  s.orthonormality_residual = std::max(plus.orthonormality, minus.orthonormality);
  s.largest_degenerate_cluster = std::max(plus.largest_cluster, minus.largest_cluster);
  s.min_tie_break_gap = std::min(plus.min_tie_gap, minus.min_tie_gap);
  if (!(s.reconstruction_residual <= options.check_tol) || !(s.orthonormality_residual <= options.check_tol)) {
    throw NumericalFailureError("Floquet eigensystem check failed: reconstruction " +
                                io::fmt(s.reconstruction_residual) + ", orthonormality " +
                                io::fmt(s.orthonormality_residual));
  }
  return s;
}

HalfChainEntropies half_chain_entropies(const StateVector& state) {
  const auto& a = state.amplitudes();
  return half_chain_entropies(std::span<const cplx>(a.data(), static_cast<std::size_t>(a.size())), state.sites());
}

HalfChainEntropies half_chain_entropies(std::span<const cplx> amplitudes, int L) {
  if (L < 2 || L % 2 != 0) throw UnsupportedConfigurationError("half-chain entropies need even L");
  if (amplitudes.size() != hilbert_dim(L)) throw DimensionError("state dimension does not match L");
  const Index half = Index{1} << (L / 2);
  // Column-major map: row = right-half bits (least significant), column = left half.
  const Eigen::Map<const MatrixXcd> M(amplitudes.data(), half, half);
  const double norm2 = M.squaredNorm();
  if (!(std::abs(std::sqrt(norm2) - 1.0) <= 1e-8)) {
    throw DomainError("state is not normalized (norm " + io::fmt(std::sqrt(norm2)) + ")");
  }
  // rho_left is the complex conjugate of M^dagger M: same spectrum and diagonal.
  const MatrixXcd gram = M.adjoint() * M;
  Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(gram, Eigen::EigenvaluesOnly);
  HalfChainEntropies s{0.0, 0.0};
  for (Index k = 0; k < half; ++k) {
    s.entanglement += shannon(eig.eigenvalues()[k]);
    s.diagonal += shannon(gram(k, k).real());
  }
  return s;
}

double page_entanglement_entropy(int L) { return (L * std::numbers::ln2 - 1.0) / 2.0; }

double page_diagonal_entropy(int L) { return std::log(0.48 * std::pow(2.0, L / 2)) + std::numbers::ln2; }

EntropyReport entropy_report(const FloquetSpectrum& spectrum) {
  EntropyReport r;
  r.L = spectrum.L;
  r.phases = spectrum.phases;
  const std::size_t n = spectrum.size();
  r.entanglement.resize(n);
  r.diagonal.resize(n);
  const auto dim = static_cast<std::size_t>(spectrum.vectors.rows());
  for (std::size_t k = 0; k < n; ++k) {
    const auto s = half_chain_entropies(
        std::span<const cplx>(spectrum.vectors.col(static_cast<Index>(k)).data(), dim), spectrum.L);
    r.entanglement[k] = s.entanglement;
    r.diagonal[k] = s.diagonal;
    r.mean_entanglement += s.entanglement;
    r.mean_diagonal += s.diagonal;
  }
  if (n > 0) {
    r.mean_entanglement /= static_cast<double>(n);
    r.mean_diagonal /= static_cast<double>(n);
  }
  return r;
}

EntropyReport averaged_entropies(const FloquetSpec& spec, const DiagonalizeOptions& options) {
  return entropy_report(diagonalize_floquet(spec, options));
}

double pi_pairing_measure(std::span<const double> phases, double tolerance) {
  if (!(tolerance > 0.0)) throw ArgumentError("pairing tolerance must be positive");
  const std::size_t n = phases.size();
  if (n == 0) return 0.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return phases[a] < phases[b]; });
  std::vector<bool> matched(n, false);
  std::size_t paired = 0;
  for (std::size_t pi = 0; pi < n; ++pi) {
    const std::size_t i = order[pi];
    if (matched[i]) continue;
    std::size_t best = n;
    double best_miss = tolerance;
    for (std::size_t pj = 0; pj < n; ++pj) {
      const std::size_t j = order[pj];
      if (j == i || matched[j]) continue;
      const double miss = std::abs(circular_distance(phases[i], phases[j]) - kPi);
      if (miss < best_miss) {
        best_miss = miss;
        best = j;
      }
    }
    if (best != n) {
      matched[i] = matched[best] = true;
      paired += 2;
    }
  }
  return static_cast<double>(paired) / static_cast<double>(n);
}

void write_entropy_csv(std::ostream& out, const EntropyReport& report) {
  out << "k,phase,S_EE,S_DE\n";
  for (std::size_t k = 0; k < report.phases.size(); ++k) {
    out << k << ',' << io::fmt(report.phases[k]) << ',' << io::fmt(report.entanglement[k]) << ','
        << io::fmt(report.diagonal[k]) << '\n';
  }
}

}  // namespace dtc
