#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dtc {

/// Deterministic generator used for every stochastic input (disorder, pulse
/// imperfections, random states, collapse restarts).
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The standard distributions are not, so uniforms and normals are
/// derived here from raw engine output to stay bit-identical across toolchains.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64+splitmix64";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer; a bijection on 64-bit words.
std::uint64_t splitmix64(std::uint64_t x);

/// Per-work-unit seed. Injective in (grid_index, realization) for indices
/// below 2^32, since the packing is injective and the mix is a bijection.
std::uint64_t derive_seed(std::uint64_t master, std::uint32_t grid_index, std::uint32_t realization);

}  // namespace dtc
