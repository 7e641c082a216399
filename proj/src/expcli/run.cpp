#include "dtc/expcli/run.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <mutex>
#include <thread>

#include "dtc/errors.hpp"
#include "dtc/evolve.hpp"
#include "dtc/metrology.hpp"
#include "dtc/random.hpp"
#include "dtc/spectrum.hpp"

extern "C" void ilaver_(int* major, int* minor, int* patch);

#ifndef DTC_VERSION
#define DTC_VERSION "0.0.0"
#endif

namespace dtc {

using nlohmann::json;

const io::Table& ResultSet::table(const std::string& name) const {
  auto it = tables.find(name);
  if (it == tables.end()) throw MissingColumnError("result set has no '" + name + "' table");
  return it->second;
}

void ResultSet::write(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  for (const auto& [name, t] : tables) t.save((std::filesystem::path(dir) / (name + ".csv")).string());
  io::write_file((std::filesystem::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

std::uint32_t grid_index(const RunConfig& config, std::size_t l, std::size_t e, std::size_t w) {
  return static_cast<std::uint32_t>((l * config.epsilon.size() + e) * config.omega.size() + w);
}

FloquetSpec unit_spec(const RunConfig& config, int L, double omega, double epsilon, std::uint64_t seed) {
  auto coupling =
      config.disorder > 0.0 ? CouplingProfile::disordered(L, config.disorder, seed) : CouplingProfile::clean(L);
  auto pulse = config.pulse_mode == PulseMode::SiteRandom ? PulseProfile::site_random(L, epsilon, splitmix64(seed))
                                                          : PulseProfile::uniform(L, epsilon);
  return FloquetSpec::from_deviation(omega, std::move(coupling), std::move(pulse));
}

json version_info() {
  int major = 0, minor = 0, patch = 0;
  ilaver_(&major, &minor, &patch);
  json v;
  v["dtc"] = DTC_VERSION;
  v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  v["lapack"] = std::to_string(major) + "." + std::to_string(minor) + "." + std::to_string(patch);
#if defined(__clang__)
  v["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  v["compiler"] = std::string("gcc ") + __VERSION__;
#else
  v["compiler"] = "unknown";
#endif
  v["cxx_standard"] = static_cast<long>(__cplusplus);
  return v;
}

namespace {

struct WorkUnit {
  std::uint32_t grid;
  std::uint32_t realization;
  int L;
  double omega;
  double epsilon;
  std::uint64_t seed;
};

struct UnitResult {
  std::vector<double> fidelity;
  std::vector<double> fq;
  std::vector<double> fc;
  double cfi_skipped_mass = 0.0;
  bool has_spectrum = false;
  EntropyReport entropies;
  double pairing = 0.0;
  std::size_t largest_cluster = 0;
  double tie_gap = 0.0;
  double seconds = 0.0;
};

UnitResult execute(const RunConfig& c, const WorkUnit& u) {
  const auto t0 = std::chrono::steady_clock::now();
  UnitResult r;
  const FloquetSpec spec = unit_spec(c, u.L, u.omega, u.epsilon, u.seed);

  if (c.wants_dynamics()) {
    const StateVector psi0 = initial_state(c.initial_state, u.L);
    const bool fisher = c.wants(Observable::Qfi) || c.wants(Observable::Cfi);
    const std::size_t last = c.cycles.back();
    std::size_t next = 0;
    auto record = [&](std::size_t period, const StateVector& psi, const TangentPair* pair) {
      while (next < c.cycles.size() && c.cycles[next] == period) {
        r.fidelity.push_back(overlap_probability(psi0, psi));
        if (pair) {
          r.fq.push_back(qfi(*pair));
          const auto cr = cfi_computational(*pair, c.probability_floor);
          r.fc.push_back(cr.value);
          r.cfi_skipped_mass = std::max(r.cfi_skipped_mass, cr.skipped_mass);
        }
        ++next;
      }
    };
    const FloquetEngine engine(spec);
    if (fisher) {
      TangentPair start = TangentPair::start(psi0);
      record(0, start.psi, &start);
      tangent_evolve(std::move(start), engine, last,
                     [&](std::size_t p, const TangentPair& pair) { record(p, pair.psi, &pair); });
    } else {
      record(0, psi0, nullptr);
      evolve(psi0, engine, last, [&](std::size_t p, const StateVector& psi) { record(p, psi, nullptr); });
    }
  }

  if (c.wants_spectrum()) {
    DiagonalizeOptions options;
    options.degenerate_basis = c.degenerate_basis;
    const FloquetSpectrum s = diagonalize_floquet(spec, options);
    r.has_spectrum = true;
    r.entropies = entropy_report(s);
    r.pairing = pi_pairing_measure(s, c.pairing_tolerance);
    r.largest_cluster = s.largest_degenerate_cluster;
    r.tie_gap = s.min_tie_break_gap;
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

struct Moments {
  double mean;
  double stdev;
};

Moments moments(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0};
}

}  // namespace

ResultSet run(const RunConfig& config) {
  config.validate();
  config.check_resources();
  for (int L : config.L) require_even_chain(L);

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<WorkUnit> units;
  for (std::size_t l = 0; l < config.L.size(); ++l) {
    for (std::size_t e = 0; e < config.epsilon.size(); ++e) {
      for (std::size_t w = 0; w < config.omega.size(); ++w) {
        const auto g = grid_index(config, l, e, w);
        for (int r = 0; r < config.realizations; ++r) {
          const auto ri = static_cast<std::uint32_t>(r);
          units.push_back({g, ri, config.L[l], config.omega[w], config.epsilon[e], derive_seed(config.master_seed, g, ri)});
        }
      }
    }
  }

  std::vector<UnitResult> results(units.size());
  std::atomic<std::size_t> cursor{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= units.size()) return;
      try {
        results[i] = execute(config, units[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        cursor.store(units.size());
        return;
      }
    }
  };
  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(config.threads), units.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  ResultSet rs;
  rs.config = config;
  const bool want_f = config.wants(Observable::Fidelity);
  const bool want_fi = config.wants(Observable::Qfi) || config.wants(Observable::Cfi);
  const bool want_s = config.wants_spectrum();
  io::Table fid({"L", "omega_rad", "epsilon", "realization", "seed", "n", "F"});
  io::Table fid_mean({"L", "omega_rad", "epsilon", "n", "F_mean", "F_std", "realizations"});
  io::Table fis({"L", "omega_rad", "epsilon", "n", "FQ", "FC", "seed"});
  io::Table fis_mean({"L", "omega_rad", "epsilon", "n", "FQ_mean", "FQ_std", "FC_mean", "FC_std", "realizations"});
  io::Table spec({"L", "omega_rad", "epsilon", "realization", "seed", "S_EE_mean", "S_DE_mean", "S_EE_page",
                  "S_DE_page", "pairing_fraction", "largest_degenerate_cluster", "min_tie_break_gap"});
  io::Table spec_mean({"L", "omega_rad", "epsilon", "S_EE_mean", "S_DE_mean", "S_EE_page", "S_DE_page",
                       "pairing_fraction", "realizations"});

  const std::size_t R = static_cast<std::size_t>(config.realizations);
  for (std::size_t first = 0; first < units.size(); first += R) {
    const WorkUnit& u0 = units[first];
    for (std::size_t i = first; i < first + R; ++i) {
      const WorkUnit& u = units[i];
      const UnitResult& r = results[i];
      for (std::size_t k = 0; k < r.fidelity.size(); ++k) {
        if (want_f) fid.add(u.L, u.omega, u.epsilon, u.realization, u.seed, config.cycles[k], r.fidelity[k]);
        if (want_fi) fis.add(u.L, u.omega, u.epsilon, config.cycles[k], r.fq[k], r.fc[k], u.seed);
      }
      if (want_s) {
        spec.add(u.L, u.omega, u.epsilon, u.realization, u.seed, r.entropies.mean_entanglement,
                 r.entropies.mean_diagonal, r.entropies.page_entanglement(), r.entropies.page_diagonal(), r.pairing,
                 r.largest_cluster, r.tie_gap);
        if (config.per_state_entropies) {
          io::Table st({"k", "phase", "S_EE", "S_DE"});
          for (std::size_t k = 0; k < r.entropies.phases.size(); ++k) {
            st.add(k, r.entropies.phases[k], r.entropies.entanglement[k], r.entropies.diagonal[k]);
          }
          rs.tables.emplace("states_g" + std::to_string(u.grid) + "_r" + std::to_string(u.realization), std::move(st));
        }
      }
    }
    auto collect = [&](auto member, std::size_t k) {
      std::vector<double> v;
      for (std::size_t i = first; i < first + R; ++i) v.push_back(member(results[i], k));
      return moments(v);
    };
    if (config.wants_dynamics()) {
      for (std::size_t k = 0; k < config.cycles.size(); ++k) {
        if (want_f) {
          const auto m = collect([](const UnitResult& r, std::size_t j) { return r.fidelity[j]; }, k);
          fid_mean.add(u0.L, u0.omega, u0.epsilon, config.cycles[k], m.mean, m.stdev, R);
        }
        if (want_fi) {
          const auto q = collect([](const UnitResult& r, std::size_t j) { return r.fq[j]; }, k);
          const auto c = collect([](const UnitResult& r, std::size_t j) { return r.fc[j]; }, k);
          fis_mean.add(u0.L, u0.omega, u0.epsilon, config.cycles[k], q.mean, q.stdev, c.mean, c.stdev, R);
        }
      }
    }
    if (want_s) {
      const auto see = collect([](const UnitResult& r, std::size_t) { return r.entropies.mean_entanglement; }, 0);
      const auto sde = collect([](const UnitResult& r, std::size_t) { return r.entropies.mean_diagonal; }, 0);
      const auto pair = collect([](const UnitResult& r, std::size_t) { return r.pairing; }, 0);
      spec_mean.add(u0.L, u0.omega, u0.epsilon, see.mean, sde.mean, page_entanglement_entropy(u0.L),
                    page_diagonal_entropy(u0.L), pair.mean, R);
    }
  }
  if (want_f) {
    rs.tables.emplace("fidelity", std::move(fid));
    rs.tables.emplace("fidelity_mean", std::move(fid_mean));
  }
  if (want_fi) {
    rs.tables.emplace("fisher", std::move(fis));
    rs.tables.emplace("fisher_mean", std::move(fis_mean));
  }
  if (want_s) {
    rs.tables.emplace("spectrum", std::move(spec));
    rs.tables.emplace("spectrum_mean", std::move(spec_mean));
  }

  json jm;
  jm["config"] = config.to_json();
  jm["prng"] = std::string(Rng::kAlgorithm);
  jm["seed_derivation"] = "seed = derive_seed(master_seed, grid_index, realization); pulse seed = splitmix64(seed)";
  jm["fisher_parameter"] = "Omega";
  jm["cycle_unit"] = "drive periods T";
  jm["versions"] = version_info();
  jm["units"] = json::array();
  double max_skipped = 0.0;
  for (std::size_t i = 0; i < units.size(); ++i) {
    const auto& u = units[i];
    json ju;
    ju["grid_index"] = u.grid;
    ju["realization"] = u.realization;
    ju["L"] = u.L;
    ju["omega_rad"] = u.omega;
    ju["epsilon"] = u.epsilon;
    ju["seed"] = u.seed;
    ju["wall_seconds"] = results[i].seconds;
    jm["units"].push_back(ju);
    max_skipped = std::max(max_skipped, results[i].cfi_skipped_mass);
  }
  if (want_fi) jm["cfi_max_skipped_mass"] = max_skipped;
  std::vector<std::string> names;
  for (const auto& [name, t] : rs.tables) names.push_back(name + ".csv");
  jm["outputs"] = names;
  jm["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rs.manifest = std::move(jm);
  return rs;
}

}  // namespace dtc
