#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dtc/errors.hpp"
#include "dtc/evolve.hpp"
#include "dtc/expcli/circuit.hpp"
#include "dtc/expcli/config.hpp"
#include "dtc/expcli/figures.hpp"
#include "dtc/expcli/run.hpp"
#include "dtc/fss.hpp"
#include "dtc/metrology.hpp"
#include "dtc/random.hpp"

using namespace dtc;
using nlohmann::json;

namespace {

std::string validation_field(const json& j) {
  try {
    RunConfig::from_json(j);
  } catch (const ValidationError& e) {
    return e.field();
  }
  return "<accepted>";
}

json base_config() {
  return json::parse(R"({"L": 4, "omega": [0.01, 0.2], "epsilon": [0.0, 0.1], "cycles": [0, 1, 2, 3],
                         "observables": ["fidelity", "qfi"]})");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config parsing resolves grids and units") {
  const auto c = RunConfig::from_json(json::parse(R"({
    "L": [8, 10], "omega": {"log": {"min": 1e-3, "max": 1e-1, "per_decade": 2}}, "omega_units": "half_pi",
    "epsilon": {"linear": {"min": 0, "max": 1, "count": 5}}, "pulse_mode": "site-random",
    "disorder": 0.01, "realizations": 3, "initial_state": "neel",
    "cycles": {"range": {"start": 2, "stop": 10, "step": 4}}, "observables": ["fidelity", "entropies"],
    "output_dir": "x", "master_seed": 99, "threads": 2})"));
  CHECK(c.L == std::vector<int>{8, 10});
  REQUIRE(c.omega.size() == 5);
  CHECK(c.omega[0] == doctest::Approx(1e-3 * kHalfPi));
  CHECK(c.omega[4] == doctest::Approx(1e-1 * kHalfPi));
  CHECK(c.epsilon == std::vector<double>{0, 0.25, 0.5, 0.75, 1.0});
  CHECK(c.cycles == std::vector<std::size_t>{2, 6, 10});
  CHECK(c.pulse_mode == PulseMode::SiteRandom);
  CHECK(c.initial_state.kind == InitialState::Kind::Neel);
  CHECK(c.master_seed == 99);
  CHECK(c.grid_points() == 2 * 5 * 5);
  CHECK(c.wants_dynamics());
  CHECK(c.wants_spectrum());

  const auto again = RunConfig::from_json(c.to_json());
  CHECK(again.to_json() == c.to_json());
}

TEST_CASE("config validation reports the field path") {
  auto j = base_config();
  j["observables"] = json::array();
  CHECK(validation_field(j) == "observables");

  j = base_config();
  j["colour"] = "blue";
  CHECK(validation_field(j) == "colour");

  j = base_config();
  j["L"] = {4, 5};
  CHECK(validation_field(j) == "L[1]");

  j = base_config();
  j["omega"] = {{"log", {{"min", -1}, {"max", 1}}}};
  CHECK(validation_field(j) == "omega.log.min");

  j = base_config();
  j["epsilon"] = json::array();
  CHECK(validation_field(j) == "epsilon");

  j = base_config();
  j["realizations"] = 0;
  CHECK(validation_field(j) == "realizations");

  j = base_config();
  j.erase("cycles");
  CHECK(validation_field(j) == "cycles");

  j = base_config();
  j["observables"] = {"fidelity", "magic"};
  CHECK(validation_field(j) == "observables[1]");

  j = base_config();
  j["initial_state"] = "basis:16";
  CHECK(validation_field(j) == "initial_state");

  j = base_config();
  j["degenerate_basis"] = "haar";
  CHECK(validation_field(j) == "degenerate_basis");

  j = base_config();
  j["degenerate_basis"] = "generic";
  CHECK(RunConfig::from_json(j).degenerate_basis == DegenerateBasis::Generic);

  j = base_config();
  j.erase("omega");
  CHECK(validation_field(j) == "omega");

  CHECK(validation_field(base_config()) == "<accepted>");
}

TEST_CASE("resource guards refuse the whole run") {
  auto j = base_config();
  j["L"] = {4, 26};
  const auto c = RunConfig::from_json(j);
  CHECK_THROWS_AS(c.check_resources(), ResourceLimitError);
  CHECK_THROWS_AS(run(c), ResourceLimitError);

  j = base_config();
  j["L"] = 14;
  j["observables"] = {"pairing"};
  CHECK_THROWS_AS(run(RunConfig::from_json(j)), ResourceLimitError);

  j["observables"] = {"fidelity"};
  CHECK_NOTHROW(RunConfig::from_json(j).check_resources());
}

TEST_CASE("run produces seeded tables in work-unit order") {
  auto j = base_config();
  j["disorder"] = 0.05;
  j["realizations"] = 2;
  j["master_seed"] = 5;
  const auto c = RunConfig::from_json(j);
  const auto rs = run(c);
  const auto& fid = rs.table("fidelity");
  CHECK(fid.size() == 2 * 2 * 2 * 4);
  const auto& fis = rs.table("fisher");
  CHECK(fis.header() == std::vector<std::string>{"L", "omega_rad", "epsilon", "n", "FQ", "FC", "seed"});
  for (std::size_t i = 0; i < fis.size(); ++i) CHECK(satisfies_hierarchy(fis.number(i, "FQ"), fis.number(i, "FC")));
  CHECK(rs.table("fidelity_mean").size() == 2 * 2 * 4);
  CHECK_FALSE(rs.has("spectrum"));
  CHECK_THROWS_AS(rs.table("spectrum"), MissingColumnError);

  // Row order: L, then epsilon, then omega, then realization, then n.
  CHECK(fid.text(0, "epsilon") == "0");
  CHECK(fid.number(4, "realization") == 1);
  CHECK(fid.number(8, "omega_rad") == doctest::Approx(0.2));
  // The seed column matches the documented derivation.
  CHECK(fid.text(4, "seed") == std::to_string(derive_seed(5, 0, 1)));
  CHECK(fid.text(16, "seed") == std::to_string(derive_seed(5, grid_index(c, 0, 1, 0), 0)));

  // Each row reproduces an independent evolution of the recorded model.
  const auto seed = std::stoull(fid.text(13, "seed"));
  const auto spec = unit_spec(c, 4, fid.number(13, "omega_rad"), fid.number(13, "epsilon"), seed);
  CHECK(fid.number(13, "F") ==
        doctest::Approx(revival_fidelity(spec, StateVector::basis(4, 0), static_cast<std::size_t>(fid.number(13, "n"))))
            .epsilon(1e-14));

  const auto& m = rs.manifest;
  CHECK(m["prng"] == "mt19937_64+splitmix64");
  CHECK(m["units"].size() == 8);
  CHECK(m["units"][1]["seed"] == derive_seed(5, 0, 1));
  CHECK(m["config"]["master_seed"] == 5);
  CHECK(m["fisher_parameter"] == "Omega");
  CHECK(m["versions"].contains("eigen"));
  CHECK(m["versions"].contains("lapack"));
  CHECK(m.contains("wall_seconds"));
}

TEST_CASE("run output is byte-identical across repeats and thread counts") {
  auto j = base_config();
  j["L"] = {4, 6};
  j["disorder"] = 0.02;
  j["pulse_mode"] = "site-random";
  j["epsilon"] = 0.1;
  j["realizations"] = 3;
  j["observables"] = {"fidelity", "qfi", "cfi", "entropies", "pairing"};
  j["per_state_entropies"] = true;
  const auto dir = std::filesystem::temp_directory_path() / "dtc_expcli_determinism";
  std::filesystem::remove_all(dir);
  const std::vector<std::pair<std::string, int>> runs{{"first", 1}, {"repeat", 1}, {"threaded", 3}};
  for (const auto& [name, threads] : runs) {
    j["threads"] = threads;
    run(RunConfig::from_json(j)).write((dir / name).string());
  }
  std::size_t compared = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir / "first")) {
    if (entry.path().extension() != ".csv") continue;
    const auto name = entry.path().filename();
    CHECK(slurp(entry.path()) == slurp(dir / "repeat" / name));
    CHECK(slurp(entry.path()) == slurp(dir / "threaded" / name));
    ++compared;
  }
  // Six summary tables plus one per-state table per (L, omega, realization).
  CHECK(compared == 6 + 2 * 2 * 3);
  CHECK(std::filesystem::exists(dir / "first" / "manifest.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("first fidelity figure recipe: DTC rows stay at one, others oscillate") {
  json j = json::parse(R"({"L": 12, "epsilon": 0.01, "omega": [1e-4, 1e-2, 0.05, 0.1], "omega_units": "half_pi",
                           "cycles": {"range": {"start": 0, "stop": 200, "step": 2}}, "observables": ["fidelity"]})");
  const auto rs = run(RunConfig::from_json(j));
  const auto& t = rs.table("fidelity");
  std::map<double, std::vector<double>> by_omega;
  for (std::size_t i = 0; i < t.size(); ++i) by_omega[t.number(i, "omega_rad")].push_back(t.number(i, "F"));
  REQUIRE(by_omega.size() == 4);
  auto it = by_omega.begin();
  for (double f : it->second) CHECK(f > 0.999);
  const auto& edge = std::next(it)->second;
  MESSAGE("omega = 1e-2 pi/2 minimum fidelity " << *std::min_element(edge.begin(), edge.end()));
  for (double f : edge) CHECK(f > 0.99);
  const auto& non_dtc = by_omega.rbegin()->second;
  const auto [lo, hi] = std::minmax_element(non_dtc.begin(), non_dtc.end());
  MESSAGE("omega = 0.1 pi/2 fidelity range [" << *lo << ", " << *hi << "]");
  CHECK(*hi - *lo > 0.01);
  int turns = 0;
  for (std::size_t k = 2; k < non_dtc.size(); ++k) {
    if ((non_dtc[k] - non_dtc[k - 1]) * (non_dtc[k - 1] - non_dtc[k - 2]) < 0) ++turns;
  }
  CHECK(turns >= 2);

  const auto bundle = emit_figure_data(rs, "fidelity-map");
  REQUIRE(bundle.size() == 1);
  CHECK(bundle[0].first == "fidelity-map-L12");
  CHECK(bundle[0].second.header() == std::vector<std::string>{"omega", "epsilon", "F_n100"});
  CHECK(bundle[0].second.size() == 4);
}

TEST_CASE("figure bundles") {
  auto j = base_config();
  j["L"] = {4, 6, 8};
  j["omega"] = {0.01, 0.1, 0.3};
  j["epsilon"] = 0.05;
  j["cycles"] = {0, 2, 4};
  j["observables"] = {"fidelity", "qfi", "cfi", "entropies", "pairing"};
  const auto rs = run(RunConfig::from_json(j));

  const auto scaling = emit_figure_data(rs, "qfi-size-scaling");
  REQUIRE(scaling.size() == 1);
  CHECK(scaling[0].second.header() == std::vector<std::string>{"L", "FQ_dtc", "FQ_peak"});
  CHECK(scaling[0].second.size() == 3);

  const auto thermal = emit_figure_data(rs, "thermal-entropy");
  const auto& t = thermal[0].second;
  CHECK(t.has_column("S_EE_page"));
  CHECK(t.has_column("S_DE_page"));
  for (std::size_t i = 0; i < t.size(); ++i) {
    const int L = static_cast<int>(t.number(i, "L"));
    CHECK(t.number(i, "S_EE_page") == doctest::Approx((L * std::log(2.0) - 1) / 2));
    CHECK(t.number(i, "S_DE_page") == doctest::Approx(std::log(0.48 * std::pow(2.0, L / 2)) + std::log(2.0)));
  }

  const auto vs_omega = emit_figure_data(rs, "qfi-vs-omega");
  CHECK(vs_omega.size() == 3 * 3);
  CHECK(vs_omega[0].second.header() == std::vector<std::string>{"omega_rad", "FQ"});

  const auto collapse = emit_figure_data(rs, "qfi-collapse-input", {.n = 4});
  CHECK(collapse[0].second.header() == std::vector<std::string>{"L", "x", "y", "sigma"});
  CHECK_NOTHROW(CurveFamily::from_table(collapse[0].second));

  for (const auto& id : figure_ids()) {
    if (id == "fidelity-map") continue;  // needs n = 100, checked below
    if (id == "entropy-collapse-input") {
      CHECK_THROWS_AS(emit_figure_data(rs, id), ArgumentError);
    } else {
      CHECK_NOTHROW(emit_figure_data(rs, id));
    }
  }
  CHECK_THROWS_AS(emit_figure_data(rs, "fidelity-map"), MissingColumnError);
  CHECK_THROWS_AS(emit_figure_data(rs, "nonexistent"), ArgumentError);

  j["observables"] = {"fidelity"};
  const auto only_f = run(RunConfig::from_json(j));
  CHECK_THROWS_AS(emit_figure_data(only_f, "qfi-vs-time"), MissingColumnError);
  CHECK_THROWS_AS(emit_figure_data(only_f, "thermal-entropy"), MissingColumnError);
}

TEST_CASE("circuit export: three-site example") {
  const std::vector<double> bonds{1, 2};
  const std::vector<double> angles(3, kHalfPi);
  const auto s = build_gate_schedule(bonds, kHalfPi, angles, 1);
  const std::vector<Gate> expected{Gate::zz(1, 2, kHalfPi), Gate::zz(2, 3, 2 * kHalfPi), Gate::x(1, kHalfPi),
                                   Gate::x(2, kHalfPi), Gate::x(3, kHalfPi)};
  CHECK(s.cycle == expected);
  CHECK(s.L == 3);
  CHECK(s.cycles == 1);
}

TEST_CASE("gate budget reproduces the quoted cycle limit") {
  GateBudget b;
  CHECK(b.cycle_ns() == 60.0);
  CHECK(b.max_cycles() == 100);
  b.t2_star_ns = 5999;
  CHECK(b.max_cycles() == 99);
  const auto s = export_circuit(FloquetSpec::clean(4, 0.0, 0.0), 150);
  CHECK_FALSE(s.within_budget());
  CHECK(s.to_json()["budget"]["max_cycles"] == 100);
}

TEST_CASE("exported schedules round-trip and reproduce the evolution") {
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const int L = 2 + 2 * (trial % 4);
    const auto spec = FloquetSpec(rng.uniform(0, 3), CouplingProfile::disordered(L, 0.05, 30 + trial),
                                  PulseProfile::site_random(L, 0.2, 40 + trial));
    const std::size_t n = 1 + static_cast<std::size_t>(trial) * 3;
    const auto s = export_circuit(spec, n);
    CHECK(s.cycle.size() == static_cast<std::size_t>(2 * L - 1));
    const auto psi0 = initial_state(InitialState::random(50 + trial), L);
    const Eigen::VectorXcd direct = evolve(psi0, spec, n).amplitudes();
    CHECK((simulate_schedule(s, psi0.amplitudes()) - direct).cwiseAbs().maxCoeff() < 1e-10);

    const auto from_json = GateSchedule::from_json(json::parse(s.to_json().dump()));
    CHECK(from_json.cycle == s.cycle);
    CHECK(from_json.cycles == n);
    const auto from_text = GateSchedule::from_text(s.to_text());
    CHECK(from_text.cycle == s.cycle);
  }
  CHECK_THROWS_AS(export_circuit(FloquetSpec::clean(4, 0.0, 0.0), 0), ArgumentError);
  GateSchedule broken = export_circuit(FloquetSpec::clean(4, 0.0, 0.0), 1);
  broken.cycle.pop_back();
  CHECK_THROWS_AS(broken.validate(), ArgumentError);
  CHECK_THROWS_AS(GateSchedule::from_text("ZZ 1 2 0.5\n"), ArgumentError);
}

TEST_CASE("observable names") {
  for (auto o : {Observable::Fidelity, Observable::Qfi, Observable::Cfi, Observable::Entropies, Observable::Pairing}) {
    CHECK(parse_observable(to_string(o)) == o);
  }
  CHECK(is_dynamical(Observable::Cfi));
  CHECK_FALSE(is_dynamical(Observable::Pairing));
}
