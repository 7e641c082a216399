// Command-line front end: sweeps, spectra, ensembles, collapses and circuit export.
#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "dtc/errors.hpp"
#include "dtc/expcli/circuit.hpp"
#include "dtc/expcli/config.hpp"
#include "dtc/expcli/figures.hpp"
#include "dtc/expcli/run.hpp"
#include "dtc/fss.hpp"
#include "dtc/random.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitResource = 3;
constexpr int kExitNumerical = 4;
constexpr int kExitOther = 1;

struct RunFlags {
  std::vector<int> L{8};
  std::vector<double> omega;
  std::string omega_units = "rad";
  std::vector<double> epsilon{0.0};
  std::string pulse_mode = "uniform";
  double disorder = 0.0;
  int realizations = 1;
  std::string initial_state = "all-up";
  std::vector<long long> cycles;
  std::optional<long long> max_cycles;
  std::vector<std::string> observables;
  std::string output = "out";
  std::uint64_t seed = 0;
  int threads = 1;
  std::string degenerate_basis = "localized";
  double pairing_tolerance = 0.05;
  double probability_floor = 1e-12;
  bool per_state = false;
  std::string config_file;
  std::vector<std::string> figures;
  std::optional<std::size_t> figure_n;
};

void add_run_flags(CLI::App* sub, RunFlags& f, bool needs_cycles) {
  sub->add_option("-L,--sites", f.L, "chain lengths (even)")->delimiter(',');
  sub->add_option("--omega", f.omega, "omega deviations")->delimiter(',');
  sub->add_option("--omega-units", f.omega_units, "rad or half_pi")->check(CLI::IsMember({"rad", "half_pi"}));
  sub->add_option("--epsilon", f.epsilon, "pulse imperfections")->delimiter(',');
  sub->add_option("--pulse-mode", f.pulse_mode, "uniform or site-random");
  sub->add_option("--disorder", f.disorder, "coupling disorder strength D");
  sub->add_option("--realizations", f.realizations, "disorder realizations R");
  sub->add_option("--initial-state", f.initial_state, "all-up, neel, basis:<z>, random:<seed>");
  if (needs_cycles) {
    sub->add_option("--cycles", f.cycles, "period counts to record")->delimiter(',');
    sub->add_option("--max-cycles", f.max_cycles, "record every period 0..N");
  }
  sub->add_option("--observables", f.observables, "override the subcommand's observables")->delimiter(',');
  sub->add_option("-o,--output", f.output, "output directory");
  sub->add_option("--seed", f.seed, "master seed");
  sub->add_option("--threads", f.threads, "worker threads");
  sub->add_option("--degenerate-basis", f.degenerate_basis, "basis inside degenerate eigenspaces")
      ->check(CLI::IsMember({"localized", "generic"}));
  sub->add_option("--pairing-tolerance", f.pairing_tolerance, "pi-pairing tolerance");
  sub->add_option("--probability-floor", f.probability_floor, "CFI probability floor");
  sub->add_flag("--per-state-entropies", f.per_state, "write per-eigenstate entropy tables");
  sub->add_option("--figure", f.figures, "figure bundle to emit (repeatable)");
  sub->add_option("--figure-n", f.figure_n, "period count for single-time bundles");
  sub->add_option("--config", f.config_file, "JSON config; its fields override flags");
}

json flags_to_json(const RunFlags& f, const std::vector<std::string>& default_observables) {
  json j;
  j["L"] = f.L;
  if (!f.omega.empty()) j["omega"] = f.omega;
  j["omega_units"] = f.omega_units;
  j["epsilon"] = f.epsilon;
  j["pulse_mode"] = f.pulse_mode;
  j["disorder"] = f.disorder;
  j["realizations"] = f.realizations;
  j["initial_state"] = f.initial_state;
  if (f.max_cycles) {
    j["cycles"] = {{"range", {{"start", 0}, {"stop", *f.max_cycles}, {"step", 1}}}};
  } else if (!f.cycles.empty()) {
    j["cycles"] = f.cycles;
  }
  j["observables"] = f.observables.empty() ? default_observables : f.observables;
  j["output_dir"] = f.output;
  j["master_seed"] = f.seed;
  j["threads"] = f.threads;
  j["degenerate_basis"] = f.degenerate_basis;
  j["pairing_tolerance"] = f.pairing_tolerance;
  j["probability_floor"] = f.probability_floor;
  j["per_state_entropies"] = f.per_state;
  return j;
}

int do_run(const RunFlags& f, const std::vector<std::string>& default_observables) {
  json j = flags_to_json(f, default_observables);
  if (!f.config_file.empty()) {
    std::ifstream in(f.config_file);
    if (!in) throw dtc::ValidationError("--config", "cannot open '" + f.config_file + "'");
    json file;
    try {
      file = json::parse(in);
    } catch (const json::parse_error& e) {
      throw dtc::ValidationError("--config", std::string("invalid JSON: ") + e.what());
    }
    if (!file.is_object()) throw dtc::ValidationError("$", "configuration must be a JSON object");
    j.update(file);
  }
  const auto config = dtc::RunConfig::from_json(j);
  const auto results = dtc::run(config);
  results.write(config.output_dir);
  for (const auto& id : f.figures) {
    dtc::FigureOptions opt;
    opt.n = f.figure_n;
    dtc::write_bundle(dtc::emit_figure_data(results, id, opt), config.output_dir + "/figures");
  }
  std::cout << "wrote " << results.tables.size() << " tables to " << config.output_dir << " ("
            << results.manifest["units"].size() << " work units, "
            << results.manifest["wall_seconds"].get<double>() << " s)\n";
  return kExitOk;
}

struct CollapseFlags {
  std::string input;
  std::vector<double> initial{0.0, 1.0, 1.0};
  std::vector<double> lower;
  std::vector<double> upper;
  int restarts = 3;
  std::uint64_t seed = 20240917;
  std::string output;
};

int do_collapse(const CollapseFlags& f) {
  const auto family = dtc::CurveFamily::from_table(dtc::io::Table::load(f.input));
  auto triple = [](const std::vector<double>& v, const char* what) {
    if (v.size() != 3) throw dtc::ValidationError(what, "expected three values x_c,zeta,nu");
    return dtc::CollapseParams{v[0], v[1], v[2]};
  };
  dtc::CollapseBounds bounds;
  if (!f.lower.empty()) bounds.lower = triple(f.lower, "--lower");
  if (!f.upper.empty()) bounds.upper = triple(f.upper, "--upper");
  dtc::CollapseOptions opt;
  opt.restarts = f.restarts;
  opt.seed = f.seed;
  const auto result = dtc::optimize_collapse(family, triple(f.initial, "--init"), bounds, opt);
  const std::string text = result.to_json();
  if (f.output.empty()) {
    std::cout << text << "\n";
  } else {
    dtc::io::write_file(f.output, text + "\n");
  }
  return kExitOk;
}

struct CircuitFlags {
  int L = 4;
  double omega = 0.0;
  std::string omega_units = "rad";
  double epsilon = 0.0;
  std::string pulse_mode = "uniform";
  double disorder = 0.0;
  std::uint64_t seed = 0;
  std::size_t cycles = 1;
  std::string format = "json";
  dtc::GateBudget budget;
  std::string output;
};

int do_circuit(const CircuitFlags& f) {
  const double omega = f.omega_units == "half_pi" ? f.omega * dtc::kHalfPi : f.omega;
  if (f.cycles < 1) throw dtc::ValidationError("--cycles", "must be >= 1");
  dtc::GateSchedule schedule;
  if (f.L % 2 != 0) {
    // Odd chains exist only at gate level: clean couplings, uniform pulse.
    if (f.L < 2) throw dtc::ValidationError("--sites", "must be >= 2");
    if (f.disorder != 0.0 || f.pulse_mode != "uniform") {
      throw dtc::ValidationError("--sites", "odd chains support only clean couplings and a uniform pulse");
    }
    std::vector<double> coefficients, angles(static_cast<std::size_t>(f.L), (1.0 - f.epsilon) * dtc::kHalfPi);
    for (int j = 1; j < f.L; ++j) coefficients.push_back(j);
    schedule = dtc::build_gate_schedule(coefficients, dtc::kHalfPi - omega, angles, f.cycles, f.budget);
  } else {
    dtc::RunConfig c;
    c.L = {f.L};
    c.omega = {omega};
    c.epsilon = {f.epsilon};
    c.pulse_mode = dtc::parse_pulse_mode(f.pulse_mode);
    c.disorder = f.disorder;
    c.observables = {dtc::Observable::Fidelity};
    c.cycles = {f.cycles};
    c.validate();
    const auto spec = dtc::unit_spec(c, f.L, omega, f.epsilon, dtc::derive_seed(f.seed, 0, 0));
    schedule = dtc::export_circuit(spec, f.cycles, f.budget);
  }
  const std::string text = f.format == "text" ? schedule.to_text() : schedule.to_json().dump(2) + "\n";
  if (f.output.empty()) {
    std::cout << text;
  } else {
    dtc::io::write_file(f.output, text);
  }
  if (!schedule.within_budget()) {
    std::cerr << "warning: " << f.cycles << " cycles exceed the coherence budget of " << schedule.budget.max_cycles()
              << " cycles\n";
  }
  return kExitOk;
}

int exit_code(const dtc::Error& e) {
  switch (e.kind()) {
    case dtc::ErrorKind::ResourceLimit: return kExitResource;
    case dtc::ErrorKind::NumericalFailure: return kExitNumerical;
    default: return kExitValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periodically driven Ising chain: dynamics, Fisher information, spectra and scaling collapses"};
  app.require_subcommand(1);

  RunFlags evolve_f, fi_f, spectrum_f, ensemble_f;
  auto* evolve = app.add_subcommand("evolve", "revival fidelity at recorded period counts");
  add_run_flags(evolve, evolve_f, true);
  auto* fi = app.add_subcommand("fi-sweep", "quantum and classical Fisher information over a grid");
  add_run_flags(fi, fi_f, true);
  auto* spectrum = app.add_subcommand("spectrum", "quasi-energies, eigenstate entropies and pi-pairing");
  add_run_flags(spectrum, spectrum_f, false);
  auto* ensemble = app.add_subcommand("ensemble", "disorder-averaged fidelity and Fisher information");
  add_run_flags(ensemble, ensemble_f, true);

  CollapseFlags collapse_f;
  auto* collapse = app.add_subcommand("collapse", "finite-size scaling collapse of an L,x,y[,sigma] table");
  collapse->add_option("input", collapse_f.input, "CSV input")->required();
  collapse->add_option("--init", collapse_f.initial, "initial x_c,zeta,nu")->delimiter(',');
  collapse->add_option("--lower", collapse_f.lower, "lower bounds x_c,zeta,nu")->delimiter(',');
  collapse->add_option("--upper", collapse_f.upper, "upper bounds x_c,zeta,nu")->delimiter(',');
  collapse->add_option("--restarts", collapse_f.restarts, "optimizer restarts");
  collapse->add_option("--seed", collapse_f.seed, "restart jitter seed");
  collapse->add_option("-o,--output", collapse_f.output, "JSON output file (default stdout)");

  CircuitFlags circuit_f;
  auto* circuit = app.add_subcommand("circuit-export", "gate schedule of n drive periods");
  circuit->add_option("-L,--sites", circuit_f.L, "chain length");
  circuit->add_option("--omega", circuit_f.omega, "omega deviation");
  circuit->add_option("--omega-units", circuit_f.omega_units)->check(CLI::IsMember({"rad", "half_pi"}));
  circuit->add_option("--epsilon", circuit_f.epsilon, "pulse imperfection");
  circuit->add_option("--pulse-mode", circuit_f.pulse_mode, "uniform or site-random");
  circuit->add_option("--disorder", circuit_f.disorder, "coupling disorder strength D");
  circuit->add_option("--seed", circuit_f.seed, "master seed");
  circuit->add_option("-n,--cycles", circuit_f.cycles, "number of periods");
  circuit->add_option("--format", circuit_f.format)->check(CLI::IsMember({"json", "text"}));
  circuit->add_option("--zz-layer-ns", circuit_f.budget.zz_layer_ns, "two-qubit layer duration");
  circuit->add_option("--x-layer-ns", circuit_f.budget.x_layer_ns, "single-qubit layer duration");
  circuit->add_option("--t2-star-ns", circuit_f.budget.t2_star_ns, "coherence time T2*");
  circuit->add_option("-o,--output", circuit_f.output, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*evolve) return do_run(evolve_f, {"fidelity"});
    if (*fi) return do_run(fi_f, {"qfi", "cfi"});
    if (*spectrum) return do_run(spectrum_f, {"entropies", "pairing"});
    if (*ensemble) return do_run(ensemble_f, {"fidelity", "qfi"});
    if (*collapse) return do_collapse(collapse_f);
    if (*circuit) return do_circuit(circuit_f);
  } catch (const dtc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
  return kExitOk;
}
