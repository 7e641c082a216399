#include "dtc/expcli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "dtc/errors.hpp"
#include "dtc/metrology.hpp"

namespace dtc {

using nlohmann::json;

std::string to_string(Observable o) {
  switch (o) {
    case Observable::Fidelity: return "fidelity";
    case Observable::Qfi: return "qfi";
    case Observable::Cfi: return "cfi";
    case Observable::Entropies: return "entropies";
    case Observable::Pairing: return "pairing";
  }
  return {};
}

Observable parse_observable(const std::string& text) {
  for (auto o : {Observable::Fidelity, Observable::Qfi, Observable::Cfi, Observable::Entropies, Observable::Pairing}) {
    if (to_string(o) == text) return o;
  }
  throw ArgumentError("unknown observable '" + text + "'");
}

bool is_dynamical(Observable o) { return o == Observable::Fidelity || o == Observable::Qfi || o == Observable::Cfi; }

bool RunConfig::wants(Observable o) const { return std::find(observables.begin(), observables.end(), o) != observables.end(); }

bool RunConfig::wants_dynamics() const { return std::any_of(observables.begin(), observables.end(), is_dynamical); }

bool RunConfig::wants_spectrum() const { return wants(Observable::Entropies) || wants(Observable::Pairing); }

namespace {

const std::set<std::string> kKnownFields = {
    "L",         "omega",        "omega_units",   "epsilon",     "pulse_mode",        "disorder",
    "realizations", "initial_state", "cycles",    "observables", "output_dir",        "master_seed",
    "pairing_tolerance", "probability_floor", "per_state_entropies", "threads", "degenerate_basis"};

double number_at(const json& j, const std::string& path) {
  if (!j.is_number()) throw ValidationError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ValidationError(path, "must be finite");
  return v;
}

long long integer_at(const json& j, const std::string& path) {
  if (j.is_number_integer() || j.is_number_unsigned()) return j.get<long long>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::floor(v) == v && std::abs(v) < 9e15) return static_cast<long long>(v);
  }
  throw ValidationError(path, "expected an integer");
}

const json& member(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) throw ValidationError(path + "." + key, "required field is missing");
  return obj.at(key);
}

std::vector<double> real_grid(const json& j, const std::string& path, bool allow_log) {
  if (j.is_number()) return {number_at(j, path)};
  if (j.is_array()) {
    if (j.empty()) throw ValidationError(path, "grid must not be empty");
    std::vector<double> v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(number_at(j[i], path + "[" + std::to_string(i) + "]"));
    return v;
  }
  if (j.is_object() && j.size() == 1) {
    if (j.contains("linear")) {
      const std::string p = path + ".linear";
      const json& g = j.at("linear");
      const double lo = number_at(member(g, "min", p), p + ".min");
      const double hi = number_at(member(g, "max", p), p + ".max");
      const long long count = integer_at(member(g, "count", p), p + ".count");
      if (count < 1) throw ValidationError(p + ".count", "must be >= 1");
      if (hi < lo) throw ValidationError(p + ".max", "must be >= min");
      std::vector<double> v;
      for (long long i = 0; i < count; ++i) {
        v.push_back(count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
      }
      return v;
    }
    if (allow_log && j.contains("log")) {
      const std::string p = path + ".log";
      const json& g = j.at("log");
      const double lo = number_at(member(g, "min", p), p + ".min");
      const double hi = number_at(member(g, "max", p), p + ".max");
      const long long per_decade = g.contains("per_decade") ? integer_at(g.at("per_decade"), p + ".per_decade") : 40;
      if (!(lo > 0.0)) throw ValidationError(p + ".min", "must be positive");
      if (hi < lo) throw ValidationError(p + ".max", "must be >= min");
      if (per_decade < 1) throw ValidationError(p + ".per_decade", "must be >= 1");
      auto v = log_grid(lo, hi, static_cast<int>(per_decade));
      if (v.empty()) throw ValidationError(p, "no log-grid point falls inside [min, max]");
      return v;
    }
  }
  throw ValidationError(path, allow_log ? "expected a number, an array, or {\"linear\"|\"log\": {...}}"
                                        : "expected a number, an array, or {\"linear\": {...}}");
}

std::vector<std::size_t> cycle_grid(const json& j, const std::string& path) {
  std::vector<long long> raw;
  if (j.is_number()) {
    raw.push_back(integer_at(j, path));
  } else if (j.is_array()) {
    if (j.empty()) throw ValidationError(path, "cycle set must not be empty");
    for (std::size_t i = 0; i < j.size(); ++i) raw.push_back(integer_at(j[i], path + "[" + std::to_string(i) + "]"));
  } else if (j.is_object() && j.size() == 1 && j.contains("range")) {
    const std::string p = path + ".range";
    const json& g = j.at("range");
    const long long start = integer_at(member(g, "start", p), p + ".start");
    const long long stop = integer_at(member(g, "stop", p), p + ".stop");
    const long long step = g.contains("step") ? integer_at(g.at("step"), p + ".step") : 1;
    if (step < 1) throw ValidationError(p + ".step", "must be >= 1");
    if (stop < start) throw ValidationError(p + ".stop", "must be >= start");
    for (long long n = start; n <= stop; n += step) raw.push_back(n);
  } else {
    throw ValidationError(path, "expected an integer, an array, or {\"range\": {...}}");
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] < 0) throw ValidationError(path, "cycle counts must be >= 0");
    out.push_back(static_cast<std::size_t>(raw[i]));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("$", "configuration must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kKnownFields.count(key)) throw ValidationError(key, "unknown field");
  }
  RunConfig c;

  if (!j.contains("L")) throw ValidationError("L", "required field is missing");
  const json& jl = j.at("L");
  if (jl.is_array()) {
    if (jl.empty()) throw ValidationError("L", "must not be empty");
    for (std::size_t i = 0; i < jl.size(); ++i) {
      c.L.push_back(static_cast<int>(integer_at(jl[i], "L[" + std::to_string(i) + "]")));
    }
  } else {
    c.L.push_back(static_cast<int>(integer_at(jl, "L")));
  }

  if (!j.contains("omega")) throw ValidationError("omega", "required field is missing");
  c.omega = real_grid(j.at("omega"), "omega", true);
  if (j.contains("omega_units")) {
    const json& u = j.at("omega_units");
    if (!u.is_string()) throw ValidationError("omega_units", "expected a string");
    const auto units = u.get<std::string>();
    if (units == "half_pi") {
      for (auto& w : c.omega) w *= kHalfPi;
    } else if (units != "rad") {
      throw ValidationError("omega_units", "expected \"rad\" or \"half_pi\"");
    }
  }
  if (j.contains("epsilon")) c.epsilon = real_grid(j.at("epsilon"), "epsilon", false);

  if (j.contains("pulse_mode")) {
    const json& m = j.at("pulse_mode");
    if (!m.is_string()) throw ValidationError("pulse_mode", "expected a string");
    try {
      c.pulse_mode = parse_pulse_mode(m.get<std::string>());
    } catch (const ArgumentError& e) {
      throw ValidationError("pulse_mode", e.what());
    }
  }
  if (j.contains("disorder")) c.disorder = number_at(j.at("disorder"), "disorder");
  if (j.contains("realizations")) c.realizations = static_cast<int>(integer_at(j.at("realizations"), "realizations"));
  if (j.contains("initial_state")) {
    const json& s = j.at("initial_state");
    if (!s.is_string()) throw ValidationError("initial_state", "expected a string");
    try {
      c.initial_state = InitialState::parse(s.get<std::string>());
    } catch (const ArgumentError& e) {
      throw ValidationError("initial_state", e.what());
    }
  }
  if (j.contains("cycles")) c.cycles = cycle_grid(j.at("cycles"), "cycles");

  if (!j.contains("observables")) throw ValidationError("observables", "required field is missing");
  const json& jo = j.at("observables");
  if (!jo.is_array()) throw ValidationError("observables", "expected an array of strings");
  for (std::size_t i = 0; i < jo.size(); ++i) {
    const std::string p = "observables[" + std::to_string(i) + "]";
    if (!jo[i].is_string()) throw ValidationError(p, "expected a string");
    Observable o;
    try {
      o = parse_observable(jo[i].get<std::string>());
    } catch (const ArgumentError& e) {
      throw ValidationError(p, e.what());
    }
    if (c.wants(o)) throw ValidationError(p, "duplicate observable");
    c.observables.push_back(o);
  }

  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string()) throw ValidationError("output_dir", "expected a string");
    c.output_dir = j.at("output_dir").get<std::string>();
  }
  if (j.contains("master_seed")) {
    const json& s = j.at("master_seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      throw ValidationError("master_seed", "expected a non-negative integer");
    }
    c.master_seed = s.get<std::uint64_t>();
  }
  if (j.contains("degenerate_basis")) {
    const json& b = j.at("degenerate_basis");
    if (!b.is_string()) throw ValidationError("degenerate_basis", "expected a string");
    try {
      c.degenerate_basis = parse_degenerate_basis(b.get<std::string>());
    } catch (const ArgumentError& e) {
      throw ValidationError("degenerate_basis", e.what());
    }
  }
  if (j.contains("pairing_tolerance")) c.pairing_tolerance = number_at(j.at("pairing_tolerance"), "pairing_tolerance");
  if (j.contains("probability_floor")) c.probability_floor = number_at(j.at("probability_floor"), "probability_floor");
  if (j.contains("per_state_entropies")) {
    if (!j.at("per_state_entropies").is_boolean()) throw ValidationError("per_state_entropies", "expected a boolean");
    c.per_state_entropies = j.at("per_state_entropies").get<bool>();
  }
  if (j.contains("threads")) c.threads = static_cast<int>(integer_at(j.at("threads"), "threads"));

  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("$", "cannot open configuration file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("$", std::string("invalid JSON: ") + e.what());
  }
  return from_json(j);
}

void RunConfig::validate() const {
  if (L.empty()) throw ValidationError("L", "must not be empty");
  for (std::size_t i = 0; i < L.size(); ++i) {
    if (L[i] < 2 || L[i] % 2 != 0) throw ValidationError("L[" + std::to_string(i) + "]", "chain length must be even and >= 2");
  }
  if (omega.empty()) throw ValidationError("omega", "grid must not be empty");
  if (epsilon.empty()) throw ValidationError("epsilon", "grid must not be empty");
  if (!(disorder >= 0.0)) throw ValidationError("disorder", "must be >= 0");
  if (realizations < 1) throw ValidationError("realizations", "must be >= 1");
  if (observables.empty()) throw ValidationError("observables", "must not be empty");
  if (wants_dynamics() && cycles.empty()) throw ValidationError("cycles", "required when dynamical observables are requested");
  if (!(pairing_tolerance > 0.0)) throw ValidationError("pairing_tolerance", "must be positive");
  if (!(probability_floor > 0.0)) throw ValidationError("probability_floor", "must be positive");
  if (threads < 1) throw ValidationError("threads", "must be >= 1");
  if (output_dir.empty()) throw ValidationError("output_dir", "must not be empty");
  if (initial_state.kind == InitialState::Kind::Basis) {
    for (std::size_t i = 0; i < L.size(); ++i) {
      if (L[i] < 64 && initial_state.z >= hilbert_dim(L[i])) {
        throw ValidationError("initial_state", "basis label out of range for L=" + std::to_string(L[i]));
      }
    }
  }
}

void RunConfig::check_resources() const {
  for (int l : L) {
    if (wants_dynamics() && l > kMaxDynamicsSites) {
      throw ResourceLimitError("refused: dynamics at L=" + std::to_string(l) + " exceeds the limit of " +
                               std::to_string(kMaxDynamicsSites) + " sites (state vector of 2^L amplitudes)");
    }
    if (wants_spectrum() && l > kMaxDenseSites) {
      throw ResourceLimitError("refused: spectra at L=" + std::to_string(l) + " exceed the limit of " +
                               std::to_string(kMaxDenseSites) + " sites (dense 2^L x 2^L eigenproblem)");
    }
  }
}

json RunConfig::to_json() const {
  json j;
  j["L"] = L;
  j["omega"] = omega;
  j["omega_units"] = "rad";
  j["epsilon"] = epsilon;
  j["pulse_mode"] = to_string(pulse_mode);
  j["disorder"] = disorder;
  j["realizations"] = realizations;
  j["initial_state"] = initial_state.to_string();
  j["cycles"] = cycles;
  std::vector<std::string> obs;
  for (auto o : observables) obs.push_back(to_string(o));
  j["observables"] = obs;
  j["output_dir"] = output_dir;
  j["master_seed"] = master_seed;
  j["degenerate_basis"] = to_string(degenerate_basis);
  j["pairing_tolerance"] = pairing_tolerance;
  j["probability_floor"] = probability_floor;
  j["per_state_entropies"] = per_state_entropies;
  j["threads"] = threads;
  return j;
}

}  // namespace dtc
