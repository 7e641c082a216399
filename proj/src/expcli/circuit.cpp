#include "dtc/expcli/circuit.hpp"

#include <cmath>
#include <sstream>

#include "dtc/csv.hpp"
#include "dtc/errors.hpp"
#include "dtc/evolve.hpp"

namespace dtc {

using nlohmann::json;

std::size_t GateBudget::max_cycles() const {
  if (!(zz_layer_ns > 0.0) || !(x_layer_ns > 0.0) || !(t2_star_ns > 0.0)) {
    throw ArgumentError("gate durations and T2* must be positive");
  }
  return static_cast<std::size_t>(std::floor(t2_star_ns / cycle_ns() + 1e-9));
}

json GateBudget::to_json() const {
  return {{"zz_layer_ns", zz_layer_ns},
          {"x_layer_ns", x_layer_ns},
          {"t2_star_ns", t2_star_ns},
          {"cycle_ns", cycle_ns()},
          {"max_cycles", max_cycles()}};
}

void GateSchedule::validate() const {
  if (L < 2) throw ArgumentError("gate schedule needs L >= 2");
  if (cycle.size() != static_cast<std::size_t>(2 * L - 1)) {
    throw ArgumentError("a cycle must hold L-1 ZZ gates and L X gates");
  }
  for (int j = 1; j < L; ++j) {
    const Gate& g = cycle[static_cast<std::size_t>(j - 1)];
    if (g.kind != Gate::Kind::ZZ || g.site_a != j || g.site_b != j + 1) {
      throw ArgumentError("gate " + std::to_string(j - 1) + " must be ZZ on bond (" + std::to_string(j) + "," +
                          std::to_string(j + 1) + ")");
    }
  }
  for (int j = 1; j <= L; ++j) {
    const Gate& g = cycle[static_cast<std::size_t>(L - 2 + j)];
    if (g.kind != Gate::Kind::X || g.site_a != j) {
      throw ArgumentError("gate " + std::to_string(L - 2 + j) + " must be X on site " + std::to_string(j));
    }
  }
  for (const Gate& g : cycle) {
    if (!std::isfinite(g.angle)) throw ArgumentError("gate angles must be finite");
  }
}

json GateSchedule::to_json() const {
  json gates = json::array();
  for (const Gate& g : cycle) {
    if (g.kind == Gate::Kind::ZZ) {
      gates.push_back({{"type", "ZZ"}, {"sites", {g.site_a, g.site_b}}, {"angle", g.angle}});
    } else {
      gates.push_back({{"type", "X"}, {"sites", {g.site_a}}, {"angle", g.angle}});
    }
  }
  return {{"L", L},
          {"cycles", cycles},
          {"convention", "ZZ(theta)=exp(-i theta Z Z), X(theta)=exp(-i theta X); gates act in list order"},
          {"cycle", gates},
          {"budget", budget.to_json()},
          {"within_budget", within_budget()}};
}

GateSchedule GateSchedule::from_json(const json& j) {
  try {
    GateSchedule s;
    s.L = j.at("L").get<int>();
    s.cycles = j.at("cycles").get<std::size_t>();
    for (const auto& g : j.at("cycle")) {
      const auto type = g.at("type").get<std::string>();
      const auto& sites = g.at("sites");
      const double angle = g.at("angle").get<double>();
      if (type == "ZZ" && sites.size() == 2) {
        s.cycle.push_back(Gate::zz(sites[0].get<int>(), sites[1].get<int>(), angle));
      } else if (type == "X" && sites.size() == 1) {
        s.cycle.push_back(Gate::x(sites[0].get<int>(), angle));
      } else {
        throw ArgumentError("malformed gate entry");
      }
    }
    if (j.contains("budget")) {
      const auto& b = j.at("budget");
      s.budget.zz_layer_ns = b.at("zz_layer_ns").get<double>();
      s.budget.x_layer_ns = b.at("x_layer_ns").get<double>();
      s.budget.t2_star_ns = b.at("t2_star_ns").get<double>();
    }
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("malformed gate schedule: ") + e.what());
  }
}

std::string GateSchedule::to_text() const {
  std::ostringstream out;
  out << "# L=" << L << " cycles=" << cycles << "\n";
  for (const Gate& g : cycle) {
    if (g.kind == Gate::Kind::ZZ) {
      out << "ZZ " << g.site_a << ' ' << g.site_b << ' ' << io::fmt(g.angle) << "\n";
    } else {
      out << "X " << g.site_a << ' ' << io::fmt(g.angle) << "\n";
    }
  }
  return out.str();
}

GateSchedule GateSchedule::from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  GateSchedule s;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (std::sscanf(line.c_str(), "# L=%d cycles=%zu", &s.L, &s.cycles) != 2) {
        throw ArgumentError("malformed gate list header: " + line);
      }
      header = true;
      continue;
    }
    std::istringstream ls(line);
    std::string type, angle;
    int a = 0, b = 0;
    if (!(ls >> type >> a)) throw ArgumentError("malformed gate line: " + line);
    if (type == "ZZ") {
      if (!(ls >> b >> angle)) throw ArgumentError("malformed gate line: " + line);
      s.cycle.push_back(Gate::zz(a, b, std::stod(angle)));
    } else if (type == "X") {
      if (!(ls >> angle)) throw ArgumentError("malformed gate line: " + line);
      s.cycle.push_back(Gate::x(a, std::stod(angle)));
    } else {
      throw ArgumentError("unknown gate type: " + type);
    }
  }
  if (!header) throw ArgumentError("gate list has no header");
  s.validate();
  return s;
}

GateSchedule build_gate_schedule(std::span<const double> bond_coefficients, double Omega,
                                 std::span<const double> pulse_angles, std::size_t cycles, const GateBudget& budget) {
  if (cycles < 1) throw ArgumentError("cycle count must be >= 1");
  if (pulse_angles.size() != bond_coefficients.size() + 1) {
    throw DimensionError("need one pulse angle per site and one coefficient per bond");
  }
  GateSchedule s;
  s.L = static_cast<int>(pulse_angles.size());
  s.cycles = cycles;
  s.budget = budget;
  for (std::size_t j = 0; j < bond_coefficients.size(); ++j) {
    const int site = static_cast<int>(j) + 1;
    s.cycle.push_back(Gate::zz(site, site + 1, bond_coefficients[j] * Omega));
  }
  for (std::size_t j = 0; j < pulse_angles.size(); ++j) s.cycle.push_back(Gate::x(static_cast<int>(j) + 1, pulse_angles[j]));
  s.validate();
  return s;
}

GateSchedule export_circuit(const FloquetSpec& spec, std::size_t n, const GateBudget& budget) {
  return build_gate_schedule(spec.coupling().coefficients(), spec.Omega(), spec.pulse().angles(), n, budget);
}

Eigen::VectorXcd simulate_schedule(const GateSchedule& schedule, const Eigen::VectorXcd& psi0) {
  schedule.validate();
  if (psi0.size() != static_cast<Eigen::Index>(hilbert_dim(schedule.L))) {
    throw DimensionError("state dimension does not match 2^L");
  }
  Eigen::VectorXcd psi = psi0;
  std::span<cplx> amps(psi.data(), static_cast<std::size_t>(psi.size()));
  for (std::size_t n = 0; n < schedule.cycles; ++n) {
    for (const Gate& g : schedule.cycle) {
      if (g.kind == Gate::Kind::ZZ) {
        kernels::zz_rotation(amps, schedule.L, g.site_a, g.site_b, g.angle);
      } else {
        kernels::x_rotation(amps, schedule.L, g.site_a, g.angle);
      }
    }
  }
  return psi;
}

}  // namespace dtc
