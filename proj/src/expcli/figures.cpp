#include "dtc/expcli/figures.hpp"

#include <algorithm>
#include <filesystem>
#include <map>

#include "dtc/errors.hpp"

namespace dtc {

namespace {

std::size_t pick_n(const RunConfig& c, const FigureOptions& o, std::size_t fallback_default, const std::string& what) {
  std::size_t n = fallback_default;
  if (o.n) {
    n = *o.n;
  } else if (fallback_default == 0) {
    auto it = std::find_if(c.cycles.begin(), c.cycles.end(), [](std::size_t k) { return k > 0; });
    if (it == c.cycles.end()) throw MissingColumnError(what + ": no period count > 0 was recorded");
    n = *it;
  }
  if (!std::binary_search(c.cycles.begin(), c.cycles.end(), n)) {
    throw MissingColumnError(what + ": period count n=" + std::to_string(n) + " was not recorded");
  }
  return n;
}

std::size_t as_index(double v) { return static_cast<std::size_t>(v); }

const io::Table& need(const ResultSet& rs, const std::string& table, Observable o) {
  if (!rs.config.wants(o) || !rs.has(table)) {
    throw MissingColumnError("observable '" + to_string(o) + "' was not computed (table " + table + ")");
  }
  return rs.table(table);
}

const io::Table& need_fisher(const ResultSet& rs) {
  if (!rs.has("fisher_mean")) throw MissingColumnError("observable 'qfi' was not computed (table fisher_mean)");
  return rs.table("fisher_mean");
}

std::string eps_suffix(const RunConfig& c, double eps) {
  if (c.epsilon.size() == 1) return "";
  const auto it = std::find(c.epsilon.begin(), c.epsilon.end(), eps);
  return "-e" + std::to_string(it - c.epsilon.begin());
}

}  // namespace

std::vector<std::string> figure_ids() {
  return {"fidelity-trace",       "fidelity-map",       "qfi-vs-omega",     "qfi-vs-time",
          "qfi-size-scaling",     "qfi-collapse-input", "fisher-time-averaged", "entropy-vs-epsilon",
          "thermal-entropy",      "entropy-collapse-input", "quasienergy-pairing", "ensemble-fidelity",
          "ensemble-qfi"};
}

FigureBundle emit_figure_data(const ResultSet& rs, const std::string& id, const FigureOptions& opt) {
  const RunConfig& c = rs.config;
  FigureBundle out;

  if (id == "fidelity-trace") {
    const auto& t = need(rs, "fidelity_mean", Observable::Fidelity);
    io::Table f({"L", "omega_rad", "epsilon", "n", "F"});
    for (std::size_t i = 0; i < t.size(); ++i) {
      f.add_row({t.text(i, "L"), t.text(i, "omega_rad"), t.text(i, "epsilon"), t.text(i, "n"), t.text(i, "F_mean")});
    }
    out.emplace_back(id, std::move(f));
  } else if (id == "fidelity-map") {
    const auto& t = need(rs, "fidelity_mean", Observable::Fidelity);
    const std::size_t n = pick_n(c, opt, 100, id);
    const std::string col = "F_n" + std::to_string(n);
    std::map<int, io::Table> per_L;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (as_index(t.number(i, "n")) != n) continue;
      const int L = static_cast<int>(t.number(i, "L"));
      auto [it, fresh] = per_L.try_emplace(L, io::Table({"omega", "epsilon", col}));
      it->second.add_row({t.text(i, "omega_rad"), t.text(i, "epsilon"), t.text(i, "F_mean")});
    }
    for (auto& [L, table] : per_L) out.emplace_back(id + "-L" + std::to_string(L), std::move(table));
  } else if (id == "qfi-vs-omega") {
    const auto& t = need_fisher(rs);
    std::map<std::string, io::Table> files;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const std::string name = id + "-L" + t.text(i, "L") + eps_suffix(c, t.number(i, "epsilon")) + "-n" + t.text(i, "n");
      auto [it, fresh] = files.try_emplace(name, io::Table({"omega_rad", "FQ"}));
      it->second.add_row({t.text(i, "omega_rad"), t.text(i, "FQ_mean")});
    }
    // Order files by (L, epsilon, n) as they first appear rather than lexically.
    std::vector<std::string> order;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const std::string name = id + "-L" + t.text(i, "L") + eps_suffix(c, t.number(i, "epsilon")) + "-n" + t.text(i, "n");
      if (std::find(order.begin(), order.end(), name) == order.end()) order.push_back(name);
    }
    for (const auto& name : order) out.emplace_back(name, std::move(files.at(name)));
  } else if (id == "qfi-vs-time") {
    const auto& t = need_fisher(rs);
    io::Table f({"L", "omega_rad", "epsilon", "n", "FQ", "FC"});
    for (std::size_t i = 0; i < t.size(); ++i) {
      f.add_row({t.text(i, "L"), t.text(i, "omega_rad"), t.text(i, "epsilon"), t.text(i, "n"), t.text(i, "FQ_mean"),
                 t.text(i, "FC_mean")});
    }
    out.emplace_back(id, std::move(f));
  } else if (id == "qfi-size-scaling") {
    const auto& t = need_fisher(rs);
    if (c.epsilon.size() != 1) throw ArgumentError(id + " needs a single epsilon value");
    const std::size_t n = pick_n(c, opt, 0, id);
    struct Acc {
      double omega_min = 1e300, fq_dtc = 0.0, fq_peak = -1.0;
    };
    std::map<int, Acc> acc;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (as_index(t.number(i, "n")) != n) continue;
      Acc& a = acc[static_cast<int>(t.number(i, "L"))];
      const double w = t.number(i, "omega_rad"), fq = t.number(i, "FQ_mean");
      if (w < a.omega_min) {
        a.omega_min = w;
        a.fq_dtc = fq;
      }
      a.fq_peak = std::max(a.fq_peak, fq);
    }
    io::Table f({"L", "FQ_dtc", "FQ_peak"});
    for (const auto& [L, a] : acc) f.add(L, a.fq_dtc, a.fq_peak);
    out.emplace_back(id, std::move(f));
  } else if (id == "qfi-collapse-input") {
    const auto& t = need_fisher(rs);
    if (c.epsilon.size() != 1) throw ArgumentError(id + " needs a single epsilon value");
    const std::size_t n = pick_n(c, opt, 0, id);
    io::Table f({"L", "x", "y", "sigma"});
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (as_index(t.number(i, "n")) != n) continue;
      const double fq = t.number(i, "FQ_mean");
      f.add(t.text(i, "L"), t.number(i, "omega_rad"), fq, std::max(opt.relative_sigma * fq, 1e-300));
    }
    out.emplace_back(id, std::move(f));
  } else if (id == "fisher-time-averaged") {
    const auto& t = need_fisher(rs);
    io::Table f({"L", "omega_rad", "epsilon", "FQ_avg", "FC_avg"});
    std::size_t samples = 0;
    double sq = 0.0, sc = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t.number(i, "n") > 0) {
        sq += t.number(i, "FQ_mean");
        sc += t.number(i, "FC_mean");
        ++samples;
      }
      const bool last = i + 1 == t.size() || t.text(i + 1, "L") != t.text(i, "L") ||
                        t.text(i + 1, "omega_rad") != t.text(i, "omega_rad") ||
                        t.text(i + 1, "epsilon") != t.text(i, "epsilon");
      if (last) {
        if (samples == 0) throw MissingColumnError(id + ": no period count > 0 was recorded");
        f.add(t.text(i, "L"), t.text(i, "omega_rad"), t.text(i, "epsilon"), sq / static_cast<double>(samples),
              sc / static_cast<double>(samples));
        samples = 0;
        sq = sc = 0.0;
      }
    }
    out.emplace_back(id, std::move(f));
  } else if (id == "entropy-vs-epsilon" || id == "thermal-entropy" || id == "entropy-collapse-input") {
    const auto& t = need(rs, "spectrum_mean", Observable::Entropies);
    io::Table f = id == "entropy-vs-epsilon" ? io::Table({"L", "omega_rad", "epsilon", "S_EE", "S_DE"})
                  : id == "thermal-entropy"
                      ? io::Table({"L", "omega_rad", "epsilon", "S_EE", "S_DE", "S_EE_page", "S_DE_page"})
                      : io::Table({"L", "x", "y"});
    if (id == "entropy-collapse-input" && c.omega.size() != 1) throw ArgumentError(id + " needs a single omega value");
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (id == "entropy-vs-epsilon") {
        f.add_row({t.text(i, "L"), t.text(i, "omega_rad"), t.text(i, "epsilon"), t.text(i, "S_EE_mean"),
                   t.text(i, "S_DE_mean")});
      } else if (id == "thermal-entropy") {
        f.add_row({t.text(i, "L"), t.text(i, "omega_rad"), t.text(i, "epsilon"), t.text(i, "S_EE_mean"),
                   t.text(i, "S_DE_mean"), t.text(i, "S_EE_page"), t.text(i, "S_DE_page")});
      } else {
        f.add_row({t.text(i, "L"), t.text(i, "epsilon"), t.text(i, "S_EE_mean")});
      }
    }
    out.emplace_back(id, std::move(f));
  } else if (id == "quasienergy-pairing") {
    const auto& t = need(rs, "spectrum_mean", Observable::Pairing);
    io::Table f({"L", "omega_rad", "epsilon", "pairing_fraction"});
    for (std::size_t i = 0; i < t.size(); ++i) {
      f.add_row({t.text(i, "L"), t.text(i, "omega_rad"), t.text(i, "epsilon"), t.text(i, "pairing_fraction")});
    }
    out.emplace_back(id, std::move(f));
  } else if (id == "ensemble-fidelity") {
    out.emplace_back(id, need(rs, "fidelity_mean", Observable::Fidelity));
  } else if (id == "ensemble-qfi") {
    const auto& t = need_fisher(rs);
    io::Table f({"L", "omega_rad", "epsilon", "n", "FQ_mean", "FQ_std", "FC_mean", "realizations"});
    for (std::size_t i = 0; i < t.size(); ++i) {
      f.add_row({t.text(i, "L"), t.text(i, "omega_rad"), t.text(i, "epsilon"), t.text(i, "n"), t.text(i, "FQ_mean"),
                 t.text(i, "FQ_std"), t.text(i, "FC_mean"), t.text(i, "realizations")});
    }
    out.emplace_back(id, std::move(f));
  } else {
    throw ArgumentError("unknown figure bundle '" + id + "'");
  }
  return out;
}

void write_bundle(const FigureBundle& bundle, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, table] : bundle) table.save((std::filesystem::path(dir) / (name + ".csv")).string());
}

}  // namespace dtc
