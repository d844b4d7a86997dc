#pragma once

// Certificate reports and feasibility-map files.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pvobs/errors.hpp"
#include "pvobs/io.hpp"
#include "pvobs/stability.hpp"

namespace pvobs::report {

[[nodiscard]] inline nlohmann::json certificate_json(const CertificateQuery& q,
                                                     const std::optional<StabilityCertificate>& c) {
  nlohmann::json j;
  j["query"] = {{"free_flow_speed", q.free_flow_speed},
                {"viscosity", q.viscosity},
                {"rho_min", q.rho_min},
                {"rho_max", q.rho_max},
                {"max_spacing", q.max_spacing}};
  j["feasible"] = c.has_value();
  if (c) {
    j["witness"] = {{"xi", c->candidate.xi}, {"beta", c->candidate.beta}, {"p0", c->candidate.p0},
                    {"p1", c->candidate.p1}};
    j["constants"] = {{"overshoot", c->constants.overshoot},
                      {"decay_rate", c->constants.decay_rate},
                      {"finite_time", c->constants.finite_time},
                      {"lambda", c->candidate.lambda(q.viscosity)}};
  }
  return j;
}

inline void print_certificate(std::ostream& out, const CertificateQuery& q,
                              const std::optional<StabilityCertificate>& c) {
  using io::format_number;
  out << "query: v_f=" << format_number(q.free_flow_speed) << " gamma=" << format_number(q.viscosity)
      << " rho_min=" << format_number(q.rho_min) << " rho_max=" << format_number(q.rho_max)
      << " d_M=" << format_number(q.max_spacing) << '\n';
  if (!c) {
    out << "feasible: no\n";
    return;
  }
  const auto& w = c->candidate;
  const auto& k = c->constants;
  out << "feasible: yes\n"
      << "witness: xi=" << format_number(w.xi) << " beta=" << format_number(w.beta) << " p0=" << format_number(w.p0)
      << " p1=" << format_number(w.p1) << '\n'
      << "constants: K=" << format_number(k.overshoot) << " alpha=" << format_number(k.decay_rate)
      << " t_star=" << format_number(k.finite_time) << " h (" << format_number(k.finite_time * 60.0) << " min)"
      << " lambda=" << format_number(w.lambda(q.viscosity)) << '\n';
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

inline void write_feasibility_csv(const std::filesystem::path& path, const FeasibilityMap& map) {
  io::CsvWriter csv(path, {"rho_min", "rho_max", "d_M_max"});
  for (const auto& c : map.cells) csv.row(c.rho_min, c.rho_max, c.max_spacing);
}

/// Square heatmap over (rho_min, rho_max); cells below the diagonal are
/// outside the domain and drawn grey.
inline void write_feasibility_svg(const std::filesystem::path& path, const FeasibilityMap& map,
                                  const std::string& title) {
  const std::size_t n = map.levels.size();
  double v_max = 0.0;
  for (const auto& c : map.cells) v_max = std::max(v_max, c.max_spacing);
  std::vector<io::HeatCell> cells;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double x0 = static_cast<double>(i) / static_cast<double>(n);
      const double y0 = static_cast<double>(j) / static_cast<double>(n);
      const double h = 1.0 / static_cast<double>(n);
      cells.push_back({x0, x0 + h, y0, y0 + h, j >= i ? map.at(i, j) : std::nan("")});
    }
  }
  io::HeatmapSpec spec{title, "rho_min", "rho_max", "max d_M (km)", 0.0, 1.0, 0.0, 1.0, 0.0,
                       v_max > 0.0 ? v_max : 1.0};
  io::write_heatmap_svg(path, spec, cells);
}

}  // namespace pvobs::report
