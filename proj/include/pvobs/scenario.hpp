#pragma once

// Experiment description and its JSON form. The schema is documented in
// README.md.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pvobs/errors.hpp"
#include "pvobs/initial_condition.hpp"
#include "pvobs/observer.hpp"
#include "pvobs/pde_solver.hpp"
#include "pvobs/traffic_model.hpp"

namespace pvobs {

struct Scenario {
  std::string name = "scenario";
  ModelParams params{70.0, 0.0};
  Grid grid{-2.0, 30.0, 300};
  InitialCondition ic = InitialCondition::constant(0.5);
  std::vector<double> probe_positions;
  double measurement_noise = 0.0;
  std::uint64_t seed = 0;
  ObserverMode mode = ObserverMode::inviscid;
  ObserverPrior prior = ObserverPrior::left_probe_value;
  std::optional<std::size_t> observer_cells;
  double horizon = 0.25;
  double cfl_safety = 0.9;
  /// d_M for the certificate; when empty a probe-only pre-run measures it.
  std::optional<double> certificate_spacing;
  std::size_t save_every = 20;

  /// Throws ScenarioError naming the violated invariant.
  void validate() const {
    if (probe_positions.size() < 2) throw ScenarioError("probes.positions: at least two probe vehicles are required");
    for (std::size_t i = 1; i < probe_positions.size(); ++i) {
      if (!(probe_positions[i - 1] < probe_positions[i])) {
        throw ScenarioError("probes.positions: ordering invariant violated, positions must be strictly increasing "
                            "(entries " + std::to_string(i - 1) + " and " + std::to_string(i) + ")");
      }
    }
    for (double x : probe_positions) {
      if (!grid.contains(x)) throw ScenarioError("probes.positions: every probe must lie inside the grid");
    }
    if (!(horizon > 0.0)) throw ScenarioError("horizon: must be positive");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw ScenarioError("cfl_safety: must lie in (0,1]");
    if (!(measurement_noise >= 0.0)) throw ScenarioError("probes.noise: must be non-negative");
    if (save_every == 0) throw ScenarioError("output.save_every: must be at least 1");
    if (mode == ObserverMode::viscous && params.inviscid()) {
      throw ScenarioError("observer.mode: the viscous observer needs model.viscosity > 0");
    }
    if (certificate_spacing && !(*certificate_spacing > 0.0)) {
      throw ScenarioError("certificate.max_spacing: must be positive");
    }
  }
};

namespace detail {

using nlohmann::json;

inline const json* find(const json& obj, const char* key) {
  if (!obj.is_object()) return nullptr;
  const auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

inline double number_at(const json& obj, const char* key, const std::string& path) {
  const json* v = find(obj, key);
  if (!v) throw ScenarioError(path + ": required number is missing");
  if (!v->is_number()) throw ScenarioError(path + ": expected a number");
  return v->get<double>();
}

inline double number_or(const json& obj, const char* key, const std::string& path, double fallback) {
  return find(obj, key) ? number_at(obj, key, path) : fallback;
}

inline const json& object_at(const json& obj, const char* key, const std::string& path) {
  const json* v = find(obj, key);
  if (!v) throw ScenarioError(path + ": required object is missing");
  if (!v->is_object()) throw ScenarioError(path + ": expected an object");
  return *v;
}

inline InitialCondition parse_ic(const json& doc) {
  const json* arr = find(doc, "initial_condition");
  if (!arr) throw ScenarioError("initial_condition: required list of pieces is missing");
  if (!arr->is_array() || arr->empty()) throw ScenarioError("initial_condition: expected a non-empty list");
  std::vector<IcPiece> pieces;
  for (std::size_t k = 0; k < arr->size(); ++k) {
    const json& p = (*arr)[k];
    const std::string path = "initial_condition[" + std::to_string(k) + "]";
    if (!p.is_object()) throw ScenarioError(path + ": expected an object");
    IcPiece piece;
    piece.from = number_or(p, "from", path + ".from", -std::numeric_limits<double>::infinity());
    piece.to = number_or(p, "to", path + ".to", std::numeric_limits<double>::infinity());
    const bool has_const = find(p, "constant") != nullptr;
    const bool has_sin = find(p, "sinusoid") != nullptr;
    if (has_const == has_sin) throw ScenarioError(path + ": exactly one of 'constant' or 'sinusoid' is required");
    if (has_const) {
      piece.profile = ConstantProfile{number_at(p, "constant", path + ".constant")};
    } else {
      const json& s = object_at(p, "sinusoid", path + ".sinusoid");
      piece.profile = SinusoidProfile{number_at(s, "offset", path + ".sinusoid.offset"),
                                      number_at(s, "amplitude", path + ".sinusoid.amplitude"),
                                      number_at(s, "frequency", path + ".sinusoid.frequency")};
    }
    pieces.push_back(piece);
  }
  try {
    return InitialCondition(std::move(pieces));
  } catch (const DomainError& e) {
    throw ScenarioError(std::string("initial_condition: ") + e.what());
  }
}

}  // namespace detail

/// Build a validated scenario from a JSON document. Missing optional fields
/// take their defaults (300 cells, CFL safety 0.9, no noise).
[[nodiscard]] inline Scenario scenario_from_json(const nlohmann::json& doc) {
  using detail::find;
  using detail::number_at;
  using detail::number_or;
  if (!doc.is_object()) throw ScenarioError("scenario: top level must be an object");
  Scenario sc;
  if (const auto* n = find(doc, "name")) {
    if (!n->is_string()) throw ScenarioError("name: expected a string");
    sc.name = n->get<std::string>();
  }

  const auto& model = detail::object_at(doc, "model", "model");
  try {
    sc.params = ModelParams(number_at(model, "free_flow_speed", "model.free_flow_speed"),
                            number_or(model, "viscosity", "model.viscosity", 0.0));
  } catch (const DomainError& e) {
    throw ScenarioError(std::string("model: ") + e.what());
  }

  sc.ic = detail::parse_ic(doc);

  const auto& probes = detail::object_at(doc, "probes", "probes");
  const auto* pos = find(probes, "positions");
  if (!pos || !pos->is_array()) throw ScenarioError("probes.positions: required list of numbers is missing");
  for (std::size_t k = 0; k < pos->size(); ++k) {
    if (!(*pos)[k].is_number()) throw ScenarioError("probes.positions[" + std::to_string(k) + "]: expected a number");
    sc.probe_positions.push_back((*pos)[k].get<double>());
  }
  sc.measurement_noise = number_or(probes, "noise", "probes.noise", 0.0);
  if (const auto* s = find(probes, "seed")) {
    if (!s->is_number_unsigned()) throw ScenarioError("probes.seed: expected a non-negative integer");
    sc.seed = s->get<std::uint64_t>();
  }

  sc.horizon = number_at(doc, "horizon", "horizon");
  sc.cfl_safety = number_or(doc, "cfl_safety", "cfl_safety", 0.9);

  // Default domain: room for the lead probe to travel at v_f over the horizon.
  std::size_t cells = 300;
  double x_min = sc.probe_positions.empty() ? 0.0 : sc.probe_positions.front() - 2.0;
  double x_max = sc.probe_positions.empty()
                     ? 1.0
                     : sc.probe_positions.back() + 1.25 * sc.params.free_flow_speed() * std::max(sc.horizon, 0.0) + 2.0;
  if (const auto* g = find(doc, "grid")) {
    if (!g->is_object()) throw ScenarioError("grid: expected an object");
    x_min = number_or(*g, "x_min", "grid.x_min", x_min);
    x_max = number_or(*g, "x_max", "grid.x_max", x_max);
    if (const auto* c = find(*g, "cells")) {
      if (!c->is_number_unsigned()) throw ScenarioError("grid.cells: expected a positive integer");
      cells = c->get<std::size_t>();
    }
  }
  try {
    sc.grid = Grid(x_min, x_max, cells);
  } catch (const DomainError& e) {
    throw ScenarioError(std::string("grid: ") + e.what());
  }

  sc.mode = sc.params.inviscid() ? ObserverMode::inviscid : ObserverMode::viscous;
  if (const auto* obs = find(doc, "observer")) {
    if (!obs->is_object()) throw ScenarioError("observer: expected an object");
    if (const auto* m = find(*obs, "mode")) {
      const auto s = m->is_string() ? m->get<std::string>() : std::string{};
      if (s == "viscous") sc.mode = ObserverMode::viscous;
      else if (s == "inviscid") sc.mode = ObserverMode::inviscid;
      else if (s != "auto") throw ScenarioError("observer.mode: expected 'auto', 'viscous' or 'inviscid'");
    }
    if (const auto* p = find(*obs, "prior")) {
      const auto s = p->is_string() ? p->get<std::string>() : std::string{};
      if (s == "constant") sc.prior = ObserverPrior::left_probe_value;
      else if (s == "initial_condition") sc.prior = ObserverPrior::initial_condition;
      else throw ScenarioError("observer.prior: expected 'constant' or 'initial_condition'");
    }
    if (const auto* c = find(*obs, "cells")) {
      if (!c->is_number_unsigned() || c->get<std::size_t>() == 0) {
        throw ScenarioError("observer.cells: expected a positive integer");
      }
      sc.observer_cells = c->get<std::size_t>();
    }
  }

  if (const auto* cert = find(doc, "certificate")) {
    if (!cert->is_object()) throw ScenarioError("certificate: expected an object");
    if (find(*cert, "max_spacing")) sc.certificate_spacing = number_at(*cert, "max_spacing", "certificate.max_spacing");
  }
  if (const auto* out = find(doc, "output")) {
    if (!out->is_object()) throw ScenarioError("output: expected an object");
    if (const auto* s = find(*out, "save_every")) {
      if (!s->is_number_unsigned()) throw ScenarioError("output.save_every: expected a positive integer");
      sc.save_every = s->get<std::size_t>();
    }
  }
  sc.validate();
  return sc;
}

[[nodiscard]] inline Scenario parse_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError("scenario " + path.string() + " is not valid JSON: " + e.what());
  }
  return scenario_from_json(doc);
}

}  // namespace pvobs
