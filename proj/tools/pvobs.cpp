// pvobs: simulate probe-vehicle observers, certify stability, map feasibility.
//
// Exit codes: 0 success / feasible, 1 usage or input error, 2 infeasible,
// 3 runtime failure.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pvobs/pvobs.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kInfeasible = 2;
constexpr int kRuntimeError = 3;

struct CommonFlags {
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> cells;
  std::optional<double> horizon;
};

void add_common(CLI::App& cmd, CommonFlags& flags, const std::string& default_dir) {
  flags.out_dir = default_dir;
  cmd.add_option("--out-dir", flags.out_dir, "directory for emitted files");
  cmd.add_option("--seed", flags.seed, "measurement-noise seed (overrides the scenario)");
  cmd.add_option("--cells", flags.cells, "ground-truth grid cells (overrides the scenario)")->check(CLI::PositiveNumber);
  cmd.add_option("--horizon", flags.horizon, "simulated time in hours (overrides the scenario)");
}

int run_simulate(const std::filesystem::path& file, const CommonFlags& flags) {
  pvobs::Scenario sc = pvobs::parse_scenario(file);
  try {
    if (flags.seed) sc.seed = *flags.seed;
    if (flags.cells) sc.grid = pvobs::Grid(sc.grid.x_min(), sc.grid.x_max(), *flags.cells);
    if (flags.horizon) sc.horizon = *flags.horizon;
  } catch (const pvobs::DomainError& e) {
    throw pvobs::ScenarioError(std::string("command-line override: ") + e.what());
  }
  sc.validate();
  pvobs::ExperimentResult result;
  try {
    result = pvobs::run_experiment(sc);
  } catch (const pvobs::DomainError& e) {
    // Past validation, a domain error means the run itself went wrong.
    throw pvobs::Error(std::string("simulation failed: ") + e.what());
  }
  pvobs::write_experiment(flags.out_dir, sc, result);

  using pvobs::io::format_number;
  std::cout << "scenario: " << sc.name << '\n'
            << "steps: " << result.steps << '\n'
            << "initial error: " << format_number(result.trace.initial_aggregate()) << '\n'
            << "final error: " << format_number(result.trace.samples.back().aggregate) << '\n'
            << "convergence time (5%): "
            << (result.convergence_time ? format_number(*result.convergence_time) + " h" : std::string("not reached"))
            << '\n'
            << "max inter-vehicle distance: " << format_number(result.max_distance) << " km\n"
            << "outputs: " << flags.out_dir << '\n';
  return kOk;
}

int run_certify(const pvobs::CertificateQuery& q, const std::optional<std::string>& out_dir) {
  q.validate();
  const auto cert = pvobs::max_beta(q);
  pvobs::report::print_certificate(std::cout, q, cert);
  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    pvobs::report::write_json(std::filesystem::path(*out_dir) / "certificate.json",
                              pvobs::report::certificate_json(q, cert));
  }
  return cert ? kOk : kInfeasible;
}

int run_map(double vf, double gamma, std::size_t n, const std::string& out_dir) {
  if (n < 5) throw pvobs::DomainError("feasibility map resolution must be at least 5");
  if (!(vf > 0.0) || !(gamma > 0.0)) throw pvobs::DomainError("feasibility map needs v_f > 0 and gamma > 0");
  const auto map = pvobs::feasibility_map(pvobs::density_levels(n), vf, gamma);
  std::filesystem::create_directories(out_dir);
  const auto csv = std::filesystem::path(out_dir) / "feasibility_map.csv";
  const auto svg = std::filesystem::path(out_dir) / "feasibility_map.svg";
  try {
    pvobs::report::write_feasibility_csv(csv, map);
    pvobs::report::write_feasibility_svg(
        svg, map, "max d_M, v_f=" + pvobs::io::format_number(vf) + ", gamma=" + pvobs::io::format_number(gamma));
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(csv, ec);
    std::filesystem::remove(svg, ec);
    throw;
  }
  std::cout << "cells: " << map.cells.size() << '\n' << "outputs: " << out_dir << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probe-vehicle traffic observers: simulation, stability certificates, feasibility maps"};
  app.require_subcommand(1);

  CommonFlags sim_flags;
  std::string scenario_file;
  auto* sim = app.add_subcommand("simulate", "run a scenario and emit truth, estimate and diagnostics");
  sim->add_option("scenario", scenario_file, "scenario JSON file")->required();
  add_common(*sim, sim_flags, "out");

  CommonFlags cert_flags;
  pvobs::CertificateQuery query;
  auto* cert = app.add_subcommand("certify", "search the stability certificate with the largest decay margin");
  cert->add_option("--vf", query.free_flow_speed, "free-flow speed (km/h)")->required();
  cert->add_option("--gamma", query.viscosity, "viscosity (km^2/h)")->required();
  cert->add_option("--rho-min", query.rho_min, "lower density bound")->required();
  cert->add_option("--rho-max", query.rho_max, "upper density bound")->required();
  cert->add_option("--dm", query.max_spacing, "maximal inter-vehicle distance (km)")->required();
  add_common(*cert, cert_flags, "");

  CommonFlags map_flags;
  double map_vf = 0.0;
  double map_gamma = 0.0;
  std::size_t map_n = 0;
  auto* map = app.add_subcommand("feasibility-map", "largest certified d_M over a (rho_min, rho_max) grid");
  map->add_option("--vf", map_vf, "free-flow speed (km/h)")->required();
  map->add_option("--gamma", map_gamma, "viscosity (km^2/h)")->required();
  map->add_option("--n", map_n, "density levels per axis")->required();
  add_common(*map, map_flags, "out");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*sim) return run_simulate(scenario_file, sim_flags);
    if (*cert) {
      return run_certify(query, cert_flags.out_dir.empty() ? std::nullopt : std::optional(cert_flags.out_dir));
    }
    return run_map(map_vf, map_gamma, map_n, map_flags.out_dir);
  } catch (const pvobs::ScenarioError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const pvobs::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << '\n';
    return kRuntimeError;
  }
}
