#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

#ifndef SPDCQKD_TABLE1_PATH
#define SPDCQKD_TABLE1_PATH "data/table1.json"
#endif

namespace cli = spdcqkd::cli;

int main(int argc, char** argv) {
  CLI::App app{"Key-rate analysis of entangled photon-pair sources"};
  app.set_version_flag("--version", std::string(spdcqkd::kVersion));
  app.require_subcommand(1);

  cli::ReconstructArgs rec;
  auto* reconstruct = app.add_subcommand("reconstruct", "Maximum-likelihood tomography and key-rate report");
  reconstruct->add_option("dataset", rec.dataset, "Dataset JSON file")->required();
  reconstruct->add_option("--mc", rec.mc_samples, "Monte-Carlo samples for uncertainties (0 = off)");
  reconstruct->add_option("--seed", rec.seed, "Monte-Carlo seed");
  reconstruct->add_option("--max-iter", rec.max_iterations, "Iteration cap of the reconstruction");
  reconstruct->add_option("--ordering", rec.ordering, "Mode order of the state: alice-first or bob-first");
  reconstruct->add_option("--out", rec.out, "Output file (default stdout)");

  cli::ModelArgs model;
  auto* model_cmd = app.add_subcommand("model", "Multi-pair model along a mean-pair-number grid (CSV)");
  model_cmd->add_option("--eta", model.eta, "Transmittance of both arms");
  model_cmd->add_option("--eta-a", model.eta_a, "Transmittance of Alice's arm");
  model_cmd->add_option("--eta-b", model.eta_b, "Transmittance of Bob's arm");
  model_cmd->add_option("--nbar-grid", model.grid, "start:stop:steps")->capture_default_str();
  model_cmd->add_flag("--log", model.log, "Logarithmic grid spacing");
  model_cmd->add_option("--rho0", model.rho0, "Single-pair state: bell or surrogate")->capture_default_str();
  model_cmd->add_option("--rho0-file", model.rho0_file, "Single-pair state as density-matrix JSON");
  model_cmd->add_option("--out", model.out, "Output file (default stdout)");

  cli::OptimizeArgs optimize;
  auto* optimize_cmd = app.add_subcommand("optimize", "Optimal and critical mean pair number");
  optimize_cmd->add_option("--eta", optimize.eta, "Transmittance of both arms");
  optimize_cmd->add_option("--eta-a", optimize.eta_a, "Transmittance of Alice's arm");
  optimize_cmd->add_option("--eta-b", optimize.eta_b, "Transmittance of Bob's arm");
  optimize_cmd->add_option("--sweep", optimize.sweep, "Sweep symmetric transmittance start:stop:steps (CSV)");
  optimize_cmd->add_flag("--log", optimize.log, "Logarithmic sweep spacing");
  optimize_cmd->add_option("--out", optimize.out, "Output file (default stdout)");

  cli::BasesArgs bases;
  auto* bases_cmd = app.add_subcommand("bases", "Optimal measurement bases and waveplate angles");
  bases_cmd->add_option("--state", bases.state, "Density-matrix JSON file");
  bases_cmd->add_option("--dataset", bases.dataset, "Dataset JSON file, reconstructed first");
  bases_cmd->add_option("--ordering", bases.ordering, "alice-first or bob-first")->capture_default_str();
  bases_cmd->add_option("--out", bases.out, "Output file (default stdout)");

  cli::CompareArgs compare;
  auto* compare_cmd = app.add_subcommand("compare", "Key rate against coincidence rate for SPDC and single-pair sources (CSV)");
  compare_cmd->add_option("--concurrence", compare.concurrence, "Concurrence of the single-pair source")
      ->capture_default_str();
  compare_cmd->add_option("--eta", compare.eta, "Transmittance of the lossy SPDC curve")->capture_default_str();
  compare_cmd->add_option("--nbar-grid", compare.grid, "Logarithmic start:stop:steps")->capture_default_str();
  compare_cmd->add_option("--out", compare.out, "Output file (default stdout)");

  std::string table_path = SPDCQKD_TABLE1_PATH;
  auto* table_cmd = app.add_subcommand("table1-check", "Recompute r_dw and R_key of the bundled measurement table");
  table_cmd->add_option("file", table_path, "Table JSON (default: bundled copy)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kInputError;
  }

  try {
    if (*reconstruct) return cli::cmd_reconstruct(rec);
    if (*model_cmd) return cli::cmd_model(model);
    if (*optimize_cmd) return cli::cmd_optimize(optimize);
    if (*bases_cmd) return cli::cmd_bases(bases);
    if (*compare_cmd) return cli::cmd_compare(compare);
    if (*table_cmd) return cli::cmd_table1_check(table_path, std::cout);
  } catch (const spdcqkd::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kInputError;
  }
  return cli::kInputError;
}
