#pragma once

#include <string>

#include "dsm/cli/plot.hpp"
#include "dsm/cli/scenario.hpp"
#include "dsm/equilibrium.hpp"

namespace dsm::cli {

PriceSpec scenario_price(const Scenario& sc);
GridSpec scenario_grid(const Scenario& sc);

// Each command writes into resolved_output_dir(sc) and returns that directory.
std::string cmd_solve(const Scenario& sc);
std::string cmd_simulate(const Scenario& sc);
std::string cmd_nash_gap(const Scenario& sc);
std::string cmd_calibrate(const Scenario& sc);
void cmd_plot(const std::string& csv_path, const PlotSpec& spec, const std::string& svg_path);

// Rebuilds the tables written by cmd_solve; throws MissingArtifact when absent or stale.
EquilibriumTables load_tables(const Scenario& sc, const std::string& dir);

}  // namespace dsm::cli
