#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "dsm/cli/commands.hpp"
#include "dsm/error.hpp"

namespace {

dsm::cli::Scenario build_scenario(const std::string& path, const std::vector<std::string>& sets) {
  dsm::cli::Scenario sc = path.empty() ? dsm::cli::Scenario{} : dsm::cli::load_scenario(path);
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw dsm::ConfigError("--set expects key=value, got '" + s + "'");
    dsm::cli::apply_setting(sc, s.substr(0, eq), s.substr(eq + 1));
  }
  return sc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field demand-side-management solver"};
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> sets;
  auto add_scenario = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config, "scenario file (key = value lines)");
    sub->add_option("-s,--set", sets, "override, e.g. --set model.f1=1e5");
  };
  auto* solve = app.add_subcommand("solve", "solve the Riccati and linear tables");
  auto* simulate = app.add_subcommand("simulate", "simulate trajectories from solved tables");
  auto* nash = app.add_subcommand("nash-gap", "estimate the n-player gap");
  auto* calibrate = app.add_subcommand("calibrate", "estimate seasonality, volatilities, price");
  for (auto* sub : {solve, simulate, nash, calibrate}) add_scenario(sub);

  auto* plot = app.add_subcommand("plot", "render a CSV as SVG");
  std::string csv, svg;
  dsm::cli::PlotSpec spec;
  std::string ys;
  plot->add_option("--csv", csv, "input CSV")->required();
  plot->add_option("-o,--out", svg, "output SVG")->required();
  plot->add_option("--x", spec.x, "x column");
  plot->add_option("--y", ys, "comma separated y columns");
  plot->add_option("--shade", spec.shade, "0/1 column shaded as bands (empty to disable)");
  plot->add_option("--title", spec.title, "title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*plot) {
      if (!ys.empty()) {
        spec.y.clear();
        std::string item;
        for (char ch : ys + ",") {
          if (ch == ',') {
            if (!item.empty()) spec.y.push_back(item);
            item.clear();
          } else {
            item += ch;
          }
        }
      }
      dsm::cli::cmd_plot(csv, spec, svg);
      return 0;
    }
    const dsm::cli::Scenario sc = build_scenario(config, sets);
    std::string dir;
    if (*solve) dir = dsm::cli::cmd_solve(sc);
    if (*simulate) dir = dsm::cli::cmd_simulate(sc);
    if (*nash) dir = dsm::cli::cmd_nash_gap(sc);
    if (*calibrate) dir = dsm::cli::cmd_calibrate(sc);
    std::printf("wrote %s\n", dir.c_str());
    return 0;
  } catch (const dsm::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const dsm::NumericalRefusal& e) {
    std::fprintf(stderr, "numerical refusal: %s\n", e.what());
    return 3;
  } catch (const dsm::MissingArtifact& e) {
    std::fprintf(stderr, "missing artifact: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
