#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dsm/cli/commands.hpp"
#include "dsm/cli/csv.hpp"
#include "dsm/error.hpp"

using namespace dsm;
using namespace dsm::cli;
namespace fs = std::filesystem;

namespace {
fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "dsm_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DSM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t occurrences(const std::string& text, const std::string& needle) {
  std::size_t count = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++count;
  return count;
}

Scenario small_scenario(const fs::path& dir) {
  Scenario sc = parse_scenario("run.seed = 4\nmodel.T = 6\ngrid.n_steps = 12\n");
  sc.output_dir = dir.string();
  return sc;
}
}  // namespace

TEST_CASE("scenario parsing and round trip") {
  const Scenario sc = parse_scenario(
      "# comment\nmodel.f1 = 2e4   # trailing\nrun.seed = 11\nsolver.mode = MFC\nnash.n_list = 3,9\n"
      "model.s0 = -1:0.25,1:0.75\n");
  CHECK(sc.params.f1 == 2e4);
  CHECK(sc.has_seed);
  CHECK(sc.seed == 11);
  CHECK(sc.mode == Mode::MFC);
  CHECK(sc.nash_n_list == std::vector<int>{3, 9});
  CHECK(sc.params.s0.values == std::vector<double>{-1.0, 1.0});
  const std::string text = serialize_scenario(sc);
  const Scenario again = parse_scenario(text);
  CHECK(serialize_scenario(again) == text);
  CHECK(solve_hash(again) == solve_hash(sc));
  std::vector<std::string> keys;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) keys.push_back(line.substr(0, line.find(" = ")));
  CHECK(std::is_sorted(keys.begin(), keys.end()));
}

TEST_CASE("solve hash tracks the solved settings only") {
  Scenario a = parse_scenario("run.seed = 1\n");
  Scenario b = a;
  b.seed = 2;
  b.n_common_paths = 7;
  CHECK(solve_hash(a) == solve_hash(b));
  b.params.f1 = 1.0;
  CHECK(solve_hash(a) != solve_hash(b));
}

TEST_CASE("scenario errors name the key") {
  CHECK_THROWS_WITH_AS(parse_scenario("model.nope = 1\n"), doctest::Contains("model.nope"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_scenario("model.A = abc\n"), doctest::Contains("model.A"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_scenario("solver.b_mode = fast\n"), doctest::Contains("solver.b_mode"),
                       ConfigError);
  CHECK_THROWS_AS(parse_scenario("just text\n"), ConfigError);
  CHECK_THROWS_WITH_AS(validate_scenario(parse_scenario("model.A = 1\n")), doctest::Contains("run.seed"),
                       ConfigError);
  CHECK_THROWS_AS(validate_scenario(parse_scenario("run.seed = 1\nmodel.pi = 2\n")), ConfigError);
}

TEST_CASE("table round trip keeps full precision") {
  const fs::path dir = scratch("table");
  Table t{{"a", "b"}, {{0.1, 1.0 / 3.0}, {-2e-300, 12345.678901234567}}};
  write_table((dir / "t.csv").string(), t);
  const Table back = read_table((dir / "t.csv").string());
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  CHECK(back.column("b") == 1);
  CHECK(back.column("c") == -1);
  CHECK_THROWS_AS(read_text((dir / "missing.csv").string()), MissingArtifact);
}

TEST_CASE("svg rendering") {
  Table t{{"t", "y", "J"}, {{0, 1, 0}, {1, 3, 1}, {2, 2, 1}, {3, 5, 0}, {4, 4, 1}}};
  PlotSpec spec;
  spec.y = {"y"};
  const std::string svg = render_svg(t, spec);
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(occurrences(svg, "<polyline") == 1);
  CHECK(occurrences(svg, "class=\"jump-band\"") == std::size_t(count_runs({0, 1, 1, 0, 1})));
  CHECK(count_runs({0, 1, 1, 0, 1}) == 2);
  Table two{{"t", "y"}, {{0, 1}, {1, 2}}};
  spec.shade.clear();
  CHECK(occurrences(render_svg(two, spec), "<polyline") == 1);
  CHECK_THROWS_AS(render_svg(Table{{"t", "y"}, {}}, spec), ConfigError);
  spec.y = {"nope"};
  CHECK_THROWS_WITH_AS(render_svg(two, spec), doctest::Contains("nope"), ConfigError);
}

TEST_CASE("solve then load tables") {
  const fs::path dir = scratch("solve");
  Scenario sc = small_scenario(dir);
  CHECK(cmd_solve(sc) == dir.string());
  const EquilibriumTables loaded = load_tables(sc, dir.string());
  const EquilibriumTables direct = solve_equilibrium(sc.params, scenario_grid(sc), scenario_price(sc));
  CHECK(loaded.phibar.values == direct.phibar.values);
  CHECK(loaded.psibar.values == direct.psibar.values);
  CHECK(loaded.affine.a == direct.affine.a);
  sc.params.f1 = 123.0;
  CHECK_THROWS_AS(load_tables(sc, dir.string()), MissingArtifact);
  CHECK_THROWS_AS(load_tables(sc, (dir / "nowhere").string()), MissingArtifact);
}

TEST_CASE("output directory override from the environment") {
  const fs::path dir = scratch("env");
  Scenario sc = small_scenario(fs::temp_directory_path() / "dsm_cli_tests" / "unused");
  ::setenv(kOutputDirEnv, dir.string().c_str(), 1);
  CHECK(resolved_output_dir(sc) == dir.string());
  cmd_solve(sc);
  ::unsetenv(kOutputDirEnv);
  CHECK(fs::exists(dir / "manifest.txt"));
  CHECK(resolved_output_dir(sc) == sc.output_dir);
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch("exit");
  const std::string base = "--set run.output_dir=" + dir.string() + " --set model.T=6 --set grid.n_steps=12";
  CHECK(run_cli("") == 2);
  CHECK(run_cli("solve --set model.T=6") == 2);
  CHECK(run_cli("solve --set run.seed=1 --set model.bogus=3") == 2);
  CHECK(run_cli("simulate --set run.seed=1 " + base) == 4);
  CHECK(run_cli("solve --set run.seed=1 " + base) == 0);
  CHECK(run_cli("simulate --set run.seed=1 --set run.n_common_paths=3 --set run.n_players=4 " + base) == 0);
  CHECK(fs::exists(dir / "common_0000.csv"));
  CHECK(run_cli("solve --set run.seed=1 --set grid.n_steps=2 --set model.T=48 --set run.output_dir=" +
                dir.string()) == 3);
  std::ofstream(dir / "empty.csv") << "t,y\n";
  CHECK(run_cli("plot --csv " + (dir / "empty.csv").string() + " -o " + (dir / "x.svg").string()) == 2);
  CHECK(run_cli("plot --csv " + (dir / "common_0000.csv").string() + " --y q_hat -o " +
                (dir / "x.svg").string()) == 0);
  CHECK(fs::exists(dir / "x.svg"));
}
