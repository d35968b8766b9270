#include "dsm/cli/scenario.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dsm/error.hpp"
#include "dsm/rng.hpp"

namespace dsm::cli {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

struct DoubleKey {
  const char* name;
  double ModelParams::*field;
};

constexpr DoubleKey kModelKeys[] = {
    {"model.A", &ModelParams::A},           {"model.C", &ModelParams::C},
    {"model.K", &ModelParams::K},           {"model.p0", &ModelParams::p0},
    {"model.p1", &ModelParams::p1},         {"model.f0", &ModelParams::f0},
    {"model.f1", &ModelParams::f1},         {"model.h0", &ModelParams::h0},
    {"model.h1", &ModelParams::h1},         {"model.h2", &ModelParams::h2},
    {"model.alpha_bar", &ModelParams::alpha_bar},
    {"model.theta", &ModelParams::theta},   {"model.pi", &ModelParams::pi},
    {"model.mu", &ModelParams::mu},         {"model.mu_st", &ModelParams::mu_st},
    {"model.sigma", &ModelParams::sigma},   {"model.sigma0", &ModelParams::sigma0},
    {"model.sigma_st", &ModelParams::sigma_st},
    {"model.lambda0", &ModelParams::lambda0},
    {"model.lambda", &ModelParams::lambda}, {"model.T", &ModelParams::T},
    {"model.q0", &ModelParams::q0},         {"model.q0_st", &ModelParams::q0_st},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw ConfigError("config key '" + key + "': " + why);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out))
    bad(key, "expected a finite number, got '" + v + "'");
  return out;
}

long long to_int(const std::string& key, const std::string& v, long long lo) {
  long long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad(key, "expected an integer, got '" + v + "'");
  if (out < lo) bad(key, "must be at least " + std::to_string(lo));
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad(key, "expected an unsigned integer");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad(key, "expected true or false");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

S0Spec parse_s0(const std::string& key, const std::string& v) {
  if (v.find(':') == std::string::npos) return S0Spec::constant(to_double(key, v));
  S0Spec s;
  s.values.clear();
  s.weights.clear();
  for (const auto& item : split_list(v)) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) bad(key, "expected value:weight pairs");
    s.values.push_back(to_double(key, trim(item.substr(0, colon))));
    s.weights.push_back(to_double(key, trim(item.substr(colon + 1))));
  }
  try {
    s.validate();
  } catch (const ConfigError& e) {
    bad(key, e.what());
  }
  return s;
}

std::string resolve(const std::string& base_dir, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(base_dir) / p).lexically_normal().string();
}

bool is_path_key(const std::string& key) {
  return key == "calibration.data" || key == "calibration.price_data";
}

}  // namespace

void apply_setting(Scenario& sc, const std::string& key, const std::string& raw,
                   const std::string& base_dir) {
  const std::string v = trim(raw);
  for (const auto& k : kModelKeys)
    if (key == k.name) {
      sc.params.*(k.field) = to_double(key, v);
      return;
    }
  if (key == "model.s0") {
    sc.params.s0 = parse_s0(key, v);
  } else if (key == "grid.n_steps") {
    sc.n_steps = static_cast<int>(to_int(key, v, 1));
  } else if (key == "solver.mode") {
    try {
      sc.mode = parse_mode(v);
    } catch (const ConfigError& e) {
      bad(key, e.what());
    }
  } else if (key == "solver.agg_double_f") {
    sc.agg_double_f = to_bool(key, v);
  } else if (key == "solver.b_mode") {
    if (v != "exact" && v != "nested") bad(key, "expected exact or nested");
    sc.b_mode = v;
  } else if (key == "solver.m_inner") {
    sc.m_inner = static_cast<int>(to_int(key, v, 2));
  } else if (key == "run.seed") {
    sc.seed = to_u64(key, v);
    sc.has_seed = true;
  } else if (key == "run.n_common_paths") {
    sc.n_common_paths = static_cast<int>(to_int(key, v, 2));
  } else if (key == "run.n_players") {
    sc.n_players = static_cast<int>(to_int(key, v, 1));
  } else if (key == "run.n_saved_paths") {
    sc.n_saved_paths = static_cast<int>(to_int(key, v, 0));
  } else if (key == "run.mc_samples") {
    sc.mc_samples = static_cast<int>(to_int(key, v, 2));
  } else if (key == "run.output_dir") {
    if (v.empty()) bad(key, "must not be empty");
    sc.output_dir = resolve(base_dir, v);
  } else if (key == "run.calibration_input") {
    sc.calibration_input = resolve(base_dir, v);
    std::ifstream in(sc.calibration_input);
    if (!in) bad(key, "cannot read '" + sc.calibration_input + "'");
    std::stringstream text;
    text << in.rdbuf();
    // Only model coefficients and calibration metadata are taken from the file.
    std::istringstream lines(text.str());
    std::string line;
    while (std::getline(lines, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string k = trim(line.substr(0, eq));
      if (k.rfind("model.", 0) == 0 || k.rfind("calibration.", 0) == 0)
        apply_setting(sc, k, line.substr(eq + 1),
                      fs::path(sc.calibration_input).parent_path().string());
    }
  } else if (key == "nash.n_list") {
    sc.nash_n_list.clear();
    for (const auto& item : split_list(v))
      sc.nash_n_list.push_back(static_cast<int>(to_int(key, item, 1)));
    if (sc.nash_n_list.empty()) bad(key, "needs at least one player count");
  } else if (key.rfind("calibration.", 0) == 0 && key.size() > 12) {
    sc.calibration[key] = is_path_key(key) ? resolve(base_dir, v) : v;
  } else {
    bad(key, "unknown key");
  }
}

Scenario parse_scenario(const std::string& text, const std::string& base_dir) {
  Scenario sc;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    apply_setting(sc, trim(line.substr(0, eq)), line.substr(eq + 1), base_dir);
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario file '" + path + "'");
  std::stringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str(), fs::path(path).parent_path().string());
}

void validate_scenario(const Scenario& sc) {
  if (!sc.has_seed) throw ConfigError("config key 'run.seed': mandatory, no default");
  sc.params.validate();
  if (!(sc.params.lambda0 > 0.0))
    throw ConfigError("config key 'model.lambda0': must be positive");
  for (const auto& [key, value] : sc.calibration)
    if (is_path_key(key) && !fs::exists(value))
      throw ConfigError("config key '" + key + "': file '" + value + "' does not exist");
}

std::string serialize_scenario(const Scenario& sc) {
  std::map<std::string, std::string> kv;
  for (const auto& k : kModelKeys) kv[k.name] = format_double(sc.params.*(k.field));
  {
    const S0Spec& s0 = sc.params.s0;
    std::string v;
    if (s0.values.size() == 1 && s0.weights[0] == 1.0) {
      v = format_double(s0.values[0]);
    } else {
      for (std::size_t i = 0; i < s0.values.size(); ++i)
        v += (i ? "," : "") + format_double(s0.values[i]) + ":" + format_double(s0.weights[i]);
    }
    kv["model.s0"] = v;
  }
  kv["grid.n_steps"] = std::to_string(sc.n_steps);
  kv["solver.mode"] = mode_name(sc.mode);
  kv["solver.agg_double_f"] = sc.agg_double_f ? "true" : "false";
  kv["solver.b_mode"] = sc.b_mode;
  kv["solver.m_inner"] = std::to_string(sc.m_inner);
  if (sc.has_seed) kv["run.seed"] = std::to_string(sc.seed);
  kv["run.n_common_paths"] = std::to_string(sc.n_common_paths);
  kv["run.n_players"] = std::to_string(sc.n_players);
  kv["run.n_saved_paths"] = std::to_string(sc.n_saved_paths);
  kv["run.mc_samples"] = std::to_string(sc.mc_samples);
  kv["run.output_dir"] = sc.output_dir;
  std::string list;
  for (std::size_t i = 0; i < sc.nash_n_list.size(); ++i)
    list += (i ? "," : "") + std::to_string(sc.nash_n_list[i]);
  kv["nash.n_list"] = list;
  for (const auto& [k, v] : sc.calibration) kv[k] = v;
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::string solve_hash(const Scenario& sc) {
  std::string text;
  for (const auto& k : kModelKeys) text += std::string(k.name) + "=" + format_double(sc.params.*(k.field)) + ";";
  for (std::size_t i = 0; i < sc.params.s0.values.size(); ++i)
    text += format_double(sc.params.s0.values[i]) + ":" + format_double(sc.params.s0.weights[i]) + ";";
  text += "n=" + std::to_string(sc.n_steps) + ";mode=" + mode_name(sc.mode) +
          ";aggf=" + (sc.agg_double_f ? "1" : "0");
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_tag(text)));
  return buf;
}

std::string resolved_output_dir(const Scenario& sc) {
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return sc.output_dir;
}

}  // namespace dsm::cli
