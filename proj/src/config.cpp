#include "relest/config.hpp"

#include <fstream>

#include <json.hpp>

namespace relest {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config error at " + path + ": " + what);
}

Matrix parse_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty 2-D array");
  std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty()) {
    fail(path, "expected nested arrays (rows)");
  }
  std::size_t cols = j[0].size();
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      fail(path + "[" + std::to_string(r) + "]",
           "row length differs from the first row");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) {
        fail(path + "[" + std::to_string(r) + "][" + std::to_string(c) + "]",
             "expected a number");
      }
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& path) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(path + "." + key, e.what());
  }
}

}  // namespace

SchedulerKind scheduler_kind_from_string(const std::string& s) {
  if (s == "offline" || s == "periodic") return SchedulerKind::Offline;
  if (s == "greedy") return SchedulerKind::Greedy;
  if (s == "mdp") return SchedulerKind::Mdp;
  throw ConfigError("unknown scheduler '" + s +
                    "' (expected offline|greedy|mdp)");
}

std::string to_string(SchedulerKind k) {
  switch (k) {
    case SchedulerKind::Offline: return "offline";
    case SchedulerKind::Greedy: return "greedy";
    case SchedulerKind::Mdp: return "mdp";
  }
  return "?";
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    // nlohmann reports the byte offset; surface it as-is
    throw ConfigError(std::string("JSON parse failure in ") + path + ": " +
                      e.what());
  }

  ExperimentConfig cfg;
  if (!j.contains("systems") || !j["systems"].is_array() ||
      j["systems"].empty()) {
    fail("systems", "expected a nonempty array of systems");
  }
  std::vector<LtiSystem> systems;
  for (std::size_t i = 0; i < j["systems"].size(); ++i) {
    const json& js = j["systems"][i];
    std::string base = "systems[" + std::to_string(i) + "]";
    for (const char* key : {"A", "C", "Q", "R"}) {
      if (!js.contains(key)) fail(base + "." + key, "missing required matrix");
    }
    Matrix Pi0;
    if (js.contains("Pi0")) Pi0 = parse_matrix(js["Pi0"], base + ".Pi0");
    try {
      systems.push_back(LtiSystem::create(
          parse_matrix(js["A"], base + ".A"), parse_matrix(js["C"], base + ".C"),
          parse_matrix(js["Q"], base + ".Q"), parse_matrix(js["R"], base + ".R"),
          Pi0));
    } catch (const std::invalid_argument& e) {
      fail(base, e.what());
    }
  }
  cfg.systems = SystemSet::create(std::move(systems));
  const int n = cfg.systems.n();

  if (j.contains("scheduler")) {
    const json& js = j["scheduler"];
    if (!js.is_object() || !js.contains("type")) {
      fail("scheduler", "expected an object with a 'type' field");
    }
    cfg.scheduler.kind = scheduler_kind_from_string(js["type"].get<std::string>());
    if (cfg.scheduler.kind == SchedulerKind::Offline) {
      if (!js.contains("table") || !js["table"].is_array() ||
          js["table"].empty()) {
        fail("scheduler.table",
             "offline scheduler needs a nonempty transmitter table");
      }
      for (std::size_t i = 0; i < js["table"].size(); ++i) {
        int s = js["table"][i].get<int>();
        if (s < 1 || s > n) {
          fail("scheduler.table[" + std::to_string(i) + "]",
               "sensor index " + std::to_string(s) + " out of range 1.." +
                   std::to_string(n));
        }
        cfg.scheduler.periodic_table.push_back(s - 1);  // files are 1-based
      }
    }
    cfg.scheduler.mdp_policy_file =
        get_or<std::string>(js, "policy_file", "", "scheduler");
  }

  cfg.horizon = get_or<long>(j, "horizon", cfg.horizon, "");
  cfg.runs = get_or<long>(j, "runs", cfg.runs, "");
  cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed, "");
  cfg.ell_max = get_or<int>(j, "ell_max", cfg.ell_max, "");
  cfg.rate_grid = get_or<int>(j, "rate_grid", cfg.rate_grid, "");
  cfg.out_dir = get_or<std::string>(j, "out_dir", cfg.out_dir, "");
  if (cfg.horizon < 1) fail("horizon", "must be >= 1");
  if (cfg.runs < 1) fail("runs", "must be >= 1");

  if (j.contains("mdp")) {
    const json& jm = j["mdp"];
    cfg.mdp.depth = get_or<int>(jm, "depth", cfg.mdp.depth, "mdp");
    cfg.mdp.levels = get_or<int>(jm, "levels", cfg.mdp.levels, "mdp");
    cfg.mdp.alpha_grid = get_or<int>(jm, "alpha_grid", cfg.mdp.alpha_grid, "mdp");
    cfg.mdp.state_cap =
        get_or<std::size_t>(jm, "state_cap", cfg.mdp.state_cap, "mdp");
    cfg.mdp.rvi_tol = get_or<double>(jm, "rvi_tol", cfg.mdp.rvi_tol, "mdp");
    cfg.mdp.rvi_max_iter =
        get_or<int>(jm, "rvi_max_iter", cfg.mdp.rvi_max_iter, "mdp");
  }
  return cfg;
}

}  // namespace relest
