#pragma once

#include <optional>
#include <string>

#include "relest/mdp.hpp"
#include "relest/model.hpp"
#include "relest/simulate.hpp"

namespace relest {

/// Thrown on malformed configs; message carries the JSON path of the field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SchedulerKind { Offline, Greedy, Mdp };

struct SchedulerSpec {
  SchedulerKind kind = SchedulerKind::Greedy;
  std::vector<int> periodic_table;        // 0-based, required for Offline
  std::string mdp_policy_file;            // optional for Mdp (else train)
};

struct ExperimentConfig {
  SystemSet systems;
  SchedulerSpec scheduler;
  long horizon = 1000;
  long runs = 500;
  std::uint64_t seed = 20250101;
  int ell_max = 20;
  int rate_grid = 200;
  MdpSettings mdp;
  std::string out_dir = "out";
};

ExperimentConfig load_config(const std::string& path);
SchedulerKind scheduler_kind_from_string(const std::string& s);
std::string to_string(SchedulerKind k);

}  // namespace relest
