#pragma once

#include <fstream>
#include <map>
#include <string>

#include "relest/lowerbound.hpp"
#include "relest/simulate.hpp"

namespace relest {

/// Streaming CSV writer for per-step traces.
/// Schema: episode,step,sensor,transmitter,gamma,mu,eta,trace_P,sq_error
/// (one row per (episode, step, sensor); sensors are 1-based in files).
class TraceCsvWriter {
 public:
  explicit TraceCsvWriter(const std::string& path);
  void write_episode(const EpisodeResult& ep);

 private:
  std::ofstream out_;
};

void write_summary_json(const std::string& path, const MonteCarloSummary& s,
                        const std::string& scheduler, std::uint64_t seed);

/// Table-1-style comparison: scheduler,J,std_error rows plus an LB row.
void write_compare_csv(const std::string& path,
                       const std::map<std::string, MonteCarloSummary>& results,
                       const LowerBoundSolution& lb);

/// Gap report: per-scheduler J, LB, and the optimality-gap
/// upper bound J - LB.
void write_gap_report_json(const std::string& path,
                           const std::map<std::string, MonteCarloSummary>& results,
                           const LowerBoundSolution& lb);

}  // namespace relest
