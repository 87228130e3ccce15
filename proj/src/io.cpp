#include "relest/io.hpp"

#include <iomanip>

#include <json.hpp>

namespace relest {

using nlohmann::json;

TraceCsvWriter::TraceCsvWriter(const std::string& path) : out_(path) {
  if (!out_) throw std::runtime_error("cannot open CSV for writing: " + path);
  out_ << "episode,step,sensor,transmitter,gamma,mu,eta,trace_P,sq_error\n";
}

void TraceCsvWriter::write_episode(const EpisodeResult& ep) {
  out_ << std::setprecision(17);
  for (long k = 0; k < ep.T; ++k) {
    for (int i = 0; i < ep.n; ++i) {
      std::size_t idx = k * ep.n + i;
      out_ << ep.episode << ',' << k + 1 << ',' << i + 1 << ','
           << ep.transmitter[k] + 1 << ',' << int(ep.gamma[idx]) << ','
           << int(ep.mu[idx]) << ',' << int(ep.eta[idx]) << ','
           << ep.trace_P[idx] << ',' << ep.sq_error[idx] << '\n';
    }
  }
}

namespace {

json summary_to_json(const MonteCarloSummary& s) {
  json j;
  j["mean_J"] = s.mean_J;
  j["std_error"] = s.std_error;
  j["per_sensor_J"] = s.per_sensor_J;
  j["mean_sq_error_J"] = s.mean_sq_error_J;
  j["runs"] = s.runs;
  j["horizon"] = s.T;
  j["single_sample"] = s.single_sample;
  return j;
}

}  // namespace

void write_summary_json(const std::string& path, const MonteCarloSummary& s,
                        const std::string& scheduler, std::uint64_t seed) {
  json j = summary_to_json(s);
  j["scheduler"] = scheduler;
  j["seed"] = seed;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write summary: " + path);
  out << j.dump(1) << "\n";
}

void write_compare_csv(const std::string& path,
                       const std::map<std::string, MonteCarloSummary>& results,
                       const LowerBoundSolution& lb) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write comparison: " + path);
  out << std::setprecision(10);
  out << "schedule,J,std_error\n";
  for (const auto& [name, s] : results) {
    out << name << ',' << s.mean_J << ',' << s.std_error << '\n';
  }
  out << "LB," << lb.total_cost << ",0\n";
}

void write_gap_report_json(const std::string& path,
                           const std::map<std::string, MonteCarloSummary>& results,
                           const LowerBoundSolution& lb) {
  json j;
  j["lower_bound"] = lb.total_cost;
  j["ell_max"] = lb.ell_max;
  j["rates_pi0"] = lb.pi0;
  j["per_sensor_cost"] = lb.sensor_cost;
  json sched = json::object();
  for (const auto& [name, s] : results) {
    json e = summary_to_json(s);
    // the gap to the optimal schedule is at most J - LB
    e["optimality_gap_upper_bound"] = s.mean_J - lb.total_cost;
    sched[name] = std::move(e);
  }
  j["schedules"] = std::move(sched);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write gap report: " + path);
  out << j.dump(1) << "\n";
}

}  // namespace relest
