#ifndef MFSIM_CORE_METRICS_HPP
#define MFSIM_CORE_METRICS_HPP

#include <optional>
#include <string>
#include <vector>

#include "core/engine.hpp"

namespace mfsim {

struct RequestMetric {
  RequestId id = -1;
  double arrival = 0.0;
  bool finished = false;
  double ttft = 0.0;         // seconds from arrival; meaningful iff finished
  double deadline_rel = 0.0; // SLO budget, seconds from arrival
  bool slo_met = false;
  double earliness = 0.0;    // deadline_rel - ttft; negative = miss
  double stall = 0.0;        // total non-overlapped collective wait
  bool pruned = false;
};

struct MetricsReport {
  std::vector<RequestMetric> rows;  // by request id
  std::vector<double> cct;          // completed collectives, completion - release
  std::vector<double> stalls;       // per completed collective

  long total = 0;
  long finished = 0;
  long met = 0;
  long pruned = 0;
  std::optional<double> slo_attainment;
  std::optional<double> ttft_mean, ttft_p99;
  std::optional<double> cct_mean, cct_p99;
  std::optional<double> earliness_nonneg_mean;  // mean of max(0, earliness), finished rows
  double stall_mean = 0.0;                      // per request
};

MetricsReport build_metrics(const RunResult& run);

// header: request_id,arrival_s,ttft_s,deadline_s,slo_met,earliness_s,stall_s
std::string requests_csv(const MetricsReport& m);

std::string summary_json(const MetricsReport& m, const std::string& policy, long seed,
                         double rate_rps);

// Writes requests.csv and summary.json under out_dir (created if missing).
void write_report(const MetricsReport& m, const std::string& policy, long seed,
                  double rate_rps, const std::string& out_dir);

double percentile(std::vector<double> values, double q);  // nearest-rank

}  // namespace mfsim

#endif
