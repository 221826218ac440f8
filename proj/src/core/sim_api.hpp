#ifndef MFSIM_CORE_SIM_API_HPP
#define MFSIM_CORE_SIM_API_HPP

#include <string>

#include "core/config.hpp"
#include "core/metrics.hpp"

namespace mfsim {

struct RunOutput {
  MetricsReport report;
  std::string policy;
  long seed = 0;
  double rate_rps = 0.0;
  std::string summary;  // summary.json body
};

// End-to-end single run driven entirely by config keys; the CLI overrides
// policy / workload.rate_rps / sim.seed before calling this.
RunOutput run_simulation(const Config& cfg);

// Writes requests.csv and summary.json under out_dir.
void write_outputs(const RunOutput& out, const std::string& out_dir);

}  // namespace mfsim

#endif
