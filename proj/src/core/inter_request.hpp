#ifndef MFSIM_CORE_INTER_REQUEST_HPP
#define MFSIM_CORE_INTER_REQUEST_HPP

#include <utility>
#include <vector>

#include "core/types.hpp"

namespace mfsim {

// Robust Effective Deadline of a batch: the deadline list is split at the
// maximal inter-request gap into tight and loose sub-batches, and the two
// sub-batch minima are blended by the tight fraction f.
struct RedScore {
  size_t k_star = 0;                 // partition index (tight = first k_star)
  std::vector<RequestId> tight_set;
  std::vector<RequestId> loose_set;
  double f = 1.0;                    // |tight| / |batch|
  SimTime d_tight_min = 0.0;
  SimTime d_loose_min = 0.0;         // = d_tight_min when no loose set
  double red = 0.0;
};

RedScore red_score(const std::vector<std::pair<SimTime, RequestId>>& deadlines);
RedScore red_score(const std::vector<SimTime>& deadlines);  // ids = indices

struct FinishEstimate {
  SimTime f_hat = 0.0;
  int u_star = 0;  // bottleneck port index
};

// Worst-case finish time: remaining compute plus the bottleneck-port drain
// of accumulated higher-priority load S and the batch's own load L.
FinishEstimate est_finish_time(SimTime now, double comp, const std::vector<double>& S,
                               const std::vector<double>& L,
                               const std::vector<double>& port_bw);

struct InterRequestLoad {
  RequestId id = -1;
  SimTime deadline = 0.0;
  std::vector<double> load;  // bytes per port
};

struct InterBatch {
  BatchId id = -1;
  SimTime admit_time = 0.0;
  double remaining_compute = 0.0;
  std::vector<InterRequestLoad> requests;  // unpruned members only
};

struct ScheduleDecision {
  std::vector<BatchId> sigma;       // batch order, ascending RED
  std::vector<RequestId> pruned;    // requests demoted to the scavenger class
  long drop_budget = 0;
  std::vector<double> f_hat;        // per sigma position, after pruning
  std::vector<double> d_lo;         // feasibility target per sigma position
};

// One forward pass of RED ordering, worst-case feasibility checks, and
// selective pruning under the global drop budget.
ScheduleDecision inter_scheduling(const std::vector<InterBatch>& batches,
                                  const std::vector<double>& port_bw, long drop_budget,
                                  SimTime now);

}  // namespace mfsim

#endif
