#ifndef MFSIM_CORE_RMLQ_HPP
#define MFSIM_CORE_RMLQ_HPP

#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "core/allocator.hpp"
#include "core/config.hpp"
#include "core/inter_request.hpp"
#include "core/scheduler.hpp"
#include "core/types.hpp"

namespace mfsim {

// Reverse multi-level queue: K levels with geometrically spaced promotion
// thresholds Q_i = E^-i * U; the bottom level is an open-ended catch-all.
struct RmlqConfig {
  int K = 8;
  double E = 4.0;
  double U = 0.5;
  std::vector<double> thresholds;  // Q_1..Q_{K-1}, strictly decreasing

  static RmlqConfig make(int K, double E, double U);
  static RmlqConfig from_config(const Config& cfg);
};

// Minimal share of the residual bottleneck capacity a deadline flow needs
// for just-in-time completion; > 1 flags an infeasible overload state.
struct MluSample {
  double size_rem = 0.0;
  double time_rem = 0.0;
  double capacity = 0.0;  // bottleneck link bandwidth
  double rho = 0.0;       // strictly-higher-priority load fraction there
  double value = 0.0;
  bool overdue = false;
};

MluSample compute_mlu(const Flow& f, SimTime now, const Topology& topo,
                      const RateAllocation& alloc, const std::vector<Flow>& flows,
                      const LinkLoadIndex* idx = nullptr);

// min{ i in [1, K-1] : v >= Q_i }, or K below the last threshold.
int mlu_to_level(double v, const RmlqConfig& cfg);

// Relative layer index: layers between a flow's consumer and the pipeline,
// capped into the queue range.
struct RliValue {
  int value = 0;
  int capped_level = 0;  // min(value, K-1)
};
RliValue rli_of(int target_layer, int l_curr, const RmlqConfig& cfg);

enum class PromotionTrigger { LayerBoundary, PeriodicTick };

struct MfsInterConfig {
  bool enable_pruning = true;
  double drop_budget_frac = 0.05;  // of in-flight requests, rounded up
};

class MfsScheduler : public Scheduler {
 public:
  MfsScheduler(RmlqConfig cfg, MfsInterConfig inter);

  const char* name() const override { return "mfs"; }
  PolicyDecision decide(const SchedView& v) override;
  void on_flow_released(Flow& f, const SchedView& v) override;
  void on_layer_boundary(BatchId b, const SchedView& v) override;
  bool on_promotion_tick(BatchId b, const SchedView& v) override;
  void on_batch_event(const SchedView& v) override;
  bool wants_promotion_ticks() const override { return true; }
  long pruned_count() const override { return static_cast<long>(pruned_.size()); }
  std::vector<RequestId> take_newly_pruned() override;

  PriorityKey assign_initial_priority(const Flow& f, const SchedView& v) const;
  // Recomputes the flow's natural urgency; promotion only, never demotion.
  // Returns true when the key changed.
  bool promote(Flow& f, PromotionTrigger trigger, const SchedView& v,
               const LinkLoadIndex* idx = nullptr);

  const RmlqConfig& rmlq() const { return cfg_; }

  // Arbitration: UrgentP2D (level, deadline) > Early (level, rank, release)
  // > DeferredP2D (level, deadline) > Scavenger (original deadline).
  static PriorityClasses arbitrate(const std::vector<Flow>& flows,
                                   const std::vector<Request>& requests,
                                   const std::vector<FlowId>* active = nullptr);

 private:
  PriorityKey natural_key(const Flow& f, const SchedView& v,
                          const LinkLoadIndex* idx = nullptr) const;
  int rank_of(const Flow& f, const SchedView& v) const;

  RmlqConfig cfg_;
  MfsInterConfig inter_;
  std::unordered_set<RequestId> pruned_;       // sticky across invocations
  std::vector<RequestId> newly_pruned_;
  std::unordered_map<RequestId, int> rank_;    // from sigma
  std::unordered_map<BatchId, int> batch_rank_;
};

}  // namespace mfsim

#endif
