#ifndef MFSIM_CORE_SCHEDULER_HPP
#define MFSIM_CORE_SCHEDULER_HPP

#include <memory>
#include <string>
#include <vector>

#include "core/allocator.hpp"
#include "core/config.hpp"
#include "core/topology.hpp"
#include "core/types.hpp"

namespace mfsim {

enum class PolicyKind { FairShare, SJF, EDF, Karuna, MFS };

PolicyKind parse_policy(const std::string& name);  // fs|sjf|edf|karuna|mfs
const char* policy_name(PolicyKind k);

// Read-only pipeline progress, as far as schedulers care.
class PipelineInfo {
 public:
  virtual ~PipelineInfo() = default;
  virtual int l_curr(BatchId b) const = 0;  // 1-based current pipeline layer
  virtual double remaining_compute(BatchId b) const = 0;
  virtual bool pipeline_done(BatchId b) const = 0;  // compute + collectives drained
  virtual bool batch_drained(BatchId b) const = 0;  // pipeline done and all flows done
};

struct SchedView {
  SimTime now = 0.0;
  const Topology* topo = nullptr;
  std::vector<Flow>* flows = nullptr;  // schedulers may rewrite priorities
  const std::vector<FlowId>* active = nullptr;  // transferable, routed flows
  const std::vector<std::vector<FlowId>>* flows_by_batch = nullptr;
  std::vector<Request>* requests = nullptr;
  std::vector<Batch>* batches = nullptr;
  const RateAllocation* alloc = nullptr;
  const PipelineInfo* pipeline = nullptr;
};

struct PolicyDecision {
  PriorityClasses classes;
  RateCaps caps;
  bool has_caps = false;
};

class Scheduler {
 public:
  virtual ~Scheduler() = default;
  virtual const char* name() const = 0;

  // Ordered equivalence classes (and caps) for the allocator; recomputed
  // at every event.
  virtual PolicyDecision decide(const SchedView& v) = 0;

  virtual void on_flow_released(Flow&, const SchedView&) {}
  virtual void on_layer_boundary(BatchId, const SchedView&) {}
  // Returns true when a priority changed and rates must be recomputed.
  virtual bool on_promotion_tick(BatchId, const SchedView&) { return false; }
  virtual void on_batch_event(const SchedView&) {}
  virtual bool wants_promotion_ticks() const { return false; }
  virtual long pruned_count() const { return 0; }
  // Requests pruned since the last call; the engine applies the demotions.
  virtual std::vector<RequestId> take_newly_pruned() { return {}; }
};

std::unique_ptr<Scheduler> make_scheduler(PolicyKind kind, const Config& cfg);

}  // namespace mfsim

#endif
