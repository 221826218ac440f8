#ifndef MFSIM_CORE_BASELINES_HPP
#define MFSIM_CORE_BASELINES_HPP

#include "core/scheduler.hpp"

namespace mfsim {

// Stage-agnostic reference policies. All recompute their ordering from the
// current flow snapshot on every call.

class FairShareScheduler : public Scheduler {
 public:
  const char* name() const override { return "fs"; }
  PolicyDecision decide(const SchedView& v) override;
};

// Preemptive SJF on remaining bytes; ties broken by earlier release.
class SjfScheduler : public Scheduler {
 public:
  const char* name() const override { return "sjf"; }
  PolicyDecision decide(const SchedView& v) override;
};

// Explicit-deadline flows in ascending-deadline classes, all above a single
// fair-shared class of implicit-deadline flows.
class EdfScheduler : public Scheduler {
 public:
  const char* name() const override { return "edf"; }
  PolicyDecision decide(const SchedView& v) override;
};

// Deadline flows reserved the minimum rate for on-time completion
// (scaled down proportionally on oversubscribed links), SJF underneath.
class KarunaScheduler : public Scheduler {
 public:
  const char* name() const override { return "karuna"; }
  PolicyDecision decide(const SchedView& v) override;
};

// Shared helper: SJF-ordered classes over the given flow ids.
PriorityClasses sjf_classes(const std::vector<Flow>& flows, const std::vector<FlowId>& ids);

}  // namespace mfsim

#endif
