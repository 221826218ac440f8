#ifndef MFSIM_CORE_ALLOCATOR_HPP
#define MFSIM_CORE_ALLOCATOR_HPP

#include <unordered_map>
#include <vector>

#include "core/topology.hpp"
#include "core/types.hpp"

namespace mfsim {

struct RateAllocation {
  std::unordered_map<FlowId, double> rates;  // bytes/s; absent = 0
  SimTime valid_from = 0.0;

  double rate(FlowId f) const {
    auto it = rates.find(f);
    return it == rates.end() ? 0.0 : it->second;
  }
};

// Ordered equivalence classes of flows; earlier classes have strict priority.
using PriorityClasses = std::vector<std::vector<FlowId>>;

// Optional per-flow rate ceilings (e.g. Karuna's just-in-time reservations).
using RateCaps = std::unordered_map<FlowId, double>;

// Strict-priority, work-conserving progressive filling: classes are served
// in order, each running max-min over the residual capacity left by earlier
// classes; per-flow caps are honored. Deterministic for identical inputs.
// Flows with same-host (empty) routes must not be passed in.
RateAllocation allocate_rates(const std::vector<Flow>& flows, const Topology& topo,
                              const PriorityClasses& classes, const RateCaps* caps,
                              SimTime now);

// Fraction of `link`'s capacity consumed under `alloc` by flows whose
// priority strictly outranks `above` at (band, level) granularity.
double load_fraction(const Link& link, const RateAllocation& alloc,
                     const std::vector<Flow>& flows, const Topology& topo,
                     const PriorityKey& above);

// Prefix-sum view of an allocation for repeated interference queries
// (promotion sweeps evaluate many flows against one allocation).
class LinkLoadIndex {
 public:
  LinkLoadIndex(const RateAllocation& alloc, const std::vector<Flow>& flows,
                const Topology& topo);
  double higher_fraction(const Link& link, const PriorityKey& above) const;

 private:
  std::vector<std::vector<std::pair<int, double>>> entries_;  // key, prefix rate
};

}  // namespace mfsim

#endif
