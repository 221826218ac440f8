#include "core/baselines.hpp"

#include <algorithm>

namespace mfsim {

namespace {

std::vector<FlowId> transferable_ids(const SchedView& v) {
  std::vector<FlowId> ids;
  if (v.active) {
    for (FlowId id : *v.active)
      if ((*v.flows)[id].transferable()) ids.push_back(id);
    return ids;
  }
  for (const Flow& f : *v.flows)
    if (f.transferable()) ids.push_back(f.id);
  return ids;
}

}  // namespace

PriorityClasses sjf_classes(const std::vector<Flow>& flows, const std::vector<FlowId>& ids) {
  std::vector<FlowId> order = ids;
  std::sort(order.begin(), order.end(), [&](FlowId a, FlowId b) {
    const Flow &fa = flows[a], &fb = flows[b];
    if (fa.remaining != fb.remaining) return fa.remaining < fb.remaining;
    if (fa.release_time != fb.release_time) return fa.release_time < fb.release_time;
    return a < b;
  });
  PriorityClasses classes;
  for (FlowId id : order) {
    const Flow& f = flows[id];
    if (!classes.empty()) {
      const Flow& prev = flows[classes.back().front()];
      if (prev.remaining == f.remaining && prev.release_time == f.release_time) {
        classes.back().push_back(id);
        continue;
      }
    }
    classes.push_back({id});
  }
  return classes;
}

PolicyDecision FairShareScheduler::decide(const SchedView& v) {
  PolicyDecision d;
  auto ids = transferable_ids(v);
  if (!ids.empty()) d.classes.push_back(std::move(ids));
  return d;
}

PolicyDecision SjfScheduler::decide(const SchedView& v) {
  PolicyDecision d;
  d.classes = sjf_classes(*v.flows, transferable_ids(v));
  return d;
}

PolicyDecision EdfScheduler::decide(const SchedView& v) {
  PolicyDecision d;
  std::vector<FlowId> explicit_ids, implicit_ids;
  for (FlowId id : transferable_ids(v)) {
    if ((*v.flows)[id].explicit_deadline)
      explicit_ids.push_back(id);
    else
      implicit_ids.push_back(id);
  }
  const auto& flows = *v.flows;
  std::sort(explicit_ids.begin(), explicit_ids.end(), [&](FlowId a, FlowId b) {
    const Flow &fa = flows[a], &fb = flows[b];
    if (*fa.explicit_deadline != *fb.explicit_deadline)
      return *fa.explicit_deadline < *fb.explicit_deadline;
    if (fa.release_time != fb.release_time) return fa.release_time < fb.release_time;
    return a < b;
  });
  for (FlowId id : explicit_ids) {
    const Flow& f = flows[id];
    if (!d.classes.empty()) {
      const Flow& prev = flows[d.classes.back().front()];
      if (*prev.explicit_deadline == *f.explicit_deadline &&
          prev.release_time == f.release_time) {
        d.classes.back().push_back(id);
        continue;
      }
    }
    d.classes.push_back({id});
  }
  if (!implicit_ids.empty()) d.classes.push_back(std::move(implicit_ids));
  return d;
}

PolicyDecision KarunaScheduler::decide(const SchedView& v) {
  PolicyDecision d;
  const auto& flows = *v.flows;
  std::vector<FlowId> deadline_ids, rest;
  for (FlowId id : transferable_ids(v)) {
    if (flows[id].explicit_deadline)
      deadline_ids.push_back(id);
    else
      rest.push_back(id);
  }

  if (!deadline_ids.empty()) {
    // minimum rate for just-in-time completion; overdue flows run uncapped
    RateCaps want;
    for (FlowId id : deadline_ids) {
      const Flow& f = flows[id];
      double slack = *f.explicit_deadline - v.now;
      if (slack > 0.0) want[id] = f.remaining / slack;
    }
    // scale reserved demand down proportionally on oversubscribed links
    std::unordered_map<LinkId, double> demand;
    for (FlowId id : deadline_ids) {
      auto it = want.find(id);
      if (it == want.end()) continue;
      const Flow& f = flows[id];
      for (LinkId l : v.topo->route(f.src, f.dst)) demand[l] += it->second;
    }
    for (FlowId id : deadline_ids) {
      auto it = want.find(id);
      if (it == want.end()) continue;
      const Flow& f = flows[id];
      double scale = 1.0;
      for (LinkId l : v.topo->route(f.src, f.dst)) {
        double c = v.topo->link(l).capacity;
        if (demand[l] > c) scale = std::min(scale, c / demand[l]);
      }
      d.caps[id] = it->second * scale;
    }
    d.has_caps = true;
    d.classes.push_back(std::move(deadline_ids));
  }
  for (auto& cls : sjf_classes(flows, rest)) d.classes.push_back(std::move(cls));
  return d;
}

}  // namespace mfsim
