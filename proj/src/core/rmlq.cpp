#include "core/rmlq.hpp"

#include <algorithm>
#include <cmath>

namespace mfsim {

RmlqConfig RmlqConfig::make(int K, double E, double U) {
  if (K < 2) throw ConfigError("config key 'mfs.K': need at least 2 queues");
  if (!(E > 1.0)) throw ConfigError("config key 'mfs.E': threshold ratio must exceed 1");
  if (!(U > 0.0 && U <= 1.0)) throw ConfigError("config key 'mfs.U': scale must be in (0, 1]");
  RmlqConfig cfg;
  cfg.K = K;
  cfg.E = E;
  cfg.U = U;
  double q = U;
  for (int i = 1; i <= K - 1; ++i) {
    q /= E;
    cfg.thresholds.push_back(q);
  }
  return cfg;
}

RmlqConfig RmlqConfig::from_config(const Config& cfg) {
  return make(static_cast<int>(cfg.get_long("mfs.K", 8)), cfg.get_double("mfs.E", 4.0),
              cfg.get_double("mfs.U", 0.5));
}

int mlu_to_level(double v, const RmlqConfig& cfg) {
  MFSIM_CHECK(v >= 0.0, "mlu_to_level: negative urgency");
  for (int i = 1; i <= cfg.K - 1; ++i)
    if (v >= cfg.thresholds[i - 1]) return i;
  return cfg.K;  // tau_K = +inf: even the loosest flows are captured
}

RliValue rli_of(int target_layer, int l_curr, const RmlqConfig& cfg) {
  RliValue r;
  r.value = std::max(0, target_layer - l_curr);
  r.capped_level = std::min(r.value, cfg.K - 1);
  return r;
}

MluSample compute_mlu(const Flow& f, SimTime now, const Topology& topo,
                      const RateAllocation& alloc, const std::vector<Flow>& flows,
                      const LinkLoadIndex* idx) {
  MFSIM_CHECK(f.stage == Stage::P2D && f.explicit_deadline,
              "compute_mlu: needs an explicit-deadline last-stage flow");
  MluSample m;
  m.size_rem = f.remaining;
  m.time_rem = *f.explicit_deadline - now;

  const auto& route = topo.route(f.src, f.dst);
  if (route.empty()) {  // same-host transfer, never a bottleneck
    m.capacity = kInf;
    m.value = 0.0;
    return m;
  }
  double best_eff = kInf;
  for (LinkId lid : route) {
    const Link& l = topo.link(lid);
    double rho = idx ? idx->higher_fraction(l, f.priority)
                     : load_fraction(l, alloc, flows, topo, f.priority);
    double eff = l.capacity * (1.0 - rho);
    if (eff < best_eff) {  // lowest link id wins ties
      best_eff = eff;
      m.capacity = l.capacity;
      m.rho = rho;
    }
  }

  if (m.size_rem <= 0.0) {
    m.value = 0.0;
  } else if (m.time_rem <= 0.0) {
    m.value = kInf;
    m.overdue = true;
  } else if (best_eff <= 0.0) {
    m.value = kInf;
  } else {
    m.value = m.size_rem / (m.time_rem * best_eff);
  }
  return m;
}

// ---------------------------------------------------------------------------

MfsScheduler::MfsScheduler(RmlqConfig cfg, MfsInterConfig inter)
    : cfg_(std::move(cfg)), inter_(inter) {}

int MfsScheduler::rank_of(const Flow& f, const SchedView&) const {
  if (f.request >= 0) {
    auto it = rank_.find(f.request);
    if (it != rank_.end()) return it->second;
  }
  if (f.batch >= 0) {
    auto it = batch_rank_.find(f.batch);
    if (it != batch_rank_.end()) return it->second;
  }
  return 0;
}

PriorityKey MfsScheduler::natural_key(const Flow& f, const SchedView& v,
                                      const LinkLoadIndex* idx) const {
  PriorityKey key = f.priority;
  int l_curr = 1;
  if (v.pipeline && f.batch >= 0) l_curr = v.pipeline->l_curr(f.batch);
  switch (f.stage) {
    case Stage::Collective:
    case Stage::Reuse: {
      key.band = Band::Early;
      key.level = rli_of(f.target_layer, l_curr, cfg_).capped_level + 1;
      break;
    }
    case Stage::P2D: {
      Flow probe = f;
      if (probe.priority.band == Band::Early) {
        // fresh flow: measure interference from the bottom of the queue range
        probe.priority.band = Band::DeferredP2D;
        probe.priority.level = cfg_.K;
      }
      MluSample m = compute_mlu(probe, v.now, *v.topo, *v.alloc, *v.flows, idx);
      key.level = mlu_to_level(m.value, cfg_);
      key.band = key.level == 1 ? Band::UrgentP2D : Band::DeferredP2D;
      break;
    }
  }
  return key;
}

PriorityKey MfsScheduler::assign_initial_priority(const Flow& f, const SchedView& v) const {
  PriorityKey key = natural_key(f, v);
  key.rank = rank_of(f, v);
  key.release = f.release_time;
  key.flow = f.id;
  return key;
}

void MfsScheduler::on_flow_released(Flow& f, const SchedView& v) {
  if (pruned_.count(f.request)) {
    f.priority.band = Band::Scavenger;
    f.priority.level = cfg_.K;
    f.priority.release = f.release_time;
    f.priority.flow = f.id;
    return;
  }
  f.priority = assign_initial_priority(f, v);
  MFSIM_CHECK(f.priority.band != Band::UrgentP2D || f.stage == Stage::P2D,
              "urgent band is reserved for last-stage flows");
}

bool MfsScheduler::promote(Flow& f, PromotionTrigger, const SchedView& v,
                           const LinkLoadIndex* idx) {
  if (f.done() || f.state == FlowState::Pruned) return false;
  if (f.priority.band == Band::Scavenger) return false;
  PriorityKey natural = natural_key(f, v, idx);
  if (!outranks_level(natural, f.priority)) return false;  // monotonic: promotion only
  PriorityKey old = f.priority;
  f.priority.band = natural.band;
  f.priority.level = natural.level;
  MFSIM_CHECK(outranks_level(f.priority, old), "promotion must increase urgency");
  MFSIM_CHECK(f.priority.band != Band::UrgentP2D || f.stage == Stage::P2D,
              "urgent band is reserved for last-stage flows");
  return true;
}

namespace {
template <typename Fn>
void for_batch_flows(const SchedView& v, BatchId b, Fn&& fn) {
  if (v.flows_by_batch && b >= 0 && b < static_cast<BatchId>(v.flows_by_batch->size())) {
    for (FlowId id : (*v.flows_by_batch)[b]) fn((*v.flows)[id]);
    return;
  }
  for (Flow& f : *v.flows)
    if (f.batch == b) fn(f);
}
}  // namespace

void MfsScheduler::on_layer_boundary(BatchId b, const SchedView& v) {
  LinkLoadIndex idx(*v.alloc, *v.flows, *v.topo);
  for_batch_flows(v, b, [&](Flow& f) {
    if (f.done() || f.state == FlowState::Pruned) return;
    promote(f, PromotionTrigger::LayerBoundary, v, &idx);
  });
}

bool MfsScheduler::on_promotion_tick(BatchId b, const SchedView& v) {
  LinkLoadIndex idx(*v.alloc, *v.flows, *v.topo);
  bool changed = false;
  for_batch_flows(v, b, [&](Flow& f) {
    if (f.stage != Stage::P2D || f.done() || f.state == FlowState::Pruned) return;
    changed |= promote(f, PromotionTrigger::PeriodicTick, v, &idx);
  });
  return changed;
}

PolicyDecision MfsScheduler::decide(const SchedView& v) {
  PolicyDecision d;
  d.classes = arbitrate(*v.flows, *v.requests, v.active);
  return d;
}

PriorityClasses MfsScheduler::arbitrate(const std::vector<Flow>& flows,
                                        const std::vector<Request>& requests,
                                        const std::vector<FlowId>* active) {
  struct Entry {
    FlowId id;
    Band band;
    double k1, k2, k3;
  };
  std::vector<FlowId> candidates;
  if (active) {
    candidates = *active;
  } else {
    for (const Flow& f : flows) candidates.push_back(f.id);
  }
  std::vector<Entry> entries;
  for (FlowId fid : candidates) {
    const Flow& f = flows[fid];
    if (!f.transferable()) continue;
    Entry e{f.id, f.priority.band, 0.0, 0.0, 0.0};
    SimTime deadline = f.explicit_deadline
                           ? *f.explicit_deadline
                           : (f.request >= 0 ? requests[f.request].deadline : kInf);
    switch (f.priority.band) {
      case Band::UrgentP2D:
      case Band::DeferredP2D:
        e.k1 = f.priority.level;
        e.k2 = deadline;
        break;
      case Band::Early:
        e.k1 = f.priority.level;
        e.k2 = f.priority.rank;
        e.k3 = f.priority.release;
        break;
      case Band::Scavenger:
        e.k1 = deadline;
        break;
    }
    entries.push_back(e);
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.band != b.band) return static_cast<int>(a.band) < static_cast<int>(b.band);
    if (a.k1 != b.k1) return a.k1 < b.k1;
    if (a.k2 != b.k2) return a.k2 < b.k2;
    if (a.k3 != b.k3) return a.k3 < b.k3;
    return a.id < b.id;
  });

  PriorityClasses classes;
  const Entry* prev = nullptr;
  for (const Entry& e : entries) {
    if (prev && prev->band == e.band && prev->k1 == e.k1 && prev->k2 == e.k2 &&
        prev->k3 == e.k3) {
      classes.back().push_back(e.id);
    } else {
      classes.push_back({e.id});
    }
    prev = &e;
  }
  return classes;
}

std::vector<RequestId> MfsScheduler::take_newly_pruned() {
  auto out = std::move(newly_pruned_);
  newly_pruned_.clear();
  return out;
}

void MfsScheduler::on_batch_event(const SchedView& v) {
  MFSIM_CHECK(v.batches && v.requests && v.flows && v.topo, "on_batch_event: incomplete view");

  // gather in-flight batches (anything still owning undelivered bytes or compute)
  std::vector<char> batch_active(v.batches->size(), 0);
  if (v.pipeline) {
    for (const Batch& b : *v.batches)
      if (!v.pipeline->batch_drained(b.id)) batch_active[b.id] = 1;
  } else {
    for (const Flow& f : *v.flows)
      if (f.batch >= 0 && !f.done()) batch_active[f.batch] = 1;
  }

  const auto& links = v.topo->links();
  std::vector<double> port_bw(links.size());
  for (const Link& l : links) port_bw[l.id] = l.capacity;

  // per-request remaining load per port, collectives attributed by tokens
  std::unordered_map<RequestId, std::vector<double>> load;
  auto load_of = [&](RequestId r) -> std::vector<double>& {
    return load.try_emplace(r, links.size(), 0.0).first->second;
  };
  std::unordered_map<BatchId, double> batch_tokens;
  for (const Batch& b : *v.batches) {
    if (!batch_active[b.id]) continue;
    double toks = 0.0;
    for (RequestId r : b.request_ids)
      if (!pruned_.count(r)) toks += static_cast<double>((*v.requests)[r].prompt_tokens);
    batch_tokens[b.id] = toks;
  }
  auto fold_flow = [&](const Flow& f) {
    if (f.done() || f.remaining <= 0.0) return;
    if (f.batch < 0 || !batch_active[f.batch]) return;
    const auto& route = v.topo->route(f.src, f.dst);
    if (route.empty()) return;
    if (f.stage == Stage::Collective) {
      // batch-owned: split across the batch's unpruned requests by tokens
      double toks = batch_tokens.count(f.batch) ? batch_tokens[f.batch] : 0.0;
      if (toks <= 0.0) return;
      for (RequestId r : (*v.batches)[f.batch].request_ids) {
        if (pruned_.count(r)) continue;
        double share =
            f.remaining * static_cast<double>((*v.requests)[r].prompt_tokens) / toks;
        auto& l = load_of(r);
        for (LinkId lid : route) l[lid] += share;
      }
    } else if (f.request >= 0 && !pruned_.count(f.request)) {
      auto& l = load_of(f.request);
      for (LinkId lid : route) l[lid] += f.remaining;
    }
  };
  if (v.flows_by_batch) {
    for (const Batch& b : *v.batches) {
      if (!batch_active[b.id]) continue;
      for (FlowId fid : (*v.flows_by_batch)[b.id]) fold_flow((*v.flows)[fid]);
    }
  } else {
    for (const Flow& f : *v.flows) fold_flow(f);
  }

  std::vector<InterBatch> in;
  long in_flight = 0;
  for (const Batch& b : *v.batches) {
    if (!batch_active[b.id]) continue;
    InterBatch ib;
    ib.id = b.id;
    ib.admit_time = b.admit_time;
    ib.remaining_compute = v.pipeline ? v.pipeline->remaining_compute(b.id) : 0.0;
    for (RequestId r : b.request_ids) {
      if (pruned_.count(r)) continue;
      InterRequestLoad irl;
      irl.id = r;
      irl.deadline = (*v.requests)[r].deadline;
      auto it = load.find(r);
      irl.load = it != load.end() ? it->second : std::vector<double>(links.size(), 0.0);
      ib.requests.push_back(std::move(irl));
      ++in_flight;
    }
    if (!ib.requests.empty()) in.push_back(std::move(ib));
  }
  if (in.empty()) return;

  long budget = 0;
  if (inter_.enable_pruning)
    budget = static_cast<long>(std::ceil(inter_.drop_budget_frac * static_cast<double>(in_flight)));

  ScheduleDecision dec = inter_scheduling(in, port_bw, budget, v.now);

  // ranks from sigma; RED cached on the batch for reporting
  for (size_t k = 0; k < dec.sigma.size(); ++k) {
    Batch& b = (*v.batches)[dec.sigma[k]];
    b.rank = static_cast<int>(k) + 1;
    batch_rank_[b.id] = b.rank.value();
    for (RequestId r : b.request_ids) rank_[r] = b.rank.value();
  }
  for (const InterBatch& ib : in) {
    std::vector<std::pair<SimTime, RequestId>> dl;
    for (const auto& r : ib.requests) dl.emplace_back(r.deadline, r.id);
    (*v.batches)[ib.id].red = red_score(dl).red;
  }
  auto rerank = [&](Flow& f) {
    if (!f.done()) f.priority.rank = rank_of(f, v);
  };
  if (v.flows_by_batch) {
    for (const Batch& b : *v.batches) {
      if (!batch_active[b.id]) continue;
      for (FlowId fid : (*v.flows_by_batch)[b.id]) rerank((*v.flows)[fid]);
    }
  } else {
    for (Flow& f : *v.flows) rerank(f);
  }
  for (RequestId r : dec.pruned) {
    if (pruned_.insert(r).second) newly_pruned_.push_back(r);
  }
}

}  // namespace mfsim
