#include "core/engine.hpp"

#include <algorithm>
#include <cmath>

namespace mfsim {

CostModel CostModel::from_config(const Config& cfg) {
  CostModel m;
  m.layers = static_cast<int>(cfg.get_long("model.layers", 4));
  if (m.layers < 1) throw ConfigError("config key 'model.layers': must be >= 1");
  m.alpha = cfg.get_double("model.alpha_ms", 1.0) * 1e-3;
  m.beta = cfg.get_double("model.beta_us_per_token", 1.0) * 1e-6;
  m.kv_bytes_per_token_layer = cfg.get_double("model.kv_bytes_per_token_layer", 1000.0);
  m.coll_bytes_per_token_layer = cfg.get_double("model.coll_bytes_per_token_layer", 250.0);
  if (m.alpha < 0 || m.beta < 0 || m.alpha + m.beta <= 0)
    throw ConfigError("config key 'model.alpha_ms': per-layer compute must be positive");
  if (m.kv_bytes_per_token_layer < 0)
    throw ConfigError("config key 'model.kv_bytes_per_token_layer': must be >= 0");
  if (m.coll_bytes_per_token_layer < 0)
    throw ConfigError("config key 'model.coll_bytes_per_token_layer': must be >= 0");
  return m;
}

ClusterLayout ClusterLayout::from_config(const Config& cfg) {
  ClusterLayout c;
  c.units = static_cast<int>(cfg.get_long("cluster.prefill_units", 1));
  c.hosts_per_unit = static_cast<int>(cfg.get_long("cluster.hosts_per_unit", 2));
  c.decode_hosts = static_cast<int>(cfg.get_long("cluster.decode_hosts", c.units));
  if (c.units < 1) throw ConfigError("config key 'cluster.prefill_units': must be >= 1");
  if (c.hosts_per_unit < 1)
    throw ConfigError("config key 'cluster.hosts_per_unit': must be >= 1");
  if (c.decode_hosts < 1)
    throw ConfigError("config key 'cluster.decode_hosts': must be >= 1");
  return c;
}

EngineParams EngineParams::from_config(const Config& cfg) {
  EngineParams p;
  if (cfg.has("sim.horizon_s")) p.horizon = cfg.require_double("sim.horizon_s");
  p.promotion_tick = cfg.get_double("sim.promotion_tick_ms", 1.0) * 1e-3;
  if (!(p.promotion_tick > 0))
    throw ConfigError("config key 'sim.promotion_tick_ms': must be positive");
  p.max_batch_tokens = cfg.get_long("workload.max_batch_tokens", 8192);
  p.livelock_events = cfg.get_long("sim.livelock_events", 1000000);
  return p;
}

MsFlowBuild build_msflows(const Request& r, BatchId batch, const CostModel& cost,
                          const ClusterLayout& layout) {
  if (r.reuse_fraction > 0.0 && r.reuse_source < 0)
    throw WorkloadError("request " + std::to_string(r.id) +
                        ": reuse_fraction > 0 needs a reuse_source");
  MsFlowBuild out;
  const double tokens = static_cast<double>(r.prompt_tokens);
  for (int l = 1; l <= r.layer_count; ++l) {
    MsFlowLayer layer;
    layer.layer_index = l;
    double reuse_bytes = r.reuse_fraction * tokens * cost.kv_bytes_per_token_layer;
    if (reuse_bytes > 0.0) {
      Flow f;
      f.request = r.id;
      f.batch = batch;
      f.stage = Stage::Reuse;
      f.src = layout.lead(r.reuse_source);
      f.dst = layout.lead(r.prefill_unit);
      f.size = f.remaining = reuse_bytes;
      f.target_layer = l;
      layer.reuse_flows.push_back(static_cast<FlowId>(out.flows.size()));
      out.flows.push_back(f);
    }
    double p2d_bytes = tokens * cost.kv_bytes_per_token_layer;
    if (p2d_bytes > 0.0) {
      Flow f;
      f.request = r.id;
      f.batch = batch;
      f.stage = Stage::P2D;
      f.src = layout.lead(r.prefill_unit);
      f.dst = layout.decode_host(r.prefill_unit);
      f.size = f.remaining = p2d_bytes;
      f.target_layer = l;
      f.explicit_deadline = r.deadline;
      layer.p2d_flows.push_back(static_cast<FlowId>(out.flows.size()));
      out.flows.push_back(f);
    }
    out.layers.push_back(std::move(layer));
  }
  return out;
}

// ---------------------------------------------------------------------------

Engine::Engine(const Topology& topo, Scheduler& sched, EngineParams params)
    : topo_(topo), sched_(sched), params_(std::move(params)) {}

SchedView Engine::view() {
  SchedView v;
  v.now = now_;
  v.topo = &topo_;
  v.flows = &flows_;
  v.active = &active_;
  v.flows_by_batch = &flows_by_batch_;
  v.requests = &requests_;
  v.batches = &batches_;
  v.alloc = &alloc_;
  v.pipeline = this;
  return v;
}

void Engine::push(SimTime t, EventKind k, int a, int b) {
  queue_.push(Event{t, klass_of(k), seq_++, k, a, b});
}

RequestId Engine::add_request(Request r) {
  r.id = static_cast<RequestId>(requests_.size());
  requests_.push_back(std::move(r));
  open_flows_.push_back(0);
  last_finish_.push_back(kNoTime);
  return requests_.back().id;
}

FlowId Engine::register_flow(Flow f) {
  f.id = static_cast<FlowId>(flows_.size());
  f.priority.flow = f.id;
  flows_.push_back(f);
  rate_.push_back(0.0);
  flow_gen_.push_back(0);
  flow_finish_.push_back(kNoTime);
  active_pos_.push_back(-1);
  flow_scripted_.push_back(0);
  if (f.request >= 0) ++open_flows_[f.request];
  if (f.batch >= 0) {
    flows_by_batch_[f.batch].push_back(f.id);
    ++batch_open_flows_[f.batch];
  }
  return f.id;
}

CoflowId Engine::register_coflow(BatchId b, int layer, const std::vector<FlowId>& members) {
  Coflow c;
  c.id = static_cast<CoflowId>(coflows_.size());
  c.batch = b;
  c.layer = layer;
  c.members = members;
  c.open = static_cast<int>(members.size());
  for (FlowId fid : members) flows_[fid].coflow = c.id;
  coflows_.push_back(std::move(c));
  return coflows_.back().id;
}

BatchId Engine::add_manual_batch(const std::vector<RequestId>& members,
                                 std::vector<double> compute_costs, SimTime admit_at) {
  BatchId b = static_cast<BatchId>(batches_.size());
  Batch batch;
  batch.id = b;
  batch.request_ids = members;
  batch.admit_time = admit_at;
  batches_.push_back(std::move(batch));
  flows_by_batch_.emplace_back();
  batch_open_flows_.push_back(0);
  manual_admitted_.push_back(0);

  BatchPipeline p;
  p.batch = b;
  p.layers = static_cast<int>(compute_costs.size());
  p.compute_cost = std::move(compute_costs);
  p.compute_started.assign(p.layers, 0);
  p.compute_done.assign(p.layers, 0);
  p.reuse_deps.assign(p.layers, {});
  p.collective.assign(p.layers, -1);
  p.p2d_by_layer.assign(p.layers, {});
  p.layer_start.assign(p.layers, kNoTime);
  p.compute_end.assign(p.layers, kNoTime);
  pipes_.push_back(std::move(p));

  for (RequestId r : members) requests_[r].batch = b;
  last_arrival_ = std::max(last_arrival_, admit_at);
  push(admit_at, EventKind::BatchAdmit, b);
  return b;
}

FlowId Engine::add_manual_flow(BatchId batch, RequestId request, Stage stage, NodeId src,
                               NodeId dst, double size, int target_layer,
                               std::optional<SimTime> release_at,
                               std::optional<SimTime> deadline) {
  Flow f;
  f.request = request;
  f.batch = batch;
  f.stage = stage;
  f.src = src;
  f.dst = dst;
  f.size = f.remaining = size;
  f.target_layer = target_layer;
  f.explicit_deadline = deadline;
  FlowId fid = register_flow(f);
  if (release_at) {
    flow_scripted_[fid] = 1;
    manual_releases_.push_back({fid, *release_at});
  }
  BatchPipeline& p = pipes_[batch];
  int idx = target_layer - 1;
  if (idx >= 0 && idx < p.layers) {
    switch (stage) {
      case Stage::Reuse: p.reuse_deps[idx].push_back(fid); break;
      case Stage::P2D: p.p2d_by_layer[idx].push_back(fid); break;
      case Stage::Collective: {
        if (p.collective[idx] < 0)
          p.collective[idx] = register_coflow(batch, target_layer, {fid});
        else {
          Coflow& c = coflows_[p.collective[idx]];
          c.members.push_back(fid);
          ++c.open;
          flows_[fid].coflow = c.id;
        }
        break;
      }
    }
  }
  return fid;
}

void Engine::load_workload(std::vector<Request> requests, const ClusterLayout& layout,
                           const CostModel& cost) {
  workload_mode_ = true;
  layout_ = layout;
  cost_ = cost;
  if (layout.total_hosts() > topo_.host_count())
    throw ConfigError("config key 'cluster.prefill_units': layout needs " +
                      std::to_string(layout.total_hosts()) + " hosts, topology has " +
                      std::to_string(topo_.host_count()));
  unit_queue_.assign(layout.units, {});
  unit_busy_.assign(layout.units, 0);
  for (auto& r : requests) {
    if (r.prompt_tokens > params_.max_batch_tokens)
      throw WorkloadError("request " + std::to_string(r.id) + ": prompt of " +
                          std::to_string(r.prompt_tokens) +
                          " tokens exceeds the batch token cap");
    if (r.prefill_unit < 0 || r.prefill_unit >= layout.units)
      throw WorkloadError("request " + std::to_string(r.id) + ": prefill unit out of range");
    if (r.layer_count <= 0) r.layer_count = cost.layers;
    RequestId id = add_request(std::move(r));
    const Request& stored = requests_[id];
    last_arrival_ = std::max(last_arrival_, stored.arrival);
    push(stored.arrival, EventKind::RequestArrival, id);
  }
}

// ---------------------------------------------------------------------------
// event handlers

void Engine::remove_active(FlowId fid) {
  int pos = active_pos_[fid];
  if (pos < 0) return;
  FlowId last = active_.back();
  active_[pos] = last;
  active_pos_[last] = pos;
  active_.pop_back();
  active_pos_[fid] = -1;
}

void Engine::advance_to(SimTime t) {
  double dt = t - now_;
  MFSIM_CHECK(dt > -1e-9, "event time went backwards");
  if (dt > 0.0) {
    for (FlowId fid : active_) {
      Flow& f = flows_[fid];
      f.remaining -= rate_[fid] * dt;
      if (f.remaining < 0.0) {
        MFSIM_CHECK(f.remaining > -1e-6 * std::max(f.size, 1.0) - 1e-9,
                    "transferred more than the flow size");
        f.remaining = 0.0;
      }
    }
  }
  now_ = t;
}

void Engine::recompute_rates() {
  PolicyDecision d = sched_.decide(view());
  alloc_ = allocate_rates(flows_, topo_, d.classes, d.has_caps ? &d.caps : nullptr, now_);
  for (FlowId fid : active_) {
    Flow& f = flows_[fid];
    double r = alloc_.rate(fid);
    if (r == rate_[fid]) continue;
    rate_[fid] = r;
    ++flow_gen_[fid];
    if (r > 0.0) {
      SimTime done_at = now_ + f.remaining / r;
      push(done_at, EventKind::FlowComplete, fid, flow_gen_[fid]);
    }
    // rate 0: completion deferred indefinitely, no event
  }
}

void Engine::release_flow(FlowId fid) {
  Flow& f = flows_[fid];
  MFSIM_CHECK(f.state == FlowState::Pending, "flow released twice");
  f.release_time = now_;
  f.priority.release = now_;
  bool pruned = f.request >= 0 && requests_[f.request].pruned;
  f.state = pruned ? FlowState::Pruned : FlowState::Active;
  sched_.on_flow_released(f, view());
  MFSIM_CHECK(f.priority.band != Band::UrgentP2D || f.stage == Stage::P2D,
              "urgent band is reserved for last-stage flows");
  if (f.coflow >= 0 && coflows_[f.coflow].release_t == kNoTime)
    coflows_[f.coflow].release_t = now_;
  if (f.size <= 0.0 || topo_.route(f.src, f.dst).empty()) {
    // same-host or empty transfer: infinite-capacity fluid, done immediately
    finish_flow(fid);
    return;
  }
  active_pos_[fid] = static_cast<int>(active_.size());
  active_.push_back(fid);
  rate_[fid] = 0.0;
  rate_dirty_ = true;
}

void Engine::finish_flow(FlowId fid) {
  Flow& f = flows_[fid];
  MFSIM_CHECK(!f.done(), "flow finished twice");
  // routed flows must have moved their full size through the fluid model
  if (active_pos_[fid] >= 0)
    MFSIM_CHECK(f.remaining <= 1e-6 * std::max(f.size, 1.0) + 1e-9,
                "flow completed before its bytes were transferred");
  f.remaining = 0.0;
  f.state = FlowState::Done;
  flow_finish_[fid] = now_;
  remove_active(fid);
  rate_[fid] = 0.0;
  ++flow_gen_[fid];
  rate_dirty_ = true;

  if (f.batch >= 0) --batch_open_flows_[f.batch];
  if (f.coflow >= 0) {
    Coflow& c = coflows_[f.coflow];
    MFSIM_CHECK(c.open > 0, "coflow member finished after barrier");
    if (--c.open == 0) {
      c.done_t = now_;
      // layer boundary: the pipeline position advances past c.layer
      sched_.on_layer_boundary(c.batch, view());
      try_start_layers(c.batch);
      check_pipeline_done(c.batch);
    }
  }
  if (f.request >= 0) {
    --open_flows_[f.request];
    last_finish_[f.request] = std::max(last_finish_[f.request], now_);
    if (f.stage == Stage::Reuse && f.batch >= 0) {
      try_start_layers(f.batch);
      check_pipeline_done(f.batch);
    }
    try_complete_request(f.request);
  }
}

bool Engine::layer_deps_met(const BatchPipeline& p, int layer) const {
  int idx = layer - 1;
  if (layer > 1) {
    if (!p.compute_done[idx - 1]) return false;
    CoflowId c = p.collective[idx - 1];
    if (c >= 0 && coflows_[c].open > 0) return false;
  }
  for (FlowId fid : p.reuse_deps[idx]) {
    const Flow& f = flows_[fid];
    if (f.request >= 0 && requests_[f.request].pruned) continue;  // waived
    if (!f.done()) return false;
  }
  return true;
}

void Engine::try_start_layers(BatchId b) {
  BatchPipeline& p = pipes_[b];
  for (int layer = 1; layer <= p.layers; ++layer) {
    int idx = layer - 1;
    if (p.compute_started[idx]) continue;
    if (!layer_deps_met(p, layer)) return;
    p.compute_started[idx] = 1;
    p.layer_start[idx] = now_;
    push(now_ + p.compute_cost[idx], EventKind::ComputeComplete, b, layer);
    return;  // one layer computes at a time
  }
}

void Engine::check_pipeline_done(BatchId b) {
  BatchPipeline& p = pipes_[b];
  if (p.done_t != kNoTime) return;
  for (int i = 0; i < p.layers; ++i) {
    if (!p.compute_done[i]) return;
    if (p.collective[i] >= 0 && coflows_[p.collective[i]].open > 0) return;
  }
  p.done_t = now_;
  push(now_, EventKind::BatchDepart, b);
}

void Engine::handle_compute_complete(BatchId b, int layer) {
  BatchPipeline& p = pipes_[b];
  int idx = layer - 1;
  MFSIM_CHECK(p.compute_started[idx] && !p.compute_done[idx],
              "compute completion for a layer that is not running");
  MFSIM_CHECK(layer_deps_met(p, layer), "layer computed before its dependencies");
  p.compute_done[idx] = 1;
  p.compute_end[idx] = now_;

  // promotion review first, so interference reflects the pre-release state
  sched_.on_layer_boundary(b, view());

  CoflowId c = p.collective[idx];
  if (c >= 0) {
    for (FlowId fid : coflows_[c].members)
      if (!flow_scripted_[fid] && flows_[fid].state == FlowState::Pending) release_flow(fid);
  }
  for (FlowId fid : p.p2d_by_layer[idx])
    if (!flow_scripted_[fid] && flows_[fid].state == FlowState::Pending) release_flow(fid);

  try_start_layers(b);
  check_pipeline_done(b);
  rate_dirty_ = true;
}

void Engine::handle_batch_depart(BatchId b) {
  BatchPipeline& p = pipes_[b];
  if (p.departed) return;
  p.departed = true;
  if (workload_mode_) {
    unit_busy_[p.unit] = 0;
    push(now_, EventKind::BatchAdmit, p.unit);
  }
  // trailing last-stage flows now promote on the periodic clock
  bool p2d_left = false;
  for (FlowId fid : flows_by_batch_[b])
    if (flows_[fid].stage == Stage::P2D && !flows_[fid].done()) p2d_left = true;
  if (p2d_left && sched_.wants_promotion_ticks())
    push(now_ + params_.promotion_tick, EventKind::PromotionTick, b);

  batch_event_hook();
  for (RequestId r : batches_[b].request_ids) try_complete_request(r);
  rate_dirty_ = true;
}

void Engine::handle_admit_try(int unit) {
  if (unit_busy_[unit] || unit_queue_[unit].empty()) return;
  std::vector<RequestId> members;
  long tokens = 0;
  while (!unit_queue_[unit].empty()) {
    RequestId r = unit_queue_[unit].front();
    long t = requests_[r].prompt_tokens;
    if (!members.empty() && tokens + t > params_.max_batch_tokens) break;
    members.push_back(r);
    tokens += t;
    unit_queue_[unit].pop_front();
  }
  admit_batch(unit, std::move(members));
}

void Engine::admit_batch(int unit, std::vector<RequestId> members) {
  MFSIM_CHECK(!members.empty(), "admitting an empty batch");
  BatchId b = static_cast<BatchId>(batches_.size());
  Batch batch;
  batch.id = b;
  batch.request_ids = members;
  batch.admit_time = now_;
  batches_.push_back(std::move(batch));
  flows_by_batch_.emplace_back();
  batch_open_flows_.push_back(0);
  manual_admitted_.push_back(1);

  double batch_tokens = 0;
  for (RequestId r : members) {
    requests_[r].batch = b;
    batch_tokens += static_cast<double>(requests_[r].prompt_tokens);
  }

  BatchPipeline p;
  p.batch = b;
  p.unit = unit;
  p.layers = cost_.layers;
  p.compute_cost.assign(p.layers, cost_.layer_cost(batch_tokens));
  p.compute_started.assign(p.layers, 0);
  p.compute_done.assign(p.layers, 0);
  p.reuse_deps.assign(p.layers, {});
  p.collective.assign(p.layers, -1);
  p.p2d_by_layer.assign(p.layers, {});
  p.layer_start.assign(p.layers, kNoTime);
  p.compute_end.assign(p.layers, kNoTime);
  p.admit_t = now_;
  pipes_.push_back(std::move(p));
  BatchPipeline& pipe = pipes_.back();

  // request-owned flows
  std::vector<FlowId> to_release;
  for (RequestId r : members) {
    MsFlowBuild built = build_msflows(requests_[r], b, cost_, layout_);
    std::vector<FlowId> ids(built.flows.size());
    for (size_t i = 0; i < built.flows.size(); ++i) ids[i] = register_flow(built.flows[i]);
    for (auto& layer : built.layers) {
      int idx = layer.layer_index - 1;
      for (FlowId local : layer.reuse_flows) {
        pipe.reuse_deps[idx].push_back(ids[local]);
        to_release.push_back(ids[local]);  // reuse launches at admission
      }
      for (FlowId local : layer.p2d_flows) pipe.p2d_by_layer[idx].push_back(ids[local]);
    }
  }
  // batch-owned collectives: all-to-all among the unit's hosts
  double coll_bytes = batch_tokens * cost_.coll_bytes_per_token_layer;
  if (coll_bytes > 0.0 && layout_.hosts_per_unit > 1) {
    for (int l = 1; l <= pipe.layers; ++l) {
      std::vector<FlowId> mids;
      for (int i = 0; i < layout_.hosts_per_unit; ++i) {
        for (int j = 0; j < layout_.hosts_per_unit; ++j) {
          if (i == j) continue;
          Flow f;
          f.request = -1;
          f.batch = b;
          f.stage = Stage::Collective;
          f.src = layout_.prefill_host(unit, i);
          f.dst = layout_.prefill_host(unit, j);
          f.size = f.remaining = coll_bytes;
          f.target_layer = l;
          mids.push_back(register_flow(f));
        }
      }
      pipe.collective[l - 1] = register_coflow(b, l, mids);
    }
  }
  for (FlowId fid : to_release) release_flow(fid);

  unit_busy_[unit] = 1;
  try_start_layers(b);
  check_pipeline_done(b);
  batch_event_hook();
  rate_dirty_ = true;
}

SimTime Engine::manual_release_time(FlowId fid) const {
  for (const auto& [id, t] : manual_releases_)
    if (id == fid) return t;
  throw InternalError("scripted flow without a release time");
}

void Engine::activate_manual_batch(BatchId b) {
  if (manual_admitted_[b]) return;
  manual_admitted_[b] = 1;
  BatchPipeline& p = pipes_[b];
  p.admit_t = now_;
  for (FlowId fid : flows_by_batch_[b]) {
    Flow& f = flows_[fid];
    if (flow_scripted_[fid]) {
      push(std::max(now_, manual_release_time(fid)), EventKind::FlowRelease, fid);
    } else if (f.stage == Stage::Reuse) {
      release_flow(fid);
    }
  }
  try_start_layers(b);
  check_pipeline_done(b);
  batch_event_hook();
  rate_dirty_ = true;
}

void Engine::batch_event_hook() {
  sched_.on_batch_event(view());
  apply_prunes();
}

void Engine::apply_prunes() {
  auto newly = sched_.take_newly_pruned();
  if (newly.empty()) return;
  for (RequestId r : newly) {
    Request& req = requests_[r];
    req.pruned = true;
    if (req.batch < 0) continue;
    for (FlowId fid : flows_by_batch_[req.batch]) {
      Flow& f = flows_[fid];
      if (f.request != r || f.done()) continue;
      f.priority.band = Band::Scavenger;
      if (f.state == FlowState::Active) f.state = FlowState::Pruned;
    }
    // waived reuse dependencies may unblock the batch
    try_start_layers(req.batch);
    check_pipeline_done(req.batch);
  }
  rate_dirty_ = true;
}

void Engine::try_complete_request(RequestId r) {
  Request& req = requests_[r];
  if (req.ttft) return;
  if (req.batch < 0 || pipes_[req.batch].done_t == kNoTime) return;
  if (open_flows_[r] > 0) return;
  SimTime t = pipes_[req.batch].done_t;
  if (last_finish_[r] != kNoTime) t = std::max(t, last_finish_[r]);
  req.ttft = t;
}

RunResult Engine::run() {
  SimTime horizon = params_.horizon ? *params_.horizon : last_arrival_ + params_.horizon_slack;
  recompute_rates();
  rate_dirty_ = false;
  SimTime prev_t = -1.0;

  while (!queue_.empty()) {
    Event e = queue_.top();
    if (e.t > horizon) break;
    queue_.pop();

    if (e.kind == EventKind::FlowComplete) {
      const Flow& f = flows_[e.a];
      if (f.done() || e.b != flow_gen_[e.a]) continue;  // superseded schedule
    }
    advance_to(e.t);
    ++events_;
    if (e.t == prev_t) {
      if (++same_time_streak_ > params_.livelock_events)
        throw SimError("livelock: simulated time stuck at " + std::to_string(now_) +
                       " after " + std::to_string(same_time_streak_) + " events");
    } else {
      same_time_streak_ = 0;
      prev_t = e.t;
    }

    switch (e.kind) {
      case EventKind::FlowComplete: finish_flow(e.a); break;
      case EventKind::ComputeComplete: handle_compute_complete(e.a, e.b); break;
      case EventKind::BatchDepart: handle_batch_depart(e.a); break;
      case EventKind::RequestArrival: {
        unit_queue_[requests_[e.a].prefill_unit].push_back(e.a);
        push(now_, EventKind::BatchAdmit, requests_[e.a].prefill_unit);
        break;
      }
      case EventKind::BatchAdmit:
        if (workload_mode_)
          handle_admit_try(e.a);
        else
          activate_manual_batch(e.a);
        break;
      case EventKind::FlowRelease:
        if (flows_[e.a].state == FlowState::Pending) release_flow(e.a);
        break;
      case EventKind::PromotionTick: {
        BatchId b = e.a;
        bool p2d_left = false;
        for (FlowId fid : flows_by_batch_[b])
          if (flows_[fid].stage == Stage::P2D && !flows_[fid].done()) p2d_left = true;
        if (p2d_left) {
          if (sched_.on_promotion_tick(b, view())) rate_dirty_ = true;
          push(now_ + params_.promotion_tick, EventKind::PromotionTick, b);
        }
        break;
      }
    }
    if (rate_dirty_) {
      recompute_rates();
      rate_dirty_ = false;
    }
  }
  return finalize();
}

RunResult Engine::finalize() {
  RunResult res;
  res.events = events_;
  res.pruned_count = sched_.pruned_count();
  res.flow_finish = flow_finish_;

  // conservation: a finished flow moved exactly its size
  for (const Flow& f : flows_) {
    if (f.done()) MFSIM_CHECK(f.remaining == 0.0, "done flow with bytes remaining");
  }

  std::vector<double> batch_stall(batches_.size(), 0.0);
  res.coflows.resize(coflows_.size());
  for (const Coflow& c : coflows_) {
    CoflowRow row;
    row.id = c.id;
    row.release = c.release_t;
    row.done = c.done_t;
    if (c.done_t != kNoTime) {
      const BatchPipeline& p = pipes_[c.batch];
      int idx = c.layer - 1;
      double other_ready = p.compute_end[idx];
      if (c.layer < p.layers) {
        for (FlowId fid : p.reuse_deps[idx + 1]) {
          const Flow& f = flows_[fid];
          if (f.request >= 0 && requests_[f.request].pruned) continue;
          if (flow_finish_[fid] != kNoTime)
            other_ready = std::max(other_ready, flow_finish_[fid]);
        }
      }
      row.stall = std::max(0.0, c.done_t - other_ready);
      batch_stall[c.batch] += row.stall;
    }
    res.coflows[c.id] = row;
  }

  res.requests.reserve(requests_.size());
  for (const Request& r : requests_) {
    RequestRow row;
    row.id = r.id;
    row.arrival = r.arrival;
    row.done = r.ttft;
    row.deadline = r.deadline;
    row.pruned = r.pruned;
    if (r.batch >= 0) row.stall = batch_stall[r.batch];
    res.requests.push_back(row);
  }
  return res;
}

// ---------------------------------------------------------------------------
// PipelineInfo

int Engine::l_curr(BatchId b) const {
  const BatchPipeline& p = pipes_[b];
  for (int l = 1; l <= p.layers; ++l) {
    int idx = l - 1;
    if (!p.compute_done[idx]) return l;
    if (p.collective[idx] >= 0 && coflows_[p.collective[idx]].open > 0) return l;
  }
  return std::max(1, p.layers);
}

double Engine::remaining_compute(BatchId b) const {
  const BatchPipeline& p = pipes_[b];
  double total = 0.0;
  for (int i = 0; i < p.layers; ++i)
    if (!p.compute_done[i]) total += p.compute_cost[i];
  return total;
}

bool Engine::pipeline_done(BatchId b) const { return pipes_[b].done_t != kNoTime; }

bool Engine::batch_drained(BatchId b) const {
  return pipeline_done(b) && batch_open_flows_[b] == 0;
}

}  // namespace mfsim
