#ifndef MFSIM_CORE_ENGINE_HPP
#define MFSIM_CORE_ENGINE_HPP

#include <deque>
#include <optional>
#include <queue>
#include <vector>

#include "core/allocator.hpp"
#include "core/config.hpp"
#include "core/scheduler.hpp"
#include "core/topology.hpp"
#include "core/types.hpp"

namespace mfsim {

// Analytic compute-cost and flow-size model: per-layer compute is
// alpha + beta * batch_tokens, flow sizes scale per token per layer.
struct CostModel {
  int layers = 4;
  double alpha = 1e-3;                      // seconds
  double beta = 1e-6;                       // seconds per batched token
  double kv_bytes_per_token_layer = 1000;   // reuse and p2d (kappa_r = kappa_p)
  double coll_bytes_per_token_layer = 250;  // kappa_c

  double layer_cost(double batch_tokens) const { return alpha + beta * batch_tokens; }
  static CostModel from_config(const Config& cfg);
};

// Host numbering: prefill units first (hosts_per_unit each), decode hosts after.
struct ClusterLayout {
  int units = 1;
  int hosts_per_unit = 2;
  int decode_hosts = 1;

  NodeId prefill_host(int unit, int k) const { return unit * hosts_per_unit + k; }
  NodeId lead(int unit) const { return prefill_host(unit, 0); }
  NodeId decode_host(int unit) const {
    return units * hosts_per_unit + (unit % decode_hosts);
  }
  int total_hosts() const { return units * hosts_per_unit + decode_hosts; }
  static ClusterLayout from_config(const Config& cfg);
};

struct EngineParams {
  std::optional<SimTime> horizon;  // absolute; default last arrival + slack
  SimTime horizon_slack = 300.0;
  double promotion_tick = 1e-3;
  long max_batch_tokens = 8192;
  long livelock_events = 1000000;
  static EngineParams from_config(const Config& cfg);
};

// Collective barrier: complete when every member flow completes.
struct Coflow {
  CoflowId id = -1;
  BatchId batch = -1;
  int layer = 1;
  std::vector<FlowId> members;
  int open = 0;
  SimTime release_t = kNoTime;
  SimTime done_t = kNoTime;
};

struct MsFlowBuild {
  std::vector<Flow> flows;          // ids unassigned until registered
  std::vector<MsFlowLayer> layers;  // indices into `flows` until registered
};

// Per-request MsFlow DAG: per layer, reuse flows from the reuse source,
// one P2D flow toward the decode unit carrying the request deadline.
// Collectives are built per batch, not here.
MsFlowBuild build_msflows(const Request& r, BatchId batch, const CostModel& cost,
                          const ClusterLayout& layout);

struct BatchPipeline {
  BatchId batch = -1;
  int unit = 0;
  int layers = 0;
  std::vector<double> compute_cost;              // [layers]
  std::vector<char> compute_started, compute_done;
  std::vector<std::vector<FlowId>> reuse_deps;   // per layer (index l-1)
  std::vector<CoflowId> collective;              // per layer, -1 = none
  std::vector<std::vector<FlowId>> p2d_by_layer;
  std::vector<SimTime> layer_start, compute_end;
  bool departed = false;
  SimTime admit_t = kNoTime;
  SimTime done_t = kNoTime;
};

struct RequestRow {
  RequestId id = -1;
  SimTime arrival = 0.0;
  std::optional<SimTime> done;  // absolute completion (ttft instant)
  SimTime deadline = kInf;
  double stall = 0.0;
  bool pruned = false;
};

struct CoflowRow {
  CoflowId id = -1;
  SimTime release = kNoTime;
  SimTime done = kNoTime;
  double stall = 0.0;  // non-overlapped share of this collective
};

struct RunResult {
  std::vector<RequestRow> requests;
  std::vector<CoflowRow> coflows;
  std::vector<SimTime> flow_finish;  // by flow id, kNoTime when unfinished
  long events = 0;
  long pruned_count = 0;
};

class Engine : public PipelineInfo {
 public:
  Engine(const Topology& topo, Scheduler& sched, EngineParams params);

  // -- workload mode -------------------------------------------------------
  void load_workload(std::vector<Request> requests, const ClusterLayout& layout,
                     const CostModel& cost);

  // -- manual instances ----------------------------------------------------
  RequestId add_request(Request r);
  BatchId add_manual_batch(const std::vector<RequestId>& members,
                           std::vector<double> compute_costs, SimTime admit_at = 0.0);
  // Flows with release_at are released by the clock; otherwise reuse flows
  // release at admission and collective/P2D flows at their layer's compute
  // completion.
  FlowId add_manual_flow(BatchId batch, RequestId request, Stage stage, NodeId src,
                         NodeId dst, double size, int target_layer,
                         std::optional<SimTime> release_at = std::nullopt,
                         std::optional<SimTime> deadline = std::nullopt);

  RunResult run();

  // PipelineInfo
  int l_curr(BatchId b) const override;
  double remaining_compute(BatchId b) const override;
  bool pipeline_done(BatchId b) const override;
  bool batch_drained(BatchId b) const override;

  // post-run inspection (tests)
  const std::vector<Flow>& flows() const { return flows_; }
  const std::vector<Request>& requests() const { return requests_; }
  const std::vector<Batch>& batches() const { return batches_; }
  const std::vector<BatchPipeline>& pipelines() const { return pipes_; }
  const std::vector<Coflow>& coflows() const { return coflows_; }
  SimTime now() const { return now_; }

 private:
  enum class EventKind : uint8_t {
    FlowComplete,
    ComputeComplete,
    BatchDepart,
    RequestArrival,
    BatchAdmit,
    FlowRelease,
    PromotionTick
  };
  // completions free capacity before releases add demand; ticks run last
  static int klass_of(EventKind k) {
    switch (k) {
      case EventKind::FlowComplete:
      case EventKind::ComputeComplete:
      case EventKind::BatchDepart: return 0;
      case EventKind::RequestArrival:
      case EventKind::BatchAdmit:
      case EventKind::FlowRelease: return 1;
      case EventKind::PromotionTick: return 2;
    }
    return 3;
  }
  struct Event {
    SimTime t;
    int klass;
    uint64_t seq;
    EventKind kind;
    int a = -1;  // flow/batch/request/unit id
    int b = -1;  // layer or generation
  };
  struct EventLater {
    bool operator()(const Event& x, const Event& y) const {
      if (x.t != y.t) return x.t > y.t;
      if (x.klass != y.klass) return x.klass > y.klass;
      return x.seq > y.seq;
    }
  };

  SchedView view();
  void push(SimTime t, EventKind k, int a, int b = -1);
  void advance_to(SimTime t);
  void recompute_rates();
  void release_flow(FlowId fid);
  void finish_flow(FlowId fid);
  void handle_compute_complete(BatchId b, int layer);
  void handle_batch_depart(BatchId b);
  void handle_admit_try(int unit);
  void admit_batch(int unit, std::vector<RequestId> members);
  void activate_manual_batch(BatchId b);
  void try_start_layers(BatchId b);
  bool layer_deps_met(const BatchPipeline& p, int layer) const;
  void check_pipeline_done(BatchId b);
  void try_complete_request(RequestId r);
  void apply_prunes();
  void batch_event_hook();
  FlowId register_flow(Flow f);
  CoflowId register_coflow(BatchId b, int layer, const std::vector<FlowId>& members);
  void remove_active(FlowId fid);
  RunResult finalize();

  const Topology& topo_;
  Scheduler& sched_;
  EngineParams params_;

  SimTime now_ = 0.0;
  uint64_t seq_ = 0;
  long events_ = 0;
  long same_time_streak_ = 0;
  std::priority_queue<Event, std::vector<Event>, EventLater> queue_;

  std::vector<Flow> flows_;
  std::vector<Request> requests_;
  std::vector<Batch> batches_;
  std::vector<BatchPipeline> pipes_;
  std::vector<Coflow> coflows_;
  std::vector<std::vector<FlowId>> flows_by_batch_;
  std::vector<int> batch_open_flows_;

  std::vector<FlowId> active_;
  std::vector<int> active_pos_;      // by flow id, -1 when inactive
  std::vector<double> rate_;         // by flow id
  std::vector<int> flow_gen_;        // completion event generation
  std::vector<SimTime> flow_finish_;
  std::vector<char> flow_scripted_;  // released by the clock, not the pipeline
  std::vector<std::pair<FlowId, SimTime>> manual_releases_;
  std::vector<int> open_flows_;      // per request, non-done flows
  std::vector<SimTime> last_finish_; // per request, latest flow completion

  SimTime manual_release_time(FlowId fid) const;

  RateAllocation alloc_;
  bool rate_dirty_ = true;

  // workload mode
  bool workload_mode_ = false;
  CostModel cost_;
  ClusterLayout layout_;
  std::vector<std::deque<RequestId>> unit_queue_;
  std::vector<char> unit_busy_;

  // manual mode
  std::vector<char> manual_admitted_;
  SimTime last_arrival_ = 0.0;
};

}  // namespace mfsim

#endif
