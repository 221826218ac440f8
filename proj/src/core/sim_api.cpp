#include "core/sim_api.hpp"

#include "core/scheduler.hpp"
#include "core/workload.hpp"

namespace mfsim {

RunOutput run_simulation(const Config& cfg) {
  PolicyKind kind = parse_policy(cfg.get_string("policy", "fs"));
  Topology topo = build_topology(cfg);
  ClusterLayout layout = ClusterLayout::from_config(cfg);
  CostModel cost = CostModel::from_config(cfg);
  EngineParams params = EngineParams::from_config(cfg);
  WorkloadSpec spec = WorkloadSpec::from_config(cfg);

  std::vector<Request> requests;
  if (!spec.trace_path.empty())
    requests = load_trace(spec.trace_path, layout, cost);
  else
    requests = generate_workload(spec, layout, cost, params.max_batch_tokens);
  derive_slos(requests, spec.slo_multiplier, topo, layout, cost, params);

  auto sched = make_scheduler(kind, cfg);
  Engine engine(topo, *sched, params);
  engine.load_workload(std::move(requests), layout, cost);
  RunResult result = engine.run();

  RunOutput out;
  out.report = build_metrics(result);
  out.policy = policy_name(kind);
  out.seed = static_cast<long>(spec.seed);
  out.rate_rps = spec.rate_rps;
  out.summary = summary_json(out.report, out.policy, out.seed, out.rate_rps);
  return out;
}

void write_outputs(const RunOutput& out, const std::string& out_dir) {
  write_report(out.report, out.policy, out.seed, out.rate_rps, out_dir);
}

}  // namespace mfsim
