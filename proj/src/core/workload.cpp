#include "core/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "core/baselines.hpp"

namespace mfsim {

double Rng::exponential(double rate) {
  MFSIM_CHECK(rate > 0.0, "exponential draw needs a positive rate");
  double u = uniform();
  return -std::log1p(-u) / rate;
}

double Rng::lognormal(double mean, double sigma) {
  if (sigma <= 0.0) return mean;
  double u1 = 1.0 - uniform();  // (0, 1]
  double u2 = uniform();
  double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  double mu = std::log(mean) - 0.5 * sigma * sigma;
  return std::exp(mu + sigma * z);
}

WorkloadSpec WorkloadSpec::from_config(const Config& cfg) {
  WorkloadSpec s;
  s.rate_rps = cfg.get_double("workload.rate_rps", 1.0);
  s.request_count = cfg.get_long("workload.request_count", 100);
  s.prompt_mean_tokens = cfg.get_double("workload.prompt_mean_tokens", 2000.0);
  s.prompt_sigma = cfg.get_double("workload.prompt_sigma", 0.0);
  s.reuse_fraction_mean = cfg.get_double("workload.reuse_fraction_mean", 0.5);
  s.reuse_skew = cfg.get_double("workload.reuse_skew", 1.0);
  s.seed = static_cast<uint64_t>(cfg.get_long("sim.seed", 1));
  s.trace_path = cfg.get_string("workload.trace", "");
  s.slo_multiplier = cfg.get_double("workload.slo_multiplier", 3.0);
  if (!(s.rate_rps > 0)) throw ConfigError("config key 'workload.rate_rps': must be > 0");
  if (s.request_count < 0)
    throw ConfigError("config key 'workload.request_count': must be >= 0");
  if (s.reuse_fraction_mean < 0 || s.reuse_fraction_mean > 1)
    throw ConfigError("config key 'workload.reuse_fraction_mean': must be in [0,1]");
  if (!(s.slo_multiplier > 0))
    throw ConfigError("config key 'workload.slo_multiplier': must be > 0");
  return s;
}

namespace {

// Zipf over the other units: hot low-index units emerge as shared sources.
int draw_reuse_source(Rng& rng, int self, int units, double skew) {
  double total = 0.0;
  for (int v = 0; v < units; ++v) {
    if (v == self) continue;
    total += 1.0 / std::pow(static_cast<double>(v + 1), skew);
  }
  double x = rng.uniform() * total;
  for (int v = 0; v < units; ++v) {
    if (v == self) continue;
    x -= 1.0 / std::pow(static_cast<double>(v + 1), skew);
    if (x <= 0.0) return v;
  }
  for (int v = units - 1; v >= 0; --v)
    if (v != self) return v;
  return -1;
}

uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  Rng r(seed ^ (0x5851f42d4c957f2dULL * (stream + 1)));
  return r.next_u64();
}

}  // namespace

std::vector<Request> generate_workload(const WorkloadSpec& spec, const ClusterLayout& layout,
                                       const CostModel& cost, long max_batch_tokens) {
  struct Draft {
    SimTime arrival;
    int unit;
    long tokens;
    double reuse_fraction;
    int source;
  };
  std::vector<Draft> drafts;
  for (int u = 0; u < layout.units; ++u) {
    Rng rng(mix_seed(spec.seed, static_cast<uint64_t>(u)));
    SimTime t = 0.0;
    for (long i = 0; i < spec.request_count; ++i) {
      t += rng.exponential(spec.rate_rps);
      Draft d;
      d.arrival = t;
      d.unit = u;
      double tok = rng.lognormal(spec.prompt_mean_tokens, spec.prompt_sigma);
      d.tokens = std::clamp(static_cast<long>(std::llround(tok)), 1L, max_batch_tokens);
      double m = spec.reuse_fraction_mean;
      double width = std::min({0.15, m, 1.0 - m});
      d.reuse_fraction = m + width * (2.0 * rng.uniform() - 1.0);
      d.source = -1;
      if (d.reuse_fraction > 0.0 && layout.units > 1)
        d.source = draw_reuse_source(rng, u, layout.units, spec.reuse_skew);
      if (layout.units <= 1) d.reuse_fraction = 0.0;
      drafts.push_back(d);
    }
  }
  std::sort(drafts.begin(), drafts.end(), [](const Draft& a, const Draft& b) {
    if (a.arrival != b.arrival) return a.arrival < b.arrival;
    return a.unit < b.unit;
  });
  if (static_cast<long>(drafts.size()) > spec.request_count)
    drafts.resize(spec.request_count);

  std::vector<Request> out;
  out.reserve(drafts.size());
  for (size_t i = 0; i < drafts.size(); ++i) {
    const Draft& d = drafts[i];
    Request r;
    r.id = static_cast<RequestId>(i);
    r.arrival = d.arrival;
    r.prompt_tokens = d.tokens;
    r.reuse_fraction = d.reuse_fraction;
    r.reuse_source = d.source;
    r.prefill_unit = d.unit;
    r.layer_count = cost.layers;
    r.compute_costs.assign(cost.layers, cost.layer_cost(static_cast<double>(d.tokens)));
    r.deadline = kInf;  // assigned by derive_slos
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Request> load_trace(const std::string& path, const ClusterLayout& layout,
                                const CostModel& cost) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace file: " + path);
  std::vector<Request> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("arrival_s", 0) == 0) continue;  // header
    std::vector<std::string> cells;
    size_t start = 0;
    while (true) {
      size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 4)
      throw WorkloadError("trace line " + std::to_string(lineno) + ": expected 4 columns");
    Request r;
    r.id = static_cast<RequestId>(out.size());
    try {
      r.arrival = std::stod(cells[0]);
      r.prompt_tokens = std::stol(cells[1]);
      r.reuse_fraction = std::stod(cells[2]);
      r.reuse_source = cells[3].empty() ? -1 : std::stoi(cells[3]);
    } catch (const std::exception&) {
      throw WorkloadError("trace line " + std::to_string(lineno) + ": malformed value");
    }
    r.prefill_unit = static_cast<int>(out.size()) % layout.units;
    if (r.reuse_source == r.prefill_unit) r.reuse_source = (r.reuse_source + 1) % layout.units;
    if (layout.units <= 1) {
      r.reuse_fraction = 0.0;
      r.reuse_source = -1;
    }
    r.layer_count = cost.layers;
    r.compute_costs.assign(cost.layers, cost.layer_cost(static_cast<double>(r.prompt_tokens)));
    r.deadline = kInf;
    out.push_back(std::move(r));
  }
  return out;
}

SimTime isolated_ttft(const Request& r, const Topology& topo, const ClusterLayout& layout,
                      const CostModel& cost, const EngineParams& params) {
  Request probe = r;
  probe.id = 0;
  probe.arrival = 0.0;
  probe.deadline = kInf;
  probe.ttft.reset();
  probe.batch = -1;
  probe.pruned = false;

  FairShareScheduler fs;  // policy-independent: nothing to contend with
  EngineParams p = params;
  p.horizon.reset();
  p.horizon_slack = 1e9;
  Engine eng(topo, fs, p);
  eng.load_workload({probe}, layout, cost);
  RunResult res = eng.run();
  MFSIM_CHECK(res.requests.size() == 1 && res.requests[0].done.has_value(),
              "isolated oracle run did not finish");
  return *res.requests[0].done;
}

void derive_slos(std::vector<Request>& requests, double multiplier, const Topology& topo,
                 const ClusterLayout& layout, const CostModel& cost,
                 const EngineParams& params) {
  MFSIM_CHECK(multiplier > 0.0, "SLO multiplier must be positive");
  std::map<std::tuple<long, long, int, int>, SimTime> cache;
  for (Request& r : requests) {
    long frac_bits = static_cast<long>(std::llround(r.reuse_fraction * 1e9));
    auto key = std::make_tuple(r.prompt_tokens, frac_bits, r.prefill_unit, r.reuse_source);
    auto it = cache.find(key);
    SimTime low;
    if (it != cache.end()) {
      low = it->second;
    } else {
      low = isolated_ttft(r, topo, layout, cost, params);
      cache.emplace(key, low);
    }
    r.deadline = r.arrival + multiplier * low;
  }
}

}  // namespace mfsim
