#ifndef MFSIM_CORE_WORKLOAD_HPP
#define MFSIM_CORE_WORKLOAD_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "core/engine.hpp"

namespace mfsim {

// Deterministic, minimal RNG stack (splitmix64 core) so that traces replay
// bit-identically across toolchains.
struct Rng {
  uint64_t state;

  explicit Rng(uint64_t seed) : state(seed) {}
  uint64_t next_u64() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() {  // [0, 1)
    return static_cast<double>(next_u64() >> 11) * (1.0 / 9007199254740992.0);
  }
  double exponential(double rate);
  double lognormal(double mean, double sigma);  // parametrized by the mean value
};

struct WorkloadSpec {
  double rate_rps = 1.0;  // Poisson arrivals per prefill unit
  long request_count = 100;
  double prompt_mean_tokens = 2000.0;
  double prompt_sigma = 0.0;  // lognormal shape; 0 = constant prompts
  double reuse_fraction_mean = 0.5;
  double reuse_skew = 1.0;  // Zipf exponent over peer units
  uint64_t seed = 1;
  std::string trace_path;  // optional CSV override
  double slo_multiplier = 3.0;

  static WorkloadSpec from_config(const Config& cfg);
};

std::vector<Request> generate_workload(const WorkloadSpec& spec, const ClusterLayout& layout,
                                       const CostModel& cost, long max_batch_tokens);

// CSV schema: arrival_s,prompt_tokens,reuse_fraction,source_unit
// (header optional); requests round-robin across prefill units.
std::vector<Request> load_trace(const std::string& path, const ClusterLayout& layout,
                                const CostModel& cost);

// Contention-free oracle run: the request alone on an empty cluster.
SimTime isolated_ttft(const Request& r, const Topology& topo, const ClusterLayout& layout,
                      const CostModel& cost, const EngineParams& params);

// deadline = arrival + multiplier * ttft_low, ttft_low from the oracle run
void derive_slos(std::vector<Request>& requests, double multiplier, const Topology& topo,
                 const ClusterLayout& layout, const CostModel& cost,
                 const EngineParams& params);

}  // namespace mfsim

#endif
