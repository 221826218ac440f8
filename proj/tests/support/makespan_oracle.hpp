// Independent brute-force oracle for single-link prefill makespans: evaluates
// any static flow priority order under the fluid model, and the exhaustive
// optimum over all such orders.
#ifndef MFSIM_TESTS_MAKESPAN_ORACLE_HPP
#define MFSIM_TESTS_MAKESPAN_ORACLE_HPP

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

namespace mfsim::oracle {

struct PipelineFlow {
  double size;
  int target;  // layer consuming the data, 1-based
};

struct PipelineInstance {
  std::vector<double> compute;  // per-layer duration
  std::vector<PipelineFlow> flows;  // all released at t=0, one shared link, capacity 1
};

// Makespan (completion of the last compute layer) when pending flows are
// served one at a time in the fixed priority `order`.
inline double makespan_static(const PipelineInstance& ins, const std::vector<int>& order) {
  const int L = static_cast<int>(ins.compute.size());
  std::vector<double> rem(ins.flows.size());
  for (size_t i = 0; i < ins.flows.size(); ++i) rem[i] = ins.flows[i].size;

  double t = 0.0;
  int layer = 1;             // next layer to finish computing
  double compute_end = -1.0; // < 0 when idle
  double inf = std::numeric_limits<double>::infinity();

  auto deps_met = [&](int l) {
    for (size_t i = 0; i < ins.flows.size(); ++i)
      if (ins.flows[i].target == l && rem[i] > 0.0) return false;
    return true;
  };

  int guard = 10000;
  while (layer <= L && guard-- > 0) {
    if (compute_end < 0.0 && deps_met(layer)) compute_end = t + ins.compute[layer - 1];
    int serving = -1;
    for (int f : order)
      if (rem[f] > 0.0) {
        serving = f;
        break;
      }
    double next_flow = serving >= 0 ? t + rem[serving] : inf;
    double next_comp = compute_end >= 0.0 ? compute_end : inf;
    if (next_comp == inf && next_flow == inf) break;  // deadlock: missing deps
    if (next_flow <= next_comp) {
      t = next_flow;
      rem[serving] = 0.0;
    } else {
      if (serving >= 0) rem[serving] -= next_comp - t;  // partial transfer
      t = next_comp;
      compute_end = -1.0;
      ++layer;
    }
  }
  return layer > L ? t : inf;
}

// Serve the pending flow with the smallest RLI (ties: lower index); the
// current layer is the smallest not-yet-computed one.
inline double makespan_smallest_rli(const PipelineInstance& ins) {
  const int L = static_cast<int>(ins.compute.size());
  std::vector<double> rem(ins.flows.size());
  for (size_t i = 0; i < ins.flows.size(); ++i) rem[i] = ins.flows[i].size;

  double t = 0.0;
  int layer = 1;
  double compute_end = -1.0;
  double inf = std::numeric_limits<double>::infinity();

  auto deps_met = [&](int l) {
    for (size_t i = 0; i < ins.flows.size(); ++i)
      if (ins.flows[i].target == l && rem[i] > 0.0) return false;
    return true;
  };

  int guard = 10000;
  while (layer <= L && guard-- > 0) {
    if (compute_end < 0.0 && deps_met(layer)) compute_end = t + ins.compute[layer - 1];
    int serving = -1;
    int best_rli = 0;
    for (size_t i = 0; i < ins.flows.size(); ++i) {
      if (rem[i] <= 0.0) continue;
      int rli = ins.flows[i].target - layer;
      if (serving < 0 || rli < best_rli) {
        serving = static_cast<int>(i);
        best_rli = rli;
      }
    }
    double next_flow = serving >= 0 ? t + rem[serving] : inf;
    double next_comp = compute_end >= 0.0 ? compute_end : inf;
    if (next_comp == inf && next_flow == inf) break;
    if (next_flow <= next_comp) {
      t = next_flow;
      rem[serving] = 0.0;
    } else {
      if (serving >= 0) rem[serving] -= next_comp - t;  // partial transfer
      t = next_comp;
      compute_end = -1.0;
      ++layer;
    }
  }
  return layer > L ? t : inf;
}

inline double makespan_optimal(const PipelineInstance& ins) {
  std::vector<int> order(ins.flows.size());
  std::iota(order.begin(), order.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  std::sort(order.begin(), order.end());
  do {
    best = std::min(best, makespan_static(ins, order));
  } while (std::next_permutation(order.begin(), order.end()));
  return best;
}

}  // namespace mfsim::oracle

#endif
