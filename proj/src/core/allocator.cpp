#include "core/allocator.hpp"

#include <algorithm>
#include <limits>

namespace mfsim {

namespace {

// scratch buffers reused across calls; the allocator runs at every event
struct Workspace {
  std::vector<double> residual;     // by link id
  std::vector<int> count;           // unfrozen flows per link
  std::vector<LinkId> touched;      // links with count > 0 this class
  std::vector<double> rate;
  std::vector<char> frozen;
  std::vector<double> cap;
  std::vector<const std::vector<LinkId>*> routes;
};

Workspace& workspace() {
  thread_local Workspace ws;
  return ws;
}

}  // namespace

RateAllocation allocate_rates(const std::vector<Flow>& flows, const Topology& topo,
                              const PriorityClasses& classes, const RateCaps* caps,
                              SimTime now) {
  RateAllocation alloc;
  alloc.valid_from = now;

  Workspace& ws = workspace();
  const size_t nlinks = topo.links().size();
  ws.residual.assign(nlinks, 0.0);
  for (const Link& l : topo.links()) ws.residual[l.id] = l.capacity;
  if (ws.count.size() < nlinks) ws.count.assign(nlinks, 0);

  for (const auto& cls : classes) {
    const size_t n = cls.size();
    if (n == 0) continue;

    if (n == 1) {
      // strict-priority singleton: take the bottleneck residual, capped
      const Flow& f = flows[cls[0]];
      const auto& route = topo.route(f.src, f.dst);
      MFSIM_CHECK(!route.empty(), "allocate_rates: same-host flow has no link demand");
      double r = kInf;
      if (caps) {
        auto it = caps->find(f.id);
        if (it != caps->end()) r = std::max(0.0, it->second);
      }
      for (LinkId l : route) r = std::min(r, std::max(0.0, ws.residual[l]));
      for (LinkId l : route) ws.residual[l] -= r;
      alloc.rates[f.id] = r;
      continue;
    }

    ws.rate.assign(n, 0.0);
    ws.frozen.assign(n, 0);
    ws.cap.assign(n, kInf);
    ws.routes.assign(n, nullptr);
    for (size_t i = 0; i < n; ++i) {
      const Flow& f = flows[cls[i]];
      ws.routes[i] = &topo.route(f.src, f.dst);
      MFSIM_CHECK(!ws.routes[i]->empty(), "allocate_rates: same-host flow has no link demand");
      if (caps) {
        auto it = caps->find(f.id);
        if (it != caps->end()) ws.cap[i] = std::max(0.0, it->second);
      }
    }

    size_t guard = n + nlinks + 2;
    while (guard-- > 0) {
      ws.touched.clear();
      bool any = false;
      for (size_t i = 0; i < n; ++i) {
        if (ws.frozen[i]) continue;
        any = true;
        for (LinkId l : *ws.routes[i]) {
          if (ws.count[l] == 0) ws.touched.push_back(l);
          ++ws.count[l];
        }
      }
      if (!any) break;

      double inc = kInf;
      for (LinkId l : ws.touched)
        inc = std::min(inc, std::max(0.0, ws.residual[l]) / ws.count[l]);
      for (size_t i = 0; i < n; ++i)
        if (!ws.frozen[i] && ws.cap[i] < kInf) inc = std::min(inc, ws.cap[i] - ws.rate[i]);
      inc = std::max(inc, 0.0);

      for (size_t i = 0; i < n; ++i)
        if (!ws.frozen[i]) ws.rate[i] += inc;
      for (LinkId l : ws.touched) ws.residual[l] -= inc * ws.count[l];

      bool froze = false;
      for (size_t i = 0; i < n; ++i) {
        if (ws.frozen[i]) continue;
        // one ulp of rounding in rate += inc must still count as capped
        double cap_eps = 1e-12 * std::max(1.0, ws.cap[i] == kInf ? 0.0 : ws.cap[i]);
        bool stop = ws.rate[i] >= ws.cap[i] - cap_eps;
        if (!stop) {
          for (LinkId l : *ws.routes[i]) {
            double eps = 1e-12 * topo.link(l).capacity;
            if (ws.residual[l] <= eps) {
              stop = true;
              break;
            }
          }
        }
        if (stop) {
          ws.frozen[i] = 1;
          froze = true;
        }
      }
      for (LinkId l : ws.touched) ws.count[l] = 0;
      MFSIM_CHECK(froze, "allocate_rates: filling made no progress");
    }

    for (size_t i = 0; i < n; ++i) alloc.rates[cls[i]] = ws.rate[i];
  }
  return alloc;
}

double load_fraction(const Link& link, const RateAllocation& alloc,
                     const std::vector<Flow>& flows, const Topology& topo,
                     const PriorityKey& above) {
  double used = 0.0;
  for (const auto& [fid, r] : alloc.rates) {
    if (r <= 0.0) continue;
    const Flow& f = flows[fid];
    if (!f.transferable()) continue;
    if (!outranks_level(f.priority, above)) continue;
    const auto& route = topo.route(f.src, f.dst);
    if (std::find(route.begin(), route.end(), link.id) != route.end()) used += r;
  }
  return std::clamp(used / link.capacity, 0.0, 1.0);
}

LinkLoadIndex::LinkLoadIndex(const RateAllocation& alloc, const std::vector<Flow>& flows,
                             const Topology& topo) {
  entries_.assign(topo.links().size(), {});
  for (const auto& [fid, r] : alloc.rates) {
    if (r <= 0.0) continue;
    const Flow& f = flows[fid];
    if (!f.transferable()) continue;
    int key = (static_cast<int>(f.priority.band) << 16) | f.priority.level;
    for (LinkId l : topo.route(f.src, f.dst)) entries_[l].push_back({key, r});
  }
  for (auto& v : entries_) {
    std::sort(v.begin(), v.end());
    double run = 0.0;
    for (auto& [key, r] : v) {
      run += r;
      r = run;  // prefix sum
    }
  }
}

double LinkLoadIndex::higher_fraction(const Link& link, const PriorityKey& above) const {
  const auto& v = entries_[link.id];
  int key = (static_cast<int>(above.band) << 16) | above.level;
  // last entry strictly below `key`
  auto it = std::lower_bound(v.begin(), v.end(), std::pair<int, double>{key, -1.0});
  if (it == v.begin()) return 0.0;
  double load = std::prev(it)->second;
  return std::clamp(load / link.capacity, 0.0, 1.0);
}

}  // namespace mfsim
