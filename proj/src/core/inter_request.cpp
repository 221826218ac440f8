#include "core/inter_request.hpp"

#include <algorithm>

namespace mfsim {

RedScore red_score(const std::vector<std::pair<SimTime, RequestId>>& deadlines) {
  MFSIM_CHECK(!deadlines.empty(), "red_score: empty batch");
  auto sorted = deadlines;
  std::sort(sorted.begin(), sorted.end());
  const size_t n = sorted.size();

  RedScore s;
  bool all_equal = sorted.front().first == sorted.back().first;
  if (n == 1 || all_equal) {
    // degenerate batch: everything is tight
    s.k_star = n;
    for (const auto& [d, id] : sorted) s.tight_set.push_back(id);
    s.f = 1.0;
    s.d_tight_min = sorted.front().first;
    s.d_loose_min = sorted.front().first;
    s.red = sorted.front().first;
    return s;
  }

  size_t k_star = 1;
  double best_gap = sorted[1].first - sorted[0].first;
  for (size_t k = 2; k < n; ++k) {
    double gap = sorted[k].first - sorted[k - 1].first;
    if (gap > best_gap) {  // earliest k wins ties
      best_gap = gap;
      k_star = k;
    }
  }
  s.k_star = k_star;
  for (size_t i = 0; i < n; ++i)
    (i < k_star ? s.tight_set : s.loose_set).push_back(sorted[i].second);
  s.f = static_cast<double>(k_star) / static_cast<double>(n);
  s.d_tight_min = sorted[0].first;
  s.d_loose_min = sorted[k_star].first;
  s.red = s.f * s.d_tight_min + (1.0 - s.f) * s.d_loose_min;
  return s;
}

RedScore red_score(const std::vector<SimTime>& deadlines) {
  std::vector<std::pair<SimTime, RequestId>> with_ids;
  with_ids.reserve(deadlines.size());
  for (size_t i = 0; i < deadlines.size(); ++i)
    with_ids.emplace_back(deadlines[i], static_cast<RequestId>(i));
  return red_score(with_ids);
}

FinishEstimate est_finish_time(SimTime now, double comp, const std::vector<double>& S,
                               const std::vector<double>& L,
                               const std::vector<double>& port_bw) {
  MFSIM_CHECK(S.size() == L.size() && L.size() == port_bw.size(),
              "est_finish_time: port vectors disagree");
  FinishEstimate e;
  double worst = 0.0;
  bool infeasible = false;
  for (size_t u = 0; u < port_bw.size(); ++u) {
    double total = S[u] + L[u];
    double ratio;
    if (port_bw[u] <= 0.0) {
      if (total <= 0.0) continue;
      ratio = kInf;
    } else {
      ratio = total / port_bw[u];
    }
    if (ratio > worst) {
      worst = ratio;
      e.u_star = static_cast<int>(u);
      infeasible = (ratio == kInf);
    }
  }
  e.f_hat = infeasible ? kInf : now + comp + worst;
  return e;
}

namespace {

struct PoolEntry {
  RequestId id;
  size_t batch_pos;  // position in sigma
  const std::vector<double>* load;
};

}  // namespace

ScheduleDecision inter_scheduling(const std::vector<InterBatch>& batches,
                                  const std::vector<double>& port_bw, long drop_budget,
                                  SimTime now) {
  ScheduleDecision out;
  out.drop_budget = std::max(0L, drop_budget);
  if (batches.empty()) return out;
  const size_t ports = port_bw.size();

  // Step 1: sort by RED (ties: earlier admit, then id)
  struct Scored {
    const InterBatch* b;
    double red;
    SimTime d_lo;
  };
  std::vector<Scored> order;
  order.reserve(batches.size());
  for (const auto& b : batches) {
    MFSIM_CHECK(!b.requests.empty(), "inter_scheduling: empty batch");
    std::vector<std::pair<SimTime, RequestId>> dl;
    for (const auto& r : b.requests) dl.emplace_back(r.deadline, r.id);
    RedScore s = red_score(dl);
    order.push_back({&b, s.red, s.d_loose_min});
  }
  std::stable_sort(order.begin(), order.end(), [](const Scored& a, const Scored& b) {
    if (a.red != b.red) return a.red < b.red;
    if (a.b->admit_time != b.b->admit_time) return a.b->admit_time < b.b->admit_time;
    return a.b->id < b.b->id;
  });
  for (const auto& s : order) out.sigma.push_back(s.b->id);

  std::vector<double> S(ports, 0.0);
  std::vector<PoolEntry> pool;

  for (size_t k = 0; k < order.size(); ++k) {
    const InterBatch& b = *order[k].b;
    std::vector<double> L(ports, 0.0);
    for (const auto& r : b.requests) {
      MFSIM_CHECK(r.load.size() == ports, "inter_scheduling: request load vector size");
      pool.push_back({r.id, k, &r.load});
      for (size_t u = 0; u < ports; ++u) L[u] += r.load[u];
    }

    FinishEstimate est = est_finish_time(now, b.remaining_compute, S, L, port_bw);
    // Step 2 + 3: feasibility check with selective pruning
    while (est.f_hat > order[k].d_lo &&
           static_cast<long>(out.pruned.size()) < out.drop_budget && !pool.empty()) {
      const size_t u_star = static_cast<size_t>(est.u_star);
      size_t victim = pool.size();
      double victim_load = 0.0;
      for (size_t i = 0; i < pool.size(); ++i) {
        double l = (*pool[i].load)[u_star];
        if (l <= 0.0) continue;
        if (victim == pool.size() || l > victim_load ||
            (l == victim_load && pool[i].id < pool[victim].id)) {
          victim = i;
          victim_load = l;
        }
      }
      if (victim == pool.size()) break;  // nobody loads the bottleneck: no progress

      const PoolEntry v = pool[victim];
      pool.erase(pool.begin() + static_cast<long>(victim));
      out.pruned.push_back(v.id);
      auto& target = (v.batch_pos == k) ? L : S;
      for (size_t u = 0; u < ports; ++u) target[u] = std::max(0.0, target[u] - (*v.load)[u]);
      est = est_finish_time(now, b.remaining_compute, S, L, port_bw);
    }
    out.f_hat.push_back(est.f_hat);
    out.d_lo.push_back(order[k].d_lo);

    for (size_t u = 0; u < ports; ++u) S[u] += L[u];
  }
  std::sort(out.pruned.begin(), out.pruned.end());
  return out;
}

}  // namespace mfsim
