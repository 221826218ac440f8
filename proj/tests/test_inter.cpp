#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "core/inter_request.hpp"

using namespace mfsim;

TEST_CASE("red score: partition at the maximal gap") {
  RedScore s = red_score(std::vector<SimTime>{7, 12, 12, 18});
  CHECK(s.k_star == 3);
  CHECK(s.f == doctest::Approx(0.75));
  CHECK(s.d_tight_min == doctest::Approx(7));
  CHECK(s.d_loose_min == doctest::Approx(18));
  CHECK(s.red == doctest::Approx(9.75));
  CHECK(s.tight_set.size() == 3);
  CHECK(s.loose_set.size() == 1);
}

TEST_CASE("red score: piggyback mitigation ranks the uniform batch first") {
  RedScore outlier = red_score(std::vector<SimTime>{5, 100, 100, 100});
  RedScore uniform = red_score(std::vector<SimTime>{50, 50, 50, 50});
  CHECK(outlier.red == doctest::Approx(76.25));
  CHECK(uniform.red == doctest::Approx(50.0));
  CHECK(uniform.red < outlier.red);
  // degenerate all-equal batch: everything tight
  CHECK(uniform.f == doctest::Approx(1.0));
  CHECK(uniform.loose_set.empty());
}

TEST_CASE("red score: singleton and bounds") {
  RedScore s = red_score(std::vector<SimTime>{42});
  CHECK(s.red == doctest::Approx(42));
  CHECK(s.f == doctest::Approx(1.0));

  std::mt19937_64 rng(3);
  for (int iter = 0; iter < 200; ++iter) {
    int n = 1 + static_cast<int>(rng() % 6);
    std::vector<SimTime> d;
    for (int i = 0; i < n; ++i) d.push_back(static_cast<double>(rng() % 100));
    RedScore r = red_score(d);
    auto [lo, hi] = std::minmax_element(d.begin(), d.end());
    CHECK(r.red >= *lo - 1e-12);  // convex combination of member deadlines
    CHECK(r.red <= *hi + 1e-12);
  }
}

TEST_CASE("red ordering is scale invariant") {
  std::mt19937_64 rng(17);
  for (int iter = 0; iter < 50; ++iter) {
    int nb = 2 + static_cast<int>(rng() % 4);
    std::vector<std::vector<SimTime>> batches(nb);
    for (auto& b : batches) {
      int n = 1 + static_cast<int>(rng() % 5);
      for (int i = 0; i < n; ++i) b.push_back(1.0 + static_cast<double>(rng() % 50));
    }
    double scale = 0.5 + static_cast<double>(rng() % 100) / 10.0;
    std::vector<double> red1, red2;
    for (auto& b : batches) {
      red1.push_back(red_score(b).red);
      auto scaled = b;
      for (auto& d : scaled) d *= scale;
      red2.push_back(red_score(scaled).red);
    }
    std::vector<int> ord1(nb), ord2(nb);
    for (int i = 0; i < nb; ++i) ord1[i] = ord2[i] = i;
    std::stable_sort(ord1.begin(), ord1.end(), [&](int a, int b) { return red1[a] < red1[b]; });
    std::stable_sort(ord2.begin(), ord2.end(), [&](int a, int b) { return red2[a] < red2[b]; });
    CHECK(ord1 == ord2);
  }
}

TEST_CASE("est_finish_time: bottleneck port and worst-case accumulation") {
  FinishEstimate e = est_finish_time(0.0, 2.0, {3, 1}, {1, 4}, {1, 1});
  CHECK(e.u_star == 1);  // port 2 carries load 5
  CHECK(e.f_hat == doctest::Approx(7.0));

  // no batch load: the bottleneck is the standing interference
  e = est_finish_time(0.0, 2.0, {3, 1}, {0, 0}, {1, 1});
  CHECK(e.f_hat == doctest::Approx(5.0));
  CHECK(e.u_star == 0);

  // single port, no interference
  e = est_finish_time(1.0, 2.0, {0}, {4}, {2});
  CHECK(e.f_hat == doctest::Approx(5.0));

  // zero-bandwidth port with load is infeasible
  e = est_finish_time(0.0, 2.0, {1, 0}, {0, 1}, {1, 0});
  CHECK(e.f_hat == kInf);
}

namespace {

InterBatch make_batch(BatchId id, SimTime admit, double comp,
                      std::vector<std::pair<SimTime, std::vector<double>>> reqs,
                      RequestId first_rid) {
  InterBatch b;
  b.id = id;
  b.admit_time = admit;
  b.remaining_compute = comp;
  RequestId rid = first_rid;
  for (auto& [deadline, load] : reqs) {
    InterRequestLoad r;
    r.id = rid++;
    r.deadline = deadline;
    r.load = load;
    b.requests.push_back(std::move(r));
  }
  return b;
}

}  // namespace

TEST_CASE("pruning restores feasibility within budget") {
  // S starts empty; seed it with a standing batch of load [3,1]
  std::vector<InterBatch> batches;
  batches.push_back(make_batch(0, 0.0, 0.0, {{1000.0, {3, 1}}}, 100));
  // target batch: comp 2, D_lo = 6, loads [1,1] and [0,3]
  batches.push_back(make_batch(1, 1.0, 2.0, {{6.0, {1, 1}}, {6.0, {0, 3}}}, 0));
  ScheduleDecision d = inter_scheduling(batches, {1, 1}, 2, 0.0);

  REQUIRE(d.sigma.size() == 2);
  CHECK(d.sigma[0] == 1);  // red 6 before red 1000
  CHECK(d.sigma[1] == 0);
  // batch 1 alone is feasible (no interference yet): F = 0+2+max(1,4)=6 <= 6
  CHECK(d.pruned.empty());
}

TEST_CASE("pruning: the heaviest bottleneck contributor goes first") {
  // one batch, both requests due at 6; interference S = [3,1] comes from a
  // higher-priority batch with an earlier deadline
  std::vector<InterBatch> batches;
  batches.push_back(make_batch(7, 0.0, 0.0, {{5.0, {3, 1}}}, 100));
  batches.push_back(make_batch(8, 1.0, 2.0, {{6.0, {1, 1}}, {6.0, {0, 3}}}, 0));
  ScheduleDecision d = inter_scheduling(batches, {1, 1}, 2, 0.0);
  // F = 0+2+max(4,5)/1 = 7 > 6: prune request 1 (load 3 on the bottleneck
  // port), leaving F = 2+max(4,2) = 6 <= 6
  REQUIRE(d.pruned.size() == 1);
  CHECK(d.pruned[0] == 1);
}

TEST_CASE("budget zero means no pruning ever") {
  std::vector<InterBatch> batches;
  batches.push_back(make_batch(0, 0.0, 5.0, {{0.1, {9, 9}}}, 0));
  ScheduleDecision d = inter_scheduling(batches, {1, 1}, 0, 0.0);
  CHECK(d.pruned.empty());
  CHECK(d.sigma == std::vector<BatchId>{0});
}

TEST_CASE("randomized pruning: budget respected, feasibility or exhaustion") {
  std::mt19937_64 rng(23);
  for (int iter = 0; iter < 200; ++iter) {
    int ports = 1 + static_cast<int>(rng() % 4);
    std::vector<double> bw(ports, 1.0);
    int nb = 1 + static_cast<int>(rng() % 5);
    std::vector<InterBatch> batches;
    RequestId rid = 0;
    long total_requests = 0;
    for (int b = 0; b < nb; ++b) {
      int nr = 1 + static_cast<int>(rng() % 6);
      std::vector<std::pair<SimTime, std::vector<double>>> reqs;
      for (int r = 0; r < nr; ++r) {
        std::vector<double> load(ports);
        for (auto& l : load) l = static_cast<double>(rng() % 6);
        reqs.push_back({1.0 + static_cast<double>(rng() % 20), load});
      }
      total_requests += nr;
      batches.push_back(
          make_batch(b, static_cast<double>(rng() % 5), static_cast<double>(rng() % 3),
                     std::move(reqs), rid));
      rid += nr;
    }
    long budget = static_cast<long>(rng() % 5);
    ScheduleDecision d = inter_scheduling(batches, bw, budget, 0.0);

    CHECK(static_cast<long>(d.pruned.size()) <= budget);
    CHECK(d.sigma.size() == batches.size());
    // sigma is a permutation of the batch ids
    auto sigma = d.sigma;
    std::sort(sigma.begin(), sigma.end());
    for (int b = 0; b < nb; ++b) CHECK(sigma[b] == b);
    // no request pruned twice
    auto pruned = d.pruned;
    CHECK(std::adjacent_find(pruned.begin(), pruned.end()) == pruned.end());
    CHECK(static_cast<long>(pruned.size()) <= total_requests);
  }
}

TEST_CASE("pruning loop terminates when nobody loads the bottleneck") {
  // infeasible purely due to compute: pruning cannot help, loop must exit
  std::vector<InterBatch> batches;
  batches.push_back(make_batch(0, 0.0, 50.0, {{1.0, {0, 0}}, {1.0, {0, 0}}}, 0));
  ScheduleDecision d = inter_scheduling(batches, {1, 1}, 10, 0.0);
  CHECK(d.pruned.empty());
}
