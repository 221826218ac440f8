#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "core/baselines.hpp"
#include "support/scenarios.hpp"

using namespace mfsim;

namespace {

struct Harness {
  Topology topo;
  std::vector<Flow> flows;
  std::vector<Request> reqs;
  std::vector<FlowId> active;
  RateAllocation alloc;

  Harness() {
    topo.add_node(NodeRole::PrefillGPU, "a");
    topo.add_node(NodeRole::DecodeGPU, "b");
    topo.add_link(0, 1, 1.0);
    topo.build_routes();
  }
  FlowId add(double remaining, SimTime release, std::optional<SimTime> deadline,
             Stage stage = Stage::Reuse) {
    Flow f;
    f.id = static_cast<FlowId>(flows.size());
    f.src = 0;
    f.dst = 1;
    f.size = f.remaining = remaining;
    f.release_time = release;
    f.explicit_deadline = deadline;
    f.stage = stage;
    f.state = FlowState::Active;
    flows.push_back(f);
    active.push_back(f.id);
    return f.id;
  }
  SchedView view(SimTime now = 0.0) {
    SchedView v;
    v.now = now;
    v.topo = &topo;
    v.flows = &flows;
    v.active = &active;
    v.requests = &reqs;
    v.alloc = &alloc;
    return v;
  }
};

}  // namespace

TEST_CASE("fair share: one class regardless of sizes and deadlines") {
  Harness h;
  h.add(2, 0, std::nullopt);
  h.add(4, 0, 12.0, Stage::P2D);
  h.add(3, 0, 7.0, Stage::P2D);
  FairShareScheduler fs;
  auto d = fs.decide(h.view());
  REQUIRE(d.classes.size() == 1);
  CHECK(d.classes[0].size() == 3);

  Harness empty;
  CHECK(fs.decide(empty.view()).classes.empty());
}

TEST_CASE("sjf: ascending remaining, release breaks ties, equal keys share") {
  Harness h;
  FlowId big = h.add(2, 0, std::nullopt);
  FlowId small = h.add(1, 0, std::nullopt);
  SjfScheduler sjf;
  auto d = sjf.decide(h.view());
  REQUIRE(d.classes.size() == 2);
  CHECK(d.classes[0] == std::vector<FlowId>{small});
  CHECK(d.classes[1] == std::vector<FlowId>{big});

  Harness ties;
  FlowId early = ties.add(1, 0, std::nullopt);
  FlowId late = ties.add(1, 1, std::nullopt);
  FlowId twin = ties.add(1, 1, std::nullopt);
  d = sjf.decide(ties.view());
  REQUIRE(d.classes.size() == 2);
  CHECK(d.classes[0] == std::vector<FlowId>{early});
  CHECK(d.classes[1] == std::vector<FlowId>{late, twin});  // equal keys share
}

TEST_CASE("edf: explicit deadlines classed above a fair implicit pool") {
  Harness h;
  FlowId implicit1 = h.add(5, 0, std::nullopt);
  FlowId tight = h.add(5, 0, 3.0, Stage::P2D);
  FlowId loose = h.add(5, 0, 9.0, Stage::P2D);
  FlowId implicit2 = h.add(1, 0, std::nullopt);
  EdfScheduler edf;
  auto d = edf.decide(h.view());
  REQUIRE(d.classes.size() == 3);
  CHECK(d.classes[0] == std::vector<FlowId>{tight});
  CHECK(d.classes[1] == std::vector<FlowId>{loose});
  CHECK(d.classes[2] == std::vector<FlowId>{implicit1, implicit2});

  // implicit-only degenerates to fair sharing
  Harness imp;
  imp.add(1, 0, std::nullopt);
  imp.add(2, 0, std::nullopt);
  d = edf.decide(imp.view());
  REQUIRE(d.classes.size() == 1);
  CHECK(d.classes[0].size() == 2);
}

TEST_CASE("karuna: just-in-time caps, SJF underneath") {
  Harness h;
  FlowId dl = h.add(4, 0, 8.0, Stage::P2D);
  FlowId s1 = h.add(1, 0, std::nullopt);
  FlowId s2 = h.add(2, 0, std::nullopt);
  KarunaScheduler karuna;
  auto d = karuna.decide(h.view());
  REQUIRE(d.classes.size() == 3);
  CHECK(d.classes[0] == std::vector<FlowId>{dl});
  CHECK(d.classes[1] == std::vector<FlowId>{s1});
  CHECK(d.classes[2] == std::vector<FlowId>{s2});
  REQUIRE(d.has_caps);
  CHECK(d.caps.at(dl) == doctest::Approx(0.5));  // remaining 4 over slack 8

  // allocator view: implicit flow 1 rides the residual 0.5 and finishes first
  auto alloc = allocate_rates(h.flows, h.topo, d.classes, &d.caps, 0.0);
  CHECK(alloc.rate(dl) == doctest::Approx(0.5));
  CHECK(alloc.rate(s1) == doctest::Approx(0.5));
  CHECK(alloc.rate(s2) == doctest::Approx(0.0));
}

TEST_CASE("karuna: oversubscribed reservations scale proportionally") {
  Harness h;
  FlowId a = h.add(6, 0, 6.0, Stage::P2D);   // wants 1.0
  FlowId b = h.add(2, 0, 4.0, Stage::P2D);   // wants 0.5
  KarunaScheduler karuna;
  auto d = karuna.decide(h.view());
  REQUIRE(d.has_caps);
  CHECK(d.caps.at(a) == doctest::Approx(6.0 / 6.0 * (1.0 / 1.5)));
  CHECK(d.caps.at(b) == doctest::Approx(0.5 * (1.0 / 1.5)));
}

TEST_CASE("karuna: overdue flows run uncapped in the reserved class") {
  Harness h;
  FlowId late = h.add(4, 0, -1.0, Stage::P2D);
  KarunaScheduler karuna;
  auto d = karuna.decide(h.view(0.0));
  CHECK(d.caps.find(late) == d.caps.end());
  auto alloc = allocate_rates(h.flows, h.topo, d.classes, &d.caps, 0.0);
  CHECK(alloc.rate(late) == doctest::Approx(1.0));
}

TEST_CASE("karuna just-in-time property: capped flow finishes at its deadline") {
  Topology topo;
  topo.add_node(NodeRole::PrefillGPU, "a");
  topo.add_node(NodeRole::DecodeGPU, "b");
  topo.add_link(0, 1, 1.0);
  topo.build_routes();
  KarunaScheduler karuna;
  Engine eng(topo, karuna, EngineParams{});
  Request r;
  r.arrival = 0.0;
  r.deadline = 8.0;
  RequestId rid = eng.add_request(r);
  BatchId b = eng.add_manual_batch({rid}, {}, 0.0);
  FlowId f = eng.add_manual_flow(b, rid, Stage::P2D, 0, 1, 4.0, 1, SimTime{0.0}, 8.0);
  RunResult res = eng.run();
  CHECK(res.flow_finish[f] == doctest::Approx(8.0));
}

TEST_CASE("baselines are stage-agnostic: permuting stage tags changes nothing") {
  std::mt19937_64 rng(11);
  for (int iter = 0; iter < 40; ++iter) {
    Harness h;
    int n = 2 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
      bool has_deadline = rng() % 2 == 0;
      h.add(1.0 + static_cast<double>(rng() % 8), static_cast<double>(rng() % 3),
            has_deadline ? std::optional<SimTime>(5.0 + static_cast<double>(rng() % 10))
                         : std::nullopt,
            has_deadline ? Stage::P2D : Stage::Reuse);
    }
    Harness permuted = h;
    for (Flow& f : permuted.flows)
      if (!f.explicit_deadline)
        f.stage = (rng() % 2 == 0) ? Stage::Reuse : Stage::Collective;

    FairShareScheduler fs;
    SjfScheduler sjf;
    EdfScheduler edf;
    KarunaScheduler karuna;
    for (Scheduler* s : {static_cast<Scheduler*>(&fs), static_cast<Scheduler*>(&sjf),
                         static_cast<Scheduler*>(&edf), static_cast<Scheduler*>(&karuna)}) {
      auto d1 = s->decide(h.view());
      auto d2 = s->decide(permuted.view());
      CHECK(d1.classes == d2.classes);
    }
  }
}

TEST_CASE("deadline trio under karuna: conservative reservations hold to request deadlines") {
  auto r = scenarios::run_deadline_trio(PolicyKind::Karuna);
  // C is served at its minimal rate and lands exactly on its deadline
  CHECK(r.finish[2] == doctest::Approx(7.0));
  CHECK(r.met[2]);
}
