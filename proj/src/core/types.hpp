#ifndef MFSIM_CORE_TYPES_HPP
#define MFSIM_CORE_TYPES_HPP

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfsim {

// Simulated seconds. All sizes are bytes, all capacities bytes/second;
// toy scenarios use unit capacities so integer timelines hold exactly.
using SimTime = double;

constexpr SimTime kNoTime = -1.0;
constexpr double kInf = std::numeric_limits<double>::infinity();

using FlowId = int;
using RequestId = int;
using BatchId = int;
using CoflowId = int;
using NodeId = int;
using LinkId = int;

// ---------------------------------------------------------------------------
// Errors

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct WorkloadError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Internal consistency violation (dependency ordering, conservation, ...).
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

#define MFSIM_CHECK(cond, msg)                          \
  do {                                                  \
    if (!(cond)) throw ::mfsim::InternalError((msg));   \
  } while (0)

// ---------------------------------------------------------------------------
// Flows

enum class Stage : uint8_t { Reuse, Collective, P2D };

const char* stage_name(Stage s);

// Pruned flows keep transferring, but only with scavenger leftovers.
enum class FlowState : uint8_t { Pending, Active, Done, Pruned };

// Priority bands, most urgent first. The top band is reserved for
// last-stage flows whose deadline is at risk; early-stage flows outrank
// deferred last-stage flows; scavenger traffic gets leftovers only.
enum class Band : uint8_t { UrgentP2D = 0, Early = 1, DeferredP2D = 2, Scavenger = 3 };

const char* band_name(Band b);

struct PriorityKey {
  Band band = Band::Early;
  int level = 1;          // 1..K, smaller is more urgent
  int rank = 0;           // inter-request rank (position in sigma)
  SimTime release = 0.0;  // tiebreak
  FlowId flow = -1;       // final tiebreak

  bool operator==(const PriorityKey&) const = default;
};

// Total order over priority keys: band, then level, then the
// (rank, release, flow id) tiebreak triple. Negative = a more urgent.
int priority_compare(const PriorityKey& a, const PriorityKey& b);

// Strict "higher priority" at queue granularity (band + level only);
// used for the interference term rho, where same-level peers don't count.
bool outranks_level(const PriorityKey& a, const PriorityKey& b);

struct Flow {
  FlowId id = -1;
  RequestId request = -1;  // -1 for batch-owned collective members
  BatchId batch = -1;
  CoflowId coflow = -1;  // collective members share one, -1 otherwise
  Stage stage = Stage::Reuse;
  NodeId src = -1;
  NodeId dst = -1;
  double size = 0.0;       // bytes
  double remaining = 0.0;  // bytes left to transfer
  SimTime release_time = kNoTime;
  std::optional<SimTime> explicit_deadline;  // set iff stage == P2D
  int target_layer = 1;                      // layer consuming this data
  PriorityKey priority;
  FlowState state = FlowState::Pending;

  bool transferable() const {
    return state == FlowState::Active || state == FlowState::Pruned;
  }
  bool done() const { return state == FlowState::Done; }
};

// Remaining slack before a deadline violation, at the given reference rate
// (the capacity of the flow's bottleneck link in the single-flow view).
// Absent for implicit-deadline flows: their laxity is unknown by design.
std::optional<double> flow_laxity(const Flow& f, SimTime now, double reference_rate);

// ---------------------------------------------------------------------------
// Requests and batches

struct Request {
  RequestId id = -1;
  SimTime arrival = 0.0;
  long prompt_tokens = 0;
  double reuse_fraction = 0.0;  // in [0,1]
  int layer_count = 0;
  std::vector<double> compute_costs;  // per-layer durations, seconds
  SimTime deadline = kInf;            // absolute TTFT deadline
  int prefill_unit = 0;
  int reuse_source = -1;  // node-group id, -1 when absent

  // filled in during a run
  std::optional<SimTime> ttft;  // absolute completion time
  BatchId batch = -1;
  bool pruned = false;
};

struct Batch {
  BatchId id = -1;
  std::vector<RequestId> request_ids;  // non-empty, same prefill unit
  SimTime admit_time = 0.0;
  std::optional<double> red;  // cached RED score
  std::optional<int> rank;    // position in sigma
};

// Per-layer bundle of the three dependent stages of one request.
struct MsFlowLayer {
  int layer_index = 1;
  std::vector<FlowId> reuse_flows;
  CoflowId collective = -1;  // -1 when the layer has no collective
  std::vector<FlowId> p2d_flows;
};

}  // namespace mfsim

#endif
