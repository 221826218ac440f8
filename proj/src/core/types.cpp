#include "core/types.hpp"

namespace mfsim {

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::Reuse: return "reuse";
    case Stage::Collective: return "collective";
    case Stage::P2D: return "p2d";
  }
  return "?";
}

const char* band_name(Band b) {
  switch (b) {
    case Band::UrgentP2D: return "urgent_p2d";
    case Band::Early: return "early";
    case Band::DeferredP2D: return "deferred_p2d";
    case Band::Scavenger: return "scavenger";
  }
  return "?";
}

namespace {
template <typename T>
int cmp3(const T& a, const T& b) {
  if (a < b) return -1;
  if (b < a) return 1;
  return 0;
}
}  // namespace

int priority_compare(const PriorityKey& a, const PriorityKey& b) {
  if (int c = cmp3(static_cast<int>(a.band), static_cast<int>(b.band))) return c;
  if (int c = cmp3(a.level, b.level)) return c;
  if (int c = cmp3(a.rank, b.rank)) return c;
  if (int c = cmp3(a.release, b.release)) return c;
  return cmp3(a.flow, b.flow);
}

bool outranks_level(const PriorityKey& a, const PriorityKey& b) {
  if (a.band != b.band) return static_cast<int>(a.band) < static_cast<int>(b.band);
  return a.level < b.level;
}

std::optional<double> flow_laxity(const Flow& f, SimTime now, double reference_rate) {
  if (!f.explicit_deadline) return std::nullopt;
  MFSIM_CHECK(reference_rate > 0.0, "flow_laxity: reference rate must be positive");
  return *f.explicit_deadline - now - f.remaining / reference_rate;
}

}  // namespace mfsim
