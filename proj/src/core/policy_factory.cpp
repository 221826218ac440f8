#include "core/baselines.hpp"
#include "core/rmlq.hpp"
#include "core/scheduler.hpp"

namespace mfsim {

PolicyKind parse_policy(const std::string& name) {
  if (name == "fs") return PolicyKind::FairShare;
  if (name == "sjf") return PolicyKind::SJF;
  if (name == "edf") return PolicyKind::EDF;
  if (name == "karuna") return PolicyKind::Karuna;
  if (name == "mfs") return PolicyKind::MFS;
  throw ConfigError("unknown policy '" + name + "' (expected fs|sjf|edf|karuna|mfs)");
}

const char* policy_name(PolicyKind k) {
  switch (k) {
    case PolicyKind::FairShare: return "fs";
    case PolicyKind::SJF: return "sjf";
    case PolicyKind::EDF: return "edf";
    case PolicyKind::Karuna: return "karuna";
    case PolicyKind::MFS: return "mfs";
  }
  return "?";
}

std::unique_ptr<Scheduler> make_scheduler(PolicyKind kind, const Config& cfg) {
  switch (kind) {
    case PolicyKind::FairShare: return std::make_unique<FairShareScheduler>();
    case PolicyKind::SJF: return std::make_unique<SjfScheduler>();
    case PolicyKind::EDF: return std::make_unique<EdfScheduler>();
    case PolicyKind::Karuna: return std::make_unique<KarunaScheduler>();
    case PolicyKind::MFS: {
      MfsInterConfig inter;
      inter.enable_pruning = cfg.get_bool("inter.enable_pruning", true);
      inter.drop_budget_frac = cfg.get_double("inter.drop_budget_frac", 0.05);
      if (inter.drop_budget_frac < 0)
        throw ConfigError("config key 'inter.drop_budget_frac': must be >= 0");
      return std::make_unique<MfsScheduler>(RmlqConfig::from_config(cfg), inter);
    }
  }
  throw ConfigError("unknown policy kind");
}

}  // namespace mfsim
