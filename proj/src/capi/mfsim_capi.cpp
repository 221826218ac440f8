#include "mfsim.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "core/sim_api.hpp"
#include "core/types.hpp"

using namespace mfsim;

struct mfsim_config {
  Config cfg;
  mutable std::string scratch;  // backs mfsim_config_get
};

namespace {

thread_local std::string g_last_error;

int set_error(int code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return MFSIM_OK;
  } catch (const ConfigError& e) {
    return set_error(MFSIM_ERR_CONFIG, e.what());
  } catch (const WorkloadError& e) {
    return set_error(MFSIM_ERR_WORKLOAD, e.what());
  } catch (const IoError& e) {
    return set_error(MFSIM_ERR_IO, e.what());
  } catch (const SimError& e) {
    return set_error(MFSIM_ERR_SIM, e.what());
  } catch (const std::exception& e) {
    return set_error(MFSIM_ERR_INTERNAL, e.what());
  }
}

}  // namespace

extern "C" {

const char* mfsim_version(void) { return "0.1.0"; }

const char* mfsim_last_error(void) { return g_last_error.c_str(); }

mfsim_config* mfsim_config_create(void) { return new mfsim_config(); }

mfsim_config* mfsim_config_load(const char* path) {
  if (!path) {
    set_error(MFSIM_ERR_INVALID_ARG, "mfsim_config_load: path is NULL");
    return nullptr;
  }
  mfsim_config* h = new mfsim_config();
  int rc = guarded([&] { h->cfg = Config::from_file(path); });
  if (rc != MFSIM_OK) {
    delete h;
    return nullptr;
  }
  return h;
}

int mfsim_config_set(mfsim_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value)
    return set_error(MFSIM_ERR_INVALID_ARG, "mfsim_config_set: NULL argument");
  cfg->cfg.set(key, value);
  return MFSIM_OK;
}

const char* mfsim_config_get(const mfsim_config* cfg, const char* key) {
  if (!cfg || !key) return nullptr;
  auto v = cfg->cfg.raw(key);
  if (!v) return nullptr;
  cfg->scratch = *v;
  return cfg->scratch.c_str();
}

void mfsim_config_destroy(mfsim_config* cfg) { delete cfg; }

int mfsim_run(const mfsim_config* cfg, const char* out_dir, char** summary_json_out) {
  if (!cfg) return set_error(MFSIM_ERR_INVALID_ARG, "mfsim_run: config is NULL");
  return guarded([&] {
    RunOutput out = run_simulation(cfg->cfg);
    if (out_dir && *out_dir) write_outputs(out, out_dir);
    if (summary_json_out) {
      char* buf = static_cast<char*>(std::malloc(out.summary.size() + 1));
      if (!buf) throw std::bad_alloc();
      std::memcpy(buf, out.summary.c_str(), out.summary.size() + 1);
      *summary_json_out = buf;
    }
  });
}

void mfsim_string_free(char* s) { std::free(s); }

}  // extern "C"
