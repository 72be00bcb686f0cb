#include "hawkesfield/hawkesfield.h"

#include <string>

#include "hawkesfield/errors.hpp"
#include "hawkesfield/experiments.hpp"
#include "hawkesfield/quantize.hpp"

struct hf_config {
  hawkesfield::ExperimentConfig cfg;
};

namespace {

thread_local std::string last_error;

hf_status ok() {
  last_error.clear();
  return HF_OK;
}

hf_status fail(hf_status s, std::string msg) {
  last_error = std::move(msg);
  return s;
}

template <class Fn>
hf_status guarded(Fn&& fn) {
  try {
    fn();
    return ok();
  } catch (const hawkesfield::ConfigError& e) {
    return fail(HF_CONFIG_ERROR, e.what());
  } catch (const hawkesfield::StructuralError& e) {
    // bad shapes or variants reachable only from the config
    return fail(HF_CONFIG_ERROR, e.what());
  } catch (const hawkesfield::NumericalError& e) {
    return fail(HF_NUMERICAL_ERROR, e.what());
  } catch (const std::bad_alloc&) {
    return fail(HF_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(HF_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(HF_INTERNAL_ERROR, "unknown error");
  }
}

}  // namespace

extern "C" {

const char* hf_version(void) { return hawkesfield::kVersion; }

const char* hf_last_error(void) { return last_error.c_str(); }

hf_status hf_config_load(const char* path, hf_config** out) {
  if (!path || !out) return fail(HF_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new hf_config{hawkesfield::load_config(path)}; });
}

hf_status hf_config_parse(const char* json_text, hf_config** out) {
  if (!json_text || !out) return fail(HF_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
      throw hawkesfield::ConfigError(std::string("malformed JSON: ") + e.what());
    }
    *out = new hf_config{hawkesfield::parse_config(j)};
  });
}

void hf_config_free(hf_config* config) { delete config; }

hf_status hf_config_set_seed(hf_config* config, uint64_t seed) {
  if (!config) return fail(HF_INVALID_ARGUMENT, "null config");
  hawkesfield::set_seed(config->cfg, seed);
  return ok();
}

hf_status hf_config_seed(const hf_config* config, uint64_t* seed) {
  if (!config || !seed) return fail(HF_INVALID_ARGUMENT, "null argument");
  *seed = config->cfg.seed;
  return ok();
}

hf_status hf_config_hash(const hf_config* config, uint64_t* hash) {
  if (!config || !hash) return fail(HF_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *hash = hawkesfield::config_hash(config->cfg); });
}

const char* hf_config_output(const hf_config* config) { return config ? config->cfg.output.c_str() : ""; }

hf_status hf_run(const hf_config* config, const char* command, const char* out_dir, unsigned jobs) {
  if (!config || !command || !out_dir) return fail(HF_INVALID_ARGUMENT, "null argument");
  return guarded([&] { hawkesfield::run_command(config->cfg, command, out_dir, jobs); });
}

hf_status hf_verify(const char* out_dir, const hf_config* config) {
  if (!out_dir) return fail(HF_INVALID_ARGUMENT, "null argument");
  hawkesfield::VerifyResult r;
  const hf_status s = guarded([&] { r = hawkesfield::verify_outputs(out_dir, config ? &config->cfg : nullptr); });
  if (s != HF_OK) return s;
  if (r.ok) return ok();
  std::string msg;
  for (const auto& p : r.problems) msg += (msg.empty() ? "" : "\n") + p;
  return fail(HF_MISMATCH, msg);
}

hf_status hf_g_bound(size_t d, double r, size_t n, double* out) {
  if (!out) return fail(HF_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = hawkesfield::g_bound(d, r, n); });
}

}  // extern "C"
