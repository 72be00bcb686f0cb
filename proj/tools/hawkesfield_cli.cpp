// Command-line front end. Talks to the library through the C interface only.

#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "hawkesfield/hawkesfield.h"

namespace {

struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  unsigned jobs = 1;
};

int exit_code(hf_status s) {
  switch (s) {
    case HF_OK: return 0;
    case HF_CONFIG_ERROR: return 2;
    case HF_NUMERICAL_ERROR: return 3;
    default: return 1;
  }
}

int report(hf_status s, const char* what) {
  if (s != HF_OK) std::fprintf(stderr, "%s: %s\n", what, hf_last_error());
  return exit_code(s);
}

// Loads the config and applies --seed. Returns nonzero exit code on failure.
int load(const Flags& f, bool seed_given, hf_config** cfg) {
  hf_status s = hf_config_load(f.config.c_str(), cfg);
  if (s != HF_OK) return report(s, "config");
  if (seed_given) hf_config_set_seed(*cfg, f.seed);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial Hawkes networks and their mean-field limit"};
  app.set_version_flag("--version", std::string(hf_version()));
  app.require_subcommand(1);

  Flags f;
  const char* commands[] = {"simulate", "solve-limit", "quantize", "converge-study", "chaos-study"};
  const char* blurbs[] = {"simulate the network and check moment bounds",
                          "solve the limit intensity and potential",
                          "build quantized positions and their certificates",
                          "run the coupling and rate study over the N ladder",
                          "estimate chaos covariances over the N ladder"};
  std::vector<CLI::App*> subs;
  for (int k = 0; k < 5; ++k) {
    auto* sub = app.add_subcommand(commands[k], blurbs[k]);
    sub->add_option("--config", f.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", f.seed, "master seed, overrides the config");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber);
    subs.push_back(sub);
  }
  auto* verify = app.add_subcommand("verify", "re-check output hashes");
  verify->add_option("--out", f.out, "output directory to check")->required();
  verify->add_option("--config", f.config, "also match this config")->check(CLI::ExistingFile);
  verify->add_option("--seed", f.seed, "seed override for --config");
  verify->add_option("--jobs", f.jobs, "ignored");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  hf_config* cfg = nullptr;
  if (verify->parsed()) {
    if (!f.config.empty()) {
      if (int rc = load(f, verify->count("--seed") > 0, &cfg)) return rc;
    }
    const hf_status s = hf_verify(f.out.c_str(), cfg);
    hf_config_free(cfg);
    if (s == HF_OK) std::printf("verify: OK\n");
    return report(s, "verify");
  }

  for (int k = 0; k < 5; ++k) {
    if (!subs[k]->parsed()) continue;
    if (int rc = load(f, subs[k]->count("--seed") > 0, &cfg)) return rc;
    std::string out = f.out;
    if (out.empty()) out = hf_config_output(cfg);
    if (out.empty()) out = "out";
    const hf_status s = hf_run(cfg, commands[k], out.c_str(), f.jobs);
    hf_config_free(cfg);
    if (s == HF_OK) std::printf("%s: wrote %s\n", commands[k], out.c_str());
    return report(s, commands[k]);
  }
  return 1;
}
