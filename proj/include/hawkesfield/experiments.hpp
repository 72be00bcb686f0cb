#pragma once

// Experiment configs, output provenance and the command drivers behind the
// command-line tool. One JSON config per experiment; only the seed, the output
// directory and the worker count come from outside.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "hawkesfield/model.hpp"

namespace hawkesfield {

inline constexpr const char* kVersion = "1.0.0";

enum class Scenario { S1, S2 };

struct QuantizationConfig {
  double epsilon = 0.2;
  std::optional<double> radius;  // overrides r = N^epsilon when set
  std::size_t resolution = 0;    // 0: proxy_resolution(d, N, refine)
  std::size_t refine = 8;
};

struct ChaosConfig {
  std::vector<double> x, x_tilde;
  double scale_exponent = 0.05;
  double clip = 0.0;
  bool redraw = true;  // fresh S1 positions per replication
  std::size_t limit_grid = 201;
};

struct ExperimentConfig {
  nlohmann::json raw;  // as loaded, seed override applied
  std::optional<ModelParams> model;
  Scenario scenario = Scenario::S1;
  std::vector<std::size_t> N;
  double T = 1.0;
  double dt = 1e-3;
  double tol = 1e-10;
  int max_iter = 200;
  std::size_t replications = 1;
  std::uint64_t seed = 0;
  bool quadrature_grid = false;  // false: quantizer nodes
  std::size_t quadrature_per_axis = 48;
  QuantizationConfig quantization;
  ChaosConfig chaos;
  std::string output;  // default output directory, not hashed

  const ModelParams& params() const { return *model; }
};

// Throws ConfigError with a JSON path on any schema violation.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
void set_seed(ExperimentConfig& config, std::uint64_t seed);

// FNV-1a 64 over the canonical dump of the config without "output".
std::uint64_t config_hash(const ExperimentConfig& config);
std::uint64_t fnv1a64(const std::string& bytes) noexcept;
std::string hex64(std::uint64_t v);

const std::vector<std::string>& command_names();

// Runs one command into `out`. Writes manifest.json last.
void run_command(const ExperimentConfig& config, const std::string& command,
                 const std::filesystem::path& out, unsigned jobs);

struct VerifyResult {
  bool ok = true;
  std::vector<std::string> problems;
};

// Re-hashes every file in the manifest, checks the config hash each one
// carries, and compares against `config` when given.
VerifyResult verify_outputs(const std::filesystem::path& out, const ExperimentConfig* config);

// Least-squares slope of log y on log x with a 95% interval.
struct SlopeFit {
  double slope = 0.0;
  double lo = 0.0, hi = 0.0;
};
SlopeFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

// Number of i with |y[i+1]| > |y[i]|.
std::size_t count_inversions(const std::vector<double>& y);

}  // namespace hawkesfield
