#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "hawkesfield/errors.hpp"
#include "hawkesfield/experiments.hpp"

using namespace hawkesfield;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json base() {
  return json::parse(R"({
    "model": {
      "firing_rate": {"variant": "constant", "c": 2.0},
      "weight": {"variant": "constant", "kappa": 0.0},
      "initial": {"variant": "constant", "u": 0.0},
      "alpha": 1.0,
      "rho": {"variant": "uniform_box", "d": 1, "r": 1.0}
    },
    "N": [1],
    "T": 1.0,
    "dt": 0.01,
    "replications": 40,
    "seed": 5
  })");
}

std::string error_path(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<none>";
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hf_unit_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config schema errors carry JSON paths") {
  CHECK(error_path(base()) == "<none>");
  json j = base();
  j["bogus"] = 1;
  CHECK(error_path(j) == "/bogus");
  j = base();
  j["N"] = {4, 2};
  CHECK(error_path(j) == "/N/1");
  j["N"] = json::array();
  CHECK(error_path(j) == "/N");
  j = base();
  j["replications"] = 0;
  CHECK(error_path(j) == "/replications");
  j = base();
  j["T"] = -1.0;
  CHECK(error_path(j) == "/T");
  j = base();
  j["dt"] = 0.3;
  CHECK(error_path(j) == "/dt");
  j = base();
  j["scenario"] = "S3";
  CHECK(error_path(j) == "/scenario");
  j = base();
  j["model"].erase("rho");
  CHECK(error_path(j) == "/model/rho");
  j = base();
  j["chaos"] = {{"positions", "sometimes"}};
  CHECK(error_path(j) == "/chaos/positions");
  j = base();
  j["quantization"] = {{"epsilon", 0.2}, {"radius", 0}};
  CHECK(error_path(j) == "/quantization/radius");
  j = base();
  j["quadrature"] = {{"mode", "simpson"}};
  CHECK(error_path(j) == "/quadrature/mode");
}

TEST_CASE("solve-limit agrees across quadrature modes") {
  json j = base();
  j["model"]["firing_rate"] = {{"variant", "sigmoid"}, {"f_max", 2.0}, {"gain", 1.5}};
  j["model"]["weight"] = {{"variant", "gaussian"}, {"amplitude", 1.0}, {"width", 0.5}};
  j["quadrature"] = {{"per_axis", 40}};
  const fs::path a = scratch("solve_q"), b = scratch("solve_g");
  run_command(parse_config(j), "solve-limit", a, 1);
  j["quadrature"]["mode"] = "grid";
  run_command(parse_config(j), "solve-limit", b, 1);
  std::ifstream fa(a / "limit_field.json"), fb(b / "limit_field.json");
  const json ra = json::parse(fa), rb = json::parse(fb);
  // greedy cubes shrink as fewer points remain, so the nodes are not the
  // grid centres; both are first-order quadratures of the same field
  CHECK(ra["lambda_sup"].get<double>() == doctest::Approx(rb["lambda_sup"].get<double>()).epsilon(0.02));
  CHECK(ra["nodes"] == 40);
  CHECK(ra["neural_field_sup_gap"].get<double>() < 1e-3);
}

TEST_CASE("FNV-1a reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("config hash ignores the output directory and key order but not the seed") {
  const auto a = parse_config(base());
  json j = base();
  j["output"] = "elsewhere";
  CHECK(config_hash(parse_config(j)) == config_hash(a));

  const auto b = parse_config(json::parse(base().dump()));  // reordered on parse anyway
  CHECK(config_hash(b) == config_hash(a));

  auto c = parse_config(base());
  set_seed(c, 6);
  CHECK(config_hash(c) != config_hash(a));
  set_seed(c, 5);
  CHECK(config_hash(c) == config_hash(a));

  j = base();
  j["T"] = 2.0;
  CHECK(config_hash(parse_config(j)) != config_hash(a));
}

TEST_CASE("log-log fit: exact power law and the t interval") {
  const std::vector<double> x = {10, 20, 40, 80};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, -0.5));
  const auto f = loglog_fit(x, y);
  CHECK(f.slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(f.hi - f.lo < 1e-10);

  // residuals +e, -e, -e, +e on equally spaced log x: slope unchanged, se known
  const double e = 0.1;
  const double sgn[] = {1, -1, -1, 1};
  for (std::size_t i = 0; i < 4; ++i) y[i] = 3.0 * std::pow(x[i], -0.5) * std::exp(e * sgn[i]);
  const auto g = loglog_fit(x, y);
  CHECK(g.slope == doctest::Approx(-0.5).epsilon(1e-12));
  const double l = std::log(2.0);
  const double sxx = l * l * (2.25 + 0.25 + 0.25 + 2.25);
  const double se = std::sqrt(4 * e * e / 2.0 / sxx);
  CHECK(g.hi - g.slope == doctest::Approx(4.302652729749464 * se).epsilon(1e-9));
}

TEST_CASE("inversions count increases in magnitude") {
  CHECK(count_inversions({-4, -2, -1, -0.5}) == 0);
  CHECK(count_inversions({4, 2, 3, 1}) == 1);
  CHECK(count_inversions({1, 2, 3}) == 2);
}

TEST_CASE("quantize command: certificate value, provenance and verification") {
  json j = base();
  j["scenario"] = "S2";
  j["N"] = {100};
  j["quantization"] = {{"epsilon", 0.2}, {"radius", 1.0}};
  const auto c = parse_config(j);
  const fs::path out = scratch("quantize");
  run_command(c, "quantize", out, 1);

  std::ifstream f(out / "certificate_N100.json");
  const json cert = json::parse(f);
  CHECK(cert["certified_bound"].get<double>() == doctest::Approx(0.6580).epsilon(1e-4));
  CHECK(cert["certificate"] == "PASS");
  CHECK(cert["provenance"]["config_hash"] == hex64(config_hash(c)));

  const std::string csv = slurp(out / "positions_N100.csv");
  CHECK(csv.rfind("# config_hash=" + hex64(config_hash(c)) + " seed=5 ", 0) == 0);

  CHECK(verify_outputs(out, &c).ok);
  CHECK(verify_outputs(out, nullptr).ok);

  auto other = c;
  set_seed(other, 77);
  CHECK_FALSE(verify_outputs(out, &other).ok);

  {
    std::ofstream g(out / "positions_N100.csv", std::ios::app);
    g << "tampered\n";
  }
  const auto r = verify_outputs(out, &c);
  CHECK_FALSE(r.ok);
  REQUIRE(r.problems.size() == 1);
  CHECK(r.problems[0].find("positions_N100.csv") != std::string::npos);

  CHECK_FALSE(verify_outputs(scratch("empty"), nullptr).ok);
}

TEST_CASE("simulate command: minimal config passes the bound check, Poisson rate matches") {
  const auto c = parse_config(base());
  const fs::path out = scratch("simulate");
  run_command(c, "simulate", out, 2);
  std::ifstream f(out / "simulate_summary.json");
  const json s = json::parse(f);
  CHECK(s["bound_check"] == "PASS");
  const auto& run = s["runs"][0];
  CHECK(std::abs(run["rate_per_neuron"].get<double>() - 2.0) <= 3 * run["rate_se"].get<double>());
  CHECK(verify_outputs(out, &c).ok);
}

TEST_CASE("explosive config surfaces a numerical error") {
  json j = base();
  j["model"]["firing_rate"] = {{"variant", "rectified_linear"}, {"slope", 1.0}, {"offset", 1.0}};
  j["model"]["weight"] = {{"variant", "constant"}, {"kappa", 400.0}};
  j["model"]["alpha"] = 0.1;
  j["N"] = {3};
  j["T"] = 5.0;
  j["replications"] = 1;
  CHECK_THROWS_AS(run_command(parse_config(j), "simulate", scratch("explode"), 1), ExplosionError);
}

TEST_CASE("results do not depend on the worker count") {
  json j = base();
  j["model"]["weight"] = {{"variant", "gaussian"}, {"amplitude", 1.0}, {"width", 0.5}};
  j["model"]["firing_rate"] = {{"variant", "sigmoid"}, {"f_max", 2.0}, {"gain", 1.5}};
  j["N"] = {5, 10, 20, 40};
  j["replications"] = 20;
  j["quadrature"] = {{"per_axis", 16}};
  const auto c = parse_config(j);
  const fs::path a = scratch("jobs1"), b = scratch("jobs3");
  run_command(c, "converge-study", a, 1);
  run_command(c, "converge-study", b, 3);
  for (const char* name : {"rate_table.csv", "diagnostics.csv", "study.json"})
    CHECK(slurp(a / name) == slurp(b / name));
}
