// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
// usage: acceptance CLI_PATH CONFIG_DIR [WORK_DIR] [criterion ...]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../common/oracles.hpp"
#include "hawkesfield/experiments.hpp"
#include "hawkesfield/hawkes_sim.hpp"
#include "hawkesfield/limit_field.hpp"
#include "hawkesfield/model_json.hpp"
#include "hawkesfield/parallel.hpp"
#include "hawkesfield/quantize.hpp"
#include "hawkesfield/transport.hpp"

using namespace hawkesfield;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path g_cli, g_configs, g_work;
unsigned g_jobs = 1;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string f3(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.4g", v);
  return b;
}

ModelParams model(const char* text) { return model_from_json(json::parse(text)); }

ExperimentConfig config_file(const std::string& name) { return load_config(g_configs / name); }

json read_json(const fs::path& p) {
  std::ifstream f(p);
  return json::parse(f);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

// f, w pairs used for the moment and contraction matrices.
const char* kRates[] = {
    R"({"variant": "sigmoid", "f_max": 2, "gain": 1.5})",
    R"({"variant": "piecewise_linear", "slope": 1, "floor": 0.1, "ceiling": 3})",
    R"({"variant": "rectified_linear", "slope": 0.5, "offset": 0.5})",
    R"({"variant": "constant", "c": 1.5})",
};
const char* kWeights[] = {
    R"({"variant": "constant", "kappa": 0.8})",
    R"({"variant": "gaussian", "amplitude": 1.0, "width": 0.5})",
    R"({"variant": "mexican_hat", "a1": 1, "sigma1": 0.3, "a2": 0.5, "sigma2": 0.9})",
};
const char* kMeasures[] = {
    R"({"variant": "uniform_box", "d": 1, "r": 1.0})",
    R"({"variant": "gaussian", "d": 2, "mean": [0, 0.2], "cov_diag": [0.3, 0.5]})",
};

std::vector<ModelParams> model_matrix() {
  std::vector<ModelParams> out;
  for (const char* rho : kMeasures)
    for (const char* f : kRates)
      for (const char* w : kWeights) {
        const std::size_t d = json::parse(rho)["d"].get<std::size_t>();
        json j = {{"firing_rate", json::parse(f)},
                  {"weight", json::parse(w)},
                  {"initial", {{"variant", "gaussian_bump"}, {"height", 0.5}, {"center", std::vector<double>(d, 0.1)}, {"width", 0.4}}},
                  {"alpha", 1.0},
                  {"rho", json::parse(rho)}};
        out.push_back(model_from_json(j));
      }
  return out;
}

// ---------------------------------------------------------------------------

Outcome c1_thinning() {
  const long R = 100000;
  struct Case {
    const char* name;
    ModelParams p;
    PointSet x;
  };
  std::vector<Case> cases;
  cases.push_back({"N=3 sigmoid/mexican-hat",
                   model(R"({"firing_rate": {"variant": "sigmoid", "f_max": 2, "gain": 1.5},
                     "weight": {"variant": "mexican_hat", "a1": 3, "sigma1": 0.3, "a2": 1.5, "sigma2": 0.9},
                     "initial": {"variant": "gaussian_bump", "height": 1, "center": 0.2, "width": 0.4},
                     "alpha": 1.0, "rho": {"variant": "uniform_box", "d": 1, "r": 1.0}})"),
                   PointSet(1, std::vector<double>{-0.5, 0.0, 0.6})});
  cases.push_back({"N=2 linear/gaussian",
                   model(R"({"firing_rate": {"variant": "rectified_linear", "slope": 1, "offset": 0.8},
                     "weight": {"variant": "gaussian", "amplitude": 2.0, "width": 0.5},
                     "initial": {"variant": "constant", "u": 0.3},
                     "alpha": 1.5, "rho": {"variant": "uniform_box", "d": 1, "r": 1.0}})"),
                   PointSet(1, std::vector<double>{-0.2, 0.3})});
  bool pass = true;
  std::string detail;
  for (const auto& c : cases) {
    std::map<std::vector<int>, long> a, b;
    for (long r = 0; r < R; ++r) {
      const auto tr = simulate_network(c.p, c.x, 1.0, 11, std::uint64_t(r));
      std::vector<int> k;
      for (const auto& t : tr) k.push_back(int(t.count()));
      ++a[k];
    }
    std::mt19937_64 gen(99);
    for (long r = 0; r < R; ++r) ++b[oracle::euler_bernoulli_counts(c.p, c.x, 1.0, 1e-4, gen)];
    const double tv = oracle::tv_distance(a, R, b, R), noise = oracle::tv_noise(a, R, b, R);
    pass = pass && tv <= 3.0 * noise;
    detail += std::string(detail.empty() ? "" : "; ") + c.name + ": TV " + f3(tv) + " vs 3x noise " + f3(3 * noise);
  }
  return {pass, detail};
}

Outcome c2_closed_form() {
  const double u = 0.5, kappa = 1.0, alpha = 0.5, T = 1.0;
  const auto p = model(R"({"firing_rate": {"variant": "rectified_linear", "slope": 1},
    "weight": {"variant": "constant", "kappa": 1.0},
    "initial": {"variant": "constant", "u": 0.5},
    "alpha": 0.5, "rho": {"variant": "uniform_box", "d": 1, "r": 1.0}})");
  const auto q = grid_quadrature(p.rho, 3);
  std::vector<double> errs;
  for (double dt : {4e-3, 2e-3, 1e-3}) {
    const auto lam = solve_limit_intensity(p, q, T, dt);
    double e = 0.0;
    for (std::size_t k = 0; k <= lam.steps; ++k)
      for (std::size_t n = 0; n < lam.node_count(); ++n)
        e = std::max(e, std::abs(lam.at(k, n) - u * std::exp((kappa - alpha) * lam.time(k))));
    errs.push_back(e);
  }
  const double o1 = std::log2(errs[0] / errs[1]), o2 = std::log2(errs[1] / errs[2]);
  return {errs[2] <= 1e-5 && o1 >= 1.8 && o2 >= 1.8,
          "sup error " + f3(errs[2]) + " at dt=1e-3, orders " + f3(o1) + ", " + f3(o2)};
}

Outcome c3_linear_moment() {
  // f(u) = u + 1, w = 1, alpha = 2, u0 = 0: E Z(T) = 2T - 1 + e^{-T}
  const auto p = model(R"({"firing_rate": {"variant": "rectified_linear", "slope": 1, "offset": 1},
    "weight": {"variant": "constant", "kappa": 1.0},
    "initial": {"variant": "constant", "u": 0.0},
    "alpha": 2.0, "rho": {"variant": "uniform_box", "d": 1, "r": 1.0}})");
  const PointSet x(1, std::vector<double>{0.0});
  const double T = 2.0;
  const std::size_t R = 10000;
  std::vector<double> z(R);
  parallel_for(R, g_jobs, [&](std::size_t r) { z[r] = double(simulate_network(p, x, T, 5, r)[0].count()); });
  const MeanSe m = mean_se(z);
  const double exact = 2 * T - 1 + std::exp(-T);
  const double oracle_value = oracle::linear_hawkes_mean_count(1.0, 1.0, 2.0, T);
  return {std::abs(m.mean - exact) <= 3 * m.se && std::abs(oracle_value - exact) < 1e-9,
          "mean " + f3(m.mean) + " +- " + f3(m.se) + " vs " + f3(exact)};
}

Outcome c4_moment_bounds() {
  const auto models = model_matrix();
  const double T = 2.0;
  const std::size_t R = 2000;
  std::size_t failures = 0;
  double worst = 0.0;
  for (std::size_t m = 0; m < models.size(); ++m) {
    const auto& p = models[m];
    const std::size_t N = p.dim() == 1 ? 4 : 3;
    const PointSet x = scenario_s1_positions(p.rho, N, 17 + m);
    std::vector<double> a(R), a2(R);
    parallel_for(R, g_jobs, [&](std::size_t r) {
      double s = 0;
      for (const auto& t : simulate_network(p, x, T, 23, r)) s += double(t.count());
      a[r] = s / double(N);
      a2[r] = a[r] * a[r];
    });
    const MeanSe m1 = mean_se(a), m2 = mean_se(a2);
    const double b1 = moment_bound_first(p, x, T), b2 = moment_bound_second(p, x, T);
    if (m1.mean > b1 + 3 * m1.se || m2.mean > b2 + 3 * m2.se) ++failures;
    worst = std::max({worst, (m1.mean - 3 * m1.se) / b1, (m2.mean - 3 * m2.se) / b2});
  }
  return {failures == 0, std::to_string(models.size()) + " configs, " + std::to_string(failures) +
                             " over bound, largest (moment - 3se)/bound " + f3(worst)};
}

Outcome c5_quantization() {
  std::size_t checked = 0, failures = 0;
  double worst = 0.0;
  const SpatialMeasure measures[] = {SpatialMeasure(UniformBox{1, 1.0}),
                                     SpatialMeasure(GaussianMeasure{1, {0.0}, {0.5}}),
                                     SpatialMeasure(UniformBox{2, 1.0}),
                                     SpatialMeasure(GaussianMeasure{2, {0.0, 0.1}, {0.4, 0.6}})};
  struct Job {
    const SpatialMeasure* rho;
    std::size_t N;
  };
  std::vector<Job> jobs;
  for (const auto& rho : measures)
    for (std::size_t N = 16; N <= 1024; N *= 2) jobs.push_back({&rho, N});
  std::vector<double> ratio(jobs.size());
  std::vector<char> ok(jobs.size());
  parallel_for(jobs.size(), g_jobs, [&](std::size_t k) {
    const std::size_t d = jobs[k].rho->dim(), N = jobs[k].N;
    const double r = std::pow(double(N), 0.2);
    const auto t = truncate_measure(*jobs[k].rho, r, proxy_resolution(d, N, d == 1 ? 8 : 4));
    const auto q = quantize_measure(t, N);
    const double w2 = wasserstein_discrete(q.empirical(), t.atoms, 2);
    const double slack = t.cell_width() / 2.0;
    ok[k] = w2 <= q.certified_bound + slack;
    ratio[k] = w2 / (q.certified_bound + slack);
  });
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    ++checked;
    if (!ok[k]) ++failures;
    worst = std::max(worst, ratio[k]);
  }
  return {failures == 0, std::to_string(checked) + " (rho, N) pairs, largest W2/(g+slack) " + f3(worst)};
}

// Converge-study runs are shared by criteria 6 and 7.
json study(const std::string& cfg) {
  static std::map<std::string, json> cache;
  auto it = cache.find(cfg);
  if (it != cache.end()) return it->second;
  const fs::path out = g_work / ("study_" + cfg);
  run_command(config_file(cfg), "converge-study", out, g_jobs);
  return cache[cfg] = read_json(out / "study.json");
}

double slope_of(const json& s, const char* key) {
  const json& v = s["slopes"][key];
  return v.is_null() ? NAN : v["slope"].get<double>();
}

Outcome c6_rates() {
  bool pass = true;
  std::string detail;
  for (const char* cfg : {"field_d1.json", "field_d1_s2.json"}) {
    const json s = study(cfg);
    const double a = slope_of(s, "A_mean"), u = slope_of(s, "dkr_upper");
    pass = pass && a <= -0.4 && u <= -0.4;
    // the dictionary estimate sits below the upper bound
    for (const auto& row : s["rows"])
      pass = pass && row["dkr_lower"].get<double>() <= row["dkr_upper"].get<double>() + 3 * row["dkr_lower_se"].get<double>();
    detail += std::string(detail.empty() ? "" : "; ") + s["scenario"].get<std::string>() + ": A slope " + f3(a) +
              ", dkr_upper slope " + f3(u);
  }
  return {pass, detail};
}

Outcome c7_potentials() {
  bool pass = true;
  std::string detail;
  for (const char* cfg : {"field_d1.json", "field_d1_s2.json"}) {
    const json s = study(cfg);
    const double k = slope_of(s, "potential_gap");
    pass = pass && k <= -0.4;
    detail += s["scenario"].get<std::string>() + " slope " + f3(k) + "; ";
  }
  const auto p = model(R"({"firing_rate": {"variant": "sigmoid", "f_max": 2, "gain": 1.5},
    "weight": {"variant": "constant", "kappa": 0.0},
    "initial": {"variant": "gaussian_bump", "height": 1, "center": 0.2, "width": 0.4},
    "alpha": 1.0, "rho": {"variant": "uniform_box", "d": 1, "r": 1.0}})");
  const auto q = grid_quadrature(p.rho, 32);
  const auto lam = solve_limit_intensity(p, q, 1.0, 5e-3);
  double worst = 0.0;
  for (std::size_t N : {10, 40, 160}) {
    const PointSet x = scenario_s1_positions(p.rho, N, 3);
    const auto lim = limit_at_positions(lam, p, q, x);
    worst = std::max(worst, std::abs(compare_potentials(p, x, lim.u, 1.0, 20, 9, g_jobs).mean));
  }
  pass = pass && worst == 0.0;
  return {pass, detail + "w=0 discrepancy " + f3(worst)};
}

Outcome c8_chaos() {
  ExperimentConfig c = config_file("field_d1.json");
  c.N = {50, 100, 200, 400};
  const fs::path out = g_work / "chaos";
  run_command(c, "chaos-study", out, g_jobs);
  const json j = read_json(out / "chaos.json");
  const std::size_t inv = j["inversions"].get<std::size_t>();
  bool pass = inv <= 1 && !j["empty_window"].get<bool>();
  std::string detail = "|cov|";
  for (const auto& row : j["rows"]) detail += " " + f3(std::abs(row["covariance"].get<double>()));
  detail += ", inversions " + std::to_string(inv);

  // no interaction, fixed positions: independent neurons
  const auto p = model(R"({"firing_rate": {"variant": "sigmoid", "f_max": 2, "gain": 1.5},
    "weight": {"variant": "constant", "kappa": 0.0},
    "initial": {"variant": "gaussian_bump", "height": 1, "center": 0.2, "width": 0.4},
    "alpha": 1.0, "rho": {"variant": "uniform_box", "d": 1, "r": 1.0}})");
  const auto q = grid_quadrature(p.rho, 32);
  const auto lam = solve_limit_intensity(p, q, 1.0, 5e-3);
  ChaosOptions o;
  o.x = {-0.5};
  o.x_tilde = {0.5};
  o.clip = 3.0;
  for (std::size_t N : {50, 200}) {
    const PointSet fixed = scenario_s1_positions(p.rho, N, 41);
    const auto e = chaos_covariance(p, N, [&](std::uint64_t) { return fixed; }, lam, q, 1.0, o, 400, 8, g_jobs);
    pass = pass && std::abs(e.covariance) <= 3 * e.covariance_se;
    detail += "; w=0 N=" + std::to_string(N) + " cov " + f3(e.covariance) + " +- " + f3(e.covariance_se);
  }
  return {pass, detail};
}

Outcome c9_contraction() {
  auto models = model_matrix();
  std::size_t tested = 0, failures = 0;
  double worst = -1.0;
  for (const auto& p : models) {
    const auto q = grid_quadrature(p.rho, p.dim() == 1 ? 24 : 8);
    SolveReport rep;
    solve_limit_intensity(p, q, 1.0, 5e-3, {}, &rep);
    if (rep.contraction >= 1) continue;
    ++tested;
    for (std::size_t i = 1; i < rep.residuals.size(); ++i) {
      if (rep.residuals[i - 1] <= 1e-13) continue;
      const double excess = rep.residuals[i] / rep.residuals[i - 1] - rep.contraction;
      worst = std::max(worst, excess);
      if (excess > 0.05) ++failures;
    }
  }
  return {tested > 0 && failures == 0, std::to_string(tested) + " configs with constant < 1, largest ratio - constant " +
                                           f3(worst)};
}

int run_cli(const std::vector<std::string>& args, const fs::path& log) {
  std::string cmd = "\"" + g_cli.string() + "\"";
  for (const auto& a : args) cmd += " \"" + a + "\"";
  cmd += " > \"" + log.string() + "\" 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> m;
  for (const auto& e : fs::directory_iterator(dir)) m[e.path().filename().string()] = slurp(e.path());
  return m;
}

Outcome c10_determinism() {
  const std::pair<const char*, const char*> runs[] = {{"simulate", "poisson.json"},
                                                     {"solve-limit", "field_d1.json"},
                                                     {"quantize", "quantize_uniform.json"},
                                                     {"converge-study", "field_d1.json"},
                                                     {"chaos-study", "field_d1.json"}};
  bool pass = true;
  std::string detail;
  for (const auto& [cmd, cfg] : runs) {
    std::map<std::string, std::string> snaps[2];
    bool ok = true;
    for (int k = 0; k < 2; ++k) {
      const fs::path out = g_work / "cli" / (std::string(cmd) + "_" + std::to_string(k));
      fs::remove_all(out);
      const int rc = run_cli({cmd, "--config", (g_configs / cfg).string(), "--seed", "31", "--out", out.string(),
                              "--jobs", k == 0 ? "1" : "2"},
                             g_work / "cli" / (std::string(cmd) + ".log"));
      ok = ok && rc == 0;
      if (rc == 0) snaps[k] = snapshot(out);
      // verify is a command too: same stdout and exit code both times
      const fs::path vlog = g_work / "cli" / (std::string(cmd) + "_verify_" + std::to_string(k) + ".log");
      ok = ok && run_cli({"verify", "--out", out.string(), "--config", (g_configs / cfg).string(), "--seed", "31"}, vlog) == 0;
    }
    const fs::path v0 = g_work / "cli" / (std::string(cmd) + "_verify_0.log");
    const fs::path v1 = g_work / "cli" / (std::string(cmd) + "_verify_1.log");
    ok = ok && !snaps[0].empty() && snaps[0] == snaps[1] && slurp(v0) == slurp(v1);
    pass = pass && ok;
    detail += std::string(detail.empty() ? "" : ", ") + cmd + (ok ? " same" : " DIFFERS");
  }
  return {pass, detail + "; verify ok"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: %s CLI_PATH CONFIG_DIR [WORK_DIR] [criterion ...]\n", argv[0]);
    return 2;
  }
  g_cli = fs::absolute(argv[1]);
  g_configs = fs::absolute(argv[2]);
  g_work = fs::absolute(argc > 3 ? argv[3] : "acceptance_work");
  fs::create_directories(g_work / "cli");
  if (const char* j = std::getenv("HF_JOBS")) g_jobs = unsigned(std::max(1, std::atoi(j)));

  std::set<int> only;
  for (int i = 4; i < argc; ++i) only.insert(std::atoi(argv[i]));

  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"thinning matches Euler-Bernoulli oracle", c1_thinning},
      {"closed-form fixed point", c2_closed_form},
      {"linear Hawkes mean count", c3_linear_moment},
      {"moment bounds over config matrix", c4_moment_bounds},
      {"quantization certificate", c5_quantization},
      {"mean-field rate slopes", c6_rates},
      {"potential discrepancy", c7_potentials},
      {"chaos covariance decay", c8_chaos},
      {"Picard contraction", c9_contraction},
      {"CLI determinism", c10_determinism},
  };
  int failed = 0;
  for (int k = 0; k < 10; ++k) {
    if (!only.empty() && !only.count(k + 1)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d: %s  %s (%s) [%.1f s]\n", k + 1, o.pass ? "PASS" : "FAIL", criteria[k].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
