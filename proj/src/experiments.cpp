#include "hawkesfield/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "hawkesfield/errors.hpp"
#include "hawkesfield/hawkes_sim.hpp"
#include "hawkesfield/limit_field.hpp"
#include "hawkesfield/model_json.hpp"
#include "hawkesfield/parallel.hpp"
#include "hawkesfield/quantize.hpp"
#include "hawkesfield/transport.hpp"

namespace hawkesfield {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// schema helpers

void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& path) {
  if (!j.is_object()) throw ConfigError("expected an object", path.empty() ? "/" : path);
  for (const auto& [k, v] : j.items()) {
    (void)v;
    if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
      throw ConfigError("unknown key", path + "/" + k);
  }
}

double positive(const json& j, const char* key, double fallback, const std::string& path) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number() || !(v.get<double>() > 0) || !std::isfinite(v.get<double>()))
    throw ConfigError("expected a positive number", path + "/" + key);
  return v.get<double>();
}

std::size_t positive_int(const json& j, const char* key, std::size_t fallback, const std::string& path) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 1)
    throw ConfigError("expected a positive integer", path + "/" + key);
  return v.get<std::size_t>();
}

std::vector<double> point_of(const json& v, std::size_t dim, const std::string& path) {
  if (v.is_number() && dim == 1) return {v.get<double>()};
  if (!v.is_array() || v.size() != dim) throw ConfigError("expected a point of the model dimension", path);
  std::vector<double> out;
  for (std::size_t k = 0; k < dim; ++k) {
    if (!v[k].is_number()) throw ConfigError("expected a number", path + "/" + std::to_string(k));
    out.push_back(v[k].get<double>());
  }
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json canonical(const ExperimentConfig& c) {
  json j = c.raw;
  j.erase("output");
  j["seed"] = c.seed;
  return j;
}

// ---------------------------------------------------------------------------
// output sink: every file carries the provenance, the manifest lists hashes

class Outputs {
 public:
  Outputs(fs::path dir, const ExperimentConfig& config, std::string command)
      : dir_(std::move(dir)), command_(std::move(command)) {
    fs::create_directories(dir_);
    provenance_ = {{"config_hash", hex64(config_hash(config))},
                   {"seed", config.seed},
                   {"version", kVersion},
                   {"command", command_}};
  }

  std::string csv_header() const {
    return "# config_hash=" + provenance_["config_hash"].get<std::string>() +
           " seed=" + std::to_string(provenance_["seed"].get<std::uint64_t>()) +
           " version=" + kVersion + " command=" + command_ + "\n";
  }

  void csv(const std::string& name, const std::string& columns, const std::string& body) {
    put(name, csv_header() + columns + "\n" + body);
  }

  void json_file(const std::string& name, json j) {
    j["provenance"] = provenance_;
    put(name, j.dump(2) + "\n");
  }

  void finish() {
    json files = json::array();
    for (const auto& [name, h] : hashes_)
      files.push_back({{"name", name}, {"fnv1a64", hex64(h.first)}, {"bytes", h.second}});
    json m = {{"provenance", provenance_}, {"files", files}};
    write(command_ + ".manifest.json", m.dump(2) + "\n");
  }

 private:
  void put(const std::string& name, const std::string& bytes) {
    write(name, bytes);
    hashes_[name] = {fnv1a64(bytes), bytes.size()};
  }

  void write(const std::string& name, const std::string& bytes) {
    std::ofstream f(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
    f.write(bytes.data(), std::streamsize(bytes.size()));
    if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
  }

  fs::path dir_;
  std::string command_;
  json provenance_;
  std::map<std::string, std::pair<std::uint64_t, std::size_t>> hashes_;
};

// ---------------------------------------------------------------------------
// shared pipeline pieces

// Quantize mode: per_axis^d equal-weight nodes from the quantizer on the
// effective support. Dirac mixtures always use their own atoms.
SpatialQuadrature quadrature_of(const ExperimentConfig& c) {
  const auto& rho = c.params().rho;
  if (c.quadrature_grid || std::holds_alternative<DiracMixture>(rho.variant()))
    return grid_quadrature(rho, c.quadrature_per_axis);
  const std::size_t d = rho.dim();
  std::size_t n = 1;
  for (std::size_t k = 0; k < d; ++k) n *= c.quadrature_per_axis;
  const auto q = quantize_measure(truncate_measure(rho, rho.effective_radius(), proxy_resolution(d, n, 8)), n);
  SpatialQuadrature out;
  out.nodes = q.points;
  out.weights.assign(n, 1.0 / double(n));
  return out;
}

IntensityField solve(const ExperimentConfig& c, const SpatialQuadrature& quad, SolveReport* report) {
  SolveOptions o;
  o.tol = c.tol;
  o.max_iter = c.max_iter;
  return solve_limit_intensity(c.params(), quad, c.T, c.dt, o, report);
}

struct Quantized {
  TruncatedMeasure proxy;
  QuantizedMeasure q;
};

Quantized quantize_for(const ExperimentConfig& c, std::size_t N) {
  const std::size_t d = c.params().dim();
  const double eps = c.quantization.epsilon;
  if (!(eps > 0) || !(eps < 1.0 / double(d + 2)))
    throw ConfigError("epsilon must lie in (0, 1/(d+2))", "/quantization/epsilon");
  const double r = c.quantization.radius ? *c.quantization.radius : std::pow(double(N), eps);
  const std::size_t res = c.quantization.resolution ? c.quantization.resolution
                                                    : proxy_resolution(d, N, c.quantization.refine);
  auto t = truncate_measure(c.params().rho, r, res);
  auto q = quantize_measure(t, N);
  return {std::move(t), std::move(q)};
}

PointSet positions_for(const ExperimentConfig& c, std::size_t N) {
  if (c.scenario == Scenario::S1) return scenario_s1_positions(c.params().rho, N, c.seed, 0);
  return quantize_for(c, N).q.points;
}

// Discrete stand-in for rho used on the W term.
TruncatedMeasure rho_proxy(const ExperimentConfig& c, std::size_t N) {
  const std::size_t d = c.params().dim();
  double r = c.params().rho.effective_radius();
  if (c.scenario == Scenario::S2) {
    const double rq = c.quantization.radius ? *c.quantization.radius
                                            : std::pow(double(N), c.quantization.epsilon);
    r = std::max(r, rq);
  }
  return truncate_measure(c.params().rho, r, proxy_resolution(d, N, c.quantization.refine));
}

std::string point_columns(std::size_t d) {
  std::string s;
  for (std::size_t k = 0; k < d; ++k) s += ",x" + std::to_string(k);
  return s;
}

std::string point_cells(std::span<const double> p) {
  std::string s;
  for (double v : p) s += "," + fmt(v);
  return s;
}

json slope_json(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 4) return nullptr;
  for (double v : y)
    if (!(v > 0)) return nullptr;
  const SlopeFit f = loglog_fit(x, y);
  return {{"slope", f.slope}, {"ci95", {f.lo, f.hi}}};
}

// ---------------------------------------------------------------------------
// commands

void cmd_simulate(const ExperimentConfig& c, Outputs& out, unsigned jobs) {
  const auto& p = c.params();
  std::string spikes;
  json per_n = json::array();
  bool all_pass = true;
  for (std::size_t N : c.N) {
    const PointSet x = positions_for(c, N);
    std::vector<std::vector<SpikeTrain>> runs(c.replications);
    parallel_for(c.replications, jobs, [&](std::size_t r) { runs[r] = simulate_network(p, x, c.T, c.seed, r); });

    std::vector<double> mean_count(c.replications);
    for (std::size_t r = 0; r < c.replications; ++r) {
      double s = 0.0;
      for (const auto& tr : runs[r]) {
        s += double(tr.count());
        for (double t : tr.times)
          spikes += std::to_string(N) + "," + std::to_string(r) + "," + std::to_string(tr.neuron) + "," + fmt(t) + "\n";
      }
      mean_count[r] = s / double(N);
    }
    std::vector<double> squares(mean_count.size());
    for (std::size_t r = 0; r < squares.size(); ++r) squares[r] = mean_count[r] * mean_count[r];
    const MeanSe ms = mean_se(mean_count), sq = mean_se(squares);
    const double m1 = ms.mean, m2 = sq.mean;
    const double b1 = moment_bound_first(p, x, c.T), b2 = moment_bound_second(p, x, c.T);
    // the bounds are attained for constant f, so allow three standard errors
    const bool pass = m1 <= b1 + 3.0 * ms.se && m2 <= b2 + 3.0 * sq.se;
    all_pass = all_pass && pass;
    per_n.push_back({{"N", N},
                     {"replications", c.replications},
                     {"first_moment", m1},
                     {"first_moment_se", ms.se},
                     {"second_moment", m2},
                     {"second_moment_se", sq.se},
                     {"moment_bound_first", b1},
                     {"moment_bound_second", b2},
                     {"bound_check", pass ? "PASS" : "FAIL"},
                     {"rate_per_neuron", ms.mean / c.T},
                     {"rate_se", ms.se / c.T}});
  }
  out.csv("simulate_spikes.csv", "N,replication,neuron,time", spikes);
  out.json_file("simulate_summary.json", {{"T", c.T}, {"runs", per_n}, {"bound_check", all_pass ? "PASS" : "FAIL"}});
}

void cmd_solve_limit(const ExperimentConfig& c, Outputs& out, unsigned) {
  const auto& p = c.params();
  const auto quad = quadrature_of(c);
  SolveReport rep;
  const auto lambda = solve(c, quad, &rep);
  const auto u = membrane_potential(lambda, p, quad);
  const auto nf = integrate_neural_field(p, quad, c.T, c.dt);
  double cross = 0.0;
  for (std::size_t i = 0; i < u.values.size(); ++i) cross = std::max(cross, std::abs(u.values[i] - nf.values[i]));

  double ratio = 0.0;
  for (std::size_t i = 1; i < rep.residuals.size(); ++i)
    if (rep.residuals[i - 1] > 1e-13) ratio = std::max(ratio, rep.residuals[i] / rep.residuals[i - 1]);

  const std::size_t d = p.dim();
  std::string body;
  body.reserve((lambda.steps + 1) * lambda.node_count() * 64);
  for (std::size_t k = 0; k <= lambda.steps; ++k)
    for (std::size_t n = 0; n < lambda.node_count(); ++n)
      body += std::to_string(k) + "," + fmt(lambda.time(k)) + "," + std::to_string(n) +
              point_cells(lambda.nodes[n]) + "," + fmt(quad.weights[n]) + "," + fmt(lambda.at(k, n)) + "," +
              fmt(u.at(k, n)) + "\n";
  out.csv("limit_field.csv", "step,t,node" + point_columns(d) + ",weight,lambda,u", body);

  json j = {{"T", c.T},
            {"dt", c.dt},
            {"steps", lambda.steps},
            {"nodes", lambda.node_count()},
            {"iterations", rep.residuals.size()},
            {"residuals", rep.residuals},
            {"windows", rep.windows},
            {"window_length", rep.window_length},
            {"contraction_constant", rep.contraction},
            {"observed_residual_ratio", ratio},
            {"w_l1_sup", rep.w_l1_sup},
            {"a_priori_integral", rep.a_priori_integral},
            {"lambda_sup", lambda.sup_norm()},
            {"neural_field_sup_gap", cross}};
  out.json_file("limit_field.json", j);
}

void cmd_quantize(const ExperimentConfig& c, Outputs& out, unsigned jobs) {
  const std::size_t d = c.params().dim();
  std::vector<Quantized> qs(c.N.size());
  std::vector<double> w2(c.N.size());
  parallel_for(c.N.size(), jobs, [&](std::size_t k) {
    qs[k] = quantize_for(c, c.N[k]);
    w2[k] = wasserstein_discrete(qs[k].q.empirical(), qs[k].proxy.atoms, 2);
  });
  for (std::size_t k = 0; k < c.N.size(); ++k) {
    const auto& q = qs[k].q;
    const std::string tag = std::to_string(c.N[k]);
    std::string body;
    for (std::size_t j = 0; j < q.N; ++j)
      body += std::to_string(j) + point_cells(q.points[j]) + "," + fmt(q.diameters[j]) + "," + fmt(q.residual_mass[j]) + "\n";
    out.csv("positions_N" + tag + ".csv", "index" + point_columns(d) + ",diameter,residual_mass", body);
    const double slack = q.proxy_cell_width / 2.0;
    out.json_file("certificate_N" + tag + ".json",
                  {{"N", q.N},
                   {"d", d},
                   {"r", q.r},
                   {"resolution", qs[k].proxy.resolution},
                   {"certified_bound", q.certified_bound},
                   {"coupling_w2", q.coupling_w2},
                   {"w2_exact", w2[k]},
                   {"proxy_slack", slack},
                   {"tail_bound", q.tail_bound},
                   {"certificate", w2[k] <= q.certified_bound + slack ? "PASS" : "FAIL"}});
  }
}

void cmd_converge_study(const ExperimentConfig& c, Outputs& out, unsigned jobs) {
  const auto& p = c.params();
  const auto quad = quadrature_of(c);
  SolveReport rep;
  const auto lambda = solve(c, quad, &rep);
  const double lambda_sup = lambda.sup_norm();

  const std::string seed_set = std::to_string(c.seed) + ":0-" + std::to_string(c.replications - 1);
  std::string rates, diag;
  json rows = json::array();
  std::vector<double> Ns, As, Us, Ps, Bs;
  for (std::size_t N : c.N) {
    const PointSet x = positions_for(c, N);
    const auto lim = limit_at_positions(lambda, p, quad, x);
    std::vector<CoupledSample> samples(c.replications);
    const auto coupling = estimate_coupling(p, x, lim, lambda, quad, c.T, c.replications, c.seed, jobs,
                                            [&](std::size_t r, const CoupledSample& s) { samples[r] = s; });
    const auto proxy = rho_proxy(c, N);
    const double W1 = wasserstein_discrete(DiscreteMeasure::empirical(x), proxy.atoms, 1);
    const auto bound = dkr_upper_bound(p, lim, coupling, c.T, W1, lambda_sup);
    const auto lower = dkr_dictionary_lower_estimate(samples, x, c.T);
    const auto pot = compare_potentials(p, x, lim.u, c.T, c.replications, c.seed, jobs);

    rates += std::to_string(N) + "," + seed_set + "," + fmt(bound.A) + "," + fmt(bound.A_se) + "," + fmt(bound.B) +
             "," + fmt(bound.W_term) + "," + fmt(bound.total) + "," + fmt(lower.value) + "\n";
    diag += std::to_string(N) + "," + fmt(coupling.F.mean) + "," + fmt(coupling.F.se) + "," + fmt(coupling.G.mean) +
            "," + fmt(coupling.G.se) + "," + fmt(coupling.H) + "," + fmt(W1) + "," + fmt(bound.lipschitz) + "," +
            fmt(bound.C) + "," + fmt(lower.se) + "," + lower.best + "," + fmt(pot.mean) + "," + fmt(pot.se) + "\n";
    rows.push_back({{"N", N},
                    {"A_mean", bound.A},
                    {"A_se", bound.A_se},
                    {"B_bound", bound.B},
                    {"W1", W1},
                    {"W_term", bound.W_term},
                    {"dkr_upper", bound.total},
                    {"dkr_lower", lower.value},
                    {"dkr_lower_se", lower.se},
                    {"potential_gap", pot.mean},
                    {"potential_gap_se", pot.se}});
    Ns.push_back(double(N));
    As.push_back(bound.A);
    Us.push_back(bound.total);
    Bs.push_back(bound.B);
    Ps.push_back(pot.mean);
  }
  out.csv("rate_table.csv", "N,seed_set,A_mean,A_se,B_bound,W_term,dkr_upper,dkr_lower", rates);
  out.csv("diagnostics.csv",
          "N,F_mean,F_se,G_mean,G_se,H,W1,lipschitz,C,dkr_lower_se,dkr_lower_best,potential_gap,potential_gap_se", diag);
  out.json_file("study.json", {{"scenario", c.scenario == Scenario::S1 ? "S1" : "S2"},
                               {"dictionary", kDictionaryVersion},
                               {"T", c.T},
                               {"replications", c.replications},
                               {"seed_set", seed_set},
                               {"lambda_sup", lambda_sup},
                               {"contraction_constant", rep.contraction},
                               {"rows", rows},
                               {"slopes",
                                {{"A_mean", slope_json(Ns, As)},
                                 {"dkr_upper", slope_json(Ns, Us)},
                                 {"B_bound", slope_json(Ns, Bs)},
                                 {"potential_gap", slope_json(Ns, Ps)}}}});
}

void cmd_chaos_study(const ExperimentConfig& c, Outputs& out, unsigned jobs) {
  const auto& p = c.params();
  if (c.chaos.x.empty()) throw ConfigError("chaos windows are required", "/chaos/windows");
  const auto quad = quadrature_of(c);
  const auto lambda = solve(c, quad, nullptr);
  ChaosOptions o;
  o.x = c.chaos.x;
  o.x_tilde = c.chaos.x_tilde;
  o.scale_exponent = c.chaos.scale_exponent;
  o.clip = c.chaos.clip;
  o.limit_grid = c.chaos.limit_grid;

  std::string body;
  json rows = json::array();
  std::vector<double> cov;
  bool any_empty = false;
  for (std::size_t N : c.N) {
    PositionSource source;
    if (c.chaos.redraw) {
      source = [&, N](std::uint64_t r) { return scenario_s1_positions(p.rho, N, c.seed, r + 1); };
    } else {
      const PointSet fixed = positions_for(c, N);
      source = [fixed](std::uint64_t) { return fixed; };
    }
    const auto e = chaos_covariance(p, N, source, lambda, quad, c.T, o, c.replications, c.seed, jobs);
    body += std::to_string(N) + "," + std::to_string(e.replications) + "," + fmt(e.covariance) + "," +
            fmt(e.covariance_se) + "," + fmt(e.mean_a) + "," + fmt(e.mean_b) + "," + fmt(e.limit_mean_a) + "," +
            fmt(e.limit_mean_b) + "," + fmt(e.gap) + "," + (e.empty_window ? "1" : "0") + "\n";
    rows.push_back({{"N", N},
                    {"covariance", e.covariance},
                    {"covariance_se", e.covariance_se},
                    {"gap", e.gap},
                    {"empty_window", e.empty_window}});
    cov.push_back(e.covariance);
    any_empty = any_empty || e.empty_window;
  }
  const std::size_t inv = count_inversions(cov);
  out.csv("chaos_table.csv",
          "N,replications,covariance,covariance_se,mean_a,mean_b,limit_mean_a,limit_mean_b,gap,empty_window", body);
  out.json_file("chaos.json", {{"rows", rows},
                               {"scale_exponent", c.chaos.scale_exponent},
                               {"scale_limit", chaos_scale_limit(p.dim())},
                               {"positions", c.chaos.redraw ? "redraw" : "fixed"},
                               {"inversions", inv},
                               {"monotone", inv <= 1 && !any_empty},
                               {"empty_window", any_empty}});
}

}  // namespace

// ---------------------------------------------------------------------------

std::uint64_t fnv1a64(const std::string& bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

ExperimentConfig parse_config(const json& j) {
  only_keys(j, {"model", "scenario", "N", "T", "dt", "tol", "max_iter", "replications", "seed", "quadrature",
                "quantization", "chaos", "output"},
            "");
  ExperimentConfig c;
  c.raw = j;
  if (!j.contains("model")) throw ConfigError("missing field", "/model");
  c.model.emplace(model_from_json(j.at("model"), "/model"));
  try {
    c.model->validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what(), "/model");
  }
  const std::size_t d = c.model->dim();

  if (j.contains("scenario")) {
    const json& s = j.at("scenario");
    if (s == "S1") c.scenario = Scenario::S1;
    else if (s == "S2") c.scenario = Scenario::S2;
    else throw ConfigError("expected \"S1\" or \"S2\"", "/scenario");
  }

  if (!j.contains("N")) throw ConfigError("missing field", "/N");
  const json& n = j.at("N");
  if (n.is_number_integer()) c.N = {positive_int(j, "N", 1, "")};
  else if (n.is_array() && !n.empty()) {
    for (std::size_t k = 0; k < n.size(); ++k) {
      const std::string at = "/N/" + std::to_string(k);
      if (!n[k].is_number_integer() || n[k].get<long long>() < 1) throw ConfigError("expected a positive integer", at);
      const std::size_t v = n[k].get<std::size_t>();
      if (!c.N.empty() && v <= c.N.back()) throw ConfigError("N list must be increasing", at);
      c.N.push_back(v);
    }
  } else {
    throw ConfigError("expected a nonempty list of positive integers", "/N");
  }

  c.T = positive(j, "T", 1.0, "");
  c.dt = positive(j, "dt", 1e-3, "");
  const double steps = c.T / c.dt;
  if (std::abs(steps - std::round(steps)) > 1e-9 * steps) throw ConfigError("dt must divide T", "/dt");
  c.tol = positive(j, "tol", 1e-10, "");
  c.max_iter = int(positive_int(j, "max_iter", 200, ""));
  c.replications = positive_int(j, "replications", 1, "");
  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      throw ConfigError("expected a nonnegative integer", "/seed");
    c.seed = s.get<std::uint64_t>();
  }

  if (j.contains("quadrature")) {
    const json& q = j.at("quadrature");
    only_keys(q, {"mode", "per_axis"}, "/quadrature");
    if (q.contains("mode")) {
      if (q.at("mode") == "grid") c.quadrature_grid = true;
      else if (q.at("mode") == "quantize") c.quadrature_grid = false;
      else throw ConfigError("expected \"grid\" or \"quantize\"", "/quadrature/mode");
    }
    c.quadrature_per_axis = positive_int(q, "per_axis", 48, "/quadrature");
  }

  if (j.contains("quantization")) {
    const json& q = j.at("quantization");
    only_keys(q, {"epsilon", "radius", "resolution", "refine"}, "/quantization");
    c.quantization.epsilon = positive(q, "epsilon", 0.2, "/quantization");
    if (q.contains("radius")) c.quantization.radius = positive(q, "radius", 1.0, "/quantization");
    c.quantization.resolution = q.contains("resolution") ? positive_int(q, "resolution", 0, "/quantization") : 0;
    c.quantization.refine = positive_int(q, "refine", 8, "/quantization");
  }

  if (j.contains("chaos")) {
    const json& ch = j.at("chaos");
    only_keys(ch, {"windows", "scale_exponent", "clip", "positions", "limit_grid"}, "/chaos");
    if (ch.contains("windows")) {
      const json& w = ch.at("windows");
      if (!w.is_array() || w.size() != 2) throw ConfigError("expected two window centres", "/chaos/windows");
      c.chaos.x = point_of(w[0], d, "/chaos/windows/0");
      c.chaos.x_tilde = point_of(w[1], d, "/chaos/windows/1");
    }
    c.chaos.scale_exponent = positive(ch, "scale_exponent", 0.05, "/chaos");
    if (ch.contains("clip")) {
      const json& v = ch.at("clip");
      if (!v.is_number() || v.get<double>() < 0) throw ConfigError("expected a nonnegative number", "/chaos/clip");
      c.chaos.clip = v.get<double>();
    }
    if (ch.contains("positions")) {
      const json& v = ch.at("positions");
      if (v == "redraw") c.chaos.redraw = true;
      else if (v == "fixed") c.chaos.redraw = false;
      else throw ConfigError("expected \"redraw\" or \"fixed\"", "/chaos/positions");
    }
    c.chaos.limit_grid = positive_int(ch, "limit_grid", 201, "/chaos");
  }

  if (j.contains("output")) {
    const json& o = j.at("output");
    if (!o.is_string()) throw ConfigError("expected a directory name", "/output");
    c.output = o.get<std::string>();
  }
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

void set_seed(ExperimentConfig& config, std::uint64_t seed) {
  config.seed = seed;
  config.raw["seed"] = seed;
}

std::uint64_t config_hash(const ExperimentConfig& config) { return fnv1a64(canonical(config).dump()); }

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"simulate", "solve-limit", "quantize", "converge-study",
                                                 "chaos-study"};
  return names;
}

void run_command(const ExperimentConfig& config, const std::string& command, const fs::path& out, unsigned jobs) {
  using Fn = void (*)(const ExperimentConfig&, Outputs&, unsigned);
  static const std::map<std::string, Fn> table = {{"simulate", cmd_simulate},
                                                  {"solve-limit", cmd_solve_limit},
                                                  {"quantize", cmd_quantize},
                                                  {"converge-study", cmd_converge_study},
                                                  {"chaos-study", cmd_chaos_study}};
  const auto it = table.find(command);
  if (it == table.end()) throw StructuralError("unknown command '" + command + "'");
  Outputs sink(out, config, command);
  it->second(config, sink, std::max(1u, jobs));
  sink.finish();
}

VerifyResult verify_outputs(const fs::path& out, const ExperimentConfig* config) {
  VerifyResult res;
  auto fail = [&](std::string s) {
    res.ok = false;
    res.problems.push_back(std::move(s));
  };
  std::vector<fs::path> manifests;
  if (fs::is_directory(out))
    for (const auto& e : fs::directory_iterator(out)) {
      const std::string name = e.path().filename().string();
      if (name.size() > 14 && name.ends_with(".manifest.json")) manifests.push_back(e.path());
    }
  std::sort(manifests.begin(), manifests.end());
  if (manifests.empty()) {
    fail("no manifest found in " + out.string());
    return res;
  }
  auto slurp = [](const fs::path& p, std::string& bytes) {
    std::ifstream f(p, std::ios::binary);
    if (!f) return false;
    std::ostringstream s;
    s << f.rdbuf();
    bytes = s.str();
    return true;
  };
  const std::string expected = config ? hex64(config_hash(*config)) : std::string();

  for (const auto& mpath : manifests) {
    const std::string mname = mpath.filename().string();
    json m;
    std::string bytes;
    try {
      slurp(mpath, bytes);
      m = json::parse(bytes);
    } catch (const std::exception&) {
      fail(mname + ": unreadable manifest");
      continue;
    }
    if (!m.contains("provenance") || !m["provenance"].contains("config_hash") || !m.contains("files")) {
      fail(mname + ": malformed manifest");
      continue;
    }
    const std::string hash = m["provenance"]["config_hash"].get<std::string>();
    if (config && hash != expected) fail(mname + ": config hash " + hash + " does not match the given config (" + expected + ")");
    for (const auto& entry : m["files"]) {
      const std::string name = entry.value("name", "");
      if (!slurp(out / name, bytes)) {
        fail(name + ": missing");
        continue;
      }
      if (hex64(fnv1a64(bytes)) != entry.value("fnv1a64", "")) fail(name + ": content hash mismatch");
      std::string embedded;
      if (name.ends_with(".csv")) {
        const auto pos = bytes.find("config_hash=");
        const auto eol = bytes.find('\n');
        if (pos != std::string::npos && pos < eol) embedded = bytes.substr(pos + 12, 16);
      } else {
        try {
          embedded = json::parse(bytes).at("provenance").at("config_hash").get<std::string>();
        } catch (const std::exception&) {
        }
      }
      if (embedded != hash) fail(name + ": embedded config hash '" + embedded + "' differs from manifest");
    }
  }
  return res;
}

SlopeFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 3 || y.size() != n) throw StructuralError("slope fit needs at least three points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::log(x[i]) - mx;
    sxx += a * a;
    sxy += a * (std::log(y[i]) - my);
  }
  SlopeFit f;
  f.slope = sxy / sxx;
  double sse = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::log(y[i]) - my - f.slope * (std::log(x[i]) - mx);
    sse += e * e;
  }
  const double se = std::sqrt(sse / double(n - 2) / sxx);
  const double t = boost::math::quantile(boost::math::students_t(double(n - 2)), 0.975);
  f.lo = f.slope - t * se;
  f.hi = f.slope + t * se;
  return f;
}

std::size_t count_inversions(const std::vector<double>& y) {
  std::size_t k = 0;
  for (std::size_t i = 1; i < y.size(); ++i)
    if (std::abs(y[i]) > std::abs(y[i - 1])) ++k;
  return k;
}

}  // namespace hawkesfield
