#include "hawkesfield/transport.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "hawkesfield/errors.hpp"
#include "hawkesfield/noise.hpp"
#include "hawkesfield/parallel.hpp"

namespace hawkesfield {

namespace {

double time_integral_memory(const std::vector<double>& path, double dt, double alpha, double T) {
  // int_0^T path(s) m(T - s) ds by the trapezoid rule on the grid.
  const std::size_t K = path.size() - 1;
  double s = 0.0;
  for (std::size_t k = 0; k <= K; ++k) {
    const double w = (k == 0 || k == K) ? 0.5 : 1.0;
    s += w * path[k] * memory_factor(alpha, T - dt * double(k));
  }
  return s * dt;
}

double train_memory(const SpikeTrain& z, double alpha, double T) {
  double s = 0.0;
  for (double t : z.times) s += memory_factor(alpha, T - t);
  return s;
}

}  // namespace

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe out;
  if (xs.empty()) return out;
  const double n = double(xs.size());
  out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() > 1) {
    double v = 0.0;
    for (double x : xs) v += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(v / (n - 1.0) / n);
  }
  return out;
}

LimitAtPositions limit_at_positions(const IntensityField& lambda, const ModelParams& params,
                                    const SpatialQuadrature& quad, const PointSet& positions) {
  LimitAtPositions lim;
  lim.u = membrane_potential(lambda, params, quad, positions);
  lim.lambda.dt = lim.u.dt;
  lim.lambda.steps = lim.u.steps;
  lim.lambda.nodes = positions;
  lim.lambda.values.resize(lim.u.values.size());
  for (std::size_t q = 0; q < lim.u.values.size(); ++q) lim.lambda.values[q] = params.f(lim.u.values[q]);

  const double e = std::exp(-params.alpha * lim.u.dt), lf = params.f.lip_const();
  lim.height.assign(positions.size(), 0.0);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    double h = 0.0;
    for (std::size_t k = 0; k <= lim.u.steps; ++k) {
      const double uk = lim.u.at(k, i);
      double slack = 0.0;
      if (k < lim.u.steps) slack = (1.0 - e) * std::abs(uk) + std::abs(lim.u.at(k + 1, i) - e * uk);
      h = std::max(h, lim.lambda.at(k, i) + lf * slack);
    }
    lim.height[i] = h;
  }
  return lim;
}

double limit_rate_at(const ModelParams& params, const PotentialField& u, std::size_t node, double t) {
  if (u.steps == 0) return params.f(u.at(0, node));
  std::size_t k = static_cast<std::size_t>(std::max(0.0, std::floor(t / u.dt)));
  if (k >= u.steps) k = u.steps - 1;
  const double tau = std::min(t - u.time(k), u.dt);
  const double uk = u.at(k, node);
  const double v = std::exp(-params.alpha * tau) * uk +
                   tau / u.dt * (u.at(k + 1, node) - std::exp(-params.alpha * u.dt) * uk);
  return params.f(v);
}

SpikeTrain simulate_limit_neuron(const ModelParams& params, const LimitAtPositions& lim,
                                 std::size_t neuron, double T, std::uint64_t seed,
                                 std::uint64_t replication) {
  if (T > lim.u.horizon() * (1 + 1e-12)) throw StructuralError("horizon beyond the limit grid");
  SpikeTrain out;
  out.neuron = neuron;
  out.horizon = T;
  const double h = lim.height[neuron];
  if (!(h > 0.0)) return out;
  BandedPoissonMeasure pi(seed, replication, neuron, h);
  for (;;) {
    const auto pt = pi.head(0);
    if (pt.t > T) break;
    pi.pop(0);
    if (pt.z < limit_rate_at(params, lim.u, neuron, pt.t)) out.times.push_back(pt.t);
  }
  return out;
}

CoupledSample simulate_coupled_pair(const ModelParams& params, const PointSet& positions,
                                    const LimitAtPositions& lim, double T, std::uint64_t seed,
                                    std::uint64_t replication) {
  if (lim.height.size() != positions.size()) throw StructuralError("limit paths do not match the positions");
  CoupledSample s;
  s.finite = simulate_network_per_neuron(params, positions, T, seed, replication, lim.height);
  s.limit.reserve(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i)
    s.limit.push_back(simulate_limit_neuron(params, lim, i, T, seed, replication));
  return s;
}

double sup_count_gap(const SpikeTrain& a, const SpikeTrain& b) noexcept {
  std::size_t i = 0, j = 0;
  long diff = 0, best = 0;
  while (i < a.times.size() || j < b.times.size()) {
    const double ta = i < a.times.size() ? a.times[i] : INFINITY;
    const double tb = j < b.times.size() ? b.times[j] : INFINITY;
    if (ta == tb) {
      ++i;
      ++j;
    } else if (ta < tb) {
      ++i;
      ++diff;
    } else {
      ++j;
      --diff;
    }
    best = std::max(best, std::abs(diff));
  }
  return double(best);
}

CouplingReport estimate_coupling(const ModelParams& params, const PointSet& positions,
                                 const LimitAtPositions& lim, const IntensityField& lambda_quad,
                                 const SpatialQuadrature& quad, double T, std::size_t replications,
                                 std::uint64_t seed, unsigned jobs,
                                 const std::function<void(std::size_t, const CoupledSample&)>& sink) {
  const std::size_t N = positions.size();
  if (N == 0) throw StructuralError("no neurons");
  if (replications == 0) throw StructuralError("need at least one replication");
  const InteractionMatrix kicks(params.w, positions);
  const double alpha = params.alpha, dt = lim.lambda.dt;
  if (std::abs(lim.u.horizon() - T) > 1e-9 * T || std::abs(lambda_quad.horizon() - T) > 1e-9 * T)
    throw StructuralError("limit fields must be solved on exactly [0, T]");

  // Deterministic pieces: c_j = int lambda(s, x_j) m(T - s) ds, and H.
  std::vector<double> c(N);
  for (std::size_t j = 0; j < N; ++j) c[j] = time_integral_memory(lim.lambda.column(j), dt, alpha, T);

  CouplingReport rep;
  rep.N = N;
  rep.replications = replications;
  if (!kicks.is_zero()) {
    std::vector<double> cq(quad.size());
    for (std::size_t m = 0; m < quad.size(); ++m)
      cq[m] = time_integral_memory(lambda_quad.column(m), lambda_quad.dt, alpha, T);
    double h = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      double emp = 0.0, lim_part = 0.0;
      for (std::size_t j = 0; j < N; ++j) emp += kicks.kick(j, i) * c[j];
      for (std::size_t m = 0; m < quad.size(); ++m)
        lim_part += params.w(quad.nodes[m], positions[i]) * quad.weights[m] * cq[m];
      h += std::abs(emp - lim_part);
    }
    rep.H = h / double(N);
  }

  std::vector<double> A(replications), F(replications, 0.0), G(replications, 0.0);
  std::vector<CoupledSample> kept(sink ? replications : 0);
  parallel_for(replications, jobs, [&](std::size_t r) {
    CoupledSample s = simulate_coupled_pair(params, positions, lim, T, seed, r);
    double a = 0.0;
    for (std::size_t i = 0; i < N; ++i) a += sup_count_gap(s.finite[i], s.limit[i]);
    A[r] = a / double(N);
    if (!kicks.is_zero()) {
      std::vector<double> fa(N), fb(N);
      for (std::size_t j = 0; j < N; ++j) {
        fa[j] = train_memory(s.finite[j], alpha, T);
        fb[j] = train_memory(s.limit[j], alpha, T);
      }
      double f = 0.0, g = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        double sf = 0.0, sg = 0.0;
        for (std::size_t j = 0; j < N; ++j) {
          const double k = kicks.kick(j, i);
          sf += k * (fa[j] - fb[j]);
          sg += k * (fb[j] - c[j]);
        }
        f += std::abs(sf);
        g += std::abs(sg);
      }
      F[r] = f / double(N);
      G[r] = g / double(N);
    }
    if (sink) kept[r] = std::move(s);
  });
  rep.A = mean_se(A);
  rep.F = mean_se(F);
  rep.G = mean_se(G);
  if (sink)
    for (std::size_t r = 0; r < replications; ++r) sink(r, kept[r]);
  return rep;
}

BoundRecord dkr_upper_bound(const ModelParams& params, const LimitAtPositions& lim,
                            const CouplingReport& coupling, double T, double W1, double lambda_sup) {
  const std::size_t N = lim.lambda.node_count();
  if (N == 0) throw StructuralError("no neurons");
  if (std::abs(lim.lambda.horizon() - T) > 1e-9 * T) throw StructuralError("limit field must be solved on exactly [0, T]");
  double first = 0.0, second = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double L = path_integral(lim.lambda.column(i), lim.lambda.dt);
    first += L;
    second += L * L;
  }
  first /= double(N);
  second /= double(N);

  BoundRecord b;
  b.A = coupling.A.mean;
  b.A_se = coupling.A.se;
  b.B = 2.0 / std::sqrt(double(N)) * std::sqrt(first + second);
  b.lipschitz = lambda_space_lipschitz_bound(params, lambda_sup, T);
  b.C = T * b.lipschitz + 1.0;
  b.W1 = W1;
  b.W_term = b.C * W1;
  b.total = b.A + b.B + b.W_term;
  return b;
}

// ---------------------------------------------------------------------------
// Dictionary

namespace {

constexpr std::array<double, 5> kClips{1, 2, 4, 8, 16};

// Values of every dictionary functional on (train, x), in dictionary_names order.
void dictionary_values(const SpikeTrain& z, std::span<const double> x, double T, std::vector<double>& out) {
  out.clear();
  for (double h : {0.25 * T, 0.5 * T, T}) {
    const double n = double(z.count_until(h));
    for (double K : kClips) out.push_back(std::min(n, K));
  }
  const double n0 = double(z.count_until(0.5 * T)), n1 = double(z.count_until(T));
  for (double K : kClips) out.push_back(0.5 * std::min(n0, K));
  for (double K : kClips) out.push_back(0.5 * std::min(n1 - n0, K));
  for (double v : x) out.push_back(v);
}

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::vector<std::string> dictionary_names(std::size_t dim) {
  std::vector<std::string> names;
  for (const char* h : {"T/4", "T/2", "T"})
    for (double K : kClips) names.push_back(std::string("count_clip(") + h + "," + fmt_g(K) + ")");
  for (double K : kClips) names.push_back("window_clip([0,T/2]," + fmt_g(K) + ")/2");
  for (double K : kClips) names.push_back("window_clip([T/2,T]," + fmt_g(K) + ")/2");
  for (std::size_t c = 0; c < dim; ++c) names.push_back("position[" + std::to_string(c) + "]");
  return names;
}

LowerEstimate dkr_dictionary_lower_estimate(const std::vector<CoupledSample>& samples,
                                            const PointSet& positions, double T) {
  const auto names = dictionary_names(positions.dim());
  const std::size_t G = names.size(), N = positions.size();
  LowerEstimate out;
  if (samples.empty() || N == 0) return out;
  std::vector<std::vector<double>> diff(G, std::vector<double>(samples.size(), 0.0));
  std::vector<double> va, vb;
  for (std::size_t r = 0; r < samples.size(); ++r) {
    const auto& s = samples[r];
    if (s.finite.size() != N || s.limit.size() != N) throw StructuralError("sample size differs from positions");
    for (std::size_t i = 0; i < N; ++i) {
      dictionary_values(s.finite[i], positions[i], T, va);
      dictionary_values(s.limit[i], positions[i], T, vb);
      for (std::size_t g = 0; g < G; ++g) diff[g][r] += (va[g] - vb[g]) / double(N);
    }
  }
  out.value = -1.0;
  for (std::size_t g = 0; g < G; ++g) {
    const MeanSe m = mean_se(diff[g]);
    if (std::abs(m.mean) > out.value) {
      out.value = std::abs(m.mean);
      out.se = m.se;
      out.best = names[g];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Potentials

MeanSe compare_potentials(const ModelParams& params, const PointSet& positions,
                          const PotentialField& u_pos, double T, std::size_t replications,
                          std::uint64_t seed, unsigned jobs) {
  const std::size_t N = positions.size();
  if (N == 0 || u_pos.node_count() != N) throw StructuralError("potential field does not match the positions");
  if (replications == 0) throw StructuralError("need at least one replication");
  const std::size_t K = static_cast<std::size_t>(std::llround(T / u_pos.dt));
  if (K > u_pos.steps || K == 0) throw StructuralError("horizon beyond the potential grid");
  const InteractionMatrix kicks(params.w, positions);
  std::vector<double> u0(N);
  for (std::size_t i = 0; i < N; ++i) u0[i] = params.u0(positions[i]);
  const double dt = u_pos.dt, alpha = params.alpha;

  std::vector<double> out(replications);
  parallel_for(replications, jobs, [&](std::size_t r) {
    const auto trains = simulate_network(params, positions, T, seed, r);
    std::vector<std::pair<double, std::size_t>> events;
    for (const auto& z : trains)
      for (double t : z.times) events.emplace_back(t, z.neuron);
    std::sort(events.begin(), events.end());

    std::vector<double> J(N, 0.0);
    const double e = std::exp(-alpha * dt);
    std::size_t next = 0;
    double total = 0.0;
    for (std::size_t k = 0; k <= K; ++k) {
      const double tk = u_pos.time(k);
      if (k > 0 && !kicks.is_zero()) {
        for (double& v : J) v *= e;
        for (; next < events.size() && events[next].first <= tk; ++next) {
          const double d = std::exp(-alpha * (tk - events[next].first));
          for (std::size_t i = 0; i < N; ++i) J[i] += kicks.kick(events[next].second, i) * d;
        }
      }
      const double decay = std::exp(-alpha * tk);
      double row = 0.0;
      for (std::size_t i = 0; i < N; ++i) row += std::abs(decay * u0[i] + J[i] - u_pos.at(k, i));
      total += (k == 0 || k == K ? 0.5 : 1.0) * row;
    }
    out[r] = total * dt / double(N);
  });
  return mean_se(out);
}

// ---------------------------------------------------------------------------
// Chaos

namespace {

double bump_raw(double r2) { return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0; }

double bump_norm(std::size_t d) {
  // S_{d-1} int_0^1 r^{d-1} e^{-1/(1-r^2)} dr by the midpoint rule.
  static const std::array<double, 9> table = [] {
    std::array<double, 9> t{};
    constexpr int n = 200000;
    for (std::size_t dd = 1; dd < t.size(); ++dd) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) {
        const double r = (k + 0.5) / n;
        s += std::pow(r, double(dd) - 1.0) * bump_raw(r * r);
      }
      const double sphere = 2.0 * std::pow(M_PI, 0.5 * double(dd)) / std::tgamma(0.5 * double(dd));
      t[dd] = sphere * s / n;
    }
    return t;
  }();
  if (d == 0 || d >= table.size()) throw StructuralError("mollifier dimension out of range");
  return table[d];
}

double poisson_clipped_mean(double mean, double clip) {
  // E[min(Z, clip)] for Z ~ Poisson(mean).
  double p = std::exp(-mean), below = 0.0, acc = 0.0;
  for (int n = 0; double(n) < clip; ++n) {
    acc += double(n) * p;
    below += p;
    p *= mean / double(n + 1);
  }
  return acc + clip * std::max(0.0, 1.0 - below);
}

}  // namespace

double bump_mollifier(std::span<const double> v) {
  double r2 = 0.0;
  for (double x : v) r2 += x * x;
  return bump_raw(r2) / bump_norm(v.size());
}

double chaos_scale_limit(std::size_t d) { return 1.0 / (double(4 + d) * double(2 * d + 1)); }

ChaosEstimate chaos_covariance(const ModelParams& params, std::size_t N,
                               const PositionSource& positions, const IntensityField& lambda_quad,
                               const SpatialQuadrature& quad, double T, const ChaosOptions& options,
                               std::size_t replications, std::uint64_t seed, unsigned jobs) {
  const std::size_t d = params.dim();
  if (N == 0 || replications < 2) throw StructuralError("chaos estimate needs N >= 1 and two replications");
  if (options.x.size() != d || options.x_tilde.size() != d)
    throw ConfigError("window centres must have the model dimension", "/chaos/windows");
  if (!(options.scale_exponent > 0.0) || !(options.scale_exponent < chaos_scale_limit(d)))
    throw ConfigError("scale exponent must lie in (0, 1/((4+d)(2d+1)))", "/chaos/scale_exponent");
  if (!params.rho.has_density()) throw StructuralError("chaos estimate needs rho with a density");
  if (options.clip < 0.0) throw ConfigError("clip must be nonnegative", "/chaos/clip");

  const double inv_width = std::pow(double(N), options.scale_exponent);
  const double amp = std::pow(inv_width, double(d));
  auto phi = [&](const SpikeTrain& z) {
    return options.clip > 0.0 ? std::min(double(z.count_until(T)), options.clip) / options.clip : 1.0;
  };

  ChaosEstimate est;
  est.N = N;
  est.replications = replications;
  std::vector<double> a(replications), b(replications);
  std::vector<char> empty(replications, 0);
  parallel_for(replications, jobs, [&](std::size_t r) {
    const PointSet pos = positions(r);
    if (pos.size() != N || pos.dim() != d) throw StructuralError("position source returned the wrong shape");
    const auto trains = simulate_network(params, pos, T, seed, r);
    double sa = 0.0, sb = 0.0;
    bool hit_a = false, hit_b = false;
    std::vector<double> v(d);
    for (std::size_t i = 0; i < N; ++i) {
      const double dens = params.rho.density(pos[i]);
      if (!(dens > 0.0)) continue;
      for (std::size_t k = 0; k < d; ++k) v[k] = inv_width * (pos[i][k] - options.x[k]);
      const double ka = bump_mollifier(v);
      for (std::size_t k = 0; k < d; ++k) v[k] = inv_width * (pos[i][k] - options.x_tilde[k]);
      const double kb = bump_mollifier(v);
      if (ka > 0.0 || kb > 0.0) {
        const double p = phi(trains[i]);
        sa += p * amp * ka / dens;
        sb += p * amp * kb / dens;
      }
      hit_a = hit_a || ka > 0.0;
      hit_b = hit_b || kb > 0.0;
    }
    a[r] = sa / double(N);
    b[r] = sb / double(N);
    empty[r] = !(hit_a && hit_b);
  });

  const double R = double(replications);
  est.mean_a = std::accumulate(a.begin(), a.end(), 0.0) / R;
  est.mean_b = std::accumulate(b.begin(), b.end(), 0.0) / R;
  std::vector<double> prod(replications);
  double ab = 0.0;
  for (std::size_t r = 0; r < replications; ++r) {
    prod[r] = (a[r] - est.mean_a) * (b[r] - est.mean_b);
    ab += a[r] * b[r];
    est.empty_window = est.empty_window || empty[r];
  }
  est.covariance = std::accumulate(prod.begin(), prod.end(), 0.0) / (R - 1.0);
  est.covariance_se = mean_se(prod).se * R / (R - 1.0);

  // Limit means: int phibar(z) N^{dp} Phi(N^p (z - x)) 1{f_rho(z) > 0} dz on a
  // midpoint grid over the mollifier's support.
  const std::size_t G = std::max<std::size_t>(options.limit_grid, 3);
  std::size_t cells = 1;
  for (std::size_t k = 0; k < d; ++k) cells *= G;
  auto limit_mean = [&](const std::vector<double>& centre) {
    PointSet z(d, 0);
    std::vector<double> kern;
    std::vector<double> v(d), p(d);
    for (std::size_t c = 0; c < cells; ++c) {
      std::size_t rem = c;
      for (std::size_t k = d; k-- > 0;) {
        v[k] = -1.0 + (2.0 * double(rem % G) + 1.0) / double(G);
        rem /= G;
      }
      const double kv = bump_mollifier(v);
      if (kv <= 0.0) continue;
      for (std::size_t k = 0; k < d; ++k) p[k] = centre[k] + v[k] / inv_width;
      if (!(params.rho.density(p) > 0.0)) continue;
      z.push_back(p);
      kern.push_back(kv);
    }
    if (kern.empty()) return 0.0;
    // cell_vol * sum(kern) approximates the unit mass of the mollifier.
    const double cell_vol = std::pow(2.0 / double(G), double(d));
    double s = 0.0;
    if (options.clip > 0.0) {
      const auto lam = picard_map(lambda_quad, params, quad, z);
      for (std::size_t q = 0; q < kern.size(); ++q)
        s += kern[q] * poisson_clipped_mean(path_integral(lam.column(q), lam.dt), options.clip) / options.clip;
    } else {
      s = std::accumulate(kern.begin(), kern.end(), 0.0);
    }
    return s * cell_vol;
  };
  est.limit_mean_a = limit_mean(options.x);
  est.limit_mean_b = limit_mean(options.x_tilde);
  est.gap = ab / R - est.limit_mean_a * est.limit_mean_b;
  return est;
}

}  // namespace hawkesfield
