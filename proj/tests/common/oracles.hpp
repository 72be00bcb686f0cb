#pragma once

// Independent reference computations used by unit and acceptance tests. None
// of these call into the library's solvers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include "hawkesfield/model.hpp"

namespace oracle {

// Brute-force Euler-Bernoulli discretization of the network: at each step of
// length h every neuron fires with probability f(U_i) h (one uniform decides
// which, if any), then drivers decay exactly. Returns terminal counts.
inline std::vector<int> euler_bernoulli_counts(const hawkesfield::ModelParams& p,
                                               const hawkesfield::PointSet& x, double T,
                                               double h, std::mt19937_64& gen) {
  const std::size_t n = x.size();
  std::vector<double> U(n), kick(n * n);
  for (std::size_t i = 0; i < n; ++i) U[i] = p.u0(x[i]);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) kick[j * n + i] = p.w(x[j], x[i]) / double(n);
  std::vector<int> counts(n, 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double decay = std::exp(-p.alpha * h);
  const long steps = std::lround(T / h);
  std::vector<double> rate(n);
  for (long s = 0; s < steps; ++s) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += (rate[i] = p.f(U[i]) * h);
    const double v = unif(gen);
    if (v < total) {
      std::size_t j = 0;
      double acc = rate[0];
      while (v >= acc && j + 1 < n) acc += rate[++j];
      ++counts[j];
      for (std::size_t i = 0; i < n; ++i) U[i] += kick[j * n + i];
    }
    for (auto& u : U) u *= decay;
  }
  return counts;
}

// Total variation distance between two empirical laws of count vectors.
inline double tv_distance(const std::map<std::vector<int>, long>& a, long na,
                          const std::map<std::vector<int>, long>& b, long nb) {
  double tv = 0.0;
  for (const auto& [k, c] : a) {
    auto it = b.find(k);
    const double q = it == b.end() ? 0.0 : double(it->second) / nb;
    tv += std::abs(double(c) / na - q);
  }
  for (const auto& [k, c] : b)
    if (!a.count(k)) tv += double(c) / nb;
  return 0.5 * tv;
}

// Expected TV between two independent empirical laws drawn from the same
// distribution, with cell probabilities estimated by the pooled sample
// (normal approximation per cell).
inline double tv_noise(const std::map<std::vector<int>, long>& a, long na,
                       const std::map<std::vector<int>, long>& b, long nb) {
  std::map<std::vector<int>, double> pooled;
  for (const auto& [k, c] : a) pooled[k] += c;
  for (const auto& [k, c] : b) pooled[k] += c;
  double s = 0.0;
  for (const auto& [k, c] : pooled) {
    const double p = c / double(na + nb);
    s += std::sqrt(p * (1 - p) * (1.0 / na + 1.0 / nb)) * std::sqrt(2.0 / M_PI);
  }
  return 0.5 * s;
}

// Linear Hawkes, one neuron: f(u) = u + mu, kick w, decay alpha, u0 = 0.
// Mean intensity h(t) = mu + w int_0^t e^{-alpha(t-s)} h(s) ds, i.e.
// h' = -(alpha - w) h + alpha mu with h(0) = mu; E Z(T) = int_0^T h.
inline double linear_hawkes_mean_count(double mu, double w, double alpha, double T) {
  const double a = alpha - w;
  if (std::abs(a) < 1e-14) return mu * T + 0.5 * mu * w * T * T;
  const double hinf = mu * alpha / a;
  // h(t) = hinf + (mu - hinf) e^{-a t}
  return hinf * T + (mu - hinf) * (1 - std::exp(-a * T)) / a;
}

// Exact W_p^p between two 1-d discrete measures via the quantile coupling.
inline double wasserstein_1d_pow(std::vector<std::pair<double, double>> a,
                                 std::vector<std::pair<double, double>> b, int p) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double ra = a.empty() ? 0 : a[0].second, rb = b.empty() ? 0 : b[0].second, cost = 0.0;
  while (i < a.size() && j < b.size()) {
    const double m = std::min(ra, rb);
    cost += m * std::pow(std::abs(a[i].first - b[j].first), p);
    ra -= m;
    rb -= m;
    if (ra <= 1e-15 && ++i < a.size()) ra = a[i].second;
    if (rb <= 1e-15 && ++j < b.size()) rb = b[j].second;
  }
  return cost;
}

// Brute force optimal transport for tiny supports: the LP optimum sits on a
// vertex of the transport polytope; enumerate every spanning-tree basis of the
// bipartite graph (rows + cols - 1 arcs), solve it, keep feasible ones.
inline double transport_brute_force(const std::vector<double>& a, const std::vector<double>& b,
                                    const std::vector<std::vector<double>>& cost) {
  const std::size_t m = a.size(), n = b.size(), arcs = m * n, k = m + n - 1;
  double best = INFINITY;
  std::vector<int> pick(arcs, 0);
  std::fill(pick.end() - static_cast<long>(k), pick.end(), 1);
  do {
    // Solve by repeatedly peeling leaves of the chosen forest.
    std::vector<double> ra = a, rb = b, flow(arcs, 0.0);
    std::vector<char> used(arcs, 0);
    std::vector<std::size_t> chosen;
    for (std::size_t e = 0; e < arcs; ++e)
      if (pick[e]) chosen.push_back(e);
    bool progress = true, ok = true;
    std::size_t left = chosen.size();
    while (left && progress) {
      progress = false;
      for (std::size_t r = 0; r < m + n; ++r) {
        std::size_t deg = 0, last = 0;
        for (auto e : chosen)
          if (!used[e] && ((r < m && e / n == r) || (r >= m && e % n == r - m))) {
            ++deg;
            last = e;
          }
        if (deg != 1) continue;
        const std::size_t i = last / n, j = last % n;
        const double f = r < m ? ra[i] : rb[j];
        flow[last] = f;
        ra[i] -= f;
        rb[j] -= f;
        used[last] = 1;
        --left;
        progress = true;
      }
    }
    if (left) continue;  // contains a cycle: not a basis
    for (double v : flow) ok = ok && v >= -1e-12;
    for (double v : ra) ok = ok && std::abs(v) < 1e-12;
    for (double v : rb) ok = ok && std::abs(v) < 1e-12;
    if (!ok) continue;
    double c = 0.0;
    for (std::size_t e = 0; e < arcs; ++e) c += flow[e] * cost[e / n][e % n];
    best = std::min(best, c);
  } while (std::next_permutation(pick.begin(), pick.end()));
  return best;
}

// Least squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

}  // namespace oracle
