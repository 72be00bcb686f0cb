#include "hawkesfield/hawkes_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hawkesfield/errors.hpp"
#include "hawkesfield/noise.hpp"

namespace hawkesfield {

namespace {
constexpr std::size_t kDenseLimit = 4096;
}

std::size_t SpikeTrain::count_until(double t) const noexcept {
  return static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
}

InteractionMatrix::InteractionMatrix(const SynapticWeightFn& w, const PointSet& positions)
    : w_(&w), positions_(&positions), n_(positions.size()), zero_(w.is_zero()) {
  if (positions.dim() != w.dim()) throw StructuralError("positions and weight dimension differ");
  if (n_ <= kDenseLimit && !zero_) {
    dense_.resize(n_ * n_);
    const double inv_n = 1.0 / static_cast<double>(n_);
    for (std::size_t j = 0; j < n_; ++j)
      for (std::size_t i = 0; i < n_; ++i) dense_[j * n_ + i] = w(positions[j], positions[i]) * inv_n;
  }
}

double InteractionMatrix::kick(std::size_t j, std::size_t i) const noexcept {
  if (zero_) return 0.0;
  if (!dense_.empty()) return dense_[j * n_ + i];
  return (*w_)((*positions_)[j], (*positions_)[i]) / static_cast<double>(n_);
}

NetworkState initial_state(const ModelParams& params, const PointSet& positions) {
  if (positions.empty()) throw StructuralError("simulation needs at least one neuron");
  if (positions.dim() != params.dim()) throw StructuralError("positions have wrong dimension");
  NetworkState s;
  s.drivers.resize(positions.size());
  s.counts.assign(positions.size(), 0);
  for (std::size_t i = 0; i < positions.size(); ++i) s.drivers[i] = params.u0(positions[i]);
  return s;
}

NetworkState decay_state(NetworkState state, double alpha, double dt) {
  if (dt < 0) throw std::invalid_argument("decay step must be nonnegative");
  if (alpha != 0.0 && dt != 0.0) {
    const double k = std::exp(-alpha * dt);
    for (auto& u : state.drivers) u *= k;
  }
  state.t += dt;
  return state;
}

NetworkState apply_jump(NetworkState state, const InteractionMatrix& kicks, std::size_t j) {
  if (j >= state.size()) throw std::out_of_range("jump neuron index out of range");
  if (!kicks.is_zero())
    for (std::size_t i = 0; i < state.size(); ++i) state.drivers[i] += kicks.kick(j, i);
  ++state.counts[j];
  return state;
}

double dominating_rate(const NetworkState& state, const FiringRateFn& f) noexcept {
  const double f0 = f.value_at_zero(), lf = f.lip_const();
  double total = 0.0;
  for (double u : state.drivers) total += f0 + lf * std::abs(u);
  return total;
}

std::vector<SpikeTrain> simulate_network(const ModelParams& params, const PointSet& positions,
                                         double T, std::uint64_t seed, std::uint64_t replication,
                                         SimulationStats* stats) {
  if (!(T > 0)) throw std::invalid_argument("horizon must be positive");
  NetworkState state = initial_state(params, positions);
  const InteractionMatrix kicks(params.w, positions);
  const std::size_t n = state.size();
  std::vector<SpikeTrain> trains(n);
  for (std::size_t i = 0; i < n; ++i) {
    trains[i].neuron = i;
    trains[i].horizon = T;
  }

  Stream rng({seed, replication, kNetworkStream, 0});
  std::vector<double> rates(n);
  SimulationStats local;

  for (;;) {
    const double bound = dominating_rate(state, params.f);
    if (!std::isfinite(bound) || bound > kExplosionGuard) throw ExplosionError(state.t, bound);
    if (bound <= 0.0) break;  // f(0) = 0 and all drivers zero: silent forever
    const double dt = rng.exponential(bound);
    if (state.t + dt > T) break;

    // In-place decay; same arithmetic as decay_state.
    if (params.alpha != 0.0) {
      const double k = std::exp(-params.alpha * dt);
      for (auto& u : state.drivers) u *= k;
    }
    state.t += dt;

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      rates[i] = params.f(state.drivers[i]);
      total += rates[i];
    }
    ++local.candidates;
    local.max_acceptance_ratio = std::max(local.max_acceptance_ratio, total / bound);
    if (total > bound * (1.0 + 1e-12))
      throw std::logic_error("dominating rate violated: firing rate bound is wrong");

    const double mark = rng.uniform() * bound;
    if (mark >= total) continue;

    // The same mark, read against the prefix sums, selects the neuron.
    std::size_t j = 0;
    double acc = rates[0];
    while (mark >= acc && j + 1 < n) acc += rates[++j];
    if (!kicks.is_zero())
      for (std::size_t i = 0; i < n; ++i) state.drivers[i] += kicks.kick(j, i);
    ++state.counts[j];
    trains[j].times.push_back(state.t);
    if (++local.accepted > kEventGuard) throw ExplosionError(state.t, bound);
  }
  if (stats) *stats = local;
  return trains;
}

std::vector<SpikeTrain> simulate_network_per_neuron(const ModelParams& params,
                                                    const PointSet& positions, double T,
                                                    std::uint64_t seed, std::uint64_t replication,
                                                    std::span<const double> band_base,
                                                    SimulationStats* stats) {
  if (!(T > 0)) throw std::invalid_argument("horizon must be positive");
  NetworkState state = initial_state(params, positions);
  const std::size_t n = state.size();
  if (!band_base.empty() && band_base.size() != n)
    throw StructuralError("one band base per neuron expected");
  const InteractionMatrix kicks(params.w, positions);
  const double f0 = params.f.value_at_zero(), lf = params.f.lip_const();
  constexpr double inf = std::numeric_limits<double>::infinity();

  std::vector<SpikeTrain> trains(n);
  std::vector<BandedPoissonMeasure> pi;
  pi.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    trains[i].neuron = i;
    trains[i].horizon = T;
    pi.emplace_back(seed, replication, i, band_base.empty() ? 1.0 : band_base[i]);
  }

  // Drivers are stored at t_ref (last accepted event); bound[i] holds until
  // the next one.
  double t_ref = 0.0;
  std::vector<double> bound(n), next(n, inf);
  std::vector<std::size_t> active(n, 0), next_band(n, 0);

  auto refresh_next = [&](std::size_t i) {
    next[i] = inf;
    for (std::size_t k = 0; k < active[i]; ++k) {
      const double t = pi[i].head(k).t;
      if (t < next[i]) {
        next[i] = t;
        next_band[i] = k;
      }
    }
  };
  auto refresh_bounds = [&](double now) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      bound[i] = f0 + lf * std::abs(state.drivers[i]);
      total += bound[i];
    }
    if (!std::isfinite(total) || total > kExplosionGuard) throw ExplosionError(now, total);
    for (std::size_t i = 0; i < n; ++i) {
      active[i] = pi[i].bands_below(bound[i]);
      for (std::size_t k = 0; k < active[i]; ++k) pi[i].skip_until(k, now);
      refresh_next(i);
    }
  };
  refresh_bounds(0.0);

  SimulationStats local;
  for (;;) {
    const std::size_t i = static_cast<std::size_t>(std::min_element(next.begin(), next.end()) - next.begin());
    const double tau = next[i];
    if (tau > T) break;
    const std::size_t k = next_band[i];
    const double z = pi[i].head(k).z;
    pi[i].pop(k);
    ++local.candidates;

    bool accept = false;
    if (z < bound[i]) {
      const double u = params.alpha == 0.0 ? state.drivers[i]
                                           : state.drivers[i] * std::exp(-params.alpha * (tau - t_ref));
      const double rate = params.f(u);
      local.max_acceptance_ratio = std::max(local.max_acceptance_ratio, rate / bound[i]);
      if (rate > bound[i] * (1.0 + 1e-12))
        throw std::logic_error("per-neuron rate bound violated: firing rate bound is wrong");
      accept = z < rate;
    }
    if (!accept) {
      refresh_next(i);
      continue;
    }

    if (params.alpha != 0.0) {
      const double d = std::exp(-params.alpha * (tau - t_ref));
      for (auto& u : state.drivers) u *= d;
    }
    t_ref = tau;
    state.t = tau;
    if (!kicks.is_zero())
      for (std::size_t m = 0; m < n; ++m) state.drivers[m] += kicks.kick(i, m);
    ++state.counts[i];
    trains[i].times.push_back(tau);
    if (++local.accepted > kEventGuard) throw ExplosionError(tau, bound[i]);
    refresh_bounds(tau);
  }
  if (stats) *stats = local;
  return trains;
}

EmpiricalWeightNorms empirical_weight_norms(const SynapticWeightFn& w, const PointSet& positions) {
  EmpiricalWeightNorms out;
  const std::size_t n = positions.size();
  if (w.is_zero() || n == 0) return out;
  for (std::size_t j = 0; j < n; ++j) {
    double l1 = 0.0, l2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = std::abs(w(positions[j], positions[i]));
      l1 += v;
      l2 += v * v;
    }
    out.l1_sup = std::max(out.l1_sup, l1 / n);
    out.l2_sup = std::max(out.l2_sup, std::sqrt(l2 / n));
  }
  return out;
}

double moment_bound_first(const ModelParams& params, const PointSet& positions, double T) {
  if (positions.empty()) throw StructuralError("moment bound needs at least one position");
  const auto norms = empirical_weight_norms(params.w, positions);
  const double lf = params.f.lip_const();
  return T * (params.f.value_at_zero() + lf * params.u0.sup_norm()) *
         std::exp(T * lf * norms.l1_sup);
}

double moment_bound_second(const ModelParams& params, const PointSet& positions, double T) {
  if (positions.empty()) throw StructuralError("moment bound needs at least one position");
  const auto norms = empirical_weight_norms(params.w, positions);
  const double lf = params.f.lip_const(), f0 = params.f.value_at_zero();
  const double u0 = params.u0.sup_norm();
  const double first = T * (f0 + lf * u0) * std::exp(T * lf * norms.l1_sup);
  return std::exp(T * (1.0 + 4.0 * lf * lf * norms.l2_sup * norms.l2_sup)) *
         (first + 2.0 * T * f0 * f0 + 4.0 * lf * lf * T * u0 * u0);
}

}  // namespace hawkesfield
