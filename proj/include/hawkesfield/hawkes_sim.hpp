#pragma once

// Exact event-driven simulation of the N-neuron nonlinear Hawkes network with
// exponential memory. Each neuron carries a membrane driver U_i that decays
// as exp(-alpha t) between spikes and jumps by w(x_j, x_i) / N when neuron j
// spikes; its intensity is f(U_i(t-)).

#include <cstdint>
#include <span>
#include <vector>

#include "hawkesfield/model.hpp"
#include "hawkesfield/rng.hpp"

namespace hawkesfield {

struct NetworkState {
  double t = 0.0;
  std::vector<double> drivers;
  std::vector<std::uint64_t> counts;

  std::size_t size() const noexcept { return drivers.size(); }
};

struct SpikeTrain {
  std::size_t neuron = 0;
  std::vector<double> times;  // strictly increasing, in (0, horizon]
  double horizon = 0.0;

  std::size_t count() const noexcept { return times.size(); }
  // Number of events in (0, t].
  std::size_t count_until(double t) const noexcept;
};

// w(x_j, x_i) / N, cached densely for moderate N and evaluated on the fly
// beyond that.
class InteractionMatrix {
 public:
  InteractionMatrix(const SynapticWeightFn& w, const PointSet& positions);

  // Kick received by neuron i when neuron j spikes.
  double kick(std::size_t j, std::size_t i) const noexcept;
  std::size_t size() const noexcept { return n_; }
  bool is_zero() const noexcept { return zero_; }

 private:
  const SynapticWeightFn* w_;
  const PointSet* positions_;
  std::size_t n_;
  bool zero_;
  std::vector<double> dense_;
};

NetworkState initial_state(const ModelParams& params, const PointSet& positions);

// U_i <- U_i exp(-alpha dt), t <- t + dt.
NetworkState decay_state(NetworkState state, double alpha, double dt);
// U_i <- U_i + w(x_j, x_i) / N for every i; Z_j <- Z_j + 1.
NetworkState apply_jump(NetworkState state, const InteractionMatrix& kicks, std::size_t j);
// sum_i (f(0) + L_f |U_i|), valid until the next jump because |U_i| only
// shrinks under decay.
double dominating_rate(const NetworkState& state, const FiringRateFn& f) noexcept;

inline constexpr double kExplosionGuard = 1e12;
// Accepted events per run; past this the path is treated as exploding.
inline constexpr std::uint64_t kEventGuard = std::uint64_t(1) << 24;

struct SimulationStats {
  std::uint64_t candidates = 0;
  std::uint64_t accepted = 0;
  // max over candidates of sum_i f(U_i) / dominating rate; must stay <= 1.
  double max_acceptance_ratio = 0.0;
};

// One exact sample on [0, T] by thinning against dominating_rate, drawing
// every variate from the network stream of (seed, replication).
// Throws ExplosionError when the dominating rate is non-finite or above
// kExplosionGuard, or after kEventGuard accepted events.
std::vector<SpikeTrain> simulate_network(const ModelParams& params, const PointSet& positions,
                                         double T, std::uint64_t seed,
                                         std::uint64_t replication = 0,
                                         SimulationStats* stats = nullptr);

// Same law as simulate_network, but neuron i reads its own fixed Poisson
// random measure (BandedPoissonMeasure with band-0 height band_base[i], or 1
// when band_base is empty) and accepts a point (t, z) iff z <= f(U_i(t-)).
// With w >= 0 and f nondecreasing this is pathwise monotone in u0, and it is
// the finite half of the coupled construction.
std::vector<SpikeTrain> simulate_network_per_neuron(const ModelParams& params,
                                                    const PointSet& positions, double T,
                                                    std::uint64_t seed,
                                                    std::uint64_t replication = 0,
                                                    std::span<const double> band_base = {},
                                                    SimulationStats* stats = nullptr);

// sup_j ||w_{x_j}||_{L^p(mu_N)} with w_y(x) = w(y, x) and mu_N the empirical
// measure of `positions`.
struct EmpiricalWeightNorms {
  double l1_sup = 0.0;
  double l2_sup = 0.0;
};
EmpiricalWeightNorms empirical_weight_norms(const SynapticWeightFn& w, const PointSet& positions);

// Closed-form bounds on (1/N) sum_i E[Z_i(T)] and (1/N) sum_i E[Z_i(T)^2].
double moment_bound_first(const ModelParams& params, const PointSet& positions, double T);
double moment_bound_second(const ModelParams& params, const PointSet& positions, double T);

}  // namespace hawkesfield
