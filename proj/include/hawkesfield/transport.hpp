#pragma once

// Exact optimal transport between finite measures, the shared-noise coupling
// of the N-neuron network with its mean-field limit, and the itemized upper
// and dictionary lower estimates of the path-space distance between them.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hawkesfield/discrete.hpp"
#include "hawkesfield/hawkes_sim.hpp"
#include "hawkesfield/limit_field.hpp"

namespace hawkesfield {

enum class GroundNorm { linf, l2 };

struct TransportResult {
  double cost = 0.0;      // sum pi_ij |x_i - y_j|^p
  double distance = 0.0;  // cost^{1/p}
  std::size_t arcs = 0;   // candidate arcs in the final round
  std::size_t rounds = 0;
};

// Exact min-cost flow on the bipartite support graph. Masses are scaled to
// 2^50 integer units and costs to 2^40 integer units of the largest possible
// cost; the returned cost is evaluated in double precision on the optimal
// plan of the scaled problem.
TransportResult optimal_transport(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int p,
                                  GroundNorm norm = GroundNorm::linf);
double wasserstein_discrete(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int p,
                            GroundNorm norm = GroundNorm::linf);

// ---------------------------------------------------------------------------
// Coupled pair

// Limit potential u(t, x_i) on the grid, one column per neuron position,
// plus the band-0 height shared by both processes.
struct LimitAtPositions {
  PotentialField u;
  IntensityField lambda;
  std::vector<double> height;  // >= sup_t lambda(t, x_i) under interpolation
};

LimitAtPositions limit_at_positions(const IntensityField& lambda, const ModelParams& params,
                                    const SpatialQuadrature& quad, const PointSet& positions);

// f(u) with u interpolated as e^{-alpha (t - t_k)} u_k + s (u_{k+1} - e^{-alpha dt} u_k),
// exact when the interaction term vanishes.
double limit_rate_at(const ModelParams& params, const PotentialField& u, std::size_t node, double t);

// Limit process of one neuron read from band 0 of its measure with the given
// height. The coupled construction returns exactly this train.
SpikeTrain simulate_limit_neuron(const ModelParams& params, const LimitAtPositions& lim,
                                 std::size_t neuron, double T, std::uint64_t seed,
                                 std::uint64_t replication);

struct CoupledSample {
  std::vector<SpikeTrain> finite;
  std::vector<SpikeTrain> limit;
};

CoupledSample simulate_coupled_pair(const ModelParams& params, const PointSet& positions,
                                    const LimitAtPositions& lim, double T, std::uint64_t seed,
                                    std::uint64_t replication);

// sup_{t <= T} |a(t) - b(t)| for two counting paths.
double sup_count_gap(const SpikeTrain& a, const SpikeTrain& b) noexcept;

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};
MeanSe mean_se(const std::vector<double>& xs);

struct CouplingReport {
  std::size_t N = 0;
  std::size_t replications = 0;
  MeanSe A;  // (1/N) sum_i sup_t |Z_i - Zbar_i|
  // Monte-Carlo values of the three terms bounding int |U - u| (averaged
  // over neurons), and the deterministic H term.
  MeanSe F, G;
  double H = 0.0;
};

// Runs `replications` coupled samples (replication r uses stream
// (seed, r, i)); `jobs` worker threads, results independent of `jobs`.
// Samples are passed to `sink` in replication order when given.
CouplingReport estimate_coupling(const ModelParams& params, const PointSet& positions,
                                 const LimitAtPositions& lim, const IntensityField& lambda_quad,
                                 const SpatialQuadrature& quad, double T, std::size_t replications,
                                 std::uint64_t seed, unsigned jobs = 1,
                                 const std::function<void(std::size_t, const CoupledSample&)>& sink = {});

struct BoundRecord {
  double A = 0.0;          // coupling estimate
  double A_se = 0.0;
  double B = 0.0;          // 2 N^{-1/2} [int int lambda + int (int lambda)^2]^{1/2}
  double lipschitz = 0.0;  // lambda_space_lipschitz_bound
  double C = 0.0;          // T * lipschitz + 1
  double W1 = 0.0;         // W_1(mu_N, rho proxy)
  double W_term = 0.0;     // C * W1
  double total = 0.0;      // A + B + W_term
};

// W1 is W_1(mu_N, proxy) computed by the caller; lambda_sup bounds lambda on
// [0, T] x supp rho (the sup of the solved field).
BoundRecord dkr_upper_bound(const ModelParams& params, const LimitAtPositions& lim,
                            const CouplingReport& coupling, double T, double W1,
                            double lambda_sup);

// "dict-v1": min(eta(h), K) for h in {T/4, T/2, T}, K in {1, 2, 4, 8, 16};
// min(eta(b) - eta(a), K) / 2 on [0, T/2] and [T/2, T]; each position
// coordinate. All are 1-Lipschitz for sup-norm plus position norm.
inline constexpr const char* kDictionaryVersion = "dict-v1";

struct LowerEstimate {
  double value = 0.0;
  double se = 0.0;
  std::string best;  // name of the maximizing functional
};

// samples[r] is one coupled replication.
LowerEstimate dkr_dictionary_lower_estimate(const std::vector<CoupledSample>& samples,
                                            const PointSet& positions, double T);
std::vector<std::string> dictionary_names(std::size_t dim);

// E int_0^T (1/N) sum_i |U_i(t) - u(t, x_i)| dt over simulate_network runs,
// U_i reconstructed on the time grid of u.
MeanSe compare_potentials(const ModelParams& params, const PointSet& positions,
                          const PotentialField& u_pos, double T, std::size_t replications,
                          std::uint64_t seed, unsigned jobs = 1);

// ---------------------------------------------------------------------------
// Chaos

struct ChaosOptions {
  std::vector<double> x, x_tilde;  // window centres
  double scale_exponent = 0.05;    // p(d) < 1 / ((4 + d)(2d + 1))
  // phi(eta) = min(eta(T), clip) / clip; clip = 0 gives phi = 1.
  double clip = 0.0;
  std::size_t limit_grid = 41;  // per-axis points for the limit-mean integral
};

struct ChaosEstimate {
  std::size_t N = 0;
  std::size_t replications = 0;
  double covariance = 0.0;  // sample covariance of the two functionals
  double covariance_se = 0.0;
  double mean_a = 0.0, mean_b = 0.0;
  double limit_mean_a = 0.0, limit_mean_b = 0.0;
  double gap = 0.0;  // E[ab] - limit_mean_a * limit_mean_b
  bool empty_window = false;  // some replication had no neuron in a window
};

// Normalized bump Phi(v) = c exp(-1 / (1 - |v|^2)) on the Euclidean unit ball.
double bump_mollifier(std::span<const double> v);

using PositionSource = std::function<PointSet(std::uint64_t replication)>;

ChaosEstimate chaos_covariance(const ModelParams& params, std::size_t N,
                               const PositionSource& positions, const IntensityField& lambda_quad,
                               const SpatialQuadrature& quad, double T, const ChaosOptions& options,
                               std::size_t replications, std::uint64_t seed, unsigned jobs = 1);

double chaos_scale_limit(std::size_t d);

}  // namespace hawkesfield
