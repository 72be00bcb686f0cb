#pragma once

// Mean-field limit: the intensity lambda(t, x) = f(u(t, x)) with
//   u(t, x) = e^{-alpha t} u0(x) + int w(y, x) int_0^t e^{-alpha(t-s)} lambda(s, y) ds rho(dy),
// solved by Picard iteration on a uniform time grid against a discrete
// quadrature of rho, plus an independent exponential-Euler integrator of the
// neural field equation and the limit Poisson sampler.

#include <cstdint>
#include <vector>

#include "hawkesfield/hawkes_sim.hpp"
#include "hawkesfield/model.hpp"

namespace hawkesfield {

struct SpatialQuadrature {
  PointSet nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return weights.size(); }
  // Throws StructuralError unless weights are >= 0, sum to 1 (1e-12) and
  // nodes are finite.
  void validate() const;
};

// Tensor grid of cell centres over the support box of rho (per_axis cells per
// axis), weights = cell masses renormalized; dirac_mixture returns its atoms.
SpatialQuadrature grid_quadrature(const SpatialMeasure& rho, std::size_t per_axis);

// Values on t_k = k dt, k = 0..steps, times nodes; row k holds all nodes.
struct GridField {
  double dt = 0.0;
  std::size_t steps = 0;
  PointSet nodes;
  std::vector<double> values;

  std::size_t node_count() const noexcept { return nodes.size(); }
  double horizon() const noexcept { return dt * double(steps); }
  double time(std::size_t k) const noexcept { return dt * double(k); }
  double at(std::size_t k, std::size_t p) const noexcept { return values[k * node_count() + p]; }
  double& at(std::size_t k, std::size_t p) noexcept { return values[k * node_count() + p]; }
  double sup_norm() const noexcept;
  // Time path of one node.
  std::vector<double> column(std::size_t p) const;
};

struct IntensityField : GridField {};
struct PotentialField : GridField {};

// Linear interpolation in time of a path sampled every dt; clamps past the end.
double path_value(const std::vector<double>& path, double dt, double t) noexcept;
// Trapezoid integral of the path over [0, steps * dt].
double path_integral(const std::vector<double>& path, double dt) noexcept;

// F(lambda) at eval_nodes. lambda must live on quad's nodes.
IntensityField picard_map(const IntensityField& lambda, const ModelParams& params,
                          const SpatialQuadrature& quad, const PointSet& eval_nodes);
IntensityField picard_map(const IntensityField& lambda, const ModelParams& params,
                          const SpatialQuadrature& quad);

struct SolveOptions {
  double tol = 1e-8;
  int max_iter = 200;
  // Sub-window contraction target when the full-horizon constant is >= 1.
  double window_contraction = 0.5;
};

struct SolveReport {
  std::vector<double> residuals;  // sup-grid change per iteration, all windows
  std::vector<std::size_t> window_first_iteration;
  std::size_t windows = 1;
  double contraction = 0.0;  // over the full horizon
  double w_l1_sup = 0.0;
  double window_length = 0.0;
  // sum_p rho_p [(int lambda)^2 + int lambda]
  double a_priori_integral = 0.0;
};

// sup over quadrature nodes x of sum_m |w(y_m, x)| rho_m.
double quadrature_w_l1_sup(const SynapticWeightFn& w, const SpatialQuadrature& quad);

IntensityField solve_limit_intensity(const ModelParams& params, const SpatialQuadrature& quad,
                                     double T, double dt, const SolveOptions& options = {},
                                     SolveReport* report = nullptr);

// u(t, x) at eval_nodes computed from lambda by the same recursion as the
// Picard map.
PotentialField membrane_potential(const IntensityField& lambda, const ModelParams& params,
                                  const SpatialQuadrature& quad, const PointSet& eval_nodes);
PotentialField membrane_potential(const IntensityField& lambda, const ModelParams& params,
                                  const SpatialQuadrature& quad);

// Exponential Euler for du/dt = -alpha u + int w(y, x) f(u(t, y)) rho(dy) on
// the quadrature nodes.
PotentialField integrate_neural_field(const ModelParams& params, const SpatialQuadrature& quad,
                                      double T, double dt);

// L_f (L_u0 + lambda_sup (1 - e^{-alpha T}) / alpha L_w); T may be +inf.
double lambda_space_lipschitz_bound(const ModelParams& params, double lambda_sup, double T);

// Inhomogeneous Poisson sample with intensity path (linear in time between
// grid values), thinned from band 0 of neuron `neuron`'s measure with height
// max(path). The coupled simulation reads the same points.
SpikeTrain simulate_limit_process(const std::vector<double>& path, double dt, double T,
                                  std::uint64_t seed, std::uint64_t replication,
                                  std::uint64_t neuron);
// Nearest-node (l-infinity) lookup of x in lambda's node set.
SpikeTrain simulate_limit_process(const IntensityField& lambda, std::span<const double> x,
                                  double T, std::uint64_t seed, std::uint64_t replication,
                                  std::uint64_t neuron);

}  // namespace hawkesfield
