#include "hawkesfield/limit_field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hawkesfield/errors.hpp"
#include "hawkesfield/noise.hpp"

namespace hawkesfield {

void SpatialQuadrature::validate() const {
  if (weights.empty() || nodes.size() != weights.size())
    throw StructuralError("quadrature needs one weight per node");
  double s = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw StructuralError("quadrature weights must be nonnegative");
    s += w;
  }
  if (std::abs(s - 1.0) > 1e-12) throw StructuralError("quadrature weights must sum to 1");
  for (double c : nodes.coords())
    if (!std::isfinite(c)) throw StructuralError("quadrature node is not finite");
}

SpatialQuadrature grid_quadrature(const SpatialMeasure& rho, std::size_t per_axis) {
  if (per_axis == 0) throw StructuralError("quadrature needs at least one cell per axis");
  SpatialQuadrature q;
  if (const auto* m = std::get_if<DiracMixture>(&rho.variant())) {
    q.nodes = m->points;
    q.weights = m->weights;
    double s = 0.0;
    for (double w : q.weights) s += w;
    for (double& w : q.weights) w /= s;
    return q;
  }
  const std::size_t d = rho.dim();
  std::vector<double> lo(d), hi(d);
  if (const auto* g = std::get_if<GridDensity>(&rho.variant())) {
    lo = g->lo;
    hi = g->hi;
  } else {
    const double r = rho.effective_radius();
    std::fill(lo.begin(), lo.end(), -r);
    std::fill(hi.begin(), hi.end(), r);
  }
  std::size_t cells = 1;
  for (std::size_t k = 0; k < d; ++k) cells *= per_axis;
  q.nodes = PointSet(d, 0);
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> a(d), b(d), c(d);
  double total = 0.0;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    std::size_t rem = cell;
    for (std::size_t k = d; k-- > 0;) {
      idx[k] = rem % per_axis;
      rem /= per_axis;
      const double h = (hi[k] - lo[k]) / double(per_axis);
      a[k] = lo[k] + h * double(idx[k]);
      b[k] = idx[k] + 1 == per_axis ? hi[k] : a[k] + h;
      c[k] = 0.5 * (a[k] + b[k]);
    }
    const double m = rho.box_mass(a, b);
    if (m <= 0.0) continue;
    q.nodes.push_back(c);
    q.weights.push_back(m);
    total += m;
  }
  if (q.weights.empty()) throw StructuralError("quadrature box carries no mass");
  for (double& w : q.weights) w /= total;
  return q;
}

double GridField::sup_norm() const noexcept {
  double s = 0.0;
  for (double v : values) s = std::max(s, std::abs(v));
  return s;
}

std::vector<double> GridField::column(std::size_t p) const {
  std::vector<double> out(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) out[k] = at(k, p);
  return out;
}

double path_value(const std::vector<double>& path, double dt, double t) noexcept {
  if (t <= 0.0) return path.front();
  const double s = t / dt;
  const std::size_t k = static_cast<std::size_t>(s);
  if (k + 1 >= path.size()) return path.back();
  const double frac = s - double(k);
  return path[k] + frac * (path[k + 1] - path[k]);
}

double path_integral(const std::vector<double>& path, double dt) noexcept {
  if (path.size() < 2) return 0.0;
  double s = 0.5 * (path.front() + path.back());
  for (std::size_t k = 1; k + 1 < path.size(); ++k) s += path[k];
  return s * dt;
}

namespace {

// Row p holds w(y_m, x_p) rho_m.
std::vector<double> coupling_matrix(const SynapticWeightFn& w, const SpatialQuadrature& quad,
                                    const PointSet& eval) {
  const std::size_t M = quad.size(), P = eval.size();
  std::vector<double> A(P * M, 0.0);
  if (w.is_zero()) return A;
  for (std::size_t p = 0; p < P; ++p)
    for (std::size_t m = 0; m < M; ++m) A[p * M + m] = w(quad.nodes[m], eval[p]) * quad.weights[m];
  return A;
}

void require_grid(const GridField& lambda, const SpatialQuadrature& quad) {
  if (lambda.node_count() != quad.size() || lambda.nodes.dim() != quad.nodes.dim() ||
      lambda.nodes.coords() != quad.nodes.coords())
    throw StructuralError("field nodes differ from the quadrature nodes");
  if (lambda.values.size() != (lambda.steps + 1) * lambda.node_count())
    throw StructuralError("field values do not match its grid");
}

// u(t_k, x_p) for all k, p given lambda on the quadrature nodes.
template <class Out>
void potential_sweep(const GridField& lambda, const ModelParams& params, const PointSet& eval,
                     const std::vector<double>& A, Out&& out) {
  const std::size_t M = lambda.node_count(), P = eval.size();
  const double dt = lambda.dt, e = std::exp(-params.alpha * dt);
  std::vector<double> I(M, 0.0), u0(P);
  for (std::size_t p = 0; p < P; ++p) u0[p] = params.u0(eval[p]);
  for (std::size_t k = 0; k <= lambda.steps; ++k) {
    if (k > 0)
      for (std::size_t m = 0; m < M; ++m)
        I[m] = e * I[m] + 0.5 * dt * (e * lambda.at(k - 1, m) + lambda.at(k, m));
    const double decay = std::exp(-params.alpha * lambda.time(k));
    for (std::size_t p = 0; p < P; ++p) {
      double s = 0.0;
      const double* row = A.data() + p * M;
      for (std::size_t m = 0; m < M; ++m) s += row[m] * I[m];
      out(k, p, decay * u0[p] + s);
    }
  }
}

}  // namespace

IntensityField picard_map(const IntensityField& lambda, const ModelParams& params,
                          const SpatialQuadrature& quad, const PointSet& eval_nodes) {
  require_grid(lambda, quad);
  if (eval_nodes.dim() != params.dim()) throw StructuralError("evaluation nodes have wrong dimension");
  IntensityField out;
  out.dt = lambda.dt;
  out.steps = lambda.steps;
  out.nodes = eval_nodes;
  out.values.assign((lambda.steps + 1) * eval_nodes.size(), 0.0);
  const auto A = coupling_matrix(params.w, quad, eval_nodes);
  potential_sweep(lambda, params, eval_nodes, A,
                  [&](std::size_t k, std::size_t p, double u) { out.at(k, p) = params.f(u); });
  return out;
}

IntensityField picard_map(const IntensityField& lambda, const ModelParams& params,
                          const SpatialQuadrature& quad) {
  return picard_map(lambda, params, quad, quad.nodes);
}

PotentialField membrane_potential(const IntensityField& lambda, const ModelParams& params,
                                  const SpatialQuadrature& quad, const PointSet& eval_nodes) {
  require_grid(lambda, quad);
  PotentialField out;
  out.dt = lambda.dt;
  out.steps = lambda.steps;
  out.nodes = eval_nodes;
  out.values.assign((lambda.steps + 1) * eval_nodes.size(), 0.0);
  const auto A = coupling_matrix(params.w, quad, eval_nodes);
  potential_sweep(lambda, params, eval_nodes, A,
                  [&](std::size_t k, std::size_t p, double u) { out.at(k, p) = u; });
  return out;
}

PotentialField membrane_potential(const IntensityField& lambda, const ModelParams& params,
                                  const SpatialQuadrature& quad) {
  return membrane_potential(lambda, params, quad, quad.nodes);
}

double quadrature_w_l1_sup(const SynapticWeightFn& w, const SpatialQuadrature& quad) {
  if (w.is_zero()) return 0.0;
  double best = 0.0;
  for (std::size_t p = 0; p < quad.size(); ++p) {
    double s = 0.0;
    for (std::size_t m = 0; m < quad.size(); ++m)
      s += std::abs(w(quad.nodes[m], quad.nodes[p])) * quad.weights[m];
    best = std::max(best, s);
  }
  return best;
}

IntensityField solve_limit_intensity(const ModelParams& params, const SpatialQuadrature& quad,
                                     double T, double dt, const SolveOptions& options,
                                     SolveReport* report) {
  quad.validate();
  if (!(T > 0) || !(dt > 0)) throw StructuralError("horizon and time step must be positive");
  if (!(options.tol > 0)) throw StructuralError("tolerance must be positive");
  if (quad.nodes.dim() != params.dim()) throw StructuralError("quadrature has wrong dimension");

  const std::size_t K = static_cast<std::size_t>(std::llround(T / dt));
  if (K == 0 || std::abs(double(K) * dt - T) > 1e-9 * T)
    throw StructuralError("time step must divide the horizon");
  const std::size_t M = quad.size();
  const double e = std::exp(-params.alpha * dt);

  SolveReport rep;
  rep.w_l1_sup = quadrature_w_l1_sup(params.w, quad);
  rep.contraction = contraction_constant(params, T, rep.w_l1_sup);

  // Window length in steps.
  std::size_t span = K;
  if (rep.contraction >= 1.0) {
    std::size_t lo = 1, hi = K;
    while (lo < hi) {
      const std::size_t mid = (lo + hi + 1) / 2;
      if (contraction_constant(params, double(mid) * dt, rep.w_l1_sup) <= options.window_contraction)
        lo = mid;
      else
        hi = mid - 1;
    }
    span = lo;
  }
  rep.window_length = double(span) * dt;

  IntensityField lam;
  lam.dt = dt;
  lam.steps = K;
  lam.nodes = quad.nodes;
  lam.values.resize((K + 1) * M);
  std::vector<double> u0(M);
  for (std::size_t m = 0; m < M; ++m) u0[m] = params.u0(quad.nodes[m]);
  for (std::size_t k = 0; k <= K; ++k)
    for (std::size_t m = 0; m < M; ++m)
      lam.at(k, m) = params.f(std::exp(-params.alpha * lam.time(k)) * u0[m]);

  const auto A = coupling_matrix(params.w, quad, quad.nodes);
  std::vector<double> carry(M, 0.0), I(M), next((K + 1) * M);
  rep.windows = 0;

  for (std::size_t k0 = 0; k0 < K; k0 += span) {
    const std::size_t k1 = std::min(K, k0 + span);
    ++rep.windows;
    rep.window_first_iteration.push_back(rep.residuals.size());
    int it = 0;
    double residual = std::numeric_limits<double>::infinity();
    while (true) {
      if (it == options.max_iter) throw ConvergenceError(it, residual);
      ++it;
      I = carry;
      residual = 0.0;
      for (std::size_t k = k0 + 1; k <= k1; ++k) {
        for (std::size_t m = 0; m < M; ++m)
          I[m] = e * I[m] + 0.5 * dt * (e * lam.at(k - 1, m) + lam.at(k, m));
        const double decay = std::exp(-params.alpha * lam.time(k));
        for (std::size_t p = 0; p < M; ++p) {
          double s = 0.0;
          const double* row = A.data() + p * M;
          for (std::size_t m = 0; m < M; ++m) s += row[m] * I[m];
          const double v = params.f(decay * u0[p] + s);
          if (!std::isfinite(v)) throw NumericalError("limit intensity is not finite");
          next[k * M + p] = v;
          residual = std::max(residual, std::abs(v - lam.at(k, p)));
        }
      }
      for (std::size_t k = k0 + 1; k <= k1; ++k)
        std::copy_n(next.begin() + k * M, M, lam.values.begin() + k * M);
      rep.residuals.push_back(residual);
      if (residual <= options.tol) break;
    }
    // Memory integrals at the window end from the accepted iterate.
    for (std::size_t k = k0 + 1; k <= k1; ++k)
      for (std::size_t m = 0; m < M; ++m)
        carry[m] = e * carry[m] + 0.5 * dt * (e * lam.at(k - 1, m) + lam.at(k, m));
  }

  rep.a_priori_integral = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    const double L = path_integral(lam.column(m), dt);
    rep.a_priori_integral += quad.weights[m] * (L * L + L);
  }
  if (!std::isfinite(rep.a_priori_integral))
    throw NumericalError("limit intensity fails the a priori integrability check");
  if (report) *report = std::move(rep);
  return lam;
}

PotentialField integrate_neural_field(const ModelParams& params, const SpatialQuadrature& quad,
                                      double T, double dt) {
  quad.validate();
  if (!(dt > 0) || !(T > 0)) throw StructuralError("horizon and time step must be positive");
  const std::size_t K = static_cast<std::size_t>(std::llround(T / dt));
  if (K == 0 || std::abs(double(K) * dt - T) > 1e-9 * T)
    throw StructuralError("time step must divide the horizon");
  const std::size_t M = quad.size();
  const double e = std::exp(-params.alpha * dt), g = memory_factor(params.alpha, dt);
  const auto A = coupling_matrix(params.w, quad, quad.nodes);
  PotentialField u;
  u.dt = dt;
  u.steps = K;
  u.nodes = quad.nodes;
  u.values.resize((K + 1) * M);
  for (std::size_t m = 0; m < M; ++m) u.at(0, m) = params.u0(quad.nodes[m]);
  std::vector<double> rate(M);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t m = 0; m < M; ++m) rate[m] = params.f(u.at(k, m));
    for (std::size_t p = 0; p < M; ++p) {
      double s = 0.0;
      const double* row = A.data() + p * M;
      for (std::size_t m = 0; m < M; ++m) s += row[m] * rate[m];
      u.at(k + 1, p) = e * u.at(k, p) + g * s;
    }
  }
  return u;
}

double lambda_space_lipschitz_bound(const ModelParams& params, double lambda_sup, double T) {
  if (!(lambda_sup >= 0)) throw StructuralError("lambda_sup must be nonnegative");
  const double mem = T <= 0 ? 0.0 : memory_factor(params.alpha, T);
  return params.f.lip_const() *
         (params.u0.lip_const() + lambda_sup * mem * params.w.lip_const());
}

SpikeTrain simulate_limit_process(const std::vector<double>& path, double dt, double T,
                                  std::uint64_t seed, std::uint64_t replication,
                                  std::uint64_t neuron) {
  if (path.empty()) throw StructuralError("empty intensity path");
  if (T > dt * double(path.size() - 1) * (1 + 1e-12))
    throw StructuralError("horizon beyond the intensity grid");
  SpikeTrain out;
  out.neuron = neuron;
  out.horizon = T;
  const double top = *std::max_element(path.begin(), path.end());
  if (!(top > 0.0)) return out;
  BandedPoissonMeasure pi(seed, replication, neuron, top);
  for (;;) {
    const auto pt = pi.head(0);
    if (pt.t > T) break;
    pi.pop(0);
    if (pt.z < path_value(path, dt, pt.t)) out.times.push_back(pt.t);
  }
  return out;
}

SpikeTrain simulate_limit_process(const IntensityField& lambda, std::span<const double> x,
                                  double T, std::uint64_t seed, std::uint64_t replication,
                                  std::uint64_t neuron) {
  if (lambda.node_count() == 0) throw StructuralError("intensity field has no nodes");
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < lambda.node_count(); ++p) {
    const double d = norm_inf(lambda.nodes[p], x);
    if (d < bd) {
      bd = d;
      best = p;
    }
  }
  return simulate_limit_process(lambda.column(best), lambda.dt, T, seed, replication, neuron);
}

}  // namespace hawkesfield
