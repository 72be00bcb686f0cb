#include <cmath>

#include "../common/oracles.hpp"
#include "doctest.h"
#include "hawkesfield/errors.hpp"
#include "hawkesfield/limit_field.hpp"

using namespace hawkesfield;

namespace {

ModelParams relu_const(double kappa, double u, double alpha) {
  return ModelParams{FiringRateFn(RectifiedLinear{1.0, 0.0}),
                     SynapticWeightFn(ConstantWeight{kappa}, 1),
                     InitialCondition(ConstantInitial{u}, 1), alpha,
                     SpatialMeasure(UniformBox{1, 1.0})};
}

ModelParams bumpy(double amp) {
  return ModelParams{FiringRateFn(Sigmoid{2.0, 1.5, 0.2}),
                     SynapticWeightFn(MexicanHatWeight{amp, 0.3, 0.5 * amp, 0.8}, 1),
                     InitialCondition(GaussianBump{1.0, {0.2}, 0.3}, 1), 1.0,
                     SpatialMeasure(GaussianMeasure{1, {0.0}, {0.25}})};
}

IntensityField constant_field(const SpatialQuadrature& q, double dt, std::size_t K, double v) {
  IntensityField f;
  f.dt = dt;
  f.steps = K;
  f.nodes = q.nodes;
  f.values.assign((K + 1) * q.size(), v);
  return f;
}

double sup_error_closed_form(const GridField& f, double u, double rate) {
  double e = 0.0;
  for (std::size_t k = 0; k <= f.steps; ++k)
    for (std::size_t p = 0; p < f.node_count(); ++p)
      e = std::max(e, std::abs(f.at(k, p) - u * std::exp(rate * f.time(k))));
  return e;
}

}  // namespace

TEST_CASE("grid quadrature is a probability vector") {
  for (const auto& rho : {SpatialMeasure(UniformBox{2, 1.5}), SpatialMeasure(GaussianMeasure{1, {0.3}, {2.0}})}) {
    const auto q = grid_quadrature(rho, 12);
    CHECK_NOTHROW(q.validate());
  }
  PointSet pts(1, std::vector<double>{0.0, 1.0});
  const auto q = grid_quadrature(SpatialMeasure(DiracMixture{pts, {0.3, 0.7}}), 5);
  CHECK(q.size() == 2);
}

TEST_CASE("picard map without interaction ignores lambda") {
  auto p = bumpy(0.0);
  const auto q = grid_quadrature(p.rho, 10);
  for (double v : {0.0, 3.0}) {
    const auto out = picard_map(constant_field(q, 0.01, 50, v), p, q);
    for (std::size_t k = 0; k <= out.steps; ++k)
      for (std::size_t m = 0; m < q.size(); ++m)
        CHECK(out.at(k, m) == doctest::Approx(p.f(std::exp(-out.time(k)) * p.u0(q.nodes[m]))).epsilon(1e-14));
  }
}

TEST_CASE("picard map rejects mismatched grids") {
  auto p = bumpy(1.0);
  const auto q = grid_quadrature(p.rho, 10);
  const auto q2 = grid_quadrature(p.rho, 11);
  CHECK_THROWS_AS(picard_map(constant_field(q2, 0.01, 10, 1.0), p, q), StructuralError);
}

TEST_CASE("picard map reproduces the exponential fixed point to second order") {
  const double kappa = 1.5, u = 0.7, alpha = 0.5, T = 1.0;
  const auto p = relu_const(kappa, u, alpha);
  const auto q = grid_quadrature(p.rho, 4);
  std::vector<double> errs;
  for (double dt : {0.02, 0.01, 0.005}) {
    const std::size_t K = std::llround(T / dt);
    IntensityField exact = constant_field(q, dt, K, 0.0);
    for (std::size_t k = 0; k <= K; ++k)
      for (std::size_t m = 0; m < q.size(); ++m) exact.at(k, m) = u * std::exp((kappa - alpha) * exact.time(k));
    errs.push_back(sup_error_closed_form(picard_map(exact, p, q), u, kappa - alpha));
  }
  CHECK(errs[0] / errs[1] > 3.5);
  CHECK(errs[1] / errs[2] > 3.5);
}

TEST_CASE("solver: constant rate without interaction") {
  ModelParams p{FiringRateFn(ConstantRate{1.3}), SynapticWeightFn(ConstantWeight{0.0}, 1),
                InitialCondition(ConstantInitial{0.4}, 1), 1.0, SpatialMeasure(UniformBox{1, 1.0})};
  const auto q = grid_quadrature(p.rho, 5);
  const auto lam = solve_limit_intensity(p, q, 1.0, 0.01);
  for (double v : lam.values) CHECK(v == 1.3);
}

TEST_CASE("solver: kappa = alpha gives a constant intensity") {
  const auto p = relu_const(1.2, 0.8, 1.2);
  const auto q = grid_quadrature(p.rho, 4);
  const auto lam = solve_limit_intensity(p, q, 1.0, 1e-3);
  CHECK(sup_error_closed_form(lam, 0.8, 0.0) < 1e-6);
}

TEST_CASE("solver: second-order convergence to the closed form, with and without windows") {
  for (double kappa : {1.0, 4.0}) {
    const double u = 0.5, alpha = 0.5, T = 1.0;
    const auto p = relu_const(kappa, u, alpha);
    const auto q = grid_quadrature(p.rho, 3);
    std::vector<double> errs;
    SolveReport rep;
    for (double dt : {4e-3, 2e-3, 1e-3}) {
      const auto lam = solve_limit_intensity(p, q, T, dt, {}, &rep);
      errs.push_back(sup_error_closed_form(lam, u, kappa - alpha));
    }
    CAPTURE(kappa);
    CHECK((rep.contraction >= 1) == (rep.windows > 1));
    CHECK((kappa > 2) == (rep.windows > 1));
    CHECK(std::log2(errs[0] / errs[1]) >= 1.8);
    CHECK(std::log2(errs[1] / errs[2]) >= 1.8);
    CHECK(errs[2] / (u * std::exp((kappa - alpha) * T)) < 1e-5);
  }
}

TEST_CASE("solver: residuals contract at least as fast as the constant") {
  for (double amp : {0.3, 0.8, 1.2}) {
    const auto p = bumpy(amp);
    const auto q = grid_quadrature(p.rho, 24);
    SolveReport rep;
    solve_limit_intensity(p, q, 1.0, 5e-3, {}, &rep);
    if (rep.contraction >= 1) continue;
    for (std::size_t i = 1; i < rep.residuals.size(); ++i)
      if (rep.residuals[i - 1] > 1e-13) CHECK(rep.residuals[i] / rep.residuals[i - 1] <= rep.contraction + 0.05);
  }
}

TEST_CASE("solver: non-convergence is reported") {
  const auto p = bumpy(1.0);
  const auto q = grid_quadrature(p.rho, 10);
  SolveOptions o;
  o.max_iter = 2;
  o.tol = 1e-14;
  CHECK_THROWS_AS(solve_limit_intensity(p, q, 1.0, 0.01, o), ConvergenceError);
}

TEST_CASE("membrane potential: consistency with lambda and trivial cases") {
  const auto p = bumpy(1.0);
  const auto q = grid_quadrature(p.rho, 20);
  SolveOptions o;
  o.tol = 1e-10;
  const auto lam = solve_limit_intensity(p, q, 1.0, 0.01, o);
  const auto u = membrane_potential(lam, p, q);
  for (std::size_t k = 0; k <= lam.steps; ++k)
    for (std::size_t m = 0; m < q.size(); ++m) REQUIRE(std::abs(p.f(u.at(k, m)) - lam.at(k, m)) <= 1e-10);
  for (std::size_t m = 0; m < q.size(); ++m) CHECK(u.at(0, m) == p.u0(q.nodes[m]));

  const auto z = bumpy(0.0);
  const auto lz = solve_limit_intensity(z, q, 1.0, 0.01);
  const auto uz = membrane_potential(lz, z, q);
  for (std::size_t k = 0; k <= lz.steps; ++k)
    for (std::size_t m = 0; m < q.size(); ++m)
      CHECK(uz.at(k, m) == doctest::Approx(std::exp(-uz.time(k)) * z.u0(q.nodes[m])).epsilon(1e-14));

  const auto r = relu_const(1.5, 0.7, 0.5);
  const auto qr = grid_quadrature(r.rho, 3);
  const auto ur = membrane_potential(solve_limit_intensity(r, qr, 1.0, 1e-3), r, qr);
  CHECK(sup_error_closed_form(ur, 0.7, 1.0) < 1e-5);
}

TEST_CASE("neural field integrator") {
  const auto z = bumpy(0.0);
  const auto q = grid_quadrature(z.rho, 16);
  const auto uz = integrate_neural_field(z, q, 1.0, 0.01);
  for (std::size_t k = 0; k <= uz.steps; ++k)
    for (std::size_t m = 0; m < q.size(); ++m)
      CHECK(uz.at(k, m) == doctest::Approx(std::exp(-uz.time(k)) * z.u0(q.nodes[m])).epsilon(1e-12));

  // closed form, first order
  const auto r = relu_const(1.5, 0.7, 0.5);
  const auto qr = grid_quadrature(r.rho, 3);
  std::vector<double> e;
  for (double dt : {0.01, 0.005, 0.0025}) e.push_back(sup_error_closed_form(integrate_neural_field(r, qr, 1.0, dt), 0.7, 1.0));
  CHECK(std::log2(e[0] / e[1]) > 0.9);
  CHECK(std::log2(e[1] / e[2]) > 0.9);

  // cross-check against the Picard potential under refinement
  const auto p = bumpy(1.0);
  const auto qp = grid_quadrature(p.rho, 16);
  std::vector<double> dts{0.02, 0.01, 0.005, 0.0025}, gaps;
  for (double dt : dts) {
    SolveOptions o;
    o.tol = 1e-11;
    const auto up = membrane_potential(solve_limit_intensity(p, qp, 1.0, dt, o), p, qp);
    const auto un = integrate_neural_field(p, qp, 1.0, dt);
    double g = 0;
    for (std::size_t i = 0; i < up.values.size(); ++i) g = std::max(g, std::abs(up.values[i] - un.values[i]));
    gaps.push_back(g);
  }
  CHECK(oracle::loglog_slope(dts, gaps) >= 1.0 - 0.05);
}

TEST_CASE("lambda space Lipschitz bound examples") {
  ModelParams c{FiringRateFn(ConstantRate{1.0}), SynapticWeightFn(GaussianWeight{1.0, 0.5}, 1),
                InitialCondition(GaussianBump{1.0, {0.0}, 0.5}, 1), 1.0, SpatialMeasure(UniformBox{1, 1.0})};
  CHECK(lambda_space_lipschitz_bound(c, 5.0, 1.0) == 0.0);
  const auto p = bumpy(1.0);
  CHECK(lambda_space_lipschitz_bound(p, 3.0, 0.0) == doctest::Approx(p.f.lip_const() * p.u0.lip_const()));
  // L_f = L_w = L_u0 = 1, lambda_sup = 2, alpha = 1, T = inf -> 3; built from
  // scaled kernels with unit constants
  const double s = 1.0 / std::exp(-0.5);
  ModelParams u{FiringRateFn(RectifiedLinear{1.0, 0.0}), SynapticWeightFn(GaussianWeight{s, 1.0}, 1),
                InitialCondition(GaussianBump{s, {0.0}, 1.0}, 1), 1.0, SpatialMeasure(UniformBox{1, 1.0})};
  REQUIRE(u.w.lip_const() == doctest::Approx(1.0));
  REQUIRE(u.u0.lip_const() == doctest::Approx(1.0));
  CHECK(lambda_space_lipschitz_bound(u, 2.0, INFINITY) == doctest::Approx(3.0));
}

TEST_CASE("solved lambda: spatial Lipschitz bound and refinement stability") {
  const auto p = bumpy(1.0);
  SolveOptions o;
  const auto q = grid_quadrature(p.rho, 40);
  const auto lam = solve_limit_intensity(p, q, 1.0, 0.01, o);
  const double L = lambda_space_lipschitz_bound(p, lam.sup_norm(), 1.0);
  double worst = 0.0;
  for (std::size_t k = 0; k <= lam.steps; k += 10)
    for (std::size_t a = 0; a < q.size(); ++a)
      for (std::size_t b = a + 1; b < q.size(); ++b)
        worst = std::max(worst, std::abs(lam.at(k, a) - lam.at(k, b)) / norm_inf(q.nodes[a], q.nodes[b]));
  CHECK(worst <= L);
  const auto q2 = grid_quadrature(p.rho, 80);
  const auto lam2 = solve_limit_intensity(p, q2, 1.0, 0.01, o);
  CHECK(std::abs(lam2.sup_norm() - lam.sup_norm()) < 0.05 * lam.sup_norm());
  for (double v : lam.values) CHECK((v >= 0 && std::isfinite(v)));
}

TEST_CASE("limit process sampler") {
  const double dt = 0.01, T = 1.0;
  std::vector<double> zero(101, 0.0);
  CHECK(simulate_limit_process(zero, dt, T, 1, 0, 0).times.empty());
  const double c = 2.2;
  std::vector<double> flat(101, c);
  double s = 0;
  const int R = 4000;
  for (int r = 0; r < R; ++r) s += double(simulate_limit_process(flat, dt, T, 2, r, 7).count());
  CHECK(std::abs(s / R - c * T) <= 4 * std::sqrt(c * T / R));

  const double u = 0.8, g = 1.0;  // kappa - alpha
  std::vector<double> ex(101);
  for (std::size_t k = 0; k <= 100; ++k) ex[k] = u * std::exp(g * dt * double(k));
  double s2 = 0, ss = 0;
  for (int r = 0; r < R; ++r) {
    const double z = double(simulate_limit_process(ex, dt, T, 3, r, 1).count());
    s2 += z;
    ss += z * z;
  }
  const double m = s2 / R, se = std::sqrt((ss / R - m * m) / R);
  CHECK(std::abs(m - u * (std::exp(g * T) - 1) / g) <= 3.5 * se);
}
