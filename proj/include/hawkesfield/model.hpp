#pragma once

// Parameter catalog: firing rates, synaptic weights, initial conditions and
// spatial measures, each carrying its analytic constants.
//
// Norm convention: R^d carries the l-infinity norm everywhere in this library
// (cube geometry, Wasserstein costs, Lipschitz constants). Radial kernels are
// shaped by the Euclidean distance; their declared Lipschitz constants are the
// Euclidean ones times sqrt(d), which makes them valid for l-infinity.

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hawkesfield/rng.hpp"

namespace hawkesfield {

// N points in R^d stored row-major.
class PointSet {
 public:
  PointSet() = default;
  PointSet(std::size_t dim, std::vector<double> coords);
  PointSet(std::size_t dim, std::size_t count, double fill = 0.0)
      : dim_(dim), coords_(dim * count, fill) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  bool empty() const noexcept { return size() == 0; }

  std::span<const double> operator[](std::size_t i) const noexcept {
    return {coords_.data() + i * dim_, dim_};
  }
  std::span<double> operator[](std::size_t i) noexcept {
    return {coords_.data() + i * dim_, dim_};
  }
  void push_back(std::span<const double> p);
  const std::vector<double>& coords() const noexcept { return coords_; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
};

double norm_inf(std::span<const double> a, std::span<const double> b) noexcept;
double norm_inf(std::span<const double> a) noexcept;
double dist2_euclid(std::span<const double> a, std::span<const double> b) noexcept;

// (1 - exp(-alpha * t)) / alpha, continuous at alpha = 0 and valid for
// t = +inf when alpha > 0.
double memory_factor(double alpha, double t) noexcept;

// Standard normal CDF.
double normal_cdf(double z) noexcept;

// ---------------------------------------------------------------------------
// Firing rates f : R -> R_+

struct Sigmoid {
  double f_max = 1.0, gain = 1.0, threshold = 0.0;
};
// clamp(slope * u, floor, ceiling) with 0 <= floor <= ceiling.
struct PiecewiseLinear {
  double slope = 1.0, floor = 0.0, ceiling = 1.0;
};
// max(0, slope * u + offset).
struct RectifiedLinear {
  double slope = 1.0, offset = 0.0;
};
struct ConstantRate {
  double c = 1.0;
};

class FiringRateFn {
 public:
  using Variant = std::variant<Sigmoid, PiecewiseLinear, RectifiedLinear, ConstantRate>;

  explicit FiringRateFn(Variant v);

  double operator()(double u) const noexcept;
  double lip_const() const noexcept { return lip_; }
  double value_at_zero() const noexcept { return f0_; }
  const Variant& variant() const noexcept { return v_; }
  std::string name() const;

 private:
  Variant v_;
  double lip_ = 0.0;
  double f0_ = 0.0;
};

// ---------------------------------------------------------------------------
// Synaptic weights w(y, x): y presynaptic, x postsynaptic.

struct ConstantWeight {
  double kappa = 0.0;
};
struct GaussianWeight {
  double amplitude = 1.0, width = 1.0;
};
struct MexicanHatWeight {
  double a1 = 1.0, sigma1 = 0.5, a2 = 0.5, sigma2 = 1.0;
};
// amplitude * exp(-|y|^2 / 2 s_pre^2) * exp(-|x|^2 / 2 s_post^2)
struct SeparableProductWeight {
  double amplitude = 1.0, width_pre = 1.0, width_post = 1.0;
};

class SynapticWeightFn {
 public:
  using Variant =
      std::variant<ConstantWeight, GaussianWeight, MexicanHatWeight, SeparableProductWeight>;

  SynapticWeightFn(Variant v, std::size_t dim);

  double operator()(std::span<const double> y, std::span<const double> x) const noexcept;
  double lip_const() const noexcept { return lip_; }
  // Upper bound on sup over (y, x) of |w|; every catalog variant is
  // globally bounded.
  double sup_bound() const noexcept { return sup_; }
  bool is_zero() const noexcept;
  std::size_t dim() const noexcept { return dim_; }
  const Variant& variant() const noexcept { return v_; }
  std::string name() const;

 private:
  Variant v_;
  std::size_t dim_;
  double lip_ = 0.0;
  double sup_ = 0.0;
};

// ---------------------------------------------------------------------------
// Initial conditions u0 : R^d -> R

struct ConstantInitial {
  double u = 0.0;
};
struct GaussianBump {
  double height = 1.0;
  std::vector<double> center;
  double width = 1.0;
};

class InitialCondition {
 public:
  using Variant = std::variant<ConstantInitial, GaussianBump>;

  InitialCondition(Variant v, std::size_t dim);

  double operator()(std::span<const double> x) const noexcept;
  double lip_const() const noexcept { return lip_; }
  double sup_norm() const noexcept { return sup_; }
  const Variant& variant() const noexcept { return v_; }
  std::string name() const;

 private:
  Variant v_;
  double lip_ = 0.0;
  double sup_ = 0.0;
};

// ---------------------------------------------------------------------------
// Spatial measures rho on R^d

// Uniform on [-r, r]^d.
struct UniformBox {
  std::size_t d = 1;
  double r = 1.0;
};
struct GaussianMeasure {
  std::size_t d = 1;
  std::vector<double> mean;
  std::vector<double> cov_diag;
};
struct DiracMixture {
  PointSet points;
  std::vector<double> weights;
};
// Piecewise-constant density on the box [lo, hi] (per axis) split into
// resolution^d equal cells. Masses are row-major with the last axis fastest.
struct GridDensity {
  std::vector<double> lo, hi;
  std::size_t resolution = 1;
  std::vector<double> masses;
};

class SpatialMeasure {
 public:
  using Variant = std::variant<UniformBox, GaussianMeasure, DiracMixture, GridDensity>;

  // beta is the exponential-moment rate; E_beta is computed (or bounded
  // from above) analytically.
  explicit SpatialMeasure(Variant v, double beta = 1.0);

  std::size_t dim() const noexcept { return dim_; }
  double exp_moment_rate() const noexcept { return beta_; }
  double exp_moment_value() const noexcept { return e_beta_; }
  const Variant& variant() const noexcept { return v_; }
  std::string name() const;

  // Mass of the axis-aligned box [lo, hi].
  double box_mass(std::span<const double> lo, std::span<const double> hi) const;
  // Lebesgue density; throws StructuralError for dirac_mixture.
  double density(std::span<const double> x) const;
  bool has_density() const noexcept;
  // Half-width of an l-infinity ball centred at 0 holding all but a
  // negligible (<1e-15) fraction of the mass.
  double effective_radius() const;

  void sample(Stream& stream, std::span<double> out) const;

 private:
  Variant v_;
  std::size_t dim_ = 1;
  double beta_ = 1.0;
  double e_beta_ = 1.0;
};

// ---------------------------------------------------------------------------

struct ModelParams {
  FiringRateFn f;
  SynapticWeightFn w;
  InitialCondition u0;
  double alpha = 0.0;
  SpatialMeasure rho;

  std::size_t dim() const noexcept { return rho.dim(); }
  // Throws ConfigError on alpha < 0 or dimension mismatches.
  void validate() const;
};

// (1 - e^{-alpha T}) / alpha * L_f * w_l1_sup, the Lipschitz constant of the
// limit-intensity map over a window of length T.
double contraction_constant(const ModelParams& params, double T, double w_l1_sup);

}  // namespace hawkesfield
