#include "hawkesfield/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hawkesfield/errors.hpp"

namespace hawkesfield {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// max |d/dr a exp(-r^2 / 2 s^2)| = |a| e^{-1/2} / s
double gaussian_slope(double amplitude, double width) {
  return std::abs(amplitude) * std::exp(-0.5) / width;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

// E[exp(beta |X|)] for X ~ N(m, s^2).
double folded_normal_mgf(double beta, double m, double s) {
  if (s == 0.0) return std::exp(beta * std::abs(m));
  const double half = 0.5 * beta * beta * s * s;
  return std::exp(beta * m + half) * normal_cdf(m / s + beta * s) +
         std::exp(-beta * m + half) * normal_cdf(-m / s + beta * s);
}

}  // namespace

// ---------------------------------------------------------------------------

PointSet::PointSet(std::size_t dim, std::vector<double> coords)
    : dim_(dim), coords_(std::move(coords)) {
  if (dim_ == 0 || coords_.size() % dim_ != 0)
    throw StructuralError("point coordinates do not match dimension");
}

void PointSet::push_back(std::span<const double> p) {
  if (dim_ == 0) dim_ = p.size();
  if (p.size() != dim_) throw StructuralError("point dimension mismatch");
  coords_.insert(coords_.end(), p.begin(), p.end());
}

double norm_inf(std::span<const double> a, std::span<const double> b) noexcept {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

double norm_inf(std::span<const double> a) noexcept {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

double dist2_euclid(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

double memory_factor(double alpha, double t) noexcept {
  if (std::isinf(t)) return alpha > 0.0 ? 1.0 / alpha : t;
  const double x = alpha * t;
  if (alpha < 1e-10) return t * (1.0 - x / 2.0 + x * x / 6.0);
  return -std::expm1(-x) / alpha;
}

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// ---------------------------------------------------------------------------

FiringRateFn::FiringRateFn(Variant v) : v_(std::move(v)) {
  std::visit(overloaded{
                 [&](const Sigmoid& s) {
                   require(s.f_max >= 0 && s.gain >= 0, "sigmoid needs f_max >= 0 and gain >= 0");
                   lip_ = s.f_max * s.gain / 4.0;
                 },
                 [&](const PiecewiseLinear& p) {
                   require(p.floor >= 0 && p.floor <= p.ceiling,
                           "piecewise_linear needs 0 <= floor <= ceiling");
                   lip_ = std::abs(p.slope);
                 },
                 [&](const RectifiedLinear& r) { lip_ = std::abs(r.slope); },
                 [&](const ConstantRate& c) {
                   require(c.c >= 0, "constant rate must be nonnegative");
                   lip_ = 0.0;
                 },
             },
             v_);
  f0_ = (*this)(0.0);
}

double FiringRateFn::operator()(double u) const noexcept {
  return std::visit(
      overloaded{
          [u](const Sigmoid& s) { return s.f_max / (1.0 + std::exp(-s.gain * (u - s.threshold))); },
          [u](const PiecewiseLinear& p) { return std::clamp(p.slope * u, p.floor, p.ceiling); },
          [u](const RectifiedLinear& r) { return std::max(0.0, r.slope * u + r.offset); },
          [](const ConstantRate& c) { return c.c; },
      },
      v_);
}

std::string FiringRateFn::name() const {
  static const char* names[] = {"sigmoid", "piecewise_linear", "rectified_linear", "constant"};
  return names[v_.index()];
}

// ---------------------------------------------------------------------------

SynapticWeightFn::SynapticWeightFn(Variant v, std::size_t dim) : v_(std::move(v)), dim_(dim) {
  require(dim_ >= 1, "weight dimension must be >= 1");
  const double sd = std::sqrt(static_cast<double>(dim_));
  std::visit(overloaded{
                 [&](const ConstantWeight& c) {
                   lip_ = 0.0;
                   sup_ = std::abs(c.kappa);
                 },
                 [&](const GaussianWeight& g) {
                   require(g.width > 0, "gaussian weight width must be positive");
                   lip_ = sd * gaussian_slope(g.amplitude, g.width);
                   sup_ = std::abs(g.amplitude);
                 },
                 [&](const MexicanHatWeight& m) {
                   require(m.sigma1 > 0 && m.sigma2 > 0, "mexican_hat widths must be positive");
                   lip_ = sd * (gaussian_slope(m.a1, m.sigma1) + gaussian_slope(m.a2, m.sigma2));
                   sup_ = std::abs(m.a1) + std::abs(m.a2);
                 },
                 [&](const SeparableProductWeight& s) {
                   require(s.width_pre > 0 && s.width_post > 0,
                           "separable_product widths must be positive");
                   lip_ = sd * std::abs(s.amplitude) * std::exp(-0.5) *
                          std::max(1.0 / s.width_pre, 1.0 / s.width_post);
                   sup_ = std::abs(s.amplitude);
                 },
             },
             v_);
}

double SynapticWeightFn::operator()(std::span<const double> y,
                                    std::span<const double> x) const noexcept {
  return std::visit(
      overloaded{
          [](const ConstantWeight& c) { return c.kappa; },
          [&](const GaussianWeight& g) {
            return g.amplitude * std::exp(-dist2_euclid(x, y) / (2.0 * g.width * g.width));
          },
          [&](const MexicanHatWeight& m) {
            const double r2 = dist2_euclid(x, y);
            return m.a1 * std::exp(-r2 / (2.0 * m.sigma1 * m.sigma1)) -
                   m.a2 * std::exp(-r2 / (2.0 * m.sigma2 * m.sigma2));
          },
          [&](const SeparableProductWeight& s) {
            double ny = 0.0, nx = 0.0;
            for (double v : y) ny += v * v;
            for (double v : x) nx += v * v;
            return s.amplitude * std::exp(-ny / (2.0 * s.width_pre * s.width_pre)) *
                   std::exp(-nx / (2.0 * s.width_post * s.width_post));
          },
      },
      v_);
}

bool SynapticWeightFn::is_zero() const noexcept { return sup_ == 0.0; }

std::string SynapticWeightFn::name() const {
  static const char* names[] = {"constant", "gaussian", "mexican_hat", "separable_product"};
  return names[v_.index()];
}

// ---------------------------------------------------------------------------

InitialCondition::InitialCondition(Variant v, std::size_t dim) : v_(std::move(v)) {
  std::visit(overloaded{
                 [&](const ConstantInitial& c) {
                   lip_ = 0.0;
                   sup_ = std::abs(c.u);
                 },
                 [&](const GaussianBump& g) {
                   require(g.width > 0, "gaussian_bump width must be positive");
                   require(g.center.size() == dim, "gaussian_bump center has wrong dimension");
                   lip_ = std::sqrt(static_cast<double>(dim)) * gaussian_slope(g.height, g.width);
                   sup_ = std::abs(g.height);
                 },
             },
             v_);
}

double InitialCondition::operator()(std::span<const double> x) const noexcept {
  return std::visit(overloaded{
                        [](const ConstantInitial& c) { return c.u; },
                        [&](const GaussianBump& g) {
                          return g.height *
                                 std::exp(-dist2_euclid(x, g.center) / (2.0 * g.width * g.width));
                        },
                    },
                    v_);
}

std::string InitialCondition::name() const {
  return v_.index() == 0 ? "constant" : "gaussian_bump";
}

// ---------------------------------------------------------------------------

namespace {

double interval_overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

}  // namespace

SpatialMeasure::SpatialMeasure(Variant v, double beta) : v_(std::move(v)), beta_(beta) {
  require(beta_ > 0, "exponential moment rate beta must be positive");
  std::visit(
      overloaded{
          [&](const UniformBox& u) {
            require(u.d >= 1 && u.r > 0, "uniform_box needs d >= 1 and r > 0");
            dim_ = u.d;
            // M = |X|_inf has P(M <= m) = (m/r)^d; Simpson on its density.
            const int n = 4096;
            const double h = u.r / n;
            const double dd = static_cast<double>(u.d);
            auto g = [&](double m) {
              return std::exp(beta_ * m) * dd * std::pow(m / u.r, dd - 1.0) / u.r;
            };
            double s = g(0.0) + g(u.r);
            for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * g(k * h);
            e_beta_ = std::max(1.0, s * h / 3.0);
          },
          [&](const GaussianMeasure& g) {
            require(g.d >= 1 && g.mean.size() == g.d && g.cov_diag.size() == g.d,
                    "gaussian measure needs mean and cov_diag of length d");
            dim_ = g.d;
            e_beta_ = 1.0;
            for (std::size_t k = 0; k < g.d; ++k) {
              require(g.cov_diag[k] >= 0, "gaussian cov_diag must be nonnegative");
              e_beta_ *= folded_normal_mgf(beta_, g.mean[k], std::sqrt(g.cov_diag[k]));
            }
          },
          [&](const DiracMixture& m) {
            require(!m.points.empty() && m.points.size() == m.weights.size(),
                    "dirac_mixture needs one weight per point");
            dim_ = m.points.dim();
            const double total = std::accumulate(m.weights.begin(), m.weights.end(), 0.0);
            require(std::abs(total - 1.0) <= 1e-12, "dirac_mixture weights must sum to 1");
            e_beta_ = 0.0;
            for (std::size_t i = 0; i < m.points.size(); ++i) {
              require(m.weights[i] >= 0, "dirac_mixture weights must be nonnegative");
              e_beta_ += m.weights[i] * std::exp(beta_ * norm_inf(m.points[i]));
            }
            e_beta_ = std::max(1.0, e_beta_);
          },
          [&](const GridDensity& g) {
            dim_ = g.lo.size();
            require(dim_ >= 1 && g.hi.size() == dim_ && g.resolution >= 1,
                    "grid_density needs lo/hi of equal length and resolution >= 1");
            std::size_t cells = 1;
            for (std::size_t k = 0; k < dim_; ++k) {
              require(g.hi[k] > g.lo[k], "grid_density box must have hi > lo");
              cells *= g.resolution;
            }
            require(g.masses.size() == cells, "grid_density needs resolution^d cell masses");
            const double total = std::accumulate(g.masses.begin(), g.masses.end(), 0.0);
            require(std::abs(total - 1.0) <= 1e-12, "grid_density cell masses must sum to 1");
            double far = 0.0;
            for (std::size_t k = 0; k < dim_; ++k)
              far = std::max({far, std::abs(g.lo[k]), std::abs(g.hi[k])});
            for (double m : g.masses) require(m >= 0, "grid_density masses must be nonnegative");
            // Every cell lies within |x|_inf <= far.
            e_beta_ = std::exp(beta_ * far);
          },
      },
      v_);
}

std::string SpatialMeasure::name() const {
  static const char* names[] = {"uniform_box", "gaussian", "dirac_mixture", "grid_density"};
  return names[v_.index()];
}

double SpatialMeasure::box_mass(std::span<const double> lo, std::span<const double> hi) const {
  return std::visit(
      overloaded{
          [&](const UniformBox& u) {
            double m = 1.0;
            for (std::size_t k = 0; k < dim_; ++k)
              m *= interval_overlap(lo[k], hi[k], -u.r, u.r) / (2.0 * u.r);
            return m;
          },
          [&](const GaussianMeasure& g) {
            double m = 1.0;
            for (std::size_t k = 0; k < dim_; ++k) {
              const double s = std::sqrt(g.cov_diag[k]);
              if (s == 0.0) {
                m *= (lo[k] <= g.mean[k] && g.mean[k] <= hi[k]) ? 1.0 : 0.0;
              } else {
                // Use the upper tail on the right half for accuracy far out.
                const double a = (lo[k] - g.mean[k]) / s, b = (hi[k] - g.mean[k]) / s;
                m *= (a >= 0) ? normal_cdf(-a) - normal_cdf(-b) : normal_cdf(b) - normal_cdf(a);
              }
            }
            return m;
          },
          [&](const DiracMixture& d) {
            double m = 0.0;
            for (std::size_t i = 0; i < d.points.size(); ++i) {
              auto p = d.points[i];
              bool in = true;
              for (std::size_t k = 0; k < dim_ && in; ++k) in = lo[k] <= p[k] && p[k] <= hi[k];
              if (in) m += d.weights[i];
            }
            return m;
          },
          [&](const GridDensity& g) {
            double m = 0.0;
            std::vector<std::size_t> idx(dim_, 0);
            for (std::size_t c = 0; c < g.masses.size(); ++c) {
              std::size_t rem = c;
              double frac = 1.0;
              for (std::size_t k = dim_; k-- > 0;) {
                idx[k] = rem % g.resolution;
                rem /= g.resolution;
                const double w = (g.hi[k] - g.lo[k]) / g.resolution;
                const double c0 = g.lo[k] + w * idx[k];
                frac *= interval_overlap(lo[k], hi[k], c0, c0 + w) / w;
              }
              m += frac * g.masses[c];
            }
            return m;
          },
      },
      v_);
}

bool SpatialMeasure::has_density() const noexcept {
  return !std::holds_alternative<DiracMixture>(v_);
}

double SpatialMeasure::density(std::span<const double> x) const {
  return std::visit(
      overloaded{
          [&](const UniformBox& u) {
            return norm_inf(x) <= u.r ? std::pow(2.0 * u.r, -static_cast<double>(dim_)) : 0.0;
          },
          [&](const GaussianMeasure& g) {
            double p = 1.0;
            for (std::size_t k = 0; k < dim_; ++k) {
              const double v = g.cov_diag[k];
              if (v == 0.0) throw StructuralError("degenerate gaussian has no density");
              p *= std::exp(-(x[k] - g.mean[k]) * (x[k] - g.mean[k]) / (2.0 * v)) /
                   std::sqrt(2.0 * M_PI * v);
            }
            return p;
          },
          [](const DiracMixture&) -> double {
            throw StructuralError("dirac_mixture has no Lebesgue density");
          },
          [&](const GridDensity& g) {
            std::size_t c = 0;
            double vol = 1.0;
            for (std::size_t k = 0; k < dim_; ++k) {
              const double w = (g.hi[k] - g.lo[k]) / g.resolution;
              vol *= w;
              if (x[k] < g.lo[k] || x[k] > g.hi[k]) return 0.0;
              auto i = static_cast<std::size_t>((x[k] - g.lo[k]) / w);
              c = c * g.resolution + std::min(i, g.resolution - 1);
            }
            return g.masses[c] / vol;
          },
      },
      v_);
}

double SpatialMeasure::effective_radius() const {
  return std::visit(overloaded{
                        [](const UniformBox& u) { return u.r; },
                        [](const GaussianMeasure& g) {
                          double r = 0.0;
                          for (std::size_t k = 0; k < g.d; ++k)
                            r = std::max(r, std::abs(g.mean[k]) + 8.3 * std::sqrt(g.cov_diag[k]));
                          return r;
                        },
                        [](const DiracMixture& m) {
                          double r = 0.0;
                          for (std::size_t i = 0; i < m.points.size(); ++i)
                            r = std::max(r, norm_inf(m.points[i]));
                          return r;
                        },
                        [](const GridDensity& g) {
                          double r = 0.0;
                          for (std::size_t k = 0; k < g.lo.size(); ++k)
                            r = std::max({r, std::abs(g.lo[k]), std::abs(g.hi[k])});
                          return r;
                        },
                    },
                    v_);
}

void SpatialMeasure::sample(Stream& stream, std::span<double> out) const {
  std::visit(overloaded{
                 [&](const UniformBox& u) {
                   for (auto& v : out) v = -u.r + 2.0 * u.r * stream.uniform();
                 },
                 [&](const GaussianMeasure& g) {
                   for (std::size_t k = 0; k < dim_; ++k)
                     out[k] = g.mean[k] + std::sqrt(g.cov_diag[k]) * stream.normal();
                 },
                 [&](const DiracMixture& m) {
                   double v = stream.uniform();
                   std::size_t i = 0;
                   for (; i + 1 < m.weights.size(); ++i) {
                     if (v < m.weights[i]) break;
                     v -= m.weights[i];
                   }
                   auto p = m.points[i];
                   std::copy(p.begin(), p.end(), out.begin());
                 },
                 [&](const GridDensity& g) {
                   double v = stream.uniform();
                   std::size_t c = 0;
                   for (; c + 1 < g.masses.size(); ++c) {
                     if (v < g.masses[c]) break;
                     v -= g.masses[c];
                   }
                   for (std::size_t k = dim_; k-- > 0;) {
                     const std::size_t i = c % g.resolution;
                     c /= g.resolution;
                     const double w = (g.hi[k] - g.lo[k]) / g.resolution;
                     out[k] = g.lo[k] + w * (i + stream.uniform());
                   }
                 },
             },
             v_);
}

// ---------------------------------------------------------------------------

void ModelParams::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be >= 0", "/alpha");
  if (w.dim() != rho.dim()) throw ConfigError("weight dimension differs from rho dimension");
  if (const auto* g = std::get_if<GaussianBump>(&u0.variant()); g && g->center.size() != dim())
    throw ConfigError("initial center dimension differs from rho dimension", "/initial/center");
}

double contraction_constant(const ModelParams& params, double T, double w_l1_sup) {
  return memory_factor(params.alpha, T) * params.f.lip_const() * w_l1_sup;
}

}  // namespace hawkesfield
