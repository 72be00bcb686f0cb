#include "hawkesfield/quantize.hpp"

#include <algorithm>
#include <cmath>

#include "hawkesfield/errors.hpp"

namespace hawkesfield {

void DiscreteMeasure::validate() const {
  if (weights.empty() || support.size() != weights.size())
    throw StructuralError("discrete measure needs a nonempty support with one weight per point");
  double s = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw StructuralError("discrete measure weights must be nonnegative");
    s += w;
  }
  if (std::abs(s - 1.0) > 1e-12) throw StructuralError("discrete measure weights must sum to 1");
}

DiscreteMeasure DiscreteMeasure::empirical(PointSet points) {
  DiscreteMeasure m;
  const std::size_t n = points.size();
  m.support = std::move(points);
  m.weights.assign(n, n ? 1.0 / double(n) : 0.0);
  return m;
}

namespace {

std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  while (e--) r *= b;
  return r;
}

// floor(k^{1/d}) in exact integer arithmetic.
std::size_t integer_root(std::size_t k, std::size_t d) {
  if (k == 0) return 0;
  std::size_t m = static_cast<std::size_t>(std::floor(std::pow(double(k), 1.0 / double(d))));
  while (m > 1 && ipow(m, d) > k) --m;
  while (ipow(m + 1, d) <= k) ++m;
  return std::max<std::size_t>(m, 1);
}

std::size_t bin_of(double x, double r, std::size_t m) {
  const double s = (x + r) / (2.0 * r) * double(m);
  if (s <= 0.0) return 0;
  const std::size_t b = static_cast<std::size_t>(s);
  return std::min(b, m - 1);
}

}  // namespace

double g_bound(std::size_t d, double r, std::size_t N) {
  if (d == 0 || N == 0) throw StructuralError("g_d needs d >= 1 and N >= 1");
  const double n = double(N);
  if (d == 1) return 4.0 * M_PI * M_PI * r / 6.0 / std::sqrt(n);
  return 4.0 * r * std::pow((1.0 + std::log(n)) / n, 1.0 / double(d));
}

TruncatedMeasure truncate_measure(const SpatialMeasure& rho, double r, std::size_t resolution) {
  if (!(r > 0)) throw StructuralError("truncation radius must be positive");
  if (resolution == 0) throw StructuralError("resolution must be positive");
  TruncatedMeasure t;
  t.dim = rho.dim();
  t.r = r;
  t.resolution = resolution;
  t.tail_bound = rho.exp_moment_value() * r * r * std::exp(-rho.exp_moment_rate() * r);
  const std::size_t d = t.dim;
  t.atoms.support = PointSet(d, 0);
  double inside = 0.0;

  if (const auto* m = std::get_if<DiracMixture>(&rho.variant())) {
    t.rasterized = false;
    for (std::size_t i = 0; i < m->points.size(); ++i) {
      if (m->weights[i] <= 0.0 || norm_inf(m->points[i]) > r) continue;
      t.atoms.support.push_back(m->points[i]);
      t.atoms.weights.push_back(m->weights[i]);
      inside += m->weights[i];
    }
  } else {
    const double h = 2.0 * r / double(resolution);
    const std::size_t cells = ipow(resolution, d);
    std::vector<double> a(d), b(d), c(d);
    for (std::size_t cell = 0; cell < cells; ++cell) {
      std::size_t rem = cell;
      for (std::size_t k = d; k-- > 0;) {
        const std::size_t i = rem % resolution;
        rem /= resolution;
        a[k] = -r + h * double(i);
        b[k] = i + 1 == resolution ? r : a[k] + h;
        c[k] = 0.5 * (a[k] + b[k]);
      }
      const double mass = rho.box_mass(a, b);
      if (mass <= 0.0) continue;
      t.atoms.support.push_back(c);
      t.atoms.weights.push_back(mass);
      inside += mass;
    }
  }
  t.atom_weight = 1.0 - inside;
  if (t.atom_weight < 1e-14) t.atom_weight = 0.0;
  if (t.atom_weight > 0.0) {
    t.atoms.support.push_back(std::vector<double>(d, 0.0));
    t.atoms.weights.push_back(t.atom_weight);
  }
  // Renormalize rounding drift only.
  double s = 0.0;
  for (double w : t.atoms.weights) s += w;
  for (double& w : t.atoms.weights) w /= s;
  return t;
}

Cube find_heavy_cube(const PointSet& points, const std::vector<double>& mass, double r,
                     double cell_width, std::size_t N) {
  if (points.size() != mass.size() || points.empty()) throw StructuralError("atoms and masses differ");
  if (N == 0) throw StructuralError("N must be positive");
  const std::size_t d = points.dim();
  double total = 0.0;
  for (double v : mass) total += v;
  const double unit = 1.0 / double(N);
  if (total < unit * (1.0 - 1e-9)) throw StructuralError("measure carries less than 1/N mass");
  const std::size_t k = static_cast<std::size_t>(std::llround(total * double(N)));
  const std::size_t m = integer_root(std::max<std::size_t>(k, 1), d);
  const double side = 2.0 * r / double(m);
  if (cell_width > side * (1.0 + 1e-12))
    throw ResolutionError("grid cell " + std::to_string(cell_width) + " is wider than the subcube side " +
                          std::to_string(side) + "; refine the rasterization");

  std::vector<double> bins(ipow(m, d), 0.0);
  for (std::size_t a = 0; a < points.size(); ++a) {
    if (mass[a] == 0.0) continue;
    std::size_t idx = 0;
    for (std::size_t c = 0; c < d; ++c) idx = idx * m + bin_of(points[a][c], r, m);
    bins[idx] += mass[a];
  }
  std::size_t best = 0;
  for (std::size_t b = 1; b < bins.size(); ++b)
    if (bins[b] > bins[best] * (1.0 + 1e-12)) best = b;  // near-ties keep the earlier index
  if (bins[best] < unit * (1.0 - 1e-9))
    throw NumericalError("no subcube holds 1/N mass; pigeonhole violated by rounding");

  Cube cube;
  cube.center.resize(d);
  cube.mass = bins[best];
  cube.subdivisions = m;
  cube.index.resize(d);
  std::size_t rem = best;
  for (std::size_t c = d; c-- > 0;) {
    cube.index[c] = rem % m;
    rem /= m;
  }
  // Tight box around the selected cells, clipped to the subcube: it holds the
  // same mass and its radius never exceeds the subcube's.
  std::vector<double> lo(d, INFINITY), hi(d, -INFINITY);
  for (std::size_t a = 0; a < points.size(); ++a) {
    if (mass[a] == 0.0) continue;
    bool in = true;
    for (std::size_t c = 0; c < d && in; ++c) in = bin_of(points[a][c], r, m) == cube.index[c];
    if (!in) continue;
    for (std::size_t c = 0; c < d; ++c) {
      lo[c] = std::min(lo[c], points[a][c] - 0.5 * cell_width);
      hi[c] = std::max(hi[c], points[a][c] + 0.5 * cell_width);
    }
  }
  cube.radius = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    const double a = -r + side * double(cube.index[c]);
    lo[c] = std::max(lo[c], a);
    hi[c] = std::min(hi[c], a + side);
    cube.center[c] = 0.5 * (lo[c] + hi[c]);
    cube.radius = std::max(cube.radius, 0.5 * (hi[c] - lo[c]));
  }
  return cube;
}

QuantizedMeasure quantize_measure(const TruncatedMeasure& rho_r, std::size_t N) {
  if (N == 0) throw StructuralError("N must be positive");
  rho_r.atoms.validate();
  const std::size_t d = rho_r.dim;
  const double r = rho_r.r;
  const double cell = rho_r.cell_width();

  QuantizedMeasure q;
  q.dim = d;
  q.N = N;
  q.r = r;
  q.points = PointSet(d, 0);
  q.certified_bound = g_bound(d, r, N);
  q.tail_bound = rho_r.tail_bound;
  q.proxy_cell_width = cell;

  const PointSet& pts = rho_r.atoms.support;
  std::vector<double> mass = rho_r.atoms.weights;
  const double unit = 1.0 / double(N);
  double cost = 0.0;

  for (std::size_t j = 0; j < N; ++j) {
    const Cube cube = find_heavy_cube(pts, mass, r, cell, N);
    const double take = std::min(1.0, unit / cube.mass);
    for (std::size_t a = 0; a < pts.size(); ++a) {
      if (mass[a] == 0.0) continue;
      bool in = true;
      for (std::size_t c = 0; c < d && in; ++c)
        in = bin_of(pts[a][c], r, cube.subdivisions) == cube.index[c];
      if (!in) continue;
      const double moved = mass[a] * take;
      const double dist = norm_inf(pts[a], cube.center);
      cost += moved * dist * dist;
      mass[a] -= moved;
      if (mass[a] < 0.0) mass[a] = 0.0;
    }
    q.points.push_back(cube.center);
    q.diameters.push_back(2.0 * cube.radius);
    double left = 0.0;
    for (double v : mass) left += v;
    q.residual_mass.push_back(left);
  }
  q.coupling_w2 = std::sqrt(cost);
  return q;
}

PointSet scenario_s1_positions(const SpatialMeasure& rho, std::size_t N, std::uint64_t seed,
                               std::uint64_t draw) {
  Stream s({seed, draw, kPositionStream, 0});
  PointSet out(rho.dim(), N);
  for (std::size_t i = 0; i < N; ++i) rho.sample(s, out[i]);
  return out;
}

std::size_t proxy_resolution(std::size_t d, std::size_t N, std::size_t refine) {
  return refine * integer_root(N, d);
}

QuantizedMeasure scenario_s2_positions(const SpatialMeasure& rho, std::size_t N, double epsilon,
                                       std::size_t resolution) {
  const std::size_t d = rho.dim();
  if (!(epsilon > 0) || !(epsilon < 1.0 / double(d + 2)))
    throw ConfigError("epsilon must lie in (0, 1/(d+2))", "/quantization/epsilon");
  const double r = std::pow(double(N), epsilon);
  if (resolution == 0) resolution = proxy_resolution(d, N, 8);
  return quantize_measure(truncate_measure(rho, r, resolution), N);
}

}  // namespace hawkesfield
