#pragma once

// Deterministic positions from a spatial measure: truncate to [-r, r]^d,
// rasterize onto a fine grid, then extract N pieces of mass 1/N from ever
// larger cubes. The empirical measure of the cube centres sits within
// g_d(r, N) of the truncated measure in W_2 (l-infinity ground metric).

#include <cstdint>
#include <vector>

#include "hawkesfield/discrete.hpp"
#include "hawkesfield/model.hpp"

namespace hawkesfield {

struct TruncatedMeasure {
  std::size_t dim = 1;
  double r = 1.0;
  std::size_t resolution = 1;  // grid cells per axis on [-r, r]^d
  bool rasterized = true;      // false for Dirac mixtures (no grid)
  // Cell centres with cell masses (zero cells dropped) and, when positive,
  // the origin atom carrying the mass outside the box. Dirac mixtures keep
  // their own atoms.
  DiscreteMeasure atoms;
  double atom_weight = 0.0;
  // E_beta r^2 e^{-beta r}: the tail term of the truncation error.
  double tail_bound = 0.0;

  double cell_width() const noexcept { return rasterized ? 2.0 * r / double(resolution) : 0.0; }
};

TruncatedMeasure truncate_measure(const SpatialMeasure& rho, double r, std::size_t resolution);

struct Cube {
  std::vector<double> center;
  double radius = 0.0;  // largest half side, l-infinity
  double mass = 0.0;
  std::size_t subdivisions = 1;     // m
  std::vector<std::size_t> index;   // bin per axis
};

// Splits [-r, r]^d into m^d half-open subcubes (the top bin closed) with
// m = floor(k^{1/d}), k = round(N |nu|), and picks the heaviest one (ties by
// lexicographic index). The returned cube is the tight box of the picked
// cells (atoms widened by half a cell) clipped to that subcube, so a point
// mass yields radius 0. nu is given by atom masses `mass` on `points`.
// Throws ResolutionError when the grid cell is wider than the subcube side.
Cube find_heavy_cube(const PointSet& points, const std::vector<double>& mass, double r,
                     double cell_width, std::size_t N);

struct QuantizedMeasure {
  std::size_t dim = 1;
  std::size_t N = 0;
  double r = 1.0;
  PointSet points;                // cube centres in extraction order
  std::vector<double> diameters;  // diameters[j] <= 4 r (N - j)^{-1/d}
  double certified_bound = 0.0;   // g_d(r, N)
  // W_2 cost of the construction's own coupling against the proxy atoms.
  double coupling_w2 = 0.0;
  double tail_bound = 0.0;
  double proxy_cell_width = 0.0;
  // Residual mass after each step; ideally (N - j - 1) / N.
  std::vector<double> residual_mass;

  DiscreteMeasure empirical() const { return DiscreteMeasure::empirical(points); }
};

QuantizedMeasure quantize_measure(const TruncatedMeasure& rho_r, std::size_t N);

// g_1 = (4 pi^2 r / 6) N^{-1/2}; g_d = 4 r ((1 + ln N) / N)^{1/d} for d >= 2.
double g_bound(std::size_t d, double r, std::size_t N);

// i.i.d. draws from rho on the position stream of (seed, draw).
PointSet scenario_s1_positions(const SpatialMeasure& rho, std::size_t N, std::uint64_t seed,
                               std::uint64_t draw = 0);

// Smallest proxy resolution meeting the refinement rule: `refine` grid cells
// per side of the finest construction cube.
std::size_t proxy_resolution(std::size_t d, std::size_t N, std::size_t refine);

// Truncate at r_N = N^epsilon and quantize; resolution 0 picks
// proxy_resolution(d, N, 8).
QuantizedMeasure scenario_s2_positions(const SpatialMeasure& rho, std::size_t N, double epsilon,
                                       std::size_t resolution = 0);

}  // namespace hawkesfield
