#pragma once

// Per-neuron Poisson random measure Pi_i on [0, inf) x [0, inf) with Lebesgue
// intensity, generated lazily in height bands so that only the region below
// the current rate bound is ever materialized. The realization is fixed by
// (seed, replication, neuron): reading it with different bounds, or from two
// processes at once, sees the same points.
//
// Band 0 is [0, base). Band k >= 1 is [base + c(2^{k-1} - 1), base + c(2^k - 1))
// with c = max(base, 1). Band k draws from lane k of the neuron's stream.

#include <cstdint>
#include <limits>
#include <vector>

#include "hawkesfield/rng.hpp"

namespace hawkesfield {

class BandedPoissonMeasure {
 public:
  BandedPoissonMeasure(std::uint64_t seed, std::uint64_t replication, std::uint64_t neuron,
                       double base);

  struct Point {
    double t = std::numeric_limits<double>::infinity();
    double z = 0.0;
  };

  // Bands whose lower edge is below h; creates them on first use.
  std::size_t bands_below(double h);
  double band_lo(std::size_t k) const noexcept { return bands_[k].lo; }
  double base() const noexcept { return base_; }

  // Current unread point of band k (t = inf for an empty band).
  const Point& head(std::size_t k) const noexcept { return bands_[k].head; }
  void pop(std::size_t k);
  // Discards band-k points at times <= t.
  void skip_until(std::size_t k, double t);

 private:
  struct Band {
    double lo, width;
    Stream stream;
    Point head;
  };
  void add_band();

  std::uint64_t seed_, replication_, neuron_;
  double base_, step_;
  std::vector<Band> bands_;
};

}  // namespace hawkesfield
