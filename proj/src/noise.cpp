#include "hawkesfield/noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hawkesfield {

namespace {
constexpr std::size_t kMaxBands = 64;
constexpr double kMaxReplay = 1e6;
}

BandedPoissonMeasure::BandedPoissonMeasure(std::uint64_t seed, std::uint64_t replication,
                                           std::uint64_t neuron, double base)
    : seed_(seed), replication_(replication), neuron_(neuron), base_(base),
      step_(std::max(base, 1.0)) {
  if (!(base >= 0) || !std::isfinite(base)) throw std::invalid_argument("band base must be finite and >= 0");
  add_band();
}

void BandedPoissonMeasure::add_band() {
  const std::size_t k = bands_.size();
  if (k >= kMaxBands) throw std::overflow_error("rate bound beyond the banded measure's range");
  double lo, width;
  if (k == 0) {
    lo = 0.0;
    width = base_;
  } else {
    lo = base_ + step_ * (std::ldexp(1.0, static_cast<int>(k) - 1) - 1.0);
    width = step_ * std::ldexp(1.0, static_cast<int>(k) - 1);
  }
  Band b{lo, width, Stream({seed_, replication_, neuron_, k}), {}};
  bands_.push_back(b);
  if (width > 0) {
    bands_.back().head.t = 0.0;
    pop(k);
  }
}

std::size_t BandedPoissonMeasure::bands_below(double h) {
  if (!(h > 0)) return 0;
  while (true) {
    const Band& last = bands_.back();
    if (last.lo + last.width >= h) break;
    add_band();
  }
  // Band 0 always counts once h > 0.
  std::size_t n = 0;
  while (n < bands_.size() && bands_[n].lo < h) ++n;
  return n;
}

void BandedPoissonMeasure::pop(std::size_t k) {
  Band& b = bands_[k];
  if (!(b.width > 0)) return;
  b.head.t += b.stream.exponential(b.width);
  b.head.z = b.lo + b.width * b.stream.uniform();
}

void BandedPoissonMeasure::skip_until(std::size_t k, double t) {
  Band& b = bands_[k];
  if (b.head.t > t) return;
  // Replaying a wide band over a long idle gap costs width * gap draws. Past
  // kMaxReplay expected points, restart the band at t instead; the law is the
  // same (memoryless), only the pathwise identity across bounds is lost, and
  // that only in runaway regimes. Band 0 is always replayed.
  if (k > 0 && b.width * (t - b.head.t) > kMaxReplay) {
    b.head.t = t;
    pop(k);
    return;
  }
  while (b.head.t <= t) pop(k);
}

}  // namespace hawkesfield
