#include <algorithm>
#include <cmath>
#include <numeric>

#include "hawkesfield/errors.hpp"
#include "hawkesfield/transport.hpp"
#include "network_simplex.hpp"

namespace hawkesfield {

namespace {

using Int = detail::NetworkSimplex::Value;

constexpr double kMassUnits = 0x1.0p50;
constexpr double kCostUnits = 0x1.0p40;
// All pairs go into the first solve below this many; beyond it the solve
// starts from nearest neighbours and grows by dual verification.
constexpr std::size_t kDenseLimit = 1u << 20;
constexpr std::size_t kNearest = 12;
constexpr std::size_t kAddPerSource = 8;

struct Side {
  PointSet pts;
  std::vector<Int> units;
};

Side integer_side(const DiscreteMeasure& m) {
  Side s;
  s.pts = PointSet(m.dim(), 0);
  std::vector<double> w;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m.weights[i] > 0.0) {
      s.pts.push_back(m.support[i]);
      w.push_back(m.weights[i]);
    }
  if (w.empty()) throw StructuralError("measure has no positive weight");
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  Int sum = 0;
  std::size_t heavy = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    s.units.push_back(std::llround(w[i] / total * kMassUnits));
    sum += s.units.back();
    if (w[i] > w[heavy]) heavy = i;
  }
  s.units[heavy] += static_cast<Int>(kMassUnits) - sum;
  return s;
}

double ground(std::span<const double> a, std::span<const double> b, GroundNorm norm) {
  return norm == GroundNorm::linf ? norm_inf(a, b) : std::sqrt(dist2_euclid(a, b));
}

}  // namespace

TransportResult optimal_transport(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int p,
                                  GroundNorm norm) {
  if (mu.size() == 0 || nu.size() == 0) throw StructuralError("empty support");
  if (mu.dim() != nu.dim()) throw StructuralError("measures live in different dimensions");
  if (p != 1 && p != 2) throw StructuralError("order p must be 1 or 2");
  const Side src = integer_side(mu), dst = integer_side(nu);
  const std::size_t m = src.pts.size(), n = dst.pts.size(), d = mu.dim();

  auto cost = [&](std::size_t i, std::size_t j) {
    const double g = ground(src.pts[i], dst.pts[j], norm);
    return p == 1 ? g : g * g;
  };

  // Largest possible cost from the joint bounding box.
  std::vector<double> lo(d, INFINITY), hi(d, -INFINITY);
  for (const PointSet* s : {&src.pts, &dst.pts})
    for (std::size_t i = 0; i < s->size(); ++i)
      for (std::size_t k = 0; k < d; ++k) {
        lo[k] = std::min(lo[k], (*s)[i][k]);
        hi[k] = std::max(hi[k], (*s)[i][k]);
      }
  const double diam = ground(lo, hi, norm);
  const double max_cost = p == 1 ? diam : diam * diam;
  TransportResult out;
  if (!(max_cost > 0.0)) return out;
  if (!std::isfinite(max_cost)) throw StructuralError("support points must be finite");
  const double scale = kCostUnits / max_cost;
  auto icost = [&](std::size_t i, std::size_t j) { return static_cast<Int>(std::llround(cost(i, j) * scale)); };

  std::vector<Int> supply(m + n);
  for (std::size_t i = 0; i < m; ++i) supply[i] = src.units[i];
  for (std::size_t j = 0; j < n; ++j) supply[m + j] = -dst.units[j];

  // Candidate arcs per source, kept sorted for membership tests.
  std::vector<std::vector<std::uint32_t>> cand(m);
  if (m * n <= kDenseLimit) {
    for (auto& c : cand) {
      c.resize(n);
      std::iota(c.begin(), c.end(), 0u);
    }
  } else {
    std::vector<std::pair<double, std::uint32_t>> row(n), col(m);
    const std::size_t kr = std::min(kNearest, n), kc = std::min(kNearest, m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) row[j] = {cost(i, j), static_cast<std::uint32_t>(j)};
      std::partial_sort(row.begin(), row.begin() + static_cast<long>(kr), row.end());
      for (std::size_t k = 0; k < kr; ++k) cand[i].push_back(row[k].second);
    }
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < m; ++i) col[i] = {cost(i, j), static_cast<std::uint32_t>(i)};
      std::partial_sort(col.begin(), col.begin() + static_cast<long>(kc), col.end());
      for (std::size_t k = 0; k < kc; ++k) cand[col[k].second].push_back(static_cast<std::uint32_t>(j));
    }
    for (auto& c : cand) {
      std::sort(c.begin(), c.end());
      c.erase(std::unique(c.begin(), c.end()), c.end());
    }
  }

  for (;;) {
    ++out.rounds;
    detail::NetworkSimplex ns(supply);
    for (std::size_t i = 0; i < m; ++i)
      for (auto j : cand[i]) ns.add_arc(static_cast<int>(i), static_cast<int>(m + j), icost(i, j));
    const bool feasible = ns.run();

    // Dual check over every pair; collect the most violated per source.
    bool added = false;
    std::vector<std::pair<Int, std::uint32_t>> bad;
    for (std::size_t i = 0; i < m; ++i) {
      bad.clear();
      const Int pi_i = ns.potential(static_cast<int>(i));
      for (std::size_t j = 0; j < n; ++j) {
        const Int rc = icost(i, j) + pi_i - ns.potential(static_cast<int>(m + j));
        if (rc < 0) bad.emplace_back(rc, static_cast<std::uint32_t>(j));
      }
      if (bad.empty()) continue;
      const std::size_t k = std::min(kAddPerSource, bad.size());
      std::partial_sort(bad.begin(), bad.begin() + static_cast<long>(k), bad.end());
      for (std::size_t q = 0; q < k; ++q) {
        auto& c = cand[i];
        auto it = std::lower_bound(c.begin(), c.end(), bad[q].second);
        if (it == c.end() || *it != bad[q].second) {
          c.insert(it, bad[q].second);
          added = true;
        }
      }
    }
    if (!added) {
      if (!feasible) throw NumericalError("transport solve left flow on artificial arcs");
      double total = 0.0;
      std::size_t e = 0;
      for (std::size_t i = 0; i < m; ++i)
        for (auto j : cand[i]) {
          const Int f = ns.flow(e++);
          if (f) total += double(f) / kMassUnits * cost(i, j);
        }
      out.cost = total;
      out.distance = p == 1 ? total : std::sqrt(total);
      out.arcs = ns.arc_count();
      return out;
    }
  }
}

double wasserstein_discrete(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int p,
                            GroundNorm norm) {
  return optimal_transport(mu, nu, p, norm).distance;
}

}  // namespace hawkesfield
