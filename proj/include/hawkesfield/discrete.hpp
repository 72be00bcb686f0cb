#pragma once

#include <vector>

#include "hawkesfield/model.hpp"

namespace hawkesfield {

// Finitely supported probability measure.
struct DiscreteMeasure {
  PointSet support;
  std::vector<double> weights;

  std::size_t size() const noexcept { return weights.size(); }
  std::size_t dim() const noexcept { return support.dim(); }
  // Throws StructuralError on empty support, negative weights, or a weight
  // sum off 1 by more than 1e-12.
  void validate() const;

  // Uniform weights 1/N on the given points.
  static DiscreteMeasure empirical(PointSet points);
};

}  // namespace hawkesfield
