#include "kdb/grid.hpp"

#include <cmath>
#include <string>

#include "kdb/error.hpp"

namespace kdb {

RealGrid::RealGrid(double start, double spacing, std::size_t count) : spacing_(spacing) {
  if (!(spacing > 0.0) || !std::isfinite(spacing) || !std::isfinite(start)) {
    throw GridError("grid spacing must be positive and finite");
  }
  if (count < 2) throw GridError("grid needs at least two points");
  points_.resize(count);
  for (std::size_t i = 0; i < count; ++i) points_[i] = start + spacing * static_cast<double>(i);
}

RealGrid RealGrid::symmetric(double half_extent, double spacing) {
  if (!(spacing > 0.0) || !(half_extent > 0.0)) {
    throw GridError("symmetric grid needs positive extent and spacing");
  }
  const auto half = static_cast<long>(std::floor(half_extent / spacing + 1e-9));
  if (half < 1) throw GridError("extent smaller than one spacing");
  RealGrid g;
  g.spacing_ = spacing;
  g.points_.resize(static_cast<std::size_t>(2 * half + 1));
  for (long k = -half; k <= half; ++k) {
    g.points_[static_cast<std::size_t>(k + half)] = static_cast<double>(k) * spacing;
  }
  return g;
}

RealGrid RealGrid::from_points(std::vector<double> points) {
  if (points.size() < 2) throw GridError("grid needs at least two points");
  const double h = (points.back() - points.front()) / static_cast<double>(points.size() - 1);
  if (!(h > 0.0)) throw GridError("grid points must be strictly increasing");
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double d = points[i] - points[i - 1];
    if (!(d > 0.0)) throw GridError("grid points must be strictly increasing");
    if (std::abs(d - h) > 1e-12 * std::max(std::abs(h), std::abs(points[i]))) {
      throw GridError("non-uniform grid at index " + std::to_string(i));
    }
  }
  RealGrid g;
  g.spacing_ = h;
  g.points_ = std::move(points);
  return g;
}

bool RealGrid::is_symmetric() const {
  const std::size_t n = points_.size();
  for (std::size_t i = 0; i < n / 2 + 1; ++i) {
    if (std::abs(points_[i] + points_[n - 1 - i]) > 1e-12 * std::max(1.0, std::abs(points_[i]))) {
      return false;
    }
  }
  return true;
}

}  // namespace kdb
