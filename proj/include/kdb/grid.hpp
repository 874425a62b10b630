#pragma once

#include <cstddef>
#include <vector>

namespace kdb {

// Uniform, strictly increasing sample positions. Units are x0 unless a caller says otherwise.
class RealGrid {
 public:
  RealGrid() = default;
  RealGrid(double start, double spacing, std::size_t count);

  // Points k*spacing for |k*spacing| <= half_extent; always contains 0 and has odd size.
  static RealGrid symmetric(double half_extent, double spacing);
  // Validates uniformity (1e-12 relative) and monotonicity.
  static RealGrid from_points(std::vector<double> points);

  const std::vector<double>& points() const { return points_; }
  double operator[](std::size_t i) const { return points_[i]; }
  std::size_t size() const { return points_.size(); }
  double spacing() const { return spacing_; }
  double front() const { return points_.front(); }
  double back() const { return points_.back(); }
  // True when points are mirror images about 0 (to rounding).
  bool is_symmetric() const;

 private:
  std::vector<double> points_;
  double spacing_ = 0.0;
};

}  // namespace kdb
