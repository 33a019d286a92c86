#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "swarmclean/geometry.hpp"

namespace swarmclean {

inline constexpr double kMaxIntensity = 255.0;

/// 9x9 decrement kernel applied under a waiting robot once per second.
///
/// The decrement at integer cell offset (p, q) is 8 - sqrt(p^2 + q^2): 8 under
/// the robot centre and 8 - sqrt(32) in the kernel corners.
struct CleanKernel {
  static constexpr int kHalfWidth = 4;
  static constexpr double kPeak = 8.0;

  static double decrement(int p, int q) {
    return kPeak - std::sqrt(static_cast<double>(p * p + q * q));
  }

  /// Sum of all 81 decrements; what one application removes from a region
  /// where no cell hits the zero clamp.
  static double total() {
    double s = 0.0;
    for (int p = -kHalfWidth; p <= kHalfWidth; ++p)
      for (int q = -kHalfWidth; q <= kHalfWidth; ++q) s += decrement(p, q);
    return s;
  }
};

/// Scalar contamination intensity over a rectangular arena, stored row-major
/// (row = y cell, column = x cell). Cell values stay in [0, 255].
class CueField {
 public:
  CueField(double width_cm, double height_cm, double cells_per_cm = 1.0)
      : width_cm_(width_cm), height_cm_(height_cm), resolution_(cells_per_cm) {
    if (!(width_cm > 0.0) || !(height_cm > 0.0) || !(cells_per_cm > 0.0))
      throw std::invalid_argument("CueField: dimensions and resolution must be positive");
    cols_ = static_cast<int>(std::lround(width_cm * cells_per_cm));
    rows_ = static_cast<int>(std::lround(height_cm * cells_per_cm));
    if (cols_ < 1 || rows_ < 1) throw std::invalid_argument("CueField: arena smaller than one cell");
    cells_.assign(static_cast<std::size_t>(cols_) * static_cast<std::size_t>(rows_), 0.0);
  }

  double width_cm() const { return width_cm_; }
  double height_cm() const { return height_cm_; }
  double resolution() const { return resolution_; }
  int cols() const { return cols_; }
  int rows() const { return rows_; }
  std::size_t size() const { return cells_.size(); }

  std::span<const double> cells() const { return cells_; }

  bool in_bounds(int col, int row) const { return col >= 0 && row >= 0 && col < cols_ && row < rows_; }

  double at(int col, int row) const { return cells_[index(col, row)]; }

  void set(int col, int row, double value) {
    cells_[index(col, row)] = std::clamp(value, 0.0, kMaxIntensity);
  }

  /// Centre of a cell in arena coordinates.
  Vec2 cell_center(int col, int row) const {
    return {(col + 0.5) / resolution_, (row + 0.5) / resolution_};
  }

  int col_of(double x_cm) const { return static_cast<int>(std::floor(x_cm * resolution_)); }
  int row_of(double y_cm) const { return static_cast<int>(std::floor(y_cm * resolution_)); }

  /// Value of the cell containing `point`; 0 outside the arena.
  double sample(Vec2 point) const {
    if (!(point.x >= 0.0 && point.y >= 0.0 && point.x < width_cm_ && point.y < height_cm_)) return 0.0;
    const int c = std::min(col_of(point.x), cols_ - 1);
    const int r = std::min(row_of(point.y), rows_ - 1);
    return at(c, r);
  }

  /// One cleaning step centred on the cell under `robot_center`. Cells outside
  /// the arena are skipped; values are clamped at zero.
  void apply_cleaning(Vec2 robot_center) {
    const int c0 = col_of(robot_center.x);
    const int r0 = row_of(robot_center.y);
    constexpr int h = CleanKernel::kHalfWidth;
    for (int q = -h; q <= h; ++q) {
      for (int p = -h; p <= h; ++p) {
        const int c = c0 + p;
        const int r = r0 + q;
        if (!in_bounds(c, r)) continue;
        double& v = cells_[index(c, r)];
        v = std::max(0.0, v - CleanKernel::decrement(p, q));
      }
    }
  }

  /// Mean over every arena cell, including the uncontaminated ones.
  double mean_intensity() const {
    return std::accumulate(cells_.begin(), cells_.end(), 0.0) / static_cast<double>(cells_.size());
  }

  double total_intensity() const { return std::accumulate(cells_.begin(), cells_.end(), 0.0); }

  friend bool operator==(const CueField&, const CueField&) = default;

 private:
  std::size_t index(int col, int row) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(col);
  }

  double width_cm_;
  double height_cm_;
  double resolution_;
  int cols_ = 0;
  int rows_ = 0;
  std::vector<double> cells_;
};

/// Linear cone of contamination: peak at `center`, falling to zero at
/// `radius_cm`. Each cell takes the value at its centre.
inline CueField init_circular_gradient(double width_cm, double height_cm, Vec2 center, double radius_cm,
                                       double peak, double cells_per_cm = 1.0) {
  if (!(radius_cm > 0.0)) throw std::invalid_argument("init_circular_gradient: radius must be positive");
  if (!(peak > 0.0 && peak <= kMaxIntensity))
    throw std::invalid_argument("init_circular_gradient: peak must lie in (0, 255]");
  CueField field(width_cm, height_cm, cells_per_cm);
  if (!(center.x >= 0.0 && center.y >= 0.0 && center.x <= width_cm && center.y <= height_cm))
    throw std::invalid_argument("init_circular_gradient: centre outside arena");
  for (int r = 0; r < field.rows(); ++r) {
    for (int c = 0; c < field.cols(); ++c) {
      const double d = distance(field.cell_center(c, r), center);
      field.set(c, r, peak * std::max(0.0, 1.0 - d / radius_cm));
    }
  }
  return field;
}

}  // namespace swarmclean
