#pragma once

#include "bgk/core.hpp"
#include "bgk/params.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

namespace bgk {

/// Tensor-product midpoint grid on the box [-L, L]^d.
///
/// Nodes are ordered row-major over the axes (last axis fastest). Node j and
/// node size()-1-j are mirror images under v -> -v.
template <typename Scalar>
class VelocityGrid {
 public:
  VelocityGrid() = default;

  VelocityGrid(int dim, int points_per_axis, Scalar half_width)
      : dim_(dim), points_(points_per_axis), half_width_(half_width) {
    if (dim <= 0) throw ConfigError("velocity grid dimension must be positive");
    if (points_per_axis < 2) throw ConfigError("grid.velocity_points must be at least 2");
    if (!(half_width > Scalar(0))) throw ConfigError("velocity box half width must be positive");
    spacing_ = Scalar(2) * half_width / Scalar(points_per_axis);
    Index total = 1;
    for (int a = 0; a < dim; ++a) total *= points_per_axis;
    nodes_.resize(total, dim);
    for (Index j = 0; j < total; ++j) {
      Index rem = j;
      for (int a = dim - 1; a >= 0; --a) {
        const Index i = rem % points_per_axis;
        rem /= points_per_axis;
        nodes_(j, a) = -half_width + (Scalar(i) + Scalar(0.5)) * spacing_;
      }
    }
    cell_volume_ = std::pow(spacing_, dim);
    weights_ = ArrayX<Scalar>::Constant(total, cell_volume_);
    speed2_ = nodes_.rowwise().squaredNorm().array();
  }

  int dim() const { return dim_; }
  int points_per_axis() const { return points_; }
  Index size() const { return nodes_.rows(); }
  Scalar half_width() const { return half_width_; }
  Scalar spacing() const { return spacing_; }
  Scalar cell_volume() const { return cell_volume_; }
  Scalar box_volume() const { return std::pow(Scalar(2) * half_width_, dim_); }

  /// size() x dim node coordinates.
  const MatrixX<Scalar>& nodes() const { return nodes_; }
  auto node(Index j) const { return nodes_.row(j); }
  /// Velocity component `axis` at every node.
  auto component(int axis) const { return nodes_.col(axis).array(); }
  /// |v|^2 at every node.
  const ArrayX<Scalar>& speed2() const { return speed2_; }
  const ArrayX<Scalar>& weights() const { return weights_; }

  Index mirror(Index j) const { return size() - 1 - j; }

 private:
  int dim_ = 0;
  int points_ = 0;
  Scalar half_width_ = 0;
  Scalar spacing_ = 0;
  Scalar cell_volume_ = 0;
  MatrixX<Scalar> nodes_;
  ArrayX<Scalar> weights_;
  ArrayX<Scalar> speed2_;
};

/// Velocity grid covering the equilibrium support plus a relative margin.
template <typename Scalar>
VelocityGrid<Scalar> make_velocity_grid(const GasParams<Scalar>& p, int points_per_axis,
                                        Scalar margin = Scalar(0.1)) {
  if (!(margin >= Scalar(0))) throw ConfigError("grid.velocity_margin must be non-negative");
  return VelocityGrid<Scalar>(p.dim, points_per_axis, (Scalar(1) + margin) * p.support_radius);
}

/// Uniform periodic grid on a d-torus. Cells are ordered row-major (last axis fastest).
template <typename Scalar>
class SpatialGrid {
 public:
  SpatialGrid() = default;

  SpatialGrid(std::vector<int> counts, std::vector<Scalar> lengths)
      : counts_(std::move(counts)), lengths_(std::move(lengths)) {
    if (counts_.empty()) throw ConfigError("spatial grid needs at least one axis");
    if (lengths_.size() != counts_.size()) throw ConfigError("spatial grid: one length per axis required");
    const int d = dim();
    strides_.assign(static_cast<std::size_t>(d), 1);
    spacing_.resize(static_cast<std::size_t>(d));
    for (int a = d - 1; a >= 0; --a) {
      const auto ua = static_cast<std::size_t>(a);
      if (counts_[ua] < 4) throw ConfigError("grid.cells must be at least 4 per axis");
      if (!(lengths_[ua] > Scalar(0))) throw ConfigError("grid.length must be positive");
      spacing_[ua] = lengths_[ua] / Scalar(counts_[ua]);
      if (a + 1 < d) strides_[ua] = strides_[ua + 1] * counts_[ua + 1];
    }
    size_ = strides_[0] * counts_[0];
    cell_volume_ = Scalar(1);
    for (auto h : spacing_) cell_volume_ *= h;
  }

  static SpatialGrid cube(int dim, int cells_per_axis, Scalar length = Scalar(2) * std::numbers::pi_v<Scalar>) {
    return SpatialGrid(std::vector<int>(static_cast<std::size_t>(dim), cells_per_axis),
                       std::vector<Scalar>(static_cast<std::size_t>(dim), length));
  }

  int dim() const { return static_cast<int>(counts_.size()); }
  Index size() const { return size_; }
  int count(int axis) const { return counts_[static_cast<std::size_t>(axis)]; }
  const std::vector<int>& counts() const { return counts_; }
  Scalar length(int axis) const { return lengths_[static_cast<std::size_t>(axis)]; }
  const std::vector<Scalar>& lengths() const { return lengths_; }
  Scalar spacing(int axis) const { return spacing_[static_cast<std::size_t>(axis)]; }
  Scalar min_spacing() const { return *std::min_element(spacing_.begin(), spacing_.end()); }
  Scalar cell_volume() const { return cell_volume_; }
  Scalar volume() const { return cell_volume_ * Scalar(size_); }

  /// Distance in cell index between neighbours along `axis`.
  Index stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }

  /// First cell of every grid line parallel to `axis` (cells with coordinate 0 on that axis).
  std::vector<Index> line_starts(int axis) const {
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(size_ / count(axis)));
    for (Index c = 0; c < size_; ++c)
      if (coordinate(c, axis) == 0) out.push_back(c);
    return out;
  }

  /// Index of cell `cell` along `axis`.
  int coordinate(Index cell, int axis) const {
    const auto ua = static_cast<std::size_t>(axis);
    return static_cast<int>((cell / strides_[ua]) % counts_[ua]);
  }

  /// Cell reached from `cell` by `offset` steps along `axis`, wrapping periodically.
  Index shift(Index cell, int axis, int offset) const {
    const auto ua = static_cast<std::size_t>(axis);
    const int n = counts_[ua];
    const int i = coordinate(cell, axis);
    const int j = ((i + offset) % n + n) % n;
    return cell + static_cast<Index>(j - i) * strides_[ua];
  }

  /// Cell center coordinate (cell-centered, first center at h/2).
  Scalar center(Index cell, int axis) const {
    return (Scalar(coordinate(cell, axis)) + Scalar(0.5)) * spacing(axis);
  }

 private:
  std::vector<int> counts_;
  std::vector<Scalar> lengths_;
  std::vector<Scalar> spacing_;
  std::vector<Index> strides_;
  Index size_ = 0;
  Scalar cell_volume_ = 0;
};

/// Distribution sampled on SpatialGrid x VelocityGrid; row = velocity profile of one cell.
template <typename Scalar>
struct KineticField {
  SpatialGrid<Scalar> space;
  VelocityGrid<Scalar> velocity;
  FieldArray<Scalar> values;

  KineticField() = default;
  KineticField(SpatialGrid<Scalar> x, VelocityGrid<Scalar> v)
      : space(std::move(x)), velocity(std::move(v)), values(FieldArray<Scalar>::Zero(space.size(), velocity.size())) {}
  KineticField(SpatialGrid<Scalar> x, VelocityGrid<Scalar> v, FieldArray<Scalar> data)
      : space(std::move(x)), velocity(std::move(v)), values(std::move(data)) {
    if (values.rows() != space.size() || values.cols() != velocity.size())
      throw ConfigError("kinetic field shape does not match its grids");
  }

  Index cells() const { return values.rows(); }
  Index nodes() const { return values.cols(); }
  bool finite() const { return values.allFinite(); }
};

}  // namespace bgk
