#pragma once

#include "bgk/core.hpp"
#include "bgk/grids.hpp"

#include <string>
#include <vector>

namespace bgk {

/// Spatial multi-index: one derivative count per axis.
using MultiIndex = std::vector<int>;

inline int total_order(const MultiIndex& alpha) {
  int s = 0;
  for (int a : alpha) s += a;
  return s;
}

/// All multi-indices with |alpha| == order, in lexicographically descending order
/// ((2,0), (1,1), (0,2) for d = 2).
inline std::vector<MultiIndex> multi_indices_of_order(int dim, int order) {
  std::vector<MultiIndex> out;
  MultiIndex alpha(static_cast<std::size_t>(dim), 0);
  auto recurse = [&](auto&& self, int axis, int remaining) -> void {
    if (axis == dim - 1) {
      alpha[static_cast<std::size_t>(axis)] = remaining;
      out.push_back(alpha);
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      alpha[static_cast<std::size_t>(axis)] = k;
      self(self, axis + 1, remaining - k);
    }
  };
  recurse(recurse, 0, order);
  return out;
}

/// All multi-indices with |alpha| <= max_order, grouped by increasing order.
inline std::vector<MultiIndex> multi_indices_up_to(int dim, int max_order) {
  std::vector<MultiIndex> out;
  for (int k = 0; k <= max_order; ++k) {
    auto level = multi_indices_of_order(dim, k);
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

/// Periodic central difference along one axis, applied to every column.
/// Rows of `f` are spatial cells in the grid's ordering.
template <typename Derived>
typename Derived::PlainObject spatial_derivative(const SpatialGrid<typename Derived::Scalar>& grid,
                                                 const Eigen::ArrayBase<Derived>& f, int axis,
                                                 int order = 2) {
  using Scalar = typename Derived::Scalar;
  if (axis < 0 || axis >= grid.dim()) {
    throw ConfigError("spatial_derivative: axis " + std::to_string(axis) + " is out of range for d = " +
                      std::to_string(grid.dim()));
  }
  if (order != 2 && order != 4) throw ConfigError("spatial_derivative: stencil order must be 2 or 4");
  if (f.rows() != grid.size()) throw ConfigError("spatial_derivative: field rows do not match grid");
  const auto& in = f.derived();
  typename Derived::PlainObject out(in.rows(), in.cols());
  const Scalar h = grid.spacing(axis);
  for (Index i = 0; i < grid.size(); ++i) {
    const Index p1 = grid.shift(i, axis, 1);
    const Index m1 = grid.shift(i, axis, -1);
    if (order == 2) {
      out.row(i) = (in.row(p1) - in.row(m1)) / (Scalar(2) * h);
    } else {
      const Index p2 = grid.shift(i, axis, 2);
      const Index m2 = grid.shift(i, axis, -2);
      out.row(i) = (Scalar(8) * (in.row(p1) - in.row(m1)) - (in.row(p2) - in.row(m2))) / (Scalar(12) * h);
    }
  }
  return out;
}

/// d^alpha f, composed axis by axis in ascending axis order.
template <typename Derived>
typename Derived::PlainObject multi_index_derivative(const SpatialGrid<typename Derived::Scalar>& grid,
                                                     const Eigen::ArrayBase<Derived>& f, const MultiIndex& alpha,
                                                     int order = 2, int max_total_order = 4) {
  if (static_cast<int>(alpha.size()) != grid.dim())
    throw ConfigError("multi-index length does not match the spatial dimension");
  if (total_order(alpha) > max_total_order) {
    throw ConfigError("multi-index order " + std::to_string(total_order(alpha)) + " exceeds the maximum " +
                      std::to_string(max_total_order));
  }
  typename Derived::PlainObject out = f.derived();
  for (int a = 0; a < grid.dim(); ++a)
    for (int k = 0; k < alpha[static_cast<std::size_t>(a)]; ++k) out = spatial_derivative(grid, out, a, order);
  return out;
}

}  // namespace bgk
