#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "lipext/core.hpp"

namespace lipext {

/// A map from a finite point set into functions on atoms: row k of `values`
/// is the chosen representative of T(domain[k]). Rows are functions, not
/// classes, so values on zero-weight atoms are kept and can differ.
struct SampledMap {
  std::vector<std::size_t> domain;
  Matrix values;

  SampledMap() = default;
  SampledMap(std::vector<std::size_t> domain_points, Matrix rows);

  /// Map defined on every point 0..rows-1 of a space.
  static SampledMap total(Matrix rows);

  std::size_t size() const { return domain.size(); }
  std::size_t atoms() const { return values.cols(); }
  std::span<const double> at(std::size_t k) const { return values.row(k); }

  /// Position of `point` in `domain`, or size() when absent.
  std::size_t position_of(std::size_t point) const;

  /// True when domain is exactly 0..n-1 in order.
  bool is_total_on(std::size_t n) const;
};

/// Distance between two range values, e.g. a norm of the difference.
using RangeMetric = std::function<double(std::span<const double>, std::span<const double>)>;

/// |a[0] - b[0]| for real-valued maps.
RangeMetric absolute_difference();

/// max_i |a[i] - b[i]|, the l-infinity distance over every coordinate.
RangeMetric sup_distance();

}  // namespace lipext
