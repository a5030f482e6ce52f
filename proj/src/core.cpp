#include "lipext/core.hpp"
#include "lipext/sampled_map.hpp"

#include <algorithm>
#include <cmath>

namespace lipext {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  const std::size_t cols = rows.front().size();
  Matrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw ShapeError("ragged matrix: row " + std::to_string(i) + " has " +
                       std::to_string(rows[i].size()) + " entries, expected " +
                       std::to_string(cols));
    }
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

std::vector<std::vector<double>> Matrix::to_rows() const {
  std::vector<std::vector<double>> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i].assign(row(i).begin(), row(i).end());
  return out;
}

std::size_t subset_count(std::size_t n, std::size_t limit) {
  if (n > limit || n > kMaxEnumerationAtoms) {
    throw ResourceError("subset enumeration over " + std::to_string(n) +
                        " atoms exceeds the limit of " +
                        std::to_string(std::min(limit, kMaxEnumerationAtoms)));
  }
  return std::size_t{1} << n;
}

std::string format_subset(Subset set, std::size_t n) {
  std::string out = "{";
  bool first = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (!contains(set, i)) continue;
    if (!first) out += ',';
    out += std::to_string(i);
    first = false;
  }
  return out + "}";
}

SampledMap::SampledMap(std::vector<std::size_t> domain_points, Matrix rows)
    : domain(std::move(domain_points)), values(std::move(rows)) {
  if (domain.size() != values.rows()) {
    throw ShapeError("sampled map has " + std::to_string(domain.size()) + " domain points but " +
                     std::to_string(values.rows()) + " value rows");
  }
}

SampledMap SampledMap::total(Matrix rows) {
  std::vector<std::size_t> domain(rows.rows());
  for (std::size_t i = 0; i < domain.size(); ++i) domain[i] = i;
  return {std::move(domain), std::move(rows)};
}

std::size_t SampledMap::position_of(std::size_t point) const {
  auto it = std::find(domain.begin(), domain.end(), point);
  return static_cast<std::size_t>(it - domain.begin());
}

bool SampledMap::is_total_on(std::size_t n) const {
  if (domain.size() != n) return false;
  for (std::size_t i = 0; i < n; ++i)
    if (domain[i] != i) return false;
  return true;
}

RangeMetric absolute_difference() {
  return [](std::span<const double> a, std::span<const double> b) {
    return std::abs(a[0] - b[0]);
  };
}

RangeMetric sup_distance() {
  return [](std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
  };
}

}  // namespace lipext
