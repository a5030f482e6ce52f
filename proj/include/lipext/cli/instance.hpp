#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lipext/bfs.hpp"
#include "lipext/core.hpp"
#include "lipext/metric.hpp"
#include "lipext/sampled_map.hpp"

namespace lipext::cli {

/// Malformed or inconsistent instance file. `pointer` is a JSON pointer to the
/// offending field; parse errors carry line and column instead.
class InputError : public Error {
 public:
  InputError(std::string message, std::string pointer, std::size_t line = 0, std::size_t column = 0);
  const std::string& message() const { return message_; }
  const std::string& pointer() const { return pointer_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::string message_;
  std::string pointer_;
  std::size_t line_;
  std::size_t column_;
};

/// Exponent and scales of a function space; the measure is the instance's.
struct SpaceSpec {
  Exponent p = Exponent(1.0);
  Vector scale;
  /// Own weights, for spaces not built on the instance measure (E couples).
  std::optional<Vector> weights;
};

struct PhiSpec {
  enum class Kind { kIndicatorNorm, kTable };
  Kind kind = Kind::kIndicatorNorm;
  double K = 1.0;
  std::optional<SpaceSpec> Z;
  /// kTable: value for every subset, indexed by bitmask.
  Vector table;
};

struct LinearMapSpec {
  Matrix matrix;
  SpaceSpec E0;
  SpaceSpec E1;
  std::vector<Vector> test_vectors;
  std::optional<PhiSpec> phi0;
  std::optional<PhiSpec> phi1;
};

struct Constants {
  std::optional<double> K;
  std::optional<double> K0;
  std::optional<double> K1;
  std::optional<double> theta;
  std::optional<double> p_interp;
};

struct Instance {
  int version = 1;
  FiniteMetricSpace metric_space{Matrix(1, 1)};
  /// Points of S; every point when the file omits it.
  std::vector<std::size_t> subset;
  std::optional<FiniteMeasureSpace> measure;
  std::optional<SpaceSpec> space;
  std::optional<SpaceSpec> space2;
  /// Row k is T(subset[k]).
  std::optional<Matrix> map_values;
  std::optional<PhiSpec> phi;
  Constants constants;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<double>> t_values;
  std::optional<LinearMapSpec> linear_map;

  SampledMap map() const;
  BfsSpec bfs(const SpaceSpec& spec) const;
  SetFunctionTable phi_table(const PhiSpec& spec, std::size_t limit) const;
};

/// Parses and validates an instance; every error is an InputError.
Instance parse_instance(const std::string& text);
Instance load_instance(const std::string& path);

/// JSON text of an instance, the inverse of parse_instance up to formatting.
std::string dump_instance(const Instance& instance);

}  // namespace lipext::cli
