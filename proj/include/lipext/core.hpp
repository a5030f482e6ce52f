#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lipext {

using Vector = std::vector<double>;

/// Subset of atoms encoded as a bitmask; bit i set means atom i belongs to it.
using Subset = std::uint64_t;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

namespace tolerance {
/// Metric axioms (symmetry, zero diagonal, triangle inequality).
inline constexpr double kMetricAxioms = 1e-12;
/// Pseudo-distance below which two points are identified in a quotient.
inline constexpr double kZeroDistance = 1e-9;
/// Closed-form checks: Lipschitz bounds, additivity, agreement on S.
inline constexpr double kExact = 1e-9;
/// Checks whose value comes out of an iterative optimizer.
inline constexpr double kOptimized = 1e-6;
}  // namespace tolerance

/// Subset enumeration is O(2^n); this is the largest n ever accepted.
inline constexpr std::size_t kMaxEnumerationAtoms = 20;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  /// Builds from nested rows; throws ShapeError if the rows are ragged.
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::vector<std::vector<double>> to_rows() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Error hierarchy. Every error a module raises derives from Error so the CLI
// can map it onto an exit code in one place.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched vector lengths or non-square matrices.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// An operation called on an empty or ill-formed domain (empty S, repeated points).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A scalar parameter outside its admissible range (K <= 0, p < 1, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Input data that violates a structural invariant (metric axioms, weights).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An operation's mathematical hypothesis does not hold for the given data.
/// `witness` names the offending pair, atom, or subsets in readable form.
class PreconditionError : public Error {
 public:
  PreconditionError(const std::string& what, std::string witness)
      : Error(what + " [witness: " + witness + "]"), witness_(std::move(witness)) {}
  const std::string& witness() const { return witness_; }

 private:
  std::string witness_;
};

/// A hypothesis of the operation fails (non-additive set function, factorization
/// identity broken, ...). Same payload as PreconditionError.
class HypothesisError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Enumeration limit exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver or quadrature failed to reach its tolerance.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// One verified inequality or identity. Failing entries always carry a witness.
struct CheckResult {
  std::string name;
  double bound = 0.0;
  double achieved = 0.0;
  bool holds = true;
  std::string witness;
};

inline bool contains(Subset set, std::size_t atom) { return ((set >> atom) & 1U) != 0; }

/// Number of subsets of an n-atom space; throws ResourceError past the cap.
std::size_t subset_count(std::size_t n, std::size_t limit = kMaxEnumerationAtoms);

/// Human-readable subset such as "{0,2}".
std::string format_subset(Subset set, std::size_t n);

}  // namespace lipext
