#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lipext/core.hpp"
#include "lipext/sampled_map.hpp"

namespace lipext {

enum class Axiom { kFinite, kNonNegative, kZeroDiagonal, kSymmetry, kTriangle, kPositivity };

std::string to_string(Axiom axiom);

struct MetricViolation {
  Axiom axiom;
  std::size_t i = 0;
  std::size_t j = 0;
  /// Intermediate point for triangle violations.
  std::optional<std::size_t> via;

  std::string describe() const;
};

struct MetricReport {
  std::vector<MetricViolation> violations;
  bool ok() const { return violations.empty(); }
};

enum class MetricKind { kMetric, kPseudo };

/// Lists every violated axiom with witness indices. Triangle violations are
/// reported once per unordered pair (i < j). Pseudo-metrics skip positivity.
MetricReport validate_metric(const Matrix& dist, MetricKind kind = MetricKind::kMetric,
                             double tol = tolerance::kMetricAxioms);

/// Labeled points with a full distance matrix satisfying the metric axioms.
class FiniteMetricSpace {
 public:
  /// Throws ValidationError naming the first violation when `dist` is not a metric.
  FiniteMetricSpace(std::vector<std::string> labels, Matrix dist);

  /// Points labeled "0", "1", ... .
  explicit FiniteMetricSpace(Matrix dist);

  /// Euclidean distances between the given coordinates.
  static FiniteMetricSpace euclidean(const std::vector<Vector>& points);

  std::size_t size() const { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_[i]; }
  const std::vector<std::string>& labels() const { return labels_; }
  double distance(std::size_t i, std::size_t j) const { return dist_(i, j); }
  const Matrix& distances() const { return dist_; }

 private:
  std::vector<std::string> labels_;
  Matrix dist_;
};

struct LipschitzConstant {
  double value = 0.0;
  /// Domain positions (not point indices) of the pair attaining the max.
  std::optional<std::pair<std::size_t, std::size_t>> witness;
  /// Set when the domain has fewer than two points; value is then 0.
  bool degenerate = false;
};

/// max over pairs x != y of rho(T(x), T(y)) / d(x, y): the smallest K on finite data.
LipschitzConstant lipschitz_constant(const FiniteMetricSpace& space, const SampledMap& map,
                                     const RangeMetric& rho);

class PseudoMetric {
 public:
  /// Throws ValidationError when symmetry, zero diagonal or triangle fails.
  explicit PseudoMetric(Matrix dist);

  std::size_t size() const { return dist_.rows(); }
  double distance(std::size_t i, std::size_t j) const { return dist_(i, j); }
  const Matrix& distances() const { return dist_; }

 private:
  Matrix dist_;
};

/// d_T(x, y) = rho(T(x), T(y)) / K on a map defined on every point of `space`.
/// Requires K > 0 (ParameterError) and K at least the Lipschitz constant of T
/// (PreconditionError naming the violating pair), so that d_T <= d.
PseudoMetric pseudo_metric_from_map(const FiniteMetricSpace& space, const SampledMap& map,
                                    const RangeMetric& rho, double K);

/// Metric identification of a pseudo-metric: classes, the induced metric on
/// classes, and the projection point -> class.
struct QuotientSpace {
  /// Each class lists its points in increasing order; classes are ordered by
  /// their smallest point, which also serves as representative.
  std::vector<std::vector<std::size_t>> classes;
  Matrix quotient_dist;
  std::vector<std::size_t> projection;

  std::size_t size() const { return classes.size(); }
  std::size_t representative(std::size_t cls) const { return classes[cls].front(); }

  /// The classes as a metric space in their own right, labeled "[a,b]".
  FiniteMetricSpace as_metric_space(const std::vector<std::string>& base_labels) const;
};

/// Points are identified when their pseudo-distance is at most `zero_tol`,
/// closed transitively with union-find.
QuotientSpace quotient(const PseudoMetric& pseudo, double zero_tol = tolerance::kZeroDistance);

/// The factored map on classes, T_bar([x]) = T(representative of [x]).
SampledMap factor_map(const QuotientSpace& q, const SampledMap& total_map);

/// Outcome of checking the universal property for one intermediate space J.
struct UniversalMapCertificate {
  /// i(z) for each point z of J, as a class index of the quotient.
  std::vector<std::size_t> map;
  /// max over x of [i(i0(x)) != j(x)]; zero when identity 1) holds.
  std::size_t projection_mismatches = 0;
  /// max over z of rho(T_bar(i(z)), T0(z)).
  double factorization_error = 0.0;
  /// max over z != z' of d*(i(z), i(z')) / rho_J(z, z').
  double lipschitz_ratio = 0.0;
  std::vector<CheckResult> checks;

  bool passed() const;
};

/// Input to induce_universal_map: an intermediate space J with a map
/// i0: M -> J and a map T0 on J, one row per point of J.
struct Factorization {
  const FiniteMetricSpace* space = nullptr;
  std::vector<std::size_t> inclusion;
  Matrix map_on_space;
};

/// Builds i: J -> quotient with i(i0(x)) = j(x) and verifies T_bar o i = T0 and
/// that i is 1-Lipschitz. Hypotheses (i0 1-Lipschitz and onto, T0 K-Lipschitz,
/// T0 o i0 = T, i well defined) are checked first; a failure raises
/// HypothesisError carrying the witness.
UniversalMapCertificate induce_universal_map(const FiniteMetricSpace& space,
                                             const SampledMap& total_map, const RangeMetric& rho,
                                             double K, const QuotientSpace& q,
                                             const Factorization& through);

}  // namespace lipext
