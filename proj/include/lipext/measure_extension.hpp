#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lipext/bfs.hpp"
#include "lipext/core.hpp"
#include "lipext/extension.hpp"
#include "lipext/metric.hpp"
#include "lipext/sampled_map.hpp"

namespace lipext {

/// A real measure on the atoms, given by its value on each singleton.
class FiniteSignedMeasure {
 public:
  /// Throws ShapeError on a length mismatch and ValidationError on non-finite values.
  FiniteSignedMeasure(FiniteMeasureSpace base, Vector atom_values);

  /// nu(A) = integral_A h dmu.
  static FiniteSignedMeasure from_density(const FiniteMeasureSpace& base, std::span<const double> h);
  /// Reads off the singleton values of a table (additivity is not checked here).
  static FiniteSignedMeasure from_table(const SetFunctionTable& table);

  const FiniteMeasureSpace& base() const { return base_; }
  const Vector& atom_values() const { return atom_values_; }
  std::size_t size() const { return atom_values_.size(); }
  double operator()(Subset set) const;
  SetFunctionTable table(std::size_t limit = kMaxEnumerationAtoms) const;

 private:
  FiniteMeasureSpace base_;
  Vector atom_values_;
};

/// ||f||_{L^1,0} = max over A of |integral_A f dmu| = max(integral f+, integral f-).
double l1_zero_norm(std::span<const double> f, const FiniteMeasureSpace& mu);
/// Same value by visiting all 2^n subsets.
double l1_zero_norm_by_enumeration(std::span<const double> f, const FiniteMeasureSpace& mu,
                                   std::size_t limit = kMaxEnumerationAtoms);
NormFn l1_zero_norm_fn(const FiniteMeasureSpace& mu);

struct PhiLipschitzReport {
  /// max of ||(T(x) - T(y)) chi_A|| / (phi(A) d(x, y)) over pairs and subsets with phi(A) > 0.
  double ratio = 0.0;
  /// max of ||(T(x) - T(y)) chi_A|| - phi(A) d(x, y) over all pairs and subsets.
  double excess = 0.0;
  /// Nonempty subsets left out of `ratio` because phi(A) <= 0.
  std::size_t skipped_subsets = 0;
  std::string ratio_witness;
  std::string excess_witness;

  /// T satisfies the inequality up to an absolute tolerance.
  bool holds(double tol = tolerance::kExact) const { return excess <= tol; }
};

/// Enumerates every pair of the map's domain and every subset of atoms.
/// `norm` is the range norm: as_norm(Y), or l1_zero_norm_fn(mu).
/// Throws ResourceError past `limit` atoms and ShapeError when phi and the map disagree in size.
PhiLipschitzReport phi_lipschitz_constant(const FiniteMetricSpace& space, const SampledMap& map,
                                          const SetFunctionTable& phi, const NormFn& norm,
                                          std::size_t limit = kMaxEnumerationAtoms);
PhiLipschitzReport phi_lipschitz_constant(const FiniteMetricSpace& space, const SampledMap& map,
                                          const SetFunctionTable& phi, const BfsSpec& Y,
                                          std::size_t limit = kMaxEnumerationAtoms);

/// nu_x(A) = max over y in the map's domain of integral_A T(y) dmu - phi(A) d(x, y).
SetFunctionTable nu_table(const FiniteMetricSpace& space, std::size_t x, const SampledMap& map,
                          const SetFunctionTable& phi, std::size_t limit = kMaxEnumerationAtoms);

struct AdditivityReport {
  bool additive = true;
  /// Disjoint (A, B) with values[A + B] != values[A] + values[B].
  std::optional<std::pair<Subset, Subset>> witness;
  double defect = 0.0;
};

/// Additivity over all disjoint pairs. Checked as values[A] = values[{i}] +
/// values[A - {i}] with i the lowest atom of A, plus values[empty] = 0; by
/// induction this is equivalent to the pairwise condition.
AdditivityReport check_additive(const SetFunctionTable& table, double tol = tolerance::kExact);

struct ContinuityReport {
  bool continuous = true;
  /// A set of zero-weight atoms with a nonzero value.
  std::optional<Subset> witness;
};

/// values[A] = 0 for every A made only of zero-weight atoms.
ContinuityReport check_mu_continuous(const SetFunctionTable& table, double tol = tolerance::kExact);

/// Density h with integral_A h dmu = values[A]; h = 0 on null atoms.
/// Throws HypothesisError (with the failing subsets) unless the table is
/// additive and mu-continuous.
Vector radon_nikodym(const SetFunctionTable& table, double tol = tolerance::kExact);

struct MeasureExtensionOptions {
  /// Range space for the Y-Lipschitz and classical constant checks; used
  /// only when phi is proportional to mu.
  std::optional<BfsSpec> Y;
  double tolerance = tolerance::kExact;
  std::size_t limit = kMaxEnumerationAtoms;
};

struct MeasureExtension {
  /// constant is K when phi = K mu, else 1 (the phi ratio bound).
  /// constants.phi is the phi ratio of the output under ||.||_{L^1,0}.
  ExtensionResult result;
  /// nu_x for every point x of the space, in order.
  std::vector<SetFunctionTable> nu;
  std::optional<double> mu_constant;
};

/// T_hat(x) = density of nu_x. Requires T phi-Lipschitz on S under
/// ||.||_{L^1,0} (PreconditionError) and every nu_x additive and
/// mu-continuous (HypothesisError naming x and the failing subsets).
MeasureExtension measure_extend(const FiniteMetricSpace& space, const SampledMap& map,
                                const SetFunctionTable& phi,
                                const MeasureExtensionOptions& options = {});

/// max over pairs and subsets of ||(T(x) - T(y)) chi_A||_Y - K ||chi_A||_Y d(x, y).
CheckResult y_lipschitz_check(const FiniteMetricSpace& space, const SampledMap& total_map,
                              const BfsSpec& Y, double K, double tol = tolerance::kExact,
                              std::size_t limit = kMaxEnumerationAtoms);

struct ConverseReport {
  /// Factor c applied to phi; 1 unless the check was built from a Y-norm.
  double scale = 1.0;
  /// max over x and A of |nu_hat_x(A) - integral_A T(x) dmu|.
  double deviation = 0.0;
  /// max over x of |semivariation(nu_hat_x) - ||T(x)||_{L^1,0}|.
  double semivariation_gap = 0.0;
  /// max over x of |variation(nu_hat_x) - ||T(x)||_{L^1}|.
  double variation_gap = 0.0;
  std::vector<CheckResult> checks;
  bool holds() const;
};

/// Recomputes nu_hat_x with y ranging over the whole space for a total map
/// and compares it with integral_A T(x) dmu.
ConverseReport converse_check(const FiniteMetricSpace& space, const SampledMap& total_map,
                              const SetFunctionTable& phi, double tol = tolerance::kExact,
                              std::size_t limit = kMaxEnumerationAtoms);

/// Converse for a Y-Lipschitz total map: phi(A) = c K ||chi_A||_Y with
/// c = max(1, ||chi_Omega||_{Y'}), which makes the rescaled dual satisfy
/// ||chi_Omega|| <= 1. The factor is reported as `scale`.
ConverseReport converse_check(const FiniteMetricSpace& space, const SampledMap& total_map,
                              const BfsSpec& Y, double K, double tol = tolerance::kExact,
                              std::size_t limit = kMaxEnumerationAtoms);

/// max over B of |nu(B)|.
double semivariation(const FiniteSignedMeasure& nu);
/// sum of |nu({i})|.
double variation(const FiniteSignedMeasure& nu);

struct YVariation {
  double value = 0.0;
  /// nu charges a null atom, so no density in Y exists.
  bool infinite = false;
  std::optional<std::size_t> null_atom;
};

/// ||h||_Y for the density h of nu.
YVariation y_variation(const FiniteSignedMeasure& nu, const BfsSpec& Y);

}  // namespace lipext
