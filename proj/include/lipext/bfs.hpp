#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lipext/core.hpp"
#include "lipext/sampled_map.hpp"

namespace lipext {

/// n atoms with nonnegative weights. The sigma-algebra is the full power set;
/// zero-weight atoms are the null sets.
class FiniteMeasureSpace {
 public:
  /// Throws ValidationError on negative or non-finite weights, or when every weight is 0.
  explicit FiniteMeasureSpace(Vector weights);

  std::size_t size() const { return weights_.size(); }
  double weight(std::size_t i) const { return weights_[i]; }
  const Vector& weights() const { return weights_; }
  double total() const { return total_; }
  double measure(Subset set) const;

  Subset all() const { return size() >= 64 ? ~Subset{0} : (Subset{1} << size()) - 1; }
  Subset null_atoms() const;
  Subset positive_atoms() const { return all() & ~null_atoms(); }
  bool is_null(std::size_t atom) const { return weights_[atom] == 0.0; }

  friend bool operator==(const FiniteMeasureSpace&, const FiniteMeasureSpace&) = default;

 private:
  Vector weights_;
  double total_ = 0.0;
};

/// Integrability exponent p in [1, inf].
class Exponent {
 public:
  /// Throws ParameterError unless 1 <= p <= inf.
  explicit Exponent(double p);
  static Exponent infinity() { return Exponent(kInfinity); }

  double value() const { return p_; }
  bool is_infinite() const { return p_ == kInfinity; }
  /// 1/p + 1/p' = 1, with 1' = inf and inf' = 1.
  Exponent conjugate() const;
  std::string to_string() const;

  friend bool operator==(const Exponent&, const Exponent&) = default;

 private:
  double p_;
};

/// A weighted L^p norm over a finite measure space:
///   p < inf:  (sum_i w_i s_i |f_i|^p)^(1/p)
///   p = inf:  max over positive-weight atoms of s_i |f_i|
struct BfsSpec {
  FiniteMeasureSpace base;
  Exponent p;
  Vector scale;

  /// Empty `scale` means all ones. Scales must be positive and finite.
  BfsSpec(FiniteMeasureSpace base_space, Exponent exponent, Vector scales = {});

  std::size_t size() const { return base.size(); }
  bool unit_scale() const;
  std::string describe() const;
};

/// Throws ShapeError when f has the wrong length.
double norm(const BfsSpec& space, std::span<const double> f);

/// Conjugate exponent with the scales that make the pairing integral dual:
/// 1/s for p in {1, inf}, s^(-1/(p-1)) otherwise (which is 1/s at p = 2).
BfsSpec kothe_dual(const BfsSpec& space);

struct DualNormCertificate {
  /// sup of |integral f g dmu| over the unit ball of the dual.
  double value = 0.0;
  /// norm(space, f), computed directly.
  double closed_form = 0.0;
  /// A g attaining the sup.
  Vector extremizer;
  double extremizer_dual_norm = 0.0;
  bool agrees = false;
};

/// Duality oracle for norm(). For p in {1, inf} the dual ball is a polytope
/// and its vertices are enumerated (2^n sign patterns, resp. 2n signed
/// atoms); otherwise the norming function s|f|^(p-1)sign(f)/||f||^(p-1) is used.
DualNormCertificate dual_norm_by_enumeration(const BfsSpec& space, std::span<const double> f,
                                             std::size_t limit = kMaxEnumerationAtoms);

double integrate(std::span<const double> f, const FiniteMeasureSpace& mu);
double integrate(std::span<const double> f, const FiniteMeasureSpace& mu, Subset set);
/// integral of f * g dmu.
double pairing(std::span<const double> f, std::span<const double> g, const FiniteMeasureSpace& mu);

/// f * chi_A.
Vector restrict_to(std::span<const double> f, Subset set);
Vector indicator(std::size_t n, Subset set);

using NormFn = std::function<double(std::span<const double>)>;
NormFn as_norm(const BfsSpec& space);
/// rho(a, b) = norm(space, a - b).
RangeMetric norm_metric(const BfsSpec& space);

/// A real value for every subset of atoms, indexed by bitmask.
class SetFunctionTable {
 public:
  /// `values` must have 2^n entries; monotonicity is determined here.
  SetFunctionTable(FiniteMeasureSpace base, Vector values);

  /// Evaluates `fn` on every subset.
  static SetFunctionTable tabulate(const FiniteMeasureSpace& base,
                                   const std::function<double(Subset)>& fn,
                                   std::size_t limit = kMaxEnumerationAtoms);

  const FiniteMeasureSpace& base() const { return base_; }
  std::size_t atoms() const { return base_.size(); }
  std::size_t size() const { return values_.size(); }
  double operator[](Subset set) const { return values_[set]; }
  const Vector& values() const { return values_; }

  bool monotone() const { return !monotonicity_witness_; }
  /// (A, A + {i}) with values[A] > values[A + {i}] when not monotone.
  const std::optional<std::pair<Subset, Subset>>& monotonicity_witness() const {
    return monotonicity_witness_;
  }
  double sup_abs() const;

 private:
  FiniteMeasureSpace base_;
  Vector values_;
  std::optional<std::pair<Subset, Subset>> monotonicity_witness_;
};

/// phi(A) = K * ||chi_A||_Z. Z = L^1 gives K mu(A); Z = L^inf gives K on
/// non-null sets and 0 on null ones. Throws ParameterError when K <= 0.
SetFunctionTable indicator_norm_set_function(const BfsSpec& Z, double K,
                                             std::size_t limit = kMaxEnumerationAtoms);

/// If values[A] = c * mu(A) for every A (relative tolerance 1e-12), returns c.
std::optional<double> proportional_to_measure(const SetFunctionTable& table);

/// f <= g on every atom of positive weight.
bool ae_leq(std::span<const double> f, std::span<const double> g, const FiniteMeasureSpace& mu);

/// One piece of a step function on [0, mu(Omega)).
struct Step {
  double value = 0.0;
  double length = 0.0;
  friend bool operator==(const Step&, const Step&) = default;
};

/// Nonincreasing rearrangement of |f|: atoms sorted by |f_i| descending, null
/// atoms dropped, equal adjacent values merged.
std::vector<Step> decreasing_rearrangement(std::span<const double> f, const FiniteMeasureSpace& mu);

/// integral_0^t f*(s) ds for a rearrangement; t beyond mu(Omega) is clamped.
double rearrangement_integral(const std::vector<Step>& steps, double t);

}  // namespace lipext
