#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "lipext/bfs.hpp"
#include "lipext/core.hpp"
#include "lipext/metric.hpp"
#include "lipext/sampled_map.hpp"

namespace lipext {

struct ConstantReport {
  /// Lipschitz constant under the range norm (|.| for scalar maps).
  std::optional<double> classical;
  /// Pointwise a.e. constant: max |T(x)(w) - T(y)(w)| / d(x, y) over live atoms.
  std::optional<double> pointwise_ae;
  /// phi-Lipschitz ratio; <= 1 means phi-Lipschitz.
  std::optional<double> phi;
};

/// An extension of a map from S to the whole space.
struct ExtensionResult {
  /// Defined on every point of the space, in order.
  SampledMap extended;
  /// The constant the extension was built with.
  double constant = 0.0;
  ConstantReport constants;
  /// For each point of S (in the order of the input map): max discrepancy
  /// between the extension and the input over positive-weight atoms.
  Vector agreement;
  std::vector<CheckResult> checks;

  bool all_hold() const;
};

struct ExtensionOptions {
  /// Replace the supplied K by the smallest constant attained on S.
  bool strict = false;
};

/// T^M(x) = max over u in S of T(u) - K d(x, u), for a real map (one column).
/// Points of S keep their values. Throws on empty S, K <= 0, or K below the
/// Lipschitz constant of T on S (PreconditionError with the pair).
ExtensionResult mcshane_extend(const FiniteMetricSpace& space, const SampledMap& map, double K,
                               const ExtensionOptions& options = {});

/// T^W(x) = min over u in S of T(u) + K d(x, u); same contract as mcshane_extend.
ExtensionResult whitney_extend(const FiniteMetricSpace& space, const SampledMap& map, double K,
                               const ExtensionOptions& options = {});

struct PointwiseConstant {
  double value = 0.0;
  /// Domain positions of the pair and the atom attaining the max.
  std::optional<std::pair<std::size_t, std::size_t>> pair;
  std::size_t atom = 0;
};

/// Essential-sup Lipschitz constant: zero-weight atoms never count.
PointwiseConstant pointwise_ae_constant(const FiniteMetricSpace& space, const SampledMap& map,
                                        const FiniteMeasureSpace& mu);

/// T_hat(y)(w) = max over x in S of r_x(w) - K d(x, y), atom by atom, where
/// r_x is the stored row. On positive-weight atoms the rows of S are kept
/// (the x = y term attains the max); on null atoms the formula is used, so
/// the output of a point of S may differ from its input there.
/// Checks recorded: agreement on S, pointwise constant <= K, and the
/// sandwich |T_hat(x) - T(y)| <= K d(x, y) a.e. for x in M, y in S.
ExtensionResult pointwise_extend(const FiniteMetricSpace& space, const SampledMap& map, double K,
                                 const FiniteMeasureSpace& mu, const ExtensionOptions& options = {});

struct NormConstantReport {
  double achieved = 0.0;
  double bound = 0.0;
  bool holds = false;
};

/// Lipschitz constant of a pointwise K-Lipschitz extension under L^p(mu)
/// against K mu(Omega)^(1/p) (K for p = inf).
NormConstantReport norm_constant_bounds(const FiniteMetricSpace& space,
                                        const ExtensionResult& extension, double K, Exponent p,
                                        const FiniteMeasureSpace& mu);

/// Extends a map into l^inf(I), I = columns, by running mcshane_extend on each
/// coordinate with the same K. Records the sup-norm constant and the bound
/// |T_i(x)| <= K d(x, x0) + ||T(x0)||_inf with x0 the first point of S.
ExtensionResult coordinatewise_extend_linf(const FiniteMetricSpace& space, const SampledMap& map,
                                           double K, const ExtensionOptions& options = {});

/// Shared argument validation for every extension operation: S nonempty,
/// indices in range and distinct (DomainError), K positive and finite
/// (ParameterError; zero is accepted when `allow_zero`).
void validate_extension_input(const FiniteMetricSpace& space, const SampledMap& map, double K,
                              bool allow_zero = false);

}  // namespace lipext
