#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lipext/bfs.hpp"
#include "lipext/core.hpp"
#include "lipext/metric.hpp"
#include "lipext/sampled_map.hpp"

namespace lipext {

/// Y0^(1-theta) Y1^theta over a shared measure space.
struct CalderonSpace {
  BfsSpec Y0;
  BfsSpec Y1;
  double theta;

  /// Throws ShapeError when Y0 and Y1 live on different measure spaces and
  /// ParameterError unless 0 < theta < 1.
  CalderonSpace(BfsSpec y0, BfsSpec y1, double theta);
};

struct CalderonResult {
  double value = 0.0;
  /// Feasible decomposition: |x| <= x0^(1-theta) x1^theta on positive-weight
  /// atoms, scaled so that ||x0||_Y0 = ||x1||_Y1 = value.
  Vector x0;
  Vector x1;
  /// Newton iterations spent (0 when a closed form applies).
  std::size_t iterations = 0;
  double gradient_norm = 0.0;
};

/// inf of ||x0||^(1-theta) ||x1||^theta over dominations |x| <= |x0|^(1-theta) |x1|^theta.
/// With both exponents finite this is a smooth convex problem in the log-ratio
/// u = log(x0 / x1), solved by damped Newton from two starts. When one side is
/// L^inf the optimal split saturates it and the value is explicit.
/// Throws NumericError if Newton stalls or the result is infeasible.
CalderonResult calderon_norm(const CalderonSpace& C, std::span<const double> x);

/// Result of one inequality check over an enumerated family.
/// Bound checks report `achieved` as a ratio or constant.
CheckResult interpolated_lipschitz_check(const FiniteMetricSpace& space, const SampledMap& map,
                                         const BfsSpec& Y0, const BfsSpec& Y1, double theta,
                                         double K0, double K1,
                                         double tol = tolerance::kOptimized);

/// ||(T(x) - T(y)) chi_A||_{Y0^(1-theta) Y1^theta} <= phi0(A)^(1-theta) phi1(A)^theta d(x, y).
/// achieved = max ratio over sets with both phi values positive; on the other
/// sets the left side must vanish. Both phi_i-Lipschitz hypotheses are
/// verified first (PreconditionError).
CheckResult interpolated_phi_check(const FiniteMetricSpace& space, const SampledMap& map,
                                   const BfsSpec& Y0, const BfsSpec& Y1, double theta,
                                   const SetFunctionTable& phi0, const SetFunctionTable& phi1,
                                   double tol = tolerance::kOptimized,
                                   std::size_t limit = kMaxEnumerationAtoms);

/// |T(x) - T(y)| <= K0^(1-theta) K1^theta d(x, y) on positive-weight atoms,
/// after verifying the pointwise hypotheses with K0 and K1.
CheckResult interpolated_pointwise_check(const FiniteMetricSpace& space, const SampledMap& map,
                                         double theta, double K0, double K1,
                                         const FiniteMeasureSpace& mu,
                                         double tol = tolerance::kExact);

/// Two norms on the same coordinate space with K-method parameters.
struct InterpolationCouple {
  BfsSpec E0;
  BfsSpec E1;
  double theta;
  double p;

  /// Throws ShapeError on a dimension mismatch and ParameterError unless
  /// 0 < theta < 1 and 1 <= p < inf.
  InterpolationCouple(BfsSpec e0, BfsSpec e1, double theta, double p);
};

struct KFunctionalResult {
  double value = 0.0;
  /// a = a0 + a1 attaining `value` up to solver tolerance.
  Vector a0;
  Vector a1;
};

/// K(t, a) = inf over a = a0 + a1 of ||a0||_E0 + t ||a1||_E1.
/// With an L^inf side the problem is one-dimensional in the clipping level and
/// is solved by breakpoint search plus golden section; otherwise by a
/// log-barrier Newton method on 0 <= a0 <= |a|. Throws ParameterError when
/// t <= 0 and NumericError when the solver fails.
KFunctionalResult k_functional(double t, std::span<const double> a, const InterpolationCouple& couple);

struct RealInterpNorm {
  double value = 0.0;
  /// Below t_min K(t) = t ||a||_E1 and above t_max K(t) = ||a||_E0, both exactly.
  double t_min = 0.0;
  double t_max = 0.0;
  double quadrature_error = 0.0;
};

/// (integral_0^inf (t^-theta K(t, a))^p dt/t)^(1/p): exact tails outside
/// [t_min, t_max], adaptive Gauss-Kronrod in log t inside. Throws
/// NumericError when the estimated relative error exceeds 1e-4.
RealInterpNorm real_interp_norm(std::span<const double> a, const InterpolationCouple& couple);

/// Checks ||T(x) chi_A||_{Y theta,p} <= phi0(A)^(1-theta) phi1(A)^theta ||x||_{E theta,p}
/// for every test vector and every subset A of Y's atoms, where T is the
/// matrix (rows: atoms of Y, columns: coordinates of E). The hypotheses
///   ||T(x) chi_A||_Y0 <= phi0(A) ||x||_E0,  ||T(x - y) chi_A||_Y1 <= phi1(A) ||x - y||_E1
/// are verified on the test vectors and their pairwise differences
/// (PreconditionError). achieved is the max ratio; holds when <= 1 + tol.
CheckResult interp_domination_check(const Matrix& T, const InterpolationCouple& E,
                                    const InterpolationCouple& Y, const SetFunctionTable& phi0,
                                    const SetFunctionTable& phi1,
                                    const std::vector<Vector>& test_vectors,
                                    double tol = 1e-5, std::size_t limit = kMaxEnumerationAtoms);

/// Closed-form norms of a linear map between two weighted spaces, exact when
/// the source is L^1 (column extreme points) or L^inf (sign vertices).
/// Throws ParameterError for other source exponents.
double operator_norm(const Matrix& T, const BfsSpec& source, const BfsSpec& target);

}  // namespace lipext
