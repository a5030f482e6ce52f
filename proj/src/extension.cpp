#include "lipext/extension.hpp"

#include <algorithm>
#include <cmath>

#include "detail.hpp"

namespace lipext {

bool ExtensionResult::all_hold() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.holds; });
}

void validate_extension_input(const FiniteMetricSpace& space, const SampledMap& map, double K,
                              bool allow_zero) {
  if (map.size() == 0) throw DomainError("cannot extend from an empty subset");
  std::vector<bool> seen(space.size(), false);
  for (std::size_t point : map.domain) {
    if (point >= space.size())
      throw DomainError("subset index " + std::to_string(point) + " is outside the space");
    if (seen[point]) throw DomainError("subset lists point " + std::to_string(point) + " twice");
    seen[point] = true;
  }
  if (!std::isfinite(K) || K < 0.0 || (K == 0.0 && !allow_zero))
    throw ParameterError("extension constant K must be positive and finite, got " + detail::fmt(K));
}

namespace {

enum class Envelope { kLower, kUpper };

std::string domain_pair(const SampledMap& map, std::pair<std::size_t, std::size_t> positions) {
  return detail::pair_witness(map.domain[positions.first], map.domain[positions.second]);
}

// Agreement of an extension with the input map on S, over the atoms in `live`.
Vector agreement_on(const SampledMap& map, const SampledMap& extended, Subset live) {
  Vector out(map.size(), 0.0);
  for (std::size_t k = 0; k < map.size(); ++k) {
    const auto in = map.at(k);
    const auto ext = extended.at(map.domain[k]);
    for (std::size_t w = 0; w < map.atoms(); ++w)
      if (contains(live, w)) out[k] = std::max(out[k], std::abs(ext[w] - in[w]));
  }
  return out;
}

CheckResult agreement_check(const SampledMap& map, const Vector& agreement) {
  CheckResult c{"extension agrees with T on S", 0.0, 0.0, true, ""};
  for (std::size_t k = 0; k < agreement.size(); ++k) {
    if (agreement[k] > c.achieved) {
      c.achieved = agreement[k];
      c.witness = "point " + std::to_string(map.domain[k]);
    }
  }
  c.holds = c.achieved == 0.0;
  if (c.holds) c.witness.clear();
  return c;
}

CheckResult bound_check(std::string name, double achieved, double bound, std::string witness) {
  const bool holds = detail::within(achieved, bound, tolerance::kExact);
  return {std::move(name), bound, achieved, holds, holds ? "" : std::move(witness)};
}

ExtensionResult scalar_extend(const FiniteMetricSpace& space, const SampledMap& map, double K,
                              const ExtensionOptions& options, Envelope envelope) {
  if (map.atoms() != 1)
    throw ShapeError("scalar extension needs a map with exactly one column, got " +
                     std::to_string(map.atoms()));
  const LipschitzConstant lip = lipschitz_constant(space, map, absolute_difference());
  if (options.strict) K = lip.value;
  validate_extension_input(space, map, K, options.strict);
  if (lip.witness && !detail::within(lip.value, K, tolerance::kExact)) {
    throw PreconditionError("K = " + detail::fmt(K) + " is below the Lipschitz constant " +
                                detail::fmt(lip.value) + " of T on S",
                            domain_pair(map, *lip.witness));
  }

  const std::size_t n = space.size();
  Matrix values(n, 1);
  for (std::size_t x = 0; x < n; ++x) {
    const std::size_t pos = map.position_of(x);
    if (pos < map.size()) {
      values(x, 0) = map.at(pos)[0];
      continue;
    }
    double best = envelope == Envelope::kLower ? -kInfinity : kInfinity;
    for (std::size_t u = 0; u < map.size(); ++u) {
      const double reach = K * space.distance(x, map.domain[u]);
      const double t = map.at(u)[0];
      best = envelope == Envelope::kLower ? std::max(best, t - reach) : std::min(best, t + reach);
    }
    values(x, 0) = best;
  }

  ExtensionResult result;
  result.extended = SampledMap::total(std::move(values));
  result.constant = K;
  const LipschitzConstant ext_lip =
      lipschitz_constant(space, result.extended, absolute_difference());
  result.constants.classical = ext_lip.value;
  result.agreement = agreement_on(map, result.extended, ~Subset{0});
  result.checks.push_back(agreement_check(map, result.agreement));
  result.checks.push_back(
      bound_check("Lipschitz constant <= K", ext_lip.value, K,
                  ext_lip.witness ? detail::pair_witness(ext_lip.witness->first,
                                                         ext_lip.witness->second)
                                  : ""));
  return result;
}

}  // namespace

ExtensionResult mcshane_extend(const FiniteMetricSpace& space, const SampledMap& map, double K,
                               const ExtensionOptions& options) {
  return scalar_extend(space, map, K, options, Envelope::kLower);
}

ExtensionResult whitney_extend(const FiniteMetricSpace& space, const SampledMap& map, double K,
                               const ExtensionOptions& options) {
  return scalar_extend(space, map, K, options, Envelope::kUpper);
}

PointwiseConstant pointwise_ae_constant(const FiniteMetricSpace& space, const SampledMap& map,
                                        const FiniteMeasureSpace& mu) {
  if (map.atoms() != mu.size())
    throw ShapeError("map has " + std::to_string(map.atoms()) + " columns for " +
                     std::to_string(mu.size()) + " atoms");
  PointwiseConstant out;
  for (std::size_t a = 0; a < map.size(); ++a) {
    for (std::size_t b = a + 1; b < map.size(); ++b) {
      const double d = space.distance(map.domain[a], map.domain[b]);
      for (std::size_t w = 0; w < mu.size(); ++w) {
        if (mu.is_null(w)) continue;
        const double ratio = std::abs(map.at(a)[w] - map.at(b)[w]) / d;
        if (ratio > out.value || !out.pair) {
          out.value = std::max(out.value, ratio);
          out.pair = std::make_pair(a, b);
          out.atom = w;
        }
      }
    }
  }
  return out;
}

ExtensionResult pointwise_extend(const FiniteMetricSpace& space, const SampledMap& map, double K,
                                 const FiniteMeasureSpace& mu, const ExtensionOptions& options) {
  const PointwiseConstant on_s = pointwise_ae_constant(space, map, mu);
  if (options.strict) K = on_s.value;
  validate_extension_input(space, map, K, options.strict);
  if (on_s.pair && !detail::within(on_s.value, K, tolerance::kExact)) {
    throw PreconditionError("K = " + detail::fmt(K) + " is below the pointwise a.e. constant " +
                                detail::fmt(on_s.value) + " of T on S",
                            domain_pair(map, *on_s.pair) + " atom " + std::to_string(on_s.atom));
  }

  const std::size_t n = space.size();
  const std::size_t atoms = mu.size();
  Matrix values(n, atoms);
  for (std::size_t y = 0; y < n; ++y) {
    const std::size_t pos = map.position_of(y);
    for (std::size_t w = 0; w < atoms; ++w) {
      if (pos < map.size() && !mu.is_null(w)) {
        values(y, w) = map.at(pos)[w];
        continue;
      }
      double best = -kInfinity;
      for (std::size_t x = 0; x < map.size(); ++x)
        best = std::max(best, map.at(x)[w] - K * space.distance(map.domain[x], y));
      values(y, w) = best;
    }
  }

  ExtensionResult result;
  result.extended = SampledMap::total(std::move(values));
  result.constant = K;
  const PointwiseConstant ext = pointwise_ae_constant(space, result.extended, mu);
  result.constants.pointwise_ae = ext.value;
  result.constants.classical =
      lipschitz_constant(space, result.extended, norm_metric(BfsSpec(mu, Exponent::infinity())))
          .value;
  result.agreement = agreement_on(map, result.extended, mu.positive_atoms());
  result.checks.push_back(agreement_check(map, result.agreement));
  result.checks.push_back(bound_check(
      "pointwise a.e. constant <= K", ext.value, K,
      ext.pair ? detail::pair_witness(ext.pair->first, ext.pair->second) + " atom " +
                     std::to_string(ext.atom)
               : ""));

  // |T_hat(x) - T(y)| <= K d(x, y) a.e. for every x in M and y in S.
  double worst = 0.0;
  std::string witness;
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t k = 0; k < map.size(); ++k) {
      const double d = space.distance(x, map.domain[k]);
      for (std::size_t w = 0; w < atoms; ++w) {
        if (mu.is_null(w)) continue;
        const double excess = std::abs(result.extended.at(x)[w] - map.at(k)[w]) - K * d;
        if (excess > worst) {
          worst = excess;
          witness = detail::pair_witness(x, map.domain[k]) + " atom " + std::to_string(w);
        }
      }
    }
  }
  result.checks.push_back(bound_check("sandwich |T_hat(x) - T(y)| <= K d(x,y) a.e.", worst, 0.0,
                                      witness));
  return result;
}

NormConstantReport norm_constant_bounds(const FiniteMetricSpace& space,
                                        const ExtensionResult& extension, double K, Exponent p,
                                        const FiniteMeasureSpace& mu) {
  NormConstantReport r;
  r.achieved =
      lipschitz_constant(space, extension.extended, norm_metric(BfsSpec(mu, p))).value;
  r.bound = p.is_infinite() ? K : K * std::pow(mu.total(), 1.0 / p.value());
  r.holds = r.achieved <= r.bound + tolerance::kExact;
  return r;
}

ExtensionResult coordinatewise_extend_linf(const FiniteMetricSpace& space, const SampledMap& map,
                                           double K, const ExtensionOptions& options) {
  const LipschitzConstant lip = lipschitz_constant(space, map, sup_distance());
  if (options.strict) K = lip.value;
  validate_extension_input(space, map, K, options.strict);
  if (lip.witness && !detail::within(lip.value, K, tolerance::kExact)) {
    throw PreconditionError("K = " + detail::fmt(K) + " is below the sup-norm Lipschitz constant " +
                                detail::fmt(lip.value) + " of T on S",
                            domain_pair(map, *lip.witness));
  }

  const std::size_t n = space.size();
  const std::size_t cols = map.atoms();
  Matrix values(n, cols);
  for (std::size_t i = 0; i < cols; ++i) {
    Matrix column(map.size(), 1);
    for (std::size_t k = 0; k < map.size(); ++k) column(k, 0) = map.at(k)[i];
    const ExtensionResult coord =
        mcshane_extend(space, SampledMap(map.domain, std::move(column)), K);
    for (std::size_t x = 0; x < n; ++x) values(x, i) = coord.extended.at(x)[0];
  }

  ExtensionResult result;
  result.extended = SampledMap::total(std::move(values));
  result.constant = K;
  const LipschitzConstant ext_lip = lipschitz_constant(space, result.extended, sup_distance());
  result.constants.classical = ext_lip.value;
  result.agreement = agreement_on(map, result.extended, ~Subset{0});
  result.checks.push_back(agreement_check(map, result.agreement));
  result.checks.push_back(bound_check(
      "sup-norm Lipschitz constant <= K", ext_lip.value, K,
      ext_lip.witness ? detail::pair_witness(ext_lip.witness->first, ext_lip.witness->second)
                      : ""));

  const std::size_t x0 = map.domain.front();
  double sup_x0 = 0.0;
  for (double v : map.at(0)) sup_x0 = std::max(sup_x0, std::abs(v));
  double worst = -kInfinity;
  std::string witness;
  for (std::size_t x = 0; x < n; ++x) {
    const double bound = K * space.distance(x, x0) + sup_x0;
    for (std::size_t i = 0; i < cols; ++i) {
      const double excess = std::abs(result.extended.at(x)[i]) - bound;
      if (excess > worst) {
        worst = excess;
        witness = "point " + std::to_string(x) + " coordinate " + std::to_string(i);
      }
    }
  }
  result.checks.push_back(bound_check("|T_i(x)| <= K d(x,x0) + ||T(x0)||_inf", std::max(worst, 0.0),
                                      0.0, witness));
  return result;
}

}  // namespace lipext
