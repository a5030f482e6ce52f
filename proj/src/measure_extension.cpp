#include "lipext/measure_extension.hpp"

#include <algorithm>
#include <cmath>

#include "detail.hpp"

namespace lipext {

namespace {

std::string subset_pair(Subset a, Subset b, std::size_t n) {
  return "subsets " + format_subset(a, n) + " and " + format_subset(b, n);
}

bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

void require_same_atoms(const SampledMap& map, const SetFunctionTable& phi) {
  if (map.atoms() != phi.atoms()) {
    throw ShapeError("map has " + std::to_string(map.atoms()) + " columns but phi is defined on " +
                     std::to_string(phi.atoms()) + " atoms");
  }
}

}  // namespace

FiniteSignedMeasure::FiniteSignedMeasure(FiniteMeasureSpace base, Vector atom_values)
    : base_(std::move(base)), atom_values_(std::move(atom_values)) {
  if (atom_values_.size() != base_.size()) {
    throw ShapeError("signed measure has " + std::to_string(atom_values_.size()) + " values for " +
                     std::to_string(base_.size()) + " atoms");
  }
  for (std::size_t i = 0; i < atom_values_.size(); ++i)
    if (!std::isfinite(atom_values_[i]))
      throw ValidationError("signed measure value on atom " + std::to_string(i) + " is not finite");
}

FiniteSignedMeasure FiniteSignedMeasure::from_density(const FiniteMeasureSpace& base,
                                                      std::span<const double> h) {
  if (h.size() != base.size()) throw ShapeError("density length does not match the space");
  Vector v(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) v[i] = base.weight(i) * h[i];
  return FiniteSignedMeasure(base, std::move(v));
}

FiniteSignedMeasure FiniteSignedMeasure::from_table(const SetFunctionTable& table) {
  Vector v(table.atoms());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = table[Subset{1} << i];
  return FiniteSignedMeasure(table.base(), std::move(v));
}

double FiniteSignedMeasure::operator()(Subset set) const {
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i)
    if (contains(set, i)) s += atom_values_[i];
  return s;
}

SetFunctionTable FiniteSignedMeasure::table(std::size_t limit) const {
  return SetFunctionTable::tabulate(base_, [this](Subset a) { return (*this)(a); }, limit);
}

double l1_zero_norm(std::span<const double> f, const FiniteMeasureSpace& mu) {
  if (f.size() != mu.size()) throw ShapeError("vector length does not match the measure space");
  double pos = 0.0;
  double neg = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] > 0.0) pos += mu.weight(i) * f[i];
    if (f[i] < 0.0) neg += mu.weight(i) * f[i];
  }
  return std::max(pos, -neg);
}

double l1_zero_norm_by_enumeration(std::span<const double> f, const FiniteMeasureSpace& mu,
                                   std::size_t limit) {
  if (f.size() != mu.size()) throw ShapeError("vector length does not match the measure space");
  const std::size_t count = subset_count(mu.size(), limit);
  double best = 0.0;
  for (Subset a = 0; a < count; ++a) best = std::max(best, std::abs(integrate(f, mu, a)));
  return best;
}

NormFn l1_zero_norm_fn(const FiniteMeasureSpace& mu) {
  return [mu](std::span<const double> f) { return l1_zero_norm(f, mu); };
}

PhiLipschitzReport phi_lipschitz_constant(const FiniteMetricSpace& space, const SampledMap& map,
                                          const SetFunctionTable& phi, const NormFn& norm,
                                          std::size_t limit) {
  require_same_atoms(map, phi);
  const std::size_t n = phi.atoms();
  const std::size_t count = subset_count(n, limit);

  PhiLipschitzReport r;
  for (Subset a = 1; a < count; ++a)
    if (phi[a] <= 0.0) ++r.skipped_subsets;

  Vector diff(n);
  Vector restricted(n);
  bool first = true;
  for (std::size_t i = 0; i < map.size(); ++i) {
    for (std::size_t j = i + 1; j < map.size(); ++j) {
      const std::size_t x = map.domain[i];
      const std::size_t y = map.domain[j];
      const double d = space.distance(x, y);
      for (std::size_t k = 0; k < n; ++k) diff[k] = map.at(i)[k] - map.at(j)[k];
      for (Subset a = 0; a < count; ++a) {
        for (std::size_t k = 0; k < n; ++k) restricted[k] = contains(a, k) ? diff[k] : 0.0;
        const double lhs = norm(restricted);
        const double rhs = phi[a] * d;
        const std::string where = detail::pair_witness(x, y) + " on " + format_subset(a, n);
        if (first || lhs - rhs > r.excess) {
          r.excess = lhs - rhs;
          r.excess_witness = where;
          first = false;
        }
        if (phi[a] > 0.0 && lhs / rhs > r.ratio) {
          r.ratio = lhs / rhs;
          r.ratio_witness = where;
        }
      }
    }
  }
  return r;
}

PhiLipschitzReport phi_lipschitz_constant(const FiniteMetricSpace& space, const SampledMap& map,
                                          const SetFunctionTable& phi, const BfsSpec& Y,
                                          std::size_t limit) {
  return phi_lipschitz_constant(space, map, phi, as_norm(Y), limit);
}

SetFunctionTable nu_table(const FiniteMetricSpace& space, std::size_t x, const SampledMap& map,
                          const SetFunctionTable& phi, std::size_t limit) {
  require_same_atoms(map, phi);
  if (map.size() == 0) throw DomainError("nu_x needs a nonempty subset");
  if (x >= space.size()) throw DomainError("point " + std::to_string(x) + " is outside the space");
  const FiniteMeasureSpace& mu = phi.base();
  return SetFunctionTable::tabulate(
      mu,
      [&](Subset a) {
        double best = -kInfinity;
        for (std::size_t k = 0; k < map.size(); ++k) {
          const double v =
              integrate(map.at(k), mu, a) - phi[a] * space.distance(x, map.domain[k]);
          best = std::max(best, v);
        }
        return best;
      },
      limit);
}

AdditivityReport check_additive(const SetFunctionTable& table, double tol) {
  AdditivityReport r;
  const auto& v = table.values();
  if (std::abs(v[0]) > tol) {
    r.additive = false;
    r.witness = std::make_pair(Subset{0}, Subset{0});
    r.defect = std::abs(v[0]);
    return r;
  }
  for (Subset a = 1; a < v.size(); ++a) {
    const Subset low = a & (~a + 1);
    const Subset rest = a & ~low;
    if (rest == 0) continue;
    const double defect = std::abs(v[a] - v[low] - v[rest]);
    if (defect > r.defect) r.defect = defect;
    if (r.additive && defect > tol * std::max(1.0, std::abs(v[a]))) {
      r.additive = false;
      r.witness = std::make_pair(low, rest);
    }
  }
  return r;
}

ContinuityReport check_mu_continuous(const SetFunctionTable& table, double tol) {
  ContinuityReport r;
  const Subset nulls = table.base().null_atoms();
  // Enumerate the nonempty subsets of the null atoms.
  for (Subset a = nulls; a != 0; a = (a - 1) & nulls) {
    if (std::abs(table[a]) > tol) {
      r.continuous = false;
      r.witness = a;
      break;
    }
  }
  return r;
}

Vector radon_nikodym(const SetFunctionTable& table, double tol) {
  const std::size_t n = table.atoms();
  const AdditivityReport add = check_additive(table, tol);
  if (!add.additive)
    throw HypothesisError("set function is not additive",
                          subset_pair(add.witness->first, add.witness->second, n));
  const ContinuityReport cont = check_mu_continuous(table, tol);
  if (!cont.continuous)
    throw HypothesisError("set function charges a null set", format_subset(*cont.witness, n));

  const FiniteMeasureSpace& mu = table.base();
  Vector h(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (!mu.is_null(i)) h[i] = table[Subset{1} << i] / mu.weight(i);
  for (Subset a = 0; a < table.size(); ++a) {
    if (!close(integrate(h, mu, a), table[a], tol))
      throw HypothesisError("density does not reproduce the set function", format_subset(a, n));
  }
  return h;
}

MeasureExtension measure_extend(const FiniteMetricSpace& space, const SampledMap& map,
                                const SetFunctionTable& phi,
                                const MeasureExtensionOptions& options) {
  validate_extension_input(space, map, 1.0);
  require_same_atoms(map, phi);
  const FiniteMeasureSpace& mu = phi.base();
  const std::size_t n = mu.size();
  const double tol = options.tolerance;

  const PhiLipschitzReport pre =
      phi_lipschitz_constant(space, map, phi, l1_zero_norm_fn(mu), options.limit);
  if (!pre.holds(tol)) {
    throw PreconditionError("T is not phi-Lipschitz on S under the L^1,0 norm (excess " +
                                detail::fmt(pre.excess) + ")",
                            pre.excess_witness);
  }

  MeasureExtension out;
  Matrix values(space.size(), n);
  for (std::size_t x = 0; x < space.size(); ++x) {
    SetFunctionTable nu = nu_table(space, x, map, phi, options.limit);
    const std::string who = "point " + std::to_string(x) + " (" + space.label(x) + ")";
    const AdditivityReport add = check_additive(nu, tol);
    if (!add.additive) {
      throw HypothesisError("nu_x is not additive at " + who,
                            who + ", " + subset_pair(add.witness->first, add.witness->second, n));
    }
    const ContinuityReport cont = check_mu_continuous(nu, tol);
    if (!cont.continuous) {
      throw HypothesisError("nu_x charges a null set at " + who,
                            who + ", subset " + format_subset(*cont.witness, n));
    }
    const Vector h = radon_nikodym(nu, tol);
    std::copy(h.begin(), h.end(), values.row(x).begin());
    out.nu.push_back(std::move(nu));
  }

  ExtensionResult& result = out.result;
  result.extended = SampledMap::total(std::move(values));
  out.mu_constant = proportional_to_measure(phi);
  result.constant = out.mu_constant.value_or(1.0);

  double magnitude = 1.0;
  for (std::size_t k = 0; k < map.size(); ++k)
    for (double v : map.at(k)) magnitude = std::max(magnitude, std::abs(v));
  result.agreement.assign(map.size(), 0.0);
  CheckResult agree{"extension agrees with T on S a.e.", 0.0, 0.0, true, ""};
  for (std::size_t k = 0; k < map.size(); ++k) {
    for (std::size_t w = 0; w < n; ++w) {
      if (mu.is_null(w)) continue;
      const double gap = std::abs(result.extended.at(map.domain[k])[w] - map.at(k)[w]);
      result.agreement[k] = std::max(result.agreement[k], gap);
      if (gap > agree.achieved) {
        agree.achieved = gap;
        agree.witness = "point " + std::to_string(map.domain[k]) + " atom " + std::to_string(w);
      }
    }
  }
  agree.holds = agree.achieved <= tol * magnitude;
  if (agree.holds) agree.witness.clear();
  result.checks.push_back(agree);

  const PhiLipschitzReport post = phi_lipschitz_constant(space, result.extended, phi,
                                                         l1_zero_norm_fn(mu), options.limit);
  result.constants.phi = post.ratio;
  result.checks.push_back({"phi-Lipschitz under the L^1,0 norm (excess)", 0.0, post.excess,
                           post.holds(tol), post.holds(tol) ? "" : post.excess_witness});

  if (out.mu_constant && options.Y) {
    const double K = *out.mu_constant;
    const BfsSpec& Y = *options.Y;
    result.checks.push_back(
        y_lipschitz_check(space, result.extended, Y, K, tol, options.limit));
    const LipschitzConstant lip = lipschitz_constant(space, result.extended, norm_metric(Y));
    result.constants.classical = lip.value;
    const double bound = K * norm(Y, indicator(n, mu.all()));
    const bool holds = detail::within(lip.value, bound, tol);
    result.checks.push_back(
        {"Lipschitz constant under " + Y.describe() + " <= K ||chi_Omega||_Y", bound, lip.value,
         holds,
         holds || !lip.witness ? ""
                               : detail::pair_witness(lip.witness->first, lip.witness->second)});
  }
  return out;
}

CheckResult y_lipschitz_check(const FiniteMetricSpace& space, const SampledMap& total_map,
                              const BfsSpec& Y, double K, double tol, std::size_t limit) {
  const SetFunctionTable phi = indicator_norm_set_function(Y, K, limit);
  const PhiLipschitzReport r = phi_lipschitz_constant(space, total_map, phi, Y, limit);
  const bool holds = r.holds(tol);
  return {"Y-Lipschitz with constant K in " + Y.describe() + " (excess)", 0.0, r.excess, holds,
          holds ? "" : r.excess_witness};
}

bool ConverseReport::holds() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.holds; });
}

ConverseReport converse_check(const FiniteMetricSpace& space, const SampledMap& total_map,
                              const SetFunctionTable& phi, double tol, std::size_t limit) {
  require_same_atoms(total_map, phi);
  if (!total_map.is_total_on(space.size()))
    throw ShapeError("the converse check needs a map defined on every point in order");
  const FiniteMeasureSpace& mu = phi.base();
  const std::size_t n = mu.size();

  ConverseReport r;
  std::string dev_witness;
  std::string semi_witness;
  std::string var_witness;
  for (std::size_t x = 0; x < space.size(); ++x) {
    const SetFunctionTable nu = nu_table(space, x, total_map, phi, limit);
    const auto tx = total_map.at(x);
    for (Subset a = 0; a < nu.size(); ++a) {
      const double gap = std::abs(nu[a] - integrate(tx, mu, a));
      if (gap > r.deviation) {
        r.deviation = gap;
        dev_witness = "point " + std::to_string(x) + " on " + format_subset(a, n);
      }
    }
    const FiniteSignedMeasure measure = FiniteSignedMeasure::from_table(nu);
    const double semi_gap = std::abs(semivariation(measure) - l1_zero_norm(tx, mu));
    if (semi_gap > r.semivariation_gap) {
      r.semivariation_gap = semi_gap;
      semi_witness = "point " + std::to_string(x);
    }
    const double var_gap =
        std::abs(variation(measure) - norm(BfsSpec(mu, Exponent(1.0)), tx));
    if (var_gap > r.variation_gap) {
      r.variation_gap = var_gap;
      var_witness = "point " + std::to_string(x);
    }
  }
  auto check = [tol](std::string name, double achieved, const std::string& witness) {
    const bool holds = achieved <= tol;
    return CheckResult{std::move(name), 0.0, achieved, holds, holds ? "" : witness};
  };
  r.checks.push_back(check("nu_hat_x(A) = integral_A T(x) dmu", r.deviation, dev_witness));
  r.checks.push_back(
      check("semivariation of nu_hat_x = ||T(x)||_{L^1,0}", r.semivariation_gap, semi_witness));
  r.checks.push_back(check("variation of nu_hat_x = ||T(x)||_{L^1}", r.variation_gap, var_witness));
  return r;
}

ConverseReport converse_check(const FiniteMetricSpace& space, const SampledMap& total_map,
                              const BfsSpec& Y, double K, double tol, std::size_t limit) {
  const double dual_total = norm(kothe_dual(Y), indicator(Y.size(), Y.base.all()));
  const double scale = std::max(1.0, dual_total);
  ConverseReport r =
      converse_check(space, total_map, indicator_norm_set_function(Y, scale * K, limit), tol, limit);
  r.scale = scale;
  return r;
}

double semivariation(const FiniteSignedMeasure& nu) {
  double pos = 0.0;
  double neg = 0.0;
  for (double v : nu.atom_values()) (v > 0.0 ? pos : neg) += v;
  return std::max(pos, -neg);
}

double variation(const FiniteSignedMeasure& nu) {
  double s = 0.0;
  for (double v : nu.atom_values()) s += std::abs(v);
  return s;
}

YVariation y_variation(const FiniteSignedMeasure& nu, const BfsSpec& Y) {
  if (!(nu.base() == Y.base)) throw ShapeError("signed measure and Y live on different measure spaces");
  YVariation r;
  const FiniteMeasureSpace& mu = nu.base();
  Vector h(nu.size(), 0.0);
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (mu.is_null(i)) {
      if (nu.atom_values()[i] != 0.0) {
        r.infinite = true;
        r.null_atom = i;
        r.value = kInfinity;
        return r;
      }
      continue;
    }
    h[i] = nu.atom_values()[i] / mu.weight(i);
  }
  r.value = norm(Y, h);
  return r;
}

}  // namespace lipext
