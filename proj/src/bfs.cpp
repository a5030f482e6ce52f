#include "lipext/bfs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "detail.hpp"

namespace lipext {

FiniteMeasureSpace::FiniteMeasureSpace(Vector weights) : weights_(std::move(weights)) {
  if (weights_.size() > 63) throw ValidationError("at most 63 atoms are supported");
  bool any_positive = false;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    const double w = weights_[i];
    if (!std::isfinite(w) || w < 0.0) {
      throw ValidationError("atom " + std::to_string(i) + " has invalid weight " + detail::fmt(w));
    }
    any_positive = any_positive || w > 0.0;
    total_ += w;
  }
  if (!any_positive) throw ValidationError("measure space needs at least one atom of positive weight");
}

double FiniteMeasureSpace::measure(Subset set) const {
  double m = 0.0;
  for (std::size_t i = 0; i < size(); ++i)
    if (contains(set, i)) m += weights_[i];
  return m;
}

Subset FiniteMeasureSpace::null_atoms() const {
  Subset s = 0;
  for (std::size_t i = 0; i < size(); ++i)
    if (weights_[i] == 0.0) s |= Subset{1} << i;
  return s;
}

Exponent::Exponent(double p) : p_(p) {
  if (std::isnan(p) || p < 1.0) throw ParameterError("exponent must lie in [1, inf], got " + detail::fmt(p));
}

Exponent Exponent::conjugate() const {
  if (p_ == 1.0) return infinity();
  if (is_infinite()) return Exponent(1.0);
  return Exponent(p_ / (p_ - 1.0));
}

std::string Exponent::to_string() const { return is_infinite() ? "inf" : detail::fmt(p_); }

BfsSpec::BfsSpec(FiniteMeasureSpace base_space, Exponent exponent, Vector scales)
    : base(std::move(base_space)), p(exponent), scale(std::move(scales)) {
  if (scale.empty()) scale.assign(base.size(), 1.0);
  if (scale.size() != base.size()) {
    throw ShapeError("scale has " + std::to_string(scale.size()) + " entries for " +
                     std::to_string(base.size()) + " atoms");
  }
  for (std::size_t i = 0; i < scale.size(); ++i)
    if (!(scale[i] > 0.0) || !std::isfinite(scale[i]))
      throw ValidationError("scale " + std::to_string(i) + " must be positive and finite");
}

bool BfsSpec::unit_scale() const {
  return std::all_of(scale.begin(), scale.end(), [](double s) { return s == 1.0; });
}

std::string BfsSpec::describe() const {
  return "L^" + p.to_string() + (unit_scale() ? "" : " (scaled)");
}

double norm(const BfsSpec& space, std::span<const double> f) {
  if (f.size() != space.size()) {
    throw ShapeError("vector of length " + std::to_string(f.size()) + " on a space with " +
                     std::to_string(space.size()) + " atoms");
  }
  const auto& w = space.base.weights();
  if (space.p.is_infinite()) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
      if (w[i] > 0.0) m = std::max(m, space.scale[i] * std::abs(f[i]));
    return m;
  }
  const double p = space.p.value();
  if (p == 1.0) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
      if (w[i] > 0.0) s += w[i] * space.scale[i] * std::abs(f[i]);
    return s;
  }
  // Factor out the largest entry so |f|^p neither overflows nor underflows.
  double peak = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (w[i] > 0.0) peak = std::max(peak, std::abs(f[i]));
  if (peak == 0.0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (w[i] > 0.0) s += w[i] * space.scale[i] * std::pow(std::abs(f[i]) / peak, p);
  return peak * std::pow(s, 1.0 / p);
}

BfsSpec kothe_dual(const BfsSpec& space) {
  const Exponent q = space.p.conjugate();
  Vector scale(space.size());
  const bool polytope = space.p.is_infinite() || space.p.value() == 1.0;
  for (std::size_t i = 0; i < scale.size(); ++i)
    scale[i] = polytope ? 1.0 / space.scale[i]
                        : std::pow(space.scale[i], -1.0 / (space.p.value() - 1.0));
  return BfsSpec(space.base, q, std::move(scale));
}

DualNormCertificate dual_norm_by_enumeration(const BfsSpec& space, std::span<const double> f,
                                             std::size_t limit) {
  const std::size_t n = space.size();
  if (f.size() != n) throw ShapeError("vector length does not match the space");
  subset_count(n, limit);
  const auto& mu = space.base;
  const auto& s = space.scale;

  DualNormCertificate cert;
  cert.closed_form = norm(space, f);
  cert.extremizer.assign(n, 0.0);

  if (space.p.value() == 1.0) {
    // Dual ball is the box |g_i| <= s_i on live atoms: try every sign pattern.
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < n; ++i)
      if (!mu.is_null(i)) live.push_back(i);
    Vector g(n, 0.0);
    for (Subset signs = 0; signs < (Subset{1} << live.size()); ++signs) {
      for (std::size_t k = 0; k < live.size(); ++k)
        g[live[k]] = contains(signs, k) ? s[live[k]] : -s[live[k]];
      const double signed_value = pairing(f, g, mu);
      const double v = std::abs(signed_value);
      if (v > cert.value || signs == 0) {
        cert.value = std::max(cert.value, v);
        cert.extremizer = g;
        if (signed_value < 0.0)
          for (double& e : cert.extremizer) e = -e;
      }
    }
  } else if (space.p.is_infinite()) {
    // Dual ball is the weighted cross-polytope: vertices +-(s_i / w_i) e_i.
    for (std::size_t i = 0; i < n; ++i) {
      if (mu.is_null(i)) continue;
      Vector g(n, 0.0);
      g[i] = (f[i] < 0.0 ? -1.0 : 1.0) * s[i] / mu.weight(i);
      const double v = std::abs(pairing(f, g, mu));
      if (v >= cert.value) {
        cert.value = v;
        cert.extremizer = g;
      }
    }
  } else {
    const double p = space.p.value();
    if (cert.closed_form > 0.0) {
      for (std::size_t i = 0; i < n; ++i) {
        if (mu.is_null(i) || f[i] == 0.0) continue;
        const double mag = std::pow(std::abs(f[i]) / cert.closed_form, p - 1.0);
        cert.extremizer[i] = (f[i] < 0.0 ? -1.0 : 1.0) * s[i] * mag;
      }
      cert.value = std::abs(pairing(f, cert.extremizer, mu));
    }
  }
  cert.extremizer_dual_norm = norm(kothe_dual(space), cert.extremizer);
  cert.agrees = std::abs(cert.value - cert.closed_form) <=
                tolerance::kExact * std::max(1.0, cert.closed_form);
  return cert;
}

double integrate(std::span<const double> f, const FiniteMeasureSpace& mu) {
  return integrate(f, mu, mu.all());
}

double integrate(std::span<const double> f, const FiniteMeasureSpace& mu, Subset set) {
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (contains(set, i)) s += mu.weight(i) * f[i];
  return s;
}

double pairing(std::span<const double> f, std::span<const double> g, const FiniteMeasureSpace& mu) {
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) s += mu.weight(i) * f[i] * g[i];
  return s;
}

Vector restrict_to(std::span<const double> f, Subset set) {
  Vector out(f.size(), 0.0);
  for (std::size_t i = 0; i < f.size(); ++i)
    if (contains(set, i)) out[i] = f[i];
  return out;
}

Vector indicator(std::size_t n, Subset set) {
  Vector out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (contains(set, i)) out[i] = 1.0;
  return out;
}

NormFn as_norm(const BfsSpec& space) {
  return [space](std::span<const double> f) { return norm(space, f); };
}

RangeMetric norm_metric(const BfsSpec& space) {
  return [space](std::span<const double> a, std::span<const double> b) {
    Vector diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
    return norm(space, diff);
  };
}

SetFunctionTable::SetFunctionTable(FiniteMeasureSpace base, Vector values)
    : base_(std::move(base)), values_(std::move(values)) {
  const std::size_t n = base_.size();
  if (values_.size() != subset_count(n)) {
    throw ShapeError("set function table has " + std::to_string(values_.size()) +
                     " entries, expected 2^" + std::to_string(n));
  }
  for (Subset a = 0; a < values_.size() && !monotonicity_witness_; ++a) {
    for (std::size_t i = 0; i < n; ++i) {
      if (contains(a, i)) continue;
      const Subset b = a | (Subset{1} << i);
      if (values_[a] > values_[b] + 1e-12 * std::max(1.0, std::abs(values_[b]))) {
        monotonicity_witness_ = std::make_pair(a, b);
        break;
      }
    }
  }
}

SetFunctionTable SetFunctionTable::tabulate(const FiniteMeasureSpace& base,
                                            const std::function<double(Subset)>& fn,
                                            std::size_t limit) {
  Vector values(subset_count(base.size(), limit));
  for (Subset a = 0; a < values.size(); ++a) values[a] = fn(a);
  return SetFunctionTable(base, std::move(values));
}

double SetFunctionTable::sup_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

SetFunctionTable indicator_norm_set_function(const BfsSpec& Z, double K, std::size_t limit) {
  if (!(K > 0.0) || !std::isfinite(K))
    throw ParameterError("set function constant K must be positive, got " + detail::fmt(K));
  const std::size_t n = Z.size();
  return SetFunctionTable::tabulate(
      Z.base, [&](Subset a) { return K * norm(Z, indicator(n, a)); }, limit);
}

std::optional<double> proportional_to_measure(const SetFunctionTable& table) {
  const auto& mu = table.base();
  const double c = table[mu.all()] / mu.total();
  for (Subset a = 0; a < table.size(); ++a) {
    const double expected = c * mu.measure(a);
    if (std::abs(table[a] - expected) > 1e-12 * std::max(1.0, std::abs(expected))) return std::nullopt;
  }
  return c;
}

bool ae_leq(std::span<const double> f, std::span<const double> g, const FiniteMeasureSpace& mu) {
  if (f.size() != mu.size() || g.size() != mu.size())
    throw ShapeError("a.e. comparison needs vectors with one entry per atom");
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (!mu.is_null(i) && f[i] > g[i]) return false;
  return true;
}

std::vector<Step> decreasing_rearrangement(std::span<const double> f, const FiniteMeasureSpace& mu) {
  if (f.size() != mu.size()) throw ShapeError("rearrangement needs one value per atom");
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!mu.is_null(i)) order.push_back(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(f[a]) > std::abs(f[b]); });
  std::vector<Step> steps;
  for (std::size_t i : order) {
    const double v = std::abs(f[i]);
    if (!steps.empty() && steps.back().value == v)
      steps.back().length += mu.weight(i);
    else
      steps.push_back({v, mu.weight(i)});
  }
  return steps;
}

double rearrangement_integral(const std::vector<Step>& steps, double t) {
  double acc = 0.0;
  for (const Step& s : steps) {
    if (t <= 0.0) break;
    const double len = std::min(t, s.length);
    acc += s.value * len;
    t -= len;
  }
  return acc;
}

}  // namespace lipext
