#include "lipext/metric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "detail.hpp"

namespace lipext {

std::string to_string(Axiom axiom) {
  switch (axiom) {
    case Axiom::kFinite: return "finite";
    case Axiom::kNonNegative: return "non-negativity";
    case Axiom::kZeroDiagonal: return "zero-diagonal";
    case Axiom::kSymmetry: return "symmetry";
    case Axiom::kTriangle: return "triangle";
    case Axiom::kPositivity: return "positivity";
  }
  return "unknown";
}

std::string MetricViolation::describe() const {
  std::string s = to_string(axiom) + " violation at (" + std::to_string(i) + "," +
                  std::to_string(j) + ")";
  if (via) s += " via " + std::to_string(*via);
  return s;
}

MetricReport validate_metric(const Matrix& dist, MetricKind kind, double tol) {
  const std::size_t n = dist.rows();
  if (dist.cols() != n) {
    throw ShapeError("distance matrix is " + std::to_string(dist.rows()) + "x" +
                     std::to_string(dist.cols()) + ", expected square");
  }
  MetricReport report;
  auto add = [&](Axiom a, std::size_t i, std::size_t j, std::optional<std::size_t> k = {}) {
    report.violations.push_back({a, i, j, k});
  };

  bool finite = true;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = dist(i, j);
      if (!std::isfinite(v)) {
        add(Axiom::kFinite, i, j);
        finite = false;
      } else if (v < -tol) {
        add(Axiom::kNonNegative, i, j);
      }
    }
  }
  if (!finite) return report;

  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(dist(i, i)) > tol) add(Axiom::kZeroDiagonal, i, i);

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(dist(i, j) - dist(j, i)) > tol) add(Axiom::kSymmetry, i, j);

  if (kind == MetricKind::kMetric) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (dist(i, j) <= tol) add(Axiom::kPositivity, i, j);
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        if (dist(i, j) > dist(i, k) + dist(k, j) + tol) {
          add(Axiom::kTriangle, i, j, k);
          break;
        }
      }
    }
  }
  return report;
}

namespace {

void throw_if_invalid(const MetricReport& report, const char* what) {
  if (report.ok()) return;
  std::string msg = std::string(what) + ": " + report.violations.front().describe();
  if (report.violations.size() > 1)
    msg += " (and " + std::to_string(report.violations.size() - 1) + " more)";
  throw ValidationError(msg);
}

std::vector<std::string> default_labels(std::size_t n) {
  std::vector<std::string> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = std::to_string(i);
  return labels;
}

}  // namespace

FiniteMetricSpace::FiniteMetricSpace(std::vector<std::string> labels, Matrix dist)
    : labels_(std::move(labels)), dist_(std::move(dist)) {
  if (labels_.size() != dist_.rows()) {
    throw ShapeError("metric space has " + std::to_string(labels_.size()) + " labels but a " +
                     std::to_string(dist_.rows()) + "-row distance matrix");
  }
  throw_if_invalid(validate_metric(dist_, MetricKind::kMetric), "not a metric");
}

FiniteMetricSpace::FiniteMetricSpace(Matrix dist)
    : FiniteMetricSpace(default_labels(dist.rows()), std::move(dist)) {}

FiniteMetricSpace FiniteMetricSpace::euclidean(const std::vector<Vector>& points) {
  const std::size_t n = points.size();
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < points[i].size(); ++c) {
        const double diff = points[i][c] - points[j][c];
        s += diff * diff;
      }
      d(i, j) = d(j, i) = std::sqrt(s);
    }
  }
  return FiniteMetricSpace(std::move(d));
}

LipschitzConstant lipschitz_constant(const FiniteMetricSpace& space, const SampledMap& map,
                                     const RangeMetric& rho) {
  LipschitzConstant out;
  if (map.size() < 2) {
    out.degenerate = true;
    return out;
  }
  for (std::size_t a = 0; a < map.size(); ++a) {
    for (std::size_t b = a + 1; b < map.size(); ++b) {
      const double d = space.distance(map.domain[a], map.domain[b]);
      const double ratio = rho(map.at(a), map.at(b)) / d;
      if (ratio > out.value || !out.witness) {
        out.value = std::max(out.value, ratio);
        out.witness = std::make_pair(a, b);
      }
    }
  }
  return out;
}

PseudoMetric::PseudoMetric(Matrix dist) : dist_(std::move(dist)) {
  throw_if_invalid(validate_metric(dist_, MetricKind::kPseudo, tolerance::kZeroDistance),
                   "not a pseudo-metric");
}

PseudoMetric pseudo_metric_from_map(const FiniteMetricSpace& space, const SampledMap& map,
                                    const RangeMetric& rho, double K) {
  if (!(K > 0.0) || !std::isfinite(K)) {
    throw ParameterError("pseudo-metric scale K must be positive and finite, got " +
                         detail::fmt(K));
  }
  const std::size_t n = space.size();
  if (!map.is_total_on(n)) {
    throw ShapeError("pseudo-metric needs a map defined on every point of the space, in order");
  }
  Matrix d(n, n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = x + 1; y < n; ++y) {
      const double value = rho(map.at(x), map.at(y)) / K;
      if (!detail::within(value, space.distance(x, y), tolerance::kExact)) {
        throw PreconditionError("K = " + detail::fmt(K) +
                                    " is below the Lipschitz constant of the map",
                                detail::pair_witness(x, y) + " with ratio " +
                                    detail::fmt(value * K / space.distance(x, y)));
      }
      d(x, y) = d(y, x) = value;
    }
  }
  return PseudoMetric(std::move(d));
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

QuotientSpace quotient(const PseudoMetric& pseudo, double zero_tol) {
  const std::size_t n = pseudo.size();
  DisjointSets sets(n);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = x + 1; y < n; ++y)
      if (pseudo.distance(x, y) <= zero_tol) sets.unite(x, y);

  QuotientSpace q;
  q.projection.assign(n, 0);
  std::vector<std::size_t> class_of_root(n, n);
  for (std::size_t x = 0; x < n; ++x) {
    const std::size_t root = sets.find(x);
    if (class_of_root[root] == n) {
      class_of_root[root] = q.classes.size();
      q.classes.emplace_back();
    }
    q.projection[x] = class_of_root[root];
    q.classes[q.projection[x]].push_back(x);
  }

  const std::size_t m = q.classes.size();
  q.quotient_dist = Matrix(m, m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b)
      q.quotient_dist(a, b) = q.quotient_dist(b, a) =
          pseudo.distance(q.representative(a), q.representative(b));
  return q;
}

FiniteMetricSpace QuotientSpace::as_metric_space(const std::vector<std::string>& base_labels) const {
  std::vector<std::string> labels;
  labels.reserve(classes.size());
  for (const auto& cls : classes) {
    std::string label = "[";
    for (std::size_t k = 0; k < cls.size(); ++k) {
      if (k) label += ',';
      label += base_labels.at(cls[k]);
    }
    labels.push_back(label + "]");
  }
  return FiniteMetricSpace(std::move(labels), quotient_dist);
}

SampledMap factor_map(const QuotientSpace& q, const SampledMap& total_map) {
  Matrix values(q.size(), total_map.atoms());
  for (std::size_t c = 0; c < q.size(); ++c) {
    const auto src = total_map.at(total_map.position_of(q.representative(c)));
    std::copy(src.begin(), src.end(), values.row(c).begin());
  }
  return SampledMap::total(std::move(values));
}

bool UniversalMapCertificate::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.holds; });
}

UniversalMapCertificate induce_universal_map(const FiniteMetricSpace& space,
                                             const SampledMap& total_map, const RangeMetric& rho,
                                             double K, const QuotientSpace& q,
                                             const Factorization& through) {
  if (through.space == nullptr) throw ParameterError("factorization has no intermediate space");
  const FiniteMetricSpace& J = *through.space;
  const std::size_t n = space.size();
  const std::size_t nj = J.size();
  const auto& i0 = through.inclusion;
  const Matrix& T0 = through.map_on_space;

  if (!total_map.is_total_on(n)) throw ShapeError("factorization needs a map on every point");
  if (q.projection.size() != n) throw ShapeError("quotient was built on a different space");
  if (i0.size() != n) {
    throw ShapeError("inclusion has " + std::to_string(i0.size()) + " entries for " +
                     std::to_string(n) + " points");
  }
  if (T0.rows() != nj || T0.cols() != total_map.atoms()) {
    throw ShapeError("map on the intermediate space must have one row per point and " +
                     std::to_string(total_map.atoms()) + " columns");
  }
  for (std::size_t x = 0; x < n; ++x) {
    if (i0[x] >= nj) {
      throw HypothesisError("inclusion points outside the intermediate space",
                            "point " + std::to_string(x));
    }
  }

  // Hypothesis: i0 is 1-Lipschitz.
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = x + 1; y < n; ++y)
      if (!detail::within(J.distance(i0[x], i0[y]), space.distance(x, y), tolerance::kExact))
        throw HypothesisError("inclusion is not 1-Lipschitz", detail::pair_witness(x, y));

  // Hypothesis: dense image, i.e. onto for finite spaces.
  std::vector<bool> hit(nj, false);
  for (std::size_t x = 0; x < n; ++x) hit[i0[x]] = true;
  for (std::size_t z = 0; z < nj; ++z)
    if (!hit[z])
      throw HypothesisError("inclusion does not have dense image", "point " + std::to_string(z) +
                                                                       " of J has no preimage");

  // Hypothesis: T0 is K-Lipschitz on J.
  for (std::size_t z = 0; z < nj; ++z)
    for (std::size_t w = z + 1; w < nj; ++w)
      if (!detail::within(rho(T0.row(z), T0.row(w)), K * J.distance(z, w), tolerance::kExact))
        throw HypothesisError("map on J is not K-Lipschitz", detail::pair_witness(z, w));

  // Hypothesis: T = T0 o i0.
  for (std::size_t x = 0; x < n; ++x)
    if (!detail::within(rho(T0.row(i0[x]), total_map.at(x)), 0.0, tolerance::kExact))
      throw HypothesisError("map does not factor through the inclusion",
                            "point " + std::to_string(x));

  UniversalMapCertificate cert;
  cert.map.assign(nj, q.size());
  for (std::size_t x = 0; x < n; ++x) {
    const std::size_t z = i0[x];
    if (cert.map[z] == q.size()) {
      cert.map[z] = q.projection[x];
    } else if (cert.map[z] != q.projection[x]) {
      throw HypothesisError("induced map is not well defined",
                            "point " + std::to_string(z) + " of J has preimages in classes " +
                                std::to_string(cert.map[z]) + " and " +
                                std::to_string(q.projection[x]));
    }
  }

  for (std::size_t x = 0; x < n; ++x)
    if (cert.map[i0[x]] != q.projection[x]) ++cert.projection_mismatches;

  const SampledMap factored = factor_map(q, total_map);
  std::size_t worst_z = 0;
  for (std::size_t z = 0; z < nj; ++z) {
    const double err = rho(factored.at(cert.map[z]), T0.row(z));
    if (err > cert.factorization_error) {
      cert.factorization_error = err;
      worst_z = z;
    }
  }

  std::pair<std::size_t, std::size_t> worst_pair{0, 0};
  for (std::size_t z = 0; z < nj; ++z) {
    for (std::size_t w = z + 1; w < nj; ++w) {
      const double ratio = q.quotient_dist(cert.map[z], cert.map[w]) / J.distance(z, w);
      if (ratio > cert.lipschitz_ratio) {
        cert.lipschitz_ratio = ratio;
        worst_pair = {z, w};
      }
    }
  }

  cert.checks.push_back({"i o i0 = j", 0.0, static_cast<double>(cert.projection_mismatches),
                         cert.projection_mismatches == 0,
                         cert.projection_mismatches ? "projection mismatch" : ""});
  const bool factors = cert.factorization_error <= tolerance::kExact;
  cert.checks.push_back({"T_bar o i = T0", 0.0, cert.factorization_error, factors,
                         factors ? "" : "point " + std::to_string(worst_z) + " of J"});
  const bool one_lip = detail::within(cert.lipschitz_ratio, 1.0, tolerance::kExact);
  cert.checks.push_back({"i is 1-Lipschitz", 1.0, cert.lipschitz_ratio, one_lip,
                         one_lip ? "" : detail::pair_witness(worst_pair.first, worst_pair.second)});
  return cert;
}

}  // namespace lipext
