#include <doctest.h>

#include "generators.hpp"
#include "lipext/bfs.hpp"
#include "lipext/metric.hpp"
#include "oracles.hpp"

using namespace lipext;
using testing::Rng;

namespace {

Matrix rows(std::vector<std::vector<double>> r) { return Matrix::from_rows(r); }

FiniteMetricSpace line(std::vector<double> xs) {
  Matrix d(xs.size(), xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < xs.size(); ++j) d(i, j) = std::abs(xs[i] - xs[j]);
  return FiniteMetricSpace(d);
}

}  // namespace

TEST_SUITE("metric") {
  TEST_CASE("validate_metric accepts a two-point metric") {
    CHECK(validate_metric(rows({{0, 1}, {1, 0}})).ok());
  }

  TEST_CASE("validate_metric reports an asymmetric entry") {
    const MetricReport r = validate_metric(rows({{0, 1}, {2, 0}}));
    REQUIRE_FALSE(r.ok());
    bool found = false;
    for (const auto& v : r.violations)
      if (v.axiom == Axiom::kSymmetry && v.i == 0 && v.j == 1) found = true;
    CHECK(found);
  }

  TEST_CASE("validate_metric names the triangle witness") {
    // 3 > 1 + 1 through point 1.
    const MetricReport r = validate_metric(rows({{0, 1, 3}, {1, 0, 1}, {3, 1, 0}}));
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].axiom == Axiom::kTriangle);
    CHECK(r.violations[0].i == 0);
    CHECK(r.violations[0].j == 2);
    CHECK(r.violations[0].via == std::optional<std::size_t>(1));
  }

  TEST_CASE("validate_metric rejects non-square input and zero distances") {
    CHECK_THROWS_AS(validate_metric(Matrix(2, 3)), ShapeError);
    CHECK_FALSE(validate_metric(rows({{0, 0}, {0, 0}})).ok());
    CHECK(validate_metric(rows({{0, 0}, {0, 0}}), MetricKind::kPseudo).ok());
    CHECK_THROWS_AS(FiniteMetricSpace(rows({{0, 1}, {2, 0}})), ValidationError);
  }

  TEST_CASE("lipschitz_constant examples") {
    const FiniteMetricSpace two(rows({{0, 2}, {2, 0}}));
    CHECK(lipschitz_constant(two, SampledMap::total(rows({{5}, {5}})), absolute_difference()).value == 0.0);
    const LipschitzConstant c = lipschitz_constant(two, SampledMap::total(rows({{1}, {7}})), absolute_difference());
    CHECK(c.value == doctest::Approx(3.0));
    REQUIRE(c.witness);
    CHECK(c.witness->first == 0);

    const LipschitzConstant single =
        lipschitz_constant(two, SampledMap({1}, rows({{4}})), absolute_difference());
    CHECK(single.degenerate);
    CHECK(single.value == 0.0);
  }

  TEST_CASE("identity of planar points has constant 1") {
    Rng rng(11);
    std::vector<Vector> pts;
    for (int i = 0; i < 4; ++i) pts.push_back(testing::random_vector(rng, 2));
    const FiniteMetricSpace space = FiniteMetricSpace::euclidean(pts);
    Matrix values(4, 2);
    for (std::size_t i = 0; i < 4; ++i) {
      values(i, 0) = pts[i][0];
      values(i, 1) = pts[i][1];
    }
    const FiniteMeasureSpace mu({1.0, 1.0});
    const double K = lipschitz_constant(space, SampledMap::total(values), norm_metric(BfsSpec(mu, Exponent(2.0)))).value;
    CHECK(K == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("pseudo_metric_from_map examples") {
    const FiniteMetricSpace space = line({0, 1, 3});
    const PseudoMetric zero = pseudo_metric_from_map(space, SampledMap::total(rows({{2}, {2}, {2}})),
                                                     absolute_difference(), 1.0);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) CHECK(zero.distance(i, j) == 0.0);

    const FiniteMetricSpace ab = line({0, 3});
    const PseudoMetric two = pseudo_metric_from_map(ab, SampledMap::total(rows({{0}, {4}})), absolute_difference(), 2.0);
    CHECK(two.distance(0, 1) == 2.0);

    const PseudoMetric same = pseudo_metric_from_map(space, SampledMap::total(rows({{0}, {1}, {3}})),
                                                     absolute_difference(), 1.0);
    CHECK(same.distances() == space.distances());
  }

  TEST_CASE("pseudo_metric_from_map rejects bad constants") {
    const FiniteMetricSpace ab = line({0, 1});
    const SampledMap map = SampledMap::total(rows({{0}, {4}}));
    CHECK_THROWS_AS(pseudo_metric_from_map(ab, map, absolute_difference(), 0.0), ParameterError);
    try {
      pseudo_metric_from_map(ab, map, absolute_difference(), 2.0);
      FAIL("expected a precondition error");
    } catch (const PreconditionError& e) {
      CHECK(e.witness().find('0') != std::string::npos);
      CHECK(e.witness().find('1') != std::string::npos);
    }
  }

  TEST_CASE("quotient examples") {
    const Matrix zeros(3, 3);
    const QuotientSpace all = quotient(PseudoMetric(zeros));
    CHECK(all.size() == 1);
    CHECK(all.classes[0] == std::vector<std::size_t>{0, 1, 2});

    const QuotientSpace merged = quotient(PseudoMetric(rows({{0, 0, 1}, {0, 0, 1}, {1, 1, 0}})));
    REQUIRE(merged.size() == 2);
    CHECK(merged.classes[0] == std::vector<std::size_t>{0, 1});
    CHECK(merged.classes[1] == std::vector<std::size_t>{2});
    CHECK(merged.quotient_dist(0, 1) == 1.0);
    CHECK(merged.projection == std::vector<std::size_t>{0, 0, 1});

    const Matrix d = rows({{0, 1, 2}, {1, 0, 1.5}, {2, 1.5, 0}});
    const QuotientSpace singletons = quotient(PseudoMetric(d));
    CHECK(singletons.size() == 3);
    CHECK(singletons.quotient_dist == d);
  }

  TEST_CASE("induce_universal_map: canonical and terminal factorizations") {
    const FiniteMetricSpace space = line({0, 1, 2, 4});
    const SampledMap map = SampledMap::total(rows({{0}, {0}, {1}, {2}}));
    const double K = 1.0;
    const QuotientSpace q = quotient(pseudo_metric_from_map(space, map, absolute_difference(), K));
    REQUIRE(q.size() == 3);

    const UniversalMapCertificate canonical =
        induce_universal_map(space, map, absolute_difference(), K, q, Factorization{&space, {0, 1, 2, 3}, map.values});
    CHECK(canonical.passed());
    CHECK(canonical.map == q.projection);

    const FiniteMetricSpace qspace = q.as_metric_space(space.labels());
    const SampledMap factored = factor_map(q, map);
    const UniversalMapCertificate terminal =
        induce_universal_map(space, map, absolute_difference(), K, q, Factorization{&qspace, q.projection, factored.values});
    CHECK(terminal.passed());
    CHECK(terminal.map == std::vector<std::size_t>{0, 1, 2});
  }

  TEST_CASE("induce_universal_map through a hand-built intermediate space") {
    // T(a) = T(b); J merges a and b, which the quotient also merges.
    const FiniteMetricSpace space(rows({{0, 1, 2}, {1, 0, 2}, {2, 2, 0}}));
    const SampledMap map = SampledMap::total(rows({{3}, {3}, {1}}));
    const double K = 1.0;
    const QuotientSpace q = quotient(pseudo_metric_from_map(space, map, absolute_difference(), K));
    const FiniteMetricSpace J(rows({{0, 2}, {2, 0}}));
    const UniversalMapCertificate c =
        induce_universal_map(space, map, absolute_difference(), K, q, Factorization{&J, {0, 0, 1}, rows({{3}, {1}})});
    CHECK(c.passed());
    CHECK(c.map[0] == q.projection[0]);
    CHECK(c.map[0] == q.projection[1]);
  }

  TEST_CASE("induce_universal_map rejects a failed hypothesis") {
    const FiniteMetricSpace space = line({0, 1});
    const SampledMap map = SampledMap::total(rows({{0}, {1}}));
    const QuotientSpace q = quotient(pseudo_metric_from_map(space, map, absolute_difference(), 1.0));
    // i0 stretches distances by 2.
    const FiniteMetricSpace J = line({0, 2});
    CHECK_THROWS_AS(induce_universal_map(space, map, absolute_difference(), 1.0, q,
                                         Factorization{&J, {0, 1}, map.values}),
                    HypothesisError);
    // T0 o i0 != T.
    CHECK_THROWS_AS(induce_universal_map(space, map, absolute_difference(), 1.0, q,
                                         Factorization{&space, {0, 1}, rows({{0}, {0.5}})}),
                    HypothesisError);
  }

  TEST_CASE("property: quotient contract on random instances") {
    Rng rng(2024);
    for (int trial = 0; trial < 150; ++trial) {
      const std::size_t n = testing::uniform_index(rng, 2, 7);
      const FiniteMetricSpace space(testing::random_metric(rng, n));
      Matrix values = testing::random_rows(rng, n, 2);
      // Force some identifications.
      if (n > 2 && trial % 2 == 0) {
        values(1, 0) = values(0, 0);
        values(1, 1) = values(0, 1);
      }
      const SampledMap map = SampledMap::total(values);
      const RangeMetric rho = sup_distance();
      const double L = oracle::lipschitz(space.distances(), map.domain, values, oracle::sup_abs);
      const double K = L * testing::uniform(rng, 1.0, 1.5);
      if (K == 0.0) continue;
      const QuotientSpace q = quotient(pseudo_metric_from_map(space, map, rho, K));
      const SampledMap factored = factor_map(q, map);
      CHECK(validate_metric(q.quotient_dist).ok());
      for (std::size_t x = 0; x < n; ++x) {
        CHECK(factored.at(q.projection[x])[0] == values(x, 0));
        for (std::size_t y = 0; y < n; ++y) {
          const double dt = rho(map.at(x), map.at(y)) / K;
          CHECK(q.quotient_dist(q.projection[x], q.projection[y]) == doctest::Approx(dt).epsilon(1e-12));
          CHECK(q.quotient_dist(q.projection[x], q.projection[y]) <= space.distance(x, y) + 1e-12);
          CHECK((q.projection[x] == q.projection[y]) == (dt <= tolerance::kZeroDistance));
        }
      }
      // The quotient makes the constant exact.
      const FiniteMetricSpace qspace = q.as_metric_space(space.labels());
      if (q.size() >= 2 && K == L)
        CHECK(lipschitz_constant(qspace, factored, rho).value == doctest::Approx(K).epsilon(1e-12));
    }
  }

  TEST_CASE("property: certificates through random intermediate quotients") {
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = testing::uniform_index(rng, 2, 7);
      const FiniteMetricSpace space(testing::random_metric(rng, n));
      Matrix values = testing::random_rows(rng, n, 1);
      if (n > 2 && trial % 2 == 0) values(2, 0) = values(0, 0);
      const SampledMap map = SampledMap::total(values);
      const double K = std::max(1e-3, oracle::lipschitz(space.distances(), map.domain, values, oracle::sup_abs));
      const QuotientSpace q = quotient(pseudo_metric_from_map(space, map, absolute_difference(), K));

      // J: a coarsening of M that only merges points already merged by q,
      // with d_J the largest metric below d that is constant on the merged
      // groups (shortest paths where merged points cost 0). Then i0 is
      // 1-Lipschitz and onto, and T0 is well defined and K-Lipschitz.
      std::vector<std::size_t> group(n);
      std::vector<std::size_t> reps;
      for (std::size_t x = 0; x < n; ++x) {
        const std::size_t cls = q.projection[x];
        const bool merge = rng() % 2 == 0;
        std::size_t g = reps.size();
        if (merge)
          for (std::size_t y = 0; y < x; ++y)
            if (q.projection[y] == cls) {
              g = group[y];
              break;
            }
        if (g == reps.size()) reps.push_back(x);
        group[x] = g;
      }
      const std::size_t m = reps.size();
      Matrix w(n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) w(i, j) = group[i] == group[j] ? 0.0 : space.distance(i, j);
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) w(i, j) = std::min(w(i, j), w(i, k) + w(k, j));
      Matrix dj(m, m);
      Matrix t0(m, 1);
      for (std::size_t a = 0; a < m; ++a) {
        t0(a, 0) = values(reps[a], 0);
        for (std::size_t b = 0; b < m; ++b) dj(a, b) = w(reps[a], reps[b]);
      }
      if (!validate_metric(dj).ok()) continue;
      const FiniteMetricSpace J(dj);
      const UniversalMapCertificate c =
          induce_universal_map(space, map, absolute_difference(), K, q, Factorization{&J, group, t0});
      CHECK(c.passed());
      for (std::size_t x = 0; x < n; ++x) CHECK(c.map[group[x]] == q.projection[x]);
    }
  }
}
