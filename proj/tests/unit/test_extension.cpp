#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "lipext/extension.hpp"
#include "oracles.hpp"

using namespace lipext;
using testing::Rng;

namespace {

Matrix rows(std::vector<std::vector<double>> r) { return Matrix::from_rows(r); }

// a, b, c with d(a,b) = 3, d(a,c) = 1, d(b,c) = 2.
FiniteMetricSpace abc() { return FiniteMetricSpace(rows({{0, 3, 1}, {3, 0, 2}, {1, 2, 0}})); }

FiniteMetricSpace ab(double d) { return FiniteMetricSpace(rows({{0, d}, {d, 0}})); }

Vector column(const SampledMap& m) {
  Vector v;
  for (std::size_t k = 0; k < m.size(); ++k) v.push_back(m.at(k)[0]);
  return v;
}

Vector row(const SampledMap& m, std::size_t k) { return Vector(m.at(k).begin(), m.at(k).end()); }

struct ScalarInstance {
  FiniteMetricSpace space;
  std::vector<std::size_t> S;
  Vector t;
  double K;
};

ScalarInstance random_scalar(Rng& rng) {
  const std::size_t n = testing::uniform_index(rng, 2, 8);
  FiniteMetricSpace space(testing::random_metric(rng, n));
  const auto S = testing::random_subset(rng, n, testing::uniform_index(rng, 1, std::min<std::size_t>(4, n)));
  Vector t = testing::random_vector(rng, S.size());
  Matrix m(S.size(), 1);
  for (std::size_t k = 0; k < S.size(); ++k) m(k, 0) = t[k];
  const double L = oracle::lipschitz(space.distances(), S, m, oracle::sup_abs);
  const double K = std::max(1e-3, L * testing::uniform(rng, 1.0, 2.0));
  return {std::move(space), S, t, K};
}

SampledMap as_map(const std::vector<std::size_t>& S, const Vector& t) {
  Matrix m(S.size(), 1);
  for (std::size_t k = 0; k < S.size(); ++k) m(k, 0) = t[k];
  return SampledMap(S, m);
}

}  // namespace

TEST_SUITE("extension") {
  TEST_CASE("mcshane_extend examples") {
    const ExtensionResult single = mcshane_extend(ab(1), SampledMap({0}, rows({{0}})), 2.0);
    CHECK(column(single.extended) == Vector{0, -2});
    const ExtensionResult r = mcshane_extend(abc(), SampledMap({0, 1}, rows({{0}, {3}})), 1.0);
    CHECK(column(r.extended) == Vector{0, 3, 1});
    CHECK(r.all_hold());
  }

  TEST_CASE("whitney_extend examples") {
    CHECK(column(whitney_extend(ab(1), SampledMap({0}, rows({{0}})), 2.0).extended) == Vector{0, 2});
    CHECK(column(whitney_extend(abc(), SampledMap({0, 1}, rows({{0}, {3}})), 1.0).extended) == Vector{0, 3, 1});
  }

  TEST_CASE("scalar extensions refuse bad input") {
    CHECK_THROWS_AS(mcshane_extend(ab(1), SampledMap({}, Matrix(0, 1)), 1.0), DomainError);
    CHECK_THROWS_AS(mcshane_extend(ab(1), SampledMap({0}, rows({{0}})), 0.0), ParameterError);
    CHECK_THROWS_AS(mcshane_extend(ab(1), SampledMap({0}, rows({{0, 1}})), 1.0), ShapeError);
    CHECK_THROWS_AS(whitney_extend(ab(1), SampledMap({0, 0}, rows({{0}, {0}})), 1.0), DomainError);
    CHECK_THROWS_AS(whitney_extend(ab(1), SampledMap({2}, rows({{0}})), 1.0), DomainError);
    try {
      mcshane_extend(ab(1), SampledMap({0, 1}, rows({{0}, {5}})), 1.0);
      FAIL("expected a precondition error");
    } catch (const PreconditionError& e) {
      CHECK_FALSE(e.witness().empty());
    }
  }

  TEST_CASE("strict mode substitutes the attained constant") {
    const ExtensionResult r =
        mcshane_extend(abc(), SampledMap({0, 1}, rows({{0}, {3}})), 0.0, ExtensionOptions{true});
    CHECK(r.constant == 1.0);
    const ExtensionResult flat =
        whitney_extend(abc(), SampledMap({0, 1}, rows({{2}, {2}})), 0.0, ExtensionOptions{true});
    CHECK(flat.constant == 0.0);
    CHECK(column(flat.extended) == Vector{2, 2, 2});
  }

  TEST_CASE("pointwise_ae_constant examples") {
    const FiniteMetricSpace s = ab(1);
    CHECK(pointwise_ae_constant(s, SampledMap({0, 1}, rows({{1, 2}, {1, 2}})), FiniteMeasureSpace({1, 1})).value == 0.0);
    CHECK(pointwise_ae_constant(s, SampledMap({0, 1}, rows({{1, 2}, {1, 9}})), FiniteMeasureSpace({1, 0})).value == 0.0);
    CHECK(pointwise_ae_constant(s, SampledMap({0, 1}, rows({{0, 0}, {2, 1}})), FiniteMeasureSpace({1, 1})).value == 2.0);
  }

  TEST_CASE("pointwise_extend examples") {
    const FiniteMeasureSpace mu({1, 1});
    const ExtensionResult single = pointwise_extend(ab(2), SampledMap({0}, rows({{1, 3}})), 1.0, mu);
    CHECK(row(single.extended, 1) == Vector{-1, 1});
    // Atom 1 moves by 4 across d(a,b) = 3, so K = 1 is too small there.
    CHECK_THROWS_AS(pointwise_extend(abc(), SampledMap({0, 1}, rows({{0, 4}, {3, 0}})), 1.0, mu), PreconditionError);
    const ExtensionResult r = pointwise_extend(abc(), SampledMap({0, 1}, rows({{0, 3}, {3, 0}})), 1.0, mu);
    CHECK(row(r.extended, 2) == Vector{1, 2});
    CHECK(row(r.extended, 0) == Vector{0, 3});
    CHECK(row(r.extended, 1) == Vector{3, 0});
    CHECK(r.all_hold());
    const ExtensionResult wide = pointwise_extend(abc(), SampledMap({0, 1}, rows({{0, 4}, {3, 0}})), 2.0, mu);
    CHECK(row(wide.extended, 2) == Vector{-1, 2});
  }

  TEST_CASE("norm_constant_bounds examples") {
    const FiniteMeasureSpace mu3({1, 2});
    const ExtensionResult r = pointwise_extend(ab(1), SampledMap({0}, rows({{0, 0}})), 2.0, mu3);
    CHECK(norm_constant_bounds(ab(1), r, 2.0, Exponent::infinity(), mu3).bound == 2.0);
    CHECK(norm_constant_bounds(ab(1), r, 2.0, Exponent(1.0), mu3).bound == 6.0);
    const FiniteMeasureSpace mu4({1, 3});
    const ExtensionResult r4 = pointwise_extend(ab(1), SampledMap({0}, rows({{0, 0}})), 1.0, mu4);
    const NormConstantReport b = norm_constant_bounds(ab(1), r4, 1.0, Exponent(2.0), mu4);
    CHECK(b.bound == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(b.achieved == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(b.holds);
  }

  TEST_CASE("coordinatewise_extend_linf examples") {
    const ExtensionResult one = coordinatewise_extend_linf(abc(), SampledMap({0, 1}, rows({{0}, {3}})), 1.0);
    CHECK(column(one.extended) == column(mcshane_extend(abc(), SampledMap({0, 1}, rows({{0}, {3}})), 1.0).extended));
    const ExtensionResult two = coordinatewise_extend_linf(ab(1), SampledMap({0}, rows({{0, 5}})), 1.0);
    CHECK(row(two.extended, 1) == Vector{-1, 4});
  }

  TEST_CASE("property: coordinatewise extension is K-Lipschitz in sup norm") {
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 5;
      const FiniteMetricSpace space(testing::random_metric(rng, n));
      const auto S = testing::random_subset(rng, n, testing::uniform_index(rng, 1, 4));
      const Matrix values = testing::random_rows(rng, S.size(), 3);
      const double K = std::max(1e-3, oracle::lipschitz(space.distances(), S, values, oracle::sup_abs));
      const ExtensionResult r = coordinatewise_extend_linf(space, SampledMap(S, values), K);
      CHECK(r.all_hold());
      std::vector<std::size_t> all{0, 1, 2, 3, 4};
      CHECK(oracle::lipschitz(space.distances(), all, r.extended.values, oracle::sup_abs) <= K + 1e-9);
      const double bound0 = oracle::sup_abs(Vector(values.row(0).begin(), values.row(0).end()));
      for (std::size_t x = 0; x < n; ++x)
        for (std::size_t i = 0; i < 3; ++i)
          CHECK(std::abs(r.extended.values(x, i)) <= K * space.distance(x, S[0]) + bound0 + 1e-9);
    }
  }

  TEST_CASE("property: McShane and Whitney envelopes") {
    Rng rng(32);
    for (int trial = 0; trial < 300; ++trial) {
      const ScalarInstance in = random_scalar(rng);
      const SampledMap map = as_map(in.S, in.t);
      const Vector m = column(mcshane_extend(in.space, map, in.K).extended);
      const Vector w = column(whitney_extend(in.space, map, in.K).extended);
      const Vector om = oracle::mcshane(in.space.distances(), in.S, in.t, in.K);
      const Vector ow = oracle::whitney(in.space.distances(), in.S, in.t, in.K);
      std::vector<std::size_t> all(in.space.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      Matrix mm(all.size(), 1), ww(all.size(), 1);
      for (std::size_t x = 0; x < all.size(); ++x) {
        CHECK(m[x] == doctest::Approx(om[x]).epsilon(1e-14));
        CHECK(w[x] == doctest::Approx(ow[x]).epsilon(1e-14));
        CHECK(m[x] <= w[x] + 1e-12);
        mm(x, 0) = m[x];
        ww(x, 0) = w[x];
      }
      for (std::size_t k = 0; k < in.S.size(); ++k) {
        CHECK(m[in.S[k]] == in.t[k]);
        CHECK(w[in.S[k]] == in.t[k]);
      }
      CHECK(oracle::lipschitz(in.space.distances(), all, mm, oracle::sup_abs) <= in.K + 1e-9);
      CHECK(oracle::lipschitz(in.space.distances(), all, ww, oracle::sup_abs) <= in.K + 1e-9);

      // Monotone in K.
      const double K2 = in.K * 1.7;
      const Vector m2 = column(mcshane_extend(in.space, map, K2).extended);
      const Vector w2 = column(whitney_extend(in.space, map, K2).extended);
      for (std::size_t x = 0; x < all.size(); ++x) {
        CHECK(m[x] >= m2[x] - 1e-12);
        CHECK(w[x] <= w2[x] + 1e-12);
      }
    }
  }

  TEST_CASE("property: pointwise extension contract and envelope ordering") {
    Rng rng(33);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = testing::uniform_index(rng, 2, 8);
      const std::size_t atoms = testing::uniform_index(rng, 2, 10);
      const FiniteMetricSpace space(testing::random_metric(rng, n));
      const auto S = testing::random_subset(rng, n, testing::uniform_index(rng, 1, std::min<std::size_t>(4, n)));
      const Vector w = testing::random_weights(rng, atoms, 1);
      const FiniteMeasureSpace mu(w);
      const Matrix values = testing::random_rows(rng, S.size(), atoms);
      const double K = std::max(1e-3, oracle::pointwise_constant(space.distances(), S, values, w)) *
                       testing::uniform(rng, 1.0, 1.5);
      const ExtensionResult r = pointwise_extend(space, SampledMap(S, values), K, mu);
      CHECK(r.all_hold());
      std::vector<std::size_t> all(n);
      for (std::size_t i = 0; i < n; ++i) all[i] = i;
      CHECK(oracle::pointwise_constant(space.distances(), all, r.extended.values, w) <= K + 1e-9);
      for (std::size_t k = 0; k < S.size(); ++k)
        for (std::size_t a = 0; a < atoms; ++a)
          if (w[a] > 0.0) CHECK(r.extended.values(S[k], a) == values(k, a));

      // Per atom it is the McShane envelope of that coordinate, which sits
      // below any other pointwise K-extension such as Whitney's.
      for (std::size_t a = 0; a < atoms; ++a) {
        Vector t(S.size());
        for (std::size_t k = 0; k < S.size(); ++k) t[k] = values(k, a);
        const Vector env = oracle::mcshane(space.distances(), S, t, K);
        const Vector up = oracle::whitney(space.distances(), S, t, K);
        for (std::size_t x = 0; x < n; ++x) {
          if (w[a] == 0.0) continue;
          CHECK(r.extended.values(x, a) == doctest::Approx(env[x]).epsilon(1e-14));
          CHECK(r.extended.values(x, a) <= up[x] + 1e-12);
        }
      }
    }
  }
}
