#include "lipext/cli/commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>

#include "detail.hpp"
#include "lipext/extension.hpp"
#include "lipext/interpolation.hpp"
#include "lipext/measure_extension.hpp"

namespace lipext::cli {

namespace {

struct Context {
  const Instance& inst;
  const Options& opt;
  bool verify_all = false;
  std::optional<Instance>* emitted = nullptr;

  double exact() const { return opt.tolerance.value_or(tolerance::kExact); }
  double optimized() const { return opt.tolerance.value_or(tolerance::kOptimized); }
  std::size_t limit() const { return opt.max_atoms; }
  std::uint64_t seed() const { return opt.seed.value_or(inst.seed.value_or(0)); }
  const FiniteMetricSpace& space() const { return inst.metric_space; }

  const FiniteMeasureSpace& measure() const {
    if (!inst.measure) throw InputError("this command needs a measure", "/measure");
    return *inst.measure;
  }
  BfsSpec Y(const char* which = "space") const {
    const auto& spec = std::string(which) == "space" ? inst.space : inst.space2;
    if (!spec) throw InputError("this command needs a function space", std::string("/") + which);
    return inst.bfs(*spec);
  }
  double theta() const {
    if (!inst.constants.theta) throw InputError("this command needs theta", "/constants/theta");
    return *inst.constants.theta;
  }

  void emit(const Matrix& values) const {
    if (!emitted) return;
    Instance copy = inst;
    copy.subset.clear();
    for (std::size_t i = 0; i < values.rows(); ++i) copy.subset.push_back(i);
    copy.map_values = values;
    *emitted = std::move(copy);
  }
};

template <class Body>
void run_suite(Report& report, const Context& ctx, std::string name, Body&& body) {
  Suite s;
  s.name = std::move(name);
  try {
    body(s);
  } catch (const PreconditionError& e) {
    s.status = ctx.verify_all ? SuiteStatus::kSkipped : SuiteStatus::kPrecondition;
    s.reason = e.what();
    s.witness = e.witness();
  } catch (const NumericError& e) {
    s.status = SuiteStatus::kFailed;
    s.reason = e.what();
  }
  s.settle();
  report.suites.push_back(std::move(s));
}

CheckResult bounded(std::string name, double achieved, double bound, double tol,
                    std::string witness = "") {
  const bool holds = detail::within(achieved, bound, tol);
  return {std::move(name), bound, achieved, holds, holds ? "" : std::move(witness)};
}

void add_all(Suite& s, const std::vector<CheckResult>& checks, const std::string& prefix = "") {
  for (CheckResult c : checks) {
    c.name = prefix + c.name;
    s.add(std::move(c));
  }
}

Json column(const SampledMap& map) {
  Json out = Json::array();
  for (std::size_t k = 0; k < map.size(); ++k) out.push_back(number(map.at(k)[0]));
  return out;
}

SampledMap scalar_map(const Context& ctx) {
  SampledMap map = ctx.inst.map();
  if (map.atoms() != 1) throw InputError("this command needs a map with one column", "/map/values");
  return map;
}

SampledMap measured_map(const Context& ctx) {
  ctx.measure();
  return ctx.inst.map();
}

// ---------------------------------------------------------------- extensions

ExtensionResult scalar_extension(const Context& ctx, bool whitney) {
  const SampledMap map = scalar_map(ctx);
  const auto K = ctx.inst.constants.K;
  const ExtensionOptions o{!K.has_value()};
  return whitney ? whitney_extend(ctx.space(), map, K.value_or(0.0), o)
                 : mcshane_extend(ctx.space(), map, K.value_or(0.0), o);
}

void fill_extension(Suite& s, const ExtensionResult& r) {
  add_all(s, r.checks);
  s.result["K"] = number(r.constant);
  if (r.constants.classical) s.result["lipschitz_constant"] = number(*r.constants.classical);
  if (r.constants.pointwise_ae) s.result["pointwise_constant"] = number(*r.constants.pointwise_ae);
  s.result["values"] = r.extended.atoms() == 1 ? column(r.extended) : matrix(r.extended.values);
}

void suite_scalar(Report& rep, const Context& ctx, bool whitney) {
  run_suite(rep, ctx, whitney ? "extend-whitney" : "extend-mcshane", [&](Suite& s) {
    const ExtensionResult r = scalar_extension(ctx, whitney);
    fill_extension(s, r);
    ctx.emit(r.extended.values);
  });
}

void suite_factorization(Report& rep, const Context& ctx, const std::string& name,
                         const FiniteMetricSpace& space, const SampledMap& map, const RangeMetric& rho,
                         double K) {
  run_suite(rep, ctx, name, [&](Suite& s) {
    const std::size_t n = space.size();
    if (!(K > 0.0)) K = 1.0;
    const PseudoMetric pseudo = pseudo_metric_from_map(space, map, rho, K);
    const QuotientSpace q = quotient(pseudo);
    const SampledMap factored = factor_map(q, map);
    const FiniteMetricSpace qspace = q.as_metric_space(space.labels());

    double err = 0.0;
    double stretch = 0.0;
    std::string err_at;
    std::string stretch_at;
    for (std::size_t x = 0; x < n; ++x) {
      const double e = rho(factored.at(q.projection[x]), map.at(x));
      if (e > err) {
        err = e;
        err_at = "point " + std::to_string(x);
      }
      for (std::size_t y = x + 1; y < n; ++y) {
        const double g = q.quotient_dist(q.projection[x], q.projection[y]) - space.distance(x, y);
        if (g > stretch) {
          stretch = g;
          stretch_at = detail::pair_witness(x, y);
        }
      }
    }
    s.add(bounded("T_bar o j = T", err, K * tolerance::kZeroDistance, 0.0, err_at));
    s.add(bounded("j is 1-Lipschitz (excess)", stretch, 0.0, ctx.exact(), stretch_at));
    const LipschitzConstant lip = lipschitz_constant(qspace, factored, rho);
    s.add(bounded("T_bar is K-Lipschitz", lip.value, K, ctx.exact(),
                  lip.witness ? detail::pair_witness(lip.witness->first, lip.witness->second) : ""));

    std::vector<std::size_t> identity(n);
    for (std::size_t i = 0; i < n; ++i) identity[i] = i;
    const UniversalMapCertificate on_m =
        induce_universal_map(space, map, rho, K, q, Factorization{&space, identity, map.values});
    add_all(s, on_m.checks, "J = M: ");
    const UniversalMapCertificate on_q = induce_universal_map(
        space, map, rho, K, q, Factorization{&qspace, q.projection, factored.values});
    add_all(s, on_q.checks, "J = M_T: ");

    Json classes = Json::array();
    for (const auto& cls : q.classes) {
      Json c = Json::array();
      for (std::size_t i : cls) c.push_back(space.label(i));
      classes.push_back(c);
    }
    s.result["K"] = number(K);
    s.result["classes"] = classes;
    s.result["projection"] = q.projection;
    s.result["quotient_dist"] = matrix(q.quotient_dist);
  });
}

void suite_pointwise(Report& rep, const Context& ctx) {
  run_suite(rep, ctx, "extend-pointwise", [&](Suite& s) {
    const SampledMap map = measured_map(ctx);
    const auto K = ctx.inst.constants.K;
    const ExtensionResult r = pointwise_extend(ctx.space(), map, K.value_or(0.0), ctx.measure(),
                                               ExtensionOptions{!K.has_value()});
    fill_extension(s, r);
    for (const Exponent p : {Exponent(1.0), Exponent(2.0), Exponent::infinity()}) {
      const NormConstantReport b = norm_constant_bounds(ctx.space(), r, r.constant, p, ctx.measure());
      s.add(bounded("Lipschitz constant under L^" + p.to_string() + " <= K mu(Omega)^(1/p)",
                    b.achieved, b.bound, ctx.exact()));
    }
    ctx.emit(r.extended.values);
  });
}

void suite_null_invariance(Report& rep, const Context& ctx) {
  const FiniteMeasureSpace& mu = ctx.measure();
  if (mu.null_atoms() == 0) return;
  run_suite(rep, ctx, "null-atom-invariance", [&](Suite& s) {
    const SampledMap map = measured_map(ctx);
    const auto K = ctx.inst.constants.K;
    const ExtensionOptions o{!K.has_value()};
    const ExtensionResult base = pointwise_extend(ctx.space(), map, K.value_or(0.0), mu, o);
    std::mt19937_64 rng(ctx.seed());
    std::uniform_real_distribution<double> noise(-10.0, 10.0);
    double worst = 0.0;
    std::string where;
    for (int trial = 0; trial < 8; ++trial) {
      Matrix values = map.values;
      for (std::size_t k = 0; k < values.rows(); ++k)
        for (std::size_t w = 0; w < mu.size(); ++w)
          if (mu.is_null(w)) values(k, w) = noise(rng);
      const ExtensionResult other =
          pointwise_extend(ctx.space(), SampledMap(map.domain, values), base.constant, mu);
      for (std::size_t x = 0; x < ctx.space().size(); ++x)
        for (std::size_t w = 0; w < mu.size(); ++w) {
          if (mu.is_null(w)) continue;
          const double d = std::abs(other.extended.at(x)[w] - base.extended.at(x)[w]);
          if (d > worst) {
            worst = d;
            where = "trial " + std::to_string(trial) + " point " + std::to_string(x) + " atom " +
                    std::to_string(w);
          }
        }
    }
    s.add({"positive-atom output ignores null-atom representatives", 0.0, worst, worst == 0.0,
           worst == 0.0 ? "" : where});
    s.result["trials"] = 8;
  });
}

void suite_linf(Report& rep, const Context& ctx) {
  run_suite(rep, ctx, "extend-linf", [&](Suite& s) {
    const SampledMap map = ctx.inst.map();
    const auto K = ctx.inst.constants.K;
    const ExtensionResult r =
        coordinatewise_extend_linf(ctx.space(), map, K.value_or(0.0), ExtensionOptions{!K.has_value()});
    fill_extension(s, r);
    ctx.emit(r.extended.values);
  });
}

void suite_measure(Report& rep, const Context& ctx) {
  run_suite(rep, ctx, "extend-measure", [&](Suite& s) {
    if (!ctx.inst.phi) throw InputError("this command needs phi", "/phi");
    const SampledMap map = measured_map(ctx);
    const SetFunctionTable phi = ctx.inst.phi_table(*ctx.inst.phi, ctx.limit());
    MeasureExtensionOptions o;
    if (ctx.inst.space) o.Y = ctx.Y();
    o.tolerance = ctx.exact();
    o.limit = ctx.limit();
    const MeasureExtension m = measure_extend(ctx.space(), map, phi, o);
    add_all(s, m.result.checks);
    s.result["values"] = matrix(m.result.extended.values);
    if (m.mu_constant) s.result["mu_constant"] = number(*m.mu_constant);
    if (m.result.constants.phi) s.result["phi_ratio"] = number(*m.result.constants.phi);
    if (m.mu_constant && o.Y) {
      const ConverseReport c =
          converse_check(ctx.space(), m.result.extended, *o.Y, *m.mu_constant, ctx.exact(), ctx.limit());
      add_all(s, c.checks, "converse: ");
      s.result["converse_scale"] = number(c.scale);
    }
    ctx.emit(m.result.extended.values);
  });
}

void suite_verify_nu(Report& rep, const Context& ctx) {
  run_suite(rep, ctx, "verify-nu", [&](Suite& s) {
    if (!ctx.inst.phi) throw InputError("this command needs phi", "/phi");
    const SampledMap map = measured_map(ctx);
    const FiniteMeasureSpace& mu = ctx.measure();
    const std::size_t n = mu.size();
    const SetFunctionTable phi = ctx.inst.phi_table(*ctx.inst.phi, ctx.limit());
    const PhiLipschitzReport pre =
        phi_lipschitz_constant(ctx.space(), map, phi, l1_zero_norm_fn(mu), ctx.limit());
    s.result["phi_ratio_on_S"] = number(pre.ratio);
    s.result["phi_lipschitz_on_S"] = pre.holds(ctx.exact());
    Json points = Json::array();
    for (std::size_t x = 0; x < ctx.space().size(); ++x) {
      const SetFunctionTable nu = nu_table(ctx.space(), x, map, phi, ctx.limit());
      const AdditivityReport add = check_additive(nu, ctx.exact());
      const ContinuityReport cont = check_mu_continuous(nu, ctx.exact());
      const std::string who = "point " + std::to_string(x);
      s.add({"nu_x additive at " + who, 0.0, add.defect, add.additive,
             add.witness ? format_subset(add.witness->first, n) + " and " +
                               format_subset(add.witness->second, n)
                         : ""});
      s.add({"nu_x mu-continuous at " + who, 0.0, 0.0, cont.continuous,
             cont.witness ? format_subset(*cont.witness, n) : ""});
      Json p;
      p["point"] = x;
      p["label"] = ctx.space().label(x);
      p["additive"] = add.additive;
      p["mu_continuous"] = cont.continuous;
      if (add.additive && cont.continuous) p["density"] = numbers(radon_nikodym(nu, ctx.exact()));
      const std::size_t pos = map.position_of(x);
      if (pos < map.size() && pre.holds(ctx.exact())) {
        double dev = 0.0;
        for (Subset a = 0; a < nu.size(); ++a)
          dev = std::max(dev, std::abs(nu[a] - integrate(map.at(pos), mu, a)));
        s.add(bounded("nu_x(A) = integral_A T(x) dmu at " + who, dev, 0.0, ctx.exact(), who));
      }
      points.push_back(p);
    }
    s.result["points"] = points;
  });
}

void suite_variations(Report& rep, const Context& ctx) {
  run_suite(rep, ctx, "variations", [&](Suite& s) {
    const SampledMap map = measured_map(ctx);
    const FiniteMeasureSpace& mu = ctx.measure();
    std::optional<BfsSpec> Y;
    if (ctx.inst.space) Y = ctx.Y();
    double worst = -kInfinity;
    std::string where;
    Json rows = Json::array();
    for (std::size_t k = 0; k < map.size(); ++k) {
      const auto row = map.at(k);
      const FiniteSignedMeasure nu(mu, Vector(row.begin(), row.end()));
      const double semi = semivariation(nu);
      const double var = variation(nu);
      const double excess = std::max(semi - var, var - 2.0 * semi);
      if (excess > worst) {
        worst = excess;
        where = "row " + std::to_string(k);
      }
      Json r;
      r["semivariation"] = number(semi);
      r["variation"] = number(var);
      if (Y) {
        const YVariation yv = y_variation(nu, *Y);
        r["y_variation"] = number(yv.value);
        if (yv.infinite) r["charged_null_atom"] = *yv.null_atom;
      }
      rows.push_back(r);
    }
    s.add(bounded("semivariation <= variation <= 2 semivariation (excess)", worst, 0.0, ctx.exact(), where));
    s.result["rows"] = rows;
  });
}

void suite_l1_zero(Report& rep, const Context& ctx) {
  run_suite(rep, ctx, "l1-zero-norm", [&](Suite& s) {
    const FiniteMeasureSpace& mu = ctx.measure();
    std::mt19937_64 rng(ctx.seed());
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Vector> samples;
    if (ctx.inst.map_values) {
      for (std::size_t k = 0; k < ctx.inst.map_values->rows(); ++k) {
        const auto row = ctx.inst.map_values->row(k);
        samples.emplace_back(row.begin(), row.end());
      }
    }
    for (int i = 0; i < 100; ++i) {
      Vector f(mu.size());
      for (double& v : f) v = u(rng);
      samples.push_back(std::move(f));
    }
    const BfsSpec l1(mu, Exponent(1.0));
    double lower = -kInfinity;
    double upper = -kInfinity;
    double mismatch = 0.0;
    for (const Vector& f : samples) {
      const double z = l1_zero_norm(f, mu);
      const double one = norm(l1, f);
      lower = std::max(lower, one - 2.0 * z);
      upper = std::max(upper, z - one);
      mismatch = std::max(mismatch, std::abs(z - l1_zero_norm_by_enumeration(f, mu, ctx.limit())));
    }
    s.add(bounded("||f||_1 <= 2 ||f||_{1,0} (excess)", lower, 0.0, 1e-12));
    s.add(bounded("||f||_{1,0} <= ||f||_1 (excess)", upper, 0.0, 1e-12));
    s.add({"shortcut equals subset enumeration", 0.0, mismatch, mismatch == 0.0, ""});
    s.result["vectors"] = samples.size();
  });
}

// ------------------------------------------------------------- interpolation

double positive_or_one(double v) { return v > 0.0 ? v : 1.0; }

void suite_calderon(Report& rep, const Context& ctx) {
  run_suite(rep, ctx, "calderon", [&](Suite& s) {
    const SampledMap map = measured_map(ctx);
    const BfsSpec Y0 = ctx.Y("space");
    const BfsSpec Y1 = ctx.Y("space2");
    const CalderonSpace C(Y0, Y1, ctx.theta());
    const double theta = C.theta;
    std::optional<BfsSpec> closed;
    if (Y0.unit_scale() && Y1.unit_scale()) {
      const double inv = (Y0.p.is_infinite() ? 0.0 : (1.0 - theta) / Y0.p.value()) +
                         (Y1.p.is_infinite() ? 0.0 : theta / Y1.p.value());
      closed = BfsSpec(ctx.measure(), inv == 0.0 ? Exponent::infinity() : Exponent(1.0 / inv));
    }
    double rel = 0.0;
    double homogeneity = 0.0;
    Json rows = Json::array();
    for (std::size_t k = 0; k < map.size(); ++k) {
      const auto x = map.at(k);
      const CalderonResult r = calderon_norm(C, x);
      Vector doubled(x.begin(), x.end());
      for (double& v : doubled) v *= 2.0;
      const double twice = calderon_norm(C, doubled).value;
      homogeneity = std::max(homogeneity, std::abs(twice - 2.0 * r.value) / std::max(1.0, 2.0 * r.value));
      Json j;
      j["value"] = number(r.value);
      j["x0"] = numbers(r.x0);
      j["x1"] = numbers(r.x1);
      if (closed) {
        const double c = norm(*closed, x);
        j["closed_form"] = number(c);
        rel = std::max(rel, std::abs(r.value - c) / std::max(c, 1e-300));
      }
      rows.push_back(j);
    }
    s.add(bounded("homogeneity ||2x|| = 2||x|| (relative error)", homogeneity, 0.0, ctx.optimized()));
    if (closed) {
      s.result["p_theta"] = closed->p.to_string();
      s.add(bounded("matches the L^p_theta closed form (relative error)", rel, 0.0, ctx.optimized()));
    }
    s.result["rows"] = rows;
  });
}

void suite_interp_lipschitz(Report& rep, const Context& ctx) {
  run_suite(rep, ctx, "interpolated-lipschitz", [&](Suite& s) {
    const SampledMap map = measured_map(ctx);
    const BfsSpec Y0 = ctx.Y("space");
    const BfsSpec Y1 = ctx.Y("space2");
    const double K0 = ctx.inst.constants.K0.value_or(
        positive_or_one(lipschitz_constant(ctx.space(), map, norm_metric(Y0)).value));
    const double K1 = ctx.inst.constants.K1.value_or(
        positive_or_one(lipschitz_constant(ctx.space(), map, norm_metric(Y1)).value));
    s.add(interpolated_lipschitz_check(ctx.space(), map, Y0, Y1, ctx.theta(), K0, K1, ctx.optimized()));
    s.result["K0"] = number(K0);
    s.result["K1"] = number(K1);
  });
}

// Smallest set function for which the map is phi-Lipschitz into Y.
SetFunctionTable minimal_phi(const Context& ctx, const SampledMap& map, const BfsSpec& Y) {
  const std::size_t n = Y.size();
  return SetFunctionTable::tabulate(
      Y.base,
      [&](Subset a) {
        double best = 0.0;
        Vector diff(n);
        for (std::size_t i = 0; i < map.size(); ++i)
          for (std::size_t j = i + 1; j < map.size(); ++j) {
            for (std::size_t k = 0; k < n; ++k)
              diff[k] = contains(a, k) ? map.at(i)[k] - map.at(j)[k] : 0.0;
            best = std::max(best, norm(Y, diff) / ctx.space().distance(map.domain[i], map.domain[j]));
          }
        return best;
      },
      ctx.limit());
}

void suite_interp_phi(Report& rep, const Context& ctx) {
  run_suite(rep, ctx, "interpolated-phi", [&](Suite& s) {
    const SampledMap map = measured_map(ctx);
    const BfsSpec Y0 = ctx.Y("space");
    const BfsSpec Y1 = ctx.Y("space2");
    const SetFunctionTable phi0 = minimal_phi(ctx, map, Y0);
    const SetFunctionTable phi1 = minimal_phi(ctx, map, Y1);
    s.add(interpolated_phi_check(ctx.space(), map, Y0, Y1, ctx.theta(), phi0, phi1, ctx.optimized(),
                                 ctx.limit()));
  });
}

void suite_interp_pointwise(Report& rep, const Context& ctx) {
  run_suite(rep, ctx, "interpolated-pointwise", [&](Suite& s) {
    const SampledMap map = measured_map(ctx);
    const double own = positive_or_one(pointwise_ae_constant(ctx.space(), map, ctx.measure()).value);
    const double K0 = ctx.inst.constants.K0.value_or(own);
    const double K1 = ctx.inst.constants.K1.value_or(own);
    s.add(interpolated_pointwise_check(ctx.space(), map, ctx.theta(), K0, K1, ctx.measure(), ctx.exact()));
  });
}

std::vector<double> t_grid(const Context& ctx) {
  if (ctx.inst.t_values) return *ctx.inst.t_values;
  std::vector<double> t;
  for (int k = 0; k <= 20; ++k) t.push_back(std::pow(10.0, -3.0 + 0.3 * k));
  return t;
}

void suite_kfunctional(Report& rep, const Context& ctx) {
  run_suite(rep, ctx, "k-functional", [&](Suite& s) {
    const SampledMap map = measured_map(ctx);
    const BfsSpec E0 = ctx.Y("space");
    const BfsSpec E1 = ctx.Y("space2");
    const bool interp = ctx.inst.constants.theta && ctx.inst.constants.p_interp;
    const InterpolationCouple couple(E0, E1, ctx.inst.constants.theta.value_or(0.5),
                                     ctx.inst.constants.p_interp.value_or(1.0));
    const bool l1_linf = E0.p.value() == 1.0 && E1.p.is_infinite() && E0.unit_scale() && E1.unit_scale();
    const std::vector<double> ts = t_grid(ctx);
    const double tol = ctx.optimized();

    double upper = -kInfinity, monotone = 0.0, concave = 0.0, ratio = 0.0, oracle = 0.0, homog = 0.0;
    Json rows = Json::array();
    for (std::size_t k = 0; k < map.size(); ++k) {
      const auto a = map.at(k);
      const double n0 = norm(E0, a);
      const double n1 = norm(E1, a);
      std::vector<double> K;
      for (double t : ts) K.push_back(k_functional(t, a, couple).value);
      const auto steps = decreasing_rearrangement(a, ctx.measure());
      for (std::size_t i = 0; i < ts.size(); ++i) {
        upper = std::max(upper, K[i] - std::min(n0, ts[i] * n1));
        if (l1_linf) oracle = std::max(oracle, std::abs(K[i] - rearrangement_integral(steps, ts[i])));
        if (i == 0) continue;
        const double scale = std::max(1.0, K[i]);
        monotone = std::max(monotone, (K[i - 1] - K[i]) / scale);
        ratio = std::max(ratio, (K[i] / ts[i] - K[i - 1] / ts[i - 1]) / std::max(1.0, K[i - 1] / ts[i - 1]));
        if (i + 1 < ts.size()) {
          const double left = (K[i] - K[i - 1]) / (ts[i] - ts[i - 1]);
          const double right = (K[i + 1] - K[i]) / (ts[i + 1] - ts[i]);
          concave = std::max(concave, (right - left) / std::max(1.0, std::abs(left)));
        }
      }
      Json j;
      j["t"] = numbers(ts);
      j["K"] = numbers(K);
      if (interp) {
        const RealInterpNorm r = real_interp_norm(a, couple);
        Vector doubled(a.begin(), a.end());
        for (double& v : doubled) v *= 2.0;
        const double twice = real_interp_norm(doubled, couple).value;
        homog = std::max(homog, std::abs(twice - 2.0 * r.value) / std::max(1.0, 2.0 * r.value));
        j["real_interp_norm"] = number(r.value);
      }
      rows.push_back(j);
    }
    s.add(bounded("K(t) <= min(||a||_0, t ||a||_1) (excess)", upper, 0.0, tol));
    s.add(bounded("K nondecreasing (relative drop)", monotone, 0.0, tol));
    s.add(bounded("K concave (relative slope increase)", concave, 0.0, tol));
    s.add(bounded("K(t)/t nonincreasing (relative rise)", ratio, 0.0, tol));
    if (l1_linf) s.add(bounded("matches integral_0^t a*(s) ds", oracle, 0.0, tol));
    if (interp) s.add(bounded("real interpolation norm is homogeneous (relative error)", homog, 0.0, 1e-4));
    s.result["rows"] = rows;
  });
}

SetFunctionTable operator_phi(const Context& ctx, const Matrix& T, const BfsSpec& E, const BfsSpec& Y) {
  return SetFunctionTable::tabulate(
      Y.base,
      [&](Subset a) {
        Matrix part = T;
        for (std::size_t i = 0; i < part.rows(); ++i)
          if (!contains(a, i))
            for (std::size_t j = 0; j < part.cols(); ++j) part(i, j) = 0.0;
        return operator_norm(part, E, Y);
      },
      ctx.limit());
}

void suite_domination(Report& rep, const Context& ctx) {
  run_suite(rep, ctx, "interpolated-domination", [&](Suite& s) {
    const LinearMapSpec& lm = *ctx.inst.linear_map;
    if (!ctx.inst.constants.p_interp) throw InputError("this check needs p_interp", "/constants/p_interp");
    const double theta = ctx.theta();
    const double p = *ctx.inst.constants.p_interp;
    const InterpolationCouple E(ctx.inst.bfs(lm.E0), ctx.inst.bfs(lm.E1), theta, p);
    const InterpolationCouple Y(ctx.Y("space"), ctx.Y("space2"), theta, p);
    auto phi_for = [&](const std::optional<PhiSpec>& given, const BfsSpec& e, const BfsSpec& y) {
      if (given) return ctx.inst.phi_table(*given, ctx.limit());
      if (!e.p.is_infinite() && e.p.value() != 1.0)
        throw InputError("phi0/phi1 are required unless E0 and E1 are L^1 or L^inf", "/linear_map");
      return operator_phi(ctx, lm.matrix, e, y);
    };
    const SetFunctionTable phi0 = phi_for(lm.phi0, E.E0, Y.E0);
    const SetFunctionTable phi1 = phi_for(lm.phi1, E.E1, Y.E1);
    s.add(interp_domination_check(lm.matrix, E, Y, phi0, phi1, lm.test_vectors,
                                  ctx.opt.tolerance.value_or(1e-5), ctx.limit()));
    s.result["test_vectors"] = lm.test_vectors.size();
  });
}

// ------------------------------------------------------------------ dispatch

void verify_all(Report& rep, const Context& ctx) {
  const Instance& inst = ctx.inst;
  run_suite(rep, ctx, "metric", [&](Suite& s) {
    const MetricReport m = validate_metric(inst.metric_space.distances());
    s.add({"metric axioms", 0.0, static_cast<double>(m.violations.size()), m.ok(),
           m.ok() ? "" : m.violations.front().describe()});
    s.result["points"] = inst.metric_space.size();
  });

  const bool has_map = inst.map_values.has_value();
  const bool has_measure = inst.measure.has_value();
  if (has_map && inst.map_values->cols() == 1) {
    std::optional<ExtensionResult> mcshane;
    run_suite(rep, ctx, "mcshane-whitney", [&](Suite& s) {
      const ExtensionResult m = scalar_extension(ctx, false);
      const ExtensionResult w = scalar_extension(ctx, true);
      add_all(s, m.checks, "McShane: ");
      add_all(s, w.checks, "Whitney: ");
      double gap = -kInfinity;
      std::string where;
      for (std::size_t x = 0; x < ctx.space().size(); ++x) {
        const double g = m.extended.at(x)[0] - w.extended.at(x)[0];
        if (g > gap) {
          gap = g;
          where = "point " + std::to_string(x);
        }
      }
      s.add(bounded("T^M <= T^W pointwise (excess)", gap, 0.0, ctx.exact(), where));
      s.result["mcshane"] = column(m.extended);
      s.result["whitney"] = column(w.extended);
      mcshane = m;
    });
    if (mcshane)
      suite_factorization(rep, ctx, "factorization", ctx.space(), mcshane->extended,
                          absolute_difference(), mcshane->constant);
  }
  if (has_map && has_measure) {
    suite_pointwise(rep, ctx);
    suite_null_invariance(rep, ctx);
    suite_linf(rep, ctx);
    suite_variations(rep, ctx);
    if (inst.phi) suite_measure(rep, ctx);
    if (inst.constants.theta) suite_interp_pointwise(rep, ctx);
    if (inst.space && inst.space2 && inst.constants.theta) {
      suite_calderon(rep, ctx);
      suite_interp_lipschitz(rep, ctx);
      suite_interp_phi(rep, ctx);
    }
    if (inst.space && inst.space2) suite_kfunctional(rep, ctx);
  }
  if (has_measure) suite_l1_zero(rep, ctx);
  if (inst.linear_map && inst.space && inst.space2 && inst.constants.theta && inst.constants.p_interp)
    suite_domination(rep, ctx);
}

void factorize(Report& rep, const Context& ctx) {
  // A partial map is factored on the subspace S it is defined on.
  const SampledMap given = ctx.inst.map();
  const std::vector<std::size_t>& S = given.domain;
  Matrix dist(S.size(), S.size());
  std::vector<std::string> labels;
  for (std::size_t a = 0; a < S.size(); ++a) {
    labels.push_back(ctx.space().label(S[a]));
    for (std::size_t b = 0; b < S.size(); ++b) dist(a, b) = ctx.space().distance(S[a], S[b]);
  }
  const FiniteMetricSpace sub(std::move(labels), std::move(dist));
  const SampledMap map = SampledMap::total(given.values);
  RangeMetric rho = sup_distance();
  if (ctx.inst.space && ctx.inst.measure) rho = norm_metric(ctx.Y());
  const double K = ctx.inst.constants.K.value_or(lipschitz_constant(sub, map, rho).value);
  suite_factorization(rep, ctx, "factorize", sub, map, rho, K);
}

void interp_check(Report& rep, const Context& ctx) {
  const Instance& inst = ctx.inst;
  bool any = false;
  if (inst.map_values && inst.space && inst.space2) {
    suite_interp_lipschitz(rep, ctx);
    suite_interp_phi(rep, ctx);
    any = true;
  }
  if (inst.map_values && inst.measure) {
    suite_interp_pointwise(rep, ctx);
    any = true;
  }
  if (inst.linear_map) {
    suite_domination(rep, ctx);
    any = true;
  }
  if (!any) throw InputError("interp-check needs a map with space and space2, or a linear_map", "");
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{
      "extend-mcshane", "extend-whitney", "extend-pointwise", "extend-measure",
      "extend-linf",    "factorize",      "verify-nu",        "variations",
      "calderon",       "kfunctional",    "interp-check",     "verify-all"};
  return names;
}

Report execute(const Options& options, const Instance& instance, std::optional<Instance>* emitted) {
  Report rep;
  rep.command = options.command;
  rep.instance = options.instance_path;
  Context ctx{instance, options, options.command == "verify-all", emitted};
  rep.seed = ctx.seed();

  const std::string& c = options.command;
  if (c == "extend-mcshane") suite_scalar(rep, ctx, false);
  else if (c == "extend-whitney") suite_scalar(rep, ctx, true);
  else if (c == "extend-pointwise") suite_pointwise(rep, ctx);
  else if (c == "extend-measure") suite_measure(rep, ctx);
  else if (c == "extend-linf") suite_linf(rep, ctx);
  else if (c == "factorize") factorize(rep, ctx);
  else if (c == "verify-nu") suite_verify_nu(rep, ctx);
  else if (c == "variations") suite_variations(rep, ctx);
  else if (c == "calderon") suite_calderon(rep, ctx);
  else if (c == "kfunctional") suite_kfunctional(rep, ctx);
  else if (c == "interp-check") interp_check(rep, ctx);
  else if (c == "verify-all") verify_all(rep, ctx);
  else throw std::invalid_argument("unknown command " + c);

  rep.exit_code = exit_code::kOk;
  for (const Suite& s : rep.suites) {
    if (s.status == SuiteStatus::kPrecondition) rep.exit_code = exit_code::kPrecondition;
    if (s.status == SuiteStatus::kFailed && rep.exit_code == exit_code::kOk)
      rep.exit_code = exit_code::kCheckFailed;
  }
  return rep;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lipschitz extension and interpolation checks on finite instances", "lipext"};
  Options opt;
  std::string format = "json";
  bool no_timing = false;
  std::size_t max_atoms = 12;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<std::string> out_path;
  std::optional<std::string> emit_path;
  app.add_option("command", opt.command, "One of: extend-mcshane, extend-whitney, extend-pointwise, "
                                         "extend-measure, extend-linf, factorize, verify-nu, variations, "
                                         "calderon, kfunctional, interp-check, verify-all")
      ->required();
  app.add_option("instance", opt.instance_path, "Instance JSON file")->required();
  app.add_option("--out", out_path, "Write the report here instead of stdout");
  app.add_option("--tolerance", tol, "Override every check tolerance");
  app.add_option("--max-atoms", max_atoms, "Largest atom count for subset enumeration (at most 20)");
  app.add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--seed", seed, "Seed for randomized suites (default: instance seed, else 0)");
  app.add_flag("--no-timing", no_timing, "Leave timing out of the report");
  app.add_option("--emit-instance", emit_path, "Extension commands: write the extended map as an instance");

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_code::kOk;
  } catch (const CLI::ParseError& e) {
    err << "lipext: " << e.what() << "\n" << app.help();
    return exit_code::kUsage;
  }
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), opt.command) == names.end()) {
    err << "lipext: unknown command '" << opt.command << "'\n" << app.help();
    return exit_code::kUsage;
  }
  if (max_atoms < 1 || max_atoms > kMaxEnumerationAtoms) {
    err << "lipext: --max-atoms must lie in [1, " << kMaxEnumerationAtoms << "]\n";
    return exit_code::kUsage;
  }
  if (tol && !(*tol >= 0.0)) {
    err << "lipext: --tolerance must be nonnegative\n";
    return exit_code::kUsage;
  }
  opt.out = out_path;
  opt.tolerance = tol;
  opt.max_atoms = max_atoms;
  opt.format = format == "csv" ? Format::kCsv : Format::kJson;
  opt.seed = seed;
  opt.timing = !no_timing;
  opt.emit_instance = emit_path;

  const auto start = std::chrono::steady_clock::now();
  Report rep;
  std::optional<Instance> emitted;
  try {
    const Instance inst = load_instance(opt.instance_path);
    rep = execute(opt, inst, opt.emit_instance ? &emitted : nullptr);
  } catch (const InputError& e) {
    rep = Report{};
    rep.command = opt.command;
    rep.instance = opt.instance_path;
    rep.error = ReportError{e.line() ? "parse" : "validation", e.message(), e.pointer(), e.line(), e.column()};
    rep.exit_code = exit_code::kData;
  } catch (const Error& e) {
    rep = Report{};
    rep.command = opt.command;
    rep.instance = opt.instance_path;
    rep.error = ReportError{"data", e.what(), "", 0, 0};
    rep.exit_code = exit_code::kData;
  }
  const double elapsed =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  const std::string text = rep.render(opt.format, opt.timing ? std::optional<double>(elapsed) : std::nullopt);

  if (opt.out) {
    std::ofstream f(*opt.out, std::ios::binary);
    if (!f) {
      err << "lipext: cannot write " << *opt.out << "\n";
      return exit_code::kData;
    }
    f << text;
  } else {
    out << text;
  }
  if (emitted) {
    std::ofstream f(*opt.emit_instance, std::ios::binary);
    f << dump_instance(*emitted);
  }
  if (rep.error) err << "lipext: " << rep.error->message << "\n";
  return rep.exit_code;
}

}  // namespace lipext::cli
