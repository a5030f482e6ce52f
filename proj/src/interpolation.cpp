#include "lipext/interpolation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>

#include "detail.hpp"

namespace lipext {

namespace {

void require_theta(double theta) {
  if (!(theta > 0.0 && theta < 1.0))
    throw ParameterError("theta must lie in (0, 1), got " + detail::fmt(theta));
}

double geometric_mean(double a, double b, double theta) {
  if (a == 0.0 || b == 0.0) return 0.0;
  return std::pow(a, 1.0 - theta) * std::pow(b, theta);
}

double log_sum_exp(const Eigen::VectorXd& z, Eigen::VectorXd& softmax) {
  const double m = z.maxCoeff();
  softmax = (z.array() - m).exp();
  const double s = softmax.sum();
  softmax /= s;
  return m + std::log(s);
}

// Smooth part of the Calderon problem for two finite exponents, restricted to
// the active atoms. Variables u_i = log(x0_i / x1_i).
struct LogSplit {
  Eigen::VectorXd b0, b1;
  double p0, p1, theta;

  double value(const Eigen::VectorXd& u, Eigen::VectorXd* grad, Eigen::MatrixXd* hess) const {
    Eigen::VectorXd pi0, pi1;
    const double l0 = log_sum_exp(b0 + p0 * theta * u, pi0);
    const double l1 = log_sum_exp(b1 - p1 * (1.0 - theta) * u, pi1);
    const double tt = theta * (1.0 - theta);
    if (grad) *grad = tt * (pi0 - pi1);
    if (hess) {
      Eigen::MatrixXd h0 = Eigen::MatrixXd(pi0.asDiagonal()) - pi0 * pi0.transpose();
      Eigen::MatrixXd h1 = Eigen::MatrixXd(pi1.asDiagonal()) - pi1 * pi1.transpose();
      *hess = tt * (p0 * theta * h0 + p1 * (1.0 - theta) * h1);
    }
    return (1.0 - theta) / p0 * l0 + theta / p1 * l1;
  }
};

struct NewtonOutcome {
  Eigen::VectorXd u;
  double f = 0.0;
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
};

NewtonOutcome minimize_log_split(const LogSplit& problem, Eigen::VectorXd u) {
  const Eigen::Index m = u.size();
  const double tt = problem.theta * (1.0 - problem.theta);
  // The objective is invariant under u -> u + c 1; pin that direction.
  const double gauge = tt * std::max(problem.p0 * problem.theta, problem.p1 * (1.0 - problem.theta)) /
                       static_cast<double>(m);
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(m, m);

  NewtonOutcome out;
  Eigen::VectorXd g;
  Eigen::MatrixXd h;
  double f = problem.value(u, &g, &h);
  for (std::size_t it = 0; it < 200; ++it) {
    out.iterations = it;
    if (g.lpNorm<Eigen::Infinity>() < 1e-15) break;
    Eigen::MatrixXd hr = h + gauge * ones;
    hr.diagonal().array() += 1e-14 * tt;
    Eigen::VectorXd step = -hr.ldlt().solve(g);
    double decrement = -g.dot(step);
    if (!step.allFinite() || decrement <= 0.0) {
      step = -g;
      decrement = g.squaredNorm();
    }
    if (decrement < 1e-26) break;
    double alpha = 1.0;
    double next = f;
    Eigen::VectorXd trial;
    for (int ls = 0; ls < 60; ++ls) {
      trial = u + alpha * step;
      next = problem.value(trial, nullptr, nullptr);
      if (next <= f - 0.25 * alpha * decrement) break;
      alpha *= 0.5;
    }
    if (!(next < f)) {
      // Near the optimum f stops resolving the decrease; fall back to
      // progress in the gradient.
      Eigen::VectorXd g2;
      Eigen::MatrixXd h2;
      const Eigen::VectorXd full = u + step;
      const double f2 = problem.value(full, &g2, &h2);
      if (!(g2.lpNorm<Eigen::Infinity>() < 0.5 * g.lpNorm<Eigen::Infinity>()) ||
          !(f2 <= f + 1e-15 * std::max(1.0, std::abs(f))))
        break;
      u = full;
      f = f2;
      g = g2;
      h = h2;
      continue;
    }
    u = trial;
    f = problem.value(u, &g, &h);
  }
  out.u = u;
  out.f = f;
  out.gradient_norm = g.lpNorm<Eigen::Infinity>();
  return out;
}

}  // namespace

CalderonSpace::CalderonSpace(BfsSpec y0, BfsSpec y1, double th)
    : Y0(std::move(y0)), Y1(std::move(y1)), theta(th) {
  if (!(Y0.base == Y1.base)) throw ShapeError("Y0 and Y1 must share the measure space");
  require_theta(theta);
}

CalderonResult calderon_norm(const CalderonSpace& C, std::span<const double> x) {
  const std::size_t n = C.Y0.size();
  if (x.size() != n) throw ShapeError("vector length does not match the Calderon space");
  const double theta = C.theta;
  const FiniteMeasureSpace& mu = C.Y0.base;

  CalderonResult r;
  r.x0.assign(n, 0.0);
  r.x1.assign(n, 0.0);
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < n; ++i) {
    if (mu.is_null(i)) {
      r.x0[i] = r.x1[i] = std::abs(x[i]);
    } else if (x[i] != 0.0) {
      active.push_back(i);
    }
  }
  if (active.empty()) return r;

  const bool inf0 = C.Y0.p.is_infinite();
  const bool inf1 = C.Y1.p.is_infinite();
  const auto& s0 = C.Y0.scale;
  const auto& s1 = C.Y1.scale;
  if (inf0 && inf1) {
    double lambda = 0.0;
    for (std::size_t i : active)
      lambda = std::max(lambda, std::abs(x[i]) * std::pow(s0[i], 1.0 - theta) * std::pow(s1[i], theta));
    for (std::size_t i : active) {
      r.x0[i] = lambda / s0[i];
      r.x1[i] = lambda / s1[i];
    }
  } else if (inf1) {
    for (std::size_t i : active) {
      r.x1[i] = 1.0 / s1[i];
      r.x0[i] = std::pow(std::abs(x[i]) * std::pow(s1[i], theta), 1.0 / (1.0 - theta));
    }
  } else if (inf0) {
    for (std::size_t i : active) {
      r.x0[i] = 1.0 / s0[i];
      r.x1[i] = std::pow(std::abs(x[i]) * std::pow(s0[i], 1.0 - theta), 1.0 / theta);
    }
  } else {
    const double p0 = C.Y0.p.value();
    const double p1 = C.Y1.p.value();
    const Eigen::Index m = static_cast<Eigen::Index>(active.size());
    // Work with |x| / max|x| so the exponentials stay in range.
    double peak = 0.0;
    for (std::size_t i : active) peak = std::max(peak, std::abs(x[i]));
    LogSplit problem{Eigen::VectorXd(m), Eigen::VectorXd(m), p0, p1, theta};
    for (Eigen::Index k = 0; k < m; ++k) {
      const std::size_t i = active[static_cast<std::size_t>(k)];
      const double lx = std::log(std::abs(x[i]) / peak);
      problem.b0[k] = std::log(mu.weight(i) * s0[i]) + p0 * lx;
      problem.b1[k] = std::log(mu.weight(i) * s1[i]) + p1 * lx;
    }
    NewtonOutcome best = minimize_log_split(problem, Eigen::VectorXd::Zero(m));
    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> jitter(-1.0, 1.0);
    Eigen::VectorXd start(m);
    for (Eigen::Index k = 0; k < m; ++k) start[k] = jitter(rng);
    NewtonOutcome second = minimize_log_split(problem, start);
    if (second.f < best.f) std::swap(best, second);
    r.iterations = best.iterations + second.iterations;
    r.gradient_norm = best.gradient_norm;
    if (!std::isfinite(best.f) || best.gradient_norm > 1e-9) {
      throw NumericError("Calderon optimizer did not converge (gradient residual " +
                         detail::fmt(best.gradient_norm) + ")");
    }
    for (Eigen::Index k = 0; k < m; ++k) {
      const std::size_t i = active[static_cast<std::size_t>(k)];
      const double ax = std::abs(x[i]);
      r.x0[i] = ax * std::exp(theta * best.u[k]);
      r.x1[i] = ax * std::exp(-(1.0 - theta) * best.u[k]);
    }
  }

  // Restore exact feasibility lost to rounding, then balance the two norms.
  double worst = 1.0;
  for (std::size_t i : active)
    worst = std::max(worst, std::abs(x[i]) / geometric_mean(r.x0[i], r.x1[i], theta));
  const double n0 = norm(C.Y0, r.x0) * worst;
  const double n1 = norm(C.Y1, r.x1) * worst;
  const double k = n1 / n0;
  const double f0 = worst * std::pow(k, theta);
  const double f1 = worst * std::pow(k, -(1.0 - theta));
  for (std::size_t i : active) {
    r.x0[i] *= f0;
    r.x1[i] *= f1;
  }
  r.value = geometric_mean(norm(C.Y0, r.x0), norm(C.Y1, r.x1), theta);
  for (std::size_t i : active) {
    if (geometric_mean(r.x0[i], r.x1[i], theta) < std::abs(x[i]) * (1.0 - 1e-12))
      throw NumericError("Calderon decomposition is infeasible at atom " + std::to_string(i));
  }
  return r;
}

CheckResult interpolated_lipschitz_check(const FiniteMetricSpace& space, const SampledMap& map,
                                         const BfsSpec& Y0, const BfsSpec& Y1, double theta,
                                         double K0, double K1, double tol) {
  const CalderonSpace C(Y0, Y1, theta);
  if (map.atoms() != Y0.size()) throw ShapeError("map columns do not match the atoms of Y0");
  for (const auto& [Y, K] : {std::pair{&Y0, K0}, std::pair{&Y1, K1}}) {
    if (!(K > 0.0) || !std::isfinite(K)) throw ParameterError("K0 and K1 must be positive");
    const LipschitzConstant lip = lipschitz_constant(space, map, norm_metric(*Y));
    if (lip.witness && !detail::within(lip.value, K, tolerance::kExact)) {
      throw PreconditionError("T is not " + detail::fmt(K) + "-Lipschitz into " + Y->describe() +
                                  " (constant " + detail::fmt(lip.value) + ")",
                              detail::pair_witness(map.domain[lip.witness->first],
                                                   map.domain[lip.witness->second]));
    }
  }
  CheckResult c{"interpolated Lipschitz constant <= K0^(1-theta) K1^theta",
                geometric_mean(K0, K1, theta), 0.0, true, ""};
  Vector diff(map.atoms());
  std::string witness;
  for (std::size_t i = 0; i < map.size(); ++i) {
    for (std::size_t j = i + 1; j < map.size(); ++j) {
      for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = map.at(i)[k] - map.at(j)[k];
      const double d = space.distance(map.domain[i], map.domain[j]);
      const double ratio = calderon_norm(C, diff).value / d;
      if (ratio > c.achieved) {
        c.achieved = ratio;
        witness = detail::pair_witness(map.domain[i], map.domain[j]);
      }
    }
  }
  c.holds = c.achieved <= c.bound + tol;
  if (!c.holds) c.witness = witness;
  return c;
}

CheckResult interpolated_phi_check(const FiniteMetricSpace& space, const SampledMap& map,
                                   const BfsSpec& Y0, const BfsSpec& Y1, double theta,
                                   const SetFunctionTable& phi0, const SetFunctionTable& phi1,
                                   double tol, std::size_t limit) {
  const CalderonSpace C(Y0, Y1, theta);
  const std::size_t n = Y0.size();
  if (map.atoms() != n || phi0.atoms() != n || phi1.atoms() != n)
    throw ShapeError("map, Y and phi tables must share the same atoms");
  const std::size_t count = subset_count(n, limit);

  // Hypotheses: T is phi_i-Lipschitz into Y_i.
  Vector diff(n);
  Vector restricted(n);
  for (std::size_t i = 0; i < map.size(); ++i) {
    for (std::size_t j = i + 1; j < map.size(); ++j) {
      for (std::size_t k = 0; k < n; ++k) diff[k] = map.at(i)[k] - map.at(j)[k];
      const double d = space.distance(map.domain[i], map.domain[j]);
      for (Subset a = 0; a < count; ++a) {
        for (std::size_t k = 0; k < n; ++k) restricted[k] = contains(a, k) ? diff[k] : 0.0;
        if (!detail::within(norm(Y0, restricted), phi0[a] * d, tolerance::kExact) ||
            !detail::within(norm(Y1, restricted), phi1[a] * d, tolerance::kExact)) {
          throw PreconditionError("T is not phi_i-Lipschitz into Y_i",
                                  detail::pair_witness(map.domain[i], map.domain[j]) + " on " +
                                      format_subset(a, n));
        }
      }
    }
  }

  CheckResult c{"interpolated phi-Lipschitz ratio <= 1", 1.0, 0.0, true, ""};
  std::string witness;
  bool stray = false;
  for (std::size_t i = 0; i < map.size(); ++i) {
    for (std::size_t j = i + 1; j < map.size(); ++j) {
      for (std::size_t k = 0; k < n; ++k) diff[k] = map.at(i)[k] - map.at(j)[k];
      const double d = space.distance(map.domain[i], map.domain[j]);
      for (Subset a = 1; a < count; ++a) {
        for (std::size_t k = 0; k < n; ++k) restricted[k] = contains(a, k) ? diff[k] : 0.0;
        const double lhs = calderon_norm(C, restricted).value;
        const double rhs = geometric_mean(phi0[a], phi1[a], theta) * d;
        const std::string where =
            detail::pair_witness(map.domain[i], map.domain[j]) + " on " + format_subset(a, n);
        if (rhs > 0.0) {
          if (lhs / rhs > c.achieved) {
            c.achieved = lhs / rhs;
            if (!stray) witness = where;
          }
        } else if (lhs > tol && !stray) {
          stray = true;
          witness = where;
        }
      }
    }
  }
  if (stray) c.achieved = kInfinity;
  c.holds = c.achieved <= c.bound + tol;
  if (!c.holds) c.witness = witness;
  return c;
}

CheckResult interpolated_pointwise_check(const FiniteMetricSpace& space, const SampledMap& map,
                                         double theta, double K0, double K1,
                                         const FiniteMeasureSpace& mu, double tol) {
  require_theta(theta);
  if (map.atoms() != mu.size()) throw ShapeError("map columns do not match the atoms");
  double achieved = 0.0;
  std::string witness;
  std::optional<std::pair<std::size_t, std::size_t>> worst_pair;
  for (std::size_t i = 0; i < map.size(); ++i) {
    for (std::size_t j = i + 1; j < map.size(); ++j) {
      const double d = space.distance(map.domain[i], map.domain[j]);
      for (std::size_t w = 0; w < mu.size(); ++w) {
        if (mu.is_null(w)) continue;
        const double ratio = std::abs(map.at(i)[w] - map.at(j)[w]) / d;
        if (ratio > achieved) {
          achieved = ratio;
          witness = detail::pair_witness(map.domain[i], map.domain[j]) + " atom " + std::to_string(w);
        }
      }
    }
  }
  for (double K : {K0, K1}) {
    if (!(K > 0.0) || !std::isfinite(K)) throw ParameterError("K0 and K1 must be positive");
    if (!detail::within(achieved, K, tol))
      throw PreconditionError("T is not pointwise " + detail::fmt(K) + "-Lipschitz a.e.", witness);
  }
  CheckResult c{"pointwise a.e. constant <= K0^(1-theta) K1^theta", geometric_mean(K0, K1, theta),
                achieved, true, ""};
  c.holds = detail::within(c.achieved, c.bound, tol);
  if (!c.holds) c.witness = witness;
  return c;
}

InterpolationCouple::InterpolationCouple(BfsSpec e0, BfsSpec e1, double th, double exponent)
    : E0(std::move(e0)), E1(std::move(e1)), theta(th), p(exponent) {
  if (E0.size() != E1.size()) throw ShapeError("E0 and E1 must have the same dimension");
  require_theta(theta);
  if (!(p >= 1.0) || !std::isfinite(p))
    throw ParameterError("the K-method exponent must lie in [1, inf), got " + detail::fmt(p));
}

namespace {

struct ClipSolution {
  double level = 0.0;
  double value = 0.0;
};

// min over lambda in [0, max c_i s_i] of alpha lambda + beta ||(c - lambda / s)_+||_E,
// a convex function of one variable with kinks at lambda = c_i s_i.
ClipSolution clip_search(const Vector& c, const Vector& s, double alpha, double beta,
                         const BfsSpec& E, const std::vector<std::size_t>& active) {
  Vector rest(c.size(), 0.0);
  auto g = [&](double lambda) {
    for (std::size_t i : active) rest[i] = std::max(c[i] - lambda / s[i], 0.0);
    return alpha * lambda + beta * norm(E, rest);
  };
  std::vector<double> knots{0.0};
  for (std::size_t i : active) knots.push_back(c[i] * s[i]);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  ClipSolution best{0.0, kInfinity};
  std::size_t at = 0;
  for (std::size_t k = 0; k < knots.size(); ++k) {
    const double v = g(knots[k]);
    if (v < best.value) {
      best = {knots[k], v};
      at = k;
    }
  }
  double lo = knots[at == 0 ? 0 : at - 1];
  double hi = knots[std::min(at + 1, knots.size() - 1)];
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - invphi * (hi - lo);
  double b = lo + invphi * (hi - lo);
  double ga = g(a);
  double gb = g(b);
  const double width = 1e-15 * std::max(1.0, knots.back());
  for (int it = 0; it < 200 && hi - lo > width; ++it) {
    if (ga <= gb) {
      hi = b;
      b = a;
      gb = ga;
      a = hi - invphi * (hi - lo);
      ga = g(a);
    } else {
      lo = a;
      a = b;
      ga = gb;
      b = lo + invphi * (hi - lo);
      gb = g(b);
    }
  }
  for (double lambda : {a, b}) {
    const double v = g(lambda);
    if (v < best.value) best = {lambda, v};
  }
  return best;
}

// Gradient and Hessian of the weighted l^p norm at v > 0.
double lp_norm_derivatives(const Eigen::VectorXd& v, const Eigen::VectorXd& omega, double p,
                           Eigen::VectorXd& grad, Eigen::MatrixXd& hess) {
  if (p == 1.0) {
    grad = omega;
    hess.setZero(v.size(), v.size());
    return omega.dot(v);
  }
  const double peak = v.maxCoeff();
  const Eigen::ArrayXd r = v.array() / peak;
  const double sum = (omega.array() * r.pow(p)).sum();
  const double N = peak * std::pow(sum, 1.0 / p);
  // omega v^(p-1) N^(1-p) = omega (v/N)^(p-1)
  const Eigen::ArrayXd q = v.array() / N;
  grad = (omega.array() * q.pow(p - 1.0)).matrix();
  hess = (p - 1.0) * (Eigen::MatrixXd((omega.array() * q.pow(p - 2.0) / N).matrix().asDiagonal()) -
                      grad * grad.transpose() / N);
  return N;
}

// Both exponents finite: minimize ||b||_E0 + t ||c - b||_E1 over 0 < b < c by a
// log-barrier Newton method.
Vector barrier_split(double t, const Vector& c, const InterpolationCouple& couple,
                     const std::vector<std::size_t>& active, double scale) {
  const Eigen::Index m = static_cast<Eigen::Index>(active.size());
  Eigen::VectorXd cv(m), w0(m), w1(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const std::size_t i = active[static_cast<std::size_t>(k)];
    cv[k] = c[i];
    w0[k] = couple.E0.base.weight(i) * couple.E0.scale[i];
    w1[k] = couple.E1.base.weight(i) * couple.E1.scale[i];
  }
  const double p0 = couple.E0.p.value();
  const double p1 = couple.E1.p.value();

  auto objective = [&](const Eigen::VectorXd& b, double mu, Eigen::VectorXd* grad,
                       Eigen::MatrixXd* hess) {
    if ((b.array() <= 0.0).any() || (b.array() >= cv.array()).any()) return kInfinity;
    Eigen::VectorXd g0, g1;
    Eigen::MatrixXd h0, h1;
    const Eigen::VectorXd rest = cv - b;
    const double n0 = lp_norm_derivatives(b, w0, p0, g0, h0);
    const double n1 = lp_norm_derivatives(rest, w1, p1, g1, h1);
    const double barrier = (b.array().log() + rest.array().log()).sum();
    if (grad) {
      *grad = g0 - t * g1 - mu * (b.cwiseInverse() - rest.cwiseInverse());
      *hess = h0 + t * h1;
      hess->diagonal().array() +=
          mu * (b.array().square().inverse() + rest.array().square().inverse());
    }
    return n0 + t * n1 - mu * barrier;
  };

  Eigen::VectorXd b = cv / 2.0;
  for (double mu = 0.1 * scale / static_cast<double>(m); mu > 1e-15 * scale; mu *= 0.1) {
    Eigen::VectorXd g;
    Eigen::MatrixXd h;
    double f = objective(b, mu, &g, &h);
    for (int it = 0; it < 100; ++it) {
      const Eigen::VectorXd step = -h.ldlt().solve(g);
      const double decrement = -g.dot(step);
      if (!step.allFinite()) throw NumericError("K-functional Newton step is not finite");
      if (decrement <= 1e-22 * scale) break;
      double alpha = 1.0;
      double next = kInfinity;
      Eigen::VectorXd trial;
      for (int ls = 0; ls < 80; ++ls) {
        trial = b + alpha * step;
        next = objective(trial, mu, nullptr, nullptr);
        if (next <= f - 0.25 * alpha * decrement) break;
        alpha *= 0.5;
      }
      if (!(next < f)) break;
      b = trial;
      f = objective(b, mu, &g, &h);
    }
  }
  Vector out(c.size(), 0.0);
  for (Eigen::Index k = 0; k < m; ++k) out[active[static_cast<std::size_t>(k)]] = b[k];
  return out;
}

}  // namespace

KFunctionalResult k_functional(double t, std::span<const double> a,
                               const InterpolationCouple& couple) {
  if (!(t > 0.0) || !std::isfinite(t))
    throw ParameterError("K-functional needs t > 0, got " + detail::fmt(t));
  const std::size_t n = couple.E0.size();
  if (a.size() != n) throw ShapeError("vector length does not match the couple");

  KFunctionalResult r;
  r.a0.assign(a.begin(), a.end());
  r.a1.assign(n, 0.0);
  const double all0 = norm(couple.E0, a);
  const double all1 = t * norm(couple.E1, a);

  // Atoms that either norm ignores go to the side where they cost nothing.
  Vector c(n, 0.0);
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < n; ++i) {
    const bool live0 = !couple.E0.base.is_null(i);
    const bool live1 = !couple.E1.base.is_null(i);
    if (!live0) continue;
    if (!live1) {
      r.a0[i] = 0.0;
      r.a1[i] = a[i];
      continue;
    }
    if (a[i] != 0.0) {
      c[i] = std::abs(a[i]);
      active.push_back(i);
    }
  }

  auto signed_part = [&](const Vector& magnitude, std::size_t i) {
    return a[i] < 0.0 ? -magnitude[i] : magnitude[i];
  };
  Vector part(n, 0.0);
  Vector lifted;
  bool part_is_a1 = true;
  if (!active.empty()) {
    if (couple.E1.p.is_infinite()) {
      const ClipSolution sol = clip_search(c, couple.E1.scale, t, 1.0, couple.E0, active);
      for (std::size_t i : active) part[i] = std::min(c[i], sol.level / couple.E1.scale[i]);
    } else if (couple.E0.p.is_infinite()) {
      const ClipSolution sol = clip_search(c, couple.E0.scale, 1.0, t, couple.E1, active);
      for (std::size_t i : active) part[i] = std::min(c[i], sol.level / couple.E0.scale[i]);
      part_is_a1 = false;
    } else {
      part = barrier_split(t, c, couple, active, std::max(std::min(all0, all1), 1e-300));
      part_is_a1 = false;
    }
  }
  for (std::size_t i : active) {
    const double p = signed_part(part, i);
    if (part_is_a1) {
      r.a1[i] = p;
      r.a0[i] = a[i] - p;
    } else {
      r.a0[i] = p;
      r.a1[i] = a[i] - p;
    }
  }
  r.value = norm(couple.E0, r.a0) + t * norm(couple.E1, r.a1);

  // The trivial decompositions bound K from above.
  if (all0 <= r.value && all0 <= all1) {
    r.value = all0;
    r.a0.assign(a.begin(), a.end());
    r.a1.assign(n, 0.0);
  } else if (all1 < r.value) {
    r.value = all1;
    r.a0.assign(n, 0.0);
    r.a1.assign(a.begin(), a.end());
  }
  if (!std::isfinite(r.value)) throw NumericError("K-functional solver produced a non-finite value");
  return r;
}

RealInterpNorm real_interp_norm(std::span<const double> a, const InterpolationCouple& couple) {
  const std::size_t n = couple.E0.size();
  if (a.size() != n) throw ShapeError("vector length does not match the couple");
  RealInterpNorm r;
  double peak = 0.0;
  for (double v : a) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return r;
  Vector unit(n);
  for (std::size_t i = 0; i < n; ++i) unit[i] = a[i] / peak;
  const double A0 = norm(couple.E0, unit);
  const double A1 = norm(couple.E1, unit);
  if (A0 == 0.0 || A1 == 0.0) return r;

  const double theta = couple.theta;
  const double p = couple.p;
  auto K = [&](double t) { return k_functional(t, unit, couple).value; };
  const double exact = 1e-10;

  double t_min = A0 / A1;
  for (int it = 0; K(t_min) < t_min * A1 * (1.0 - exact); ++it) {
    if (it > 400) throw NumericError("K-functional never reaches its small-t asymptote");
    t_min *= 0.5;
  }
  double t_max = A0 / A1;
  for (int it = 0; K(t_max) < A0 * (1.0 - exact); ++it) {
    if (it > 400) throw NumericError("K-functional never reaches its large-t asymptote");
    t_max *= 2.0;
  }
  r.t_max = t_max;

  const double lower_tail = std::pow(A1, p) * std::pow(t_min, p * (1.0 - theta)) / (p * (1.0 - theta));
  const double upper_tail = std::pow(A0, p) * std::pow(t_max, -p * theta) / (p * theta);
  double middle = 0.0;
  double error = 0.0;
  if (t_max > t_min) {
    auto integrand = [&](double s) {
      const double t = std::exp(s);
      return std::pow(std::exp(-theta * s) * K(t), p);
    };
    middle = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        integrand, std::log(t_min), std::log(t_max), 15, 1e-10, &error);
  }
  const double total = lower_tail + middle + upper_tail;
  if (!(error <= 1e-4 * total)) {
    throw NumericError("real interpolation quadrature did not converge (estimate " +
                       detail::fmt(total) + ", error " + detail::fmt(error) + ")");
  }
  r.t_min = t_min;
  r.quadrature_error = error / total;
  r.value = peak * std::pow(total, 1.0 / p);
  return r;
}

CheckResult interp_domination_check(const Matrix& T, const InterpolationCouple& E,
                                    const InterpolationCouple& Y, const SetFunctionTable& phi0,
                                    const SetFunctionTable& phi1,
                                    const std::vector<Vector>& test_vectors, double tol,
                                    std::size_t limit) {
  if (E.theta != Y.theta || E.p != Y.p)
    throw ParameterError("both couples must use the same theta and p");
  const std::size_t m = E.E0.size();
  const std::size_t n = Y.E0.size();
  if (T.cols() != m || T.rows() != n)
    throw ShapeError("T must have one row per atom of Y and one column per coordinate of E");
  if (phi0.atoms() != n || phi1.atoms() != n) throw ShapeError("phi tables must live on Y's atoms");
  for (const Vector& x : test_vectors)
    if (x.size() != m) throw ShapeError("test vector length does not match E");
  const std::size_t count = subset_count(n, limit);
  const double theta = E.theta;

  auto apply = [&](const Vector& x) {
    Vector y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) y[i] += T(i, j) * x[j];
    return y;
  };

  // The Y0 bound on the test vectors, the Y1 bound on them and their differences.
  std::vector<Vector> probes = test_vectors;
  for (std::size_t i = 0; i < test_vectors.size(); ++i) {
    for (std::size_t j = i + 1; j < test_vectors.size(); ++j) {
      Vector d(m);
      for (std::size_t k = 0; k < m; ++k) d[k] = test_vectors[i][k] - test_vectors[j][k];
      probes.push_back(std::move(d));
    }
  }
  for (std::size_t v = 0; v < probes.size(); ++v) {
    const Vector tx = apply(probes[v]);
    const double e0 = norm(E.E0, probes[v]);
    const double e1 = norm(E.E1, probes[v]);
    for (Subset a = 0; a < count; ++a) {
      const Vector part = restrict_to(tx, a);
      const std::string where = "probe " + std::to_string(v) + " on " + format_subset(a, n);
      if (v < test_vectors.size() && !detail::within(norm(Y.E0, part), phi0[a] * e0, tolerance::kExact))
        throw PreconditionError("Y0 domination fails: ||T(x) chi_A||_Y0 > phi0(A) ||x||_E0", where);
      if (!detail::within(norm(Y.E1, part), phi1[a] * e1, tolerance::kExact))
        throw PreconditionError("Y1 domination fails: ||T(x) chi_A||_Y1 > phi1(A) ||x||_E1", where);
    }
  }

  CheckResult c{"interpolated domination ratio <= 1", 1.0, 0.0, true, ""};
  std::string witness;
  for (std::size_t v = 0; v < test_vectors.size(); ++v) {
    const double ex = real_interp_norm(test_vectors[v], E).value;
    const Vector tx = apply(test_vectors[v]);
    for (Subset a = 1; a < count; ++a) {
      const double lhs = real_interp_norm(restrict_to(tx, a), Y).value;
      const double rhs = geometric_mean(phi0[a], phi1[a], theta) * ex;
      double ratio = 0.0;
      if (rhs > 0.0)
        ratio = lhs / rhs;
      else if (lhs > tol)
        ratio = kInfinity;
      if (ratio > c.achieved) {
        c.achieved = ratio;
        witness = "test vector " + std::to_string(v) + " on " + format_subset(a, n);
      }
    }
  }
  c.holds = c.achieved <= c.bound + tol;
  if (!c.holds) c.witness = witness;
  return c;
}

double operator_norm(const Matrix& T, const BfsSpec& source, const BfsSpec& target) {
  const std::size_t m = source.size();
  const std::size_t n = target.size();
  if (T.cols() != m || T.rows() != n) throw ShapeError("matrix shape does not match the spaces");
  Vector column(n);
  auto image_of = [&](const Vector& x) {
    Vector y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) y[i] += T(i, j) * x[j];
    return y;
  };
  std::vector<std::size_t> live;
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < n; ++i) column[i] = T(i, j);
    if (source.base.is_null(j)) {
      // A null coordinate has zero norm, so any visible image is unbounded.
      if (norm(target, column) > 0.0) return kInfinity;
    } else {
      live.push_back(j);
    }
  }
  double best = 0.0;
  if (source.p.value() == 1.0) {
    for (std::size_t j : live) {
      for (std::size_t i = 0; i < n; ++i) column[i] = T(i, j);
      best = std::max(best, norm(target, column) / (source.base.weight(j) * source.scale[j]));
    }
  } else if (source.p.is_infinite()) {
    const std::size_t count = subset_count(live.size());
    Vector x(m, 0.0);
    for (Subset signs = 0; signs < count; ++signs) {
      for (std::size_t k = 0; k < live.size(); ++k)
        x[live[k]] = (contains(signs, k) ? 1.0 : -1.0) / source.scale[live[k]];
      best = std::max(best, norm(target, image_of(x)));
    }
  } else {
    throw ParameterError("closed-form operator norms need an L^1 or L^inf source");
  }
  return best;
}

}  // namespace lipext
