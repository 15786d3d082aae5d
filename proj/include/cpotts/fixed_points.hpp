#pragma once

// Solution analysis of the limiting ratio system: the symmetric branch
// u = v (rational function f, cubic root counting, tangency quartic with
// thresholds theta1*, theta1**, eta1, eta2), the asymmetric branch via the
// s = u+v, t = uv reduction, assembly of all fixed points, and Jacobian
// stability classification.
//
// Printed coefficient sets are not trusted anywhere a re-derivation is
// possible: the s-quadratic is formed at runtime by clearing denominators
// of the two t(s) expressions, and every root is verified against both.

#include <algorithm>
#include <cmath>
#include <future>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cpotts/model.hpp"
#include "cpotts/poly.hpp"
#include "cpotts/recursion.hpp"

namespace cpotts {

// ---------------------------------------------------------------------------
// Symmetric branch: theta3 * u = f(u)

// f(u) = (a u^2 + b u + c) / (p u^2 + q u + r), all six coefficients positive.
struct SymmetricRational {
  double a, b, c, p, q, r;
};

inline SymmetricRational symmetric_rational(const ThetaParams& t) {
  const double T = t.theta_tilde;
  return {T * T * t.theta1 + 2.0 * T + t.theta1,
          2.0 * (T + 1.0),
          t.theta1,
          2.0 * (t.theta1 + 1.0),
          4.0 * T,
          T * T * t.theta1};
}

inline double f_symmetric(double u, const ThetaParams& t) {
  const auto [a, b, c, p, q, r] = symmetric_rational(t);
  return (a * u * u + b * u + c) / (p * u * u + q * u + r);
}

inline double f_symmetric_d1(double u, const ThetaParams& t) {
  const auto [a, b, c, p, q, r] = symmetric_rational(t);
  const double N = a * u * u + b * u + c, D = p * u * u + q * u + r;
  const double N1 = 2.0 * a * u + b, D1 = 2.0 * p * u + q;
  return (N1 * D - N * D1) / (D * D);
}

inline double f_symmetric_d2(double u, const ThetaParams& t) {
  const auto [a, b, c, p, q, r] = symmetric_rational(t);
  const double N = a * u * u + b * u + c, D = p * u * u + q * u + r;
  const double N1 = 2.0 * a * u + b, D1 = 2.0 * p * u + q;
  const double N2 = 2.0 * a, D2 = 2.0 * p;
  return ((N2 * D - N * D2) * D - 2.0 * D1 * (N1 * D - N * D1)) / (D * D * D);
}

// theta3*u = f(u) cleared to a cubic, ascending coefficients.
inline poly::Coeffs symmetric_cubic(const ThetaParams& t) {
  const auto [a, b, c, p, q, r] = symmetric_rational(t);
  const double t3 = t.theta3;
  return {-c, t3 * r - b, t3 * q - a, t3 * p};
}

// All positive solutions of theta3*u = f(u), each polished so the defect
// |theta3*u - f(u)| is at rounding level.
inline std::vector<double> solve_symmetric(const ThetaParams& t) {
  std::vector<double> roots = poly::positive_roots(symmetric_cubic(t));
  for (double& u : roots) {
    for (int k = 0; k < 3; ++k) {
      const double g = t.theta3 * u - f_symmetric(u, t);
      const double dg = t.theta3 - f_symmetric_d1(u, t);
      if (dg == 0.0) break;
      const double un = u - g / dg;
      if (un > 0.0 &&
          std::abs(t.theta3 * un - f_symmetric(un, t)) <= std::abs(g))
        u = un;
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

inline int symmetric_solution_count(const ThetaParams& t) {
  return static_cast<int>(solve_symmetric(t).size());
}

// Threshold on theta1 above which f acquires an inflection point. The
// radicand matches the closed form quoted alongside the model; the leading
// term enters with a minus sign, which is what the second-derivative
// analysis actually yields (the positive-sign variant is off by far more
// than any rounding and fails the sign-scan cross-check).
inline double theta1_star(const ThetaParams& t) {
  const double T = t.theta_tilde;
  const double rad = 9.0 * T * T * T * T + 26.0 * T * T * T + 35.0 * T * T +
                     50.0 * T + 33.0;
  return (-(T * T + T + 1.0) + std::sqrt(rad)) / ((T * T + 2.0) * (T + 1.0));
}

// Numerator polynomial of f'' (ascending), built by polynomial arithmetic
// from N and D rather than transcribed.
inline poly::Coeffs f_second_derivative_numerator(const ThetaParams& t) {
  const auto [a, b, c, p, q, r] = symmetric_rational(t);
  const poly::Coeffs N{c, b, a}, D{r, q, p};
  const poly::Coeffs N1 = poly::derivative(N), D1 = poly::derivative(D);
  const poly::Coeffs N2 = poly::derivative(N1), D2 = poly::derivative(D1);
  using poly::mul;
  using poly::sub;
  const poly::Coeffs inner = sub(mul(N1, D), mul(N, D1));
  return sub(mul(sub(mul(N2, D), mul(N, D2)), D),
             poly::scale(mul(D1, inner), 2.0));
}

// Location of the convex-to-concave sign change of f'', when there is one.
inline std::optional<double> inflection_point(const ThetaParams& t) {
  const poly::Coeffs num = f_second_derivative_numerator(t);
  for (double u : poly::positive_roots(num)) {
    const double d = std::max(1e-9, 1e-6 * u);
    if (f_symmetric_d2(u - d, t) > 0.0 && f_symmetric_d2(u + d, t) < 0.0)
      return u;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Tangency quartic: u f'(u) = f(u)

struct QuarticCoefficients {
  double A, B, C, D, E;  // A u^4 + B u^3 + C u^2 + D u + E
};

// A, B, C, D match the quoted coefficient list; the constant term works out
// to theta_tilde^2 * theta1^2 (derivable by expanding u N' D - u N D' - N D,
// and required for the tangency roots to satisfy u f'(u) = f(u)).
inline QuarticCoefficients quartic_coefficients(const ThetaParams& t) {
  const double T = t.theta_tilde, t1 = t.theta1;
  return {2.0 * (t1 + 1.0) * (T * T * t1 + 2.0 * T + t1),
          8.0 * (T + 1.0) * (t1 + 1.0),
          -T * T * T * T * t1 * t1 - 2.0 * T * T * T * t1 - T * T * t1 * t1 +
              8.0 * T * T + 8.0 * T + 6.0 * t1 * t1 + 6.0 * t1,
          8.0 * T * t1,
          T * T * t1 * t1};
}

inline poly::Coeffs tangency_quartic(const ThetaParams& t) {
  const QuarticCoefficients q = quartic_coefficients(t);
  return {q.E, q.D, q.C, q.B, q.A};
}

// Positive roots of the tangency quartic; 0 or 2 of them (coefficients other
// than C are positive, so Descartes caps the count at two).
inline std::vector<double> tangency_roots(const ThetaParams& t) {
  std::vector<double> roots = poly::positive_roots(tangency_quartic(t));
  const poly::Coeffs quartic = tangency_quartic(t);
  const poly::Coeffs dq = poly::derivative(quartic);
  for (double& u : roots) {
    for (int k = 0; k < 2; ++k) {
      const double g = poly::eval(quartic, u);
      const double dg = poly::eval(dq, u);
      if (dg == 0.0) break;
      const double un = u - g / dg;
      if (un > 0.0 && std::abs(poly::eval(quartic, un)) <= std::abs(g)) u = un;
    }
  }
  return roots;
}

// theta1 above which the quartic's C coefficient is negative; defined only
// for theta_tilde^2 > 2 (otherwise C > 0 for every positive theta1).
inline double theta1_star_star(const ThetaParams& t) {
  const double T = t.theta_tilde;
  const double a = 6.0 - T * T * T * T - T * T;
  // tolerance band: tilde^2 computed from sqrt() can straddle 2 by an ulp
  if (!(a < -1e-14 * (6.0 + T * T * T * T + T * T)))
    throw std::domain_error(
        "theta1** undefined: requires theta_tilde^2 > 2 (C quadratic must "
        "open downward)");
  const double b = 6.0 - 2.0 * T * T * T;
  const double c = 8.0 * T * T + 8.0 * T;
  const double disc = b * b - 4.0 * a * c;
  return (b + std::sqrt(disc)) / (-2.0 * a);
}

// Field-parameter window of the symmetric three-solution regime:
// eta_i = f(u_i*)/u_i* at the two tangency roots, sorted ascending.
inline std::pair<double, double> eta_thresholds(const ThetaParams& t) {
  const std::vector<double> roots = tangency_roots(t);
  if (roots.size() != 2)
    throw std::domain_error(
        "eta thresholds undefined: tangency equation has " +
        std::to_string(roots.size()) + " positive roots (need 2)");
  const double e0 = f_symmetric(roots[0], t) / roots[0];
  const double e1 = f_symmetric(roots[1], t) / roots[1];
  return {std::min(e0, e1), std::max(e0, e1)};
}

// ---------------------------------------------------------------------------
// Asymmetric branch: s = u + v, t = uv

namespace detail {
inline void require_theta1_not_one(const ThetaParams& t) {
  if (std::abs(t.theta1 - 1.0) < 1e-12 * std::max(1.0, t.theta1))
    throw std::domain_error(
        "asymmetric reduction degenerate at theta1 = 1 (division by "
        "theta1 - 1)");
}

inline double division_denominator(const ThetaParams& t) {
  const double T = t.theta_tilde;
  const double d = T * T * t.theta1 + t.theta1 - 2.0 * T;
  if (std::abs(d) < 1e-12 * (T * T * t.theta1 + t.theta1 + 2.0 * T))
    throw std::domain_error(
        "asymmetric reduction degenerate: theta1*(theta_tilde^2+1) = "
        "2*theta_tilde");
  return d;
}
}  // namespace detail

// t(s) from the subtracted equation after cancelling (u - v). The field
// parameter theta3 carries through the derivation; substituting theta2 for
// it (see t_from_s_theta2_form) is measurably wrong whenever the two differ.
inline double t_from_s_ratio(double s, const ThetaParams& t) {
  detail::require_theta1_not_one(t);
  const double T = t.theta_tilde, t1 = t.theta1, t3 = t.theta3;
  return (t3 * t1 * s * s + (2.0 * t3 * T - t1 * (T * T - 1.0)) * s +
          t3 * T * T * t1 - 2.0 * (T - 1.0)) /
         (2.0 * t3 * (t1 - 1.0));
}

// The same expression with theta2 in the three positions where the
// derivation produces theta3. Kept only as the negative-control form for
// the consistency tests.
inline double t_from_s_theta2_form(double s, const ThetaParams& t) {
  detail::require_theta1_not_one(t);
  const double T = t.theta_tilde, t1 = t.theta1, t2 = t.theta2, t3 = t.theta3;
  return (t2 * t1 * s * s + (2.0 * t2 * T - t1 * (T * T - 1.0)) * s +
          t2 * T * T * t1 - 2.0 * (T - 1.0)) /
         (2.0 * t3 * (t1 - 1.0));
}

// t(s) from dividing the two fixed-point equations.
inline double t_from_s_division(double s, const ThetaParams& t) {
  const double d = detail::division_denominator(t);
  return (t.theta1 * s * s + 2.0 * s + t.theta1) / d;
}

// Quadratic in s from equating the two t(s) expressions, formed by clearing
// denominators at runtime. Ascending coefficients.
inline poly::Coeffs s_quadratic(const ThetaParams& t) {
  detail::require_theta1_not_one(t);
  const double T = t.theta_tilde, t1 = t.theta1, t3 = t.theta3;
  const double d1 = 2.0 * t3 * (t1 - 1.0);
  const double d2 = detail::division_denominator(t);
  const double n1_2 = t3 * t1;
  const double n1_1 = 2.0 * t3 * T - t1 * (T * T - 1.0);
  const double n1_0 = t3 * T * T * t1 - 2.0 * (T - 1.0);
  return {n1_0 * d2 - t1 * d1, n1_1 * d2 - 2.0 * d1, n1_2 * d2 - t1 * d1};
}

// Positive roots of the s-quadratic, each verified to satisfy both t(s)
// expressions; near-tangent discriminants collapse to one double root.
inline std::vector<double> asymmetric_s_roots(const ThetaParams& t) {
  const poly::Coeffs Q = s_quadratic(t);
  const double scale = poly::max_abs(Q);
  std::vector<double> candidates;
  if (std::abs(Q[2]) <= 1e-14 * scale) {
    if (std::abs(Q[1]) > 1e-14 * scale) candidates.push_back(-Q[0] / Q[1]);
  } else {
    const double disc = Q[1] * Q[1] - 4.0 * Q[2] * Q[0];
    const double disc_scale = Q[1] * Q[1] + 4.0 * std::abs(Q[2] * Q[0]);
    if (disc >= 0.0) {
      const double sd = std::sqrt(disc);
      if (Q[1] == 0.0) {
        candidates.push_back(sd / (2.0 * Q[2]));
        candidates.push_back(-sd / (2.0 * Q[2]));
      } else {
        const double qq = -0.5 * (Q[1] + std::copysign(sd, Q[1]));
        candidates.push_back(qq / Q[2]);
        candidates.push_back(Q[0] / qq);
      }
    } else if (disc > -1e-12 * disc_scale) {
      candidates.push_back(-Q[1] / (2.0 * Q[2]));  // tangent double root
    }
  }

  std::vector<double> roots;
  const poly::Coeffs dQ = poly::derivative(Q);
  for (double s : candidates) {
    if (!(s > 0.0) || !std::isfinite(s)) continue;
    for (int k = 0; k < 2; ++k) {  // polish against the cleared quadratic
      const double g = poly::eval(Q, s);
      const double dg = poly::eval(dQ, s);
      if (dg == 0.0) break;
      const double sn = s - g / dg;
      if (sn > 0.0 && std::abs(poly::eval(Q, sn)) <= std::abs(g)) s = sn;
    }
    const double ta = t_from_s_ratio(s, t);
    const double tb = t_from_s_division(s, t);
    if (std::abs(ta - tb) <= 1e-10 * std::max(1.0, std::abs(tb)))
      roots.push_back(s);
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](double x, double y) {
                            return std::abs(x - y) <=
                                   1e-10 * std::max(1.0, std::abs(x));
                          }),
              roots.end());
  return roots;
}

// Threshold s* beyond which t(s) from the division form satisfies t < s^2/4,
// i.e. the (s, t) pair decomposes into a real asymmetric (u, v).
inline double s_star(const ThetaParams& t) {
  const double T = t.theta_tilde, t1 = t.theta1;
  const double lead = t1 * (T * T - 3.0) - 2.0 * T;
  if (!(lead > 0.0))
    throw std::domain_error(
        "s* undefined: requires theta1*(theta_tilde^2 - 3) > 2*theta_tilde");
  return (4.0 + std::sqrt(16.0 + 4.0 * t1 * lead)) / lead;
}

// Slope of the line through (0, 2/theta3) tangent to the parabola side of
// the equated-t relation. The parabola coefficients are recovered from the
// runtime s-quadratic rather than transcribed.
inline double k0_slope(const ThetaParams& t) {
  const double T = t.theta_tilde, t1 = t.theta1, t3 = t.theta3;
  if (std::abs(T - 1.0) < 1e-12)
    throw std::domain_error("k0 undefined at theta_tilde = 1");
  const poly::Coeffs Q = s_quadratic(t);
  const double d2 = detail::division_denominator(t);
  const double a0 = (Q[0] / (T - 1.0) + 2.0 * d2) / t3;
  const double a1 = (Q[1] / (T - 1.0) + d2 * t1 * (T + 1.0)) / t3;
  const double a2 = (Q[2] / (T - 1.0)) / t3;
  const double alpha = a2 / d2, beta = a1 / d2, gamma = a0 / d2;
  const double c = 2.0 / t3;
  if (!(alpha > 0.0))
    throw std::domain_error("k0 undefined: parabola not convex upward");
  if (!(gamma > c))
    throw std::domain_error(
        "k0 undefined: line intercept at or above the parabola intercept "
        "(single-root regime)");
  return beta + 2.0 * std::sqrt(alpha * (gamma - c));
}

// (u, v) with u > v from u+v = s, uv = t.
inline std::pair<double, double> recover_uv(double s, double t) {
  if (!(t > 0.0)) throw std::domain_error("recover_uv requires t > 0");
  const double disc = s * s - 4.0 * t;
  if (!(disc > 0.0))
    throw std::domain_error("recover_uv requires t < s^2/4");
  const double u = 0.5 * (s + std::sqrt(disc));
  return {u, t / u};
}

// ---------------------------------------------------------------------------
// Assembly and stability

enum class Branch { symmetric, asymmetric };
enum class Stability { stable, unstable, marginal };

inline const char* to_string(Branch b) {
  return b == Branch::symmetric ? "symmetric" : "asymmetric";
}
inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    default: return "marginal";
  }
}

struct FixedPoint {
  RatioPoint point;
  Branch branch = Branch::symmetric;
  double residual = 0.0;
  double spectral_radius = 0.0;
  Stability stability = Stability::marginal;
};

inline double system_residual(RatioPoint p, const ThetaParams& t) {
  const RatioPoint q = ratio_step(p, t);
  return std::max(std::abs(q.u - p.u), std::abs(q.v - p.v));
}

inline constexpr double kStabilityMargin = 1e-6;

inline std::pair<double, Stability> stability_of(RatioPoint p,
                                                 const ThetaParams& t) {
  if (system_residual(p, t) > 1e-6)
    throw std::invalid_argument(
        "stability_of requires a fixed point (residual <= 1e-6)");
  const double rho = ratio_step_jacobian(p, t).spectral_radius();
  Stability s = Stability::marginal;
  if (rho < 1.0 - kStabilityMargin)
    s = Stability::stable;
  else if (rho > 1.0 + kStabilityMargin)
    s = Stability::unstable;
  return {rho, s};
}

namespace detail {

// Damped Newton on F(p) = ratio_step(p) - p. Returns the improved point, or
// nullopt if it leaves the positive quadrant / stops making progress before
// reaching tol.
inline std::optional<RatioPoint> newton_refine(RatioPoint p,
                                               const ThetaParams& t,
                                               double tol, int max_iter) {
  for (int it = 0; it < max_iter; ++it) {
    if (!(p.u > 0.0) || !(p.v > 0.0) || p.u > 1e14 || p.v > 1e14)
      return std::nullopt;
    const RatioPoint g = ratio_step(p, t);
    const double fu = g.u - p.u, fv = g.v - p.v;
    const double res = std::max(std::abs(fu), std::abs(fv));
    if (res < tol) return p;
    const Jacobian2 j = ratio_step_jacobian(p, t);
    const double a = j.a - 1.0, b = j.b, c = j.c, d = j.d - 1.0;
    const double det = a * d - b * c;
    if (std::abs(det) < 1e-300) return std::nullopt;
    double du = (-fu * d + fv * b) / det;
    double dv = (-fv * a + fu * c) / det;
    // keep the iterate strictly positive
    int halvings = 0;
    while ((p.u + du <= 0.0 || p.v + dv <= 0.0) && halvings < 60) {
      du *= 0.5;
      dv *= 0.5;
      ++halvings;
    }
    if (halvings == 60) return std::nullopt;
    p = {p.u + du, p.v + dv};
  }
  return system_residual(p, t) < tol ? std::optional<RatioPoint>(p)
                                     : std::nullopt;
}

}  // namespace detail

// Every fixed point of the ratio system: symmetric roots plus the
// reconstructed asymmetric pairs (each admissible s contributes (u,v) and
// its reflection (v,u)). An empty asymmetric branch (degenerate theta1 or
// no admissible roots) is a normal outcome. Points are deduplicated at
// 1e-8 relative and sorted by (u, v).
inline std::vector<FixedPoint> all_fixed_points(const ThetaParams& t) {
  std::vector<FixedPoint> out;
  auto push = [&](RatioPoint p, Branch branch) {
    const double res = system_residual(p, t);
    if (res > 1e-9) {
      const auto polished = detail::newton_refine(p, t, 1e-13, 40);
      if (!polished) return;
      p = *polished;
    }
    FixedPoint fp;
    fp.point = p;
    fp.branch = branch;
    fp.residual = system_residual(p, t);
    if (fp.residual > 1e-9) return;
    std::tie(fp.spectral_radius, fp.stability) = stability_of(p, t);
    out.push_back(fp);
  };

  for (double u : solve_symmetric(t)) push({u, u}, Branch::symmetric);

  try {
    for (double s : asymmetric_s_roots(t)) {
      const double tv = t_from_s_division(s, t);
      if (!(tv > 0.0)) continue;
      if (!(s * s - 4.0 * tv > 1e-12 * s * s)) continue;  // degenerate pair
      const auto [u, v] = recover_uv(s, tv);
      const auto refined = detail::newton_refine({u, v}, t, 1e-13, 40);
      const RatioPoint p = refined.value_or(RatioPoint{u, v});
      push(p, Branch::asymmetric);
      push({p.v, p.u}, Branch::asymmetric);
    }
  } catch (const std::domain_error&) {
    // asymmetric reduction out of regime; symmetric branch stands alone
  }

  std::sort(out.begin(), out.end(), [](const FixedPoint& x, const FixedPoint& y) {
    if (x.point.u != y.point.u) return x.point.u < y.point.u;
    return x.point.v < y.point.v;
  });
  std::vector<FixedPoint> dedup;
  for (const auto& fp : out) {
    const bool dup =
        std::any_of(dedup.begin(), dedup.end(), [&](const FixedPoint& q) {
          return std::abs(fp.point.u - q.point.u) <=
                     1e-8 * std::max(1.0, std::abs(fp.point.u)) &&
                 std::abs(fp.point.v - q.point.v) <=
                     1e-8 * std::max(1.0, std::abs(fp.point.v));
        });
    if (!dup) dedup.push_back(fp);
  }
  return dedup;
}

// Independent cross-check path: damped Newton started from a log-spaced
// grid of initial points. Shares nothing with the s-t reduction.
inline std::vector<RatioPoint> newton_fixed_points(const ThetaParams& t,
                                                   int grid = 20,
                                                   double lo = 1e-3,
                                                   double hi = 1e3,
                                                   int jobs = 1) {
  if (grid < 2) throw std::invalid_argument("newton grid must be >= 2");
  const double llo = std::log(lo), lhi = std::log(hi);
  auto run_row = [&](int i) {
    std::vector<RatioPoint> found;
    const double u0 = std::exp(llo + (lhi - llo) * i / (grid - 1));
    for (int j = 0; j < grid; ++j) {
      const double v0 = std::exp(llo + (lhi - llo) * j / (grid - 1));
      const auto p = detail::newton_refine({u0, v0}, t, 1e-12, 120);
      if (p) found.push_back(*p);
    }
    return found;
  };

  std::vector<RatioPoint> all;
  if (jobs <= 1) {
    for (int i = 0; i < grid; ++i) {
      auto row = run_row(i);
      all.insert(all.end(), row.begin(), row.end());
    }
  } else {
    std::vector<std::future<std::vector<RatioPoint>>> rows;
    rows.reserve(grid);
    for (int i = 0; i < grid; ++i)
      rows.push_back(std::async(std::launch::async, run_row, i));
    for (auto& fut : rows) {  // merge in row order regardless of completion
      auto row = fut.get();
      all.insert(all.end(), row.begin(), row.end());
    }
  }

  std::sort(all.begin(), all.end(), [](RatioPoint a, RatioPoint b) {
    if (a.u != b.u) return a.u < b.u;
    return a.v < b.v;
  });
  std::vector<RatioPoint> dedup;
  for (const auto& p : all) {
    const bool dup = std::any_of(dedup.begin(), dedup.end(), [&](RatioPoint q) {
      return std::abs(p.u - q.u) <= 1e-8 * std::max(1.0, std::abs(p.u)) &&
             std::abs(p.v - q.v) <= 1e-8 * std::max(1.0, std::abs(p.v));
    });
    if (!dup) dedup.push_back(p);
  }
  return dedup;
}

}  // namespace cpotts
