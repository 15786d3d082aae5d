#pragma once

// The dynamical core: the root-spin partition recursion Z^(n) <- Z^(n-1),
// the two-variable ratio map (u, v) = (Z2/Z1, Z3/Z1), fixed-point iteration,
// and the closed-form Jacobian of the ratio map.

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cpotts/enumeration.hpp"
#include "cpotts/model.hpp"

namespace cpotts {

// w[i][j][m] = log weight attached when a root with spin i+1 is joined to two
// subtrees whose roots carry spins j+1 and m+1: the two new edges, the new
// sibling pair, the triple centered at the new root, and the root's field.
struct StepTable {
  double w[3][3][3];
};

inline StepTable make_step_table(const ThetaParams& thetas, TripleDelta variant) {
  const LogCouplings lc = log_couplings(thetas);
  StepTable t{};
  for (Spin i = 1; i <= 3; ++i)
    for (Spin j = 1; j <= 3; ++j)
      for (Spin m = 1; m <= 3; ++m)
        t.w[i - 1][j - 1][m - 1] =
            lc.J * (delta2(i, j) + delta2(i, m)) + lc.J1 * delta2(j, m) +
            lc.J2 * 0.5 * delta3_num2(j, i, m, variant) + lc.h * delta2(1, i);
  return t;
}

// Base case of the recursion. Free boundary: a single vertex carrying only
// its field weight. Uniform(i): the spin-i indicator vector pushed through
// one recursion step, evaluated directly so no -inf log enters; only the
// (j,m) = (i,i) term of the step survives. The spurious constant factor
// theta1 per leaf cancels in every ratio.
inline PartitionVector base_partition(BoundarySpec boundary,
                                      const ThetaParams& thetas) {
  PartitionVector pv;
  if (boundary.is_free()) {
    pv.logZ = {std::log(thetas.theta3), 0.0, 0.0};
    return pv;
  }
  const StepTable t = make_step_table(thetas, TripleDelta::averaged);
  const int i = boundary.spin - 1;
  for (int r = 0; r < 3; ++r) pv.logZ[r] = t.w[r][i][i];
  return pv;
}

inline PartitionVector step_partition(const PartitionVector& pv,
                                      const StepTable& table) {
  PartitionVector out;
  for (int i = 0; i < 3; ++i) {
    double terms[9];
    double m = -std::numeric_limits<double>::infinity();
    int k = 0;
    for (int j = 0; j < 3; ++j)
      for (int mm = 0; mm < 3; ++mm) {
        terms[k] = table.w[i][j][mm] + pv.logZ[j] + pv.logZ[mm];
        m = std::max(m, terms[k]);
        ++k;
      }
    double sum = 0.0;
    for (double term : terms) sum += std::exp(term - m);
    out.logZ[i] = m + std::log(sum);
  }
  return out;
}

inline PartitionVector step_partition(const PartitionVector& pv,
                                      const ThetaParams& thetas,
                                      TripleDelta variant) {
  return step_partition(pv, make_step_table(thetas, variant));
}

struct RatioPoint {
  double u = 1.0;
  double v = 1.0;
};

inline RatioPoint ratios_of(const PartitionVector& pv) {
  return {std::exp(pv.logZ[1] - pv.logZ[0]), std::exp(pv.logZ[2] - pv.logZ[0])};
}

// Which v-equation the ratio map uses. `standard` is the form consistent
// with the Z3 recursion (quadratic tail theta1*u^2 + tilde^2*theta1*v^2);
// `alt_v` squares u in both tail terms instead, breaking the u/v swap
// symmetry. alt_v exists only so the difference-identity test can show it
// is wrong; nothing else should use it.
enum class RatioForm { standard, alt_v };

namespace detail {
// Numerator of the ratio-map component whose own ratio is `a`, the other
// component being `b`. Sharing one function makes u=v inputs give exactly
// equal outputs and makes the swap symmetry bit-exact.
inline double ratio_numerator(double a, double b, const ThetaParams& t) {
  const double tt = t.theta_tilde;
  return t.theta1 + 2.0 * tt * a * (1.0 + b) + 2.0 * b +
         tt * tt * t.theta1 * a * a + t.theta1 * b * b;
}

inline double ratio_denominator(double u, double v, const ThetaParams& t) {
  const double tt = t.theta_tilde;
  return tt * tt * t.theta1 + 2.0 * tt * (u + v) +
         t.theta1 * (u * u + v * v) + 2.0 * u * v;
}
}  // namespace detail

inline RatioPoint ratio_step(RatioPoint p, const ThetaParams& t,
                             RatioForm form = RatioForm::standard) {
  if (!(p.u > 0.0) || !(p.v > 0.0))
    throw std::invalid_argument("ratio point must be strictly positive");
  const double d = t.theta3 * detail::ratio_denominator(p.u, p.v, t);
  const double nu = detail::ratio_numerator(p.u, p.v, t);
  double nv;
  if (form == RatioForm::standard) {
    nv = detail::ratio_numerator(p.v, p.u, t);
  } else {
    const double tt = t.theta_tilde;
    nv = t.theta1 + 2.0 * p.u + 2.0 * tt * p.v * (1.0 + p.u) +
         t.theta * p.u * p.u + tt * tt * t.theta1 * p.u * p.u;
  }
  return {nu / d, nv / d};
}

// Closed form of theta3*(u' - v'): the subtracted equation. Holds as an
// algebraic identity for the standard form at every positive (u, v), not
// just at fixed points.
inline double ratio_difference_closed_form(RatioPoint p, const ThetaParams& t) {
  const double tt = t.theta_tilde;
  return (2.0 * (tt - 1.0) * (p.u - p.v) +
          t.theta1 * (tt * tt - 1.0) * (p.u * p.u - p.v * p.v)) /
         detail::ratio_denominator(p.u, p.v, t);
}

struct IterationResult {
  RatioPoint point;
  int iterations = 0;
  double residual = 0.0;  // sup norm of the last step
  bool converged = false;
  bool cycling = false;
};

namespace detail {
inline RatioPoint table_ratio_step(RatioPoint p, const StepTable& table) {
  PartitionVector pv;
  pv.logZ = {0.0, std::log(p.u), std::log(p.v)};
  return ratios_of(step_partition(pv, table));
}
}  // namespace detail

// Plain fixed-point iteration of the ratio map; converged once the sup-norm
// step drops below tol. Keeps the last 8 iterates to flag short cycles
// instead of spinning until max_iter.
inline IterationResult iterate(RatioPoint p0, const ThetaParams& thetas,
                               double tol = 1e-12, int max_iter = 100000,
                               TripleDelta variant = TripleDelta::averaged,
                               RatioForm form = RatioForm::standard) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
  const bool closed_form = variant == TripleDelta::averaged;
  const StepTable table = make_step_table(thetas, variant);

  IterationResult res;
  RatioPoint p = p0;
  std::array<RatioPoint, 8> history;  // ring of the most recent iterates
  int stored = 0;

  for (int it = 1; it <= max_iter; ++it) {
    const RatioPoint next = closed_form ? ratio_step(p, thetas, form)
                                        : detail::table_ratio_step(p, table);
    const double step =
        std::max(std::abs(next.u - p.u), std::abs(next.v - p.v));
    res.point = next;
    res.iterations = it;
    res.residual = step;
    if (step < tol) {
      res.converged = true;
      return res;
    }
    // p itself is not yet stored, so a hit here means a period >= 2 cycle.
    for (int k = std::max(0, stored - 8); k < stored; ++k) {
      const RatioPoint& h = history[k % 8];
      if (std::abs(next.u - h.u) < tol && std::abs(next.v - h.v) < tol) {
        res.cycling = true;
        return res;
      }
    }
    history[stored % 8] = p;
    ++stored;
    p = next;
  }
  return res;
}

// Iterate from the ratios seeded by a uniform boundary condition.
inline IterationResult boundary_seeded_limit(Spin i, const ThetaParams& thetas,
                                             double tol = 1e-12,
                                             int max_iter = 100000,
                                             TripleDelta variant =
                                                 TripleDelta::averaged) {
  detail::check_spin(i);
  const RatioPoint p0 = ratios_of(base_partition(BoundarySpec::uniform(i), thetas));
  return iterate(p0, thetas, tol, max_iter, variant);
}

// 2x2 Jacobian of the standard ratio map, row order (u', v'), column order
// (d/du, d/dv), by closed-form differentiation of the rational components.
struct Jacobian2 {
  double a, b, c, d;  // [[a, b], [c, d]]

  double spectral_radius() const {
    const double tr = a + d;
    const double det = a * d - b * c;
    const double disc = tr * tr - 4.0 * det;
    if (disc >= 0.0) {
      const double s = std::sqrt(disc);
      return std::max(std::abs(tr + s), std::abs(tr - s)) / 2.0;
    }
    return std::sqrt(det);  // complex pair: |lambda|^2 = det > 0
  }
};

inline Jacobian2 ratio_step_jacobian(RatioPoint p, const ThetaParams& t) {
  const double tt = t.theta_tilde;
  const double u = p.u, v = p.v;
  const double D = detail::ratio_denominator(u, v, t);
  const double Nu = detail::ratio_numerator(u, v, t);
  const double Nv = detail::ratio_numerator(v, u, t);
  const double dNu_du = 2.0 * tt * (1.0 + v) + 2.0 * tt * tt * t.theta1 * u;
  const double dNu_dv = 2.0 * tt * u + 2.0 + 2.0 * t.theta1 * v;
  const double dNv_du = 2.0 * tt * v + 2.0 + 2.0 * t.theta1 * u;
  const double dNv_dv = 2.0 * tt * (1.0 + u) + 2.0 * tt * tt * t.theta1 * v;
  const double dD_du = 2.0 * tt + 2.0 * t.theta1 * u + 2.0 * v;
  const double dD_dv = 2.0 * tt + 2.0 * t.theta1 * v + 2.0 * u;
  const double scale = 1.0 / (t.theta3 * D * D);
  return {(dNu_du * D - Nu * dD_du) * scale, (dNu_dv * D - Nu * dD_dv) * scale,
          (dNv_du * D - Nv * dD_du) * scale, (dNv_dv * D - Nv * dD_dv) * scale};
}

}  // namespace cpotts
