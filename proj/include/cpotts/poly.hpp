#pragma once

// Small dense-polynomial toolkit: evaluation, derivatives, arithmetic,
// Sturm chains, and positive-root isolation by count-guided bisection with
// a guarded Newton polish. No radical formulas; bracketing only, so double
// roots degrade gracefully instead of exploding.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace cpotts::poly {

using Coeffs = std::vector<double>;  // ascending: c[0] + c[1] x + ...

inline double eval(const Coeffs& p, double x) {
  double acc = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + *it;
  return acc;
}

inline Coeffs derivative(const Coeffs& p) {
  if (p.size() <= 1) return {0.0};
  Coeffs d(p.size() - 1);
  for (size_t k = 1; k < p.size(); ++k) d[k - 1] = p[k] * static_cast<double>(k);
  return d;
}

inline Coeffs add(const Coeffs& a, const Coeffs& b) {
  Coeffs out(std::max(a.size(), b.size()), 0.0);
  for (size_t k = 0; k < a.size(); ++k) out[k] += a[k];
  for (size_t k = 0; k < b.size(); ++k) out[k] += b[k];
  return out;
}

inline Coeffs scale(Coeffs a, double s) {
  for (double& c : a) c *= s;
  return a;
}

inline Coeffs sub(const Coeffs& a, const Coeffs& b) { return add(a, scale(b, -1.0)); }

inline Coeffs mul(const Coeffs& a, const Coeffs& b) {
  Coeffs out(a.size() + b.size() - 1, 0.0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

inline double max_abs(const Coeffs& p) {
  double m = 0.0;
  for (double c : p) m = std::max(m, std::abs(c));
  return m;
}

// Drop leading coefficients that are negligible relative to the largest one.
inline Coeffs trimmed(Coeffs p, double rel_eps = 1e-14) {
  const double m = max_abs(p);
  while (p.size() > 1 && std::abs(p.back()) <= rel_eps * m) p.pop_back();
  return p;
}

inline int degree(const Coeffs& p) { return static_cast<int>(p.size()) - 1; }

// Remainder of a / b; scaling to unit max coefficient is the caller's job.
// Requires deg(b) >= 1.
inline Coeffs remainder(Coeffs a, const Coeffs& b) {
  const int db = degree(b);
  a = trimmed(std::move(a));
  while (degree(a) >= db && max_abs(a) > 0.0) {
    const int da = degree(a);
    const double q = a.back() / b.back();
    for (int k = 0; k < db; ++k) a[da - db + k] -= q * b[k];
    a.pop_back();  // leading term cancels exactly
    a = trimmed(std::move(a));
  }
  return a;
}

// Sturm chain with each element normalized to unit max coefficient (positive
// rescaling preserves the sign structure). The chain stops early when the
// remainder vanishes to tolerance, which is exactly the repeated-root case.
inline std::vector<Coeffs> sturm_chain(Coeffs p, double zero_rel = 1e-12) {
  std::vector<Coeffs> chain;
  p = trimmed(std::move(p));
  double m = max_abs(p);
  if (m == 0.0) return chain;
  chain.push_back(scale(p, 1.0 / m));
  if (degree(chain[0]) == 0) return chain;
  Coeffs d = derivative(chain[0]);
  m = max_abs(d);
  if (m == 0.0) return chain;
  chain.push_back(scale(std::move(d), 1.0 / m));
  while (degree(chain.back()) > 0) {
    Coeffs r = remainder(chain[chain.size() - 2], chain.back());
    const double rm = max_abs(r);
    if (rm <= zero_rel) break;
    chain.push_back(scale(std::move(r), -1.0 / rm));
  }
  return chain;
}

namespace detail {
inline int sgn(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }
}

inline int sign_variations_at(const std::vector<Coeffs>& chain, double x) {
  int var = 0, prev = 0;
  for (const auto& q : chain) {
    const int s = detail::sgn(eval(q, x));
    if (s != 0) {
      if (prev != 0 && s != prev) ++var;
      prev = s;
    }
  }
  return var;
}

inline int sign_variations_pos_inf(const std::vector<Coeffs>& chain) {
  int var = 0, prev = 0;
  for (const auto& q : chain) {
    const int s = detail::sgn(q.back());
    if (s != 0) {
      if (prev != 0 && s != prev) ++var;
      prev = s;
    }
  }
  return var;
}

// Number of distinct real roots in (lo, hi].
inline int count_roots(const std::vector<Coeffs>& chain, double lo, double hi) {
  if (chain.empty()) return 0;
  return sign_variations_at(chain, lo) - sign_variations_at(chain, hi);
}

inline double cauchy_bound(const Coeffs& p) {
  double m = 0.0;
  for (size_t k = 0; k + 1 < p.size(); ++k)
    m = std::max(m, std::abs(p[k]));
  return 1.0 + m / std::abs(p.back());
}

inline int count_positive_roots(const Coeffs& p) {
  const auto chain = sturm_chain(p);
  if (chain.empty() || degree(chain[0]) == 0) return 0;
  return sign_variations_at(chain, 0.0) - sign_variations_pos_inf(chain);
}

namespace detail {

// Refine a bracket known (by Sturm count) to hold exactly one distinct root.
// Sign bisection when the endpoint signs differ; count bisection otherwise
// (even multiplicity). Two guarded Newton steps at the end.
inline double refine_single_root(const Coeffs& p, const std::vector<Coeffs>& chain,
                                 double lo, double hi) {
  const double width_goal = 1e-13 * std::max(1.0, std::abs(hi));
  const bool sign_change = sgn(eval(p, lo)) * sgn(eval(p, hi)) < 0;
  for (int it = 0; it < 200 && hi - lo > width_goal; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (sign_change) {
      if (sgn(eval(p, lo)) * sgn(eval(p, mid)) <= 0)
        hi = mid;
      else
        lo = mid;
    } else {
      if (count_roots(chain, lo, mid) >= 1)
        hi = mid;
      else
        lo = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  const Coeffs dp = derivative(p);
  for (int k = 0; k < 2; ++k) {
    const double fx = eval(p, x);
    const double dfx = eval(dp, x);
    if (dfx == 0.0) break;
    const double xn = x - fx / dfx;
    if (xn >= lo && xn <= hi && std::abs(eval(p, xn)) <= std::abs(fx)) x = xn;
  }
  return x;
}

}  // namespace detail

// All distinct positive real roots, ascending. Clustered roots closer than
// merge_rtol (relative) collapse to one entry.
inline std::vector<double> positive_roots(const Coeffs& p_in,
                                          double merge_rtol = 1e-8) {
  const Coeffs p = trimmed(p_in);
  std::vector<double> roots;
  if (degree(p) < 1) return roots;
  const auto chain = sturm_chain(p);
  double hi = cauchy_bound(p);
  const double lo0 = 0.0;
  int total = count_roots(chain, lo0, hi);
  if (total <= 0) return roots;

  struct Interval {
    double lo, hi;
    int count;
  };
  std::vector<Interval> stack{{lo0, hi, total}};
  while (!stack.empty()) {
    const Interval iv = stack.back();
    stack.pop_back();
    if (iv.count == 0) continue;
    const double width = iv.hi - iv.lo;
    if (iv.count == 1) {
      roots.push_back(detail::refine_single_root(p, chain, iv.lo, iv.hi));
      continue;
    }
    if (width <= merge_rtol * std::max(1.0, std::abs(iv.hi))) {
      roots.push_back(0.5 * (iv.lo + iv.hi));  // unresolved cluster
      continue;
    }
    const double mid = 0.5 * (iv.lo + iv.hi);
    const int left = count_roots(chain, iv.lo, mid);
    stack.push_back({mid, iv.hi, iv.count - left});
    stack.push_back({iv.lo, mid, left});
  }
  std::sort(roots.begin(), roots.end());
  // merge near-duplicates that slipped through separate intervals
  std::vector<double> merged;
  for (double r : roots) {
    if (!merged.empty() &&
        std::abs(r - merged.back()) <= merge_rtol * std::max(1.0, std::abs(r)))
      continue;
    merged.push_back(r);
  }
  return merged;
}

}  // namespace cpotts::poly
