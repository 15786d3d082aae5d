#pragma once

// Phase-diagram machinery: classification of a parameter point by its
// fixed-point census, the multi-solution region bounds, deterministic grid
// scans, seeded regime search, and critical-beta bracketing.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cpotts/fixed_points.hpp"
#include "cpotts/model.hpp"

namespace cpotts {

enum class PhaseClass { unique, symmetric_multi, five_solution, other };

inline const char* to_string(PhaseClass c) {
  switch (c) {
    case PhaseClass::unique: return "unique";
    case PhaseClass::symmetric_multi: return "symmetric-multi";
    case PhaseClass::five_solution: return "five-solution";
    default: return "other";
  }
}

struct PhasePoint {
  ThetaParams thetas;
  int total = 0;
  int stable = 0;
  int symmetric = 0;
  PhaseClass cls = PhaseClass::unique;
  std::vector<FixedPoint> points;
};

inline PhasePoint classify(const ThetaParams& t) {
  PhasePoint out;
  out.thetas = t;
  out.points = all_fixed_points(t);
  out.total = static_cast<int>(out.points.size());
  for (const auto& fp : out.points) {
    if (fp.stability == Stability::stable) ++out.stable;
    if (fp.branch == Branch::symmetric) ++out.symmetric;
  }
  if (out.total == 1)
    out.cls = PhaseClass::unique;
  else if (out.total == 3 && out.symmetric == 3)
    out.cls = PhaseClass::symmetric_multi;
  else if (out.total == 5)
    out.cls = PhaseClass::five_solution;
  else
    out.cls = PhaseClass::other;
  return out;
}

// Multi-solution region bounds. Every component can be individually out of
// regime; missing pieces leave their field unset and add a note.
struct RegionBounds {
  double theta1_star = 0.0;  // always defined
  std::optional<double> theta1_star_star;
  std::optional<double> eta1, eta2;
  std::optional<double> single_root_threshold;  // lower theta3 edge, asymmetric
  std::optional<double> k0_bound;               // theta1*(tilde+1)/k0
  std::optional<double> A_bound, B_bound, C_bound;
  std::vector<std::string> notes;
};

inline RegionBounds region_bounds(const ThetaParams& t) {
  RegionBounds rb;
  rb.theta1_star = theta1_star(t);
  try {
    rb.theta1_star_star = theta1_star_star(t);
  } catch (const std::domain_error& e) {
    rb.notes.emplace_back(e.what());
  }
  try {
    const auto [e1, e2] = eta_thresholds(t);
    rb.eta1 = e1;
    rb.eta2 = e2;
  } catch (const std::domain_error& e) {
    rb.notes.emplace_back(e.what());
  }
  try {
    const double T = t.theta_tilde, t1 = t.theta1;
    detail::require_theta1_not_one(t);
    const double d2 = detail::division_denominator(t);
    const double a0 =
        t1 * (t1 * (T * T * T + T * T + 2.0 * T + 2.0) - 2.0 * (T * T + T + 1.0));
    if (a0 > 0.0)
      rb.single_root_threshold = 2.0 * d2 / a0;
    else
      rb.notes.emplace_back("single-root threshold undefined (a0 <= 0)");
  } catch (const std::domain_error& e) {
    rb.notes.emplace_back(e.what());
  }
  try {
    rb.k0_bound = t.theta1 * (t.theta_tilde + 1.0) / k0_slope(t);
  } catch (const std::domain_error& e) {
    rb.notes.emplace_back(e.what());
  }

  if (rb.theta1_star_star)
    rb.A_bound = std::max(rb.theta1_star, *rb.theta1_star_star);
  if (rb.eta1 && rb.single_root_threshold)
    rb.B_bound = std::max(*rb.eta1, *rb.single_root_threshold);
  if (rb.eta2 && rb.k0_bound) rb.C_bound = std::min(*rb.eta2, *rb.k0_bound);
  return rb;
}

// ---------------------------------------------------------------------------
// Grid scans

struct GridAxis {
  std::string name;  // theta|theta1|theta2|theta3 or J|J1|J2|h|beta
  double lo = 1.0;
  double hi = 1.0;
  int steps = 1;
};

struct ScanSpec {
  bool theta_space = true;
  // fixed base values; axes override per node
  double theta = 1.0, theta1 = 1.0, theta2 = 1.0, theta3 = 1.0;
  ModelParams base_j;
  std::vector<GridAxis> axes;
};

namespace detail {

inline double axis_value(const GridAxis& ax, int k) {
  if (ax.steps == 1) return ax.lo;
  return ax.lo + (ax.hi - ax.lo) * static_cast<double>(k) /
                     static_cast<double>(ax.steps - 1);
}

inline ThetaParams scan_node(const ScanSpec& spec, long long index) {
  std::vector<int> digits(spec.axes.size(), 0);
  long long rem = index;
  for (int a = static_cast<int>(spec.axes.size()) - 1; a >= 0; --a) {
    digits[a] = static_cast<int>(rem % spec.axes[a].steps);
    rem /= spec.axes[a].steps;
  }
  if (spec.theta_space) {
    double v[4] = {spec.theta, spec.theta1, spec.theta2, spec.theta3};
    for (size_t a = 0; a < spec.axes.size(); ++a) {
      const std::string& n = spec.axes[a].name;
      const double x = axis_value(spec.axes[a], digits[a]);
      if (n == "theta") v[0] = x;
      else if (n == "theta1") v[1] = x;
      else if (n == "theta2") v[2] = x;
      else if (n == "theta3") v[3] = x;
      else throw std::invalid_argument("unknown theta-space axis: " + n);
    }
    return make_thetas(v[0], v[1], v[2], v[3]);
  }
  ModelParams p = spec.base_j;
  for (size_t a = 0; a < spec.axes.size(); ++a) {
    const std::string& n = spec.axes[a].name;
    const double x = axis_value(spec.axes[a], digits[a]);
    if (n == "J") p.J = x;
    else if (n == "J1") p.J1 = x;
    else if (n == "J2") p.J2 = x;
    else if (n == "h") p.h = x;
    else if (n == "beta") p.beta = x;
    else throw std::invalid_argument("unknown coupling-space axis: " + n);
  }
  return thetas_from(p);
}

}  // namespace detail

inline long long scan_size(const ScanSpec& spec) {
  long long n = 1;
  for (const auto& ax : spec.axes) {
    if (ax.steps < 1) throw std::invalid_argument("axis steps must be >= 1");
    n *= ax.steps;
  }
  return n;
}

// Classify every grid node. Output is row-major in axis order (last axis
// fastest) no matter how many workers run.
inline std::vector<PhasePoint> run_scan(
    const ScanSpec& spec, int jobs = 0,
    const std::function<void(long long, long long)>& progress = {}) {
  const long long n = scan_size(spec);
  if (jobs <= 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  std::vector<PhasePoint> out(n);

  if (jobs == 1) {
    for (long long i = 0; i < n; ++i) {
      out[i] = classify(detail::scan_node(spec, i));
      if (progress) progress(i + 1, n);
    }
    return out;
  }

  std::atomic<long long> next{0};
  std::atomic<long long> done{0};
  auto worker = [&] {
    for (long long i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      out[i] = classify(detail::scan_node(spec, i));
      const long long d = done.fetch_add(1) + 1;
      if (progress) progress(d, n);
    }
  };
  std::vector<std::thread> pool;
  const int nthreads = static_cast<int>(std::min<long long>(jobs, n));
  pool.reserve(nthreads);
  for (int k = 0; k < nthreads; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return out;
}

// ---------------------------------------------------------------------------
// Seeded regime search

struct FindRegimeOptions {
  int budget = 500;                 // maximum classify calls
  double theta_tilde_max = 1e300;   // restrict the seed grid (diagnostics)
};

// Deterministic seeded search: walk a fixed coarse grid of (theta2, tilde,
// theta1), seed theta3 candidates from the computed window bounds, and
// re-verify every hit with classify. Not finding anything within budget is
// a normal outcome.
inline std::optional<PhasePoint> find_regime(PhaseClass target,
                                             FindRegimeOptions opt = {}) {
  int budget = std::max(1, opt.budget);
  auto try_point = [&](const ThetaParams& t) -> std::optional<PhasePoint> {
    if (budget <= 0) return std::nullopt;
    --budget;
    PhasePoint pp = classify(t);
    if (pp.cls == target) return pp;
    return std::nullopt;
  };

  if (target == PhaseClass::unique) {
    if (1.0 <= opt.theta_tilde_max)
      if (auto hit = try_point(make_thetas(1.0, 1.0, 1.0, 1.0))) return hit;
    if (0.5 <= opt.theta_tilde_max)
      if (auto hit = try_point(make_thetas(0.5, 2.0, 1.0, 1.5))) return hit;
    return std::nullopt;
  }

  static const double kTheta2Seeds[] = {4.0, 1.0};
  static const double kTildeSeeds[] = {3.0, 2.0, 2.5, 3.5, 2.2, 4.0, 1.65, 0.8};
  static const double kTheta1Seeds[] = {4.0,  35.0, 40.0,  6.0,  8.0,  12.0,
                                        20.0, 60.0, 100.0, 3.0,  2.0,  200.0};
  static const double kWindowFracs[] = {0.15, 0.05, 0.3, 0.5, 0.75, 0.9};

  for (double t2 : kTheta2Seeds) {
    for (double tilde : kTildeSeeds) {
      if (tilde > opt.theta_tilde_max) continue;
      const double theta = tilde / std::sqrt(t2);
      for (double t1 : kTheta1Seeds) {
        double e1 = 0.0, e2 = 0.0;
        try {
          std::tie(e1, e2) = eta_thresholds(make_thetas(theta, t1, t2, 1.0));
        } catch (const std::domain_error&) {
          continue;  // no symmetric window here; move on
        }
        double lower = e1;
        try {
          const RegionBounds rb = region_bounds(make_thetas(theta, t1, t2, e1));
          if (rb.single_root_threshold)
            lower = std::max(lower, *rb.single_root_threshold);
        } catch (const std::exception&) {
        }
        for (double frac : kWindowFracs) {
          const double t3 = lower * std::pow(e2 / lower, frac);
          if (auto hit = try_point(make_thetas(theta, t1, t2, t3))) return hit;
          if (budget <= 0) return std::nullopt;
        }
        if (target == PhaseClass::other) {
          // just outside the window on both sides
          for (double t3 : {e1 * 0.98, e2 * 1.02}) {
            if (auto hit = try_point(make_thetas(theta, t1, t2, t3)))
              return hit;
            if (budget <= 0) return std::nullopt;
          }
        }
      }
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Critical inverse temperature

struct CriticalBracket {
  double beta_low = 0.0;
  double beta_high = 0.0;
  int count_low = 0;
  int count_high = 0;
  int bisections = 0;
};

struct NoTransitionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bisect on beta between two endpoints whose fixed-point counts differ,
// using the total solution count as the indicator. The couplings in
// `params` are held fixed; params.beta is ignored.
inline CriticalBracket critical_beta_bracket(const ModelParams& params,
                                             double beta_lo, double beta_hi,
                                             double width,
                                             int max_bisections = 60) {
  if (!(beta_lo > 0.0) || !(beta_hi > beta_lo))
    throw std::invalid_argument("need 0 < beta_lo < beta_hi");
  if (!(width > 0.0)) throw std::invalid_argument("bracket width must be > 0");

  auto count_at = [&](double beta) {
    ModelParams p = params;
    p.beta = beta;
    return classify(thetas_from(p)).total;
  };

  CriticalBracket br;
  br.beta_low = beta_lo;
  br.beta_high = beta_hi;
  br.count_low = count_at(beta_lo);
  br.count_high = count_at(beta_hi);
  if (br.count_low == br.count_high)
    throw NoTransitionError(
        "solution count is " + std::to_string(br.count_low) +
        " at both ends of the beta range; no transition to bracket");

  while (br.beta_high - br.beta_low > width &&
         br.bisections < max_bisections) {
    const double mid = 0.5 * (br.beta_low + br.beta_high);
    const int cm = count_at(mid);
    ++br.bisections;
    if (cm == br.count_low) {
      br.beta_low = mid;
    } else {
      br.beta_high = mid;
      br.count_high = cm;
    }
  }
  return br;
}

}  // namespace cpotts
