// Acceptance suite: one check per shipped guarantee, each printed as a
// single PASS/FAIL line. Run with a criterion number (1-9) or "all".
// "--long" additionally runs the depth-3 enumeration cross-check.
//
// Checks 3 and 4 pin solution-count conditions that the actual geometry
// does not satisfy: a negative C coefficient is necessary but not
// sufficient for the tangency quartic to have positive roots, so the
// three-solution window can be empty where those checks expect it. They
// are kept as stated and report the failure precisely rather than being
// weakened to pass.

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpotts/enumeration.hpp"
#include "cpotts/fixed_points.hpp"
#include "cpotts/phase.hpp"
#include "cpotts/recursion.hpp"
#include "oracles.hpp"

using namespace cpotts;
using nlohmann::json;

namespace {

bool g_long = false;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

json load_fixture() {
  std::ifstream in(std::string(CPOTTS_SOURCE_DIR) +
                   "/tests/fixtures/five_solution.json");
  if (!in.good()) throw std::runtime_error("fixture file missing");
  return json::parse(in);
}

ThetaParams fixture_thetas(const json& fix) {
  const auto& t = fix["thetas"];
  return make_thetas(t["theta"].get<double>(), t["theta1"].get<double>(),
                     t["theta2"].get<double>(), t["theta3"].get<double>());
}

double unif(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

// 1. Recursion from the free base equals exact enumeration, both delta
//    variants, 20 seeded draws, 1e-10 relative log-space deviation.
Outcome criterion1() {
  const double t0 = now_s();
  std::mt19937_64 rng(0xC0FFEE);
  double max_dev = 0.0;
  for (int k = 0; k < 20; ++k) {
    const ModelParams p{unif(rng, -2, 2), unif(rng, -2, 2), unif(rng, -2, 2),
                        unif(rng, -2, 2), unif(rng, 1e-3, 2)};
    const ThetaParams t = thetas_from(p);
    for (TripleDelta v : {TripleDelta::averaged, TripleDelta::strict}) {
      PartitionVector pv = base_partition(BoundarySpec::free_boundary(), t);
      for (int n = 1; n <= 2; ++n) {
        pv = step_partition(pv, t, v);
        const PartitionVector exact =
            exact_partition_vector(n, p, BoundarySpec::free_boundary(), v, 1);
        for (int i = 0; i < 3; ++i)
          max_dev = std::max(max_dev,
                             std::abs(pv.logZ[i] - exact.logZ[i]) /
                                 std::max(1.0, std::abs(exact.logZ[i])));
      }
    }
  }
  double dev3 = 0.0;
  if (g_long) {
    const ModelParams p{1.0, 0.5, -0.3, 0.2, 0.7};
    const ThetaParams t = thetas_from(p);
    for (TripleDelta v : {TripleDelta::averaged, TripleDelta::strict}) {
      PartitionVector pv = base_partition(BoundarySpec::free_boundary(), t);
      for (int n = 1; n <= 3; ++n) pv = step_partition(pv, t, v);
      const PartitionVector exact =
          exact_partition_vector(3, p, BoundarySpec::free_boundary(), v);
      for (int i = 0; i < 3; ++i)
        dev3 = std::max(dev3, std::abs(pv.logZ[i] - exact.logZ[i]) /
                                  std::max(1.0, std::abs(exact.logZ[i])));
    }
  }
  const double elapsed = now_s() - t0;
  std::ostringstream d;
  d << "max rel log dev " << max_dev << " (bound 1e-10)";
  if (g_long) d << ", depth-3 draw dev " << dev3;
  d << ", " << elapsed << " s";
  return {max_dev < 1e-10 && (!g_long || dev3 < 1e-10) && elapsed < 65.0,
          d.str()};
}

// 2. Corrected-equation identities: difference identity at 1e-12, both t(s)
//    forms at asymmetric fixed points at 1e-9, and the theta2 substitution
//    visibly failing when theta2 != theta3.
Outcome criterion2() {
  std::mt19937_64 rng(0xFACADE);
  double id_dev = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const ThetaParams t =
        make_thetas(unif(rng, 0.2, 3), unif(rng, 0.2, 3), unif(rng, 0.2, 3),
                    unif(rng, 0.2, 3));
    const RatioPoint p{unif(rng, 0.01, 10), unif(rng, 0.01, 10)};
    const RatioPoint n = ratio_step(p, t);
    const double lhs = t.theta3 * (n.u - n.v);
    const double rhs = ratio_difference_closed_form(p, t);
    id_dev = std::max(id_dev,
                      std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
  }
  const bool a = id_dev < 1e-12;

  const json fix = load_fixture();
  double st_dev = 0.0, theta2_dev = 0.0;
  int asym_count = 0;
  for (double t3_scale : {1.0, 0.98, 1.02}) {
    const ThetaParams base = fixture_thetas(fix);
    const ThetaParams t = make_thetas(base.theta, base.theta1, base.theta2,
                                      base.theta3 * t3_scale);
    for (const auto& fp : all_fixed_points(t)) {
      if (fp.branch != Branch::asymmetric) continue;
      ++asym_count;
      const double s = fp.point.u + fp.point.v;
      const double uv = fp.point.u * fp.point.v;
      const double scale = std::max(1.0, uv);
      st_dev = std::max(st_dev, std::abs(t_from_s_ratio(s, t) - uv) / scale);
      st_dev =
          std::max(st_dev, std::abs(t_from_s_division(s, t) - uv) / scale);
      theta2_dev = std::max(
          theta2_dev, std::abs(t_from_s_theta2_form(s, t) - uv) / scale);
    }
  }
  const bool b = asym_count >= 2 && st_dev < 1e-9;
  const bool c = theta2_dev > 1e-3;  // the printed substitution must fail

  std::ostringstream d;
  d << "identity dev " << id_dev << " (1e-12), s-t dev " << st_dev
    << " (1e-9) over " << asym_count
    << " asymmetric points, theta2-form dev " << theta2_dev
    << " (counterexample needs > 1e-3)";
  return {a && b && c, d.str()};
}

// 3. Three-solution window at tilde = 2, theta1 = 2 * theta1*(tilde):
//    nonempty (eta1, eta2), 1 -> 3 -> 1 sweep with transitions at the etas,
//    counts matching the dense sign-scan oracle everywhere.
Outcome criterion3() {
  const double t0 = now_s();
  const ThetaParams probe = make_thetas(2.0, 1.0, 1.0, 1.0);
  const double t1s = theta1_star(probe);
  const double theta1 = 2.0 * t1s;
  const ThetaParams base = make_thetas(2.0, theta1, 1.0, 1.0);

  bool window_ok = false;
  double eta1 = 0.0, eta2 = 0.0;
  std::string window_note;
  try {
    std::tie(eta1, eta2) = eta_thresholds(base);
    window_ok = eta1 < eta2;
  } catch (const std::domain_error& e) {
    window_note = e.what();
  }

  // sweep theta3 over the window when it exists, a wide bracket otherwise
  const double lo = window_ok ? eta1 * 0.99 : 0.3;
  const double hi = window_ok ? eta2 * 1.01 : 3.0;
  int scan_mismatch = 0;
  bool saw3 = false;
  std::vector<int> counts(1000);
  for (int k = 0; k < 1000; ++k) {
    const double t3 = lo * std::pow(hi / lo, k / 999.0);
    const ThetaParams t = make_thetas(2.0, theta1, 1.0, t3);
    counts[k] = symmetric_solution_count(t);
    if (counts[k] == 3) saw3 = true;
    if (counts[k] != test_oracles::sign_scan_count(t.theta_tilde, t.theta1, t3))
      ++scan_mismatch;
  }
  bool pattern_ok = saw3 && counts.front() == 1 && counts.back() == 1;
  bool transitions_ok = false;
  if (window_ok && pattern_ok) {
    // bisect the 1->3 and 3->1 transitions and compare with the etas
    auto count_at = [&](double t3) {
      return symmetric_solution_count(make_thetas(2.0, theta1, 1.0, t3));
    };
    double a = lo, b = eta1 * 1.0005;
    for (int it = 0; it < 60; ++it) {
      const double m = 0.5 * (a + b);
      (count_at(m) == 1 ? a : b) = m;
    }
    const double up = 0.5 * (a + b);
    double c = eta2 * 0.9995, e = hi;
    for (int it = 0; it < 60; ++it) {
      const double m = 0.5 * (c + e);
      (count_at(m) == 3 ? c : e) = m;
    }
    const double down = 0.5 * (c + e);
    transitions_ok = std::abs(up - eta1) < 1e-6 && std::abs(down - eta2) < 1e-6;
  }
  const double elapsed = now_s() - t0;
  std::ostringstream d;
  d << "theta1 = 2*theta1* = " << theta1 << "; ";
  if (window_ok)
    d << "window (" << eta1 << ", " << eta2 << ")";
  else
    d << "window EMPTY [" << window_note << "]";
  d << "; sweep counts " << (pattern_ok ? "show" : "NEVER show")
    << " 1->3->1; sign-scan mismatches " << scan_mismatch << "/1000; "
    << elapsed << " s";
  return {window_ok && pattern_ok && transitions_ok && scan_mismatch == 0 &&
              elapsed < 30.0,
          d.str()};
}

// 4. Quartic sign law on a 50x50 grid: root count must match the Sturm
//    oracle everywhere, be empty exactly when C > 0 and exactly 2 when
//    C < 0; sign(C) flips at theta1**(tilde) within 1e-9.
Outcome criterion4() {
  const double t0 = now_s();
  int sturm_mismatch = 0, cpos_violation = 0, cneg_violation = 0, cneg = 0;
  for (int i = 0; i < 50; ++i) {
    const double tilde = 1.1 + (5.0 - 1.1) * i / 49.0;
    for (int j = 0; j < 50; ++j) {
      const double theta1 = 1.1 + (10.0 - 1.1) * j / 49.0;
      const ThetaParams t = make_thetas(tilde, theta1, 1.0, 1.0);
      const QuarticCoefficients q = quartic_coefficients(t);
      const int n = static_cast<int>(tangency_roots(t).size());
      if (n != test_oracles::sturm_positive_count({q.E, q.D, q.C, q.B, q.A}))
        ++sturm_mismatch;
      if (q.C > 0.0 && n != 0) ++cpos_violation;
      if (q.C < 0.0) {
        ++cneg;
        if (n != 2) ++cneg_violation;
      }
    }
  }
  double flip_err = 0.0;
  for (double tilde : {1.6, 2.0, 3.0, 4.0, 5.0}) {
    const double ts = theta1_star_star(make_thetas(tilde, 1, 1, 1));
    double lo = 1e-3, hi = 1e3;
    for (int it = 0; it < 100; ++it) {
      const double mid = std::sqrt(lo * hi);
      const double C = quartic_coefficients(make_thetas(tilde, mid, 1, 1)).C;
      (C > 0.0 ? lo : hi) = mid;
    }
    flip_err = std::max(flip_err, std::abs(0.5 * (lo + hi) - ts));
  }
  const double elapsed = now_s() - t0;
  std::ostringstream d;
  d << "Sturm mismatches " << sturm_mismatch << "/2500; C>0 violations "
    << cpos_violation << "; C<0 nodes with root count != 2: " << cneg_violation
    << "/" << cneg << "; theta1** flip error " << flip_err << " (1e-9); "
    << elapsed << " s";
  return {sturm_mismatch == 0 && cpos_violation == 0 && cneg_violation == 0 &&
              flip_err < 1e-9 && elapsed < 30.0,
          d.str()};
}

// 5. Five-solution regime: the search succeeds, the census has exactly five
//    points below 1e-9 residual with exactly three stable, and the
//    multi-start Newton path finds the identical set.
Outcome criterion5() {
  const double t0 = now_s();
  const auto hit = find_regime(PhaseClass::five_solution);
  if (!hit) return {false, "find_regime returned not-found"};

  const json fix = load_fixture();
  const ThetaParams t = fixture_thetas(fix);
  const auto fps = all_fixed_points(t);
  int stable = 0;
  double max_res = 0.0;
  for (const auto& fp : fps) {
    max_res = std::max(max_res, fp.residual);
    if (fp.stability == Stability::stable) ++stable;
  }
  const auto newton = newton_fixed_points(t);
  bool newton_match = fps.size() == newton.size();
  if (newton_match) {
    std::vector<bool> used(newton.size(), false);
    for (const auto& fp : fps) {
      bool m = false;
      for (size_t j = 0; j < newton.size(); ++j) {
        if (used[j]) continue;
        if (std::abs(fp.point.u - newton[j].u) <=
                1e-8 * std::max(1.0, newton[j].u) &&
            std::abs(fp.point.v - newton[j].v) <=
                1e-8 * std::max(1.0, newton[j].v)) {
          used[j] = m = true;
          break;
        }
      }
      newton_match = newton_match && m;
    }
  }
  const double elapsed = now_s() - t0;
  std::ostringstream d;
  d << "search found theta3 = " << hit->thetas.theta3 << "; census "
    << fps.size() << " points (need 5), max residual " << max_res
    << " (1e-9), " << stable << " stable (need 3), newton census "
    << (newton_match ? "identical" : "DIFFERS") << "; " << elapsed << " s";
  return {hit->total == 5 && fps.size() == 5 && max_res < 1e-9 &&
              stable == 3 && newton_match && elapsed < 60.0,
          d.str()};
}

// 6. The three uniform boundary conditions converge to the three distinct
//    stable fixed points of the fixture.
Outcome criterion6() {
  const json fix = load_fixture();
  const ThetaParams t = fixture_thetas(fix);
  const auto fps = all_fixed_points(t);
  std::vector<RatioPoint> limits;
  for (Spin i = 1; i <= 3; ++i) {
    const IterationResult r = boundary_seeded_limit(i, t);
    if (!r.converged)
      return {false,
              "boundary " + std::to_string(i) + " iteration did not converge"};
    limits.push_back(r.point);
  }
  bool distinct = true;
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      if (std::abs(limits[a].u - limits[b].u) < 1e-4 &&
          std::abs(limits[a].v - limits[b].v) < 1e-4)
        distinct = false;
  int matched = 0;
  for (const auto& p : limits)
    for (const auto& fp : fps)
      if (fp.stability == Stability::stable &&
          std::abs(fp.point.u - p.u) <= 1e-8 * std::max(1.0, fp.point.u) &&
          std::abs(fp.point.v - p.v) <= 1e-8 * std::max(1.0, fp.point.v))
        ++matched;
  std::ostringstream d;
  d << "limits (" << limits[0].u << "," << limits[0].v << ") ("
    << limits[1].u << "," << limits[1].v << ") (" << limits[2].u << ","
    << limits[2].v << "), " << (distinct ? "distinct" : "NOT distinct")
    << ", " << matched << "/3 matched to stable census members";
  return {distinct && matched == 3, d.str()};
}

// 7. Monotonicity and inflection: f' keeps one sign across u in
//    [1e-6, 1e6]; the existence of an inflection flips at theta1*(tilde)
//    within 1e-8.
Outcome criterion7() {
  auto monotone = [](double tilde, int expected_sign) {
    const ThetaParams t = make_thetas(tilde, 2.0, 1.0, 1.0);
    for (int k = 0; k <= 1000; ++k) {
      const double u = 1e-6 * std::pow(1e12, k / 1000.0);
      const double d1 = f_symmetric_d1(u, t);
      if (expected_sign * d1 <= 0.0) return false;
    }
    return true;
  };
  bool mono_ok = true;
  for (double tilde : {1.5, 2.0, 5.0}) mono_ok = mono_ok && monotone(tilde, 1);
  for (double tilde : {0.3, 0.8}) mono_ok = mono_ok && monotone(tilde, -1);

  // scan-based inflection detector, independent of the closed form
  auto has_inflection = [](double tilde, double theta1) {
    const ThetaParams t = make_thetas(tilde, theta1, 1.0, 1.0);
    int prev = 0;
    for (int k = 0; k <= 4000; ++k) {
      const double u = 1e-12 * std::pow(1e20, k / 4000.0);
      const double s = f_symmetric_d2(u, t) > 0 ? 1 : -1;
      if (prev != 0 && s != prev) return true;
      prev = s;
    }
    return false;
  };
  double flip_err = 0.0;
  for (double tilde : {1.5, 2.0, 5.0}) {
    const double ts = theta1_star(make_thetas(tilde, 1, 1, 1));
    double lo = ts * 0.5, hi = ts * 1.5;
    for (int it = 0; it < 64; ++it) {
      const double mid = 0.5 * (lo + hi);
      (has_inflection(tilde, mid) ? hi : lo) = mid;
    }
    flip_err = std::max(flip_err, std::abs(0.5 * (lo + hi) - ts));
  }
  std::ostringstream d;
  d << "derivative sign scans " << (mono_ok ? "clean" : "VIOLATED")
    << "; inflection flip error " << flip_err << " (bound 1e-8)";
  return {mono_ok && flip_err < 1e-8, d.str()};
}

// 8. Stability machinery: closed-form Jacobian vs central differences at
//    relative 1e-6 on 1000 random points; zero spectral radius at the
//    flat point.
Outcome criterion8() {
  std::mt19937_64 rng(0xABCDEF);
  double max_rel = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const ThetaParams t =
        make_thetas(unif(rng, 0.5, 3), unif(rng, 0.5, 3), unif(rng, 0.5, 3),
                    unif(rng, 0.5, 3));
    const RatioPoint p{unif(rng, 0.1, 10), unif(rng, 0.1, 10)};
    const Jacobian2 j = ratio_step_jacobian(p, t);
    const double eps = 1e-6;
    const RatioPoint up = ratio_step({p.u + eps, p.v}, t);
    const RatioPoint um = ratio_step({p.u - eps, p.v}, t);
    const RatioPoint vp = ratio_step({p.u, p.v + eps}, t);
    const RatioPoint vm = ratio_step({p.u, p.v - eps}, t);
    const double norm = std::max({1.0, std::abs(j.a), std::abs(j.b),
                                  std::abs(j.c), std::abs(j.d)});
    max_rel = std::max(
        {max_rel, std::abs((up.u - um.u) / (2 * eps) - j.a) / norm,
         std::abs((vp.u - vm.u) / (2 * eps) - j.b) / norm,
         std::abs((up.v - um.v) / (2 * eps) - j.c) / norm,
         std::abs((vp.v - vm.v) / (2 * eps) - j.d) / norm});
  }
  const double rho0 =
      ratio_step_jacobian({1, 1}, make_thetas(1, 1, 1, 1)).spectral_radius();
  std::ostringstream d;
  d << "max FD deviation " << max_rel << " (1e-6); flat-point spectral radius "
    << rho0 << " (1e-12)";
  return {max_rel < 1e-6 && rho0 < 1e-12, d.str()};
}

// 9. Critical bracket for the fixture couplings: width 1e-6 within 40
//    bisections, counts differing across the bracket.
Outcome criterion9() {
  const double t0 = now_s();
  const json fix = load_fixture();
  const auto& c = fix["couplings_at_beta_1"];
  const ModelParams couplings{c["J"].get<double>(), c["J1"].get<double>(),
                              c["J2"].get<double>(), c["h"].get<double>(),
                              1.0};
  const CriticalBracket br = critical_beta_bracket(couplings, 0.2, 1.0, 1e-6);
  const double elapsed = now_s() - t0;
  std::ostringstream d;
  d << "bracket [" << br.beta_low << ", " << br.beta_high << "] width "
    << br.beta_high - br.beta_low << " in " << br.bisections
    << " bisections, counts " << br.count_low << " -> " << br.count_high
    << "; " << elapsed << " s";
  return {br.bisections <= 40 && br.beta_high - br.beta_low <= 1e-6 &&
              br.count_low != br.count_high && elapsed < 60.0,
          d.str()};
}

const char* kNames[] = {
    "oracle equivalence of the partition recursion",
    "corrected-equation identities",
    "three-solution window at tilde=2, theta1=2*theta1*",
    "quartic sign law over the (tilde, theta1) grid",
    "five-solution regime with three stable points",
    "boundary-condition correspondence",
    "monotonicity and inflection thresholds",
    "Jacobian stability machinery",
    "critical-beta bracketing",
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int a = 1; a < argc; ++a) {
    if (std::strcmp(argv[a], "--long") == 0) {
      g_long = true;
    } else if (std::strcmp(argv[a], "all") == 0) {
      which = {1, 2, 3, 4, 5, 6, 7, 8, 9};
    } else {
      const int n = std::atoi(argv[a]);
      if (n < 1 || n > 9) {
        std::cerr << "usage: acceptance [all | 1..9] [--long]\n";
        return 2;
      }
      which.push_back(n);
    }
  }
  if (which.empty()) which = {1, 2, 3, 4, 5, 6, 7, 8, 9};

  Outcome (*fns[])() = {criterion1, criterion2, criterion3,
                        criterion4, criterion5, criterion6,
                        criterion7, criterion8, criterion9};
  int failed = 0;
  for (int n : which) {
    Outcome o;
    try {
      o = fns[n - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "[PASS]" : "[FAIL]") << " criterion " << n << " ("
              << kNames[n - 1] << "): " << o.detail << "\n";
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
