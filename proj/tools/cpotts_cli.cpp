// Command-line front end: exact enumeration, recursion, fixed-point
// analysis, phase-diagram scanning, regime search, critical-beta
// bracketing, and the recursion-vs-enumeration verification harness.
//
// Exit codes: 0 success, 2 invalid arguments or parameters, 3 out of
// regime / no transition where a result was mandatory, 4 verification
// failure.

#include <charconv>
#include <chrono>
#include <cmath>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cpotts/enumeration.hpp"
#include "cpotts/fixed_points.hpp"
#include "cpotts/model.hpp"
#include "cpotts/phase.hpp"
#include "cpotts/recursion.hpp"
#include "cpotts/tree.hpp"

using json = nlohmann::ordered_json;
using namespace cpotts;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadArgs = 2;
constexpr int kExitOutOfRegime = 3;
constexpr int kExitVerifyFailed = 4;

struct VerifyFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double x) {  // shortest round-trip decimal
  char buf[48];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

struct Options {
  std::optional<double> J, J1, J2, h, beta;
  std::optional<double> theta, theta1, theta2, theta3;
  int depth = 2;
  std::string boundary = "free";
  std::string variant = "averaged";
  double tol = 1e-12;
  int max_iter = 100000;
  std::string format = "json";
  int jobs = 0;
  unsigned long long seed = 1;
  bool long_runs = false;

  bool j_given() const {
    return J.has_value() || J1.has_value() || J2.has_value() ||
           h.has_value() || beta.has_value();
  }
  bool t_given() const {
    return theta.has_value() || theta1.has_value() || theta2.has_value() ||
           theta3.has_value();
  }

  void check_exclusive() const {
    if (j_given() && t_given())
      throw std::invalid_argument(
          "supply either physical couplings (--J --J1 --J2 --h --beta) or "
          "theta parameters (--theta ...), not both");
  }

  ModelParams model_params() const {
    check_exclusive();
    if (t_given()) {
      const ThetaParams t = thetas();
      return {std::log(t.theta), std::log(t.theta1), std::log(t.theta2),
              std::log(t.theta3), 1.0};
    }
    return {J.value_or(0.0), J1.value_or(0.0), J2.value_or(0.0),
            h.value_or(0.0), beta.value_or(1.0)};
  }

  ThetaParams thetas() const {
    check_exclusive();
    if (j_given()) return thetas_from(model_params());
    return make_thetas(theta.value_or(1.0), theta1.value_or(1.0),
                       theta2.value_or(1.0), theta3.value_or(1.0));
  }

  BoundarySpec boundary_spec() const {
    if (boundary == "free") return BoundarySpec::free_boundary();
    if (boundary == "1" || boundary == "2" || boundary == "3")
      return BoundarySpec::uniform(boundary[0] - '0');
    throw std::invalid_argument("--boundary must be one of free,1,2,3");
  }

  TripleDelta delta_variant() const {
    if (variant == "averaged") return TripleDelta::averaged;
    if (variant == "strict") return TripleDelta::strict;
    throw std::invalid_argument("--delta-variant must be averaged or strict");
  }

  int enumeration_depth() const {
    const int cap = long_runs ? kMaxEnumerationDepth : 2;
    if (depth < 0 || depth > cap)
      throw std::invalid_argument(
          "depth " + std::to_string(depth) + " outside enumeration range 0.." +
          std::to_string(cap) + (long_runs ? "" : " (use --long for 3)"));
    return depth;
  }
};

json thetas_json(const ThetaParams& t) {
  return {{"theta", t.theta},
          {"theta1", t.theta1},
          {"theta2", t.theta2},
          {"theta3", t.theta3},
          {"theta_tilde", t.theta_tilde}};
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

// --- subcommands -----------------------------------------------------------

int cmd_tree_info(const Options& opt) {
  const CayleyTree tree = build_tree(opt.depth);
  const InteractionLists lists = interaction_lists(tree);
  emit(json{{"schema", 1},
            {"depth", tree.depth()},
            {"vertices", tree.vertex_count()},
            {"levels", tree.level_sizes()},
            {"nn_edges", lists.nn_edges.size()},
            {"second_pairs", lists.second_pairs.size()},
            {"triples", lists.triples.size()}});
  return kExitOk;
}

int cmd_exact(const Options& opt) {
  const int n = opt.enumeration_depth();
  const auto t0 = std::chrono::steady_clock::now();
  const PartitionVector pv =
      exact_partition_vector(n, opt.model_params(), opt.boundary_spec(),
                             opt.delta_variant(), opt.jobs);
  const auto t1 = std::chrono::steady_clock::now();
  const double lt = pv.log_total();
  emit(json{{"schema", 1},
            {"n", n},
            {"boundary", opt.boundary},
            {"variant", opt.variant},
            {"logZ", {pv.logZ[0], pv.logZ[1], pv.logZ[2]}},
            {"marginal",
             {std::exp(pv.logZ[0] - lt), std::exp(pv.logZ[1] - lt),
              std::exp(pv.logZ[2] - lt)}},
            {"elapsed_ms",
             std::chrono::duration<double, std::milli>(t1 - t0).count()}});
  return kExitOk;
}

int cmd_recurse(const Options& opt) {
  const ThetaParams t = opt.thetas();
  PartitionVector pv = base_partition(opt.boundary_spec(), t);
  for (int k = 0; k < opt.depth; ++k)
    pv = step_partition(pv, t, opt.delta_variant());
  const RatioPoint r = ratios_of(pv);
  emit(json{{"schema", 1},
            {"n", opt.depth},
            {"boundary", opt.boundary},
            {"variant", opt.variant},
            {"logZ", {pv.logZ[0], pv.logZ[1], pv.logZ[2]}},
            {"u", r.u},
            {"v", r.v}});
  return kExitOk;
}

int cmd_iterate(const Options& opt, double u0, double v0) {
  const ThetaParams t = opt.thetas();
  const BoundarySpec b = opt.boundary_spec();
  IterationResult res;
  json start;
  if (b.is_free()) {
    res = iterate({u0, v0}, t, opt.tol, opt.max_iter, opt.delta_variant());
    start = {{"u", u0}, {"v", v0}};
  } else {
    const RatioPoint p0 = ratios_of(base_partition(b, t));
    res = boundary_seeded_limit(b.spin, t, opt.tol, opt.max_iter,
                                opt.delta_variant());
    start = {{"u", p0.u}, {"v", p0.v}, {"boundary", opt.boundary}};
  }
  emit(json{{"schema", 1},
            {"start", start},
            {"u", res.point.u},
            {"v", res.point.v},
            {"iterations", res.iterations},
            {"residual", res.residual},
            {"converged", res.converged},
            {"cycling", res.cycling}});
  return kExitOk;
}

int cmd_symmetric(const Options& opt) {
  const ThetaParams t = opt.thetas();
  const QuarticCoefficients q = quartic_coefficients(t);
  json j{{"schema", 1},
         {"thetas", thetas_json(t)},
         {"theta1_star", theta1_star(t)},
         {"quartic",
          {{"A", q.A}, {"B", q.B}, {"C", q.C}, {"D", q.D}, {"E", q.E}}}};
  try {
    j["theta1_star_star"] = theta1_star_star(t);
  } catch (const std::domain_error&) {
    j["theta1_star_star"] = nullptr;
  }
  if (const auto u = inflection_point(t))
    j["inflection_u"] = *u;
  else
    j["inflection_u"] = nullptr;
  j["tangency_roots"] = tangency_roots(t);
  try {
    const auto [e1, e2] = eta_thresholds(t);
    j["eta1"] = e1;
    j["eta2"] = e2;
  } catch (const std::domain_error&) {
    j["eta1"] = nullptr;
    j["eta2"] = nullptr;
  }
  const auto roots = solve_symmetric(t);
  j["roots"] = roots;
  j["root_count"] = roots.size();
  emit(j);
  return kExitOk;
}

json phase_point_json(const PhasePoint& pp, bool include_points) {
  json j{{"thetas", thetas_json(pp.thetas)},
         {"total", pp.total},
         {"stable", pp.stable},
         {"symmetric", pp.symmetric},
         {"classification", to_string(pp.cls)}};
  if (include_points) {
    json pts = json::array();
    for (const auto& fp : pp.points)
      pts.push_back({{"u", fp.point.u},
                     {"v", fp.point.v},
                     {"branch", to_string(fp.branch)},
                     {"residual", fp.residual},
                     {"spectral_radius", fp.spectral_radius},
                     {"stability", to_string(fp.stability)}});
    j["points"] = pts;
  }
  return j;
}

int cmd_fixpoints(const Options& opt) {
  const PhasePoint pp = classify(opt.thetas());
  json out{{"schema", 1}};
  const json body = phase_point_json(pp, true);
  for (const auto& [k, v] : body.items()) out[k] = v;
  emit(out);
  return kExitOk;
}

GridAxis parse_axis(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("axis must look like name=lo:hi:steps");
  GridAxis ax;
  ax.name = spec.substr(0, eq);
  const std::string rest = spec.substr(eq + 1);
  const auto c1 = rest.find(':');
  const auto c2 = rest.find(':', c1 == std::string::npos ? 0 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw std::invalid_argument("axis must look like name=lo:hi:steps");
  try {
    ax.lo = std::stod(rest.substr(0, c1));
    ax.hi = std::stod(rest.substr(c1 + 1, c2 - c1 - 1));
    ax.steps = std::stoi(rest.substr(c2 + 1));
  } catch (const std::exception&) {
    throw std::invalid_argument("could not parse axis '" + spec + "'");
  }
  if (ax.steps < 1) throw std::invalid_argument("axis steps must be >= 1");
  return ax;
}

int cmd_scan(const Options& opt, const std::vector<std::string>& axis_specs) {
  opt.check_exclusive();
  ScanSpec spec;
  spec.theta_space = !opt.j_given();
  if (spec.theta_space) {
    spec.theta = opt.theta.value_or(1.0);
    spec.theta1 = opt.theta1.value_or(1.0);
    spec.theta2 = opt.theta2.value_or(1.0);
    spec.theta3 = opt.theta3.value_or(1.0);
  } else {
    spec.base_j = opt.model_params();
  }
  for (const auto& s : axis_specs) spec.axes.push_back(parse_axis(s));

  const auto points = run_scan(spec, opt.jobs, [](long long d, long long n) {
    if (n >= 20 && d % (n / 10) == 0)
      std::cerr << "scan progress: " << d << "/" << n << "\n";
  });

  if (opt.format == "csv") {
    std::cout << "theta,theta1,theta2,theta3,total,stable,symmetric,class\n";
    for (const auto& pp : points) {
      std::cout << fmt(pp.thetas.theta) << ',' << fmt(pp.thetas.theta1) << ','
                << fmt(pp.thetas.theta2) << ',' << fmt(pp.thetas.theta3) << ','
                << pp.total << ',' << pp.stable << ',' << pp.symmetric << ','
                << to_string(pp.cls) << "\n";
    }
    return kExitOk;
  }
  if (opt.format != "json")
    throw std::invalid_argument("--format must be json or csv");
  json axes = json::array();
  for (const auto& ax : spec.axes)
    axes.push_back(
        {{"name", ax.name}, {"lo", ax.lo}, {"hi", ax.hi}, {"steps", ax.steps}});
  json pts = json::array();
  for (const auto& pp : points) pts.push_back(phase_point_json(pp, false));
  emit(json{{"schema", 1}, {"axes", axes}, {"points", pts}});
  return kExitOk;
}

PhaseClass parse_target(const std::string& s) {
  if (s == "unique") return PhaseClass::unique;
  if (s == "symmetric-multi") return PhaseClass::symmetric_multi;
  if (s == "five-solution") return PhaseClass::five_solution;
  if (s == "other") return PhaseClass::other;
  throw std::invalid_argument(
      "--target must be unique, symmetric-multi, five-solution or other");
}

int cmd_find_regime(const std::string& target, int budget,
                    double theta_tilde_max) {
  FindRegimeOptions fro;
  fro.budget = budget;
  fro.theta_tilde_max = theta_tilde_max;
  const auto hit = find_regime(parse_target(target), fro);
  json j{{"schema", 1}, {"target", target}, {"budget", budget}};
  if (hit) {
    j["found"] = true;
    const json body = phase_point_json(*hit, true);
    for (const auto& [k, v] : body.items()) j[k] = v;
  } else {
    j["found"] = false;
  }
  emit(j);
  return kExitOk;
}

int cmd_critical_beta(const Options& opt, double beta_lo, double beta_hi,
                      double width) {
  const CriticalBracket br =
      critical_beta_bracket(opt.model_params(), beta_lo, beta_hi, width);
  emit(json{{"schema", 1},
            {"beta_low", br.beta_low},
            {"beta_high", br.beta_high},
            {"count_low", br.count_low},
            {"count_high", br.count_high},
            {"bisections", br.bisections}});
  return kExitOk;
}

int cmd_verify(const Options& opt, int draws, bool alt_v) {
  const int depth = opt.enumeration_depth();
  std::mt19937_64 rng(opt.seed);
  auto unif = [&](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  };

  double max_dev = 0.0;
  for (int k = 0; k < draws; ++k) {
    const ModelParams p{unif(-2, 2), unif(-2, 2), unif(-2, 2), unif(-2, 2),
                        unif(0.05, 2)};
    const ThetaParams t = thetas_from(p);
    for (TripleDelta v : {TripleDelta::averaged, TripleDelta::strict}) {
      PartitionVector pv = base_partition(BoundarySpec::free_boundary(), t);
      for (int n = 1; n <= depth; ++n) {
        pv = step_partition(pv, t, v);
        const PartitionVector exact = exact_partition_vector(
            n, p, BoundarySpec::free_boundary(), v, opt.jobs);
        for (int i = 0; i < 3; ++i)
          max_dev = std::max(max_dev,
                             std::abs(pv.logZ[i] - exact.logZ[i]) /
                                 std::max(1.0, std::abs(exact.logZ[i])));
      }
    }
  }

  double max_identity_dev = 0.0;
  const RatioForm form = alt_v ? RatioForm::alt_v : RatioForm::standard;
  for (int k = 0; k < 1000; ++k) {
    const ModelParams p{unif(-2, 2), unif(-2, 2), unif(-2, 2), unif(-2, 2),
                        unif(0.05, 2)};
    const ThetaParams t = thetas_from(p);
    const RatioPoint x{unif(0.01, 10), unif(0.01, 10)};
    const RatioPoint y = ratio_step(x, t, form);
    const double lhs = t.theta3 * (y.u - y.v);
    const double rhs = ratio_difference_closed_form(x, t);
    max_identity_dev = std::max(
        max_identity_dev, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
  }

  const bool ok = max_dev <= 1e-9 && max_identity_dev <= 1e-10;
  emit(json{{"schema", 1},
            {"depth", depth},
            {"draws", draws},
            {"seed", opt.seed},
            {"alt_v_equation", alt_v},
            {"max_rel_log_dev", max_dev},
            {"identity_max_dev", max_identity_dev},
            {"pass", ok}});
  if (!ok) throw VerifyFailure("verification failed");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Three-state Potts model with nearest-neighbor, one-level "
      "second-neighbor, triple and field couplings on the binary Cayley "
      "tree: exact finite-tree partition functions, ratio recursion, "
      "fixed-point analysis and phase-diagram scanning"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print help and exit");  // frees -h for --h

  Options opt;
  app.add_option("--J", opt.J, "nearest-neighbor coupling");
  app.add_option("--J1", opt.J1, "one-level second-neighbor coupling");
  app.add_option("--J2", opt.J2, "triple coupling");
  app.add_option("--h", opt.h, "external field");
  app.add_option("--beta", opt.beta, "inverse temperature (default 1)");
  app.add_option("--theta", opt.theta, "exp(beta*J)");
  app.add_option("--theta1", opt.theta1, "exp(beta*J1)");
  app.add_option("--theta2", opt.theta2, "exp(beta*J2)");
  app.add_option("--theta3", opt.theta3, "exp(beta*h)");
  app.add_option("--depth", opt.depth, "tree depth / recursion steps");
  app.add_option("--boundary", opt.boundary, "free, 1, 2 or 3");
  app.add_option("--delta-variant", opt.variant, "averaged or strict");
  app.add_option("--tol", opt.tol, "iteration tolerance");
  app.add_option("--max-iter", opt.max_iter, "iteration cap");
  app.add_option("--format", opt.format, "json or csv (scan)");
  app.add_option("--jobs", opt.jobs, "worker threads (0 = all cores)");
  app.add_option("--seed", opt.seed, "random seed for verify draws");
  app.add_flag("--long", opt.long_runs, "unlock depth-3 enumeration");

  app.add_subcommand("tree-info", "tree and interaction-list counts");
  app.add_subcommand("exact", "exact partition vector by full enumeration");
  app.add_subcommand("recurse", "n recursion steps from the boundary base");

  double u0 = 1.0, v0 = 1.0;
  auto* it_cmd =
      app.add_subcommand("iterate", "fixed-point iteration of the ratio map");
  it_cmd->add_option("--u0", u0, "start ratio u (free boundary)");
  it_cmd->add_option("--v0", v0, "start ratio v (free boundary)");

  app.add_subcommand("symmetric", "symmetric-branch analysis");
  app.add_subcommand("fixpoints", "all fixed points with stability");

  std::vector<std::string> axis_specs;
  auto* scan_cmd = app.add_subcommand("scan", "classify over a parameter grid");
  scan_cmd->add_option("--axis", axis_specs,
                       "grid axis name=lo:hi:steps (repeatable)");

  std::string target = "five-solution";
  int budget = 500;
  double tilde_max = 1e300;
  auto* fr_cmd =
      app.add_subcommand("find-regime", "search for a classification witness");
  fr_cmd->add_option("--target", target,
                     "unique, symmetric-multi, five-solution or other");
  fr_cmd->add_option("--budget", budget, "maximum classify calls");
  fr_cmd->add_option("--theta-tilde-max", tilde_max,
                     "restrict the search to theta_tilde below this");

  double beta_lo = 0.2, beta_hi = 1.0, width = 1e-6;
  auto* cb_cmd = app.add_subcommand(
      "critical-beta", "bisect beta for a solution-count change");
  cb_cmd->add_option("--beta-lo", beta_lo, "lower end of the beta range");
  cb_cmd->add_option("--beta-hi", beta_hi, "upper end of the beta range");
  cb_cmd->add_option("--width", width, "target bracket width");

  int draws = 20;
  bool alt_v = false;
  auto* vf_cmd = app.add_subcommand(
      "verify", "recursion vs enumeration over random parameter draws");
  vf_cmd->add_option("--draws", draws, "number of random parameter draws");
  vf_cmd->add_flag("--alt-v-equation", alt_v,
                   "use the u^2-tailed v-equation (expected to fail the "
                   "difference identity)");

  for (CLI::App* sub : app.get_subcommands(nullptr))
    sub->fallthrough();  // let global options appear after the subcommand

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadArgs;
  }

  try {
    if (app.got_subcommand("tree-info")) return cmd_tree_info(opt);
    if (app.got_subcommand("exact")) return cmd_exact(opt);
    if (app.got_subcommand("recurse")) return cmd_recurse(opt);
    if (app.got_subcommand("iterate")) return cmd_iterate(opt, u0, v0);
    if (app.got_subcommand("symmetric")) return cmd_symmetric(opt);
    if (app.got_subcommand("fixpoints")) return cmd_fixpoints(opt);
    if (app.got_subcommand("scan")) return cmd_scan(opt, axis_specs);
    if (app.got_subcommand("find-regime"))
      return cmd_find_regime(target, budget, tilde_max);
    if (app.got_subcommand("critical-beta"))
      return cmd_critical_beta(opt, beta_lo, beta_hi, width);
    if (app.got_subcommand("verify")) return cmd_verify(opt, draws, alt_v);
  } catch (const VerifyFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerifyFailed;
  } catch (const NoTransitionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOutOfRegime;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOutOfRegime;
  } catch (const std::length_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadArgs;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadArgs;
  } catch (const std::range_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadArgs;
  }
  return kExitBadArgs;
}
