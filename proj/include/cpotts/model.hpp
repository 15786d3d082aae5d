#pragma once

// Physical parameters, their exponentiated theta forms, and Hamiltonian /
// Boltzmann-weight evaluation on finite trees, with optional uniform
// boundary condition outside the volume.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cpotts/tree.hpp"

namespace cpotts {

// Couplings in energy units plus inverse temperature.
// J: nearest neighbor, J1: one-level second neighbor, J2: triple, h: field.
struct ModelParams {
  double J = 0.0;
  double J1 = 0.0;
  double J2 = 0.0;
  double h = 0.0;
  double beta = 1.0;
};

inline void validate(const ModelParams& p) {
  if (!(p.beta > 0.0) || !std::isfinite(p.beta))
    throw std::invalid_argument("beta must be positive and finite");
  for (double c : {p.J, p.J1, p.J2, p.h})
    if (!std::isfinite(c)) throw std::invalid_argument("couplings must be finite");
}

// theta = e^{beta J}, theta1 = e^{beta J1}, theta2 = e^{beta J2},
// theta3 = e^{beta h}, theta_tilde = theta * sqrt(theta2).
struct ThetaParams {
  double theta = 1.0;
  double theta1 = 1.0;
  double theta2 = 1.0;
  double theta3 = 1.0;
  double theta_tilde = 1.0;
};

inline ThetaParams make_thetas(double theta, double theta1, double theta2,
                               double theta3) {
  for (double t : {theta, theta1, theta2, theta3})
    if (!(t > 0.0) || !std::isfinite(t))
      throw std::invalid_argument("theta parameters must be positive and finite");
  ThetaParams out{theta, theta1, theta2, theta3, theta * std::sqrt(theta2)};
  if (!(out.theta_tilde > 0.0) || !std::isfinite(out.theta_tilde))
    throw std::range_error("theta_tilde over/underflows double range");
  return out;
}

inline ThetaParams thetas_from(const ModelParams& p) {
  validate(p);
  const double t = std::exp(p.beta * p.J);
  const double t1 = std::exp(p.beta * p.J1);
  const double t2 = std::exp(p.beta * p.J2);
  const double t3 = std::exp(p.beta * p.h);
  for (double x : {t, t1, t2, t3})
    if (!(x > 0.0) || !std::isfinite(x))
      throw std::range_error("beta*coupling outside representable exponent range");
  return make_thetas(t, t1, t2, t3);
}

// beta*J etc. recovered from the thetas; the natural scale for log weights.
struct LogCouplings {
  double J, J1, J2, h;
};

inline LogCouplings log_couplings(const ThetaParams& t) {
  return {std::log(t.theta), std::log(t.theta1), std::log(t.theta2),
          std::log(t.theta3)};
}

// Free boundary, or all spins outside the volume pinned to one value.
struct BoundarySpec {
  int spin = 0;  // 0 = free
  static BoundarySpec free_boundary() { return {0}; }
  static BoundarySpec uniform(Spin i) {
    detail::check_spin(i);
    return {i};
  }
  bool is_free() const { return spin == 0; }
};

using SpinConfiguration = std::vector<Spin>;  // indexed by vertex, level order

// Integer-exact interaction counts for one configuration; the energy is a
// linear combination of these. delta3 sums are kept as twice their value.
struct InteractionCounts {
  long long nn = 0;          // matched nearest-neighbor pairs (boundary included)
  long long second = 0;      // matched sibling pairs
  long long triple_num2 = 0; // 2 * sum of triple weights (boundary included)
  long long field = 0;       // vertices with spin 1
};

inline InteractionCounts interaction_counts(const SpinConfiguration& config,
                                            const CayleyTree& tree,
                                            const InteractionLists& lists,
                                            BoundarySpec boundary,
                                            TripleDelta variant) {
  if (static_cast<int>(config.size()) != tree.vertex_count())
    throw std::invalid_argument("configuration size does not match tree");
  for (Spin s : config) detail::check_spin(s);

  InteractionCounts c;
  for (const auto& e : lists.nn_edges)
    c.nn += config[e[0]] == config[e[1]];
  for (const auto& p : lists.second_pairs)
    c.second += config[p[0]] == config[p[1]];
  for (const auto& t : lists.triples)
    c.triple_num2 += delta3_num2(config[t[0]], config[t[1]], config[t[2]], variant);
  for (Spin s : config) c.field += s == 1;

  if (!boundary.is_free()) {
    // Each leaf has two pinned children outside the volume: two crossing
    // edges plus the triple centered at the leaf. Sibling pairs never cross
    // the volume boundary, and the outside spins carry no field term.
    const Spin i = boundary.spin;
    for (int x = tree.first_leaf(); x < tree.vertex_count(); ++x) {
      c.nn += 2 * (config[x] == i);
      c.triple_num2 += delta3_num2(i, config[x], i, variant);
    }
  }
  return c;
}

inline double hamiltonian(const SpinConfiguration& config, const CayleyTree& tree,
                          const InteractionLists& lists, const ModelParams& params,
                          BoundarySpec boundary, TripleDelta variant) {
  validate(params);
  const InteractionCounts c =
      interaction_counts(config, tree, lists, boundary, variant);
  return -params.J * static_cast<double>(c.nn) -
         params.J1 * static_cast<double>(c.second) -
         params.J2 * 0.5 * static_cast<double>(c.triple_num2) -
         params.h * static_cast<double>(c.field);
}

inline double hamiltonian(const SpinConfiguration& config, const CayleyTree& tree,
                          const ModelParams& params, BoundarySpec boundary,
                          TripleDelta variant) {
  return hamiltonian(config, tree, interaction_lists(tree), params, boundary,
                     variant);
}

// log of the Boltzmann weight, -beta * H; exponentiation is the caller's
// problem so large beta cannot overflow here.
inline double log_boltzmann_weight(const SpinConfiguration& config,
                                   const CayleyTree& tree,
                                   const InteractionLists& lists,
                                   const ModelParams& params,
                                   BoundarySpec boundary, TripleDelta variant) {
  return -params.beta *
         hamiltonian(config, tree, lists, params, boundary, variant);
}

inline double log_boltzmann_weight(const SpinConfiguration& config,
                                   const CayleyTree& tree,
                                   const ModelParams& params,
                                   BoundarySpec boundary, TripleDelta variant) {
  return -params.beta * hamiltonian(config, tree, params, boundary, variant);
}

}  // namespace cpotts
