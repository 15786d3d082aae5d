#pragma once

// Ground-truth engine: root-spin-resolved partition functions by full
// enumeration of all 3^|V_n| configurations. Deliberately dumb; every
// downstream recursion and algebraic reduction is validated against it.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

#include "cpotts/model.hpp"
#include "cpotts/tree.hpp"

namespace cpotts {

inline constexpr int kMaxEnumerationDepth = 3;  // 3^15 configurations

struct PartitionVector {
  std::array<double, 3> logZ{0.0, 0.0, 0.0};

  double log_total() const {
    const double m = std::max({logZ[0], logZ[1], logZ[2]});
    return m + std::log(std::exp(logZ[0] - m) + std::exp(logZ[1] - m) +
                        std::exp(logZ[2] - m));
  }
};

namespace detail {

// Partial log-sum-exp of one configuration shard: the running max from the
// first pass and the sum of exp(lw - max) from the second.
struct ShardSum {
  double max_lw = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  bool empty = true;
};

class EnumerationJob {
 public:
  EnumerationJob(int n, const ModelParams& params, BoundarySpec boundary,
                 TripleDelta variant)
      : tree_(n),
        lists_(interaction_lists(tree_)),
        params_(params),
        boundary_(boundary),
        variant_(variant) {}

  // Shards fix the root spin and, for n >= 1, the spins of its two children.
  int shard_count() const { return tree_.depth() == 0 ? 3 : 27; }

  ShardSum run_shard(int shard) const {
    SpinConfiguration spins(tree_.vertex_count(), 1);
    int fixed = 1;
    spins[0] = 1 + shard % 3;
    if (tree_.depth() >= 1) {
      spins[1] = 1 + (shard / 3) % 3;
      spins[2] = 1 + (shard / 9) % 3;
      fixed = 3;
    }
    const int nfree = tree_.vertex_count() - fixed;
    long long total = 1;
    for (int k = 0; k < nfree; ++k) total *= 3;

    ShardSum acc;
    for (int pass = 0; pass < 2; ++pass) {
      std::fill(spins.begin() + fixed, spins.end(), 1);
      for (long long c = 0; c < total; ++c) {
        const double lw = -params_.beta * hamiltonian(spins, tree_, lists_,
                                                      params_, boundary_,
                                                      variant_);
        if (pass == 0) {
          acc.max_lw = std::max(acc.max_lw, lw);
          acc.empty = false;
        } else {
          acc.sum += std::exp(lw - acc.max_lw);
        }
        // mixed-radix increment over the free vertices
        for (int d = fixed; d < tree_.vertex_count(); ++d) {
          if (spins[d] < kSpinStates) {
            ++spins[d];
            break;
          }
          spins[d] = 1;
        }
      }
    }
    return acc;
  }

  int root_spin_of_shard(int shard) const { return shard % 3; }

 private:
  CayleyTree tree_;
  InteractionLists lists_;
  ModelParams params_;
  BoundarySpec boundary_;
  TripleDelta variant_;
};

}  // namespace detail

// Exact logZ_i = log sum over configurations with root spin i of the
// Boltzmann weight. Shards run independently (optionally on several
// threads) and are merged in fixed shard order, so the result does not
// depend on the worker count.
inline PartitionVector exact_partition_vector(int n, const ModelParams& params,
                                              BoundarySpec boundary,
                                              TripleDelta variant,
                                              int jobs = 0) {
  if (n < 0) throw std::invalid_argument("depth must be >= 0");
  if (n > kMaxEnumerationDepth)
    throw std::length_error("enumeration capped at depth " +
                            std::to_string(kMaxEnumerationDepth));
  validate(params);
  if (jobs <= 0)
    jobs = std::max(1u, std::thread::hardware_concurrency());

  detail::EnumerationJob job(n, params, boundary, variant);
  const int shards = job.shard_count();
  std::vector<detail::ShardSum> results(shards);

  if (jobs == 1 || shards == 1) {
    for (int s = 0; s < shards; ++s) results[s] = job.run_shard(s);
  } else {
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int s = next.fetch_add(1); s < shards; s = next.fetch_add(1))
        results[s] = job.run_shard(s);
    };
    std::vector<std::thread> pool;
    const int nthreads = std::min(jobs, shards);
    pool.reserve(nthreads);
    for (int k = 0; k < nthreads; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  PartitionVector pv;
  for (int i = 0; i < 3; ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (int s = i; s < shards; s += 3)
      if (!results[s].empty) m = std::max(m, results[s].max_lw);
    double sum = 0.0;
    for (int s = i; s < shards; s += 3)
      if (!results[s].empty)
        sum += results[s].sum * std::exp(results[s].max_lw - m);
    pv.logZ[i] = m + std::log(sum);
  }
  return pv;
}

inline std::array<double, 3> root_marginal(int n, const ModelParams& params,
                                           BoundarySpec boundary,
                                           TripleDelta variant, int jobs = 0) {
  const PartitionVector pv =
      exact_partition_vector(n, params, boundary, variant, jobs);
  const double lt = pv.log_total();
  return {std::exp(pv.logZ[0] - lt), std::exp(pv.logZ[1] - lt),
          std::exp(pv.logZ[2] - lt)};
}

}  // namespace cpotts
