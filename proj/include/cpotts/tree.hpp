#pragma once

// Finite binary Cayley tree (order 2, rooted) and the four interaction
// structures living on it: vertices, nearest-neighbor edges, one-level
// second-neighbor (sibling) pairs, and parent-centered triples.

#include <array>
#include <bit>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpotts {

using Spin = int;  // spin values 1, 2, 3

inline constexpr int kSpinStates = 3;
inline constexpr int kMaxTreeDepth = 20;  // memory cap for materialized trees

// Weight convention for a parent-centered triple (x, y, z), y the center.
// averaged: 1 if x=y=z, 1/2 if exactly one adjacent pair matches, else 0.
// strict:   1 if x=y=z, else 0.
enum class TripleDelta { averaged, strict };

namespace detail {
inline void check_spin(Spin s) {
  if (s < 1 || s > kSpinStates)
    throw std::invalid_argument("spin value must be in {1,2,3}, got " +
                                std::to_string(s));
}
}  // namespace detail

inline int delta2(Spin a, Spin b) {
  detail::check_spin(a);
  detail::check_spin(b);
  return a == b ? 1 : 0;
}

// Twice the triple weight, so the half-integer cases stay exact integers.
// Argument order is (x, y, z) with y the center.
inline int delta3_num2(Spin x, Spin y, Spin z, TripleDelta variant) {
  detail::check_spin(x);
  detail::check_spin(y);
  detail::check_spin(z);
  if (variant == TripleDelta::strict) return (x == y && y == z) ? 2 : 0;
  return (x == y ? 1 : 0) + (y == z ? 1 : 0);
}

inline double delta3(Spin x, Spin y, Spin z, TripleDelta variant) {
  return 0.5 * delta3_num2(x, y, z, variant);
}

// Depth-n binary Cayley tree in level order: root is 0, the children of
// vertex i are 2i+1 and 2i+2, so parent/child/level are O(1) arithmetic.
class CayleyTree {
 public:
  explicit CayleyTree(int depth) : depth_(depth) {
    if (depth < 0) throw std::invalid_argument("tree depth must be >= 0");
    if (depth > kMaxTreeDepth)
      throw std::length_error("tree depth " + std::to_string(depth) +
                              " exceeds materialization cap " +
                              std::to_string(kMaxTreeDepth));
    vertex_count_ = (1 << (depth + 1)) - 1;
  }

  int depth() const { return depth_; }
  int vertex_count() const { return vertex_count_; }

  int level(int v) const {
    check_vertex(v);
    return std::bit_width(static_cast<unsigned>(v) + 1u) - 1;
  }

  int parent(int v) const {  // -1 at the root
    check_vertex(v);
    return v == 0 ? -1 : (v - 1) / 2;
  }

  bool is_leaf(int v) const { return level(v) == depth_; }

  std::array<int, 2> children(int v) const {  // only valid off the last level
    check_vertex(v);
    if (is_leaf(v))
      throw std::invalid_argument("vertex " + std::to_string(v) +
                                  " is a leaf; no children");
    return {2 * v + 1, 2 * v + 2};
  }

  int first_leaf() const { return (1 << depth_) - 1; }
  int interior_count() const { return first_leaf(); }  // |V_{n-1}|

  std::vector<int> level_sizes() const {
    std::vector<int> out(depth_ + 1);
    for (int m = 0; m <= depth_; ++m) out[m] = 1 << m;
    return out;
  }

 private:
  void check_vertex(int v) const {
    if (v < 0 || v >= vertex_count_)
      throw std::out_of_range("vertex index " + std::to_string(v) +
                              " outside tree of size " +
                              std::to_string(vertex_count_));
  }

  int depth_;
  int vertex_count_;
};

inline CayleyTree build_tree(int n) { return CayleyTree(n); }

// The three interaction lists. Edges are {parent, child}; second pairs are
// the two children of a common parent (one-level by construction); triples
// are (x, y, z) with y the common parent. For order 2 the endpoints of a
// triple coincide with a sibling pair, but the two lists carry different
// couplings, so they are kept separate.
struct InteractionLists {
  std::vector<std::array<int, 2>> nn_edges;
  std::vector<std::array<int, 2>> second_pairs;
  std::vector<std::array<int, 3>> triples;
};

inline InteractionLists interaction_lists(const CayleyTree& tree) {
  InteractionLists out;
  const int interior = tree.interior_count();
  out.nn_edges.reserve(tree.vertex_count() - 1);
  out.second_pairs.reserve(interior);
  out.triples.reserve(interior);
  for (int y = 0; y < interior; ++y) {
    const auto [a, b] = tree.children(y);
    out.nn_edges.push_back({y, a});
    out.nn_edges.push_back({y, b});
    out.second_pairs.push_back({a, b});
    out.triples.push_back({a, y, b});
  }
  return out;
}

}  // namespace cpotts
