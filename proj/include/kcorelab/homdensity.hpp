#pragma once

#include <optional>
#include <vector>

#include "kcorelab/kernels.hpp"

namespace kcl {

// Finite rooted tree; node 0 is the root, children in fixed order.
struct RootedTree {
  std::vector<std::vector<int>> children;  // per node

  int node_count() const { return static_cast<int>(children.size()); }
  int edge_count() const { return node_count() - 1; }

  static RootedTree star(int leaves);
  static RootedTree single_vertex();
  // Root with `bare_leaves` leaf children plus each subtree grafted as a
  // child of the root.
  static RootedTree graft(int bare_leaves,
                          const std::vector<const RootedTree*>& subtrees);
};

// Nested offspring counts of the first d generations: root count plus a
// config per child. children.size() is 0 (leaf at max depth) or count.
struct OffspringConfig {
  int count = 0;
  std::vector<OffspringConfig> children;

  int depth() const;
  int max_count() const;
  void validate() const;

  static OffspringConfig leaf(int count) { return {count, {}}; }
};

// Vertex-prescribed homomorphism density t^x(T, W) for x in block
// root_block, or the mixed density t(T, W) when root_block is absent.
double tree_density(const RootedTree& t, const StepKernel& w,
                    std::optional<std::size_t> root_block = std::nullopt);

// Exact configuration probability g(x, K^d) via the recursion
// g = e^{-int W} / k_0! * prod_j int W g(.,K_j); integrated over the root
// block distribution when root_block is absent.
double config_prob(const OffspringConfig& config, const StepKernel& w,
                   std::optional<std::size_t> root_block = std::nullopt);

struct TreeSeries {
  struct Term {
    double coeff;
    RootedTree tree;
  };
  std::vector<Term> terms;
  double tail_bound = 0.0;  // sum over omitted terms of |coeff|*abar^{|E|}
};

inline constexpr int kSeriesDepthCap = 3;
inline constexpr int kSeriesCountCap = 6;

// Tree-series expansion of g(., K^d): base case (m+k)-stars with
// coefficients (-1)^m/(k! m!), inductive step grafted composites with
// per-component truncation at M_max.
TreeSeries tree_series(const OffspringConfig& config, double abar, int m_max);

struct SeriesValue {
  double value = 0.0;
  double error_bound = 0.0;
};

// Pairwise-summed evaluation; |value - config_prob| <= error_bound when
// w.bound <= the abar the series was built with.
SeriesValue eval_series(const TreeSeries& series, const StepKernel& w,
                        std::optional<std::size_t> root_block = std::nullopt);

}  // namespace kcl
