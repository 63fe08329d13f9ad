#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kcorelab/kernels.hpp"

namespace kcl {

bool is_prime(long q);  // deterministic trial division, q <= 1e7

// Dense weighted graph: n vertices, symmetric bounded weights, zero diagonal.
// Backed either by an explicit triangular array or by a generator rule, so
// large structured instances never materialize n^2 entries.
class WeightedDenseGraph {
 public:
  enum class Backend { explicit_weights, constant, paley, kernel_grid };

  static WeightedDenseGraph constant(long n, double a);
  static WeightedDenseGraph paley(long q);
  // a_{i,j} = kernel value at (i/n, j/n), zero diagonal.
  static WeightedDenseGraph from_kernel(long n, StepKernel w);
  // weights given as strict upper triangle, row-major (i<j).
  static WeightedDenseGraph from_weights(long n, std::vector<double> upper);
  // full n x n matrix; rejects asymmetry and nonzero diagonal.
  static WeightedDenseGraph from_matrix(long n,
                                        const std::vector<double>& full);

  long size() const { return n_; }
  double bound() const { return bound_; }
  Backend backend() const { return backend_; }
  double weight(long i, long j) const;
  // paley backend only: sorted nonzero quadratic residues mod q
  const std::vector<long>& paley_residues() const { return residue_list_; }

  // Action of the embedded kernel W_G on a block profile:
  // y_i = (1/n) * sum_j a_{i,j} x_j.  O(n + M^2) for generator backends.
  void kernel_matvec(std::span<const double> x, std::span<double> y) const;
  std::vector<double> kernel_degrees() const;

 private:
  WeightedDenseGraph() = default;
  long n_ = 0;
  double bound_ = 0.0;
  Backend backend_ = Backend::explicit_weights;
  std::vector<double> upper_;           // explicit backend
  double const_a_ = 0.0;                // constant backend
  std::vector<char> residue_;           // paley backend: residue indicator
  std::vector<long> residue_list_;      // paley backend: sorted residues
  StepKernel kernel_;                   // kernel_grid backend
  std::vector<std::size_t> vert_block_; // kernel_grid: block index per vertex
};

// Unweighted percolation outcome: sorted adjacency lists, no loops.
struct SimpleGraph {
  long n = 0;
  std::vector<std::vector<int>> adj;

  long edge_count() const;
  void check() const;
};

enum class PercolateStrategy { naive, fast };

// Keep each pair {i,j} independently with probability min{c*a_{i,j}/n, 1}.
// naive draws one uniform per pair; fast skips geometrically at the row
// envelope rate p* = min{c*abar/n, 1} and thins. Identical distribution,
// different streams.
SimpleGraph percolate(const WeightedDenseGraph& g, double c,
                      std::uint64_t seed, std::uint64_t trial = 0,
                      PercolateStrategy strategy = PercolateStrategy::fast);

struct KCoreResult {
  std::vector<char> member;  // size n
  long size = 0;
};

// Iterative peeling with a bucket queue; unique maximal subgraph of
// minimum degree >= k.
KCoreResult k_core(const SimpleGraph& g, int k);

// Number of vertices on at least one cycle of length <= max_len (3..12).
long vertices_on_short_cycles(const SimpleGraph& g, int max_len);

// Eq-style embedding: n-block kernel with breaks i/n and values a_{i,j}.
StepKernel embed_graph(const WeightedDenseGraph& g);

// Cut distance between the embedded kernel W_G and the constant kernel
// `level`, without materializing n^2 blocks. Exact for tiny n, otherwise
// the alternating-maximization lower bound (flagged).
CutNormResult cut_distance_to_constant(const WeightedDenseGraph& g,
                                       double level, int restarts = 8,
                                       std::uint64_t seed = 0x51eded);

// One "u v" pair per line, 0-based, ascending.
void write_edge_list(const SimpleGraph& g, const std::string& path);

}  // namespace kcl
