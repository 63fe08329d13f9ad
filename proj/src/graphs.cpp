#include "kcorelab/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>

#include "kcorelab/errors.hpp"
#include "kcorelab/rng.hpp"

namespace kcl {

bool is_prime(long q) {
  if (q > 10000000l) throw_capability("primality check capped at 1e7");
  if (q < 2) return false;
  for (long d = 2; d * d <= q; ++d)
    if (q % d == 0) return false;
  return true;
}

// ---- WeightedDenseGraph ----

WeightedDenseGraph WeightedDenseGraph::constant(long n, double a) {
  if (n < 1) throw_config("graph needs at least one vertex");
  if (!(a >= 0.0)) throw_config("edge weight must be >= 0");
  WeightedDenseGraph g;
  g.n_ = n;
  g.bound_ = a;
  g.backend_ = Backend::constant;
  g.const_a_ = a;
  return g;
}

WeightedDenseGraph WeightedDenseGraph::paley(long q) {
  if (!is_prime(q)) throw_config("paley order must be prime");
  if (q % 4 != 1) throw_config("paley order must be 1 mod 4");
  WeightedDenseGraph g;
  g.n_ = q;
  g.bound_ = 1.0;
  g.backend_ = Backend::paley;
  g.residue_.assign(static_cast<std::size_t>(q), 0);
  for (long i = 1; i <= (q - 1) / 2; ++i) {
    long r = static_cast<long>((static_cast<long long>(i) * i) % q);
    g.residue_[static_cast<std::size_t>(r)] = 1;
  }
  for (long r = 1; r < q; ++r)
    if (g.residue_[static_cast<std::size_t>(r)]) g.residue_list_.push_back(r);
  return g;
}

WeightedDenseGraph WeightedDenseGraph::from_kernel(long n, StepKernel w) {
  if (n < 1) throw_config("graph needs at least one vertex");
  w.validate();
  WeightedDenseGraph g;
  g.n_ = n;
  g.bound_ = w.bound;
  g.backend_ = Backend::kernel_grid;
  g.vert_block_.resize(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    // Cell midpoints; never lands on a block boundary.
    double x = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    g.vert_block_[static_cast<std::size_t>(i)] = w.block_of(x);
  }
  g.kernel_ = std::move(w);
  return g;
}

WeightedDenseGraph WeightedDenseGraph::from_weights(long n,
                                                    std::vector<double> upper) {
  if (n < 1) throw_config("graph needs at least one vertex");
  if (static_cast<long>(upper.size()) != n * (n - 1) / 2)
    throw_config("upper triangle has wrong size");
  WeightedDenseGraph g;
  g.n_ = n;
  g.backend_ = Backend::explicit_weights;
  for (double v : upper) {
    if (!(v >= 0.0)) throw_config("edge weights must be >= 0");
    g.bound_ = std::max(g.bound_, v);
  }
  g.upper_ = std::move(upper);
  return g;
}

WeightedDenseGraph WeightedDenseGraph::from_matrix(
    long n, const std::vector<double>& full) {
  if (static_cast<long>(full.size()) != n * n)
    throw_config("weight matrix has wrong size");
  std::vector<double> upper;
  upper.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (long i = 0; i < n; ++i) {
    if (full[static_cast<std::size_t>(i * n + i)] != 0.0)
      throw_config("weight matrix must have zero diagonal");
    for (long j = i + 1; j < n; ++j) {
      double a = full[static_cast<std::size_t>(i * n + j)];
      double b = full[static_cast<std::size_t>(j * n + i)];
      if (a != b) throw_config("weight matrix must be symmetric");
      upper.push_back(a);
    }
  }
  return from_weights(n, std::move(upper));
}

double WeightedDenseGraph::weight(long i, long j) const {
  if (i == j) return 0.0;
  switch (backend_) {
    case Backend::constant:
      return const_a_;
    case Backend::paley: {
      long d = ((i - j) % n_ + n_) % n_;
      return residue_[static_cast<std::size_t>(d)] ? 1.0 : 0.0;
    }
    case Backend::kernel_grid:
      return kernel_.value(vert_block_[static_cast<std::size_t>(i)],
                           vert_block_[static_cast<std::size_t>(j)]);
    case Backend::explicit_weights: {
      long a = std::min(i, j), b = std::max(i, j);
      // row-major strict upper triangle
      std::size_t idx = static_cast<std::size_t>(a * n_ + b - (a + 1) * (a + 2) / 2);
      return upper_[idx];
    }
  }
  return 0.0;
}

void WeightedDenseGraph::kernel_matvec(std::span<const double> x,
                                       std::span<double> y) const {
  long n = n_;
  double inv_n = 1.0 / static_cast<double>(n);
  switch (backend_) {
    case Backend::constant: {
      double s = std::accumulate(x.begin(), x.end(), 0.0);
      for (long i = 0; i < n; ++i)
        y[static_cast<std::size_t>(i)] =
            const_a_ * (s - x[static_cast<std::size_t>(i)]) * inv_n;
      return;
    }
    case Backend::paley: {
      for (long i = 0; i < n; ++i) {
        double s = 0.0;
        for (long r : residue_list_) {
          long j = i + r;
          if (j >= n) j -= n;
          s += x[static_cast<std::size_t>(j)];
        }
        y[static_cast<std::size_t>(i)] = s * inv_n;
      }
      return;
    }
    case Backend::kernel_grid: {
      std::size_t m = kernel_.blocks();
      std::vector<double> block_sum(m, 0.0);
      for (long i = 0; i < n; ++i)
        block_sum[vert_block_[static_cast<std::size_t>(i)]] +=
            x[static_cast<std::size_t>(i)];
      std::vector<double> row(m, 0.0);
      for (std::size_t h = 0; h < m; ++h) {
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k)
          s += kernel_.value(h, k) * block_sum[k];
        row[h] = s;
      }
      for (long i = 0; i < n; ++i) {
        std::size_t h = vert_block_[static_cast<std::size_t>(i)];
        // subtract the zero diagonal's contribution
        y[static_cast<std::size_t>(i)] =
            (row[h] - kernel_.value(h, h) * x[static_cast<std::size_t>(i)]) *
            inv_n;
      }
      return;
    }
    case Backend::explicit_weights: {
      for (long i = 0; i < n; ++i) {
        double s = 0.0;
        for (long j = 0; j < n; ++j)
          s += weight(i, j) * x[static_cast<std::size_t>(j)];
        y[static_cast<std::size_t>(i)] = s * inv_n;
      }
      return;
    }
  }
}

std::vector<double> WeightedDenseGraph::kernel_degrees() const {
  std::vector<double> ones(static_cast<std::size_t>(n_), 1.0);
  std::vector<double> deg(static_cast<std::size_t>(n_), 0.0);
  kernel_matvec(ones, deg);
  return deg;
}

// ---- SimpleGraph ----

long SimpleGraph::edge_count() const {
  long total = 0;
  for (const auto& a : adj) total += static_cast<long>(a.size());
  return total / 2;
}

void SimpleGraph::check() const {
  for (long v = 0; v < n; ++v) {
    const auto& nb = adj[static_cast<std::size_t>(v)];
    if (!std::is_sorted(nb.begin(), nb.end()))
      throw_config("adjacency lists must be sorted");
    if (std::adjacent_find(nb.begin(), nb.end()) != nb.end())
      throw_config("duplicate edge");
    for (int u : nb) {
      if (u == v) throw_config("self loop");
      const auto& back = adj[static_cast<std::size_t>(u)];
      if (!std::binary_search(back.begin(), back.end(), static_cast<int>(v)))
        throw_config("asymmetric adjacency");
    }
  }
}

// ---- percolation ----

namespace {

// Distinct stream ids per (trial, row) for the fast sampler's sequential
// draws; pairwise streams for the naive sampler use the pair index directly.
std::uint64_t row_stream(std::uint64_t trial, long i) {
  return mix64(0xFA57FA57FA57FA57ULL ^ trial) ^ static_cast<std::uint64_t>(i);
}

}  // namespace

SimpleGraph percolate(const WeightedDenseGraph& g, double c,
                      std::uint64_t seed, std::uint64_t trial,
                      PercolateStrategy strategy) {
  if (!(c >= 0.0)) throw_config("percolation intensity must be >= 0");
  long n = g.size();
  SimpleGraph out;
  out.n = n;
  out.adj.resize(static_cast<std::size_t>(n));
  if (c == 0.0 || g.bound() == 0.0) return out;

  double dn = static_cast<double>(n);
  auto keep_prob = [&](long i, long j) {
    return std::min(c * g.weight(i, j) / dn, 1.0);
  };
  auto add_edge = [&](long i, long j) {
    out.adj[static_cast<std::size_t>(i)].push_back(static_cast<int>(j));
    out.adj[static_cast<std::size_t>(j)].push_back(static_cast<int>(i));
  };

  if (strategy == PercolateStrategy::naive) {
    for (long i = 0; i < n; ++i) {
      for (long j = i + 1; j < n; ++j) {
        std::uint64_t pair = static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n) +
                             static_cast<std::uint64_t>(j);
        double u = u64_to_unit(hash_at(seed, trial, pair));
        if (u < keep_prob(i, j)) add_edge(i, j);
      }
    }
  } else {
    double p_star = std::min(c * g.bound() / dn, 1.0);
    double log1m = std::log1p(-p_star);  // -inf when p_star == 1
    for (long i = 0; i < n; ++i) {
      CounterRng rng(seed, row_stream(trial, i));
      if (p_star >= 1.0) {
        for (long j = i + 1; j < n; ++j)
          if (rng.next_unit() < keep_prob(i, j)) add_edge(i, j);
        continue;
      }
      long j = i;
      while (true) {
        double u = rng.next_unit();
        double skip = std::floor(std::log(u) / log1m);
        if (skip > static_cast<double>(n)) break;
        j += 1 + static_cast<long>(skip);
        if (j >= n) break;
        // thin the envelope down to the true pair probability
        if (rng.next_unit() * p_star < c * g.weight(i, j) / dn) add_edge(i, j);
      }
    }
  }
  for (auto& a : out.adj) std::sort(a.begin(), a.end());
  return out;
}

// ---- k-core ----

KCoreResult k_core(const SimpleGraph& g, int k) {
  if (k < 2) throw_config("k must be >= 2");
  long n = g.n;
  KCoreResult res;
  res.member.assign(static_cast<std::size_t>(n), 1);
  std::vector<int> deg(static_cast<std::size_t>(n));
  for (long v = 0; v < n; ++v)
    deg[static_cast<std::size_t>(v)] =
        static_cast<int>(g.adj[static_cast<std::size_t>(v)].size());

  // bucket queue keyed by current degree, position-swap deletion
  int maxd = 0;
  for (int d : deg) maxd = std::max(maxd, d);
  std::vector<std::vector<int>> bucket(static_cast<std::size_t>(maxd) + 1);
  std::vector<int> pos(static_cast<std::size_t>(n));
  for (long v = 0; v < n; ++v) {
    auto& b = bucket[static_cast<std::size_t>(deg[static_cast<std::size_t>(v)])];
    pos[static_cast<std::size_t>(v)] = static_cast<int>(b.size());
    b.push_back(static_cast<int>(v));
  }
  auto bucket_erase = [&](int v) {
    auto& b = bucket[static_cast<std::size_t>(deg[static_cast<std::size_t>(v)])];
    int p = pos[static_cast<std::size_t>(v)];
    int last = b.back();
    b[static_cast<std::size_t>(p)] = last;
    pos[static_cast<std::size_t>(last)] = p;
    b.pop_back();
  };

  long remaining = n;
  int low = std::min(k - 1, maxd);
  while (true) {
    int d = -1;
    for (int i = 0; i <= low; ++i) {
      if (!bucket[static_cast<std::size_t>(i)].empty()) {
        d = i;
        break;
      }
    }
    if (d < 0) break;
    int v = bucket[static_cast<std::size_t>(d)].back();
    bucket[static_cast<std::size_t>(d)].pop_back();
    res.member[static_cast<std::size_t>(v)] = 0;
    --remaining;
    for (int u : g.adj[static_cast<std::size_t>(v)]) {
      if (!res.member[static_cast<std::size_t>(u)]) continue;
      bucket_erase(u);
      int nd = --deg[static_cast<std::size_t>(u)];
      auto& b = bucket[static_cast<std::size_t>(nd)];
      pos[static_cast<std::size_t>(u)] = static_cast<int>(b.size());
      b.push_back(u);
    }
  }
  res.size = remaining;
  return res;
}

long vertices_on_short_cycles(const SimpleGraph& g, int max_len) {
  if (max_len < 3 || max_len > 12)
    throw_config("cycle length bound must be in [3, 12]");
  long n = g.n;
  long count = 0;
  int depth_cap = max_len / 2;
  std::vector<int> dist(static_cast<std::size_t>(n), -1);
  std::vector<int> branch(static_cast<std::size_t>(n), -1);
  std::vector<int> touched;
  std::vector<int> frontier, next;
  for (long v = 0; v < n; ++v) {
    for (int t : touched) {
      dist[static_cast<std::size_t>(t)] = -1;
      branch[static_cast<std::size_t>(t)] = -1;
    }
    touched.clear();
    dist[static_cast<std::size_t>(v)] = 0;
    touched.push_back(static_cast<int>(v));
    frontier.clear();
    frontier.push_back(static_cast<int>(v));
    // truncated BFS recording distance and the root branch of each vertex
    for (int d = 0; d < depth_cap; ++d) {
      next.clear();
      for (int x : frontier) {
        for (int y : g.adj[static_cast<std::size_t>(x)]) {
          if (dist[static_cast<std::size_t>(y)] < 0) {
            dist[static_cast<std::size_t>(y)] = d + 1;
            branch[static_cast<std::size_t>(y)] =
                (x == static_cast<int>(v)) ? y
                                           : branch[static_cast<std::size_t>(x)];
            touched.push_back(y);
            next.push_back(y);
          }
        }
      }
      std::swap(frontier, next);
    }
    // a non-tree edge between different branches closes a cycle through v
    bool found = false;
    for (std::size_t ti = 1; ti < touched.size() && !found; ++ti) {
      int x = touched[ti];
      for (int y : g.adj[static_cast<std::size_t>(x)]) {
        if (y == static_cast<int>(v) || dist[static_cast<std::size_t>(y)] < 0)
          continue;
        if (branch[static_cast<std::size_t>(x)] !=
                branch[static_cast<std::size_t>(y)] &&
            dist[static_cast<std::size_t>(x)] +
                    dist[static_cast<std::size_t>(y)] + 1 <=
                max_len) {
          found = true;
          break;
        }
      }
    }
    if (found) ++count;
  }
  return count;
}

StepKernel embed_graph(const WeightedDenseGraph& g) {
  long n = g.size();
  if (n > 4096) throw_capability("explicit embedding capped at n = 4096");
  StepKernel w;
  w.breaks.resize(static_cast<std::size_t>(n) + 1);
  for (long i = 0; i <= n; ++i)
    w.breaks[static_cast<std::size_t>(i)] =
        static_cast<double>(i) / static_cast<double>(n);
  w.breaks.back() = 1.0;
  w.values.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j)
      w.values[static_cast<std::size_t>(i * n + j)] = g.weight(i, j);
  w.bound = g.bound();
  return w;
}

namespace {

// Column sums of the difference kernel (a_{hk} - level) over rows in S,
// in matrix units (area scaling applied by the caller).
void diff_colsums(const WeightedDenseGraph& g, double level,
                  const std::vector<char>& in_s, std::vector<double>& col) {
  long n = g.size();
  long s_count = 0;
  for (long h = 0; h < n; ++h) s_count += in_s[static_cast<std::size_t>(h)];
  std::fill(col.begin(), col.end(),
            -level * static_cast<double>(s_count));
  if (g.backend() == WeightedDenseGraph::Backend::paley) {
    // scatter over the residue set instead of touching all n^2 pairs
    for (long h = 0; h < n; ++h) {
      if (!in_s[static_cast<std::size_t>(h)]) continue;
      for (long r : g.paley_residues()) {
        long k = h + r;
        if (k >= n) k -= n;
        col[static_cast<std::size_t>(k)] += 1.0;
      }
    }
    return;
  }
  for (long h = 0; h < n; ++h) {
    if (!in_s[static_cast<std::size_t>(h)]) continue;
    for (long k = 0; k < n; ++k)
      col[static_cast<std::size_t>(k)] += g.weight(h, k);
  }
}

}  // namespace

CutNormResult cut_distance_to_constant(const WeightedDenseGraph& g,
                                       double level, int restarts,
                                       std::uint64_t seed) {
  long n = g.size();
  if (n <= static_cast<long>(kCutNormExactCap)) {
    StepKernel c = StepKernel::constant(level);
    return cut_distance(embed_graph(g), c);
  }
  double area = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  std::vector<double> col(static_cast<std::size_t>(n));
  double best = 0.0;
  auto run_from = [&](std::vector<char> in_s, double sign) {
    double value = -1.0;
    for (int iter = 0; iter < 100; ++iter) {
      diff_colsums(g, level, in_s, col);
      std::vector<char> in_t(static_cast<std::size_t>(n));
      for (long k = 0; k < n; ++k)
        in_t[static_cast<std::size_t>(k)] =
            (sign * col[static_cast<std::size_t>(k)] > 0.0) ? 1 : 0;
      // symmetric matrix: the S-update given T uses the same sums
      diff_colsums(g, level, in_t, col);
      double v = 0.0;
      for (long h = 0; h < n; ++h) {
        in_s[static_cast<std::size_t>(h)] =
            (sign * col[static_cast<std::size_t>(h)] > 0.0) ? 1 : 0;
        if (in_s[static_cast<std::size_t>(h)])
          v += sign * col[static_cast<std::size_t>(h)];
      }
      v *= area;
      if (v <= value) break;
      value = v;
    }
    best = std::max(best, value);
  };
  // Deterministic full-set start: alternation alone cannot escape the
  // S = T fixed points of diagonal-deficiency differences.
  run_from(std::vector<char>(static_cast<std::size_t>(n), 1), +1.0);
  run_from(std::vector<char>(static_cast<std::size_t>(n), 1), -1.0);
  for (int r = 0; r < restarts; ++r) {
    for (double sign : {+1.0, -1.0}) {
      CounterRng rng(seed, static_cast<std::uint64_t>(2 * r) +
                               (sign > 0 ? 0 : 1));
      std::vector<char> in_s(static_cast<std::size_t>(n));
      for (long h = 0; h < n; ++h)
        in_s[static_cast<std::size_t>(h)] = rng.next_u64() & 1u;
      run_from(std::move(in_s), sign);
    }
  }
  return {best, true};
}

void write_edge_list(const SimpleGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw_io("cannot write edge list: " + path);
  for (long u = 0; u < g.n; ++u)
    for (int v : g.adj[static_cast<std::size_t>(u)])
      if (v > u) out << u << " " << v << "\n";
}

}  // namespace kcl
