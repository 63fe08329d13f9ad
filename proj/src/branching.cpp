#include "kcorelab/branching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kcorelab/errors.hpp"
#include "kcorelab/rng.hpp"

namespace kcl {

// ---- Poisson tails ----

double psi(int k, double lambda) {
  if (k < 0) throw_config("psi needs k >= 0");
  if (!(lambda >= 0.0)) throw_config("psi needs lambda >= 0");
  if (k == 0) return 1.0;
  if (lambda == 0.0) return 0.0;
  if (lambda <= 700.0) {
    // complement by direct pmf summation, compensated
    double term = std::exp(-lambda);
    double sum = term, comp = 0.0;
    for (int l = 1; l < k; ++l) {
      term *= lambda / static_cast<double>(l);
      double y = term - comp;
      double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
    return std::max(0.0, 1.0 - sum);
  }
  // log-space for extreme rates where e^{-lambda} underflows
  double sum = 0.0;
  for (int l = 0; l < k; ++l)
    sum += std::exp(-lambda + l * std::log(lambda) - std::lgamma(l + 1.0));
  return std::max(0.0, 1.0 - sum);
}

double psi_tail(int k, double c) { return psi(k + 1, c); }

// ---- kernel operators ----

namespace {

class StepKernelOperator final : public KernelOperator {
 public:
  explicit StepKernelOperator(StepKernel w) : w_(std::move(w)) {
    w_.validate();
    std::size_t m = w_.blocks();
    len_.resize(m);
    for (std::size_t h = 0; h < m; ++h) len_[h] = w_.length(h);
  }
  std::size_t blocks() const override { return w_.blocks(); }
  double block_length(std::size_t h) const override { return len_[h]; }
  double bound() const override { return w_.bound; }
  void apply(std::span<const double> x, std::span<double> y) const override {
    std::size_t m = w_.blocks();
    for (std::size_t h = 0; h < m; ++h) {
      double s = 0.0;
      for (std::size_t k = 0; k < m; ++k)
        s += w_.value(h, k) * len_[k] * x[k];
      y[h] = s;
    }
  }
  std::vector<double> rate_matrix() const override {
    std::size_t m = w_.blocks();
    if (m > 4096) throw_capability("rate matrix capped at 4096 blocks");
    std::vector<double> lam(m * m);
    for (std::size_t h = 0; h < m; ++h)
      for (std::size_t k = 0; k < m; ++k)
        lam[h * m + k] = w_.value(h, k) * len_[k];
    return lam;
  }

 private:
  StepKernel w_;
  std::vector<double> len_;
};

class GraphKernelOperator final : public KernelOperator {
 public:
  explicit GraphKernelOperator(WeightedDenseGraph g) : g_(std::move(g)) {}
  std::size_t blocks() const override {
    return static_cast<std::size_t>(g_.size());
  }
  double block_length(std::size_t) const override {
    return 1.0 / static_cast<double>(g_.size());
  }
  double bound() const override { return g_.bound(); }
  void apply(std::span<const double> x, std::span<double> y) const override {
    g_.kernel_matvec(x, y);
  }
  std::vector<double> rate_matrix() const override {
    long n = g_.size();
    if (n > 4096) throw_capability("rate matrix capped at 4096 vertices");
    std::vector<double> lam(static_cast<std::size_t>(n) *
                            static_cast<std::size_t>(n));
    double inv_n = 1.0 / static_cast<double>(n);
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < n; ++j)
        lam[static_cast<std::size_t>(i * n + j)] = g_.weight(i, j) * inv_n;
    return lam;
  }

 private:
  WeightedDenseGraph g_;
};

}  // namespace

std::shared_ptr<const KernelOperator> make_operator(StepKernel w) {
  return std::make_shared<StepKernelOperator>(std::move(w));
}

std::shared_ptr<const KernelOperator> make_operator(WeightedDenseGraph g) {
  return std::make_shared<GraphKernelOperator>(std::move(g));
}

BranchingSpec BranchingSpec::for_kernel(StepKernel w, double c) {
  BranchingSpec s;
  s.op = make_operator(std::move(w));
  s.scale = c;
  return s;
}

BranchingSpec BranchingSpec::for_graph(WeightedDenseGraph g, double c) {
  BranchingSpec s;
  s.op = make_operator(std::move(g));
  s.scale = c;
  return s;
}

std::vector<double> BranchingSpec::effective_root_masses() const {
  std::size_t m = op->blocks();
  if (root_masses.empty()) {
    std::vector<double> out(m);
    for (std::size_t h = 0; h < m; ++h) out[h] = op->block_length(h);
    return out;
  }
  return root_masses;
}

void BranchingSpec::validate() const {
  if (!op) throw_config("branching spec needs a kernel");
  if (!(scale >= 0.0)) throw_config("scale must be >= 0");
  if (!(rate_adjustment >= 1.0)) throw_config("rate adjustment must be >= 1");
  if (!root_masses.empty()) {
    if (root_masses.size() != op->blocks())
      throw_config("root distribution size mismatch");
    double sum = 0.0;
    for (double v : root_masses) {
      if (!(v >= 0.0)) throw_config("root masses must be >= 0");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw_config("root masses must sum to 1");
  }
}

// ---- fixed-point recursion ----

namespace {

void psi_step(const BranchingSpec& spec, int k_minus_1,
              const std::vector<double>& beta, std::vector<double>& rates,
              std::vector<double>& out) {
  double eff = spec.scale * spec.rate_adjustment;
  spec.op->apply(beta, rates);
  for (std::size_t h = 0; h < out.size(); ++h)
    out[h] = psi(k_minus_1, eff * rates[h]);
}

}  // namespace

BetaProfile beta_depth(const BranchingSpec& spec, int k, int d) {
  spec.validate();
  if (k < 2) throw_config("k must be >= 2");
  if (d < 0) throw_config("depth must be >= 0");
  std::size_t m = spec.op->blocks();
  BetaProfile out;
  out.depth = d;
  out.beta.assign(m, 1.0);
  std::vector<double> rates(m), next(m);
  for (int i = 0; i < d; ++i) {
    psi_step(spec, k - 1, out.beta, rates, next);
    out.beta.swap(next);
  }
  out.iterations = d;
  return out;
}

BetaProfile beta_limit(const BranchingSpec& spec, int k, double tol,
                       long max_iter) {
  spec.validate();
  if (k < 2) throw_config("k must be >= 2");
  std::size_t m = spec.op->blocks();
  BetaProfile out;
  out.depth = -1;
  out.beta.assign(m, 1.0);
  std::vector<double> rates(m), next(m);
  out.converged = false;
  for (long it = 0; it < max_iter; ++it) {
    psi_step(spec, k - 1, out.beta, rates, next);
    double delta = 0.0;
    for (std::size_t h = 0; h < m; ++h)
      delta = std::max(delta, std::abs(next[h] - out.beta[h]));
    out.beta.swap(next);
    out.iterations = it + 1;
    out.residual = delta;
    if (delta < tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

namespace {

ProbResult prob_from_beta(const BranchingSpec& spec, int k,
                          const BetaProfile& beta) {
  std::size_t m = spec.op->blocks();
  std::vector<double> rates(m);
  double eff = spec.scale * spec.rate_adjustment;
  spec.op->apply(beta.beta, rates);
  std::vector<double> masses = spec.effective_root_masses();
  double p = 0.0;
  for (std::size_t h = 0; h < m; ++h) p += masses[h] * psi(k, eff * rates[h]);
  ProbResult out;
  out.value = p;
  out.converged = beta.converged;
  out.residual = beta.residual;
  out.iterations = beta.iterations;
  return out;
}

}  // namespace

ProbResult prob_a_depth(const BranchingSpec& spec, int k, int d) {
  if (d < 1) throw_config("depth must be >= 1");
  return prob_from_beta(spec, k, beta_depth(spec, k, d - 1));
}

ProbResult prob_a_limit(const BranchingSpec& spec, int k, double tol,
                        long max_iter) {
  return prob_from_beta(spec, k, beta_limit(spec, k, tol, max_iter));
}

// ---- Monte Carlo ----

SimResult simulate_and_check(const BranchingSpec& spec, int k, int d,
                             long trials, long pop_cap, std::uint64_t seed) {
  spec.validate();
  if (k < 2) throw_config("k must be >= 2");
  if (d < 1) throw_config("depth must be >= 1");
  if (trials < 1) throw_config("trials must be >= 1");
  if (pop_cap < 1) throw_config("population cap must be >= 1");

  std::size_t m = spec.op->blocks();
  double eff = spec.scale * spec.rate_adjustment;
  std::vector<double> lam = spec.op->rate_matrix();
  for (double& v : lam) v *= eff;
  std::vector<double> masses = spec.effective_root_masses();
  std::vector<double> root_cdf(m);
  std::partial_sum(masses.begin(), masses.end(), root_cdf.begin());

  struct Node {
    std::size_t block;
    long first_child = -1;
    int n_children = 0;
  };

  long successes = 0, cap_hits = 0;
  std::vector<Node> nodes;
  std::vector<long> gen_start;
  for (long t = 0; t < trials; ++t) {
    CounterRng rng(seed, static_cast<std::uint64_t>(t));
    nodes.clear();
    gen_start.clear();
    double u = rng.next_unit();
    std::size_t root_block =
        static_cast<std::size_t>(std::lower_bound(root_cdf.begin(),
                                                  root_cdf.end(), u) -
                                 root_cdf.begin());
    if (root_block >= m) root_block = m - 1;
    nodes.push_back({root_block, -1, 0});
    gen_start.push_back(0);
    bool truncated = false;
    long lo = 0, hi = 1;
    for (int g = 0; g < d && !truncated; ++g) {
      gen_start.push_back(hi);
      for (long idx = lo; idx < hi && !truncated; ++idx) {
        nodes[static_cast<std::size_t>(idx)].first_child =
            static_cast<long>(nodes.size());
        int total = 0;
        std::size_t hb = nodes[static_cast<std::size_t>(idx)].block;
        for (std::size_t j = 0; j < m; ++j) {
          long cnt = rng.poisson(lam[hb * m + j]);
          for (long cidx = 0; cidx < cnt; ++cidx) {
            if (static_cast<long>(nodes.size()) >= pop_cap) {
              truncated = true;
              break;
            }
            nodes.push_back({j, -1, 0});
            ++total;
          }
          if (truncated) break;
        }
        nodes[static_cast<std::size_t>(idx)].n_children = total;
      }
      lo = hi;
      hi = static_cast<long>(nodes.size());
      if (lo == hi) break;  // extinct before depth d
    }
    if (truncated) {
      ++cap_hits;  // scored as failure
      continue;
    }
    // score A_d bottom-up: a node at generation g < d qualifies when at
    // least k-1 of its children qualify; generation-d nodes qualify freely
    std::vector<char> qual(nodes.size(), 1);
    int gens = static_cast<int>(gen_start.size()) - 1;
    for (int g = std::min(gens, d) - 1; g >= 1; --g) {
      long s = gen_start[static_cast<std::size_t>(g)];
      long e = (g + 1 < static_cast<int>(gen_start.size()))
                   ? gen_start[static_cast<std::size_t>(g + 1)]
                   : static_cast<long>(nodes.size());
      for (long idx = s; idx < e; ++idx) {
        const Node& nd = nodes[static_cast<std::size_t>(idx)];
        int q = 0;
        for (int ci = 0; ci < nd.n_children; ++ci)
          q += qual[static_cast<std::size_t>(nd.first_child + ci)];
        qual[static_cast<std::size_t>(idx)] = (q >= k - 1) ? 1 : 0;
      }
    }
    const Node& root = nodes[0];
    int q = 0;
    for (int ci = 0; ci < root.n_children; ++ci)
      q += qual[static_cast<std::size_t>(root.first_child + ci)];
    if (q >= k) ++successes;
  }

  SimResult out;
  out.trials = trials;
  out.cap_hits = cap_hits;
  out.estimate = static_cast<double>(successes) / static_cast<double>(trials);
  out.std_error = std::sqrt(out.estimate * (1.0 - out.estimate) /
                            static_cast<double>(trials));
  out.cap_warning =
      static_cast<double>(cap_hits) > 0.01 * static_cast<double>(trials);
  return out;
}

// ---- threshold scan ----

ThresholdResult threshold_scan(const StepKernel& kernel, int k, double c_lo,
                               double c_hi, double eps_pa, double tol_c,
                               int grid_points) {
  if (!(c_lo < c_hi)) throw_config("need c_lo < c_hi");
  if (!(eps_pa > 0.0)) throw_config("eps_pa must be > 0");
  if (!(tol_c > 0.0)) throw_config("tol_c must be > 0");
  auto op = make_operator(kernel);
  ThresholdResult out;
  auto pa = [&](double c) {
    BranchingSpec spec;
    spec.op = op;
    spec.scale = c;
    ProbResult r = prob_a_limit(spec, k);
    if (!r.converged) out.any_unconverged = true;
    return r.value;
  };

  if (grid_points >= 2) {
    for (int i = 0; i < grid_points; ++i) {
      double c = c_lo + (c_hi - c_lo) * static_cast<double>(i) /
                            static_cast<double>(grid_points - 1);
      out.curve.emplace_back(c, pa(c));
    }
  }

  if (!(pa(c_hi) > eps_pa)) {
    out.found = false;  // no threshold in range
    return out;
  }
  double lo = c_lo, hi = c_hi;
  if (pa(c_lo) > eps_pa) {
    out.found = true;
    out.c_star = c_lo;
    return out;
  }
  while (hi - lo > tol_c) {
    double mid = 0.5 * (lo + hi);
    if (pa(mid) > eps_pa)
      hi = mid;
    else
      lo = mid;
  }
  out.found = true;
  out.c_star = 0.5 * (lo + hi);
  return out;
}

}  // namespace kcl
