#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "kcorelab/graphs.hpp"
#include "kcorelab/kernels.hpp"

namespace kcl {

// Block-discretized symmetric kernel seen only through its action
// y_h = sum_j K[h][j] * len(j) * x_j. Lets the fixed-point recursion run
// on an embedded graph kernel without materializing n^2 block values.
class KernelOperator {
 public:
  virtual ~KernelOperator() = default;
  virtual std::size_t blocks() const = 0;
  virtual double block_length(std::size_t h) const = 0;
  virtual void apply(std::span<const double> x, std::span<double> y) const = 0;
  virtual double bound() const = 0;
  // Explicit offspring-rate matrix lam[h][j] = K[h][j]*len(j); only needed
  // by the Monte Carlo sampler, so huge operators may refuse.
  virtual std::vector<double> rate_matrix() const = 0;
};

std::shared_ptr<const KernelOperator> make_operator(StepKernel w);
std::shared_ptr<const KernelOperator> make_operator(WeightedDenseGraph g);

// Multi-type Poisson branching process X^{scale * rate_adjustment * K}.
struct BranchingSpec {
  std::shared_ptr<const KernelOperator> op;
  double scale = 1.0;
  double rate_adjustment = 1.0;       // rho_n * n when emulating the
                                      // dominating process; default 1
  std::vector<double> root_masses;    // empty = block lengths

  static BranchingSpec for_kernel(StepKernel w, double c);
  static BranchingSpec for_graph(WeightedDenseGraph g, double c);

  std::vector<double> effective_root_masses() const;
  void validate() const;
};

// P(Poisson(lambda) >= k).
double psi(int k, double lambda);
// Upper tail sum_{l>k} e^{-c} c^l / l!  ==  psi(k+1, c).
double psi_tail(int k, double c);

struct BetaProfile {
  std::vector<double> beta;   // per block, in [0,1]
  int depth = -1;             // -1 = limit mode
  bool converged = true;      // limit mode only
  double residual = 0.0;
  long iterations = 0;
};

// beta_0 == 1; beta_d(h) = Psi_{k-1}(sum_j effK[h][j] len(j) beta_{d-1}(j)).
BetaProfile beta_depth(const BranchingSpec& spec, int k, int d);
// Iterates from 1 to the maximal fixed point of a = Psi_{k-1}(int W a).
BetaProfile beta_limit(const BranchingSpec& spec, int k, double tol = 1e-12,
                       long max_iter = 100000);

struct ProbResult {
  double value = 0.0;
  bool converged = true;
  double residual = 0.0;
  long iterations = 0;
};

// P(A_d) = sum_h rootMass(h) Psi_k(sum_j effK[h][j] len(j) beta_{d-1}(j)).
ProbResult prob_a_depth(const BranchingSpec& spec, int k, int d);
ProbResult prob_a_limit(const BranchingSpec& spec, int k, double tol = 1e-12,
                        long max_iter = 100000);

struct SimResult {
  double estimate = 0.0;
  double std_error = 0.0;
  long cap_hits = 0;
  long trials = 0;
  bool cap_warning = false;  // cap hits > 1% of trials
};

// Monte Carlo estimate of P(A_d): samples the typed tree to depth d (or
// pop_cap nodes) and scores event A_d; truncated trials count as failures.
SimResult simulate_and_check(const BranchingSpec& spec, int k, int d,
                             long trials, long pop_cap, std::uint64_t seed);

struct ThresholdResult {
  bool found = false;
  double c_star = 0.0;
  std::vector<std::pair<double, double>> curve;  // (c, P(A)) grid
  bool any_unconverged = false;
};

// Bisection for the smallest c in [c_lo, c_hi] with P(A) > eps_pa, plus a
// uniform grid of (c, P(A)) pairs for jump inspection.
ThresholdResult threshold_scan(const StepKernel& kernel, int k, double c_lo,
                               double c_hi, double eps_pa = 1e-8,
                               double tol_c = 1e-4, int grid_points = 41);

}  // namespace kcl
