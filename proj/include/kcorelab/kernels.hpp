#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace kcl {

// Symmetric nonnegative step function on [0,1]^2: an interval partition
// given by `breaks` (b_0 = 0 < ... < b_M = 1) and an M x M block matrix.
struct StepKernel {
  std::vector<double> breaks;  // size M+1
  std::vector<double> values;  // row-major M x M, symmetric, >= 0
  double bound = 0.0;          // >= max entry

  std::size_t blocks() const { return breaks.size() - 1; }
  double length(std::size_t h) const { return breaks[h + 1] - breaks[h]; }
  double value(std::size_t h, std::size_t k) const {
    return values[h * blocks() + k];
  }
  double& value(std::size_t h, std::size_t k) {
    return values[h * blocks() + k];
  }
  // Block index of a point x in [0,1].
  std::size_t block_of(double x) const;
  double at(double x, double y) const {
    return value(block_of(x), block_of(y));
  }

  void validate() const;  // throws Error(config) on invariant violation

  static StepKernel constant(double a);
  static StepKernel from_blocks(std::vector<double> breaks,
                                std::vector<double> values);
};

// Difference of two kernels on a common refinement; entries may be negative.
struct SignedStepKernel {
  std::vector<double> breaks;
  std::vector<double> values;
  double bound = 0.0;

  std::size_t blocks() const { return breaks.size() - 1; }
  double length(std::size_t h) const { return breaks[h + 1] - breaks[h]; }
  double value(std::size_t h, std::size_t k) const {
    return values[h * blocks() + k];
  }
};

// Named kernel families usable everywhere a kernel input is accepted.
//   constant:<a>    constant kernel of height a (default 1)
//   remark-a        2000 / 2 / 0.01 two-block kernel
//   remark-b        2 / 1 / 0 two-block kernel
//   checkerboard    0/1 checkerboard on half-blocks
//   product         f(x,y) = x*y (not a step function)
//   <path>          step-kernel file
struct KernelPreset {
  std::string name;
  std::optional<StepKernel> step;        // set when the preset is a step kernel
  std::function<double(double, double)> eval;  // always set
  double bound = 0.0;

  static KernelPreset parse(const std::string& spec);
  // Resolving a non-step preset discretizes via finitary_lower_approx.
  StepKernel resolve(int m_if_not_step = 7) const;
};

StepKernel scale(const StepKernel& w, double lambda);

// Component h is the row integral of block h: sum_k values[h][k]*len(k).
std::vector<double> degree_function(const StepKernel& w);

struct CutNormResult {
  double value = 0.0;
  bool lower_bound = false;  // true when the heuristic was used
};

inline constexpr std::size_t kCutNormExactCap = 24;

// Exact sup over block subsets S,T of |sum u[h][k]*area(h,k)|.
// Requires blocks() <= kCutNormExactCap.
double cut_norm_exact(const SignedStepKernel& u);

// Alternating maximization from seeded random restarts; a certified lower
// bound on the cut norm.
double cut_norm_heuristic(const SignedStepKernel& u, int restarts = 32,
                          std::uint64_t seed = 0x9d2c5680u);

enum class CutNormMode { exact, heuristic };
CutNormResult cut_norm(const SignedStepKernel& u, CutNormMode mode,
                       int restarts = 32);

SignedStepKernel kernel_difference(const StepKernel& a, const StepKernel& b);

// Cut norm of a-b on the common refinement; falls back to the heuristic
// (flagged lower_bound) when the refinement exceeds the exact-mode cap.
CutNormResult cut_distance(const StepKernel& a, const StepKernel& b,
                           int restarts = 32);

// Step kernel on the dyadic partition into 2^m intervals; each block value
// is the minimum of f over a (2^grid_log)^2 evaluation grid per cell, so the
// output is <= f at every grid point and nondecreasing in m at shared points.
StepKernel finitary_lower_approx(const KernelPreset& f, int m,
                                 int grid_log = 4);

// Component id per block of the graph h~k iff values[h][k] > 0.
std::vector<int> irreducible_components(const StepKernel& w);

// Step-kernel file format: {"breaks":[...], "values":[[...]]}, optional
// "bound" (defaults to the max entry).
StepKernel load_kernel(const std::string& path);
void save_kernel(const StepKernel& w, const std::string& path);
StepKernel parse_kernel_json(const std::string& text);
std::string kernel_to_json(const StepKernel& w);

}  // namespace kcl
