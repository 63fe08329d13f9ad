#include "kcorelab/kernels.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "kcorelab/errors.hpp"
#include "kcorelab/rng.hpp"

namespace kcl {

namespace {

constexpr double kBreakTol = 1e-12;  // coincident-boundary merge tolerance

void check_breaks(const std::vector<double>& breaks) {
  if (breaks.size() < 2) throw_config("kernel needs at least one block");
  if (std::abs(breaks.front()) > 0.0 || std::abs(breaks.back() - 1.0) > 0.0)
    throw_config("breaks must start at 0 and end at 1");
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
    if (!(breaks[i] < breaks[i + 1]))
      throw_config("breaks must be strictly increasing");
}

}  // namespace

std::size_t StepKernel::block_of(double x) const {
  // upper_bound on breaks; x == 1 belongs to the last block.
  auto it = std::upper_bound(breaks.begin(), breaks.end(), x);
  std::size_t idx = static_cast<std::size_t>(it - breaks.begin());
  if (idx == 0) return 0;
  if (idx > blocks()) return blocks() - 1;
  return idx - 1;
}

void StepKernel::validate() const {
  check_breaks(breaks);
  std::size_t m = blocks();
  if (values.size() != m * m) throw_config("values must be M x M");
  for (std::size_t h = 0; h < m; ++h) {
    for (std::size_t k = 0; k < m; ++k) {
      double v = value(h, k);
      if (!(v >= 0.0)) throw_config("kernel values must be nonnegative");
      if (v > bound) throw_config("kernel value exceeds declared bound");
      if (v != value(k, h)) throw_config("kernel values must be symmetric");
    }
  }
}

StepKernel StepKernel::constant(double a) {
  if (!(a >= 0.0)) throw_config("constant kernel height must be >= 0");
  return StepKernel{{0.0, 1.0}, {a}, a};
}

StepKernel StepKernel::from_blocks(std::vector<double> breaks,
                                   std::vector<double> values) {
  StepKernel w;
  w.breaks = std::move(breaks);
  w.values = std::move(values);
  w.bound = 0.0;
  for (double v : w.values) w.bound = std::max(w.bound, v);
  w.validate();
  return w;
}

StepKernel scale(const StepKernel& w, double lambda) {
  if (!(lambda >= 0.0)) throw_config("scale factor must be >= 0");
  StepKernel out = w;
  for (double& v : out.values) v *= lambda;
  out.bound *= lambda;
  return out;
}

std::vector<double> degree_function(const StepKernel& w) {
  std::size_t m = w.blocks();
  std::vector<double> deg(m, 0.0);
  for (std::size_t h = 0; h < m; ++h) {
    double s = 0.0;
    for (std::size_t k = 0; k < m; ++k) s += w.value(h, k) * w.length(k);
    deg[h] = s;
  }
  return deg;
}

// ---- cut norm ----

double cut_norm_exact(const SignedStepKernel& u) {
  std::size_t m = u.blocks();
  if (m > kCutNormExactCap)
    throw_capability("exact cut norm capped at 24 blocks; use the heuristic");

  // Pre-weight by areas once; then the objective over subsets S,T is
  // |sum_{h in S, k in T} a[h][k]| and for fixed S the best T picks the
  // columns whose S-restricted sum has the chosen sign.
  std::vector<double> a(m * m);
  for (std::size_t h = 0; h < m; ++h)
    for (std::size_t k = 0; k < m; ++k)
      a[h * m + k] = u.value(h, k) * u.length(h) * u.length(k);

  std::vector<double> colsum(m, 0.0);
  double best = 0.0;
  // Gray-code walk over subsets S keeps the column sums incremental.
  std::uint32_t gray_prev = 0;
  for (std::uint64_t i = 1; i < (1ull << m); ++i) {
    std::uint32_t gray = static_cast<std::uint32_t>(i ^ (i >> 1));
    std::uint32_t diff = gray ^ gray_prev;
    int h = std::countr_zero(diff);
    double sgn = (gray & diff) ? 1.0 : -1.0;
    const double* row = &a[static_cast<std::size_t>(h) * m];
    for (std::size_t k = 0; k < m; ++k) colsum[k] += sgn * row[k];
    gray_prev = gray;

    double pos = 0.0, neg = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      if (colsum[k] > 0.0)
        pos += colsum[k];
      else
        neg -= colsum[k];
    }
    best = std::max({best, pos, neg});
  }
  return best;
}

namespace {

// Alternating maximization from a starting S, strengthened by a 1-opt
// single-row-flip local search; returns a local max of |sum_{S x T}|.
double alternate_from(const std::vector<double>& a, std::size_t m,
                      std::vector<char>& in_s, double sign) {
  std::vector<double> cs(m, 0.0);  // column sums over the current S
  auto recompute = [&] {
    std::fill(cs.begin(), cs.end(), 0.0);
    for (std::size_t h = 0; h < m; ++h)
      if (in_s[h])
        for (std::size_t k = 0; k < m; ++k) cs[k] += a[h * m + k];
  };
  auto value_of = [&] {
    double v = 0.0;
    for (std::size_t k = 0; k < m; ++k) v += std::max(sign * cs[k], 0.0);
    return v;
  };
  recompute();
  double value = value_of();
  std::vector<char> in_t(m, 0);
  for (int round = 0; round < 400; ++round) {
    bool improved = false;
    // Best T for fixed S, then best S for that T.
    for (std::size_t k = 0; k < m; ++k) in_t[k] = sign * cs[k] > 0.0 ? 1 : 0;
    for (std::size_t h = 0; h < m; ++h) {
      double rs = 0.0;
      for (std::size_t k = 0; k < m; ++k)
        if (in_t[k]) rs += a[h * m + k];
      in_s[h] = sign * rs > 0.0 ? 1 : 0;
    }
    recompute();
    double v2 = value_of();
    if (v2 > value + 1e-15) {
      value = v2;
      improved = true;
    }
    // Single-row flips escape alternation fixed points that 1-opt dominates.
    for (std::size_t h = 0; h < m; ++h) {
      double dir = in_s[h] ? -1.0 : 1.0;
      double v_new = 0.0;
      for (std::size_t k = 0; k < m; ++k)
        v_new += std::max(sign * (cs[k] + dir * a[h * m + k]), 0.0);
      if (v_new > value + 1e-15) {
        in_s[h] ^= 1;
        for (std::size_t k = 0; k < m; ++k) cs[k] += dir * a[h * m + k];
        value = v_new;
        improved = true;
      }
    }
    if (!improved) break;
  }
  return value;
}

}  // namespace

double cut_norm_heuristic(const SignedStepKernel& u, int restarts,
                          std::uint64_t seed) {
  std::size_t m = u.blocks();
  std::vector<double> a(m * m);
  for (std::size_t h = 0; h < m; ++h)
    for (std::size_t k = 0; k < m; ++k)
      a[h * m + k] = u.value(h, k) * u.length(h) * u.length(k);

  double best = 0.0;
  for (int r = 0; r < restarts; ++r) {
    CounterRng rng(seed, static_cast<std::uint64_t>(r));
    std::vector<char> in_s(m);
    for (std::size_t h = 0; h < m; ++h) in_s[h] = rng.next_u64() & 1u;
    std::vector<char> s_copy = in_s;
    best = std::max(best, alternate_from(a, m, in_s, +1.0));
    best = std::max(best, alternate_from(a, m, s_copy, -1.0));
  }
  return best;
}

CutNormResult cut_norm(const SignedStepKernel& u, CutNormMode mode,
                       int restarts) {
  if (mode == CutNormMode::exact) return {cut_norm_exact(u), false};
  return {cut_norm_heuristic(u, restarts), true};
}

namespace {

std::vector<double> merge_breaks(const std::vector<double>& a,
                                 const std::vector<double>& b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    double next;
    if (j == b.size() || (i < a.size() && a[i] <= b[j]))
      next = a[i++];
    else
      next = b[j++];
    if (out.empty() || next - out.back() > kBreakTol) out.push_back(next);
  }
  out.front() = 0.0;
  out.back() = 1.0;
  return out;
}

}  // namespace

SignedStepKernel kernel_difference(const StepKernel& a, const StepKernel& b) {
  std::vector<double> breaks = merge_breaks(a.breaks, b.breaks);
  std::size_t m = breaks.size() - 1;
  if (m > 20000) throw_capability("common refinement too large");
  SignedStepKernel d;
  d.breaks = breaks;
  d.values.resize(m * m);
  d.bound = a.bound + b.bound;
  // Sub-block midpoints identify the source blocks robustly.
  std::vector<std::size_t> ia(m), ib(m);
  for (std::size_t h = 0; h < m; ++h) {
    double mid = 0.5 * (breaks[h] + breaks[h + 1]);
    ia[h] = a.block_of(mid);
    ib[h] = b.block_of(mid);
  }
  for (std::size_t h = 0; h < m; ++h)
    for (std::size_t k = 0; k < m; ++k)
      d.values[h * m + k] = a.value(ia[h], ia[k]) - b.value(ib[h], ib[k]);
  return d;
}

CutNormResult cut_distance(const StepKernel& a, const StepKernel& b,
                           int restarts) {
  SignedStepKernel d = kernel_difference(a, b);
  if (d.blocks() <= kCutNormExactCap) return {cut_norm_exact(d), false};
  return {cut_norm_heuristic(d, restarts), true};
}

StepKernel finitary_lower_approx(const KernelPreset& f, int m, int grid_log) {
  if (m < 1) throw_config("refinement level m must be >= 1");
  if (m > 12) throw_capability("dyadic refinement capped at m = 12");
  if (!f.eval) throw_capability("preset is not pointwise evaluable");
  std::size_t cells = std::size_t{1} << m;
  long pts = 1l << grid_log;
  StepKernel out;
  out.breaks.resize(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i)
    out.breaks[i] = static_cast<double>(i) / static_cast<double>(cells);
  out.breaks.back() = 1.0;
  out.values.assign(cells * cells, 0.0);
  double cell_len = 1.0 / static_cast<double>(cells);
  double step = cell_len / static_cast<double>(pts);
  for (std::size_t h = 0; h < cells; ++h) {
    for (std::size_t k = h; k < cells; ++k) {
      // Grid includes the cell's left edges and excludes the right, so the
      // level-(m+1) grid refines this one and minima can only grow.
      double mn = std::numeric_limits<double>::infinity();
      double x0 = out.breaks[h], y0 = out.breaks[k];
      for (long i = 0; i < pts; ++i)
        for (long j = 0; j < pts; ++j)
          mn = std::min(mn, f.eval(x0 + i * step, y0 + j * step));
      out.values[h * cells + k] = mn;
      out.values[k * cells + h] = mn;
    }
  }
  out.bound = f.bound;
  for (double v : out.values) out.bound = std::max(out.bound, v);
  return out;
}

std::vector<int> irreducible_components(const StepKernel& w) {
  std::size_t m = w.blocks();
  std::vector<int> comp(m, -1);
  int next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < m; ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      std::size_t h = stack.back();
      stack.pop_back();
      for (std::size_t k = 0; k < m; ++k) {
        if (comp[k] < 0 && w.value(h, k) > 0.0) {
          comp[k] = next;
          stack.push_back(k);
        }
      }
    }
    ++next;
  }
  return comp;
}

// ---- presets and file format ----

KernelPreset KernelPreset::parse(const std::string& spec) {
  KernelPreset p;
  p.name = spec;
  auto make_step = [&p](StepKernel w) {
    p.bound = w.bound;
    auto sk = std::make_shared<StepKernel>(std::move(w));
    p.eval = [sk](double x, double y) { return sk->at(x, y); };
    p.step = *sk;
  };
  if (spec == "constant" || spec.rfind("constant:", 0) == 0) {
    double a = 1.0;
    if (spec.size() > 9) a = std::stod(spec.substr(9));
    make_step(StepKernel::constant(a));
  } else if (spec == "remark-a") {
    make_step(StepKernel::from_blocks({0.0, 0.5, 1.0},
                                      {2000.0, 0.01, 0.01, 2.0}));
  } else if (spec == "remark-b") {
    make_step(StepKernel::from_blocks({0.0, 0.5, 1.0}, {2.0, 0.0, 0.0, 1.0}));
  } else if (spec == "checkerboard") {
    make_step(StepKernel::from_blocks({0.0, 0.5, 1.0}, {0.0, 1.0, 1.0, 0.0}));
  } else if (spec == "product") {
    p.bound = 1.0;
    p.eval = [](double x, double y) { return x * y; };
  } else {
    make_step(load_kernel(spec));
  }
  return p;
}

StepKernel KernelPreset::resolve(int m_if_not_step) const {
  if (step) return *step;
  return finitary_lower_approx(*this, m_if_not_step);
}

StepKernel parse_kernel_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw_config(std::string("kernel file is not valid JSON: ") + e.what());
  }
  if (!j.contains("breaks") || !j.contains("values"))
    throw_config("kernel file needs \"breaks\" and \"values\"");
  StepKernel w;
  w.breaks = j["breaks"].get<std::vector<double>>();
  for (const auto& row : j["values"]) {
    auto r = row.get<std::vector<double>>();
    w.values.insert(w.values.end(), r.begin(), r.end());
  }
  check_breaks(w.breaks);
  std::size_t m = w.breaks.size() - 1;
  if (w.values.size() != m * m)
    throw_config("kernel \"values\" must be an MxM matrix");
  w.bound = 0.0;
  for (double v : w.values) w.bound = std::max(w.bound, v);
  if (j.contains("bound")) {
    double b = j["bound"].get<double>();
    if (b < w.bound) throw_config("declared bound is below the max entry");
    w.bound = b;
  }
  w.validate();
  return w;
}

std::string kernel_to_json(const StepKernel& w) {
  nlohmann::json j;
  j["breaks"] = w.breaks;
  std::size_t m = w.blocks();
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t h = 0; h < m; ++h) {
    std::vector<double> row(w.values.begin() + h * m,
                            w.values.begin() + (h + 1) * m);
    rows.push_back(row);
  }
  j["values"] = rows;
  j["bound"] = w.bound;
  return j.dump(2);
}

StepKernel load_kernel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_io("cannot open kernel file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_kernel_json(ss.str());
}

void save_kernel(const StepKernel& w, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw_io("cannot write kernel file: " + path);
  out << kernel_to_json(w) << "\n";
}

}  // namespace kcl
