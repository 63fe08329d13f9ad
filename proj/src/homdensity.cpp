#include "kcorelab/homdensity.hpp"

#include <algorithm>
#include <cmath>

#include "kcorelab/errors.hpp"

namespace kcl {

// ---- trees ----

RootedTree RootedTree::single_vertex() { return RootedTree{{{}}}; }

RootedTree RootedTree::star(int leaves) {
  RootedTree t;
  t.children.resize(static_cast<std::size_t>(leaves) + 1);
  for (int i = 1; i <= leaves; ++i) t.children[0].push_back(i);
  return t;
}

RootedTree RootedTree::graft(int bare_leaves,
                             const std::vector<const RootedTree*>& subtrees) {
  RootedTree t = star(bare_leaves);
  for (const RootedTree* sub : subtrees) {
    int offset = t.node_count();
    t.children[0].push_back(offset);
    for (const auto& ch : sub->children) {
      std::vector<int> shifted;
      shifted.reserve(ch.size());
      for (int c : ch) shifted.push_back(c + offset);
      t.children.push_back(std::move(shifted));
    }
  }
  return t;
}

int OffspringConfig::depth() const {
  int d = 0;
  for (const auto& c : children) d = std::max(d, c.depth() + 1);
  return d;
}

int OffspringConfig::max_count() const {
  int mc = count;
  for (const auto& c : children) mc = std::max(mc, c.max_count());
  return mc;
}

void OffspringConfig::validate() const {
  if (count < 0) throw_config("offspring counts must be >= 0");
  if (!children.empty() &&
      static_cast<int>(children.size()) != count)
    throw_config("config must carry one child config per offspring");
  for (const auto& c : children) c.validate();
}

// ---- homomorphism densities ----

namespace {

// t^x(subtree rooted at `node`) for every root block, bottom-up.
std::vector<double> subtree_density(const RootedTree& t, int node,
                                    const StepKernel& w) {
  std::size_t m = w.blocks();
  std::vector<double> val(m, 1.0);
  for (int child : t.children[static_cast<std::size_t>(node)]) {
    std::vector<double> cv = subtree_density(t, child, w);
    for (std::size_t h = 0; h < m; ++h) {
      double s = 0.0;
      for (std::size_t k = 0; k < m; ++k)
        s += w.value(h, k) * w.length(k) * cv[k];
      val[h] *= s;
    }
  }
  return val;
}

}  // namespace

double tree_density(const RootedTree& t, const StepKernel& w,
                    std::optional<std::size_t> root_block) {
  std::vector<double> val = subtree_density(t, 0, w);
  if (root_block) {
    if (*root_block >= w.blocks()) throw_config("root block out of range");
    return val[*root_block];
  }
  double s = 0.0;
  for (std::size_t h = 0; h < w.blocks(); ++h) s += w.length(h) * val[h];
  return s;
}

// ---- configuration probabilities ----

namespace {

std::vector<double> config_prob_profile(const OffspringConfig& cfg,
                                        const StepKernel& w,
                                        const std::vector<double>& deg) {
  std::size_t m = w.blocks();
  double fact = 1.0;
  for (int i = 2; i <= cfg.count; ++i) fact *= static_cast<double>(i);
  std::vector<double> g(m);
  if (cfg.children.empty()) {
    for (std::size_t h = 0; h < m; ++h)
      g[h] = std::exp(-deg[h]) * std::pow(deg[h], cfg.count) / fact;
    return g;
  }
  for (std::size_t h = 0; h < m; ++h) g[h] = std::exp(-deg[h]) / fact;
  for (const auto& child : cfg.children) {
    std::vector<double> gc = config_prob_profile(child, w, deg);
    for (std::size_t h = 0; h < m; ++h) {
      double s = 0.0;
      for (std::size_t k = 0; k < m; ++k)
        s += w.value(h, k) * w.length(k) * gc[k];
      g[h] *= s;
    }
  }
  return g;
}

}  // namespace

double config_prob(const OffspringConfig& config, const StepKernel& w,
                   std::optional<std::size_t> root_block) {
  config.validate();
  std::vector<double> deg = degree_function(w);
  std::vector<double> g = config_prob_profile(config, w, deg);
  if (root_block) {
    if (*root_block >= w.blocks()) throw_config("root block out of range");
    return g[*root_block];
  }
  double s = 0.0;
  for (std::size_t h = 0; h < w.blocks(); ++h) s += w.length(h) * g[h];
  return s;
}

// ---- tree-series expansion ----

namespace {

struct PartialSeries {
  std::vector<TreeSeries::Term> terms;
  double full_weight = 0.0;   // sum over the whole series of |coeff| abar^|E|
  double trunc_weight = 0.0;  // same sum over the kept terms
};

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= static_cast<double>(i);
  return f;
}

PartialSeries build_series(const OffspringConfig& cfg, double abar,
                           int m_max) {
  int k0 = cfg.count;
  double k0f = factorial(k0);
  PartialSeries out;
  // exp-series weights over the root multiplicity m0
  double pow_abar_k0 = std::pow(abar, k0);
  out.full_weight = pow_abar_k0 * std::exp(abar) / k0f;
  double trunc_exp = 0.0;
  {
    double term = 1.0;
    for (int m0 = 0; m0 <= m_max; ++m0) {
      if (m0 > 0) term *= abar / static_cast<double>(m0);
      trunc_exp += term;
    }
  }

  if (cfg.children.empty()) {
    out.trunc_weight = pow_abar_k0 / k0f * trunc_exp;
    for (int m0 = 0; m0 <= m_max; ++m0) {
      double coeff = ((m0 % 2) ? -1.0 : 1.0) / (k0f * factorial(m0));
      out.terms.push_back({coeff, RootedTree::star(m0 + k0)});
    }
    return out;
  }

  std::vector<PartialSeries> child(cfg.children.size());
  double full_prod = 1.0, trunc_prod = 1.0;
  std::size_t term_budget = static_cast<std::size_t>(m_max) + 1;
  for (std::size_t j = 0; j < cfg.children.size(); ++j) {
    child[j] = build_series(cfg.children[j], abar, m_max);
    full_prod *= child[j].full_weight;
    trunc_prod *= child[j].trunc_weight;
    term_budget *= child[j].terms.size();
    if (term_budget > 1000000)
      throw_capability("tree series exceeds the term budget");
  }
  out.full_weight = pow_abar_k0 * std::exp(abar) / k0f * full_prod;
  out.trunc_weight = pow_abar_k0 / k0f * trunc_exp * trunc_prod;

  // multi-index (m0, m_1, ..., m_{k0}) with every component <= m_max
  std::vector<std::size_t> idx(child.size(), 0);
  for (int m0 = 0; m0 <= m_max; ++m0) {
    double base = ((m0 % 2) ? -1.0 : 1.0) / (k0f * factorial(m0));
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      double coeff = base;
      std::vector<const RootedTree*> subs;
      subs.reserve(child.size());
      for (std::size_t j = 0; j < child.size(); ++j) {
        coeff *= child[j].terms[idx[j]].coeff;
        subs.push_back(&child[j].terms[idx[j]].tree);
      }
      out.terms.push_back({coeff, RootedTree::graft(m0, subs)});
      std::size_t j = 0;
      while (j < idx.size() && ++idx[j] == child[j].terms.size()) {
        idx[j] = 0;
        ++j;
      }
      if (j == idx.size()) break;
    }
  }
  return out;
}

double pairwise_sum(const std::vector<double>& v, std::size_t lo,
                    std::size_t hi) {
  if (hi - lo <= 4) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += v[i];
    return s;
  }
  std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

}  // namespace

TreeSeries tree_series(const OffspringConfig& config, double abar, int m_max) {
  config.validate();
  if (m_max < 0) throw_config("series truncation must be >= 0");
  if (!(abar >= 0.0)) throw_config("abar must be >= 0");
  if (config.depth() > kSeriesDepthCap)
    throw_capability("tree series capped at depth 3");
  if (config.max_count() > kSeriesCountCap)
    throw_capability("tree series capped at offspring count 6");
  PartialSeries p = build_series(config, abar, m_max);
  TreeSeries out;
  out.terms = std::move(p.terms);
  out.tail_bound = std::max(0.0, p.full_weight - p.trunc_weight);
  // tiny slack for the floating subtraction of two close sums
  out.tail_bound += 1e-15 * p.full_weight;
  return out;
}

SeriesValue eval_series(const TreeSeries& series, const StepKernel& w,
                        std::optional<std::size_t> root_block) {
  std::vector<double> vals(series.terms.size());
  for (std::size_t i = 0; i < series.terms.size(); ++i)
    vals[i] = series.terms[i].coeff *
              tree_density(series.terms[i].tree, w, root_block);
  SeriesValue out;
  out.value = vals.empty() ? 0.0 : pairwise_sum(vals, 0, vals.size());
  out.error_bound = series.tail_bound;
  return out;
}

}  // namespace kcl
