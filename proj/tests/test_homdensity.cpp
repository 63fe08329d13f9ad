#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "kcorelab/errors.hpp"
#include "kcorelab/graphs.hpp"
#include "kcorelab/homdensity.hpp"
#include "kcorelab/kernels.hpp"

namespace {

// Monte Carlo oracle for config_prob: simulate the typed Poisson tree and
// score the ordered event {root bears exactly count children and child j
// realizes config.children[j]}.
struct TypedSampler {
  const kcl::StepKernel& w;
  std::mt19937_64 rng;

  bool realizes(std::size_t block, const kcl::OffspringConfig& cfg) {
    const std::size_t m = w.blocks();
    double lam = 0.0;
    std::vector<double> rate(m);
    for (std::size_t j = 0; j < m; ++j) {
      rate[j] = w.value(block, j) * w.length(j);
      lam += rate[j];
    }
    std::poisson_distribution<int> pois(lam);
    if (pois(rng) != cfg.count) return false;
    if (cfg.children.empty()) return true;
    std::discrete_distribution<std::size_t> type(rate.begin(), rate.end());
    for (const kcl::OffspringConfig& child : cfg.children)
      if (!realizes(type(rng), child)) return false;
    return true;
  }
};

}  // namespace

TEST_CASE("rooted tree builders") {
  kcl::RootedTree s3 = kcl::RootedTree::star(3);
  CHECK(s3.node_count() == 4);
  CHECK(s3.edge_count() == 3);
  CHECK(s3.children[0].size() == 3);
  CHECK(kcl::RootedTree::single_vertex().edge_count() == 0);
  kcl::RootedTree path = kcl::RootedTree::graft(0, {&s3});
  // grafting hangs the whole subtree under a fresh root
  CHECK(path.node_count() == 5);
  CHECK(path.children[0].size() == 1);
  kcl::RootedTree both = kcl::RootedTree::graft(2, {&s3, &s3});
  CHECK(both.node_count() == 1 + 2 + 2 * 4);
  CHECK(both.children[0].size() == 4);
}

TEST_CASE("tree_density closed forms") {
  kcl::StepKernel c2 = kcl::StepKernel::constant(2.0);
  // t(star(m), const a) = a^m
  CHECK(kcl::tree_density(kcl::RootedTree::star(1), c2) == doctest::Approx(2.0));
  CHECK(kcl::tree_density(kcl::RootedTree::star(3), c2) == doctest::Approx(8.0));
  CHECK(kcl::tree_density(kcl::RootedTree::single_vertex(), c2) ==
        doctest::Approx(1.0));

  kcl::StepKernel cb = kcl::KernelPreset::parse("checkerboard").resolve();
  CHECK(kcl::tree_density(kcl::RootedTree::star(1), cb) == doctest::Approx(0.5));
  // degree is 1/2 everywhere, so any m-edge tree has density 2^{-m}
  kcl::RootedTree s2 = kcl::RootedTree::star(2);
  kcl::RootedTree chain = kcl::RootedTree::graft(0, {&s2});
  CHECK(kcl::tree_density(chain, cb) == doctest::Approx(0.125));

  // rooted density with a prescribed root block: t^x(star(m)) = deg(x)^m
  kcl::StepKernel b = kcl::KernelPreset::parse("remark-b").resolve();
  std::vector<double> deg = kcl::degree_function(b);
  for (std::size_t h : {std::size_t(0), std::size_t(1)})
    CHECK(kcl::tree_density(kcl::RootedTree::star(2), b, h) ==
          doctest::Approx(deg[h] * deg[h]).epsilon(1e-14));
  // mixed density integrates the rooted one
  CHECK(kcl::tree_density(kcl::RootedTree::star(2), b) ==
        doctest::Approx(0.5 * deg[0] * deg[0] + 0.5 * deg[1] * deg[1]));
}

TEST_CASE("root-join multiplicativity of rooted densities") {
  // joining branch sets at a common root multiplies rooted densities:
  // graft(m1+m2, {A..., B...}) factors as graft(m1, {A...}) * graft(m2, {B...})
  kcl::StepKernel w = kcl::StepKernel::from_blocks(
      {0.0, 0.3, 1.0}, {1.2, 0.4, 0.4, 2.0});
  kcl::RootedTree s2 = kcl::RootedTree::star(2);
  kcl::RootedTree left = kcl::RootedTree::graft(1, {&s2});
  kcl::RootedTree right = kcl::RootedTree::graft(0, {&s2});
  kcl::RootedTree joined = kcl::RootedTree::graft(1, {&s2, &s2});
  for (std::size_t h : {std::size_t(0), std::size_t(1)}) {
    CHECK(kcl::tree_density(joined, w, h) ==
          doctest::Approx(kcl::tree_density(left, w, h) *
                          kcl::tree_density(right, w, h))
              .epsilon(1e-13));
    // stars: t^x(star(2)) * t^x(star(3)) = t^x(star(5))
    CHECK(kcl::tree_density(kcl::RootedTree::star(5), w, h) ==
          doctest::Approx(kcl::tree_density(kcl::RootedTree::star(2), w, h) *
                          kcl::tree_density(kcl::RootedTree::star(3), w, h))
              .epsilon(1e-13));
  }
}

TEST_CASE("config_prob closed forms") {
  const double c = 1.3;
  kcl::StepKernel wc = kcl::StepKernel::constant(c);
  // depth-1: Poisson(c) pmf
  for (int k0 = 0; k0 <= 6; ++k0) {
    double expect = std::exp(-c + k0 * std::log(c) - std::lgamma(k0 + 1));
    CHECK(kcl::config_prob(kcl::OffspringConfig::leaf(k0), wc) ==
          doctest::Approx(expect).epsilon(1e-10));
  }
  // depth-2 chain: root has one child which is childless -> c * e^{-2c}
  kcl::OffspringConfig chain{1, {kcl::OffspringConfig::leaf(0)}};
  CHECK(kcl::config_prob(chain, wc) ==
        doctest::Approx(c * std::exp(-2.0 * c)).epsilon(1e-10));

  // depth-1 normalization
  double total = 0.0;
  for (int k0 = 0; k0 <= 40; ++k0)
    total += kcl::config_prob(kcl::OffspringConfig::leaf(k0), wc);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  // malformed config: child list size must be 0 or count
  kcl::OffspringConfig bad{2, {kcl::OffspringConfig::leaf(0)}};
  CHECK_THROWS_AS(bad.validate(), kcl::Error);
  CHECK_THROWS_AS(kcl::config_prob(bad, wc), kcl::Error);
}

TEST_CASE("config_prob matches Monte Carlo on a depth-2 two-block battery") {
  kcl::StepKernel w = kcl::StepKernel::from_blocks(
      {0.0, 0.4, 1.0}, {1.8, 0.7, 0.7, 1.1});
  std::vector<kcl::OffspringConfig> battery = {
      kcl::OffspringConfig::leaf(0),
      kcl::OffspringConfig::leaf(2),
      {1, {kcl::OffspringConfig::leaf(0)}},
      {1, {kcl::OffspringConfig::leaf(1)}},
      {2, {kcl::OffspringConfig::leaf(0), kcl::OffspringConfig::leaf(1)}},
      {2, {kcl::OffspringConfig::leaf(2), kcl::OffspringConfig::leaf(0)}},
      {3,
       {kcl::OffspringConfig::leaf(1), kcl::OffspringConfig::leaf(1),
        kcl::OffspringConfig::leaf(0)}},
  };
  const long trials = 200000;
  int idx = 0;
  for (const kcl::OffspringConfig& cfg : battery) {
    for (std::size_t h : {std::size_t(0), std::size_t(1)}) {
      double exact = kcl::config_prob(cfg, w, h);
      TypedSampler sampler{w, std::mt19937_64(900 + 10 * idx + h)};
      long hits = 0;
      for (long t = 0; t < trials; ++t)
        if (sampler.realizes(h, cfg)) ++hits;
      double est = double(hits) / trials;
      double sigma = std::sqrt(std::max(exact * (1 - exact), 1e-12) / trials);
      CHECK(std::fabs(est - exact) <= 3.0 * sigma);
    }
    ++idx;
  }
}

TEST_CASE("tree_series base-case coefficients") {
  for (int k0 : {0, 1, 3}) {
    kcl::TreeSeries s =
        kcl::tree_series(kcl::OffspringConfig::leaf(k0), 2.0, 4);
    REQUIRE(s.terms.size() == 5);  // m = 0..4
    double kfact = std::tgamma(k0 + 1.0);
    CHECK(s.terms[0].coeff == doctest::Approx(1.0 / kfact));
    CHECK(s.terms[0].tree.edge_count() == k0);
    CHECK(s.terms[1].coeff == doctest::Approx(-1.0 / kfact));
    CHECK(s.terms[1].tree.edge_count() == k0 + 1);
    CHECK(s.terms[2].coeff == doctest::Approx(0.5 / kfact));
    CHECK(s.tail_bound > 0.0);
  }
}

TEST_CASE("series evaluation converges to the exact probability") {
  // leaf(1) on the constant kernel: partial sums of c * e^{-c}
  const double c = 0.8;
  kcl::StepKernel wc = kcl::StepKernel::constant(c);
  kcl::TreeSeries s = kcl::tree_series(kcl::OffspringConfig::leaf(1), c, 20);
  kcl::SeriesValue v = kcl::eval_series(s, wc);
  CHECK(std::fabs(v.value - c * std::exp(-c)) < 1e-12);
  CHECK(v.error_bound < 1e-10);
}

TEST_CASE("eval_series honors its tail bound on random kernels") {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> val(0.0, 1.2);
  std::uniform_int_distribution<int> cnt(0, 3);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<double> vals(9);
    for (std::size_t h = 0; h < 3; ++h)
      for (std::size_t j = h; j < 3; ++j)
        vals[h * 3 + j] = vals[j * 3 + h] = val(rng);
    kcl::StepKernel w =
        kcl::StepKernel::from_blocks({0.0, 0.25, 0.6, 1.0}, vals);
    kcl::OffspringConfig cfg;
    cfg.count = cnt(rng);
    if (rep % 2 == 1 && cfg.count > 0)
      for (int i = 0; i < cfg.count; ++i)
        cfg.children.push_back(kcl::OffspringConfig::leaf(cnt(rng)));
    int m_max = 6 + rep % 6;
    kcl::TreeSeries s = kcl::tree_series(cfg, w.bound, m_max);
    for (auto root : std::vector<std::optional<std::size_t>>{
             std::nullopt, std::size_t(0), std::size_t(2)}) {
      double exact = kcl::config_prob(cfg, w, root);
      kcl::SeriesValue v = kcl::eval_series(s, w, root);
      CHECK(std::fabs(v.value - exact) <= v.error_bound + 1e-13);
    }
  }
}

TEST_CASE("Paley tree densities converge to the constant-half limit") {
  // a few trees with up to 6 edges
  kcl::RootedTree s2 = kcl::RootedTree::star(2);
  kcl::RootedTree s3 = kcl::RootedTree::star(3);
  kcl::RootedTree spider = kcl::RootedTree::graft(0, {&s2, &s2});  // 6 edges
  std::vector<const kcl::RootedTree*> trees = {&s2, &s3, &spider};
  for (const kcl::RootedTree* t : trees) {
    double limit = std::pow(0.5, t->edge_count());
    double prev_err = 1.0;
    for (long q : {13L, 101L, 1009L}) {
      kcl::StepKernel e =
          kcl::embed_graph(kcl::WeightedDenseGraph::paley(q));
      double err = std::fabs(kcl::tree_density(*t, e) - limit);
      CHECK(err < prev_err);
      prev_err = err;
    }
    CHECK(prev_err < 0.02);
  }
}

TEST_CASE("tree_series capability caps") {
  // depth above the cap (depth counts generations below the root)
  kcl::OffspringConfig d4{
      1, {{1, {{1, {{1, {kcl::OffspringConfig::leaf(1)}}}}}}}};
  CHECK(d4.depth() == 4);
  CHECK_THROWS_AS(kcl::tree_series(d4, 1.0, 3), kcl::Error);
  // count above the cap
  CHECK_THROWS_AS(kcl::tree_series(kcl::OffspringConfig::leaf(7), 1.0, 3),
                  kcl::Error);
  // within caps: fine
  CHECK_NOTHROW(kcl::tree_series(kcl::OffspringConfig::leaf(6), 1.0, 2));
}
