// SPDX-License-Identifier: Apache-2.0
//
// Histogramming, KL divergence, covariance agreement, and ratio grids.
// Statistical checks use closed-form binomial bounds; eigenvalue sums are
// cross-checked against an explicit Eigen eigendecomposition.

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "sqg/data.hpp"
#include "sqg/metrics.hpp"
#include "sqg/rng.hpp"

using namespace sqg;
using Catch::Approx;

TEST_CASE("single sample lands in its bin") {
  const Histogram h = histogram_with_edges({0.5}, {0.0, 1.0});
  REQUIRE(h.counts == std::vector<std::uint64_t>{1});
  CHECK(h.underflow == 0);
  CHECK(h.overflow == 0);
}

TEST_CASE("half-open bins: interior edge values go right, last edge overflows") {
  const Histogram h = histogram_with_edges({0.5, 0.0, 1.0, -0.1}, {0.0, 0.5, 1.0});
  CHECK(h.counts == std::vector<std::uint64_t>{1, 1});  // 0.0 -> bin 0, 0.5 -> bin 1
  CHECK(h.overflow == 1);   // 1.0 is at the last edge
  CHECK(h.underflow == 1);  // -0.1
}

TEST_CASE("totals are conserved for randomized inputs") {
  Rng rng(1);
  std::normal_distribution<double> nd(0.0, 2.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> xs(1000);
    for (double& v : xs) v = nd(rng);
    const Histogram h = build_histogram(xs, 17, HistScale::linear, {{-1.0, 1.0}});
    CHECK(h.total_in_range() + h.underflow + h.overflow == xs.size());
  }
}

TEST_CASE("uniform fill puts each bin within the 5-sigma binomial band") {
  Rng rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> xs(1000000);
  for (double& v : xs) v = u(rng);
  const Histogram h = build_histogram(xs, 100, HistScale::linear, {{0.0, 1.0}});
  for (auto c : h.counts) {
    CHECK(c > 10000 - 500);
    CHECK(c < 10000 + 500);
  }
}

TEST_CASE("log-spaced edges require positive support") {
  const auto e = log_edges(0.1, 10.0, 2);
  REQUIRE(e.size() == 3);
  CHECK(e[0] == Approx(0.1).margin(0));
  CHECK(e[1] == Approx(1.0).margin(1e-12));
  CHECK(e[2] == Approx(10.0).margin(0));
  CHECK_THROWS_AS(log_edges(0.0, 1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(build_histogram({0.0, 1.0, 2.0}, 4, HistScale::log), std::invalid_argument);
  CHECK_NOTHROW(build_histogram({0.5, 1.0, 2.0}, 4, HistScale::log));
}

TEST_CASE("histogram validation") {
  CHECK_THROWS_AS(histogram_with_edges({1.0}, {0.0, 0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(build_histogram({}, 4), std::invalid_argument);
  CHECK_THROWS_AS(build_histogram({1.0, 1.0}, 4), std::invalid_argument);  // degenerate range
  CHECK_THROWS_AS(linear_edges(0.0, 1.0, 0), std::invalid_argument);
}

TEST_CASE("KL of a histogram with itself is exactly zero") {
  Rng rng(3);
  std::normal_distribution<double> nd;
  std::vector<double> xs(5000);
  for (double& v : xs) v = nd(rng);
  const Histogram h = build_histogram(xs, 100, HistScale::linear);  // includes empty bins
  CHECK(kl_divergence(h, h) == 0.0);
  // scaled counts are identical after normalization
  Histogram doubled = h;
  for (auto& c : doubled.counts) c *= 2;
  CHECK(kl_divergence(h, doubled) == 0.0);
}

TEST_CASE("two-bin closed form equals log 2") {
  Histogram p, q;
  p.edges = q.edges = {0.0, 0.5, 1.0};
  p.counts = {10, 0};
  q.counts = {5, 5};
  CHECK(kl_divergence(p, q) == Approx(std::log(2.0)).margin(1e-12));
  // direction matters: reversed arguments give a different value
  CHECK(kl_divergence(q, p) > 1.0);  // q places mass where p has (floored) none
}

TEST_CASE("KL requires matching edges and nonempty histograms") {
  Histogram p, q;
  p.edges = {0.0, 1.0};
  p.counts = {1};
  q.edges = {0.0, 2.0};
  q.counts = {1};
  CHECK_THROWS_AS(kl_divergence(p, q), std::invalid_argument);
  q.edges = {0.0, 1.0};
  q.counts = {0};
  CHECK_THROWS_AS(kl_divergence(p, q), std::invalid_argument);
}

TEST_CASE("KL is nonnegative and zero only for identical normalized counts") {
  Rng rng(4);
  std::uniform_int_distribution<int> cnt(0, 50);
  for (int rep = 0; rep < 200; ++rep) {
    Histogram p, q;
    p.edges = q.edges = linear_edges(0, 1, 20);
    p.counts.resize(20);
    q.counts.resize(20);
    bool same = true;
    for (int i = 0; i < 20; ++i) {
      p.counts[static_cast<std::size_t>(i)] = static_cast<std::uint64_t>(cnt(rng));
      q.counts[static_cast<std::size_t>(i)] = static_cast<std::uint64_t>(cnt(rng));
    }
    if (p.total_in_range() == 0) p.counts[0] = 1;
    if (q.total_in_range() == 0) q.counts[0] = 1;
    const double tp = static_cast<double>(p.total_in_range());
    const double tq = static_cast<double>(q.total_in_range());
    for (int i = 0; i < 20; ++i)
      same = same && static_cast<double>(p.counts[static_cast<std::size_t>(i)]) * tq ==
                         static_cast<double>(q.counts[static_cast<std::size_t>(i)]) * tp;
    const double kl = kl_divergence(p, q);
    if (same)
      CHECK(kl == 0.0);
    else
      CHECK(kl > 0.0);
  }
}

TEST_CASE("KL is invariant under a joint permutation of bins") {
  Rng rng(5);
  Histogram p, q;
  p.edges = q.edges = linear_edges(0, 1, 10);
  p.counts = {3, 1, 4, 1, 5, 9, 2, 6, 5, 3};
  q.counts = {2, 7, 1, 8, 2, 8, 1, 8, 2, 8};
  const double before = kl_divergence(p, q);
  std::vector<std::size_t> perm(10);
  std::iota(perm.begin(), perm.end(), 0u);
  std::shuffle(perm.begin(), perm.end(), rng);
  Histogram pp = p, qq = q;
  for (std::size_t i = 0; i < 10; ++i) {
    pp.counts[i] = p.counts[perm[i]];
    qq.counts[i] = q.counts[perm[i]];
  }
  CHECK(kl_divergence(pp, qq) == Approx(before).margin(1e-14));
}

TEST_CASE("reference-vs-reference KL sits in the small positive band") {
  // Two independent Exponential(1) samplings at the 1e4-draw / 100-bin scale.
  for (std::uint64_t seed = 10; seed < 13; ++seed) {
    Rng r1(seed), r2(seed + 1000);
    const auto a = sample_gamma_values(10000, 1.0, 1.0, r1);
    const auto b = sample_gamma_values(10000, 1.0, 1.0, r2);
    const Histogram ha = build_histogram(a, 100, HistScale::linear, {{0.0, 8.0}});
    const Histogram hb = histogram_with_edges(b, ha.edges, ha.scale);
    const double kl = kl_divergence(ha, hb);
    CHECK(kl > 0.01);
    CHECK(kl < 0.25);
  }
}

TEST_CASE("augmentation check passes when generated equals fresh reference draws") {
  Rng rng_gen(6), rng_ref(7);
  SampleSet gen = sample_gamma(100000, 1.0, 1.0, rng_gen);
  const auto sampler = [&](std::size_t n) { return sample_gamma_values(n, 1.0, 1.0, rng_ref); };
  const AugmentationReport r = data_augmentation_check(sampler, gen);
  CHECK(r.proportional_bins == 1000);
  CHECK(r.kl_small > 0.0);
  CHECK(r.kl_large_prop <= r.kl_small + r.margin);
  CHECK(r.pass);
}

TEST_CASE("augmentation check flags a constant generator") {
  Rng rng_ref(8);
  SampleSet gen;
  gen.dim = 1;
  gen.rows.assign(100000, {0.7});  // all mass in one bin
  const auto sampler = [&](std::size_t n) { return sample_gamma_values(n, 1.0, 1.0, rng_ref); };
  const AugmentationReport r = data_augmentation_check(sampler, gen);
  CHECK_FALSE(r.pass);
  CHECK(r.kl_small > r.sanity_bound);
}

TEST_CASE("augmentation check needs enough generated rows") {
  Rng rng(9);
  SampleSet gen = sample_gamma(500, 1.0, 1.0, rng);
  const auto sampler = [&](std::size_t n) { return sample_gamma_values(n, 1.0, 1.0, rng); };
  CHECK_THROWS_AS(data_augmentation_check(sampler, gen), std::invalid_argument);
}

TEST_CASE("identical sets have eigenvalue agreement zero") {
  Rng rng(10);
  const SampleSet s = sample_gaussian3d(200, rng);
  CHECK(covariance_eigen_agreement(s, s) == 0.0);
}

TEST_CASE("eigenvalue sum equals the covariance trace") {
  Rng rng(11);
  const SampleSet s = sample_gaussian3d(5000, rng);
  const Eigen::MatrixXd cov = sample_covariance(s);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  CHECK(es.eigenvalues().sum() == Approx(cov.trace()).margin(1e-12));
}

TEST_CASE("axis scaling by 1.1 gives agreement 0.21") {
  Rng rng(12);
  const SampleSet ref = sample_gaussian3d(2000, rng);
  SampleSet gen = ref;
  for (auto& r : gen.rows)
    for (double& v : r) v *= 1.1;
  CHECK(covariance_eigen_agreement(ref, gen) == Approx(1.1 * 1.1 - 1.0).margin(1e-9));
}

TEST_CASE("eigenvalue agreement preconditions") {
  Rng rng(13);
  const SampleSet a = sample_gaussian3d(100, rng);
  SampleSet b = sample_gamma(100, 1.0, 1.0, rng);
  CHECK_THROWS_AS(covariance_eigen_agreement(a, b), std::invalid_argument);  // dim mismatch
  CHECK_THROWS_AS(covariance_eigen_agreement(b, b), std::invalid_argument);  // dim < 2
  SampleSet tiny;
  tiny.dim = 3;
  tiny.rows = {{1.0, 2.0, 3.0}};
  CHECK_THROWS_AS(covariance_eigen_agreement(tiny, a), std::invalid_argument);  // n < 2
}

TEST_CASE("ratio grid of a set against itself is 1 on unmasked cells") {
  Rng rng(14);
  const SampleSet s = sample_gaussian3d(5000, rng);
  const RatioGrid g = build_ratio_grid(s, s, 0, 1, 10, 10);
  bool any_valid = false;
  for (std::size_t c = 0; c < g.ratio.size(); ++c) {
    if (g.valid[c]) {
      any_valid = true;
      CHECK(g.ratio[c] == 1.0);
    } else {
      CHECK(g.ref_counts[c] == g.gen_counts[c]);
    }
  }
  CHECK(any_valid);
}

TEST_CASE("duplicated generated samples halve the ratio") {
  Rng rng(15);
  const SampleSet s = sample_gaussian3d(2000, rng);
  SampleSet dup = s;
  dup.rows.insert(dup.rows.end(), s.rows.begin(), s.rows.end());
  const RatioGrid g = build_ratio_grid(s, dup, 0, 2, 8, 8);
  for (std::size_t c = 0; c < g.ratio.size(); ++c)
    if (g.valid[c]) CHECK(g.ratio[c] == 0.5);
}

TEST_CASE("disjoint supports mask every cell") {
  SampleSet a, b;
  a.dim = b.dim = 2;
  for (int i = 0; i < 50; ++i) {
    a.rows.push_back({0.1 * i, 0.1 * i});
    b.rows.push_back({100.0 + i, 100.0 + i});  // far outside a's range
  }
  const RatioGrid g = build_ratio_grid(a, b, 0, 1, 5, 5);
  for (std::size_t c = 0; c < g.valid.size(); ++c) CHECK_FALSE(g.valid[c]);
}

TEST_CASE("metric serialization smoke checks") {
  Histogram h = histogram_with_edges({0.5, 1.5}, {0.0, 1.0, 2.0});
  const nlohmann::json hj = to_json(h);
  CHECK(hj["counts"].size() == 2);
  CHECK(hj["scale"] == "linear");

  Rng rng(16);
  const SampleSet s = sample_gaussian3d(500, rng);
  const RatioGrid g = build_ratio_grid(s, s, 0, 1, 4, 4);
  const nlohmann::json gj = to_json(g);
  CHECK(gj["ratio"].size() == 16);
  const std::string path =
      (std::filesystem::temp_directory_path() / "sqg_test_grid.csv").string();
  save_ratio_grid_csv(path, g);
  const SampleSet grid_csv = load_csv(path);
  CHECK(grid_csv.dim == 8);
  CHECK(grid_csv.rows.size() == 16);
  std::filesystem::remove(path);
}
