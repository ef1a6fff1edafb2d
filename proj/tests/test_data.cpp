// SPDX-License-Identifier: Apache-2.0
//
// Reference samplers, preprocessing chains, and CSV round-trips. The
// Cholesky factor is checked against the covariance by direct
// multiplication, and sampler moments against closed-form values.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "sqg/data.hpp"
#include "sqg/rng.hpp"

using namespace sqg;
using Catch::Approx;

namespace {

double skewness(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  double mean = 0;
  for (double v : x) mean += v;
  mean /= n;
  double m2 = 0, m3 = 0;
  for (double v : x) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  return m3 / std::pow(m2, 1.5);
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("gamma pdf closed-form values") {
  CHECK(gamma_pdf(0.0, 1.0, 1.0) == Approx(1.0).margin(0));        // e^0 / Gamma(1)
  CHECK(gamma_pdf(1.0, 1.0, 1.0) == Approx(std::exp(-1.0)).margin(1e-15));
  CHECK(gamma_pdf(2.0, 2.0, 1.0) == Approx(2.0 * std::exp(-2.0)).margin(1e-15));
  CHECK(gamma_pdf(-1.0, 1.0, 1.0) == 0.0);
  CHECK(gamma_pdf(0.0, 1.0, 2.0) == Approx(0.5).margin(0));        // 1/beta at the origin
  CHECK_THROWS_AS(gamma_pdf(1.0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(gamma_pdf(1.0, 1.0, -1.0), std::invalid_argument);
}

TEST_CASE("exponential draws have the exponential's mean and tail") {
  Rng rng(1);
  const auto xs = sample_gamma_values(1000000, 1.0, 1.0, rng);
  double mean = 0, tail = 0;
  for (double v : xs) {
    REQUIRE(v >= 0.0);
    mean += v;
    tail += v > 1.0;
  }
  mean /= static_cast<double>(xs.size());
  tail /= static_cast<double>(xs.size());
  CHECK(mean == Approx(1.0).margin(0.01));
  CHECK(tail == Approx(std::exp(-1.0)).margin(0.005));
}

TEST_CASE("general-shape gamma draws have mean alpha*beta") {
  Rng rng(2);
  const auto xs = sample_gamma_values(200000, 3.0, 0.5, rng);
  double mean = 0;
  for (double v : xs) mean += v;
  mean /= static_cast<double>(xs.size());
  CHECK(mean == Approx(1.5).margin(0.02));
  CHECK_THROWS_AS(sample_gamma_values(1, -1.0, 1.0, rng), std::invalid_argument);
  const SampleSet s = sample_gamma(10, 1.0, 1.0, rng);
  CHECK(s.dim == 1);
  CHECK(s.rows.size() == 10);
}

TEST_CASE("triangular factor reproduces the benchmark covariance") {
  const Eigen::Matrix3d sigma = gaussian3d_covariance();
  CHECK(sigma(0, 0) == 0.5);
  CHECK(sigma(0, 2) == 0.25);
  CHECK(sigma.trace() == Approx(1.5).margin(0));
  const Eigen::Matrix3d L = gaussian3d_cholesky();
  REQUIRE((L * L.transpose() - sigma).cwiseAbs().maxCoeff() < 1e-12);
  // the factor must be lower-triangular
  CHECK(L(0, 1) == 0.0);
  CHECK(L(0, 2) == 0.0);
  CHECK(L(1, 2) == 0.0);
}

TEST_CASE("gaussian3d sample moments match the target") {
  Rng rng(3);
  const SampleSet s = sample_gaussian3d(1000000, rng);
  REQUIRE(s.dim == 3);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& r : s.rows) mean += Eigen::Vector3d(r[0], r[1], r[2]);
  mean /= static_cast<double>(s.rows.size());
  for (int i = 0; i < 3; ++i) CHECK(std::abs(mean(i)) < 0.005);

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& r : s.rows) {
    const Eigen::Vector3d d = Eigen::Vector3d(r[0], r[1], r[2]) - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(s.rows.size() - 1);
  REQUIRE((cov - gaussian3d_covariance()).cwiseAbs().maxCoeff() < 0.01);
}

TEST_CASE("covariance reconstruction error decays with sample size") {
  const auto max_err = [](std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    const SampleSet s = sample_gaussian3d(n, rng);
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& r : s.rows) mean += Eigen::Vector3d(r[0], r[1], r[2]);
    mean /= static_cast<double>(n);
    for (const auto& r : s.rows) {
      const Eigen::Vector3d d = Eigen::Vector3d(r[0], r[1], r[2]) - mean;
      cov += d * d.transpose();
    }
    cov /= static_cast<double>(n - 1);
    return (cov - gaussian3d_covariance()).cwiseAbs().maxCoeff();
  };
  // O(1/sqrt(n)): two decades of n shrink the error by about 10x; allow
  // slack for the randomness by only requiring a strict decrease.
  double e3 = 0, e5 = 0;
  for (std::uint64_t s = 0; s < 3; ++s) {
    e3 += max_err(1000, 100 + s);
    e5 += max_err(100000, 200 + s);
  }
  CHECK(e5 < e3);
}

TEST_CASE("minmax maps extrema to -1 and +1 and round-trips") {
  SampleSet s;
  s.dim = 1;
  s.rows = {{0.0}, {1.0}, {0.25}};
  const Preprocessor p = fit_minmax(s);
  const SampleSet t = p.transform(s);
  CHECK(t.space == "transformed");
  CHECK(t.rows[0][0] == Approx(-1.0).margin(0));
  CHECK(t.rows[1][0] == Approx(1.0).margin(0));
  CHECK(t.rows[2][0] == Approx(-0.5).margin(1e-15));
  const SampleSet back = p.inverse_transform(t);
  CHECK(back.space == "raw");
  for (std::size_t i = 0; i < s.rows.size(); ++i)
    CHECK(back.rows[i][0] == Approx(s.rows[i][0]).margin(1e-12));
}

TEST_CASE("minmax round-trips off the fitting set, beyond the range") {
  SampleSet s;
  s.dim = 2;
  s.rows = {{0.0, -3.0}, {2.0, 7.0}};
  const Preprocessor p = fit_minmax(s);
  const std::vector<double> outside = {5.0, -10.0};
  const auto mapped = p.transform_row(outside);
  CHECK(mapped[0] > 1.0);   // linear extension
  CHECK(mapped[1] < -1.0);
  const auto back = p.inverse_row(mapped);
  CHECK(back[0] == Approx(5.0).margin(1e-12));
  CHECK(back[1] == Approx(-10.0).margin(1e-12));
}

TEST_CASE("degenerate columns are rejected") {
  SampleSet s;
  s.dim = 1;
  s.rows = {{2.0}, {2.0}, {2.0}};
  CHECK_THROWS_AS(fit_minmax(s), std::runtime_error);
  SampleSet one;
  one.dim = 1;
  one.rows = {{1.0}};
  CHECK_THROWS_AS(fit_minmax(one), std::invalid_argument);
}

TEST_CASE("power transform at lambda 1 is the identity on x >= 0") {
  for (double x : {0.0, 0.3, 1.7, 42.0}) CHECK(power_transform(x, 1.0) == Approx(x).margin(1e-15));
  // negative branch at lambda = 2 is -log(1 - x)
  CHECK(power_transform(-0.5, 2.0) == Approx(-std::log(1.5)).margin(1e-15));
  // both log limits
  CHECK(power_transform(1.0, 0.0) == Approx(std::log(2.0)).margin(1e-15));
  CHECK(power_transform(-1.0, 2.0) == Approx(-std::log(2.0)).margin(1e-15));
}

TEST_CASE("power transform inverts across both branches and lambdas") {
  Rng rng(4);
  std::uniform_real_distribution<double> ux(-5.0, 5.0), ul(-3.0, 3.0);
  for (int i = 0; i < 500; ++i) {
    const double x = ux(rng), lam = ul(rng);
    CHECK(power_transform_inverse(power_transform(x, lam), lam) == Approx(x).margin(1e-9));
  }
}

TEST_CASE("power chain round-trips within 1e-8") {
  Rng rng(5);
  SampleSet s = sample_gamma(500, 1.0, 1.0, rng);
  const Preprocessor p = fit_power(s);
  const SampleSet t = p.transform(s);
  for (const auto& r : t.rows) CHECK(std::abs(r[0]) <= 1.0 + 1e-12);
  const SampleSet back = p.inverse_transform(t);
  for (std::size_t i = 0; i < s.rows.size(); ++i)
    CHECK(back.rows[i][0] == Approx(s.rows[i][0]).margin(1e-8));
}

TEST_CASE("power chain symmetrizes exponential data") {
  Rng rng(6);
  const auto raw = sample_gamma_values(100000, 1.0, 1.0, rng);
  CHECK(std::abs(skewness(raw)) > 1.5);  // exponential skewness is 2
  SampleSet s;
  s.dim = 1;
  for (double v : raw) s.rows.push_back({v});
  const Preprocessor p = fit_power(s);
  const SampleSet t = p.transform(s);
  CHECK(std::abs(skewness(t.column(0))) < 0.2);
}

TEST_CASE("csv save/load round-trips bit-exactly") {
  Rng rng(7);
  SampleSet s = sample_gaussian3d(50, rng);
  s.rows[0][0] = 1.0 / 3.0;  // needs all 17 digits
  s.rows[1][1] = 1e-300;
  const std::string path = temp_path("sqg_test_roundtrip.csv");
  save_csv(path, s);
  const SampleSet r = load_csv(path);
  REQUIRE(r.dim == 3);
  REQUIRE(r.names == s.names);
  REQUIRE(r.rows.size() == s.rows.size());
  for (std::size_t i = 0; i < s.rows.size(); ++i)
    for (int j = 0; j < 3; ++j)
      REQUIRE(r.rows[i][static_cast<std::size_t>(j)] == s.rows[i][static_cast<std::size_t>(j)]);
  std::filesystem::remove(path);
}

TEST_CASE("csv header-only file loads as an empty set") {
  const std::string path = temp_path("sqg_test_empty.csv");
  {
    std::ofstream f(path);
    f << "a,b,c\n";
  }
  const SampleSet s = load_csv(path);
  CHECK(s.dim == 3);
  CHECK(s.rows.empty());
  CHECK(s.names == std::vector<std::string>{"a", "b", "c"});
  std::filesystem::remove(path);
}

TEST_CASE("csv parse errors carry row and column positions") {
  const std::string path = temp_path("sqg_test_bad.csv");
  {
    std::ofstream f(path);
    f << "a,b\n1.0,2.0\n3.0,oops\n";
  }
  CHECK_THROWS_WITH(load_csv(path),
                    Catch::Matchers::ContainsSubstring("row 3") &&
                        Catch::Matchers::ContainsSubstring("column 2"));
  {
    std::ofstream f(path);
    f << "a,b\n1.0,2.0,3.0\n";
  }
  CHECK_THROWS_WITH(load_csv(path), Catch::Matchers::ContainsSubstring("row 2"));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_csv(temp_path("sqg_does_not_exist.csv")), std::runtime_error);
}

TEST_CASE("sample sets validate their shape") {
  SampleSet s;
  s.dim = 2;
  s.rows = {{1.0, 2.0}, {3.0}};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.rows.pop_back();
  s.names = {"only_one"};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}
