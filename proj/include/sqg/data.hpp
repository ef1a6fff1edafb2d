// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqg/rng.hpp"

namespace sqg {

/// Row-major table of samples. `space` records which coordinate system the
/// rows live in: "raw" (original units) or "transformed" (preprocessed to
/// the generator's output cube [-1, 1]^dim).
struct SampleSet {
  int dim = 0;
  std::vector<std::vector<double>> rows;
  std::string space = "raw";
  std::vector<std::string> names;  // optional column names; empty or size dim

  void validate() const {
    if (dim <= 0) throw std::invalid_argument("SampleSet: dim must be positive");
    if (!names.empty() && static_cast<int>(names.size()) != dim)
      throw std::invalid_argument("SampleSet: names/dim mismatch");
    for (const auto& r : rows)
      if (static_cast<int>(r.size()) != dim)
        throw std::invalid_argument("SampleSet: ragged row");
  }

  std::vector<double> column(int j) const {
    std::vector<double> c;
    c.reserve(rows.size());
    for (const auto& r : rows) c.push_back(r.at(static_cast<std::size_t>(j)));
    return c;
  }
};

// ---------------------------------------------------------------------------
// Reference distributions
// ---------------------------------------------------------------------------

/// Gamma density with shape alpha and scale beta:
///   p(x) = x^(a-1) e^(-x/b) / (b^a Gamma(a)).
/// alpha = 1 is Exponential with mean beta.
inline double gamma_pdf(double x, double alpha, double beta) {
  if (alpha <= 0 || beta <= 0) throw std::invalid_argument("gamma_pdf: alpha, beta must be > 0");
  if (x < 0) return 0.0;
  if (x == 0)
    return alpha == 1 ? 1.0 / beta
                      : (alpha < 1 ? std::numeric_limits<double>::infinity() : 0.0);
  const double logp =
      (alpha - 1.0) * std::log(x) - x / beta - alpha * std::log(beta) - std::lgamma(alpha);
  return std::exp(logp);
}

/// Draws from Gamma(shape alpha, scale beta). The exponential special case
/// alpha = 1 uses the inverse CDF so each draw consumes exactly one engine
/// variate.
inline std::vector<double> sample_gamma_values(std::size_t n, double alpha, double beta,
                                               Rng& rng) {
  if (alpha <= 0 || beta <= 0)
    throw std::invalid_argument("sample_gamma: alpha, beta must be > 0");
  std::vector<double> out;
  out.reserve(n);
  if (alpha == 1.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) out.push_back(-beta * std::log1p(-u(rng)));
  } else {
    std::gamma_distribution<double> g(alpha, beta);
    for (std::size_t i = 0; i < n; ++i) out.push_back(g(rng));
  }
  return out;
}

inline SampleSet sample_gamma(std::size_t n, double alpha, double beta, Rng& rng) {
  SampleSet s;
  s.dim = 1;
  s.names = {"x"};
  for (double v : sample_gamma_values(n, alpha, beta, rng)) s.rows.push_back({v});
  return s;
}

/// Covariance of the correlated 3D Gaussian benchmark (zero mean).
inline Eigen::Matrix3d gaussian3d_covariance() {
  Eigen::Matrix3d sigma;
  sigma << 0.5, 0.1, 0.25,
           0.1, 0.5, 0.1,
           0.25, 0.1, 0.5;
  return sigma;
}

inline Eigen::Matrix3d gaussian3d_cholesky() {
  Eigen::LLT<Eigen::Matrix3d> llt(gaussian3d_covariance());
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("gaussian3d_cholesky: covariance not positive definite");
  return llt.matrixL();
}

/// Zero-mean trivariate normal draws, x = L u with u ~ N(0, I).
inline SampleSet sample_gaussian3d(std::size_t n, Rng& rng) {
  const Eigen::Matrix3d L = gaussian3d_cholesky();
  std::normal_distribution<double> nd(0.0, 1.0);
  SampleSet s;
  s.dim = 3;
  s.names = {"x0", "x1", "x2"};
  s.rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Vector3d u(nd(rng), nd(rng), nd(rng));
    Eigen::Vector3d x = L * u;
    s.rows.push_back({x(0), x(1), x(2)});
  }
  return s;
}

// ---------------------------------------------------------------------------
// Preprocessing
// ---------------------------------------------------------------------------

/// Monotone power transform defined for all reals:
///   x >= 0:  ((x+1)^lambda - 1) / lambda          (log(x+1) at lambda = 0)
///   x <  0:  -((1-x)^(2-lambda) - 1) / (2-lambda) (-log(1-x) at lambda = 2)
inline double power_transform(double x, double lambda) {
  if (x >= 0) {
    if (std::abs(lambda) < 1e-12) return std::log1p(x);
    return (std::pow(x + 1.0, lambda) - 1.0) / lambda;
  }
  const double l2 = 2.0 - lambda;
  if (std::abs(l2) < 1e-12) return -std::log1p(-x);
  return -(std::pow(1.0 - x, l2) - 1.0) / l2;
}

inline double power_transform_inverse(double y, double lambda) {
  if (y >= 0) {
    if (std::abs(lambda) < 1e-12) return std::expm1(y);
    return std::pow(lambda * y + 1.0, 1.0 / lambda) - 1.0;
  }
  const double l2 = 2.0 - lambda;
  if (std::abs(l2) < 1e-12) return -std::expm1(-y);
  return 1.0 - std::pow(1.0 - l2 * y, 1.0 / l2);
}

namespace detail {

/// Profile log-likelihood of the power transform at fixed lambda
/// (normal model, variance profiled out at its maximum-likelihood value).
inline double power_loglik(const std::vector<double>& x, double lambda) {
  const std::size_t n = x.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = power_transform(x[i], lambda);
  double mean = 0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);
  double var = 0;
  for (double v : y) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  if (var <= 0) return -std::numeric_limits<double>::infinity();
  double jac = 0;  // sum of log |d power_transform / dx|
  for (double v : x) jac += (v >= 0 ? 1.0 : -1.0) * std::log(std::abs(v) + 1.0);
  return -0.5 * static_cast<double>(n) * std::log(var) + (lambda - 1.0) * jac;
}

/// Golden-section maximization of the profile likelihood over [-5, 5].
inline double fit_power_lambda(const std::vector<double>& x) {
  if (x.size() < 2) throw std::invalid_argument("fit_power_lambda: need at least 2 samples");
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = -5.0, b = 5.0;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = power_loglik(x, c);
  double fd = power_loglik(x, d);
  while (b - a > 1e-6) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = power_loglik(x, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = power_loglik(x, d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

enum class PreprocessKind { minmax, power_minmax };

/// Invertible map from raw data to the generator's output cube [-1, 1]^dim.
/// "minmax" rescales each dimension affinely. "power_minmax" first applies a
/// per-dimension power transform (lambda fitted by maximum likelihood) and a
/// standardization, then the same min-max step; this symmetrizes skewed data
/// such as the gamma benchmark before rescaling.
struct Preprocessor {
  PreprocessKind kind = PreprocessKind::minmax;
  int dim = 0;
  std::vector<double> lambda;    // power_minmax only
  std::vector<double> mean, stddev;  // power_minmax only (population std)
  std::vector<double> lo, hi;    // min-max bounds in the rescaled space

  static Preprocessor fit(const SampleSet& data, PreprocessKind kind) {
    data.validate();
    if (data.rows.size() < 2) throw std::invalid_argument("Preprocessor::fit: need >= 2 rows");
    Preprocessor p;
    p.kind = kind;
    p.dim = data.dim;
    std::vector<std::vector<double>> cols(static_cast<std::size_t>(data.dim));
    for (int j = 0; j < data.dim; ++j) cols[static_cast<std::size_t>(j)] = data.column(j);

    if (kind == PreprocessKind::power_minmax) {
      for (auto& col : cols) {
        const double lam = detail::fit_power_lambda(col);
        p.lambda.push_back(lam);
        double mean = 0;
        for (double& v : col) {
          v = power_transform(v, lam);
          mean += v;
        }
        mean /= static_cast<double>(col.size());
        double var = 0;
        for (double v : col) var += (v - mean) * (v - mean);
        var /= static_cast<double>(col.size());
        const double sd = std::sqrt(var);
        if (!(sd > 0)) throw std::runtime_error("Preprocessor::fit: degenerate column");
        p.mean.push_back(mean);
        p.stddev.push_back(sd);
        for (double& v : col) v = (v - mean) / sd;
      }
    }
    for (const auto& col : cols) {
      const auto [mn, mx] = std::minmax_element(col.begin(), col.end());
      if (!(*mx > *mn)) throw std::runtime_error("Preprocessor::fit: constant column");
      p.lo.push_back(*mn);
      p.hi.push_back(*mx);
    }
    return p;
  }

  std::vector<double> transform_row(const std::vector<double>& row) const {
    if (static_cast<int>(row.size()) != dim)
      throw std::invalid_argument("Preprocessor::transform_row: dim mismatch");
    std::vector<double> out(row);
    for (int j = 0; j < dim; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      double v = out[ju];
      if (kind == PreprocessKind::power_minmax)
        v = (power_transform(v, lambda[ju]) - mean[ju]) / stddev[ju];
      out[ju] = -1.0 + 2.0 * (v - lo[ju]) / (hi[ju] - lo[ju]);
    }
    return out;
  }

  std::vector<double> inverse_row(const std::vector<double>& row) const {
    if (static_cast<int>(row.size()) != dim)
      throw std::invalid_argument("Preprocessor::inverse_row: dim mismatch");
    std::vector<double> out(row);
    for (int j = 0; j < dim; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      double v = lo[ju] + (out[ju] + 1.0) * 0.5 * (hi[ju] - lo[ju]);
      if (kind == PreprocessKind::power_minmax)
        v = power_transform_inverse(v * stddev[ju] + mean[ju], lambda[ju]);
      out[ju] = v;
    }
    return out;
  }

  SampleSet transform(const SampleSet& data) const {
    SampleSet out = data;
    out.space = "transformed";
    for (auto& r : out.rows) r = transform_row(r);
    return out;
  }

  SampleSet inverse_transform(const SampleSet& data) const {
    SampleSet out = data;
    out.space = "raw";
    for (auto& r : out.rows) r = inverse_row(r);
    return out;
  }
};

inline Preprocessor fit_minmax(const SampleSet& data) {
  return Preprocessor::fit(data, PreprocessKind::minmax);
}

inline Preprocessor fit_power(const SampleSet& data) {
  return Preprocessor::fit(data, PreprocessKind::power_minmax);
}

// ---------------------------------------------------------------------------
// CSV I/O
// ---------------------------------------------------------------------------

/// Formats with enough digits to round-trip IEEE doubles exactly.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void save_csv(const std::string& path, const SampleSet& data) {
  data.validate();
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_csv: cannot open " + path);
  if (!data.names.empty()) {
    for (int j = 0; j < data.dim; ++j)
      f << (j ? "," : "") << data.names[static_cast<std::size_t>(j)];
    f << '\n';
  }
  for (const auto& r : data.rows) {
    for (int j = 0; j < data.dim; ++j)
      f << (j ? "," : "") << format_double(r[static_cast<std::size_t>(j)]);
    f << '\n';
  }
  if (!f) throw std::runtime_error("save_csv: write failed for " + path);
}

namespace detail {

inline bool looks_numeric(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  (void)v;
  return end != s.c_str() && *end == '\0';
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  for (auto& f : fields) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return fields;
}

}  // namespace detail

/// Reads a CSV of doubles; a non-numeric first line is taken as a header.
/// Parse errors report the offending 1-based row and column.
inline SampleSet load_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_csv: cannot open " + path);
  SampleSet s;
  std::string line;
  bool first = true;
  std::size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = detail::split_csv_line(line);
    if (first) {
      first = false;
      s.dim = static_cast<int>(fields.size());
      if (!detail::looks_numeric(fields[0])) {
        s.names = fields;
        continue;
      }
    }
    if (static_cast<int>(fields.size()) != s.dim)
      throw std::runtime_error("load_csv: " + path + " row " + std::to_string(line_no) +
                               ": expected " + std::to_string(s.dim) + " columns, got " +
                               std::to_string(fields.size()));
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (!detail::looks_numeric(fields[c]))
        throw std::runtime_error("load_csv: " + path + " row " + std::to_string(line_no) +
                                 " column " + std::to_string(c + 1) + ": not a number: '" +
                                 fields[c] + "'");
      row.push_back(std::strtod(fields[c].c_str(), nullptr));
    }
    s.rows.push_back(std::move(row));
  }
  if (s.dim == 0) throw std::runtime_error("load_csv: empty file " + path);
  s.validate();
  return s;
}

}  // namespace sqg
