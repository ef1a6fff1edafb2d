// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqg/data.hpp"

namespace sqg {

enum class HistScale { linear, log };

inline std::string to_string(HistScale s) { return s == HistScale::linear ? "linear" : "log"; }

/// Binned 1D counts over half-open bins [e_i, e_{i+1}). Values below the
/// first edge go to `underflow`; values at or above the last edge go to
/// `overflow`, so in-range + underflow + overflow always equals the total.
struct Histogram {
  std::vector<double> edges;        // strictly increasing, length bins+1
  std::vector<std::uint64_t> counts;  // length bins
  HistScale scale = HistScale::linear;
  std::uint64_t underflow = 0;
  std::uint64_t overflow = 0;

  int bins() const { return static_cast<int>(counts.size()); }

  std::uint64_t total_in_range() const {
    std::uint64_t t = 0;
    for (auto c : counts) t += c;
    return t;
  }

  void validate() const {
    if (edges.size() < 2) throw std::invalid_argument("Histogram: need at least one bin");
    if (counts.size() + 1 != edges.size())
      throw std::invalid_argument("Histogram: counts/edges length mismatch");
    for (std::size_t i = 1; i < edges.size(); ++i)
      if (!(edges[i] > edges[i - 1]))
        throw std::invalid_argument("Histogram: edges must be strictly increasing");
  }
};

inline std::vector<double> linear_edges(double lo, double hi, int bins) {
  if (bins < 1) throw std::invalid_argument("linear_edges: bins must be >= 1");
  if (!(hi > lo)) throw std::invalid_argument("linear_edges: need hi > lo");
  std::vector<double> e(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i)
    e[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / bins;
  e.front() = lo;
  e.back() = hi;
  return e;
}

inline std::vector<double> log_edges(double lo, double hi, int bins) {
  if (bins < 1) throw std::invalid_argument("log_edges: bins must be >= 1");
  if (!(lo > 0) || !(hi > lo)) throw std::invalid_argument("log_edges: need 0 < lo < hi");
  std::vector<double> e(static_cast<std::size_t>(bins) + 1);
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i <= bins; ++i)
    e[static_cast<std::size_t>(i)] = std::exp(llo + (lhi - llo) * static_cast<double>(i) / bins);
  e.front() = lo;
  e.back() = hi;
  return e;
}

namespace detail {

/// Bin index by the half-open rule; -1 = underflow, bins = overflow.
inline int bin_index(const std::vector<double>& edges, double v) {
  if (v < edges.front()) return -1;
  if (v >= edges.back()) return static_cast<int>(edges.size()) - 1;
  const auto it = std::upper_bound(edges.begin(), edges.end(), v);
  return static_cast<int>(it - edges.begin()) - 1;
}

}  // namespace detail

/// Bins samples over explicitly given edges.
inline Histogram histogram_with_edges(const std::vector<double>& samples,
                                      std::vector<double> edges,
                                      HistScale scale = HistScale::linear) {
  Histogram h;
  h.edges = std::move(edges);
  h.scale = scale;
  h.counts.assign(h.edges.size() - 1, 0);
  h.validate();
  const int nbins = h.bins();
  for (double v : samples) {
    const int i = detail::bin_index(h.edges, v);
    if (i < 0)
      ++h.underflow;
    else if (i >= nbins)
      ++h.overflow;
    else
      ++h.counts[static_cast<std::size_t>(i)];
  }
  return h;
}

/// Bins samples into `bins` equal-width (or log-spaced) bins. Without an
/// explicit range the edges span the sample's min/max; log scale then
/// requires strictly positive samples.
inline Histogram build_histogram(const std::vector<double>& samples, int bins,
                                 HistScale scale = HistScale::linear,
                                 std::optional<std::pair<double, double>> range = std::nullopt) {
  if (bins < 1) throw std::invalid_argument("build_histogram: bins must be >= 1");
  double lo, hi;
  if (range) {
    lo = range->first;
    hi = range->second;
  } else {
    if (samples.empty()) throw std::invalid_argument("build_histogram: empty sample, no range");
    const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
    lo = *mn;
    hi = *mx;
    if (!(hi > lo)) throw std::invalid_argument("build_histogram: degenerate sample range");
  }
  if (scale == HistScale::log && !(lo > 0))
    throw std::invalid_argument("build_histogram: log scale requires positive range");
  return histogram_with_edges(
      samples, scale == HistScale::linear ? linear_edges(lo, hi, bins) : log_edges(lo, hi, bins),
      scale);
}

/// KL(reference || generated) over in-range counts normalized to
/// probabilities; generated bins are floored at epsilon and renormalized so
/// the value stays finite for sparse tails. Exactly 0 iff the two count
/// vectors agree after normalization.
inline double kl_divergence(const Histogram& reference, const Histogram& generated,
                            double epsilon = 1e-12) {
  reference.validate();
  generated.validate();
  if (reference.edges != generated.edges)
    throw std::invalid_argument("kl_divergence: histograms must share edges");
  const double tp = static_cast<double>(reference.total_in_range());
  const double tq = static_cast<double>(generated.total_in_range());
  if (tp == 0 || tq == 0) throw std::invalid_argument("kl_divergence: empty in-range histogram");

  // Identical normalized counts (cross-multiplied, exact in integers) -> 0.
  bool identical = true;
  for (std::size_t i = 0; i < reference.counts.size() && identical; ++i)
    identical = static_cast<double>(reference.counts[i]) * tq ==
                static_cast<double>(generated.counts[i]) * tp;
  if (identical) return 0.0;

  std::vector<double> q(generated.counts.size());
  double qsum = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    q[i] = std::max(static_cast<double>(generated.counts[i]) / tq, epsilon);
    qsum += q[i];
  }
  double kl = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double p = static_cast<double>(reference.counts[i]) / tp;
    if (p > 0) kl += p * std::log(p / (q[i] / qsum));
  }
  return kl;
}

// ---------------------------------------------------------------------------
// Data augmentation check
// ---------------------------------------------------------------------------

/// Three-point KL comparison for sample-size scaling: if the generator has
/// learned the reference, enlarging both samples tenfold while scaling the
/// bin count proportionally should keep the KL constant or lower it.
struct AugmentationReport {
  std::size_t small_size = 10000;
  std::size_t large_size = 100000;
  int small_bins = 100;
  int proportional_bins = 1000;
  double kl_small = 0;       // small_size draws, small_bins
  double kl_large_same = 0;  // large_size draws, small_bins
  double kl_large_prop = 0;  // large_size draws, proportional_bins
  double margin = 0.05;
  double sanity_bound = 1.0;
  bool pass = false;
};

/// reference_sampler(n) must return n fresh 1D reference draws. `generated`
/// supplies the model samples (column `dim`); it must hold at least
/// large_size rows.
inline AugmentationReport data_augmentation_check(
    const std::function<std::vector<double>(std::size_t)>& reference_sampler,
    const SampleSet& generated, int dim = 0, std::size_t small_size = 10000,
    std::size_t large_size = 100000, int small_bins = 100,
    std::optional<std::pair<double, double>> range = std::nullopt) {
  generated.validate();
  if (dim < 0 || dim >= generated.dim)
    throw std::invalid_argument("data_augmentation_check: bad dim");
  if (generated.rows.size() < large_size)
    throw std::invalid_argument("data_augmentation_check: insufficient generated samples");
  if (small_size > large_size)
    throw std::invalid_argument("data_augmentation_check: small_size > large_size");

  const std::vector<double> gen_all = generated.column(dim);
  AugmentationReport r;
  r.small_size = small_size;
  r.large_size = large_size;
  r.small_bins = small_bins;
  r.proportional_bins = static_cast<int>(
      static_cast<std::size_t>(small_bins) * (large_size / small_size));

  const auto kl_at = [&](std::size_t n, int bins) {
    const std::vector<double> ref = reference_sampler(n);
    if (ref.size() != n)
      throw std::runtime_error("data_augmentation_check: sampler returned wrong count");
    const std::vector<double> gen(gen_all.begin(), gen_all.begin() + static_cast<long>(n));
    const Histogram href = build_histogram(ref, bins, HistScale::linear, range);
    const Histogram hgen = histogram_with_edges(gen, href.edges, href.scale);
    return kl_divergence(href, hgen);
  };

  r.kl_small = kl_at(small_size, small_bins);
  r.kl_large_same = kl_at(large_size, small_bins);
  r.kl_large_prop = kl_at(large_size, r.proportional_bins);
  // "Stays constant or decreases" up to statistical noise, plus an absolute
  // sanity bound so a degenerate generator (both KLs huge) cannot pass.
  r.pass = r.kl_large_prop <= r.kl_small + r.margin && r.kl_small <= r.sanity_bound;
  return r;
}

// ---------------------------------------------------------------------------
// Covariance eigenvalue agreement
// ---------------------------------------------------------------------------

/// Unbiased (n-1) sample covariance of a SampleSet.
inline Eigen::MatrixXd sample_covariance(const SampleSet& s) {
  s.validate();
  const auto n = static_cast<Eigen::Index>(s.rows.size());
  if (n < 2) throw std::invalid_argument("sample_covariance: need at least 2 rows");
  Eigen::MatrixXd x(n, s.dim);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < s.dim; ++j)
      x(i, j) = s.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  return centered.transpose() * centered / static_cast<double>(n - 1);
}

/// Relative disagreement of summed covariance eigenvalues,
/// |tr C_ref - tr C_gen| / tr C_ref (the eigenvalue sum equals the trace).
/// Asymmetric by construction: the reference trace normalizes.
inline double covariance_eigen_agreement(const SampleSet& reference, const SampleSet& generated) {
  if (reference.dim != generated.dim)
    throw std::invalid_argument("covariance_eigen_agreement: dim mismatch");
  if (reference.dim < 2)
    throw std::invalid_argument("covariance_eigen_agreement: need dim >= 2");
  const double tr_ref = sample_covariance(reference).trace();
  const double tr_gen = sample_covariance(generated).trace();
  if (!(tr_ref > 0))
    throw std::invalid_argument("covariance_eigen_agreement: degenerate reference covariance");
  return std::abs(tr_ref - tr_gen) / tr_ref;
}

// ---------------------------------------------------------------------------
// 2D ratio grids
// ---------------------------------------------------------------------------

/// Per-cell count ratio (reference / generated) over a 2D binning. Cells
/// empty in either set carry valid=false and ratio 0.
struct RatioGrid {
  std::vector<double> x_edges, y_edges;
  HistScale x_scale = HistScale::linear, y_scale = HistScale::linear;
  std::vector<std::uint64_t> ref_counts, gen_counts;  // row-major, y*bins_x+x
  std::vector<double> ratio;
  std::vector<bool> valid;

  int bins_x() const { return static_cast<int>(x_edges.size()) - 1; }
  int bins_y() const { return static_cast<int>(y_edges.size()) - 1; }
  std::size_t cell(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(bins_x()) +
           static_cast<std::size_t>(ix);
  }
};

inline RatioGrid build_ratio_grid(const SampleSet& reference, const SampleSet& generated,
                                  int dim_x, int dim_y, int bins_x, int bins_y,
                                  HistScale scale_x = HistScale::linear,
                                  HistScale scale_y = HistScale::linear,
                                  std::optional<std::pair<double, double>> range_x = std::nullopt,
                                  std::optional<std::pair<double, double>> range_y = std::nullopt) {
  reference.validate();
  generated.validate();
  if (reference.dim != generated.dim)
    throw std::invalid_argument("build_ratio_grid: dim mismatch");
  if (dim_x < 0 || dim_x >= reference.dim || dim_y < 0 || dim_y >= reference.dim)
    throw std::invalid_argument("build_ratio_grid: bad dims");
  // default ranges span the reference data on each axis
  const Histogram hx = build_histogram(reference.column(dim_x), bins_x, scale_x, range_x);
  const Histogram hy = build_histogram(reference.column(dim_y), bins_y, scale_y, range_y);

  RatioGrid g;
  g.x_edges = hx.edges;
  g.y_edges = hy.edges;
  g.x_scale = scale_x;
  g.y_scale = scale_y;
  const std::size_t n_cells =
      static_cast<std::size_t>(bins_x) * static_cast<std::size_t>(bins_y);
  g.ref_counts.assign(n_cells, 0);
  g.gen_counts.assign(n_cells, 0);
  g.ratio.assign(n_cells, 0.0);
  g.valid.assign(n_cells, false);

  const auto accumulate = [&](const SampleSet& s, std::vector<std::uint64_t>& counts) {
    for (const auto& row : s.rows) {
      const int ix = detail::bin_index(g.x_edges, row[static_cast<std::size_t>(dim_x)]);
      const int iy = detail::bin_index(g.y_edges, row[static_cast<std::size_t>(dim_y)]);
      if (ix >= 0 && ix < bins_x && iy >= 0 && iy < bins_y) ++counts[g.cell(ix, iy)];
    }
  };
  accumulate(reference, g.ref_counts);
  accumulate(generated, g.gen_counts);
  for (std::size_t c = 0; c < n_cells; ++c) {
    if (g.ref_counts[c] > 0 && g.gen_counts[c] > 0) {
      g.valid[c] = true;
      g.ratio[c] = static_cast<double>(g.ref_counts[c]) / static_cast<double>(g.gen_counts[c]);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const Histogram& h) {
  return {{"edges", h.edges},   {"counts", h.counts},     {"scale", to_string(h.scale)},
          {"underflow", h.underflow}, {"overflow", h.overflow}};
}

inline nlohmann::json to_json(const AugmentationReport& r) {
  return {{"small_size", r.small_size},
          {"large_size", r.large_size},
          {"small_bins", r.small_bins},
          {"proportional_bins", r.proportional_bins},
          {"kl_small", r.kl_small},
          {"kl_large_same_bins", r.kl_large_same},
          {"kl_large_proportional_bins", r.kl_large_prop},
          {"margin", r.margin},
          {"sanity_bound", r.sanity_bound},
          {"pass", r.pass}};
}

inline nlohmann::json to_json(const RatioGrid& g) {
  std::vector<int> valid_int(g.valid.begin(), g.valid.end());
  return {{"x_edges", g.x_edges},       {"y_edges", g.y_edges},
          {"x_scale", to_string(g.x_scale)}, {"y_scale", to_string(g.y_scale)},
          {"ref_counts", g.ref_counts}, {"gen_counts", g.gen_counts},
          {"ratio", g.ratio},           {"valid", valid_int}};
}

/// One cell per row: x_lo,x_hi,y_lo,y_hi,ref_count,gen_count,ratio,valid.
inline void save_ratio_grid_csv(const std::string& path, const RatioGrid& g) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_ratio_grid_csv: cannot open " + path);
  f << "x_lo,x_hi,y_lo,y_hi,ref_count,gen_count,ratio,valid\n";
  for (int iy = 0; iy < g.bins_y(); ++iy)
    for (int ix = 0; ix < g.bins_x(); ++ix) {
      const std::size_t c = g.cell(ix, iy);
      f << format_double(g.x_edges[static_cast<std::size_t>(ix)]) << ','
        << format_double(g.x_edges[static_cast<std::size_t>(ix) + 1]) << ','
        << format_double(g.y_edges[static_cast<std::size_t>(iy)]) << ','
        << format_double(g.y_edges[static_cast<std::size_t>(iy) + 1]) << ','
        << g.ref_counts[c] << ',' << g.gen_counts[c] << ','
        << format_double(g.ratio[c]) << ',' << (g.valid[c] ? 1 : 0) << '\n';
    }
  if (!f) throw std::runtime_error("save_ratio_grid_csv: write failed for " + path);
}

}  // namespace sqg
