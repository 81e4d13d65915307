#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "ncst/config.hpp"
#include "ncst/error.hpp"
#include "ncst/numerics.hpp"

namespace ncst {

namespace detail {

struct CentralMoments {
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
};

inline CentralMoments central_moments(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  CentralMoments m;
  for (double v : x) {
    const double d = v - mean;
    const double d2 = d * d;
    m.m2 += d2;
    m.m3 += d2 * d;
    m.m4 += d2 * d2;
  }
  m.m2 /= n;
  m.m3 /= n;
  m.m4 /= n;
  return m;
}

}  // namespace detail

// Moment-definition skewness m3 / m2^{3/2}.
inline double sample_skewness(std::span<const double> x) {
  if (x.size() < 2) throw DegenerateSample("skewness needs at least two observations");
  const auto m = detail::central_moments(x);
  if (!(m.m2 > 0.0)) throw DegenerateSample("skewness: sample has zero variance");
  return m.m3 / std::pow(m.m2, 1.5);
}

// m4 / m2^2 - 3.
inline double excess_kurtosis(std::span<const double> x) {
  if (x.size() < 4) throw DegenerateSample("kurtosis needs at least four observations");
  const auto m = detail::central_moments(x);
  if (!(m.m2 > 0.0)) throw DegenerateSample("kurtosis: sample has zero variance");
  return m.m4 / (m.m2 * m.m2) - 3.0;
}

// Type-7 quantile of already sorted data: h = (n-1) q, linear interpolation.
inline double percentile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw DegenerateSample("percentile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("percentile: q must lie in [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

inline double percentile(std::span<const double> x, double q) {
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  return percentile_sorted(s, q);
}

// Sup-distance between the two empirical cdfs.
inline double ks_two_sample(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw DegenerateSample("ks_two_sample: both samples must be nonempty");
  std::vector<double> a(x.begin(), x.end()), b(y.begin(), y.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

struct QqPoint {
  double p;
  double x;
  double y;
};

inline std::vector<QqPoint> qq_points(std::span<const double> x, std::span<const double> y,
                                      std::span<const double> probs) {
  std::vector<double> a(x.begin(), x.end()), b(y.begin(), y.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<QqPoint> out;
  out.reserve(probs.size());
  for (double p : probs) {
    // The top percentile is left out: a single extreme draw would dominate it.
    if (!(p >= 0.0 && p <= 0.999 + 1e-12)) throw DomainError("qq_points: probabilities must lie in [0, 0.999]");
    out.push_back({p, percentile_sorted(a, p), percentile_sorted(b, p)});
  }
  return out;
}

// 0.01, 0.02, ..., 0.99 followed by 0.999.
inline std::vector<double> default_qq_probs() {
  std::vector<double> p;
  for (int i = 1; i <= 99; ++i) p.push_back(i / 100.0);
  p.push_back(0.999);
  return p;
}

// Values at or below the q-quantile of x.
inline std::vector<double> truncate_upper(std::span<const double> x, double q) {
  const double cut = percentile(x, q);
  std::vector<double> out;
  out.reserve(x.size());
  for (double v : x)
    if (v <= cut) out.push_back(v);
  return out;
}

struct SummaryRow {
  std::string label;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double percentile_95 = 0.0;
  std::size_t n = 0;
};

inline SummaryRow summarize(std::string label, std::span<const double> x) {
  return {std::move(label), sample_skewness(x), excess_kurtosis(x), percentile(x, 0.95), x.size()};
}

/// Kernel density estimate on a regular grid. For 2-D grids `density` is stored
/// row-major with axis1 as the slow index.
struct DensityGrid {
  std::vector<double> axis1;
  std::vector<double> axis2;
  std::vector<double> density;
  std::vector<double> bandwidth;

  bool two_dimensional() const noexcept { return !axis2.empty(); }
  double at(std::size_t i, std::size_t j = 0) const { return density[i * std::max<std::size_t>(axis2.size(), 1) + j]; }
};

struct AxisRange {
  double lo;
  double hi;
};

struct GridSpec {
  std::size_t points = Defaults::grid_points;
  double lower_quantile = Defaults::grid_lower_quantile;
  double upper_quantile = Defaults::grid_upper_quantile;
  // Explicit per-axis ranges override the quantile box when nonempty.
  std::vector<AxisRange> ranges;
};

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) v[i] = lo + step * static_cast<double>(i);
  v.back() = hi;
  return v;
}

namespace detail {

// Linear binning onto a regular grid with `pad` extra cells on each side, followed by
// a truncated Gaussian convolution. Returns the density on the unpadded cells.
class BinnedAxis {
 public:
  BinnedAxis(double lo, double hi, std::size_t points, double h)
      : lo_(lo), step_((hi - lo) / static_cast<double>(points - 1)), points_(points) {
    pad_ = static_cast<std::size_t>(std::ceil(5.0 * h / step_)) + 1;
    // Kernel taps at multiples of the grid step out to 5 bandwidths.
    const double inv_h = 1.0 / h;
    for (std::size_t d = 0; d <= pad_; ++d) {
      const double u = static_cast<double>(d) * step_ * inv_h;
      taps_.push_back(std::exp(-0.5 * u * u) * inv_h / std::sqrt(2.0 * std::numbers::pi));
    }
  }

  std::size_t extended() const noexcept { return points_ + 2 * pad_; }
  std::size_t pad() const noexcept { return pad_; }

  // Left cell index (in the extended grid) and weight of the right neighbour; false if off-grid.
  bool locate(double x, std::size_t& cell, double& frac) const {
    const double pos = (x - lo_) / step_ + static_cast<double>(pad_);
    if (!(pos >= 0.0) || pos >= static_cast<double>(extended() - 1)) return false;
    cell = static_cast<std::size_t>(pos);
    frac = pos - static_cast<double>(cell);
    return true;
  }

  // Convolve along this axis: out[i] = sum_j in[j] K(i - j), for i over the unpadded range.
  void convolve(const double* in, std::size_t stride_in, double* out, std::size_t stride_out) const {
    const auto ext = static_cast<std::ptrdiff_t>(extended());
    const auto reach = static_cast<std::ptrdiff_t>(pad_);
    for (std::size_t i = 0; i < points_; ++i) {
      const auto c = static_cast<std::ptrdiff_t>(i + pad_);
      double s = 0.0;
      for (std::ptrdiff_t d = -reach; d <= reach; ++d) {
        const std::ptrdiff_t j = c + d;
        if (j < 0 || j >= ext) continue;
        s += in[static_cast<std::size_t>(j) * stride_in] * taps_[static_cast<std::size_t>(std::abs(d))];
      }
      out[i * stride_out] = s;
    }
  }

 private:
  double lo_, step_;
  std::size_t points_, pad_ = 0;
  std::vector<double> taps_;
};

inline double sample_sd(std::span<const double> x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

}  // namespace detail

/// Gaussian product-kernel density estimate of a 1- or 2-column sample on a grid.
/// Bandwidths follow Silverman's rule 1.06 sd n^{-1/5} (1-D) or n^{-1/6} (2-D).
inline DensityGrid kde_grid(const Matrix& samples, const GridSpec& spec = {}) {
  const auto k = samples.cols();
  if (k != 1 && k != 2) throw DimensionMismatch("kde_grid: samples must have one or two columns");
  if (samples.rows() < 30) throw DegenerateSample("kde_grid: need at least 30 observations");
  if (spec.points < 2) throw DomainError("kde_grid: need at least two grid points per axis");
  if (!spec.ranges.empty() && spec.ranges.size() != static_cast<std::size_t>(k))
    throw DimensionMismatch("kde_grid: one range per axis");
  const auto n = static_cast<std::size_t>(samples.rows());
  const double rate = k == 1 ? -0.2 : -1.0 / 6.0;

  DensityGrid g;
  std::vector<detail::BinnedAxis> axes;
  for (Eigen::Index j = 0; j < k; ++j) {
    std::vector<double> col(samples.col(j).data(), samples.col(j).data() + n);
    const double sd = detail::sample_sd(col);
    if (!(sd > 0.0)) throw DegenerateSample("kde_grid: axis " + std::to_string(j + 1) + " has zero variance");
    const double h = 1.06 * sd * std::pow(static_cast<double>(n), rate);
    AxisRange range;
    if (spec.ranges.empty()) {
      std::sort(col.begin(), col.end());
      range = {percentile_sorted(col, spec.lower_quantile), percentile_sorted(col, spec.upper_quantile)};
    } else {
      range = spec.ranges[static_cast<std::size_t>(j)];
    }
    if (!(range.hi > range.lo)) throw DomainError("kde_grid: empty grid range");
    g.bandwidth.push_back(h);
    (j == 0 ? g.axis1 : g.axis2) = linspace(range.lo, range.hi, spec.points);
    axes.emplace_back(range.lo, range.hi, spec.points, h);
  }

  const double w = 1.0 / static_cast<double>(n);
  if (k == 1) {
    std::vector<double> bins(axes[0].extended(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t c;
      double f;
      if (!axes[0].locate(samples(static_cast<Eigen::Index>(i), 0), c, f)) continue;
      bins[c] += w * (1.0 - f);
      bins[c + 1] += w * f;
    }
    g.density.assign(spec.points, 0.0);
    axes[0].convolve(bins.data(), 1, g.density.data(), 1);
    return g;
  }

  const std::size_t e1 = axes[0].extended(), e2 = axes[1].extended();
  std::vector<double> bins(e1 * e2, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c1, c2;
    double f1, f2;
    const auto row = static_cast<Eigen::Index>(i);
    if (!axes[0].locate(samples(row, 0), c1, f1) || !axes[1].locate(samples(row, 1), c2, f2)) continue;
    bins[c1 * e2 + c2] += w * (1.0 - f1) * (1.0 - f2);
    bins[c1 * e2 + c2 + 1] += w * (1.0 - f1) * f2;
    bins[(c1 + 1) * e2 + c2] += w * f1 * (1.0 - f2);
    bins[(c1 + 1) * e2 + c2 + 1] += w * f1 * f2;
  }
  // Smooth along axis 2 for every extended row, then along axis 1 per output column.
  std::vector<double> partial(e1 * spec.points, 0.0);
  for (std::size_t r = 0; r < e1; ++r) axes[1].convolve(&bins[r * e2], 1, &partial[r * spec.points], 1);
  g.density.assign(spec.points * spec.points, 0.0);
  for (std::size_t c = 0; c < spec.points; ++c)
    axes[0].convolve(&partial[c], spec.points, &g.density[c], spec.points);
  return g;
}

// Trapezoidal integral of the grid density.
inline double grid_integral(const DensityGrid& g) {
  auto weights = [](const std::vector<double>& axis) {
    std::vector<double> w(axis.size(), 0.0);
    for (std::size_t i = 0; i + 1 < axis.size(); ++i) {
      const double half = 0.5 * (axis[i + 1] - axis[i]);
      w[i] += half;
      w[i + 1] += half;
    }
    return w;
  };
  const auto w1 = weights(g.axis1);
  if (!g.two_dimensional()) {
    double s = 0.0;
    for (std::size_t i = 0; i < w1.size(); ++i) s += w1[i] * g.density[i];
    return s;
  }
  const auto w2 = weights(g.axis2);
  double s = 0.0;
  for (std::size_t i = 0; i < w1.size(); ++i)
    for (std::size_t j = 0; j < w2.size(); ++j) s += w1[i] * w2[j] * g.density[i * w2.size() + j];
  return s;
}

}  // namespace ncst
