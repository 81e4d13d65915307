#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "ncst/random.hpp"
#include "ncst/stats.hpp"

using namespace ncst;

TEST(Moments, SmallSampleByHand) {
  // Mean 1/4: m2 = 3/16, m3 = 3/32, m4 = 21/256.
  const std::vector<double> x{0, 0, 0, 1};
  EXPECT_NEAR(sample_skewness(x), 2.0 / std::sqrt(3.0), 1e-14);
  EXPECT_NEAR(excess_kurtosis(x), -2.0 / 3.0, 1e-14);
  const std::vector<double> flat{2, 2, 2};
  EXPECT_THROW(sample_skewness(flat), DegenerateSample);
}

TEST(Percentile, TypeSeven) {
  const std::vector<double> x{4, 1, 3, 2};
  EXPECT_DOUBLE_EQ(percentile(x, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(percentile(x, 0.95), 3.85);
  EXPECT_DOUBLE_EQ(percentile(x, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(percentile(x, 1.0), 4.0);
}

TEST(KolmogorovSmirnov, TwoSample) {
  const std::vector<double> a{1, 2, 3}, b{4, 5}, c{1, 2, 3, 4}, d{3, 4, 5, 6};
  EXPECT_DOUBLE_EQ(ks_two_sample(a, a), 0.0);
  EXPECT_DOUBLE_EQ(ks_two_sample(a, b), 1.0);
  EXPECT_DOUBLE_EQ(ks_two_sample(c, d), 0.5);
  EXPECT_DOUBLE_EQ(ks_two_sample(d, c), 0.5);
}

TEST(QuantilePairs, RejectTopPercentile) {
  const std::vector<double> a{1, 2, 3, 4}, probs{0.5, 0.9999};
  EXPECT_THROW(qq_points(a, a, probs), DomainError);
  const auto qq = qq_points(a, a, default_qq_probs());
  EXPECT_EQ(qq.size(), 100u);
  EXPECT_DOUBLE_EQ(qq[49].x, 2.5);
}

TEST(Truncation, KeepsValuesAtOrBelowQuantile) {
  std::vector<double> x;
  for (int i = 1; i <= 1000; ++i) x.push_back(i);
  const auto t = truncate_upper(x, 0.999);
  EXPECT_EQ(t.size(), 999u);
}

namespace {

double direct_kde_1d(const std::vector<double>& x, double at, double h) {
  double s = 0.0;
  for (double v : x) s += std::exp(-0.5 * std::pow((at - v) / h, 2));
  return s / (static_cast<double>(x.size()) * h * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace

TEST(Kde, BinnedMatchesDirectSum1D) {
  const auto z = draw_std_normal(RngStream{21, 0}, 5000);
  Matrix m(5000, 1);
  for (int i = 0; i < 5000; ++i) m(i, 0) = z[static_cast<std::size_t>(i)] * 2.0 + 1.0;
  std::vector<double> col(m.data(), m.data() + m.rows());
  GridSpec spec;
  spec.points = 400;
  const auto g = kde_grid(m, spec);
  EXPECT_NEAR(g.bandwidth[0], 1.06 * detail::sample_sd(col) * std::pow(5000.0, -0.2), 1e-14);
  for (std::size_t i = 0; i < g.axis1.size(); i += 37)
    EXPECT_NEAR(g.at(i), direct_kde_1d(col, g.axis1[i], g.bandwidth[0]), 2e-3 * direct_kde_1d(col, 1.0, g.bandwidth[0]));
  EXPECT_NEAR(grid_integral(g), 1.0, 0.01);
}

TEST(Kde, BinnedMatchesDirectSum2D) {
  const auto z = draw_std_normal(RngStream{22, 0}, 6000);
  Matrix m(3000, 2);
  for (int i = 0; i < 3000; ++i) {
    m(i, 0) = z[static_cast<std::size_t>(2 * i)];
    m(i, 1) = 0.5 * z[static_cast<std::size_t>(2 * i)] + z[static_cast<std::size_t>(2 * i + 1)];
  }
  GridSpec spec;
  spec.points = 120;
  const auto g = kde_grid(m, spec);
  ASSERT_TRUE(g.two_dimensional());
  EXPECT_NEAR(g.bandwidth[1] / g.bandwidth[0],
              detail::sample_sd(std::vector<double>(m.col(1).data(), m.col(1).data() + 3000)) /
                  detail::sample_sd(std::vector<double>(m.col(0).data(), m.col(0).data() + 3000)),
              1e-12);
  const double h1 = g.bandwidth[0], h2 = g.bandwidth[1];
  double peak = 0.0;
  for (double v : g.density) peak = std::max(peak, v);
  for (std::size_t i = 5; i < 120; i += 23)
    for (std::size_t j = 7; j < 120; j += 29) {
      double s = 0.0;
      for (int r = 0; r < 3000; ++r)
        s += std::exp(-0.5 * std::pow((g.axis1[i] - m(r, 0)) / h1, 2) - 0.5 * std::pow((g.axis2[j] - m(r, 1)) / h2, 2));
      s /= 3000.0 * 2.0 * std::numbers::pi * h1 * h2;
      EXPECT_NEAR(g.at(i, j), s, 5e-3 * peak);
    }
}

TEST(Kde, RejectsBadInput) {
  EXPECT_THROW(kde_grid(Matrix::Zero(10, 1)), DegenerateSample);
  EXPECT_THROW(kde_grid(Matrix::Zero(100, 3)), DimensionMismatch);
  EXPECT_THROW(kde_grid(Matrix::Zero(100, 1)), DegenerateSample);
}
