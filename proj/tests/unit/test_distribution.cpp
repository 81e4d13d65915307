#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/skew_normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <gtest/gtest.h>

#include "ncst/distribution.hpp"

using namespace ncst;

namespace {

SkewNormalParams sn1(double xi, double omega2, double alpha) {
  return {Vector::Constant(1, xi), Matrix::Constant(1, 1, omega2), Vector::Constant(1, alpha)};
}

// Largest gap between the empirical cdf of x and `cdf`.
template <class F>
double ks_one_sample(std::vector<double> x, F cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
  }
  return d;
}

}  // namespace

TEST(SkewNormal, UnivariateDensityMatchesBoost) {
  for (double alpha : {-4.0, 0.0, 0.7, 12.0}) {
    const boost::math::skew_normal_distribution<> ref(0.5, 1.5, alpha);
    const auto p = sn1(0.5, 2.25, alpha);
    for (double x = -6.0; x <= 6.0; x += 0.25) {
      const double want = boost::math::pdf(ref, x);
      if (want < 1e-300) continue;
      EXPECT_NEAR(sn_logpdf(Vector::Constant(1, x), p), std::log(want), 1e-12 * std::max(1.0, std::abs(std::log(want))))
          << alpha << " " << x;
    }
  }
}

TEST(SkewNormal, BivariateDensityMatchesDefinition) {
  Vector xi(2), alpha(2), x(2);
  Matrix om(2, 2);
  xi << 1, 2;
  om << 4, 0.6, 0.6, 1;
  alpha << 3, -1;
  x << 0.3, 2.9;
  const SkewNormalParams p(xi, om, alpha);
  const Vector w = om.diagonal().cwiseSqrt();
  const Vector d = x - xi;
  const double phi2 = std::exp(-0.5 * d.dot(om.inverse() * d)) / (2 * std::numbers::pi * std::sqrt(om.determinant()));
  const double arg = alpha.dot(d.cwiseQuotient(w));
  const double want = 2.0 * phi2 * boost::math::cdf(boost::math::normal_distribution<>(), arg);
  EXPECT_NEAR(sn_logpdf(x, p), std::log(want), 1e-12);
}

TEST(SkewNormal, SamplerMatchesBoostCdf) {
  const auto p = sn1(-1.0, 4.0, 5.0);
  const Matrix s = sn_sample(p, 100000, RngStream{3, 0});
  const boost::math::skew_normal_distribution<> ref(-1.0, 2.0, 5.0);
  const std::vector<double> x(s.data(), s.data() + s.rows());
  // The 0.1% critical value of the one-sample KS statistic is about 1.95 / sqrt(n).
  EXPECT_LT(ks_one_sample(x, [&](double v) { return boost::math::cdf(ref, v); }), 1.95 / std::sqrt(1e5));
}

TEST(SkewNormal, MeanMatchesSampleMean) {
  Vector xi(2), alpha(2);
  Matrix om(2, 2);
  xi << 1, 2;
  om << 4, 1, 1, 1;
  alpha << 3, 3;
  const SkewNormalParams p(xi, om, alpha);
  const std::size_t n = 1000000;
  const Matrix s = sn_sample(p, n, RngStream{11, 0});
  const Vector mean = s.colwise().mean().transpose();
  const Vector want = sn_mean(p);
  for (int j = 0; j < 2; ++j) {
    const double se = std::sqrt((s.col(j).array() - mean(j)).square().sum() / (n - 1.0) / n);
    EXPECT_NEAR(mean(j), want(j), 4.0 * se);
  }
}

TEST(SkewNormal, RejectsBadParameters) {
  EXPECT_THROW(sn1(0.0, -1.0, 0.0), NotPositiveDefinite);
  EXPECT_THROW(SkewNormalParams(Vector::Zero(2), Matrix::Identity(2, 2), Vector::Zero(3)), DimensionMismatch);
}

TEST(InvChisqMoment, MatchesQuadrature) {
  boost::math::quadrature::exp_sinh<double> integrator;
  for (int k = 1; k <= 3; ++k)
    for (int r = k + 1; r <= 30; ++r) {
      const boost::math::chi_squared_distribution<> chi(r);
      // Substitute y = u^2 so the y^{-k/2} singularity at zero is integrable smoothly.
      auto f = [&](double u) {
        const double y = u * u;
        // Below 1e-100 the integrand is negligible but u^{1-k} can overflow.
        return u > 1e-100 && std::isfinite(y) ? 2.0 * std::pow(u, 1 - k) * boost::math::pdf(chi, y) : 0.0;
      };
      const double want = integrator.integrate(f);
      EXPECT_NEAR(inv_chisq_half_moment(r, k) / want, 1.0, 1e-8) << r << " " << k;
    }
  EXPECT_NEAR(inv_chisq_half_moment(3, 2), 1.0, 1e-14);
  EXPECT_NEAR(inv_chisq_half_moment(5, 2), 1.0 / 3.0, 1e-14);
  EXPECT_THROW(inv_chisq_half_moment(2, 2), MomentUndefined);
}

TEST(NcstMoments, MeanNeedsRAboveOne) {
  const NcstParams p(Vector::Zero(2), Matrix::Identity(2, 2), Vector::Ones(2), 1.0);
  EXPECT_THROW(ncst_mean(p), MomentUndefined);
  EXPECT_THROW(NcstParams(Vector::Zero(1), Matrix::Identity(1, 1), Vector::Zero(1), 0.0), DomainError);
}

TEST(NcstDensity, SymmetricCaseMatchesStudentT) {
  const double r = 4.0;
  const NcstParams p(Vector::Zero(1), Matrix::Constant(1, 1, 2.25), Vector::Zero(1), r);
  const McConfig cfg{10000, 5, true};
  const boost::math::students_t_distribution<> td(r);
  for (double t = -8.0; t <= 8.0; t += 0.5) {
    const double want = boost::math::pdf(td, t / 1.5) / 1.5;
    EXPECT_NEAR(std::exp(ncst_mc_logpdf(Vector::Constant(1, t), p, cfg)), want, 0.02) << t;
  }
}

TEST(NcstDensity, SkewedCaseMatchesMixingIntegral) {
  const double r = 3.0;
  const auto sn = sn1(1.0, 4.0, 3.0);
  const NcstParams p(sn, r);
  const McConfig cfg{20000, 9, true};
  const boost::math::chi_squared_distribution<> chi(r);
  boost::math::quadrature::exp_sinh<double> integrator;
  for (double t : {-1.0, 0.5, 1.0, 2.0, 4.0, 10.0}) {
    auto f = [&](double y) {
      if (!(y > 0.0) || !std::isfinite(y)) return 0.0;
      const double s = std::sqrt(y / r);
      return std::exp(sn_logpdf(Vector::Constant(1, t * s), sn)) * s * boost::math::pdf(chi, y);
    };
    const double want = integrator.integrate(f);
    const double got = std::exp(ncst_mc_logpdf(Vector::Constant(1, t), p, cfg));
    EXPECT_NEAR(got / want, 1.0, 0.03) << t;
  }
}

TEST(NcstDensity, CommonRandomNumbersAreBitIdentical) {
  const NcstParams p(Vector::Ones(2), Matrix::Identity(2, 2), Vector::Constant(2, 2.0), 5.0);
  const Matrix data = ncst_sample(p, 50, RngStream{1, 0});
  const McConfig cfg{500, 3, true};
  EXPECT_EQ(ncst_loglik(data, p, cfg), ncst_loglik(data, p, cfg));
  McConfig other = cfg;
  other.seed = 4;
  EXPECT_NE(ncst_loglik(data, p, cfg), ncst_loglik(data, p, other));
  McConfig fresh = cfg;
  fresh.crn = false;
  EXPECT_EQ(ncst_loglik(data, p, fresh), ncst_loglik(data, p, fresh));
}

TEST(NcstSampler, SymmetricMarginIsStudentT) {
  const double r = 5.0;
  const NcstParams p(Vector::Zero(2), Matrix::Identity(2, 2), Vector::Zero(2), r);
  const Matrix t = ncst_sample(p, 100000, RngStream{17, 0});
  const boost::math::students_t_distribution<> td(r);
  for (int j = 0; j < 2; ++j) {
    const std::vector<double> x(t.col(j).data(), t.col(j).data() + t.rows());
    EXPECT_LT(ks_one_sample(x, [&](double v) { return boost::math::cdf(td, v); }), 1.95 / std::sqrt(1e5));
  }
}
