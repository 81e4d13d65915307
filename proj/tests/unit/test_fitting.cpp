#include <cmath>
#include <numbers>

#include <boost/math/distributions/students_t.hpp>
#include <gtest/gtest.h>

#include "ncst/fitting.hpp"

using namespace ncst;

TEST(Families, NamesAndCounts) {
  EXPECT_EQ(param_count(Family::MVN, 2), 5);
  EXPECT_EQ(param_count(Family::SN, 2), 7);
  EXPECT_EQ(param_count(Family::AZZALINI_ST, 2), 8);
  EXPECT_EQ(param_count(Family::NCST, 2), 8);
  EXPECT_EQ(param_count(Family::NCST, 3), 13);
  EXPECT_EQ(parse_family("ncst"), Family::NCST);
  EXPECT_EQ(parse_family("Azzalini_ST"), Family::AZZALINI_ST);
  EXPECT_EQ(parse_family("ast"), Family::AZZALINI_ST);
  EXPECT_FALSE(parse_family("gamma").has_value());
}

TEST(InformationCriteria, Formulas) {
  const auto [aic, sic] = information_criteria(-100.0, 5, 100);
  EXPECT_DOUBLE_EQ(aic, 210.0);
  EXPECT_DOUBLE_EQ(sic, 5.0 * std::log(100.0) + 200.0);
}

TEST(Encoding, RoundTrip) {
  ModelParams p;
  p.xi = Vector(3);
  p.xi << 1, -2, 3;
  p.Omega = Matrix(3, 3);
  p.Omega << 2, 0.5, -0.3, 0.5, 1, 0.2, -0.3, 0.2, 0.7;
  p.alpha = Vector(3);
  p.alpha << 4, 0, -1;
  p.r = 3.5;
  const auto q = decode(encode(p, Family::NCST), Family::NCST, 3);
  EXPECT_NEAR((q.xi - p.xi).norm(), 0.0, 1e-14);
  EXPECT_NEAR((q.Omega - p.Omega).norm(), 0.0, 1e-14);
  EXPECT_NEAR((q.alpha - p.alpha).norm(), 0.0, 1e-14);
  EXPECT_NEAR(q.r, 3.5, 1e-14);
  const auto m = decode(encode(p, Family::MVN), Family::MVN, 3);
  EXPECT_TRUE(m.alpha.isZero(0.0));
  EXPECT_TRUE(std::isinf(m.r));
}

TEST(AzzaliniSt, SymmetricCaseIsMultivariateT) {
  Matrix om(2, 2);
  om << 2, 0.4, 0.4, 1;
  Vector xi(2), t(2);
  xi << 1, -1;
  t << 2.5, 0.3;
  const double r = 3.0, k = 2.0;
  const Vector d = t - xi;
  const double q = d.dot(om.inverse() * d);
  const double want = std::lgamma((r + k) / 2) - std::lgamma(r / 2) - (k / 2) * std::log(r * std::numbers::pi) -
                      0.5 * std::log(om.determinant()) - (r + k) / 2 * std::log1p(q / r);
  EXPECT_NEAR(azzalini_st_logpdf(t, SkewNormalParams(xi, om, Vector::Zero(2)), r), want, 1e-12);
}

TEST(AzzaliniSt, UnivariateSkewedDensity) {
  // 2 t_r(z) T_{r+1}(alpha z sqrt((r+1)/(r+z^2))) / omega.
  const double r = 4.0, alpha = 2.5, omega = 1.5, xi = 0.5;
  const boost::math::students_t_distribution<> tr(r), tr1(r + 1);
  const SkewNormalParams p(Vector::Constant(1, xi), Matrix::Constant(1, 1, omega * omega), Vector::Constant(1, alpha));
  for (double x = -5.0; x <= 8.0; x += 0.7) {
    const double z = (x - xi) / omega;
    const double want = 2.0 * boost::math::pdf(tr, z) * boost::math::cdf(tr1, alpha * z * std::sqrt((r + 1) / (r + z * z))) / omega;
    EXPECT_NEAR(azzalini_st_logpdf(Vector::Constant(1, x), p, r), std::log(want), 1e-10) << x;
  }
}

TEST(FitMvn, ClosedForm) {
  Matrix x(6, 2);
  x << 1, 2, 3, 1, 0, 0, 2, 5, 1, 1, 2, 3;
  const DataMatrix dm{{"a", "b"}, x};
  const auto f = fit_model(dm, Family::MVN);
  EXPECT_NEAR(f.params.xi(0), 1.5, 1e-14);
  EXPECT_NEAR(f.params.xi(1), 2.0, 1e-14);
  const Matrix c = x.rowwise() - x.colwise().mean();
  const Matrix cov = c.transpose() * c / 6.0;
  EXPECT_NEAR((f.params.Omega - cov).norm(), 0.0, 1e-14);
  double ll = 0.0;
  for (int i = 0; i < 6; ++i) ll += mvn_logpdf(x.row(i).transpose(), f.params.xi, cov);
  EXPECT_NEAR(f.loglik, ll, 1e-12);
  EXPECT_EQ(f.p, 5);
}

TEST(FitSn, RecoversParameters) {
  Vector xi(2), alpha(2);
  xi << 1, 2;
  alpha << 4, -2;
  Matrix om(2, 2);
  om << 4, 0.5, 0.5, 1;
  const Matrix x = sn_sample(SkewNormalParams(xi, om, alpha), 3000, RngStream{31, 0});
  const DataMatrix dm{{"a", "b"}, x};
  const auto f = fit_model(dm, Family::SN);
  EXPECT_TRUE(f.converged);
  EXPECT_NEAR(f.params.xi(0), 1.0, 0.2);
  EXPECT_NEAR(f.params.xi(1), 2.0, 0.2);
  EXPECT_NEAR(f.params.Omega(0, 0), 4.0, 0.6);
  EXPECT_NEAR(f.params.alpha(0), 4.0, 1.5);
  EXPECT_LT(f.params.alpha(1), 0.0);
  // The fitted likelihood beats the truth on the same data.
  EXPECT_GE(f.loglik, sn_loglik(x, SkewNormalParams(xi, om, alpha)) - 1e-6);
}

TEST(Compare, RecordsFailuresAndSortsByAic) {
  Matrix x(6, 2);
  x << 1, 2, 3, 1, 0, 0, 2, 5, 1, 1, 4, 2;
  const DataMatrix dm{{"a", "b"}, x};
  const auto res = compare_models(dm, all_families(), {}, {200, 1, true});
  ASSERT_EQ(res.size(), 4u);
  EXPECT_EQ(res[0].family, Family::MVN);
  ASSERT_TRUE(res[0].fit.has_value());
  for (std::size_t i = 1; i < 4; ++i) {
    EXPECT_FALSE(res[i].fit.has_value());
    EXPECT_EQ(res[i].error_type, "InsufficientData");
  }
}
