#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/fisher_f.hpp>
#include <gtest/gtest.h>

#include "ncst/transforms.hpp"

using namespace ncst;

namespace {

NcstParams quadform_setup() {
  Vector xi(2), alpha(2);
  xi << 1, 2;
  alpha << 3, 3;
  return {xi, Matrix::Identity(2, 2), alpha, 3.0};
}

Matrix half_ones() { return Matrix::Constant(2, 2, 0.5); }

}  // namespace

TEST(Quadform, ConstantsForEqualWeightProjection) {
  const auto qa = quadform_analyze(quadform_setup(), half_ones());
  EXPECT_EQ(qa.m, 1);
  EXPECT_NEAR(qa.lambda, 4.5, 1e-12);
  EXPECT_NEAR(qa.c_alpha, std::sqrt(19.0), 1e-12);
  EXPECT_NEAR(std::abs(qa.nu(0)), 3.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(qa.alpha_star, std::sqrt(18.0 / 19.0), 1e-12);
  const auto sf = skew_f_params(qa, 3.0);
  EXPECT_EQ(sf.df1, 1.0);
  EXPECT_EQ(sf.df2, 3.0);
}

TEST(Quadform, ConditionFailures) {
  const auto p = quadform_setup();
  try {
    quadform_analyze(p, Matrix::Ones(2, 2));
    FAIL() << "expected ConditionViolated";
  } catch (const ConditionViolated& e) {
    EXPECT_EQ(e.which(), "(i)");
    EXPECT_NE(std::string(e.what()).find("condition (i) violated"), std::string::npos);
  }
  EXPECT_THROW(quadform_analyze(p, Matrix::Zero(2, 2)), RankZero);
  Matrix asym(2, 2);
  asym << 1, 0.2, 0, 0;
  EXPECT_THROW(quadform_analyze(p, asym), DomainError);
  Matrix indefinite(2, 2);
  indefinite << 1, 0, 0, -1;
  EXPECT_THROW(quadform_analyze(p, indefinite), DomainError);
}

TEST(Quadform, FullRankProjectionHasM2) {
  const auto qa = quadform_analyze(quadform_setup(), Matrix::Identity(2, 2));
  EXPECT_EQ(qa.m, 2);
  EXPECT_NEAR(qa.lambda, 5.0, 1e-12);
  EXPECT_NEAR(qa.c_alpha, std::sqrt(19.0), 1e-12);
}

TEST(SkewF, CentralCaseIsFisherF) {
  for (double df1 : {1.0, 2.0}) {
    const SkewFParams sf{df1, 6.0, 0.0, 0.0};
    auto x = skew_f_sample(sf, 100000, RngStream{5, 0});
    std::sort(x.begin(), x.end());
    const boost::math::fisher_f_distribution<> ref(df1, 6.0);
    double d = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double f = boost::math::cdf(ref, x[i]);
      d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    EXPECT_LT(d, 1.95 / std::sqrt(n)) << df1;
  }
}

TEST(Affine, IdentityIsNoOp) {
  Vector xi(3), alpha(3);
  xi << 1, -2, 0.5;
  alpha << 2, -1, 0.3;
  Matrix om(3, 3);
  om << 2, 0.3, 0.1, 0.3, 1, -0.2, 0.1, -0.2, 1.5;
  const NcstParams p(xi, om, alpha, 4.0);
  const auto q = affine_transform(p, Matrix::Identity(3, 3));
  EXPECT_NEAR((q.sn.xi() - xi).norm(), 0.0, 1e-13);
  EXPECT_NEAR((q.sn.Omega() - om).norm(), 0.0, 1e-13);
  EXPECT_NEAR((q.sn.alpha() - alpha).norm(), 0.0, 1e-12);
  EXPECT_EQ(q.r, 4.0);
}

TEST(Affine, MarginOfIndependentComponents) {
  // With Omega = I the first margin has shape a1 / sqrt(1 + a2^2).
  Vector alpha(2);
  alpha << 3.0, 2.0;
  const NcstParams p(Vector::Zero(2), Matrix::Identity(2, 2), alpha, 2.0);
  Matrix e1 = Matrix::Zero(2, 1);
  e1(0, 0) = 1.0;
  const auto q = affine_transform(p, e1);
  EXPECT_NEAR(q.sn.alpha()(0), 3.0 / std::sqrt(5.0), 1e-13);
  EXPECT_NEAR(q.sn.Omega()(0, 0), 1.0, 1e-15);
}

TEST(Affine, ProjectionSamplesAgree) {
  Vector xi(2), alpha(2);
  xi << 1, 2;
  alpha << 3, 3;
  Matrix om(2, 2);
  om << 4, 0, 0, 1;
  const NcstParams p(xi, om, alpha, 3.0);
  Matrix a(2, 1);
  a << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const auto q = affine_transform(p, a);
  const Matrix direct = ncst_sample(p, 100000, RngStream{8, 0}) * a;
  const Matrix via = ncst_sample(q, 100000, RngStream{9, 0});
  const std::vector<double> x(direct.data(), direct.data() + direct.rows()), y(via.data(), via.data() + via.rows());
  EXPECT_LT(ks_two_sample(x, y), 0.01);
}

TEST(Affine, RejectsBadShapes) {
  const auto p = quadform_setup();
  EXPECT_THROW(affine_transform(p, Matrix::Identity(3, 3)), DimensionMismatch);
  EXPECT_THROW(affine_transform(p, Matrix::Identity(2, 3)), DimensionMismatch);
  EXPECT_THROW(affine_transform(p, Matrix::Ones(2, 2)), NotPositiveDefinite);
}
