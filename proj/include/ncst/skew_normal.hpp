#pragma once

#include <cmath>
#include <numbers>

#include "ncst/numerics.hpp"
#include "ncst/random.hpp"

namespace ncst {

/// Parameters of the multivariate skew-normal SN_k(xi, Omega, alpha).
///
/// The density is 2 phi_k(x - xi; Omega) Phi(alpha' omega^{-1} (x - xi)), where
/// omega = diag(sqrt(diag Omega)). The scale factors, the correlation matrix
/// Omega_z = omega^{-1} Omega omega^{-1} and the skewness direction
/// delta = Omega_z alpha / sqrt(1 + alpha' Omega_z alpha) are derived on
/// construction and cannot be set independently.
class SkewNormalParams {
 public:
  SkewNormalParams(Vector xi, Matrix omega_full, Vector alpha)
      : xi_(std::move(xi)), Omega_(std::move(omega_full)), alpha_(std::move(alpha)),
        chol_(cholesky(Omega_)) {
    const auto k = xi_.size();
    if (Omega_.rows() != k || alpha_.size() != k)
      throw DimensionMismatch("SkewNormalParams: xi, Omega and alpha must agree in dimension");
    if (!xi_.allFinite() || !alpha_.allFinite())
      throw DomainError("SkewNormalParams: xi and alpha must be finite");
    omega_ = Omega_.diagonal().cwiseSqrt();
    Omega_z_ = omega_.cwiseInverse().asDiagonal() * Omega_ * omega_.cwiseInverse().asDiagonal();
    Omega_z_.diagonal().setOnes();
    const double q = alpha_.dot(Omega_z_ * alpha_);
    delta_ = Omega_z_ * alpha_ / std::sqrt(1.0 + q);
    symmetric_ = alpha_.isZero(0.0);
  }

  Eigen::Index dim() const noexcept { return xi_.size(); }
  const Vector& xi() const noexcept { return xi_; }
  const Matrix& Omega() const noexcept { return Omega_; }
  const Vector& alpha() const noexcept { return alpha_; }
  /// Diagonal of omega.
  const Vector& omega() const noexcept { return omega_; }
  Matrix omega_matrix() const { return omega_.asDiagonal(); }
  const Matrix& Omega_z() const noexcept { return Omega_z_; }
  const Vector& delta() const noexcept { return delta_; }
  const Cholesky& chol() const noexcept { return chol_; }
  bool symmetric() const noexcept { return symmetric_; }

 private:
  Vector xi_;
  Matrix Omega_;
  Vector alpha_;
  Cholesky chol_;
  Vector omega_;
  Matrix Omega_z_;
  Vector delta_;
  bool symmetric_ = true;
};

inline double sn_logpdf(const Vector& x, const SkewNormalParams& p) {
  const double base = mvn_logpdf(x, p.xi(), p.chol());
  if (p.symmetric()) return base;
  const double arg = p.alpha().dot((x - p.xi()).cwiseQuotient(p.omega()));
  return kLog2 + base + std_normal_logcdf(arg);
}

namespace detail {

// Factor A with A A' = [[1, delta'], [delta, Omega_z]].
inline Matrix sn_joint_factor(const SkewNormalParams& p) {
  const auto k = p.dim();
  Matrix joint(k + 1, k + 1);
  joint(0, 0) = 1.0;
  joint.block(1, 0, k, 1) = p.delta();
  joint.block(0, 1, 1, k) = p.delta().transpose();
  joint.block(1, 1, k, k) = p.Omega_z();
  try {
    return cholesky(joint).lower();
  } catch (const NotPositiveDefinite&) {
    // |alpha| so large that the joint correlation is numerically singular.
    return symmetric_sqrt(joint);
  }
}

}  // namespace detail

/// n x k draws from SN_k(xi, Omega, alpha) by the conditioning representation:
/// (U0, U) jointly normal with corr(U0, U) = delta, Z = U if U0 > 0 else -U,
/// X = xi + omega Z.
inline Matrix sn_sample(const SkewNormalParams& p, std::size_t n, const RngStream& stream) {
  const auto k = p.dim();
  Matrix out(static_cast<Eigen::Index>(n), k);
  Engine eng(stream);
  if (p.symmetric()) {
    const Matrix& l = p.chol().lower();
    Vector e(k);
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      for (Eigen::Index j = 0; j < k; ++j) e(j) = eng.normal();
      out.row(i) = (p.xi() + l * e).transpose();
    }
    return out;
  }
  const Matrix factor = detail::sn_joint_factor(p);
  Vector e(k + 1);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j <= k; ++j) e(j) = eng.normal();
    const Vector u = factor * e;
    const double sign = u(0) > 0.0 ? 1.0 : -1.0;
    out.row(i) = (p.xi() + sign * p.omega().cwiseProduct(u.tail(k))).transpose();
  }
  return out;
}

/// E[X] = xi + sqrt(2/pi) omega delta.
inline Vector sn_mean(const SkewNormalParams& p) {
  return p.xi() + std::sqrt(2.0 / std::numbers::pi) * p.omega().cwiseProduct(p.delta());
}

}  // namespace ncst
