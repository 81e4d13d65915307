#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "ncst/numerics.hpp"
#include "ncst/random.hpp"
#include "ncst/skew_normal.hpp"

namespace ncst {

/// NCST_k(xi, Omega, alpha, r): T = X / sqrt(Y / r) with X ~ SN_k(xi, Omega, alpha)
/// and an independent Y ~ chi^2_r shared by all k components.
struct NcstParams {
  SkewNormalParams sn;
  double r;

  NcstParams(SkewNormalParams sn_params, double dof) : sn(std::move(sn_params)), r(dof) {
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("r must be positive");
  }
  NcstParams(Vector xi, Matrix omega, Vector alpha, double dof)
      : NcstParams(SkewNormalParams(std::move(xi), std::move(omega), std::move(alpha)), dof) {}

  Eigen::Index dim() const noexcept { return sn.dim(); }
};

/// Monte Carlo settings for density evaluation.
struct McConfig {
  std::size_t M = Defaults::mc_draws_fit;
  std::uint64_t seed = 0;
  // Common random numbers: one frozen uniform set, mapped through the chi^2_r
  // quantile, shared by every row and every call.
  bool crn = true;
};

inline Matrix ncst_sample(const NcstParams& p, std::size_t n, const RngStream& stream) {
  Matrix t = sn_sample(p.sn, n, stream.child(0));
  const std::vector<double> y = draw_chisq(stream.child(1), p.r, n);
  for (Eigen::Index i = 0; i < t.rows(); ++i) t.row(i) /= std::sqrt(y[static_cast<std::size_t>(i)] / p.r);
  return t;
}

/// Mixing scales s_i = sqrt(y_i / r) with their logs.
struct MixingDraws {
  std::vector<double> s;
  std::vector<double> log_s;

  std::size_t size() const noexcept { return s.size(); }

  static MixingDraws from_chisq(std::span<const double> y, double r) {
    MixingDraws d;
    d.s.reserve(y.size());
    d.log_s.reserve(y.size());
    const double log_r = std::log(r);
    for (double yi : y) {
      d.log_s.push_back(0.5 * (std::log(yi) - log_r));
      d.s.push_back(std::sqrt(yi / r));
    }
    return d;
  }
};

namespace detail {

inline RngStream mc_base(const McConfig& cfg) { return RngStream{cfg.seed, 0x4D43ull}; }
inline RngStream crn_stream(const McConfig& cfg) { return mc_base(cfg).child(0); }
inline RngStream row_stream(const McConfig& cfg, std::size_t row) { return mc_base(cfg).child(1 + row); }

inline std::vector<double> chisq_quantiles(std::span<const double> u, double r) {
  std::vector<double> y(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) y[i] = 2.0 * boost::math::gamma_p_inv(0.5 * r, u[i]);
  return y;
}

}  // namespace detail

/// Evaluates the Monte Carlo NCST log-density for a fixed parameter set.
///
/// For a point t the estimator is (1/M) sum_i f_SN(t s_i) s_i^k with s_i = sqrt(y_i/r).
/// With whitened quantities a = t'Ω⁻¹t, b = t'Ω⁻¹ξ, c = ξ'Ω⁻¹ξ each term is
///   log 2 - (k/2) log 2π - ½ log|Ω| - ½ (s² a - 2 s b + c) + k log s + log Φ(s u - v)
/// where u = α'ω⁻¹t and v = α'ω⁻¹ξ, so a row costs O(k²) once plus O(1) per draw.
class McDensity {
 public:
  explicit McDensity(const NcstParams& p)
      : k_(static_cast<double>(p.dim())), symmetric_(p.sn.symmetric()), chol_(p.sn.chol()) {
    const auto& sn = p.sn;
    whitened_xi_ = sn.chol().whiten(sn.xi());
    c_ = whitened_xi_.squaredNorm();
    beta_ = sn.alpha().cwiseQuotient(sn.omega());
    v_ = beta_.dot(sn.xi());
    const0_ = -0.5 * (k_ * kLog2Pi + sn.chol().log_det()) + (symmetric_ ? 0.0 : kLog2);
  }

  double logpdf(const Vector& t, const MixingDraws& draws) const {
    if (t.size() != chol_.dim()) throw DimensionMismatch("ncst density: point has wrong dimension");
    const Vector wt = chol_.whiten(t);
    const double a = wt.squaredNorm();
    const double b = wt.dot(whitened_xi_);
    const double u = beta_.dot(t);
    const std::size_t m = draws.size();
    buf_.resize(m);
    double* g = buf_.data();
    const double* s = draws.s.data();
    const double* log_s = draws.log_s.data();
    const double c = c_, k = k_, c0 = const0_, v = v_;
    double gmax = -std::numeric_limits<double>::infinity();
#pragma omp simd reduction(max : gmax)
    for (std::size_t i = 0; i < m; ++i) {
      g[i] = c0 - 0.5 * ((s[i] * a - 2.0 * b) * s[i] + c) + k * log_s[i];
      gmax = std::max(gmax, g[i]);
    }
    if (!std::isfinite(gmax)) return -std::numeric_limits<double>::infinity();
    const double log_m = std::log(static_cast<double>(m));
    double sum = 0.0;
    if (symmetric_) {
#pragma omp simd reduction(+ : sum)
      for (std::size_t i = 0; i < m; ++i) sum += detail::exp_simd(g[i] - gmax);
      return gmax + std::log(sum) - log_m;
    }
    // exp(d) Phi(z) with Phi(z) = erfc(-z/sqrt2)/2, folded into a single exponent when z < 0.
#pragma omp simd reduction(+ : sum)
    for (std::size_t i = 0; i < m; ++i) {
      const double d = g[i] - gmax;
      const double z = s[i] * u - v;
      const double x = std::abs(z) * 0.70710678118654752440;
      const double t = 2.0 / (2.0 + x);
      const double half_tail = 0.5 * t * detail::exp_simd(d + detail::erfc_cheb_log(t) - x * x);
      sum += z < 0.0 ? half_tail : detail::exp_simd(d) - half_tail;
    }
    if (sum > 1e-250) return gmax + std::log(sum) - log_m;
    // Every skewing factor is tiny: redo the sum fully in log space.
    for (std::size_t i = 0; i < m; ++i) buf_[i] += std_normal_logcdf(draws.s[i] * u - v_);
    return log_sum_exp(buf_) - log_m;
  }

 private:
  double k_;
  bool symmetric_;
  Cholesky chol_;
  Vector whitened_xi_;
  Vector beta_;
  double c_ = 0.0;
  double v_ = 0.0;
  double const0_ = 0.0;
  mutable std::vector<double> buf_;
};

/// Frozen common-random-number source: M uniforms mapped to chi^2_r draws on demand.
/// Draws for the last r are cached, so an optimizer that holds r fixed pays nothing.
class CrnMixing {
 public:
  explicit CrnMixing(const McConfig& cfg) : uniforms_(draw_uniform(detail::crn_stream(cfg), cfg.M)) {
    if (cfg.M < 1) throw DomainError("McConfig: M must be at least 1");
  }

  const MixingDraws& draws(double r) const {
    if (r != cached_r_) {
      const auto y = detail::chisq_quantiles(uniforms_, r);
      cached_ = MixingDraws::from_chisq(y, r);
      cached_r_ = r;
    }
    return cached_;
  }

 private:
  std::vector<double> uniforms_;
  mutable double cached_r_ = std::numeric_limits<double>::quiet_NaN();
  mutable MixingDraws cached_;
};

inline MixingDraws mixing_draws(const McConfig& cfg, double r, std::size_t row) {
  if (cfg.M < 1) throw DomainError("McConfig: M must be at least 1");
  if (cfg.crn) {
    const auto u = draw_uniform(detail::crn_stream(cfg), cfg.M);
    return MixingDraws::from_chisq(detail::chisq_quantiles(u, r), r);
  }
  return MixingDraws::from_chisq(draw_chisq(detail::row_stream(cfg, row), r, cfg.M), r);
}

inline double ncst_mc_logpdf(const Vector& t, const NcstParams& p, const McConfig& cfg) {
  return McDensity(p).logpdf(t, mixing_draws(cfg, p.r, 0));
}

/// Sum of Monte Carlo log-densities over the rows of `data`. Under crn every row
/// shares one draw set; otherwise row j uses its own substream.
inline double ncst_loglik(const Matrix& data, const NcstParams& p, const McConfig& cfg) {
  if (data.rows() < 1) throw InsufficientData("ncst_loglik: data has no rows");
  if (data.cols() != p.dim()) throw DimensionMismatch("ncst_loglik: data columns do not match dimension");
  const McDensity density(p);
  double total = 0.0;
  if (cfg.crn) {
    const MixingDraws draws = mixing_draws(cfg, p.r, 0);
    for (Eigen::Index i = 0; i < data.rows(); ++i) total += density.logpdf(data.row(i).transpose(), draws);
  } else {
    for (Eigen::Index i = 0; i < data.rows(); ++i)
      total += density.logpdf(data.row(i).transpose(), mixing_draws(cfg, p.r, static_cast<std::size_t>(i)));
  }
  return total;
}

/// E[Y^{-k/2}] for Y ~ chi^2_r, equal to Gamma((r-k)/2) / (2^{k/2} Gamma(r/2)).
inline double inv_chisq_half_moment(double r, int k) {
  if (k < 0) throw DomainError("inv_chisq_half_moment: order must be non-negative");
  if (k == 0) return 1.0;
  if (!(r > k)) throw MomentUndefined("moment of order " + std::to_string(k) + " needs r > " + std::to_string(k));
  return std::exp(std::lgamma(0.5 * (r - k)) - std::lgamma(0.5 * r) - 0.5 * k * kLog2);
}

inline Vector ncst_mean(const NcstParams& p) {
  if (!(p.r > 1.0)) throw MomentUndefined("E[T] exists only for r > 1");
  return std::sqrt(p.r) * inv_chisq_half_moment(p.r, 1) * sn_mean(p.sn);
}

struct RawMoment {
  Vector value;
  // Monte Carlo standard error of `value`; zero where the moment is closed form.
  Vector std_error;
};

/// Componentwise E[T^order] = r^{order/2} E[X^order] E[Y^{-order/2}]. E[X] uses the
/// closed-form skew-normal mean; higher orders average n_inner skew-normal draws.
inline RawMoment ncst_raw_moment(const NcstParams& p, int order, std::size_t n_inner, const RngStream& stream) {
  if (order < 1) throw DomainError("ncst_raw_moment: order must be positive");
  if (!(p.r > order)) throw MomentUndefined("moment of order " + std::to_string(order) + " needs r > " + std::to_string(order));
  const double factor = std::pow(p.r, 0.5 * order) * inv_chisq_half_moment(p.r, order);
  const auto k = p.dim();
  if (order == 1) return {factor * sn_mean(p.sn), Vector::Zero(k)};
  if (n_inner < 2) throw DomainError("ncst_raw_moment: need at least two inner draws");
  const Matrix x = sn_sample(p.sn, n_inner, stream);
  const Matrix powered = x.array().pow(order).matrix();
  const double n = static_cast<double>(n_inner);
  const Vector mean = powered.colwise().mean().transpose();
  Vector se(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double var = (powered.col(j).array() - mean(j)).square().sum() / (n - 1.0);
    se(j) = std::sqrt(var / n);
  }
  return {factor * mean, std::abs(factor) * se};
}

}  // namespace ncst
