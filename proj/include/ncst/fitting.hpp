#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ncst/config.hpp"
#include "ncst/data.hpp"
#include "ncst/distribution.hpp"
#include "ncst/optimize.hpp"
#include "ncst/stats.hpp"

namespace ncst {

enum class Family { MVN, SN, AZZALINI_ST, NCST };

inline const std::vector<Family>& all_families() {
  static const std::vector<Family> f{Family::MVN, Family::SN, Family::AZZALINI_ST, Family::NCST};
  return f;
}

inline std::string family_name(Family f) {
  switch (f) {
    case Family::MVN: return "MVN";
    case Family::SN: return "SN";
    case Family::AZZALINI_ST: return "AZZALINI_ST";
    case Family::NCST: return "NCST";
  }
  return "?";
}

// Case-insensitive; "ast" is accepted for AZZALINI_ST.
inline std::optional<Family> parse_family(std::string name) {
  for (auto& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (name == "AST") return Family::AZZALINI_ST;
  for (Family f : all_families())
    if (family_name(f) == name) return f;
  return std::nullopt;
}

inline bool has_alpha(Family f) { return f != Family::MVN; }
inline bool has_dof(Family f) { return f == Family::AZZALINI_ST || f == Family::NCST; }

/// MVN k + k(k+1)/2, SN adds k shape parameters, both skew-t families add r.
inline int param_count(Family f, Eigen::Index k) {
  const auto kk = static_cast<int>(k);
  int p = kk + kk * (kk + 1) / 2;
  if (has_alpha(f)) p += kk;
  if (has_dof(f)) p += 1;
  return p;
}

struct ModelSpec {
  Family family = Family::MVN;
  Eigen::Index k = 0;

  int param_count() const { return ncst::param_count(family, k); }
};

/// Parameters of any of the four families; alpha is zero for MVN and r is +inf
/// for the families without a mixing variable.
struct ModelParams {
  Vector xi;
  Matrix Omega;
  Vector alpha;
  double r = std::numeric_limits<double>::infinity();

  SkewNormalParams sn() const { return SkewNormalParams(xi, Omega, alpha); }
};

namespace detail {
// Decoded log-diagonal and log r are clamped so decode() cannot overflow.
inline constexpr double kLogDiagBound = 30.0;
inline constexpr double kLogDofLow = -3.0;   // r >= 0.05
inline constexpr double kLogDofHigh = 16.2;  // r <= ~1.1e7
}  // namespace detail

inline Eigen::Index theta_size(Family f, Eigen::Index k) { return param_count(f, k); }

/// theta = [xi, log diag L, strict lower triangle of L (row-wise), alpha, log r]
/// with Omega = L L'.
inline Vector encode(const ModelParams& p, Family f) {
  const auto k = p.xi.size();
  if (p.Omega.rows() != k || p.Omega.cols() != k) throw DimensionMismatch("encode: Omega must be k x k");
  if (has_alpha(f) && p.alpha.size() != k) throw DimensionMismatch("encode: alpha must have length k");
  const Matrix l = cholesky(p.Omega).lower();
  Vector theta(theta_size(f, k));
  Eigen::Index pos = 0;
  for (Eigen::Index i = 0; i < k; ++i) theta(pos++) = p.xi(i);
  for (Eigen::Index i = 0; i < k; ++i) theta(pos++) = std::log(l(i, i));
  for (Eigen::Index i = 1; i < k; ++i)
    for (Eigen::Index j = 0; j < i; ++j) theta(pos++) = l(i, j);
  if (has_alpha(f))
    for (Eigen::Index i = 0; i < k; ++i) theta(pos++) = p.alpha(i);
  if (has_dof(f)) {
    if (!(p.r > 0.0) || !std::isfinite(p.r)) throw DomainError("encode: r must be positive and finite");
    theta(pos++) = std::log(p.r);
  }
  return theta;
}

inline ModelParams decode(const Vector& theta, Family f, Eigen::Index k) {
  if (theta.size() != theta_size(f, k)) throw DimensionMismatch("decode: theta has the wrong length");
  ModelParams p;
  Eigen::Index pos = 0;
  p.xi = theta.segment(0, k);
  pos += k;
  Matrix l = Matrix::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    l(i, i) = std::exp(std::clamp(theta(pos++), -detail::kLogDiagBound, detail::kLogDiagBound));
  for (Eigen::Index i = 1; i < k; ++i)
    for (Eigen::Index j = 0; j < i; ++j) l(i, j) = theta(pos++);
  p.Omega = l * l.transpose();
  p.alpha = Vector::Zero(k);
  if (has_alpha(f)) {
    p.alpha = theta.segment(pos, k);
    pos += k;
  }
  if (has_dof(f)) p.r = std::exp(std::clamp(theta(pos++), detail::kLogDofLow, detail::kLogDofHigh));
  return p;
}

namespace detail {

// Rows of x minus xi, whitened by the Cholesky factor: columns are L^{-1}(x_i - xi).
inline Matrix whitened_residuals(const Matrix& x, const Vector& xi, const Cholesky& chol) {
  Matrix r = (x.rowwise() - xi.transpose()).transpose();
  chol.lower().triangularView<Eigen::Lower>().solveInPlace(r);
  return r;
}

inline double mv_t_log_const(double r, double k, double log_det) {
  return std::lgamma(0.5 * (r + k)) - std::lgamma(0.5 * r) - 0.5 * k * std::log(r * std::numbers::pi) -
         0.5 * log_det;
}

}  // namespace detail

inline double mvn_loglik(const Matrix& x, const Vector& xi, const Cholesky& chol) {
  const Matrix w = detail::whitened_residuals(x, xi, chol);
  const double k = static_cast<double>(xi.size());
  const double n = static_cast<double>(x.rows());
  return -0.5 * (n * (k * kLog2Pi + chol.log_det()) + w.squaredNorm());
}

inline double sn_loglik(const Matrix& x, const SkewNormalParams& p) {
  const double base = mvn_loglik(x, p.xi(), p.chol());
  if (p.symmetric()) return base;
  const Vector beta = p.alpha().cwiseQuotient(p.omega());
  const Vector u = (x.rowwise() - p.xi().transpose()) * beta;
  double s = base + static_cast<double>(x.rows()) * kLog2;
  for (Eigen::Index i = 0; i < u.size(); ++i) s += std_normal_logcdf(u(i));
  return s;
}

/// Azzalini skew-t: 2 t_k(t - xi; Omega, r) T_1(alpha' omega^{-1}(t - xi) sqrt((r+k)/(Q+r)); r+k)
/// with Q = (t - xi)' Omega^{-1} (t - xi). Here xi is added after the scaling.
inline double azzalini_st_logpdf(const Vector& t, const SkewNormalParams& p, double r) {
  if (!(r > 0.0)) throw DomainError("azzalini_st_logpdf: r must be positive");
  if (t.size() != p.dim()) throw DimensionMismatch("azzalini_st_logpdf: point has wrong dimension");
  const double k = static_cast<double>(p.dim());
  const Vector d = t - p.xi();
  const double q = p.chol().whiten(d).squaredNorm();
  const double base = detail::mv_t_log_const(r, k, p.chol().log_det()) - 0.5 * (r + k) * std::log1p(q / r);
  if (p.symmetric()) return base;
  const double u = p.alpha().dot(d.cwiseQuotient(p.omega())) * std::sqrt((r + k) / (q + r));
  return kLog2 + base + student_t_logcdf(u, r + k);
}

inline double azzalini_st_loglik(const Matrix& x, const SkewNormalParams& p, double r) {
  if (!(r > 0.0)) throw DomainError("azzalini_st_loglik: r must be positive");
  const double k = static_cast<double>(p.dim());
  const Matrix w = detail::whitened_residuals(x, p.xi(), p.chol());
  const Vector q = w.colwise().squaredNorm().transpose();
  double s = static_cast<double>(x.rows()) * detail::mv_t_log_const(r, k, p.chol().log_det());
  for (Eigen::Index i = 0; i < q.size(); ++i) s -= 0.5 * (r + k) * std::log1p(q(i) / r);
  if (p.symmetric()) return s;
  const Vector beta = p.alpha().cwiseQuotient(p.omega());
  const Vector u = (x.rowwise() - p.xi().transpose()) * beta;
  s += static_cast<double>(x.rows()) * kLog2;
  for (Eigen::Index i = 0; i < u.size(); ++i) s += student_t_logcdf(u(i) * std::sqrt((r + k) / (q(i) + r)), r + k);
  return s;
}

inline std::pair<double, double> information_criteria(double loglik, int p, std::size_t n) {
  if (n < 1) throw DomainError("information_criteria: n must be at least 1");
  const double pd = static_cast<double>(p);
  return {2.0 * pd - 2.0 * loglik, pd * std::log(static_cast<double>(n)) - 2.0 * loglik};
}

struct FitOptions {
  NelderMeadOptions optimizer{.max_iter = 20000, .tol = 1e-9, .restarts = Defaults::optimizer_restarts, .step = 0.25};
  // Monte Carlo draws for the reported NCST log-likelihood.
  std::size_t report_M = Defaults::mc_draws_report;
  // NCST: each start gets this many simplex iterations before the full search
  // continues from the best of them.
  std::size_t screen_iter = 400;
};

struct FitResult {
  ModelSpec model;
  ModelParams params;
  double loglik = 0.0;
  int p = 0;
  std::size_t n = 0;
  double aic = 0.0;
  double sic = 0.0;
  bool converged = true;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  std::optional<McConfig> mc_config;
  // NCST only: log-likelihood at the fitting M, and the M used for `loglik`.
  std::optional<double> loglik_fit;
  std::optional<std::size_t> report_M;
};

/// Log-likelihood of `x` under any family. NCST uses the Monte Carlo estimator.
inline double family_loglik(const Matrix& x, Family f, const ModelParams& p, const McConfig& cfg) {
  switch (f) {
    case Family::MVN: return mvn_loglik(x, p.xi, cholesky(p.Omega));
    case Family::SN: return sn_loglik(x, p.sn());
    case Family::AZZALINI_ST: return azzalini_st_loglik(x, p.sn(), p.r);
    case Family::NCST: return ncst_loglik(x, NcstParams(p.sn(), p.r), cfg);
  }
  return 0.0;
}

namespace detail {

inline FitResult finish(Family f, const Matrix& x, ModelParams params, double loglik) {
  FitResult res;
  res.model = {f, x.cols()};
  res.params = std::move(params);
  res.loglik = loglik;
  res.p = param_count(f, x.cols());
  res.n = static_cast<std::size_t>(x.rows());
  std::tie(res.aic, res.sic) = information_criteria(loglik, res.p, res.n);
  return res;
}

inline FitResult fit_mvn(const Matrix& x) {
  const double n = static_cast<double>(x.rows());
  ModelParams p;
  p.xi = x.colwise().mean().transpose();
  const Matrix c = x.rowwise() - p.xi.transpose();
  p.Omega = (c.transpose() * c) / n;
  p.alpha = Vector::Zero(x.cols());
  const double ll = mvn_loglik(x, p.xi, cholesky(p.Omega));
  return finish(Family::MVN, x, std::move(p), ll);
}

// Maps parameters fitted on x D^{-1} back to the scale of x.
inline ModelParams unscale(ModelParams p, const Vector& s) {
  p.xi = p.xi.cwiseProduct(s);
  p.Omega = s.asDiagonal() * p.Omega * s.asDiagonal();
  return p;
}

inline ModelParams rescale(ModelParams p, const Vector& s) {
  const Vector inv = s.cwiseInverse();
  p.xi = p.xi.cwiseProduct(inv);
  p.Omega = inv.asDiagonal() * p.Omega * inv.asDiagonal();
  return p;
}

struct Optimum {
  ModelParams params;
  NelderMeadResult nm;
};

// Minimizes the mean negative log-likelihood of the scaled data from the best of `starts`.
// With `all_starts` every start is optimized and the best optimum kept.
template <class Objective>
Optimum optimize_family(Family f, Eigen::Index k, const std::vector<ModelParams>& starts, Objective&& neg_mean_ll,
                        const NelderMeadOptions& nm, bool all_starts, std::size_t screen_iter = 0) {
  auto objective = [&](const Vector& theta) {
    try {
      return neg_mean_ll(decode(theta, f, k));
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  std::vector<std::pair<double, Vector>> ranked;
  for (const auto& s : starts) {
    Vector theta = encode(s, f);
    const double v = objective(theta);
    if (std::isfinite(v)) ranked.emplace_back(v, std::move(theta));
  }
  if (ranked.empty()) throw NonFiniteObjective(family_name(f) + ": objective is not finite at any starting point");
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t iterations = 0, evaluations = 0;
  if (screen_iter > 0 && ranked.size() > 1) {
    NelderMeadOptions short_run = nm;
    short_run.max_iter = screen_iter;
    short_run.restarts = 0;
    for (auto& [v, theta] : ranked) {
      auto r = nelder_mead(objective, theta, short_run);
      iterations += r.iterations;
      evaluations += r.evaluations;
      v = r.value;
      theta = std::move(r.x);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  }
  if (!all_starts) ranked.resize(1);
  std::optional<NelderMeadResult> best;
  for (const auto& [v, theta] : ranked) {
    auto r = nelder_mead(objective, theta, nm);
    iterations += r.iterations;
    evaluations += r.evaluations;
    if (!best || r.value < best->value) best = std::move(r);
  }
  best->iterations = iterations;
  best->evaluations = evaluations;
  return {decode(best->x, f, k), *best};
}

inline std::vector<ModelParams> with_dof(const ModelParams& base, std::initializer_list<double> dofs) {
  std::vector<ModelParams> out;
  for (double r : dofs) {
    ModelParams p = base;
    p.r = r;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace detail

/// Maximum-likelihood fit of one family.
///
/// MVN is closed form (mean and divisor-n covariance). The other families run
/// Nelder-Mead on encoded parameters of the column-scaled data, each started from
/// the fit of the family before it: SN from MVN (alpha = 0 and alpha = 0.5 sign of the
/// marginal skewness), AZZALINI_ST from SN (r = 10 and r = 1e6), NCST from
/// AZZALINI_ST and two symmetric starts (screened briefly, best one run to the end).
/// `previous` must be that preceding fit; when null it is computed here.
/// NCST uses the common-random-number likelihood at cfg.M and reports the
/// log-likelihood recomputed at opts.report_M.
inline FitResult fit_model(const DataMatrix& data, Family f, const FitOptions& opts = {}, const McConfig& cfg = {},
                           const FitResult* previous = nullptr) {
  const Matrix& x = data.values;
  const auto k = x.cols();
  if (k < 1) throw InsufficientData("fit_model: data has no columns");
  const int p = param_count(f, k);
  if (x.rows() <= p)
    throw InsufficientData(family_name(f) + ": n = " + std::to_string(x.rows()) + " must exceed p = " +
                           std::to_string(p));
  if (f == Family::MVN) return detail::fit_mvn(x);

  std::optional<FitResult> computed;
  if (!previous) {
    const Family before = f == Family::SN ? Family::MVN : f == Family::AZZALINI_ST ? Family::SN : Family::AZZALINI_ST;
    computed = fit_model(data, before, opts, cfg);
    previous = &*computed;
  }

  // Optimizing on unit-variance columns keeps one simplex step meaningful on every axis.
  Vector s(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    std::vector<double> col(x.col(j).data(), x.col(j).data() + x.rows());
    s(j) = detail::sample_sd(col);
    if (!(s(j) > 0.0)) throw DegenerateSample("fit_model: column " + std::to_string(j + 1) + " has zero variance");
  }
  const Matrix z = x * s.cwiseInverse().asDiagonal();
  const double n = static_cast<double>(x.rows());
  const double log_jacobian = n * s.array().log().sum();
  const ModelParams prev = detail::rescale(previous->params, s);

  std::vector<ModelParams> starts;
  detail::Optimum opt;
  if (f == Family::SN) {
    ModelParams a = prev;
    a.alpha = Vector::Zero(k);
    ModelParams b = a;
    for (Eigen::Index j = 0; j < k; ++j) {
      std::vector<double> col(z.col(j).data(), z.col(j).data() + z.rows());
      const double sk = sample_skewness(col);
      b.alpha(j) = sk > 0.0 ? 0.5 : sk < 0.0 ? -0.5 : 0.0;
    }
    starts = {a, b};
    opt = detail::optimize_family(
        f, k, starts, [&](const ModelParams& q) { return -sn_loglik(z, q.sn()) / n; }, opts.optimizer, true);
  } else if (f == Family::AZZALINI_ST) {
    starts = detail::with_dof(prev, {10.0, 1e6});
    opt = detail::optimize_family(
        f, k, starts, [&](const ModelParams& q) { return -azzalini_st_loglik(z, q.sn(), q.r) / n; },
        opts.optimizer, true);
  } else {
    // The AZZALINI_ST optimum can sit in the basin of a poor NCST mode, so it competes
    // with two symmetric starts: itself with alpha = 0, and the sample moments.
    const double r0 = std::isfinite(prev.r) ? prev.r : 10.0;
    ModelParams symmetric = prev;
    symmetric.r = r0;
    symmetric.alpha = Vector::Zero(k);
    ModelParams moments = symmetric;
    moments.xi = z.colwise().mean().transpose();
    const Matrix centered = z.rowwise() - moments.xi.transpose();
    moments.Omega = centered.transpose() * centered / n;
    starts = detail::with_dof(prev, {r0});
    starts.push_back(symmetric);
    starts.push_back(moments);
    const CrnMixing crn(cfg);
    opt = detail::optimize_family(
        f, k, starts,
        [&](const ModelParams& q) {
          const NcstParams np(q.sn(), q.r);
          const McDensity density(np);
          const MixingDraws& draws = crn.draws(q.r);
          double ll = 0.0;
          for (Eigen::Index i = 0; i < z.rows(); ++i) ll += density.logpdf(z.row(i).transpose(), draws);
          return -ll / n;
        },
        opts.optimizer, false, opts.screen_iter);
  }

  ModelParams fitted = detail::unscale(opt.params, s);
  FitResult res;
  if (f == Family::NCST) {
    McConfig report = cfg;
    report.M = opts.report_M;
    const double ll_fit = -opt.nm.value * n - log_jacobian;
    const double ll_report = family_loglik(x, f, fitted, report);
    res = detail::finish(f, x, std::move(fitted), ll_report);
    res.loglik_fit = ll_fit;
    res.report_M = opts.report_M;
    res.mc_config = cfg;
  } else {
    res = detail::finish(f, x, std::move(fitted), -opt.nm.value * n - log_jacobian);
  }
  res.converged = opt.nm.converged;
  res.iterations = opt.nm.iterations;
  res.evaluations = opt.nm.evaluations;
  return res;
}

struct CompareEntry {
  Family family;
  std::optional<FitResult> fit;
  std::string error_type;
  std::string error;
};

namespace detail {
inline std::string error_type_name(const Error& e) {
  if (dynamic_cast<const InsufficientData*>(&e)) return "InsufficientData";
  if (dynamic_cast<const NonFiniteObjective*>(&e)) return "NonFiniteObjective";
  if (dynamic_cast<const NotPositiveDefinite*>(&e)) return "NotPositiveDefinite";
  if (dynamic_cast<const DegenerateSample*>(&e)) return "DegenerateSample";
  if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
  return "Error";
}
}  // namespace detail

/// Fits the requested families along the MVN -> SN -> AZZALINI_ST -> NCST chain (so each
/// one is warm-started from its predecessor) and returns the successful fits sorted by
/// AIC, followed by the failures. A failing family does not stop the others; a family
/// whose predecessor failed starts from the last successful fit instead.
inline std::vector<CompareEntry> compare_models(const DataMatrix& data, const std::vector<Family>& families,
                                                const FitOptions& opts = {}, const McConfig& cfg = {}) {
  std::vector<CompareEntry> done;
  std::optional<FitResult> last;
  for (Family f : all_families()) {
    const bool wanted = std::find(families.begin(), families.end(), f) != families.end();
    // Later families are warm-started from earlier ones, so those are fitted even if not requested.
    bool needed = wanted;
    for (Family g : families) needed = needed || static_cast<int>(g) > static_cast<int>(f);
    if (!needed) continue;
    CompareEntry entry{f, std::nullopt, {}, {}};
    try {
      std::optional<FitResult> bridged;
      const FitResult* prev = nullptr;
      if (f != Family::MVN && last) {
        if (static_cast<int>(last->model.family) == static_cast<int>(f) - 1) {
          prev = &*last;
        } else {
          // Predecessor failed: reuse the last success, filling in the missing parameters.
          bridged = *last;
          if (!std::isfinite(bridged->params.r)) bridged->params.r = 10.0;
          prev = &*bridged;
        }
      } else if (f != Family::MVN) {
        throw InsufficientData(family_name(f) + ": no successful preceding fit to start from");
      }
      entry.fit = fit_model(data, f, opts, cfg, prev);
      last = entry.fit;
    } catch (const Error& e) {
      entry.error_type = detail::error_type_name(e);
      entry.error = e.what();
    }
    if (wanted) done.push_back(std::move(entry));
  }
  std::stable_partition(done.begin(), done.end(), [](const CompareEntry& e) { return e.fit.has_value(); });
  const auto fitted_end = std::find_if(done.begin(), done.end(), [](const CompareEntry& e) { return !e.fit; });
  std::stable_sort(done.begin(), fitted_end,
                   [](const CompareEntry& a, const CompareEntry& b) { return a.fit->aic < b.fit->aic; });
  return done;
}

}  // namespace ncst
