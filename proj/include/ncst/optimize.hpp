#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "ncst/config.hpp"
#include "ncst/error.hpp"
#include "ncst/numerics.hpp"

namespace ncst {

struct NelderMeadOptions {
  std::size_t max_iter = 10000;
  // Converged once max f - min f over the simplex drops below tol.
  double tol = 1e-10;
  int restarts = Defaults::optimizer_restarts;
  // Initial simplex edge along each coordinate.
  double step = 0.25;
};

struct NelderMeadResult {
  Vector x;
  double value = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
};

/// Downhill simplex with reflection 1, expansion 2, contraction 0.5 and shrink 0.5.
/// Non-finite objective values past the starting point count as +inf. After
/// convergence the search restarts from the incumbent with a fresh simplex, up to
/// `restarts` times, stopping early once a restart no longer improves.
inline NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& objective, const Vector& x0,
                                    const NelderMeadOptions& opts = {}) {
  const auto d = x0.size();
  NelderMeadResult res;
  auto eval = [&](const Vector& x) {
    ++res.evaluations;
    const double v = objective(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  const double f0 = objective(x0);
  ++res.evaluations;
  if (!std::isfinite(f0)) throw NonFiniteObjective("nelder_mead: objective is not finite at the starting point");
  res.x = x0;
  res.value = f0;
  if (d == 0) {
    res.converged = true;
    return res;
  }

  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
  const auto n = static_cast<std::size_t>(d);
  std::vector<Vector> simplex(n + 1);
  std::vector<double> f(n + 1);
  std::vector<std::size_t> order(n + 1);

  for (int round = 0; round <= opts.restarts; ++round) {
    simplex[0] = res.x;
    f[0] = res.value;
    for (std::size_t i = 0; i < n; ++i) {
      simplex[i + 1] = res.x;
      simplex[i + 1](static_cast<Eigen::Index>(i)) += opts.step;
      f[i + 1] = eval(simplex[i + 1]);
    }
    bool converged = false;
    while (res.iterations < opts.max_iter) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
      const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
      if (f[worst] - f[best] < opts.tol) {
        converged = true;
        break;
      }
      ++res.iterations;
      Vector centroid = Vector::Zero(d);
      for (std::size_t i = 0; i <= n; ++i)
        if (i != worst) centroid += simplex[i];
      centroid /= static_cast<double>(n);

      const Vector xr = centroid + kReflect * (centroid - simplex[worst]);
      const double fr = eval(xr);
      if (fr < f[best]) {
        const Vector xe = centroid + kExpand * (xr - centroid);
        const double fe = eval(xe);
        if (fe < fr) {
          simplex[worst] = xe;
          f[worst] = fe;
        } else {
          simplex[worst] = xr;
          f[worst] = fr;
        }
        continue;
      }
      if (fr < f[second]) {
        simplex[worst] = xr;
        f[worst] = fr;
        continue;
      }
      // Contract towards the better of the reflected and the worst point.
      const bool outside = fr < f[worst];
      const Vector xc = outside ? Vector(centroid + kContract * (xr - centroid))
                                : Vector(centroid + kContract * (simplex[worst] - centroid));
      const double fc = eval(xc);
      if (fc < (outside ? fr : f[worst])) {
        simplex[worst] = xc;
        f[worst] = fc;
        continue;
      }
      for (std::size_t i = 0; i <= n; ++i) {
        if (i == best) continue;
        simplex[i] = simplex[best] + kShrink * (simplex[i] - simplex[best]);
        f[i] = eval(simplex[i]);
      }
    }
    const auto best = static_cast<std::size_t>(std::min_element(f.begin(), f.end()) - f.begin());
    const double previous = res.value;
    if (f[best] <= res.value) {
      res.x = simplex[best];
      res.value = f[best];
    }
    res.converged = converged;
    if (!converged) break;
    if (round > 0 && previous - res.value < opts.tol) break;
  }
  return res;
}

}  // namespace ncst
