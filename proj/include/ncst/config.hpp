#pragma once

#include <cstddef>

namespace ncst {

// Repo-wide numeric tolerances. Every threshold used by the library lives here.
struct Tolerances {
  // Input symmetry check for cholesky() and quadratic-form weights.
  static constexpr double symmetry = 1e-10;
  // Cholesky pivot must exceed this fraction of the largest diagonal entry.
  static constexpr double pivot_relative = 1e-12;
  // Affine-closure radicand may dip this far below zero before it is an error.
  static constexpr double radicand_clamp = 1e-10;
  // Idempotency and lambda identity checks in the quadratic-form analysis.
  static constexpr double quadform_condition = 1e-8;
  // Eigenvalues of W below -this are treated as indefinite.
  static constexpr double nnd_eigen = 1e-10;
  // Eigenvalues above this count towards the rank of a projector.
  static constexpr double rank_eigen = 0.5;
  // Upper truncation quantile for skew-F comparisons.
  static constexpr double quadform_truncation = 0.999;
};

struct Defaults {
  static constexpr std::size_t mc_draws_fit = 2000;
  static constexpr std::size_t mc_draws_report = 20000;
  static constexpr std::size_t grid_points = 200;
  static constexpr double grid_lower_quantile = 0.001;
  static constexpr double grid_upper_quantile = 0.999;
  static constexpr double contour_truncate_percentile = 95.0;
  static constexpr int optimizer_restarts = 2;
};

}  // namespace ncst
