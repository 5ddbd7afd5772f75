#pragma once

#include <array>
#include <functional>

namespace gpaml {

using Vec2 = std::array<double, 2>;

struct NelderMeadOptions {
  int max_evals = 80;
  double f_tol = 1e-9;  // absolute spread of simplex values
  double x_tol = 1e-7;  // simplex diameter
};

struct NelderMeadResult {
  Vec2 x{};
  double f = 0.0;  // objective at x (minimization)
  int evals = 0;
};

// Downhill simplex in two dimensions with box constraints enforced by
// clamping trial points into [lower, upper]. Minimizes `f`. The returned
// value is never worse than f(start).
NelderMeadResult nelder_mead_2d(const std::function<double(const Vec2&)>& f,
                                const Vec2& start, const Vec2& lower,
                                const Vec2& upper,
                                const NelderMeadOptions& opts = {});

}  // namespace gpaml
