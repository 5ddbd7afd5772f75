#include "gpaml/nelder_mead.hpp"

#include <algorithm>
#include <cmath>

namespace gpaml {

namespace {

Vec2 clamp(const Vec2& x, const Vec2& lo, const Vec2& hi) {
  return {std::clamp(x[0], lo[0], hi[0]), std::clamp(x[1], lo[1], hi[1])};
}

}  // namespace

NelderMeadResult nelder_mead_2d(const std::function<double(const Vec2&)>& f,
                                const Vec2& start, const Vec2& lower,
                                const Vec2& upper,
                                const NelderMeadOptions& opts) {
  constexpr double kReflect = 1.0;
  constexpr double kExpand = 2.0;
  constexpr double kContract = 0.5;
  constexpr double kShrink = 0.5;

  int evals = 0;
  auto eval = [&](const Vec2& x) {
    ++evals;
    return f(x);
  };

  // initial simplex: start plus 5% of the box width along each axis,
  // stepping inward when that would leave the box
  std::array<Vec2, 3> xs;
  std::array<double, 3> fs;
  xs[0] = clamp(start, lower, upper);
  for (int d = 0; d < 2; ++d) {
    Vec2 v = xs[0];
    const double step = 0.05 * (upper[d] - lower[d]);
    v[d] = v[d] + step <= upper[d] ? v[d] + step : v[d] - step;
    xs[static_cast<std::size_t>(d) + 1] = clamp(v, lower, upper);
  }
  for (int i = 0; i < 3; ++i) fs[static_cast<std::size_t>(i)] = eval(xs[static_cast<std::size_t>(i)]);

  auto order = [&] {
    // ascending by value, 3 elements
    if (fs[0] > fs[1]) { std::swap(fs[0], fs[1]); std::swap(xs[0], xs[1]); }
    if (fs[1] > fs[2]) { std::swap(fs[1], fs[2]); std::swap(xs[1], xs[2]); }
    if (fs[0] > fs[1]) { std::swap(fs[0], fs[1]); std::swap(xs[0], xs[1]); }
  };
  order();

  while (evals < opts.max_evals) {
    const double diam = std::max(
        std::hypot(xs[1][0] - xs[0][0], xs[1][1] - xs[0][1]),
        std::hypot(xs[2][0] - xs[0][0], xs[2][1] - xs[0][1]));
    if (fs[2] - fs[0] < opts.f_tol && diam < opts.x_tol) break;

    const Vec2 centroid{0.5 * (xs[0][0] + xs[1][0]),
                        0.5 * (xs[0][1] + xs[1][1])};
    auto along = [&](double t) {
      return clamp({centroid[0] + t * (centroid[0] - xs[2][0]),
                    centroid[1] + t * (centroid[1] - xs[2][1])},
                   lower, upper);
    };

    const Vec2 xr = along(kReflect);
    const double fr = eval(xr);
    if (fr < fs[0]) {
      const Vec2 xe = along(kExpand);
      const double fe = eval(xe);
      if (fe < fr) {
        xs[2] = xe; fs[2] = fe;
      } else {
        xs[2] = xr; fs[2] = fr;
      }
    } else if (fr < fs[1]) {
      xs[2] = xr; fs[2] = fr;
    } else {
      const bool outside = fr < fs[2];
      const Vec2 xc = along(outside ? kContract : -kContract);
      const double fc = eval(xc);
      if (fc < std::min(fr, fs[2])) {
        xs[2] = xc; fs[2] = fc;
      } else {
        // shrink toward the best vertex
        for (int i = 1; i < 3; ++i) {
          auto& v = xs[static_cast<std::size_t>(i)];
          v = clamp({xs[0][0] + kShrink * (v[0] - xs[0][0]),
                     xs[0][1] + kShrink * (v[1] - xs[0][1])},
                    lower, upper);
          fs[static_cast<std::size_t>(i)] = eval(v);
        }
      }
    }
    order();
  }

  return {xs[0], fs[0], evals};
}

}  // namespace gpaml
