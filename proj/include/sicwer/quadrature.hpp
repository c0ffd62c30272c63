#pragma once

// Adaptive Simpson quadrature. Serves as an independent evaluation path for
// I_k(phi), used to cross-check the recurrence in special_functions.hpp.

#include <cmath>

#include "sicwer/special_functions.hpp"

namespace sicwer {

namespace detail {

template <class F>
double simpson_refine(const F& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                      int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

template <class F>
double adaptive_simpson(const F& f, double a, double b, const QuadratureSettings& settings = {}) {
  settings.validate();
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_refine(f, a, b, fa, fm, fb, whole, settings.abs_tolerance, settings.max_refinement_depth);
}

inline double cos_power_integral_quadrature(int k, double phi, const QuadratureSettings& settings = {}) {
  detail::require_k(k, "cos_power_integral_quadrature");
  detail::require_angle(phi, "cos_power_integral_quadrature");
  const double power = k - 1.0;
  return adaptive_simpson([power](double t) { return std::pow(std::cos(t), power); }, 0.0, phi, settings);
}

}  // namespace sicwer
