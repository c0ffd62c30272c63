#pragma once

// Scalar building blocks of the closed-form word error rates:
//
//   C_k        = 2 Gamma((k+1)/2) / (sqrt(pi) Gamma(k/2))
//   I_k(phi)   = int_0^phi cos^(k-1)(t) dt
//   P_k(sigma) = C_k I_k(atan(1/(2 sigma)))
//   Pbar_k(eta, sigma) = (C_k / (eta+1)) (1/C_k + eta I_k(atan(1/(2 sigma))))
//
// P_k is the probability that rounding y/r recovers x when y = r x + v,
// v ~ N(0, sigma^2) and r^2 ~ chi^2_k. Pbar_k is the same probability when x is
// uniform on an integer interval of width eta and the estimate is clamped to
// that interval.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "sicwer/errors.hpp"

namespace sicwer {

/// Controls the adaptive-quadrature evaluation of I_k (see quadrature.hpp).
struct QuadratureSettings {
  double abs_tolerance = 1e-12;
  int max_refinement_depth = 60;

  void validate() const {
    detail::require<DomainError>(abs_tolerance > 0.0, "QuadratureSettings: abs_tolerance must be > 0");
    detail::require<DomainError>(max_refinement_depth >= 1,
                                 "QuadratureSettings: max_refinement_depth must be >= 1");
  }
};

/// Inputs of the box-constrained scalar success probability.
struct ScalarSuccessInputs {
  int k = 1;
  double sigma = 1.0;
  std::int64_t eta = 0;

  void validate() const {
    detail::require<DomainError>(k >= 1, "ScalarSuccessInputs: k must be >= 1");
    detail::require<DomainError>(sigma > 0.0 && std::isfinite(sigma), "ScalarSuccessInputs: sigma must be > 0");
    detail::require<DomainError>(eta >= 0, "ScalarSuccessInputs: eta must be >= 0");
  }
};

namespace detail {

inline void require_k(int k, const char* where) {
  require<DomainError>(k >= 1, std::string(where) + ": degrees of freedom k must be >= 1, got " + std::to_string(k));
}

inline void require_sigma(double sigma, const char* where) {
  require<DomainError>(sigma > 0.0 && std::isfinite(sigma),
                       std::string(where) + ": sigma must be positive and finite");
}

inline void require_angle(double phi, const char* where) {
  require<DomainError>(phi >= 0.0 && phi <= std::numbers::pi / 2,
                       std::string(where) + ": phi must lie in [0, pi/2]");
}

// Reentrant log-Gamma for positive arguments. std::lgamma writes the global
// signgam on glibc, so the _r variant is used where available.
inline long double log_gamma(long double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgammal_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

inline constexpr long double kLogTwo = 0.693147180559945309417232121458176568L;
inline constexpr long double kLogSqrtPi = 0.572364942924700087071713675676529356L;

// log C_k in extended precision; the WER prefactors telescope sums of these.
inline long double log_c_k_extended(int k) {
  return kLogTwo - kLogSqrtPi + log_gamma((k + 1) / 2.0L) - log_gamma(k / 2.0L);
}

}  // namespace detail

/// log C_k, evaluated as a log-Gamma difference so that large k does not overflow.
inline double log_c_k(int k) {
  detail::require_k(k, "log_c_k");
  return static_cast<double>(detail::log_c_k_extended(k));
}

inline double c_k(int k) {
  detail::require_k(k, "c_k");
  return static_cast<double>(std::exp(detail::log_c_k_extended(k)));
}

/// Half-width angle of the rounding cell: atan(1/(2 sigma)).
inline double decision_angle(double sigma) {
  detail::require_sigma(sigma, "decision_angle");
  return std::atan2(1.0, 2.0 * sigma);
}

/// I_1(phi), ..., I_{k_max}(phi), in that order.
///
/// Uses the two-step reduction
///   I_k = cos^(k-2)(phi) sin(phi) / (k-1) + (k-2)/(k-1) I_{k-2}
/// from I_1 = phi and I_2 = sin(phi). At phi = pi/2 the values are 1/C_k.
inline std::vector<double> cos_power_integrals(int k_max, double phi) {
  detail::require_k(k_max, "cos_power_integrals");
  detail::require_angle(phi, "cos_power_integrals");

  std::vector<double> values(static_cast<std::size_t>(k_max));
  if (phi == std::numbers::pi / 2) {
    for (int k = 1; k <= k_max; ++k) values[k - 1] = std::exp(-log_c_k(k));
    return values;
  }

  const double s = std::sin(phi);
  const double c = std::cos(phi);
  const double c2 = c * c;
  values[0] = phi;
  if (k_max >= 2) values[1] = s;

  // Odd and even chains advance independently; cos_pow holds cos^(k-2).
  for (int start : {3, 4}) {
    double cos_pow = start == 3 ? c : c2;
    for (int k = start; k <= k_max; k += 2) {
      const double km1 = k - 1.0;
      values[k - 1] = cos_pow * s / km1 + ((k - 2.0) / km1) * values[k - 3];
      cos_pow *= c2;
    }
  }
  return values;
}

/// I_k(phi) = int_0^phi cos^(k-1)(t) dt for phi in [0, pi/2].
inline double cos_power_integral(int k, double phi) {
  detail::require_k(k, "cos_power_integral");
  detail::require_angle(phi, "cos_power_integral");
  if (phi == std::numbers::pi / 2) return std::exp(-log_c_k(k));
  return cos_power_integrals(k, phi).back();
}

inline double log_p_k(int k, double sigma) {
  detail::require_k(k, "log_p_k");
  detail::require_sigma(sigma, "log_p_k");
  return log_c_k(k) + std::log(cos_power_integral(k, decision_angle(sigma)));
}

/// Probability that the scalar rounding estimate is correct when r^2 ~ chi^2_k.
inline double p_k(int k, double sigma) { return std::exp(log_p_k(k, sigma)); }

/// Box-constrained scalar success probability for an interval of width eta.
inline double p_bar_k(int k, std::int64_t eta, double sigma) {
  detail::require_k(k, "p_bar_k");
  detail::require_sigma(sigma, "p_bar_k");
  detail::require<DomainError>(eta >= 0, "p_bar_k: eta must be >= 0");
  if (eta == 0) return 1.0;
  const double ck = c_k(k);
  const double integral = cos_power_integral(k, decision_angle(sigma));
  const double width = static_cast<double>(eta);
  return (ck / (width + 1.0)) * (1.0 / ck + width * integral);
}

inline double p_bar_k(const ScalarSuccessInputs& in) {
  in.validate();
  return p_bar_k(in.k, in.eta, in.sigma);
}

inline double log_p_bar_k(int k, std::int64_t eta, double sigma) { return std::log(p_bar_k(k, eta, sigma)); }

}  // namespace sicwer
