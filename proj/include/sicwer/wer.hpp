#pragma once

// Closed-form word error rates of the OSIC and BSIC decoders for an m x n
// i.i.d. N(0,1) channel matrix, where r_ii^2 ~ chi^2_{m-i+1}:
//
//   WER_OSIC = 1 - prod_{i=1..n} P_{m-i+1}
//   WER_BSIC = 1 - prod_{i=1..n} Pbar_{m-i+1}(u_i - l_i)      (x uniform on the box)
//
// Every function has two routes. The "efficient" route (the public name) folds
// the C_k constants into one telescoped Gamma ratio
//   alpha = (2/sqrt(pi))^n Gamma((m+1)/2) / Gamma((m-n+1)/2);
// the "reference" route multiplies the per-stage probabilities directly. The
// two are cross-checked by the tests and by selfcheck.
//
// Products are accumulated as sums of logs and WER = -expm1(sum), which keeps
// precision when the WER is small.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sicwer/decoder.hpp"
#include "sicwer/special_functions.hpp"

namespace sicwer {

struct WerQuery {
  Eigen::Index m = 1;
  Eigen::Index n = 1;
  double sigma = 1.0;
  std::optional<BoxConstraint> box;  // absent: OSIC

  void validate() const {
    detail::require<DimensionError>(n >= 1 && m >= n, "WerQuery: need m >= n >= 1");
    detail::require_sigma(sigma, "WerQuery");
    if (box) detail::require<DimensionError>(box->size() == n, "WerQuery: box length must equal n");
  }
};

namespace detail {

inline void require_dims(Eigen::Index m, Eigen::Index n, const char* where) {
  require<DimensionError>(n >= 1 && m >= n, std::string(where) + ": need m >= n >= 1, got m=" + std::to_string(m) +
                                                 ", n=" + std::to_string(n));
}

// Maps log(success probability) to a WER and enforces [0, 1] up to rounding.
inline double wer_from_log_success(long double log_success) {
  const double wer = -std::expm1(static_cast<double>(log_success));
  if (!(wer >= -1e-9 && wer <= 1.0 + 1e-9)) {
    throw ConsistencyError("word error rate " + std::to_string(wer) + " outside [0, 1]");
  }
  return std::clamp(wer, 0.0, 1.0);
}

// log of (2/sqrt(pi))^n Gamma((m+1)/2) / Gamma((m-n+1)/2).
inline long double log_alpha(Eigen::Index m, Eigen::Index n) {
  const long double tail = m == n ? kLogSqrtPi : log_gamma((m - n + 1) / 2.0L);
  return static_cast<long double>(n) * (kLogTwo - kLogSqrtPi) + log_gamma((m + 1) / 2.0L) - tail;
}

// I_1..I_m at the decision angle for sigma.
inline std::vector<double> stage_integrals(Eigen::Index m, double sigma) {
  return cos_power_integrals(static_cast<int>(m), decision_angle(sigma));
}

}  // namespace detail

/// 1 - prod P_{m-i+1} via the telescoped prefactor.
inline double wer_osic(Eigen::Index m, Eigen::Index n, double sigma) {
  detail::require_dims(m, n, "wer_osic");
  detail::require_sigma(sigma, "wer_osic");
  const auto integrals = detail::stage_integrals(m, sigma);
  long double log_success = detail::log_alpha(m, n);
  for (Eigen::Index i = 1; i <= n; ++i) log_success += std::log(integrals[m - i]);
  return detail::wer_from_log_success(log_success);
}

/// Term-by-term product of P_{m-i+1}.
inline double wer_osic_reference(Eigen::Index m, Eigen::Index n, double sigma) {
  detail::require_dims(m, n, "wer_osic_reference");
  detail::require_sigma(sigma, "wer_osic_reference");
  const auto integrals = detail::stage_integrals(m, sigma);
  long double log_success = 0.0L;
  for (Eigen::Index i = 1; i <= n; ++i) {
    const int k = static_cast<int>(m - i + 1);
    log_success += detail::log_c_k_extended(k) + std::log(integrals[k - 1]);
  }
  return detail::wer_from_log_success(log_success);
}

/// m = n specialization: 1 - 2^n Gamma((n+1)/2) / sqrt(pi^(n+1)) prod_{i=1..n} I_i.
inline double wer_osic_square(Eigen::Index n, double sigma) {
  detail::require_dims(n, n, "wer_osic_square");
  detail::require_sigma(sigma, "wer_osic_square");
  const auto integrals = detail::stage_integrals(n, sigma);
  long double log_success = static_cast<long double>(n) * detail::kLogTwo + detail::log_gamma((n + 1) / 2.0L) -
                            static_cast<long double>(n + 1) * detail::kLogSqrtPi;
  for (double value : integrals) log_success += std::log(value);
  return detail::wer_from_log_success(log_success);
}

/// 1 - beta prod Phat_i, with beta = alpha / prod (u_i - l_i + 1) and
/// Phat_i = 1/C_{m-i+1} + (u_i - l_i) I_{m-i+1}. x is assumed uniform on the box.
inline double wer_bsic(Eigen::Index m, const BoxConstraint& box, double sigma) {
  const Eigen::Index n = box.size();
  detail::require_dims(m, n, "wer_bsic");
  detail::require_sigma(sigma, "wer_bsic");
  if (box.is_degenerate()) return 0.0;
  const auto integrals = detail::stage_integrals(m, sigma);
  long double log_success = detail::log_alpha(m, n);
  for (Eigen::Index i = 1; i <= n; ++i) {
    const int k = static_cast<int>(m - i + 1);
    const long double width = static_cast<long double>(box.width(i - 1));
    const long double p_hat = std::exp(-detail::log_c_k_extended(k)) + width * integrals[k - 1];
    log_success += std::log(p_hat) - std::log1p(width);
  }
  return detail::wer_from_log_success(log_success);
}

/// Term-by-term product of Pbar_{m-i+1}(u_i - l_i).
inline double wer_bsic_reference(Eigen::Index m, const BoxConstraint& box, double sigma) {
  const Eigen::Index n = box.size();
  detail::require_dims(m, n, "wer_bsic_reference");
  detail::require_sigma(sigma, "wer_bsic_reference");
  long double log_success = 0.0L;
  for (Eigen::Index i = 1; i <= n; ++i) {
    log_success += std::log(p_bar_k(static_cast<int>(m - i + 1), box.width(i - 1), sigma));
  }
  return detail::wer_from_log_success(log_success);
}

/// m = n and box [0, d]^n.
inline double wer_bsic_cube(Eigen::Index n, std::int64_t d, double sigma) {
  detail::require_dims(n, n, "wer_bsic_cube");
  detail::require_sigma(sigma, "wer_bsic_cube");
  detail::require<DomainError>(d >= 0, "wer_bsic_cube: edge length must be >= 0");
  if (d == 0) return 0.0;
  const auto integrals = detail::stage_integrals(n, sigma);
  const long double width = static_cast<long double>(d);
  long double log_success = static_cast<long double>(n) * (detail::kLogTwo - std::log1p(width)) +
                            detail::log_gamma((n + 1) / 2.0L) - static_cast<long double>(n + 1) * detail::kLogSqrtPi;
  for (int k = 1; k <= n; ++k) {
    log_success += std::log(std::exp(-detail::log_c_k_extended(k)) + width * integrals[k - 1]);
  }
  return detail::wer_from_log_success(log_success);
}

inline double evaluate_wer(const WerQuery& query) {
  query.validate();
  return query.box ? wer_bsic(query.m, *query.box, query.sigma) : wer_osic(query.m, query.n, query.sigma);
}

namespace detail {

inline void require_ratio_dims(Eigen::Index n1, Eigen::Index n2, const char* where) {
  require<DomainError>(n1 >= 1 && n1 < n2, std::string(where) + ": need 1 <= n1 < n2");
}

}  // namespace detail

/// (1 - WER(n2)) / (1 - WER(n1)) for square OSIC models: prod_{k=n1+1..n2} P_k.
inline double success_ratio_osic(Eigen::Index n1, Eigen::Index n2, double sigma) {
  detail::require_ratio_dims(n1, n2, "success_ratio_osic");
  detail::require_sigma(sigma, "success_ratio_osic");
  const auto integrals = detail::stage_integrals(n2, sigma);
  long double log_ratio = 0.0L;
  for (Eigen::Index k = n1 + 1; k <= n2; ++k) {
    log_ratio += detail::log_c_k_extended(static_cast<int>(k)) + std::log(integrals[k - 1]);
  }
  return static_cast<double>(std::exp(log_ratio));
}

/// Square BSIC models with box [0, d]^n: prod_{k=n1+1..n2} Pbar_k(d).
inline double success_ratio_bsic(Eigen::Index n1, Eigen::Index n2, std::int64_t d, double sigma) {
  detail::require_ratio_dims(n1, n2, "success_ratio_bsic");
  detail::require_sigma(sigma, "success_ratio_bsic");
  detail::require<DomainError>(d >= 0, "success_ratio_bsic: edge length must be >= 0");
  if (d == 0) return 1.0;
  long double log_ratio = 0.0L;
  for (Eigen::Index k = n1 + 1; k <= n2; ++k) log_ratio += std::log(p_bar_k(static_cast<int>(k), d, sigma));
  return static_cast<double>(std::exp(log_ratio));
}

// (u+1)-ary PAM shifted onto [0, u]: E|x|^2 / n = u(u+2)/12 per coordinate.

inline double snr_db_from_sigma(std::int64_t u, double sigma) {
  detail::require<DomainError>(u >= 1, "snr_db_from_sigma: PAM parameter u must be >= 1");
  detail::require_sigma(sigma, "snr_db_from_sigma");
  const double energy = static_cast<double>(u) * static_cast<double>(u + 2) / 12.0;
  return 10.0 * std::log10(energy / (sigma * sigma));
}

inline double sigma_from_snr_db(std::int64_t u, double snr_db) {
  detail::require<DomainError>(u >= 1, "sigma_from_snr_db: PAM parameter u must be >= 1");
  detail::require<DomainError>(std::isfinite(snr_db), "sigma_from_snr_db: SNR must be finite");
  const double energy = static_cast<double>(u) * static_cast<double>(u + 2) / 12.0;
  return std::sqrt(energy / std::pow(10.0, snr_db / 10.0));
}

}  // namespace sicwer
