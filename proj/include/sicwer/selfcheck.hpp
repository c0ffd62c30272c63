#pragma once

// Bundled invariant checks over the closed forms: identities between
// evaluation routes, orderings and limits. Each check reports the worst
// violation it saw; `tolerance_override` replaces every tolerance (useful as a
// negative control).

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sicwer/quadrature.hpp"
#include "sicwer/special_functions.hpp"
#include "sicwer/wer.hpp"

namespace sicwer {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelfcheckOptions {
  std::optional<double> tolerance_override;
};

namespace detail {

inline constexpr double kCheckSigmas[] = {0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5};

inline double relative_gap(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

// Worst value of `measure` compared against `tolerance`.
class WorstCase {
 public:
  explicit WorstCase(double tolerance) : tolerance_(tolerance) {}

  void observe(double value, const std::string& where) {
    if (!(value <= worst_)) {
      worst_ = value;
      where_ = where;
    }
  }

  [[nodiscard]] CheckResult result(std::string name) const {
    std::ostringstream os;
    os.precision(3);
    os << "worst " << worst_ << " (tolerance " << tolerance_ << ")";
    if (!where_.empty()) os << " at " << where_;
    return {std::move(name), worst_ <= tolerance_, os.str()};
  }

 private:
  double tolerance_;
  double worst_ = 0.0;
  std::string where_;
};

// Counts violations of a boolean property.
class Violations {
 public:
  void expect(bool ok, const std::string& where) {
    ++checked_;
    if (!ok) {
      ++failed_;
      if (first_.empty()) first_ = where;
    }
  }

  [[nodiscard]] CheckResult result(std::string name) const {
    std::ostringstream os;
    os << failed_ << " of " << checked_ << " comparisons violated";
    if (!first_.empty()) os << ", first at " << first_;
    return {std::move(name), failed_ == 0, os.str()};
  }

 private:
  int checked_ = 0;
  int failed_ = 0;
  std::string first_;
};

inline std::string at(std::initializer_list<std::pair<const char*, double>> fields) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [key, value] : fields) {
    os << (first ? "" : " ") << key << "=" << value;
    first = false;
  }
  return os.str();
}

}  // namespace detail

inline std::vector<CheckResult> run_selfcheck(const SelfcheckOptions& options = {}) {
  const auto tol = [&](double nominal) { return options.tolerance_override.value_or(nominal); };
  std::vector<CheckResult> results;

  {
    detail::WorstCase worst(tol(1e-10));
    for (int k = 1; k <= 200; ++k) {
      worst.observe(std::abs(c_k(k) * cos_power_integral(k, std::numbers::pi / 2) - 1.0), detail::at({{"k", k}}));
    }
    results.push_back(worst.result("ck_times_full_integral_is_one"));
  }

  {
    detail::WorstCase worst(tol(1e-10));
    const double pi = std::numbers::pi;
    for (int k = 1; k <= 64; ++k) {
      for (double phi : {0.0, pi / 8, pi / 4, 3 * pi / 8, pi / 2}) {
        worst.observe(std::abs(cos_power_integral(k, phi) - cos_power_integral_quadrature(k, phi)),
                      detail::at({{"k", k}, {"phi", phi}}));
      }
    }
    results.push_back(worst.result("integral_recurrence_vs_quadrature"));
  }

  {
    detail::WorstCase worst(tol(1e-12));
    worst.observe(std::abs(wer_osic(1, 1, 0.5) - 0.5), "wer_osic(1,1,0.5)");
    worst.observe(std::abs(wer_osic(2, 2, 0.5) - (1.0 - 1.0 / (2.0 * std::sqrt(2.0)))), "wer_osic(2,2,0.5)");
    worst.observe(std::abs(wer_bsic_cube(1, 1, 0.5) - 0.25), "wer_bsic_cube(1,1,0.5)");
    worst.observe(std::abs(p_k(3, 0.5) - (0.5 + 1.0 / std::numbers::pi)), "p_k(3,0.5)");
    results.push_back(worst.result("closed_form_spot_values"));
  }

  {
    detail::WorstCase worst(tol(1e-12));
    for (Eigen::Index n = 1; n <= 64; ++n) {
      for (double sigma : {0.05, 0.1, 0.25, 0.5}) {
        const double efficient = wer_osic(n, n, sigma);
        worst.observe(detail::relative_gap(efficient, wer_osic_reference(n, n, sigma)),
                      detail::at({{"n", static_cast<double>(n)}, {"sigma", sigma}}));
        worst.observe(detail::relative_gap(efficient, wer_osic_square(n, sigma)),
                      detail::at({{"n", static_cast<double>(n)}, {"sigma", sigma}, {"square", 1}}));
      }
    }
    results.push_back(worst.result("osic_dual_path"));
  }

  {
    detail::WorstCase worst(tol(1e-12));
    for (Eigen::Index n = 1; n <= 64; ++n) {
      for (double sigma : {0.05, 0.1, 0.25, 0.5}) {
        for (std::int64_t d : {1, 3, 7, 63}) {
          const BoxConstraint cube = BoxConstraint::cube(n, d);
          const double reference = wer_bsic_reference(n, cube, sigma);
          const auto where = detail::at({{"n", static_cast<double>(n)}, {"d", static_cast<double>(d)}, {"sigma", sigma}});
          worst.observe(detail::relative_gap(wer_bsic(n, cube, sigma), reference), where);
          worst.observe(detail::relative_gap(wer_bsic_cube(n, d, sigma), reference), where);
        }
      }
    }
    results.push_back(worst.result("bsic_dual_path"));
  }

  {
    detail::WorstCase worst(tol(1e-12));
    for (int k = 1; k <= 64; ++k) {
      for (std::int64_t eta : {1, 3, 7, 63}) {
        for (double sigma : detail::kCheckSigmas) {
          const double p = p_k(k, sigma);
          const double w = static_cast<double>(eta);
          worst.observe(std::abs(p_bar_k(k, eta, sigma) - (1.0 + w * p) / (w + 1.0)),
                        detail::at({{"k", k}, {"eta", w}, {"sigma", sigma}}));
        }
      }
    }
    results.push_back(worst.result("boxed_scalar_mixture_identity"));
  }

  {
    detail::Violations v;
    for (Eigen::Index n = 1; n <= 30; ++n) {
      for (std::size_t s = 0; s + 1 < std::size(detail::kCheckSigmas); ++s) {
        const double sigma = detail::kCheckSigmas[s];
        const auto where = detail::at({{"n", static_cast<double>(n)}, {"sigma", sigma}});
        v.expect(wer_osic(n, n, sigma) < wer_osic(n, n, detail::kCheckSigmas[s + 1]), where);
        v.expect(wer_osic(n, n, sigma) <= wer_osic(n + 1, n + 1, sigma), where);
        v.expect(wer_bsic_cube(n, 3, sigma) < wer_bsic_cube(n, 3, detail::kCheckSigmas[s + 1]), where);
        v.expect(wer_bsic_cube(n, 3, sigma) <= wer_bsic_cube(n + 1, 3, sigma), where);
      }
      v.expect(wer_osic(n, n, 1e-8) <= tol(1e-6), detail::at({{"n", static_cast<double>(n)}, {"limit", 0}}));
      v.expect(wer_bsic_cube(n, 3, 1e-8) <= tol(1e-6), detail::at({{"n", static_cast<double>(n)}, {"limit", 0}}));
    }
    results.push_back(v.result("wer_monotone_in_sigma_and_n"));
  }

  {
    detail::Violations v;
    for (Eigen::Index n : {1, 2, 5, 10, 20, 64}) {
      for (double sigma : detail::kCheckSigmas) {
        const double osic = wer_osic(n, n, sigma);
        double previous = 0.0;
        for (std::int64_t d : {1, 3, 7, 63}) {
          const double bsic = wer_bsic_cube(n, d, sigma);
          const auto where = detail::at({{"n", static_cast<double>(n)}, {"d", static_cast<double>(d)}, {"sigma", sigma}});
          v.expect(previous <= bsic, where);
          v.expect(bsic < osic, where);
          previous = bsic;
        }
      }
    }
    results.push_back(v.result("bsic_nested_boxes_and_below_osic"));
  }

  {
    detail::Violations v;
    for (int k : {1, 2, 5, 20}) {
      for (double sigma : detail::kCheckSigmas) {
        const double p = p_k(k, sigma);
        const auto where = detail::at({{"k", k}, {"sigma", sigma}});
        // Strict only while 1 - P_k is resolvable against the 1/(eta+1) steps.
        const bool strict = 1.0 - p > 1e-10;
        for (std::int64_t eta = 1; eta <= 63; ++eta) {
          const double wider = p_bar_k(k, eta, sigma);
          const double narrower = p_bar_k(k, eta - 1, sigma);
          v.expect(strict ? narrower > wider : narrower + 1e-15 >= wider, where);
          v.expect(strict ? wider > p : wider + 1e-15 >= p, where);
        }
        v.expect(std::abs(p_bar_k(k, 1000000, sigma) - p) <= tol(2e-6), where);
      }
    }
    results.push_back(v.result("boxed_scalar_ordering_and_limit"));
  }

  {
    detail::WorstCase worst(tol(1e-10));
    for (auto [n1, n2] : {std::pair<Eigen::Index, Eigen::Index>{1, 2}, {2, 5}, {5, 20}}) {
      for (double sigma : detail::kCheckSigmas) {
        const auto where = detail::at({{"n1", static_cast<double>(n1)}, {"n2", static_cast<double>(n2)}, {"sigma", sigma}});
        const double osic_quotient = (1.0 - wer_osic_square(n2, sigma)) / (1.0 - wer_osic_square(n1, sigma));
        worst.observe(detail::relative_gap(success_ratio_osic(n1, n2, sigma), osic_quotient), where);
        for (std::int64_t d : {1, 3, 7, 63}) {
          const double bsic_quotient = (1.0 - wer_bsic_cube(n2, d, sigma)) / (1.0 - wer_bsic_cube(n1, d, sigma));
          worst.observe(detail::relative_gap(success_ratio_bsic(n1, n2, d, sigma), bsic_quotient), where);
        }
      }
    }
    results.push_back(worst.result("success_ratio_identities"));
  }

  {
    detail::WorstCase worst(tol(1e-12));
    for (std::int64_t u : {1, 3, 7, 63}) {
      for (double snr = 0.0; snr <= 40.0; snr += 2.5) {
        const double sigma = sigma_from_snr_db(u, snr);
        worst.observe(std::abs(snr_db_from_sigma(u, sigma) - snr) / std::max(1.0, snr),
                      detail::at({{"u", static_cast<double>(u)}, {"snr_db", snr}}));
      }
    }
    results.push_back(worst.result("snr_sigma_roundtrip"));
  }

  return results;
}

}  // namespace sicwer
