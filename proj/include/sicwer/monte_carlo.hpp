#pragma once

// Monte-Carlo word error rate estimation.
//
// Trial t draws everything it needs from PhiloxStream(seed, t): first the m x n
// channel matrix (column-major, N(0,1) entries), then the truth when it is
// random (uniform on the box, coordinate 1..n), then the m noise samples. The
// error count is therefore a function of (config, seed) alone and does not
// depend on how trials are split across workers.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <optional>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

#include "sicwer/decoder.hpp"
#include "sicwer/rng.hpp"

namespace sicwer {

struct WerEstimate {
  std::uint64_t errors = 0;
  std::uint64_t trials = 0;
  std::uint64_t degenerate = 0;  // trials whose QR failed; counted as errors
  double wer = 0.0;
  double std_error = 0.0;

  static WerEstimate from_counts(std::uint64_t errors, std::uint64_t trials, std::uint64_t degenerate = 0) {
    WerEstimate e;
    e.errors = errors;
    e.trials = trials;
    e.degenerate = degenerate;
    e.wer = trials == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(trials);
    e.std_error = trials == 0 ? 0.0 : std::sqrt(e.wer * (1.0 - e.wer) / static_cast<double>(trials));
    return e;
  }
};

struct SuccessEstimate {
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  double proportion = 0.0;
  double std_error = 0.0;
};

/// x is the same integer vector in every trial.
struct FixedTruth {
  IntVector x;
};

/// x is drawn uniformly from the box in every trial.
struct UniformBoxTruth {
  BoxConstraint box;
};

struct OsicDecoder {};

struct BsicDecoder {
  BoxConstraint box;
};

using TruthMode = std::variant<FixedTruth, UniformBoxTruth>;
using DecoderKind = std::variant<OsicDecoder, BsicDecoder>;

/// Entries uniform on [-100, 100], drawn from the reserved stream of `seed`.
inline IntVector default_fixed_truth(Eigen::Index n, std::uint64_t seed) {
  PhiloxStream stream(seed, kFixedTruthStream);
  IntVector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = stream.uniform_int(-100, 100);
  return x;
}

struct TrialConfig {
  Eigen::Index m = 1;
  Eigen::Index n = 1;
  double sigma = 1.0;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
  TruthMode truth;
  DecoderKind decoder;
  unsigned workers = 0;  // 0: hardware concurrency
  // One channel matrix for the whole run instead of a fresh one per trial.
  // Faster, but it estimates the WER conditional on that matrix, not the
  // averaged WER the closed forms describe.
  bool amortized_matrix = false;

  static TrialConfig osic(Eigen::Index m, Eigen::Index n, double sigma, std::uint64_t trials, std::uint64_t seed) {
    TrialConfig c;
    c.m = m;
    c.n = n;
    c.sigma = sigma;
    c.trials = trials;
    c.seed = seed;
    c.truth = FixedTruth{default_fixed_truth(n, seed)};
    c.decoder = OsicDecoder{};
    return c;
  }

  static TrialConfig bsic(Eigen::Index m, const BoxConstraint& box, double sigma, std::uint64_t trials,
                          std::uint64_t seed) {
    TrialConfig c;
    c.m = m;
    c.n = box.size();
    c.sigma = sigma;
    c.trials = trials;
    c.seed = seed;
    c.truth = UniformBoxTruth{box};
    c.decoder = BsicDecoder{box};
    return c;
  }

  void validate() const {
    detail::require<DimensionError>(n >= 1 && m >= n, "TrialConfig: need m >= n >= 1");
    detail::require<DomainError>(sigma > 0.0 && std::isfinite(sigma), "TrialConfig: sigma must be > 0");
    detail::require<ConfigError>(trials >= 1, "TrialConfig: trials must be >= 1");
    if (const auto* fixed = std::get_if<FixedTruth>(&truth)) {
      detail::require<DimensionError>(fixed->x.size() == n, "TrialConfig: fixed truth length must equal n");
    } else {
      detail::require<DimensionError>(std::get<UniformBoxTruth>(truth).box.size() == n,
                                      "TrialConfig: truth box length must equal n");
    }
    if (const auto* bsic = std::get_if<BsicDecoder>(&decoder)) {
      detail::require<DimensionError>(bsic->box.size() == n, "TrialConfig: decoder box length must equal n");
      if (const auto* fixed = std::get_if<FixedTruth>(&truth)) {
        detail::require<ConfigError>(bsic->box.contains(fixed->x),
                                     "TrialConfig: fixed truth lies outside the BSIC decoder box");
      } else {
        detail::require<ConfigError>(std::get<UniformBoxTruth>(truth).box == bsic->box,
                                     "TrialConfig: truth box and BSIC decoder box differ");
      }
    }
  }
};

namespace detail {

inline unsigned resolve_workers(unsigned requested, std::uint64_t trials) {
  unsigned workers = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::uint64_t>(workers, trials));
}

struct Tally {
  std::uint64_t hits = 0;
  std::uint64_t degenerate = 0;
};

// Runs body(t, tally) for t in [0, trials) over contiguous blocks, one block
// per worker. Integer tallies make the merge order-independent.
template <class Body>
Tally parallel_tally(std::uint64_t trials, unsigned requested_workers, const Body& body) {
  const unsigned workers = resolve_workers(requested_workers, trials);
  std::vector<Tally> partial(workers);
  auto run_block = [&](unsigned w) {
    const std::uint64_t begin = trials * w / workers;
    const std::uint64_t end = trials * (w + 1) / workers;
    for (std::uint64_t t = begin; t < end; ++t) body(t, partial[w]);
  };
  if (workers == 1) {
    run_block(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run_block, w);
  }
  Tally total;
  for (const Tally& t : partial) {
    total.hits += t.hits;
    total.degenerate += t.degenerate;
  }
  return total;
}

inline Matrix gaussian_matrix(PhiloxStream& stream, Eigen::Index m, Eigen::Index n) {
  Matrix a(m, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) a(i, j) = stream.normal();
  }
  return a;
}

inline IntVector uniform_in_box(PhiloxStream& stream, const BoxConstraint& box) {
  IntVector x(box.size());
  for (Eigen::Index i = 0; i < box.size(); ++i) x[i] = stream.uniform_int(box.lower()[i], box.upper()[i]);
  return x;
}

inline IntegerPoint decode(const ReducedModel& reduced, const DecoderKind& decoder) {
  if (const auto* bsic = std::get_if<BsicDecoder>(&decoder)) {
    IntegerPoint x = bsic_decode(reduced, bsic->box);
    assert(bsic->box.contains(x));
    return x;
  }
  return osic_decode(reduced);
}

}  // namespace detail

inline WerEstimate run_wer_experiment(const TrialConfig& config) {
  config.validate();
  const Eigen::Index m = config.m;
  const Eigen::Index n = config.n;

  std::optional<GaussianLinearModel> shared_model;
  if (config.amortized_matrix) {
    PhiloxStream stream(config.seed, kAmortizedMatrixStream);
    shared_model.emplace(detail::gaussian_matrix(stream, m, n), config.sigma);
  }

  auto trial = [&](std::uint64_t t, detail::Tally& tally) {
    PhiloxStream stream(config.seed, t);
    std::optional<GaussianLinearModel> fresh;
    if (!shared_model) fresh.emplace(detail::gaussian_matrix(stream, m, n), config.sigma);
    const GaussianLinearModel& model = shared_model ? *shared_model : *fresh;

    const IntVector truth = std::visit(
        [&](const auto& mode) -> IntVector {
          if constexpr (std::is_same_v<std::decay_t<decltype(mode)>, FixedTruth>) {
            return mode.x;
          } else {
            return detail::uniform_in_box(stream, mode.box);
          }
        },
        config.truth);

    Vector y = model.matrix() * truth.cast<double>();
    for (Eigen::Index i = 0; i < m; ++i) y[i] += config.sigma * stream.normal();

    try {
      if (detail::decode(reduce(model, y), config.decoder) != truth) ++tally.hits;
    } catch (const DegeneracyError&) {
      ++tally.hits;
      ++tally.degenerate;
    }
  };

  const detail::Tally total = detail::parallel_tally(config.trials, config.workers, trial);
  return WerEstimate::from_counts(total.hits, config.trials, total.degenerate);
}

/// Empirical success rate of the scalar estimate round(ybar / r) for
/// ybar = r x + v, r^2 ~ chi^2_k (sum of k squared normals), v ~ N(0, sigma^2).
/// Without `eta`, x is a fixed integer drawn once from the seed; with `eta`, x
/// is uniform on [0, eta] and the estimate is clamped to [0, eta].
inline SuccessEstimate simulate_scalar_success(int k, double sigma, std::optional<std::int64_t> eta,
                                               std::uint64_t trials, std::uint64_t seed, unsigned workers = 0) {
  detail::require<DomainError>(k >= 1, "simulate_scalar_success: k must be >= 1");
  detail::require<DomainError>(sigma > 0.0 && std::isfinite(sigma), "simulate_scalar_success: sigma must be > 0");
  detail::require<DomainError>(!eta || *eta >= 0, "simulate_scalar_success: eta must be >= 0");
  detail::require<ConfigError>(trials >= 1, "simulate_scalar_success: trials must be >= 1");

  const std::int64_t fixed_x = default_fixed_truth(1, seed)[0];

  auto trial = [&](std::uint64_t t, detail::Tally& tally) {
    PhiloxStream stream(seed, t);
    double r2 = 0.0;
    for (int j = 0; j < k; ++j) {
      const double z = stream.normal();
      r2 += z * z;
    }
    const double r = std::sqrt(r2);
    const double noise = sigma * stream.normal();
    const std::int64_t x = eta ? stream.uniform_int(0, *eta) : fixed_x;
    const double y = r * static_cast<double>(x) + noise;
    std::int64_t estimate = round_half_down(y / r);
    if (eta) estimate = std::clamp<std::int64_t>(estimate, 0, *eta);
    if (estimate == x) ++tally.hits;
  };

  const detail::Tally total = detail::parallel_tally(trials, workers, trial);
  SuccessEstimate out;
  out.successes = total.hits;
  out.trials = trials;
  out.proportion = static_cast<double>(total.hits) / static_cast<double>(trials);
  out.std_error = std::sqrt(out.proportion * (1.0 - out.proportion) / static_cast<double>(trials));
  return out;
}

struct MomentSummary {
  std::uint64_t samples = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double mean_std_error = 0.0;
  double variance_std_error = 0.0;
};

inline MomentSummary summarize_moments(const std::vector<double>& values) {
  MomentSummary s;
  s.samples = values.size();
  if (values.empty()) return s;
  const double count = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / count;
  double m2 = 0.0;
  double m4 = 0.0;
  for (double v : values) {
    const double d2 = (v - s.mean) * (v - s.mean);
    m2 += d2;
    m4 += d2 * d2;
  }
  if (values.size() > 1) s.variance = m2 / (count - 1.0);
  m4 /= count;
  s.mean_std_error = std::sqrt(s.variance / count);
  s.variance_std_error = std::sqrt(std::max(0.0, m4 - s.variance * s.variance) / count);
  return s;
}

struct DiagonalStatistics {
  std::vector<MomentSummary> diagonal_squared;  // r_ii^2, i = 1..n
  std::optional<MomentSummary> off_diagonal;    // r_12, when n >= 2
};

/// Sample moments of the R factor over `samples` i.i.d. N(0,1) m x n matrices.
/// Sample s uses PhiloxStream(seed, s).
inline DiagonalStatistics diag_chi_square_stats(Eigen::Index m, Eigen::Index n, std::uint64_t samples,
                                                std::uint64_t seed) {
  detail::require<DimensionError>(n >= 1 && m >= n, "diag_chi_square_stats: need m >= n >= 1");
  detail::require<DomainError>(samples >= 100, "diag_chi_square_stats: need at least 100 samples");

  std::vector<std::vector<double>> squared(static_cast<std::size_t>(n), std::vector<double>(samples));
  std::vector<double> off(n >= 2 ? samples : 0);
  for (std::uint64_t s = 0; s < samples; ++s) {
    PhiloxStream stream(seed, s);
    const Matrix r = qr_upper_factor(detail::gaussian_matrix(stream, m, n));
    for (Eigen::Index i = 0; i < n; ++i) squared[i][s] = r(i, i) * r(i, i);
    if (n >= 2) off[s] = r(0, 1);
  }

  DiagonalStatistics out;
  for (const auto& column : squared) out.diagonal_squared.push_back(summarize_moments(column));
  if (n >= 2) out.off_diagonal = summarize_moments(off);
  return out;
}

}  // namespace sicwer
