#pragma once

// Linear model y = A x + v, its QR reduction ybar = R x + vbar, and the two
// successive-interference-cancellation decoders:
//
//   OSIC (Babai nearest plane): c_i = (ybar_i - sum_{j>i} r_ij x_j) / r_ii,
//                                x_i = round(c_i), i = n..1
//   BSIC: same recursion with round(c_i) clamped to [l_i, u_i].
//
// Rounding sends exact half ties downward.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "sicwer/errors.hpp"

namespace sicwer {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/// An integer vector in its role as truth, OSIC output or BSIC output.
using IntegerPoint = IntVector;

class GaussianLinearModel {
 public:
  GaussianLinearModel(Matrix a, double sigma) : a_(std::move(a)), sigma_(sigma) {
    detail::require<DimensionError>(a_.cols() >= 1 && a_.rows() >= a_.cols(),
                                    "GaussianLinearModel: need m >= n >= 1, got " + std::to_string(a_.rows()) + "x" +
                                        std::to_string(a_.cols()));
    detail::require<DomainError>(sigma_ > 0.0 && std::isfinite(sigma_), "GaussianLinearModel: sigma must be > 0");
  }

  [[nodiscard]] Eigen::Index m() const { return a_.rows(); }
  [[nodiscard]] Eigen::Index n() const { return a_.cols(); }
  [[nodiscard]] const Matrix& matrix() const { return a_; }
  [[nodiscard]] double sigma() const { return sigma_; }

 private:
  Matrix a_;
  double sigma_;
};

/// ybar = R x + vbar with R upper triangular, r_ii > 0.
struct ReducedModel {
  Matrix r;
  Vector y_bar;
  double sigma = 1.0;

  [[nodiscard]] Eigen::Index n() const { return r.cols(); }
};

class BoxConstraint {
 public:
  BoxConstraint(IntVector lower, IntVector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    detail::require<DimensionError>(lower_.size() == upper_.size(), "BoxConstraint: bound vectors differ in length");
    for (Eigen::Index i = 0; i < lower_.size(); ++i) {
      detail::require<DomainError>(lower_[i] <= upper_[i],
                                   "BoxConstraint: lower bound exceeds upper bound at index " + std::to_string(i));
    }
  }

  /// [0, d]^n
  static BoxConstraint cube(Eigen::Index n, std::int64_t d) {
    detail::require<DomainError>(d >= 0, "BoxConstraint::cube: edge length must be >= 0");
    return {IntVector::Zero(n), IntVector::Constant(n, d)};
  }

  [[nodiscard]] Eigen::Index size() const { return lower_.size(); }
  [[nodiscard]] const IntVector& lower() const { return lower_; }
  [[nodiscard]] const IntVector& upper() const { return upper_; }
  [[nodiscard]] std::int64_t width(Eigen::Index i) const { return upper_[i] - lower_[i]; }

  [[nodiscard]] bool contains(const IntVector& x) const {
    if (x.size() != size()) return false;
    for (Eigen::Index i = 0; i < size(); ++i) {
      if (x[i] < lower_[i] || x[i] > upper_[i]) return false;
    }
    return true;
  }

  [[nodiscard]] bool is_degenerate() const { return lower_ == upper_; }

  friend bool operator==(const BoxConstraint& a, const BoxConstraint& b) {
    return a.lower_ == b.lower_ && a.upper_ == b.upper_;
  }

 private:
  IntVector lower_;
  IntVector upper_;
};

struct ThinQr {
  Matrix q;  // m x n, orthonormal columns
  Matrix r;  // n x n, upper triangular, positive diagonal
};

namespace detail {

inline void check_pivots(const Matrix& r, double scale) {
  const double threshold = 1e-12 * scale;
  for (Eigen::Index i = 0; i < r.cols(); ++i) {
    if (!(std::abs(r(i, i)) > threshold)) {
      throw DegeneracyError("thin_qr: matrix is numerically rank deficient (pivot " + std::to_string(i) + ")");
    }
  }
}

// Flips rows of R (and the matching columns of Q, when given) so that r_ii > 0.
inline void make_diagonal_positive(Matrix& r, Matrix* q) {
  for (Eigen::Index i = 0; i < r.cols(); ++i) {
    if (r(i, i) < 0.0) {
      r.row(i) *= -1.0;
      if (q != nullptr) q->col(i) *= -1.0;
    }
  }
}

}  // namespace detail

/// Householder thin QR with the positive-diagonal sign convention.
inline ThinQr thin_qr(const Matrix& a) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  detail::require<DimensionError>(n >= 1 && m >= n, "thin_qr: need m >= n >= 1");
  const double scale = a.cwiseAbs().maxCoeff();

  Eigen::HouseholderQR<Matrix> qr(a);
  ThinQr out;
  out.r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  detail::check_pivots(out.r, scale);
  out.q = qr.householderQ() * Matrix::Identity(m, n);
  detail::make_diagonal_positive(out.r, &out.q);
  return out;
}

/// Only R, skipping the formation of Q.
inline Matrix qr_upper_factor(const Matrix& a) {
  const Eigen::Index n = a.cols();
  detail::require<DimensionError>(n >= 1 && a.rows() >= n, "qr_upper_factor: need m >= n >= 1");
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  detail::check_pivots(r, a.cwiseAbs().maxCoeff());
  detail::make_diagonal_positive(r, nullptr);
  return r;
}

/// ybar = Q^T y, R from the thin QR of A. Q is applied as Householder
/// reflections rather than formed.
inline ReducedModel reduce(const GaussianLinearModel& model, const Vector& y) {
  detail::require<DimensionError>(y.size() == model.m(), "reduce: observation length must equal m");
  const Eigen::Index n = model.n();
  const Matrix& a = model.matrix();

  Eigen::HouseholderQR<Matrix> qr(a);
  ReducedModel out;
  out.sigma = model.sigma();
  out.r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  detail::check_pivots(out.r, a.cwiseAbs().maxCoeff());
  Vector rotated = qr.householderQ().transpose() * y;
  out.y_bar = rotated.head(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (out.r(i, i) < 0.0) {
      out.r.row(i) *= -1.0;
      out.y_bar[i] = -out.y_bar[i];
    }
  }
  return out;
}

/// Nearest integer; an exact .5 tie goes to the smaller integer.
inline std::int64_t round_half_down(double c) {
  detail::require<DomainError>(std::isfinite(c), "round_half_down: non-finite input");
  detail::require<DomainError>(std::abs(c) < 0x1p62, "round_half_down: value out of integer range");
  const double floor_c = std::floor(c);
  const double frac = c - floor_c;  // exact for doubles
  return static_cast<std::int64_t>(floor_c) + (frac > 0.5 ? 1 : 0);
}

namespace detail {

inline void check_triangular(const ReducedModel& reduced, const char* where) {
  const Eigen::Index n = reduced.r.cols();
  require<DimensionError>(reduced.r.rows() == n && reduced.y_bar.size() == n,
                          std::string(where) + ": R must be n x n and ybar of length n");
  for (Eigen::Index i = 0; i < n; ++i) {
    require<DegeneracyError>(reduced.r(i, i) != 0.0, std::string(where) + ": zero diagonal entry in R");
  }
}

// Shared back-substitution; `decide` maps (i, round(c_i)) to x_i.
template <class Decide>
IntegerPoint successive_cancellation(const ReducedModel& reduced, Decide decide) {
  const Eigen::Index n = reduced.r.cols();
  IntegerPoint x(n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double residual = reduced.y_bar[i];
    for (Eigen::Index j = i + 1; j < n; ++j) residual -= reduced.r(i, j) * static_cast<double>(x[j]);
    x[i] = decide(i, round_half_down(residual / reduced.r(i, i)));
  }
  return x;
}

}  // namespace detail

inline IntegerPoint osic_decode(const ReducedModel& reduced) {
  detail::check_triangular(reduced, "osic_decode");
  return detail::successive_cancellation(reduced, [](Eigen::Index, std::int64_t rounded) { return rounded; });
}

inline IntegerPoint bsic_decode(const ReducedModel& reduced, const BoxConstraint& box) {
  detail::check_triangular(reduced, "bsic_decode");
  detail::require<DimensionError>(box.size() == reduced.n(), "bsic_decode: box length must equal n");
  return detail::successive_cancellation(reduced, [&box](Eigen::Index i, std::int64_t rounded) {
    return std::clamp(rounded, box.lower()[i], box.upper()[i]);
  });
}

}  // namespace sicwer
