#include <gtest/gtest.h>

#include <cmath>

#include "sicwer/decoder.hpp"
#include "sicwer/rng.hpp"

using namespace sicwer;

namespace {

Matrix random_gaussian(Eigen::Index m, Eigen::Index n, std::uint64_t seed) {
  PhiloxStream stream(seed, 0);
  Matrix a(m, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < m; ++i) a(i, j) = stream.normal();
  return a;
}

IntVector ints(std::initializer_list<std::int64_t> values) {
  IntVector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (auto x : values) v[i++] = x;
  return v;
}

ReducedModel reduced(Matrix r, Vector y_bar) { return ReducedModel{std::move(r), std::move(y_bar), 0.1}; }

}  // namespace

TEST(ThinQr, Identity) {
  const auto qr = thin_qr(Matrix::Identity(3, 3));
  EXPECT_TRUE(qr.q.isApprox(Matrix::Identity(3, 3)));
  EXPECT_TRUE(qr.r.isApprox(Matrix::Identity(3, 3)));
}

TEST(ThinQr, PermutationGetsPositiveDiagonal) {
  Matrix a(2, 2);
  a << 0, 1, 1, 0;
  const auto qr = thin_qr(a);
  EXPECT_NEAR(qr.r(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(qr.r(1, 1), 1.0, 1e-15);
  EXPECT_NEAR(qr.r(0, 1), 0.0, 1e-15);
  EXPECT_LE((qr.q * qr.r - a).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ThinQr, RandomReconstructionAndOrthonormality) {
  std::uint64_t seed = 1;
  for (auto [m, n] : {std::pair<Eigen::Index, Eigen::Index>{8, 5}, {5, 5}, {20, 3}, {64, 64}, {40, 17}}) {
    const Matrix a = random_gaussian(m, n, seed++);
    const auto qr = thin_qr(a);
    ASSERT_EQ(qr.q.rows(), m);
    ASSERT_EQ(qr.q.cols(), n);
    ASSERT_EQ(qr.r.rows(), n);
    const double scale = a.cwiseAbs().maxCoeff();
    EXPECT_LE((a - qr.q * qr.r).cwiseAbs().maxCoeff(), 1e-10 * scale) << m << "x" << n;
    EXPECT_LE((qr.q.transpose() * qr.q - Matrix::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-10);
    for (Eigen::Index i = 0; i < n; ++i) {
      EXPECT_GT(qr.r(i, i), 0.0);
      for (Eigen::Index j = 0; j < i; ++j) EXPECT_EQ(qr.r(i, j), 0.0);
    }
    EXPECT_TRUE(qr_upper_factor(a).isApprox(qr.r));
  }
}

TEST(ThinQr, RankDeficientRaises) {
  Matrix a(3, 2);
  a << 1, 2, 2, 4, 3, 6;
  EXPECT_THROW(thin_qr(a), DegeneracyError);
  EXPECT_THROW(thin_qr(Matrix::Zero(4, 2)), DegeneracyError);
  EXPECT_THROW(thin_qr(Matrix::Ones(2, 3)), DimensionError);
}

TEST(Reduce, IdentityKeepsObservation) {
  Vector y(2);
  y << 3.2, -0.7;
  const auto red = reduce(GaussianLinearModel(Matrix::Identity(2, 2), 0.3), y);
  EXPECT_TRUE(red.r.isApprox(Matrix::Identity(2, 2)));
  EXPECT_NEAR(red.y_bar[0], 3.2, 1e-15);
  EXPECT_NEAR(red.y_bar[1], -0.7, 1e-15);
  EXPECT_EQ(red.sigma, 0.3);
}

TEST(Reduce, MatchesExplicitQ) {
  const Matrix a = random_gaussian(6, 4, 11);
  PhiloxStream stream(11, 1);
  Vector y(6);
  for (auto& v : y) v = stream.normal();
  const auto red = reduce(GaussianLinearModel(a, 0.2), y);
  const auto qr = thin_qr(a);
  EXPECT_LE((red.r - qr.r).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((red.y_bar - qr.q.transpose() * y).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Reduce, ProjectedNoiseNoLargerThanNoise) {
  const Matrix a = random_gaussian(6, 4, 5);
  PhiloxStream stream(5, 9);
  const IntVector x = ints({3, -1, 0, 7});
  Vector v(6);
  for (auto& e : v) e = 0.4 * stream.normal();
  const Vector y = a * x.cast<double>() + v;
  const auto red = reduce(GaussianLinearModel(a, 0.4), y);
  const double residual = (red.y_bar - red.r * x.cast<double>()).norm();
  EXPECT_NEAR(residual, (thin_qr(a).q.transpose() * v).norm(), 1e-12);
  EXPECT_LE(residual, v.norm() + 1e-12);
}

TEST(Reduce, WrongObservationLength) {
  EXPECT_THROW(reduce(GaussianLinearModel(Matrix::Identity(3, 2), 1.0), Vector::Zero(2)), DimensionError);
}

TEST(Model, Validation) {
  EXPECT_THROW(GaussianLinearModel(Matrix::Identity(2, 3), 1.0), DimensionError);
  EXPECT_THROW(GaussianLinearModel(Matrix::Identity(2, 2), 0.0), DomainError);
  EXPECT_THROW(BoxConstraint(ints({0, 2}), ints({1, 1})), DomainError);
  EXPECT_THROW(BoxConstraint(ints({0}), ints({1, 1})), DimensionError);
}

TEST(RoundHalfDown, Basics) {
  EXPECT_EQ(round_half_down(2.4), 2);
  EXPECT_EQ(round_half_down(2.6), 3);
  EXPECT_EQ(round_half_down(0.5), 0);
  EXPECT_EQ(round_half_down(-1.5), -2);
  EXPECT_EQ(round_half_down(-0.5), -1);
  EXPECT_EQ(round_half_down(1.5), 1);
  EXPECT_EQ(round_half_down(-2.4), -2);
  EXPECT_EQ(round_half_down(std::nextafter(0.5, 1.0)), 1);
  EXPECT_EQ(round_half_down(1e17), 100000000000000000LL);
  EXPECT_THROW(round_half_down(std::nan("")), DomainError);
  EXPECT_THROW(round_half_down(INFINITY), DomainError);
}

TEST(Osic, IndependentRounding) {
  Vector y(2);
  y << 2.4, -1.6;
  EXPECT_EQ(osic_decode(reduced(Matrix::Identity(2, 2), y)), ints({2, -2}));
}

TEST(Osic, HandEvaluatedRecursion) {
  Matrix r(2, 2);
  r << 1, 0.5, 0, 1;
  Vector y(2);
  y << 2.6, 3.4;
  // x2 = round(3.4) = 3; c1 = 2.6 - 0.5 * 3 = 1.1; x1 = 1.
  EXPECT_EQ(osic_decode(reduced(r, y)), ints({1, 3}));
}

TEST(Osic, ZeroDiagonalRaises) {
  Matrix r(2, 2);
  r << 1, 0.5, 0, 0;
  EXPECT_THROW(osic_decode(reduced(r, Vector::Zero(2))), DegeneracyError);
  EXPECT_THROW(bsic_decode(reduced(r, Vector::Zero(2)), BoxConstraint::cube(2, 1)), DegeneracyError);
}

TEST(Bsic, Clamping) {
  Vector y1(1);
  y1 << 5.2;
  EXPECT_EQ(bsic_decode(reduced(Matrix::Identity(1, 1), y1), BoxConstraint::cube(1, 3)), ints({3}));
  Vector y2(2);
  y2 << 2.4, -1.6;
  EXPECT_EQ(bsic_decode(reduced(Matrix::Identity(2, 2), y2), BoxConstraint::cube(2, 3)), ints({2, 0}));
  EXPECT_THROW(bsic_decode(reduced(Matrix::Identity(2, 2), y2), BoxConstraint::cube(3, 3)), DimensionError);
}

TEST(Decoders, ZeroNoiseRecoversTruth) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(seed % 8);
    const Eigen::Index m = n + static_cast<Eigen::Index>(seed % 3);
    const Matrix a = random_gaussian(m, n, seed);
    PhiloxStream stream(seed, 1);
    IntVector x(n);
    for (auto& e : x) e = stream.uniform_int(0, 7);
    const auto red = reduce(GaussianLinearModel(a, 1.0), a * x.cast<double>());
    EXPECT_EQ(osic_decode(red), x);
    EXPECT_EQ(bsic_decode(red, BoxConstraint::cube(n, 7)), x);
  }
}

// Property checks over random reduced models.
TEST(Decoders, Properties) {
  for (std::uint64_t seed = 100; seed < 400; ++seed) {
    PhiloxStream stream(seed, 0);
    const Eigen::Index n = 1 + stream.uniform_int(0, 9);
    const Matrix r = qr_upper_factor(random_gaussian(n + stream.uniform_int(0, 3), n, seed));
    Vector y(n);
    for (auto& e : y) e = 4.0 * stream.normal();
    const ReducedModel red = reduced(r, y);

    // OSIC is translation equivariant under integer shifts.
    IntVector shift(n);
    for (auto& e : shift) e = stream.uniform_int(-50, 50);
    const ReducedModel shifted = reduced(r, y + r * shift.cast<double>());
    EXPECT_EQ(osic_decode(shifted), osic_decode(red) + shift);

    // BSIC stays in the box, and equals OSIC when no coordinate hits a bound.
    IntVector lower(n), upper(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      lower[i] = stream.uniform_int(-6, 0);
      upper[i] = lower[i] + stream.uniform_int(0, 6);
    }
    const BoxConstraint box(lower, upper);
    const IntegerPoint xb = bsic_decode(red, box);
    EXPECT_TRUE(box.contains(xb));

    const IntegerPoint xo = osic_decode(red);
    const BoxConstraint wide((xo.array() - 1000).matrix(), (xo.array() + 1000).matrix());
    EXPECT_EQ(bsic_decode(red, wide), xo);
  }
}
