#include <gtest/gtest.h>

#include <cmath>

#include "magray/quadrature.hpp"
#include "magray/random.hpp"
#include "magray/time_profile.hpp"
#include "common.hpp"

using namespace magray;

namespace {

double binom(int a, int b) {
  double r = 1;
  for (int k = 1; k <= b; ++k) r = r * (a - b + k) / k;
  return r;
}

}  // namespace

TEST(GradedLex, FirstMonomialsInTwoVariables) {
  const auto m = graded_lex_monomials(2, 10);
  const std::vector<std::pair<int, int>> want{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1},
                                              {0, 2}, {3, 0}, {2, 1}, {1, 2}, {0, 3}};
  for (std::size_t k = 0; k < want.size(); ++k) {
    EXPECT_EQ(m[k][0], want[k].first) << k;
    EXPECT_EQ(m[k][1], want[k].second) << k;
  }
}

TEST(GradedLex, CountMatchesBinomial) {
  for (int n = 1; n <= 4; ++n)
    for (int d = 0; d <= 5; ++d) EXPECT_EQ(monomial_count(n, d), static_cast<std::size_t>(binom(n + d, d)));
}

TEST(GradedLex, OrderIsStrict) {
  const auto m = graded_lex_monomials(3, monomial_count(3, 4));
  for (std::size_t k = 1; k < m.size(); ++k) EXPECT_TRUE(graded_lex_less(m[k - 1], m[k]));
}

TEST(Polynomial, CoefficientRoundTrip) {
  const std::vector<double> c{0.5, 0.0, -1.25, 2.0, 0.0, 3.5, 0.0, 0.0, 0.0, 1.0};
  const auto p = Polynomial::from_graded_lex(2, c);
  EXPECT_EQ(p.to_graded_lex(), c);
  EXPECT_EQ(p.degree(), 3);
}

TEST(Polynomial, EvaluatesLikeTheFormula) {
  // 0.5 − 1.25 y + 2 x² + 3.5 y² + y³
  const auto p = Polynomial::from_graded_lex(2, std::vector<double>{0.5, 0.0, -1.25, 2.0, 0.0, 3.5, 0.0, 0.0, 0.0, 1.0});
  for (double x : {-0.7, 0.0, 0.3})
    for (double y : {-0.4, 0.9}) {
      const double want = 0.5 - 1.25 * y + 2 * x * x + 3.5 * y * y + y * y * y;
      EXPECT_NEAR(p(testing_support::vec2(x, y)), want, 1e-14);
    }
}

TEST(Polynomial, ProductAndSumArePointwise) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 3;
    const auto p = random_polynomial(n, 3, rng), q = random_polynomial(n, 2, rng);
    const Vec x = rng.in_ball(n, 1.0);
    EXPECT_NEAR((p * q)(x), p(x) * q(x), 1e-12);
    EXPECT_NEAR((p + q)(x), p(x) + q(x), 1e-13);
    EXPECT_NEAR((p - q)(x), p(x) - q(x), 1e-13);
    EXPECT_NEAR((2.5 * p)(x), 2.5 * p(x), 1e-13);
  }
}

TEST(Polynomial, DerivativeMatchesCentralDifference) {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_polynomial(3, 4, rng);
    const Vec x = rng.in_ball(3, 0.9);
    for (int k = 0; k < 3; ++k) {
      const double h = 1e-5;
      Vec a = x, b = x;
      a[k] += h;
      b[k] -= h;
      EXPECT_NEAR(p.derivative(k)(x), (p(a) - p(b)) / (2 * h), 1e-8);
    }
  }
}

TEST(UPoly, ValueAndDerivative) {
  const UPoly q{{1.0, -2.0, 0.5}};
  EXPECT_DOUBLE_EQ(q(2.0), 1.0 - 4.0 + 2.0);
  EXPECT_DOUBLE_EQ(q.derivative()(2.0), -2.0 + 2.0);
}

TEST(TimeProfile, BumpIsCompactlySupportedAndSmooth) {
  const auto b = TimeProfile::bump(-1.0, 1.0, UPoly{{1.0, 0.3}});
  EXPECT_TRUE(b.compact());
  EXPECT_EQ(b(-1.5), 0.0);
  EXPECT_EQ(b(1.0), 0.0);
  EXPECT_GT(b(0.0), 0.0);
  const auto d = b.derivative();
  for (double t : {-0.9, -0.3, 0.0, 0.4, 0.95}) {
    const double h = 1e-5;
    EXPECT_NEAR(d(t), (b(t + h) - b(t - h)) / (2 * h), 1e-6 * std::max(1.0, std::abs(d(t))));
  }
  const auto dd = d.derivative();
  for (double t : {-0.5, 0.2}) {
    const double h = 1e-5;
    EXPECT_NEAR(dd(t), (d(t + h) - d(t - h)) / (2 * h), 1e-5 * std::max(1.0, std::abs(dd(t))));
  }
}

TEST(TimeProfile, PolynomialIsNotCompact) {
  EXPECT_FALSE(TimeProfile::constant(2.0).compact());
  EXPECT_DOUBLE_EQ(TimeProfile::polynomial(UPoly{{0.0, 1.0}})(3.0), 3.0);
}

TEST(Quadrature, SimpsonIsExactForCubics) {
  std::vector<double> f(11);
  const double h = 0.1;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double t = k * h;
    f[k] = 1 + t - 2 * t * t + t * t * t;
  }
  EXPECT_NEAR(simpson(f, h), 1 + 0.5 - 2.0 / 3 + 0.25, 1e-14);
}

namespace {

/// Samples of g at k h (k = 0..N) and one more at N h + θ.
template <class G>
std::vector<double> tail_layout(G g, int N, double h, double theta) {
  std::vector<double> f;
  for (int k = 0; k <= N; ++k) f.push_back(g(k * h));
  f.push_back(g(N * h + theta));
  return f;
}

}  // namespace

TEST(Quadrature, TrajectoryIntegralIsExactForCubicsWithTail) {
  const double h = 0.05, theta = 0.0317;
  for (int N : {2, 3, 5, 6, 9}) {
    const auto f = tail_layout([](double s) { return 0.3 - s + 0.7 * s * s * s; }, N, h, theta);
    const double L = N * h + theta;
    EXPECT_NEAR(trajectory_integral(f, h, theta), 0.3 * L - L * L / 2 + 0.7 * L * L * L * L / 4, 1e-13) << N;
  }
}

TEST(Quadrature, ShortAndRunningIntegralsAreExactForQuadratics) {
  const double h = 0.05, theta = 0.0317;
  auto g = [](double s) { return 0.3 - s + 0.9 * s * s; };
  auto G = [](double s) { return 0.3 * s - s * s / 2 + 0.3 * s * s * s; };
  for (int N : {1, 2, 5, 6, 9}) {
    const auto f = tail_layout(g, N, h, theta);
    EXPECT_NEAR(trajectory_integral(f, h, theta), G(N * h + theta), 1e-13) << N;
    const auto cum = cumulative_integral(f, h, theta);
    for (int k = 0; k <= N; ++k) EXPECT_NEAR(cum[static_cast<std::size_t>(k)], G(k * h), 1e-13) << N << " " << k;
    EXPECT_NEAR(cum.back(), G(N * h + theta), 1e-13) << N;
  }
}

TEST(Quadrature, ConvergesAtFourthOrderOnSmoothIntegrand) {
  auto err = [](double h) {
    const int N = static_cast<int>(std::floor(1.0 / h));
    const double theta = 1.0 - N * h;
    std::vector<double> f;
    for (int k = 0; k <= N; ++k) f.push_back(std::exp(std::sin(3 * k * h)));
    f.push_back(std::exp(std::sin(3.0)));
    // reference by a much finer Simpson
    std::vector<double> r(200001);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = std::exp(std::sin(3.0 * k / 200000.0));
    return std::abs(trajectory_integral(f, h, theta) - simpson(r, 1.0 / 200000.0));
  };
  const double e1 = err(0.02), e2 = err(0.01);
  EXPECT_GT(e1 / e2, 10.0);
}
