#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "bsynth/ad.hpp"
#include "support.hpp"

using namespace bsynth;
using ad::Tape;
using ad::Var;

namespace {

constexpr double kHalfPi = 0.5 * std::numbers::pi;

template <class F>
ad::Gradient grad_of(const std::vector<double>& x, F&& f) {
  Tape tape;
  return ad::gradient(tape, std::span<const double>(x), f);
}

// A composition touching every scalar primitive; templated so the same
// code gives the primal value in double.
template <class S>
S composite(std::span<const S> x) {
  using ad::exp, ad::log, ad::log1p, ad::tan, ad::square, ad::inv_logit, ad::log_inv_logit, ad::log1m_inv_logit;
  S a = x[0] * x[1] + exp(x[2] * 0.3) / (1.0 + square(x[3]));
  S b = log(1.5 + inv_logit(x[4])) - log1p(square(x[5])) + tan(inv_logit(x[0]) * kHalfPi * 0.9);
  S c = log_inv_logit(x[1] - x[2]) * 2.0 - log1m_inv_logit(x[3]) + (x[4] - x[5]) / (2.0 + exp(x[0]));
  S d = -a * b + 3.0 - c / (1.0 + square(b));
  return d - 0.5 * square(x[2]) + ad::normal_lpdf(x[5], x[1], 1.0 + inv_logit(x[3]));
}

}  // namespace

TEST(Record, PrimalValues) {
  EXPECT_EQ(grad_of({3.0}, [](auto x) { return ad::square(x[0]); }).value, 9.0);
  EXPECT_NEAR(grad_of({0.5}, [](auto x) { return ad::tan(x[0] * kHalfPi); }).value, 1.0, 1e-15);
  EXPECT_EQ(grad_of({2.0, 1.0}, [](auto x) { return x[0] * x[1] + ad::log(x[1]); }).value, 2.0);
}

TEST(Record, PrimalMatchesDirectEvaluation) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(6);
    for (auto& v : x) v = n(rng);
    const double direct = composite<double>(std::span<const double>(x));
    const double taped = grad_of(x, [](std::span<const Var> v) { return composite<Var>(v); }).value;
    EXPECT_LE(std::abs(taped - direct), 1e-14 * std::max(1.0, std::abs(direct)));
  }
}

TEST(Backward, ClosedFormDerivatives) {
  EXPECT_EQ(grad_of({3.0}, [](auto x) { return ad::square(x[0]); }).grad[0], 6.0);
  EXPECT_NEAR(grad_of({0.5}, [](auto x) { return ad::tan(x[0] * kHalfPi); }).grad[0], std::numbers::pi, 1e-14);
  auto g = grad_of({2.0, 1.0}, [](auto x) { return x[0] * x[1] + ad::log(x[1]); });
  EXPECT_EQ(g.grad[0], 1.0);
  EXPECT_EQ(g.grad[1], 3.0);
}

TEST(Backward, RandomCompositionsMatchFiniteDifferences) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd x(6);
    for (auto& v : x) v = n(rng);
    std::vector<double> xv(x.data(), x.data() + 6);
    const auto g = grad_of(xv, [](std::span<const Var> v) { return composite<Var>(v); });
    const auto fd = testing_support::fd_gradient(
        [](const Eigen::VectorXd& p) { return composite<double>(std::span<const double>(p.data(), 6)); }, x, 1e-6);
    for (int i = 0; i < 6; ++i) EXPECT_LE(std::abs(g.grad[i] - fd(i)), 1e-7 * std::max(1.0, std::abs(fd(i))));
  }
}

TEST(Backward, Linearity) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0, 1);
  auto f = [](std::span<const Var> x) { return composite<Var>(x); };
  auto h = [](std::span<const Var> x) { return ad::exp(x[0] * 0.2) * x[3] - ad::square(x[5] + x[1]); };
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(6);
    for (auto& v : x) v = n(rng);
    const double a = n(rng), b = n(rng);
    const auto gf = grad_of(x, f), gh = grad_of(x, h);
    const auto gc = grad_of(x, [&](std::span<const Var> v) { return a * f(v) + b * h(v); });
    for (int i = 0; i < 6; ++i)
      EXPECT_LE(std::abs(gc.grad[i] - (a * gf.grad[i] + b * gh.grad[i])), 1e-12 * std::max(1.0, std::abs(gc.grad[i])));
  }
}

TEST(Backward, SumOfNormalLogDensitiesMatchesAnalyticForm) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0, 1);
  const int N = 40;
  std::vector<double> y(N + 2);
  for (auto& v : y) v = n(rng);
  y[N] = 0.3;         // mu
  y[N + 1] = 1.7;     // sigma
  auto g = grad_of(y, [&](std::span<const Var> v) {
    std::vector<Var> terms;
    for (int i = 0; i < N; ++i) terms.push_back(ad::normal_lpdf(v[i], v[N], v[N + 1]));
    return ad::sum(std::span<const Var>(terms));
  });
  const double mu = y[N], s = y[N + 1];
  double dmu = 0, ds = 0, value = 0;
  for (int i = 0; i < N; ++i) {
    const double r = y[i] - mu;
    EXPECT_NEAR(g.grad[i], -r / (s * s), 1e-12);
    dmu += r / (s * s);
    ds += r * r / (s * s * s) - 1.0 / s;
    value += -0.5 * r * r / (s * s) - std::log(s) - 0.5 * std::log(2 * std::numbers::pi);
  }
  EXPECT_NEAR(g.grad[N], dmu, 1e-12);
  EXPECT_NEAR(g.grad[N + 1], ds, 1e-12);
  EXPECT_NEAR(g.value, value, 1e-12);

  auto vec = grad_of(std::vector<double>(y.begin(), y.begin() + N),
                     [&](std::span<const Var> v) { return ad::normal_lpdf(v, mu, s); });
  EXPECT_NEAR(vec.value, value, 1e-12);
  for (int i = 0; i < N; ++i) EXPECT_NEAR(vec.grad[i], -(y[i] - mu) / (s * s), 1e-12);
}

TEST(Backward, FusedLinearKernelMatchesScalarComposition) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0, 1);
  std::vector<double> x(11);
  for (auto& v : x) v = n(rng);
  x[10] = 0.8;  // sigma
  const std::vector<double> data = {0.4, -1.1};
  // y=x0, a=x1..x3, b=x4..x6, offsets=x7, coef=x8..x9, sigma=x10
  auto fused = grad_of(x, [&](std::span<const Var> v) {
    return ad::normal_linear_lpdf<Var>(v[0], v.subspan(1, 3), v.subspan(4, 3), v.subspan(7, 1), v.subspan(8, 2),
                                       std::span<const double>(data), v[10]);
  });
  auto plain = grad_of(x, [&](std::span<const Var> v) {
    Var mu = ad::dot(v.subspan(1, 3), v.subspan(4, 3)) + v[7] + ad::dot(v.subspan(8, 2), std::span<const double>(data));
    return ad::normal_lpdf(v[0], mu, v[10]);
  });
  EXPECT_NEAR(fused.value, plain.value, 1e-13);
  for (int i = 0; i < 11; ++i) EXPECT_NEAR(fused.grad[i], plain.grad[i], 1e-12);
}

TEST(Tape, BackwardVisitsEachNodeOnceAndTopologicalOrder) {
  Tape tape;
  auto g = ad::gradient(tape, std::vector<double>{0.3, -0.7, 1.2, 0.1, 0.5, -0.2},
                        [](std::span<const Var> v) { return composite<Var>(v); });
  (void)g;
  EXPECT_EQ(tape.backward_visits(), tape.size());
  EXPECT_GT(tape.size(), 6u);
}

TEST(Tape, ClearedStorageIsReusedAcrossEvaluations) {
  Tape tape;
  std::vector<double> x = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  auto f = [](std::span<const Var> v) { return composite<Var>(v); };
  const auto first = ad::gradient(tape, x, f);
  const std::size_t nodes = tape.size();
  for (int i = 0; i < 10; ++i) {
    const auto again = ad::gradient(tape, x, f);
    EXPECT_EQ(tape.size(), nodes);
    EXPECT_EQ(again.grad, first.grad);
    EXPECT_EQ(again.value, first.value);
  }
}

TEST(Tape, ConstantsCarryNoGradient) {
  auto g = grad_of({2.0}, [](std::span<const Var> v) {
    Var c = v[0].tape->constant(5.0);
    return c * v[0] + ad::square(c);
  });
  EXPECT_EQ(g.value, 35.0);
  EXPECT_EQ(g.grad[0], 5.0);
}
