#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "codexmine/info.hpp"
#include "codexmine/random.hpp"

using namespace codexmine;

namespace {

std::vector<double> random_distribution(Rng& rng, std::size_t n, double zero_rate = 0.0) {
  std::vector<double> p(n);
  double s = 0.0;
  for (auto& v : p) {
    v = rng.bernoulli(zero_rate) ? 0.0 : -std::log(1.0 - rng.uniform());
    s += v;
  }
  if (s == 0.0) p[0] = s = 1.0;
  for (auto& v : p) v /= s;
  return p;
}

long double oracle_entropy(const std::vector<double>& p) {
  long double h = 0.0L;
  for (double v : p)
    if (v > 0) h += -static_cast<long double>(v) * std::log(static_cast<long double>(v));
  return h;
}

long double oracle_kl(const std::vector<double>& p, const std::vector<double>& q, long double eps = 1e-9L) {
  long double kl = 0.0L;
  const long double n = static_cast<long double>(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    const long double qi = (1.0L - eps) * q[i] + eps / n;
    kl += p[i] * (std::log(static_cast<long double>(p[i])) - std::log(qi));
  }
  return kl;
}

} // namespace

TEST(Entropy, UniformOverFour) {
  const std::vector<double> p{0.25, 0.25, 0.25, 0.25};
  EXPECT_NEAR(entropy(p), 1.386294, 1e-6);
  EXPECT_NEAR(entropy(p), std::log(4.0), 1e-12);
}

TEST(Entropy, PointMass) { EXPECT_EQ(entropy(std::vector<double>{0.0, 1.0, 0.0}), 0.0); }

TEST(Entropy, DirectSummationFixture) {
  const std::vector<double> p{0.5, 0.25, 0.25};
  const double expected = -(0.5 * std::log(0.5) + 0.25 * std::log(0.25) + 0.25 * std::log(0.25));
  EXPECT_NEAR(entropy(p), expected, 1e-12);
  EXPECT_NEAR(entropy(p), 1.0397207708399179, 1e-12);
}

TEST(Entropy, RejectsInvalidDistributions) {
  EXPECT_THROW(entropy(std::vector<double>{0.5, 0.6}), InputError);
  EXPECT_THROW(entropy(std::vector<double>{-0.5, 1.5}), InputError);
  EXPECT_THROW(entropy(std::vector<double>{NAN, 1.0}), InputError);
}

TEST(Entropy, BoundedByLogDimension) {
  Rng rng(1);
  for (int t = 0; t < 500; ++t) {
    const auto n = 1 + rng.index(100);
    const auto p = random_distribution(rng, n, 0.2);
    const double h = entropy(p);
    ASSERT_GE(h, 0.0);
    ASSERT_LE(h, std::log(static_cast<double>(n)) + 1e-12);
    ASSERT_NEAR(h, static_cast<double>(oracle_entropy(p)), 1e-9);
  }
}

TEST(KlDivergence, IdenticalDistributions) {
  const std::vector<double> p{0.1, 0.2, 0.7};
  EXPECT_NEAR(kl_divergence(p, p), 0.0, 1e-8);
}

TEST(KlDivergence, TwoPointFixture) {
  const std::vector<double> p{0.5, 0.5}, q{0.25, 0.75};
  EXPECT_NEAR(kl_divergence(p, q), 0.14384, 1e-5);
  EXPECT_NEAR(kl_divergence(p, q), 0.5 * std::log(2.0) + 0.5 * std::log(0.5 / 0.75), 1e-8);
}

TEST(KlDivergence, MassWhereQHasNoneStaysFinite) {
  const std::vector<double> p{1.0, 0.0}, q{0.0, 1.0};
  const double kl = kl_divergence(p, q);
  EXPECT_TRUE(std::isfinite(kl));
  EXPECT_GT(kl, 10.0);
  EXPECT_LE(kl, std::log(2.0 / kKlSmoothing) + 1e-9);
}

TEST(KlDivergence, DimensionMismatch) {
  EXPECT_THROW(kl_divergence(std::vector<double>{1.0}, std::vector<double>{0.5, 0.5}), InputError);
}

TEST(KlDivergence, GibbsAndOracleOnRandomPairs) {
  Rng rng(2);
  for (int t = 0; t < 500; ++t) {
    const auto n = 2 + rng.index(99);
    const auto p = random_distribution(rng, n, 0.1), q = random_distribution(rng, n, 0.1);
    const double kl = kl_divergence(p, q);
    ASSERT_GE(kl, -1e-12);
    ASSERT_NEAR(kl, static_cast<double>(oracle_kl(p, q)), 1e-9);
  }
}
