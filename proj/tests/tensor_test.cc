/*
 * Copyright 2026 The ladp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "ladp/tensor.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gtest/gtest.h"
#include "ladp/rng.h"

namespace ladp {
namespace {

// Reference values below were evaluated with mpmath at 50 significant digits.
constexpr double kSoftmax123[] = {0.09003057317038046, 0.24472847105479764, 0.6652409557748219};
constexpr double kKl123vs321 = 1.1504207652088829;
constexpr double kKlUniformVsSkewed = 0.42981319461032674;

// Independent KL oracle in long double, term by term from raw logits.
long double OracleKlFromLogits(const std::vector<double>& a, const std::vector<double>& b) {
  auto softmax = [](const std::vector<double>& v) {
    std::vector<long double> out(v.size());
    long double sum = 0;
    for (std::size_t i = 0; i < v.size(); ++i) sum += out[i] = std::exp(static_cast<long double>(v[i]));
    for (auto& x : out) x /= sum;
    return out;
  };
  const auto p = softmax(a);
  const auto q = softmax(b);
  long double kl = 0;
  for (std::size_t i = 0; i < p.size(); ++i) kl += p[i] * std::log(p[i] / q[i]);
  return kl;
}

TEST(TensorTest, ConstructionChecksShapeAndFiniteness) {
  EXPECT_THROW(Tensor({2, 3}, std::vector<double>(5)), Error);
  EXPECT_THROW(Tensor({0}), Error);
  EXPECT_THROW(Tensor::Vector({1.0, NAN}), Error);
  EXPECT_THROW(Tensor::Vector({INFINITY}), Error);
  Tensor t({2, 3});
  EXPECT_EQ(t.size(), 6u);
}

TEST(TensorTest, L2Norm) {
  EXPECT_DOUBLE_EQ(L2Norm(Tensor::Vector({3, 4})), 5.0);
  EXPECT_EQ(L2Norm(Tensor({7})), 0.0);
  EXPECT_DOUBLE_EQ(L2Norm(Tensor::Vector({1, 1, 1, 1})), 2.0);
  // Entries large enough that naive squaring would overflow.
  EXPECT_DOUBLE_EQ(L2Norm(Tensor::Vector({3e200, 4e200})), 5e200);
}

TEST(TensorTest, Flatten) {
  const Tensor m({2, 3}, {1, 2, 3, 4, 5, 6});
  const Tensor f = Flatten(m);
  EXPECT_EQ(f.shape(), Shape{6});
  EXPECT_TRUE(std::equal(f.values().begin(), f.values().end(), m.values().begin()));
  EXPECT_EQ(Flatten(Tensor::Vector({1, 2, 3, 4, 5, 6})).shape(), Shape{6});
  EXPECT_EQ(Flatten(Tensor({2, 2, 2})).shape(), Shape{8});
}

TEST(TensorTest, FlattenPreservesNorm) {
  RandomEngine engine(RngStream(11));
  for (int trial = 0; trial < 50; ++trial) {
    Tensor t({1 + engine.UniformInt(4), 1 + engine.UniformInt(5), 1 + engine.UniformInt(3)});
    for (double& v : t.mutable_values()) v = engine.Normal() * 10;
    EXPECT_EQ(L2Norm(Flatten(t)), L2Norm(t));
  }
}

TEST(TensorTest, SoftmaxKnownValues) {
  const Tensor s = Softmax(Tensor::Vector({1, 2, 3}));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(s[i], kSoftmax123[i], 1e-15);
  // Rounded form quoted alongside the privacy-estimation steps.
  EXPECT_NEAR(s[0], 0.09, 5e-4);
  EXPECT_NEAR(s[1], 0.2447, 5e-4);
  EXPECT_NEAR(s[2], 0.6652, 5e-4);

  const Tensor u = Softmax(Tensor::Vector({7.5, 7.5, 7.5, 7.5}));
  for (double v : u.values()) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(TensorTest, SoftmaxDoesNotOverflow) {
  const Tensor s = Softmax(Tensor::Vector({1000, 0}));
  EXPECT_DOUBLE_EQ(s[0], 1.0);
  EXPECT_GT(s[1], 0.0);  // true value ~5e-435 is below double range
  EXPECT_LT(s[1], 1e-300);
}

TEST(TensorTest, SoftmaxRejectsMatrix) { EXPECT_THROW(Softmax(Tensor({2, 2})), Error); }

TEST(TensorTest, SoftmaxSumsToOneAndIsPermutationEquivariant) {
  RandomEngine engine(RngStream(5));
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + engine.UniformInt(40);
    std::vector<double> x(n);
    for (double& v : x) v = engine.Normal() * 20;
    const Tensor s = Softmax(Tensor::Vector(x));
    EXPECT_NEAR(std::accumulate(s.values().begin(), s.values().end(), 0.0), 1.0, 1e-12);
    for (double v : s.values()) EXPECT_GT(v, 0.0);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    engine.Shuffle(perm);
    std::vector<double> permuted(n);
    for (std::size_t i = 0; i < n; ++i) permuted[i] = x[perm[i]];
    const Tensor sp = Softmax(Tensor::Vector(permuted));
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(sp[i], s[perm[i]], 1e-15);
  }
}

TEST(KlDivergenceTest, KnownValues) {
  const Tensor p = Softmax(Tensor::Vector({1, 2, 3}));
  EXPECT_EQ(KlDivergence(p, p), 0.0);

  const double kl = KlDivergence(p, Softmax(Tensor::Vector({3, 2, 1})));
  EXPECT_NEAR(kl, 1.1504, 1e-3);
  EXPECT_NEAR(kl, kKl123vs321, 1e-13);
  EXPECT_NEAR(kl, static_cast<double>(OracleKlFromLogits({1, 2, 3}, {3, 2, 1})), 1e-13);

  const double skewed = KlDivergence(Tensor::Vector({0.25, 0.25, 0.25, 0.25}), Tensor::Vector({0.7, 0.1, 0.1, 0.1}));
  EXPECT_NEAR(skewed, 0.4299, 1e-3);
  EXPECT_NEAR(skewed, kKlUniformVsSkewed, 1e-14);
}

TEST(KlDivergenceTest, RejectsInvalidArguments) {
  const Tensor p = Tensor::Vector({0.5, 0.5});
  try {
    KlDivergence(p, Tensor::Vector({0.2, 0.3, 0.5}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMismatchedLength);
  }
  try {
    KlDivergence(p, Tensor::Vector({2.0, 3.0}));  // not normalized
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotADistribution);
  }
  try {
    KlDivergence(Tensor::Vector({1.0, 0.0}), p);  // zero entry
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotADistribution);
  }
}

TEST(KlDivergenceTest, NonNegativeAndZeroOnlyForEqualDistributions) {
  RandomEngine engine(RngStream(17));
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + engine.UniformInt(30);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = engine.Normal() * 3;
      b[i] = engine.Normal() * 3;
    }
    const Tensor p = Softmax(Tensor::Vector(a));
    const Tensor q = Softmax(Tensor::Vector(b));
    const double kl = KlDivergence(p, q);
    EXPECT_GE(kl, 0.0);
    double max_diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diff = std::max(max_diff, std::abs(p[i] - q[i]));
    EXPECT_EQ(kl == 0.0, max_diff < 1e-12) << "trial " << trial;
    EXPECT_EQ(KlDivergence(p, p), 0.0);
  }
}

TEST(SampleGaussianTest, ZeroStdIsConstant) {
  const Tensor t = SampleGaussian({5}, 0.0, 0.0, RngStream(1));
  for (double v : t.values()) EXPECT_EQ(v, 0.0);
  const Tensor c = SampleGaussian({2, 2}, 3.5, 0.0, RngStream(1));
  for (double v : c.values()) EXPECT_EQ(v, 3.5);
}

TEST(SampleGaussianTest, NegativeStdRejected) {
  try {
    SampleGaussian({3}, 0.0, -1.0, RngStream(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNegativeStd);
  }
}

TEST(SampleGaussianTest, MomentsMatchAtThreeSeeds) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const Tensor t = SampleGaussian({1000000}, 0.0, 2.0, RngStream(seed).Child(Purpose::kTest));
    const auto v = t.values();
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    const double stddev = std::sqrt(var / (v.size() - 1));
    EXPECT_GE(stddev, 1.98);
    EXPECT_LE(stddev, 2.02);
    EXPECT_GE(mean, -0.01);
    EXPECT_LE(mean, 0.01);
  }
}

TEST(SampleGaussianTest, DeterministicPerPath) {
  const RngStream base = RngStream(42).Child({6, 3, 7});
  EXPECT_EQ(SampleGaussian({64}, 0, 1, base), SampleGaussian({64}, 0, 1, RngStream(42).Child({6, 3, 7})));
  EXPECT_NE(SampleGaussian({64}, 0, 1, base), SampleGaussian({64}, 0, 1, RngStream(42).Child({6, 3, 8})));
  EXPECT_NE(SampleGaussian({64}, 0, 1, base), SampleGaussian({64}, 0, 1, RngStream(42).Child({6, 4, 7})));
  EXPECT_NE(SampleGaussian({64}, 0, 1, base), SampleGaussian({64}, 0, 1, RngStream(43).Child({6, 3, 7})));
  // Path order matters.
  EXPECT_NE(SampleGaussian({64}, 0, 1, base), SampleGaussian({64}, 0, 1, RngStream(42).Child({7, 3, 6})));
}

TEST(RngStreamTest, SiblingStreamsAreUncorrelated) {
  const RngStream root(9);
  const Tensor a = SampleGaussian({200000}, 0, 1, root.Child(1));
  const Tensor b = SampleGaussian({200000}, 0, 1, root.Child(2));
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  // Correlation of independent normals has std 1/sqrt(n) ~ 0.0022.
  EXPECT_LT(std::abs(dot / a.size()), 0.011);
}

TEST(RngStreamTest, UniformIntIsUnbiased) {
  RandomEngine engine(RngStream(3));
  std::vector<int> counts(6, 0);
  for (int i = 0; i < 600000; ++i) ++counts[engine.UniformInt(6)];
  for (int c : counts) EXPECT_NEAR(c, 100000, 1500);
}

}  // namespace
}  // namespace ladp
