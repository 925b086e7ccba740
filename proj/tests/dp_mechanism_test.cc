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
#include "ladp/dp_mechanism.h"

#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "gtest/gtest.h"
#include "ladp/model.h"
#include "ladp/rng.h"

namespace ladp {
namespace {

// mpmath, 50 digits.
constexpr double kBranchThreshold = 0.10798193302637610;
constexpr double kCFirstBranch = 1.4276587685926262;   // eps 0.2, delta 0.02, B 1
constexpr double kCSecondBranch = 1.2071067811865475;  // eps 0.5, delta 0.5, B 1
constexpr double kLadpSigma = 57.106350743705048;      // c above, sensitivity 8, eps 0.2, P 1
constexpr double kFullDpSigma = 115.03274743122299;    // sqrt(2 ln 62.5) * 8 / 0.2
constexpr double kKlSaturated = 19.999999917553855;    // softmax([0,20]) vs softmax([20,0])

// First-branch oracle written out term by term.
double OracleCFirstBranch(double eps, double delta, double b) {
  const long double log_term = std::log(2.0L / (std::numbers::pi_v<long double> * delta * delta));
  return static_cast<double>((std::sqrt(log_term) + std::sqrt(log_term + 8.0L * eps)) * b / 4.0L);
}

TEST(ComputeCTest, BranchThreshold) {
  EXPECT_NEAR(CBranchThreshold(), 0.10798, 1e-5);
  EXPECT_NEAR(CBranchThreshold(), kBranchThreshold, 1e-16);
}

TEST(ComputeCTest, KnownValues) {
  EXPECT_NEAR(ComputeC(0.2, 0.02, 1.0), 1.4277, 1e-3);
  EXPECT_NEAR(ComputeC(0.2, 0.02, 1.0), kCFirstBranch, 1e-14);
  EXPECT_NEAR(ComputeC(0.2, 0.02, 1.0), OracleCFirstBranch(0.2, 0.02, 1.0), 1e-14);
  EXPECT_NEAR(std::log(2.0 / (std::numbers::pi * 0.02 * 0.02)), 7.3726, 1e-3);

  EXPECT_NEAR(ComputeC(0.5, 0.5, 1.0), 1.2071, 1e-4);
  EXPECT_NEAR(ComputeC(0.5, 0.5, 1.0), kCSecondBranch, 1e-15);
}

TEST(ComputeCTest, LinearInBound) {
  for (double delta : {0.001, 0.02, 0.1, 0.3, 0.9}) {
    for (double eps : {0.05, 0.2, 1.0, 4.0}) {
      const double base = ComputeC(eps, delta, 1.0);
      const double doubled = ComputeC(eps, delta, 2.0);
      EXPECT_NEAR(doubled / base, 2.0, 2.0 * 1e-12);
      EXPECT_NEAR(ComputeC(eps, delta, 0.37) / base, 0.37, 0.37 * 1e-12);
    }
  }
}

TEST(ComputeCTest, MonotoneInEpsilonAndBoundOnEachBranch) {
  for (double delta : {0.01, 0.05, 0.2, 0.6}) {
    double prev = 0.0;
    for (double eps = 0.01; eps < 10; eps *= 1.3) {
      const double c = ComputeC(eps, delta, 1.0);
      EXPECT_GE(c, prev);
      prev = c;
    }
    prev = 0.0;
    for (double b = 1e-6; b < 100; b *= 2) {
      const double c = ComputeC(0.3, delta, b);
      EXPECT_GE(c, prev);
      prev = c;
    }
  }
}

TEST(ComputeCTest, RejectsInvalidInputs) {
  auto code_of = [](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIoError;
  };
  EXPECT_EQ(code_of([] { ComputeC(0.2, 0.0, 1.0); }), ErrorCode::kInvalidDelta);
  EXPECT_EQ(code_of([] { ComputeC(0.2, 1.0, 1.0); }), ErrorCode::kInvalidDelta);
  EXPECT_EQ(code_of([] { ComputeC(0.0, 0.1, 1.0); }), ErrorCode::kInvalidEpsilon);
  EXPECT_EQ(code_of([] { ComputeC(-1.0, 0.1, 1.0); }), ErrorCode::kInvalidEpsilon);
}

TEST(SensitivityTest, Values) {
  EXPECT_EQ(Sensitivity(0.1, 2, 20.0), 8.0);
  EXPECT_EQ(Sensitivity(0.1, 4, 20.0), 2 * Sensitivity(0.1, 2, 20.0));
  EXPECT_LT(Sensitivity(0.1, 2, 1e-12), 1e-11);
  EXPECT_THROW(Sensitivity(0.1, 2, 0.0), Error);
  EXPECT_THROW(Sensitivity(0.0, 2, 1.0), Error);
  EXPECT_THROW(Sensitivity(0.1, 0, 1.0), Error);
}

ModelParams ModelWithLayerNorms(const std::vector<double>& norms) {
  ModelParams m;
  for (double n : norms) {
    // weight [1x1] holds the whole norm, bias zero.
    m.layers.push_back(DenseLayer{Tensor({1, 1}, {n}), Tensor({1}, {0.0})});
  }
  return m;
}

TEST(SelectLayersTest, ThresholdIsInclusive) {
  const ModelParams m = ModelWithLayerNorms({5.0, 1.0, 3.0});
  EXPECT_EQ(SelectLayers(m, 0.0), (std::set<std::size_t>{0, 1, 2}));
  EXPECT_EQ(SelectLayers(m, 3.0), (std::set<std::size_t>{0, 2}));
  EXPECT_TRUE(SelectLayers(m, 5.0 + 1e-9).empty());
  EXPECT_TRUE(SelectLayers(m, std::numeric_limits<double>::infinity()).empty());
}

TEST(SelectLayersTest, NormIncludesBias) {
  ModelParams m;
  m.layers.push_back(DenseLayer{Tensor({1, 1}, {3.0}), Tensor({1}, {4.0})});
  EXPECT_EQ(SelectLayers(m, 5.0).size(), 1u);
  EXPECT_TRUE(SelectLayers(m, 5.0001).empty());
}

TEST(EstimatePrivacyTest, FloorCapAndKnownValue) {
  const Tensor layer({2, 3}, {0.1, -0.4, 0.2, 0.7, 0.0, -0.3});
  EXPECT_EQ(EstimatePrivacy(layer, layer, 1.0, 1e-6), 1e-6);

  const Tensor a = Tensor::Vector({0, 20});
  const Tensor b = Tensor::Vector({20, 0});
  EXPECT_NEAR(KlDivergence(Softmax(a), Softmax(b)), kKlSaturated, 1e-9);
  EXPECT_EQ(EstimatePrivacy(a, b, 5.0, 1e-6), 5.0);

  EXPECT_NEAR(EstimatePrivacy(Tensor::Vector({1, 2, 3}), Tensor::Vector({3, 2, 1}), 5.0, 1e-6), 1.1504, 1e-3);
  // Matrices are flattened before normalization.
  EXPECT_NEAR(EstimatePrivacy(Tensor({1, 3}, {1, 2, 3}), Tensor({1, 3}, {3, 2, 1}), 5.0, 1e-6),
              1.1504207652088829, 1e-13);
  EXPECT_THROW(EstimatePrivacy(Tensor({3}), Tensor({1, 3}), 1.0, 1e-6), Error);
}

TEST(EstimatePrivacyTest, AlwaysWithinFloorAndBound) {
  RandomEngine engine(RngStream(21));
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + engine.UniformInt(50);
    std::vector<double> a(n), b(n);
    const double spread = std::exp(engine.Normal() * 2);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = engine.Normal() * spread;
      b[i] = a[i] + engine.Normal() * spread * engine.Uniform();
    }
    const double bound = std::exp(engine.Normal());
    const double floor = bound * 1e-4;
    const double p = EstimatePrivacy(Tensor::Vector(a), Tensor::Vector(b), bound, floor);
    EXPECT_GE(p, floor);
    EXPECT_LE(p, bound);
  }
}

TEST(NoiseSigmaTest, Values) {
  EXPECT_NEAR(NoiseSigma(1.4277, 8.0, 0.2, 1.0), 57.11, 0.05);
  EXPECT_NEAR(NoiseSigma(ComputeC(0.2, 0.02, 1.0), Sensitivity(0.1, 2, 20), 0.2, 1.0), kLadpSigma, 1e-11);
  EXPECT_DOUBLE_EQ(NoiseSigma(1.3, 2.0, 0.5, 0.25), 2 * NoiseSigma(1.3, 2.0, 0.5, 0.5));
  EXPECT_DOUBLE_EQ(NoiseSigma(0.5, 2.0, 1.0, 1.0), 1.0);
  EXPECT_THROW(NoiseSigma(1.0, 1.0, 1.0, 0.0), Error);
  EXPECT_THROW(NoiseSigma(1.0, -1.0, 1.0, 1.0), Error);
}

TEST(NoiseSigmaTest, InverseInPrivacyEstimate) {
  RandomEngine engine(RngStream(4));
  for (int trial = 0; trial < 200; ++trial) {
    const double c = 0.1 + engine.Uniform() * 3;
    const double df = 0.01 + engine.Uniform() * 10;
    const double eps = 0.05 + engine.Uniform() * 5;
    const double p1 = 1e-6 + engine.Uniform();
    const double s1 = NoiseSigma(c, df, eps, p1);
    const double s2 = NoiseSigma(c, df, eps, 2 * p1);
    EXPECT_NEAR(s2, s1 / 2, 1e-12 * s1);
    EXPECT_LT(s2, s1);
  }
}

TEST(NoiseSigmaTest, PerturbationIdentity) {
  // |d sigma| = c df / (eps P (P / |dP| + 1)) for an increase dP > 0.
  RandomEngine engine(RngStream(6));
  for (int trial = 0; trial < 200; ++trial) {
    const double c = 0.5 + engine.Uniform();
    const double df = 0.1 + engine.Uniform();
    const double eps = 0.1 + engine.Uniform();
    const double p = 0.01 + engine.Uniform();
    const double dp = p * (0.01 + engine.Uniform());
    const double direct = NoiseSigma(c, df, eps, p) - NoiseSigma(c, df, eps, p + dp);
    const double identity = c * df / (eps * p * (p / dp + 1));
    EXPECT_NEAR(direct, identity, 1e-9 * identity);
  }
}

TEST(InjectNoiseTest, ZeroSigmaIsIdentity) {
  const Tensor layer({2, 2}, {1, 2, 3, 4});
  const NoisyTensor out = InjectNoise(layer, 0.0, RngStream(1));
  EXPECT_EQ(out.value, layer);
  EXPECT_EQ(out.noise_l2, 0.0);
  EXPECT_THROW(InjectNoise(layer, -0.1, RngStream(1)), Error);
}

TEST(InjectNoiseTest, NoiseNormConcentrates) {
  const Tensor layer({1000000});
  for (std::uint64_t seed : {1, 2, 3}) {
    const NoisyTensor out = InjectNoise(layer, 1.0, RngStream(seed));
    const double ratio = out.noise_l2 / 1000.0;
    EXPECT_GE(ratio, 0.997);
    EXPECT_LE(ratio, 1.003);
    // Noise is exactly the difference from the input.
    EXPECT_NEAR(L2Norm(out.value), out.noise_l2, 1e-9);
  }
}

TEST(InjectNoiseTest, EmpiricalStdMatchesSigma) {
  const Tensor layer({1000000});
  for (double sigma : {0.5, 3.0}) {
    for (std::uint64_t seed : {1, 2, 3}) {
      const NoisyTensor out = InjectNoise(layer, sigma, RngStream(seed).Child(5));
      const auto v = out.value.values();
      const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
      double var = 0.0;
      for (double x : v) var += (x - mean) * (x - mean);
      EXPECT_NEAR(std::sqrt(var / v.size()), sigma, 0.01 * sigma);
    }
  }
}

TEST(InjectNoiseTest, ReplayIsDeterministic) {
  const Tensor layer({3, 4});
  EXPECT_EQ(InjectNoise(layer, 2.0, RngStream(9).Child(3)).value,
            InjectNoise(layer, 2.0, RngStream(9).Child(3)).value);
}

DPConfig ReferenceConfig(Strategy strategy) {
  DPConfig cfg;
  cfg.epsilon = 0.2;
  cfg.delta = 0.02;
  cfg.kl_bound = 1.0;
  cfg.clip_bound = 20.0;
  cfg.selection_threshold = 0.0;
  cfg.strategy = strategy;
  return cfg;
}

TEST(ProtectModelTest, NoneIsIdentity) {
  const ModelParams local = InitializeModel(ModelSpec{{4, 6, 3}}, RngStream(1));
  const ModelParams global = InitializeModel(ModelSpec{{4, 6, 3}}, RngStream(2));
  const ProtectedModel out = ProtectModel(local, global, ReferenceConfig(Strategy::kNone), 0.1, 2, 0, RngStream(3));
  EXPECT_EQ(out.params, local);
  EXPECT_TRUE(out.records.empty());
}

TEST(ProtectModelTest, LadpWithNothingSelectedIsIdentity) {
  const ModelParams local = InitializeModel(ModelSpec{{4, 6, 3}}, RngStream(1));
  const ModelParams global = InitializeModel(ModelSpec{{4, 6, 3}}, RngStream(2));
  DPConfig cfg = ReferenceConfig(Strategy::kLadp);
  cfg.selection_threshold = 1e9;
  const ProtectedModel out = ProtectModel(local, global, cfg, 0.1, 2, 0, RngStream(3));
  EXPECT_EQ(out.params, local);
  ASSERT_EQ(out.records.size(), 2u);
  for (const auto& r : out.records) {
    EXPECT_FALSE(r.selected);
    EXPECT_EQ(r.privacy_estimate, 0.0);
    EXPECT_EQ(r.sigma, 0.0);
    EXPECT_EQ(r.noise_l2, 0.0);
  }
}

TEST(ProtectModelTest, LadpLeavesUnselectedLayersBitIdentical) {
  const ModelSpec spec{{8, 16, 3}};
  const ModelParams local = InitializeModel(spec, RngStream(1));
  const ModelParams global = InitializeModel(spec, RngStream(2));
  DPConfig cfg = ReferenceConfig(Strategy::kLadp);
  const double norm0 = L2Norm(LayerVector(local.layers[0]));
  const double norm1 = L2Norm(LayerVector(local.layers[1]));
  ASSERT_GT(norm0, norm1);
  cfg.selection_threshold = (norm0 + norm1) / 2;
  const ProtectedModel out = ProtectModel(local, global, cfg, 0.1, 2, 0, RngStream(3));
  EXPECT_EQ(out.params.layers[1], local.layers[1]);
  EXPECT_NE(out.params.layers[0], local.layers[0]);
  EXPECT_TRUE(out.records[0].selected);
  EXPECT_FALSE(out.records[1].selected);
}

TEST(ProtectModelTest, LadpRecordsAreSelfConsistent) {
  const ModelSpec spec{{8, 16, 12, 3}};
  const ModelParams global = InitializeModel(spec, RngStream(1));
  ModelParams local = global;
  RandomEngine engine(RngStream(2));
  for (auto& l : local.layers) {
    for (double& v : l.weight.mutable_values()) v += 0.3 * engine.Normal();
  }
  DPConfig cfg = ReferenceConfig(Strategy::kLadp);
  cfg.kl_bound = 0.05;
  const ProtectedModel out = ProtectModel(local, global, cfg, 0.1, 2, 4, RngStream(3));
  const double c = ComputeC(cfg.epsilon, cfg.delta, cfg.kl_bound);
  for (const auto& r : out.records) {
    ASSERT_TRUE(r.selected);
    EXPECT_GE(r.privacy_estimate, cfg.p_floor);
    EXPECT_LE(r.privacy_estimate, cfg.kl_bound);
    EXPECT_NEAR(r.sigma, c * 8.0 / (cfg.epsilon * r.privacy_estimate), 1e-12 * r.sigma);
    EXPECT_GT(r.noise_l2, 0.0);
  }
}

TEST(ProtectModelTest, FullDpUsesGaussianMechanismSigma) {
  const ModelSpec spec{{4, 6, 3}};
  const ModelParams local = InitializeModel(spec, RngStream(1));
  const ProtectedModel out = ProtectModel(local, local, ReferenceConfig(Strategy::kFullDp), 0.1, 2, 0, RngStream(3));
  ASSERT_EQ(out.records.size(), 2u);
  for (const auto& r : out.records) {
    EXPECT_TRUE(r.selected);
    EXPECT_NEAR(r.sigma, 115.03, 0.1);
    EXPECT_NEAR(r.sigma, kFullDpSigma, 1e-10);
  }
}

TEST(ProtectModelTest, TimeVaryingDecaysExponentially) {
  const ModelSpec spec{{4, 6, 3}};
  const ModelParams local = InitializeModel(spec, RngStream(1));
  DPConfig cfg = ReferenceConfig(Strategy::kTimeVarying);
  cfg.decay_rate = std::log(10.0) / 50;
  const auto at0 = ProtectModel(local, local, cfg, 0.1, 2, 0, RngStream(3));
  const auto at50 = ProtectModel(local, local, cfg, 0.1, 2, 50, RngStream(3));
  EXPECT_NEAR(at0.records[0].sigma, kFullDpSigma, 1e-10);
  EXPECT_NEAR(at50.records[0].sigma, kFullDpSigma / 10, 1e-10);
}

TEST(ProtectModelTest, CappedLadpSigmaMatchesBoundScaledStaticSigma) {
  // With every layer selected and every P capped at B, each layer's sigma is
  // c * df / (eps * B): a single static value, like full_dp with c_i / B.
  const ModelSpec spec{{8, 16, 3}};
  const ModelParams global = InitializeModel(spec, RngStream(1));
  ModelParams local = global;
  RandomEngine engine(RngStream(2));
  for (auto& l : local.layers) {
    for (double& v : l.weight.mutable_values()) v += 2.0 * engine.Normal();
  }
  DPConfig cfg = ReferenceConfig(Strategy::kLadp);
  cfg.kl_bound = 1e-3;
  cfg.p_floor = 1e-9;
  const auto out = ProtectModel(local, global, cfg, 0.1, 2, 0, RngStream(3));
  const double expected = ComputeC(cfg.epsilon, cfg.delta, cfg.kl_bound) * 8.0 / (cfg.epsilon * cfg.kl_bound);
  for (const auto& r : out.records) {
    ASSERT_EQ(r.privacy_estimate, cfg.kl_bound);
    EXPECT_NEAR(r.sigma, expected, 1e-12 * expected);
    EXPECT_NEAR(r.sigma, ComputeC(cfg.epsilon, cfg.delta, 1.0) * 8.0 / cfg.epsilon, 1e-12 * expected);
  }
}

TEST(ProtectModelTest, NoiseDependsOnlyOnStreamPath) {
  const ModelSpec spec{{4, 6, 3}};
  const ModelParams local = InitializeModel(spec, RngStream(1));
  const DPConfig cfg = ReferenceConfig(Strategy::kFullDp);
  const RngStream path = RngStream(5).Child({6, 2, 7});
  EXPECT_EQ(ProtectModel(local, local, cfg, 0.1, 2, 0, path).params,
            ProtectModel(local, local, cfg, 0.1, 2, 0, RngStream(5).Child({6, 2, 7})).params);
  EXPECT_NE(ProtectModel(local, local, cfg, 0.1, 2, 0, path).params,
            ProtectModel(local, local, cfg, 0.1, 2, 0, RngStream(5).Child({6, 2, 8})).params);
}

}  // namespace
}  // namespace ladp
