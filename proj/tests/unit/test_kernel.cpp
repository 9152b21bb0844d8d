#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ustat/error.hpp"
#include "ustat/kernel.hpp"
#include "ustat/process.hpp"

using namespace ustat;

namespace {

double eval2(const Kernel& k, double x, double y, std::size_t i = 1, std::size_t j = 2) {
  const std::size_t idx[2] = {i, j};
  const double v[2] = {x, y};
  return k(idx, v);
}

}  // namespace

TEST(Kernel, BuiltinValues) {
  EXPECT_DOUBLE_EQ(eval2(builtin_kernel("product"), 0.5, 0.4), 0.2);
  EXPECT_EQ(eval2(builtin_kernel("match_indicator"), 1.0, 1.0), 1.0);
  EXPECT_EQ(eval2(builtin_kernel("match_indicator"), 1.0, 0.0), 0.0);
  const auto gini = builtin_kernel("clipped_gini", {{"clip", 1.0}});
  EXPECT_DOUBLE_EQ(eval2(gini, 0.2, 0.9), 0.7);
  EXPECT_DOUBLE_EQ(eval2(builtin_kernel("clipped_gini", {{"clip", 0.5}}), 0.2, 0.9), 0.5);
  const auto ks = builtin_kernel("kendall_sign");
  EXPECT_EQ(eval2(ks, 0.2, 0.9), -1.0);
  EXPECT_EQ(eval2(ks, 0.9, 0.2), 1.0);
  EXPECT_EQ(eval2(ks, 0.3, 0.3), 0.0);
  EXPECT_FALSE(ks.symmetric());
  const auto dp = builtin_kernel("degenerate_product", {{"mu", 0.5}});
  EXPECT_DOUBLE_EQ(eval2(dp, 1.0, 0.0), -0.25);
  EXPECT_DOUBLE_EQ(dp.bound(), 2.25);
}

TEST(Kernel, WeightedProductDependsOnIndices) {
  const auto k = builtin_kernel("weighted_product");
  EXPECT_TRUE(k.index_dependent());
  const double a = eval2(k, 0.5, 0.5, 1, 2);
  const double b = eval2(k, 0.5, 0.5, 1, 3);
  EXPECT_NEAR(std::abs(a), 0.25, 1e-12);
  EXPECT_NEAR(a, -b, 1e-12);
  const auto w = builtin_kernel("weighted_product", {{"omega", 0.0}});
  EXPECT_NEAR(eval2(w, 0.5, 0.4, 3, 7), 0.2, 1e-15);
}

TEST(Kernel, BoundsHoldOnSamples) {
  for (const auto& name : {"product", "match_indicator", "kendall_sign", "weighted_product"}) {
    const auto k = builtin_kernel(name);
    const auto x = sample_path(ProcessSpec::iid_uniform01(), 200, 4);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) EXPECT_LE(std::abs(eval2(k, x[i], x[i + 1], i + 1, i + 2)), k.bound());
  }
}

TEST(Kernel, PairShortcutAgreesWithGeneralForm) {
  for (const auto& name : builtin_kernel_names()) {
    if (name == "identity" || name == "constant") continue;
    KernelParams params;
    if (name == "clipped_gini") params["clip"] = 0.7;
    if (name == "degenerate_product") params["mu"] = 0.3;
    const auto k = builtin_kernel(name, params);
    EXPECT_DOUBLE_EQ(k.pair(2, 5, 0.25, 0.75), eval2(k, 0.25, 0.75, 2, 5)) << name;
  }
}

TEST(Kernel, RejectsBadParameters) {
  EXPECT_THROW(builtin_kernel("clipped_gini"), ConfigError);
  EXPECT_THROW(builtin_kernel("clipped_gini", {{"clip", -1.0}}), ConfigError);
  EXPECT_THROW(builtin_kernel("product", {{"clip", 1.0}}), ConfigError);
  EXPECT_THROW(builtin_kernel("degenerate_product"), ConfigError);
  EXPECT_THROW(builtin_kernel("unknown"), ConfigError);
}

TEST(Projection, ExactDiscrete) {
  const auto spec = ProcessSpec::iid_discrete({0.0, 1.0}, {0.7, 0.3});
  const auto p = hoeffding_projection(spec, builtin_kernel("product"));
  EXPECT_TRUE(p.exact);
  EXPECT_NEAR(p.theta, 0.09, 1e-15);
  EXPECT_NEAR(p.f1(1.0), 0.3, 1e-15);
  EXPECT_NEAR(p.f1(0.0), 0.0, 1e-15);
  const auto m = hoeffding_projection(spec, builtin_kernel("match_indicator"));
  EXPECT_NEAR(m.theta, 0.49 + 0.09, 1e-15);
  EXPECT_NEAR(m.f1(0.0), 0.7, 1e-15);
}

TEST(Projection, UsesStationaryLawOfChain) {
  const auto spec = ProcessSpec::two_state_markov(0.2, 0.6);  // pi = (0.75, 0.25)
  const auto m = hoeffding_projection(spec, builtin_kernel("match_indicator"));
  EXPECT_NEAR(m.theta, 0.625, 1e-14);
  EXPECT_NEAR(m.f1(1.0), 0.25, 1e-14);
}

TEST(Projection, MonteCarloUniform) {
  ProjectionOptions o;
  o.seed = 3;
  const auto p = hoeffding_projection(ProcessSpec::iid_uniform01(), builtin_kernel("product"), o);
  EXPECT_FALSE(p.exact);
  EXPECT_GT(p.theta_se, 0.0);
  EXPECT_NEAR(p.theta, 0.25, 4.0 * p.theta_se);
  // inner bank of 4096 draws: se of f1(0.6) is 0.6 * sqrt(1/12) / 64
  EXPECT_NEAR(p.f1(0.6), 0.3, 4.0 * 0.6 * std::sqrt(1.0 / 12.0) / 64.0);
}

TEST(Projection, RejectsAsymmetricAndIndexDependent) {
  const auto spec = ProcessSpec::iid_discrete({0.0, 1.0}, {0.5, 0.5});
  EXPECT_THROW(hoeffding_projection(spec, builtin_kernel("kendall_sign")), PreconditionViolation);
  EXPECT_THROW(hoeffding_projection(spec, builtin_kernel("weighted_product")), PreconditionViolation);
}

TEST(Sigma2, ChainProductClosedForm) {
  // f1(x) = x/2, Cov(X_1, X_{1+t}) = 0.25 * 0.4^t
  const auto spec = ProcessSpec::two_state_markov(0.3, 0.3);
  const auto proj = hoeffding_projection(spec, builtin_kernel("product"));
  const auto s = yoshihara_sigma2(spec, proj, 200);
  EXPECT_NEAR(s.value, 7.0 / 48.0, 1e-12);
  EXPECT_NEAR(s.variance_term, 1.0 / 16.0, 1e-15);
  EXPECT_NEAR(s.lag_terms[0], 0.025, 1e-15);
  EXPECT_EQ(s.standard_error, 0.0);
  EXPECT_FALSE(s.tail_warning);
}

TEST(Sigma2, TailBoundAndWarning) {
  const auto spec = ProcessSpec::two_state_markov(0.05, 0.05);  // slow mixing
  const auto proj = hoeffding_projection(spec, builtin_kernel("product"));
  const auto s = yoshihara_sigma2(spec, proj, 2);
  // range(f1)^2 * sum_{t>2} 0.5 * 0.9^t
  EXPECT_NEAR(s.tail_bound, 0.25 * 0.5 * std::pow(0.9, 3) / 0.1, 1e-12);
  EXPECT_TRUE(s.tail_warning);
  EXPECT_THROW(yoshihara_sigma2(spec, proj, 0), PreconditionViolation);
}

TEST(Sigma2, WindowModelExact) {
  // X_t = e_t + e_{t+1}, fair bits; f1(x) = x * E X = x; sigma2 = Var X + 2 Var e = 1
  const auto spec = ProcessSpec::m_dependent(2, IidDiscrete{{{0, 1}, {0.5, 0.5}}}, window_map("sum"));
  const auto proj = hoeffding_projection(spec, builtin_kernel("product", {{"value_bound", 2.0}}));
  const auto s = yoshihara_sigma2(spec, proj, 5);
  EXPECT_NEAR(s.value, 1.0, 1e-14);
  EXPECT_NEAR(s.lag_terms[0], 0.25, 1e-15);
  EXPECT_NEAR(s.lag_terms[1], 0.0, 1e-15);
  EXPECT_EQ(s.tail_bound, 0.0);
}

TEST(Sigma2, IidUniformProduct) {
  ProjectionOptions po;
  po.seed = 8;
  Sigma2Options so;
  so.seed = 8;
  const auto proj = hoeffding_projection(ProcessSpec::iid_uniform01(), builtin_kernel("product"), po);
  const auto s = yoshihara_sigma2(ProcessSpec::iid_uniform01(), proj, 10, so);
  EXPECT_GT(s.standard_error, 0.0);
  EXPECT_NEAR(s.value, 1.0 / 48.0, 4.0 * s.standard_error);
}
