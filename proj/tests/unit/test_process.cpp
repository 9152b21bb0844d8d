#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "ustat/config.hpp"
#include "ustat/error.hpp"
#include "ustat/process.hpp"
#include "ustat/rng.hpp"

using namespace ustat;

namespace {

// |observed - expected| within k binomial standard errors
void expect_frequency(double count, double total, double p, double k = 4.0) {
  const double se = std::sqrt(p * (1.0 - p) / total);
  EXPECT_NEAR(count / total, p, k * se) << "p = " << p;
}

}  // namespace

TEST(Process, SamplePathIsDeterministic) {
  const auto spec = ProcessSpec::two_state_markov(0.3, 0.3);
  EXPECT_EQ(sample_path(spec, 100, 42), sample_path(spec, 100, 42));
  EXPECT_NE(sample_path(spec, 100, 42), sample_path(spec, 100, 43));
  const auto u = ProcessSpec::iid_uniform01();
  EXPECT_EQ(sample_path(u, 10, 7), sample_path(u, 10, 7));
}

TEST(Process, StreamsAreIndependentOfCallOrder) {
  const auto spec = ProcessSpec::iid_uniform01();
  Rng a(5, {10, 3});
  Rng b(5, {10, 3});
  Rng other(5, {10, 4});
  const auto x = sample_path(spec, 8, a);
  EXPECT_EQ(x, sample_path(spec, 8, b));
  EXPECT_NE(x, sample_path(spec, 8, other));
}

TEST(Process, IidDiscreteFrequencies) {
  const auto spec = ProcessSpec::iid_discrete({-1.0, 0.0, 2.0}, {0.2, 0.5, 0.3});
  const auto x = sample_path(spec, 200000, 11);
  double c[3] = {0, 0, 0};
  for (double v : x) c[v < 0 ? 0 : (v == 0 ? 1 : 2)] += 1.0;
  expect_frequency(c[0], 200000, 0.2);
  expect_frequency(c[1], 200000, 0.5);
  expect_frequency(c[2], 200000, 0.3);
}

TEST(Process, UniformMoments) {
  const auto x = sample_path(ProcessSpec::iid_uniform01(), 200000, 3);
  double s = 0.0, s2 = 0.0;
  for (double v : x) {
    ASSERT_GE(v, 0.0);
    ASSERT_LT(v, 1.0);
    s += v;
    s2 += v * v;
  }
  EXPECT_NEAR(s / 200000, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / 200000));
  EXPECT_NEAR(s2 / 200000, 1.0 / 3.0, 4.0 * std::sqrt(4.0 / 45.0 / 200000));
}

TEST(Process, MarkovTransitionFrequencies) {
  const auto spec = ProcessSpec::two_state_markov(0.2, 0.6);
  const auto x = sample_path(spec, 400000, 9);
  double from0 = 0, to1 = 0, from1 = 0, to0 = 0, ones = 0;
  for (std::size_t t = 0; t + 1 < x.size(); ++t) {
    if (x[t] == 0.0) {
      from0 += 1;
      to1 += x[t + 1];
    } else {
      from1 += 1;
      to0 += 1.0 - x[t + 1];
    }
    ones += x[t];
  }
  expect_frequency(to1, from0, 0.2);
  expect_frequency(to0, from1, 0.6);
  // long-run share of state 1 is 0.25; allow for autocorrelation (lambda = 0.2)
  EXPECT_NEAR(ones / static_cast<double>(x.size() - 1), 0.25, 0.005);
}

TEST(Process, PathStartsInStationaryLaw) {
  // Shift invariance: X_1 and X_40 have the same law across replicates.
  const auto spec = ProcessSpec::two_state_markov(0.1, 0.3);
  double first = 0, later = 0;
  const std::size_t reps = 40000;
  for (std::size_t i = 0; i < reps; ++i) {
    Rng rng(17, {i});
    const auto x = sample_path(spec, 40, rng);
    first += x[0];
    later += x[39];
  }
  expect_frequency(first, reps, 0.25);
  expect_frequency(later, reps, 0.25);
}

TEST(Process, StationaryDistribution) {
  Eigen::MatrixXd p(2, 2);
  p << 0.8, 0.2, 0.6, 0.4;
  const auto pi = stationary_distribution(p);
  EXPECT_NEAR(pi(0), 0.75, 1e-14);
  EXPECT_NEAR(pi(1), 0.25, 1e-14);

  Eigen::MatrixXd d(3, 3);
  d << 0.5, 0.25, 0.25, 0.25, 0.5, 0.25, 0.25, 0.25, 0.5;
  const auto u = stationary_distribution(d);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(u(i), 1.0 / 3.0, 1e-14);

  // pi P = pi for a generic primitive chain
  Eigen::MatrixXd g(3, 3);
  g << 0.1, 0.6, 0.3, 0.0, 0.2, 0.8, 0.7, 0.0, 0.3;
  const auto s = stationary_distribution(g);
  const Eigen::RowVectorXd back = s.transpose() * g;
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(back(i), s(i), 1e-14);
  EXPECT_NEAR(s.sum(), 1.0, 1e-14);
}

TEST(Process, RejectsInvalidSpecs) {
  EXPECT_THROW(ProcessSpec::iid_discrete({0, 1}, {0.5, 0.6}), ConfigError);
  EXPECT_THROW(ProcessSpec::iid_discrete({0, 1}, {0.5}), ConfigError);
  EXPECT_THROW(ProcessSpec::iid_discrete({}, {}), ConfigError);
  EXPECT_THROW(ProcessSpec::iid_discrete({0, 1}, {-0.5, 1.5}), ConfigError);
  Eigen::MatrixXd bad(2, 2);
  bad << 0.5, 0.6, 0.5, 0.5;
  EXPECT_THROW(ProcessSpec::finite_markov({0, 1}, bad), ConfigError);
  Eigen::MatrixXd periodic(2, 2);
  periodic << 0, 1, 1, 0;
  EXPECT_THROW(ProcessSpec::finite_markov({0, 1}, periodic), ConfigError);
  Eigen::MatrixXd reducible(2, 2);
  reducible << 1, 0, 0, 1;
  EXPECT_THROW(ProcessSpec::finite_markov({0, 1}, reducible), ConfigError);
  EXPECT_THROW(ProcessSpec::m_dependent(0, IidUniform01{}, window_map("mean")), ConfigError);
  EXPECT_THROW(window_map("median"), ConfigError);
}

TEST(Beta, TwoStateExamples) {
  const auto spec = ProcessSpec::two_state_markov(0.3, 0.3);
  EXPECT_NEAR(beta_coefficient(spec, 1).value, 0.2, 1e-15);
  EXPECT_NEAR(beta_coefficient(spec, 2).value, 0.08, 1e-15);
  EXPECT_NEAR(beta_coefficient(spec, 3).value, 0.032, 1e-15);
  EXPECT_EQ(beta_coefficient(spec, 3).exactness, Exactness::exact);
  EXPECT_THROW(beta_coefficient(spec, 0), PreconditionViolation);
}

TEST(Beta, ClosedFormAndMonotone) {
  for (double p : {0.1, 0.4, 0.9}) {
    for (double q : {0.2, 0.5, 0.95}) {
      const auto spec = ProcessSpec::two_state_markov(p, q);
      double prev = 1.0;
      for (std::size_t t = 1; t <= 40; ++t) {
        const double b = beta_coefficient(spec, t).value;
        const double closed = 2 * p * q / ((p + q) * (p + q)) * std::pow(std::abs(1 - p - q), static_cast<double>(t));
        EXPECT_NEAR(b, closed, 1e-12);
        EXPECT_LE(b, prev + 1e-15);
        prev = b;
      }
    }
  }
}

TEST(Beta, IidAndWindow) {
  const auto iid = ProcessSpec::iid_discrete({0, 1}, {0.5, 0.5});
  for (std::size_t t = 1; t <= 5; ++t) EXPECT_EQ(beta_coefficient(iid, t).value, 0.0);
  const auto w = ProcessSpec::m_dependent(3, IidUniform01{}, window_map("mean"));
  EXPECT_EQ(beta_coefficient(w, 1).value, 1.0);
  EXPECT_EQ(beta_coefficient(w, 2).exactness, Exactness::upper_bound);
  EXPECT_EQ(beta_coefficient(w, 3).value, 0.0);
  EXPECT_EQ(beta_coefficient(w, 3).exactness, Exactness::exact);
  const auto profile = BetaProfile::from_process(ProcessSpec::two_state_markov(0.3, 0.3));
  EXPECT_NEAR(profile(2), 0.08, 1e-15);
}

TEST(Process, WindowModel) {
  const auto spec = ProcessSpec::m_dependent(2, IidDiscrete{{{0, 1}, {0.5, 0.5}}}, window_map("sum"));
  EXPECT_EQ(spec.symbols_for_path(5), 6u);
  const auto law = spec.marginal_law();
  ASSERT_TRUE(law.has_value());
  // sum of two fair bits: 0, 1, 2 with 1/4, 1/2, 1/4
  double total = 0.0;
  for (std::size_t i = 0; i < law->values.size(); ++i) {
    if (law->values[i] == 1.0) {
      EXPECT_NEAR(law->probs[i], 0.5, 1e-15);
    }
    total += law->probs[i];
  }
  EXPECT_NEAR(total, 1.0, 1e-15);
  const auto x = sample_path(spec, 1000, 2);
  for (std::size_t t = 0; t < x.size(); ++t) {
    EXPECT_TRUE(x[t] == 0.0 || x[t] == 1.0 || x[t] == 2.0);
  }
}

TEST(Enumeration, ProbabilitiesSumToOne) {
  const auto spec = ProcessSpec::two_state_markov(0.2, 0.6);
  const auto table = enumerate_paths(spec, 8);
  EXPECT_EQ(table.size(), 256u);
  double total = 0.0;
  for (double p : table.probs) total += p;
  EXPECT_NEAR(total, 1.0, 1e-14);
  // P(X_1 = 1, ..., X_8 = 1) = pi_1 (1 - q)^7
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto path = table.path(i);
    if (std::all_of(path.begin(), path.end(), [](double v) { return v == 1.0; })) {
      EXPECT_NEAR(table.probs[i], 0.25 * std::pow(0.4, 7), 1e-16);
    }
  }
}

TEST(Enumeration, BudgetAndZeroProbabilityPaths) {
  const auto spec = ProcessSpec::iid_discrete({0, 1, 2}, {0.5, 0.5, 0.0});
  EXPECT_EQ(enumerate_paths(spec, 4).size(), 16u);
  EXPECT_EQ(path_outcome_count(spec, 4).value(), 81u);
  EXPECT_THROW(enumerate_paths(ProcessSpec::two_state_markov(0.3, 0.3), 30, 1000), BudgetExceeded);
  EXPECT_THROW(enumerate_paths(ProcessSpec::iid_uniform01(), 3), ConfigError);
}

TEST(Config, ProcessRoundTrip) {
  const auto j = Json::parse(R"({"type":"finite_markov","states":[0,1],"transition":[[0.7,0.3],[0.4,0.6]]})");
  const auto spec = parse_process(j);
  EXPECT_EQ(process_to_json(spec), j);
  const auto w = Json::parse(
      R"({"type":"m_dependent_window","window":2,"map":"max","base":{"type":"iid_discrete","alphabet":[0,1],"probs":[0.5,0.5]}})");
  EXPECT_EQ(process_to_json(parse_process(w)), w);
}

TEST(Config, StrictParsing) {
  EXPECT_THROW(parse_process(Json::parse(R"({"type":"iid_uniform01","extra":1})")), ConfigError);
  EXPECT_THROW(parse_process(Json::parse(R"({"type":"iid_discrete","alphabet":[0,1]})")), ConfigError);
  EXPECT_THROW(parse_process(Json::parse(R"({"type":"iid_discrete","alphabet":[0,"a"],"probs":[0.5,0.5]})")),
               ConfigError);
  EXPECT_THROW(parse_process(Json::parse(R"([1,2])")), ConfigError);
  EXPECT_THROW(parse_kernel(Json::parse(R"({"name":"product","params":{"bogus":1}})")), ConfigError);
  EXPECT_THROW(parse_kernel(Json::parse(R"({"name":"nope"})")), ConfigError);
}
