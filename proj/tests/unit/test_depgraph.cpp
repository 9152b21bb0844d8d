#include <gtest/gtest.h>

#include <cmath>

#include "ustat/depgraph.hpp"
#include "ustat/error.hpp"
#include "ustat/kernel.hpp"
#include "ustat/process.hpp"

using namespace ustat;

namespace {

// Reference adjacency straight from the definition.
bool near(const Vertex& a, const Vertex& b, std::size_t m) {
  if (a == b) return true;
  for (auto i : a) {
    for (auto j : b) {
      if ((i > j ? i - j : j - i) <= m) return true;
    }
  }
  return false;
}

std::vector<Vertex> all_vertices(const GraphSpec& g) {
  std::vector<Vertex> out;
  for_each_vertex(g, [&](const Vertex& v) { out.push_back(v); });
  return out;
}

}  // namespace

TEST(DepGraph, VertexEnumeration) {
  EXPECT_EQ(all_vertices({6, 2, 0, Mode::U}).size(), 15u);
  EXPECT_EQ(all_vertices({4, 2, 0, Mode::V}).size(), 16u);
  EXPECT_EQ(all_vertices({5, 3, 1, Mode::U}).front(), (Vertex{1, 2, 3}));
  EXPECT_THROW(validate_vertex({2, 1}, {5, 2, 0, Mode::U}), PreconditionViolation);
  EXPECT_NO_THROW(validate_vertex({2, 1}, {5, 2, 0, Mode::V}));
  EXPECT_THROW(validate_vertex({1, 6}, {5, 2, 0, Mode::V}), PreconditionViolation);
}

TEST(DepGraph, Adjacency) {
  const GraphSpec g1{6, 2, 1, Mode::U};
  EXPECT_TRUE(adjacent({1, 2}, {3, 4}, g1));
  EXPECT_FALSE(adjacent({1, 2}, {4, 5}, g1));
  EXPECT_TRUE(adjacent({1, 2}, {1, 2}, g1));
  const GraphSpec g2{6, 2, 2, Mode::U};
  EXPECT_TRUE(adjacent({1, 2}, {4, 5}, g2));
  const GraphSpec g0{6, 2, 0, Mode::U};
  EXPECT_TRUE(adjacent({1, 3}, {3, 5}, g0));
  EXPECT_FALSE(adjacent({1, 3}, {2, 4}, g0));
}

TEST(DepGraph, NeighborhoodCountsMatchDefinition) {
  for (Mode mode : {Mode::U, Mode::V}) {
    for (std::size_t m : {0u, 1u, 3u}) {
      const GraphSpec g{7, 2, m, mode};
      const auto vs = all_vertices(g);
      for (const auto& a : vs) {
        std::size_t count = 0;
        for (const auto& b : vs) count += near(a, b, m) ? 1 : 0;
        ASSERT_EQ(neighborhood_count(a, g), count);
        ASSERT_LE(static_cast<double>(count), neighborhood_bound(g));
      }
      const VertexSet set{vs[0], vs[vs.size() / 2]};
      std::size_t strong = 0;
      for (const auto& b : vs) strong += (near(set[0], b, m) || near(set[1], b, m)) ? 1 : 0;
      EXPECT_EQ(strong_set_count(set, g), strong);
      EXPECT_LE(static_cast<double>(strong), strong_set_bound(2, g));
    }
  }
}

TEST(DepGraph, BoundFormulas) {
  const GraphSpec u{10, 2, 1, Mode::U};
  EXPECT_DOUBLE_EQ(neighborhood_bound(u), 4.0 * 3.0 * 10.0);
  EXPECT_DOUBLE_EQ(strong_set_bound(3, u), 3.0 * 120.0);
  EXPECT_DOUBLE_EQ(q_bound(2, 0.5, u), 120.0);
  EXPECT_DOUBLE_EQ(m_bound(2.0, u), 90.0);
  const GraphSpec v{10, 3, 2, Mode::V};
  EXPECT_DOUBLE_EQ(neighborhood_bound(v), 9.0 * 5.0 * 100.0);
  EXPECT_DOUBLE_EQ(m_bound(1.0, v), 1000.0);
  const auto gm = gamma(2, 0.05);
  EXPECT_DOUBLE_EQ(gm.value, 0.8);
  EXPECT_FALSE(gm.out_of_range);
  EXPECT_TRUE(gamma(1, 0.2).out_of_range);
  EXPECT_THROW(gamma(1, -0.1), PreconditionViolation);
}

TEST(DepGraph, AuditSmallGrid) {
  const std::vector<std::size_t> ns{3, 5, 7}, rs{1, 2, 3}, ms{0, 2};
  const std::vector<Mode> modes{Mode::U, Mode::V};
  const auto a = audit_neighborhoods(ns, rs, ms, modes, 1);
  const auto b = audit_neighborhoods(ns, rs, ms, modes, 4);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].violations, 0u);
    EXPECT_EQ(a[i].max_count, b[i].max_count);
    EXPECT_EQ(a[i].min_count, b[i].min_count);
    EXPECT_LE(a[i].ratio(), 1.0);
  }
}

TEST(FactorizationGap, IndependentChainFactorizes) {
  const auto iid = ProcessSpec::two_state_markov(0.5, 0.5);  // i.i.d. fair bits
  const GraphSpec g{6, 2, 1, Mode::U};
  const auto k = builtin_kernel("product");
  const auto fg = factorization_gap(iid, k, {{1, 2}}, {{4, 5}}, g);
  EXPECT_TRUE(fg.separated);
  EXPECT_NEAR(fg.gap, 0.0, 1e-15);
  EXPECT_EQ(fg.bound, 0.0);
  // shared index: E X1 X2 X1 X3 - E X1X2 E X1X3 = 1/8 - 1/16
  const auto shared = factorization_gap(iid, k, {{1, 2}}, {{1, 3}}, g);
  EXPECT_FALSE(shared.separated);
  EXPECT_NEAR(shared.gap, 1.0 / 16.0, 1e-15);
  EXPECT_THROW(factorization_gap(iid, k, {{1, 2}}, {{1, 2}}, g), PreconditionViolation);
}

TEST(FactorizationGap, DependentChainWithinBound) {
  const auto chain = ProcessSpec::two_state_markov(0.2, 0.3);
  const GraphSpec g{7, 2, 2, Mode::U};
  const auto fg = factorization_gap(chain, builtin_kernel("match_indicator"), {{1, 2}}, {{5, 6}, {6, 7}}, g);
  EXPECT_TRUE(fg.separated);
  EXPECT_GT(fg.gap, 0.0);
  EXPECT_LE(fg.gap, fg.bound);
  EXPECT_NEAR(fg.bound, 8.0 * 3.0 * beta_coefficient(chain, 2).value, 1e-15);
}

TEST(CovarianceGap, PreconditionsAndValue) {
  const auto chain = ProcessSpec::two_state_markov(0.3, 0.3);
  const IndexFunction first{{1}, [](std::span<const double> x) { return x[0]; }, 1.0};
  const IndexFunction later{{4}, [](std::span<const double> x) { return x[0]; }, 1.0};
  // Cov(X_1, X_4) = 1/4 * 0.4^3
  const auto cg = covariance_gap(chain, first, later, 2);
  EXPECT_NEAR(cg.gap, 0.25 * std::pow(0.4, 3), 1e-15);
  EXPECT_NEAR(cg.bound, 16.0 * beta_coefficient(chain, 2).value, 1e-15);
  EXPECT_THROW(covariance_gap(chain, first, later, 3), PreconditionViolation);
  EXPECT_THROW(covariance_gap(chain, first, later, 0), PreconditionViolation);
}

TEST(StrongDependency, ConstantKernelCountsStrongSet) {
  const auto chain = ProcessSpec::two_state_markov(0.3, 0.3);
  const GraphSpec g{6, 2, 1, Mode::U};
  const auto paths = enumerate_paths(chain, 6);
  const VertexSet set{{1, 2}, {5, 6}};
  EXPECT_NEAR(strong_dependency_sum(paths, Kernel::constant(2, 1.0), set, g),
              static_cast<double>(strong_set_count(set, g)), 1e-12);
  const double s = strong_dependency_sum(paths, builtin_kernel("product"), set, g);
  EXPECT_GT(s, 0.0);
  EXPECT_LE(s, q_bound(2, 1.0, g));
}
