#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ustat/kernel.hpp"
#include "ustat/process.hpp"
#include "ustat/statistic.hpp"

namespace ustat {

// A vertex is an r-tuple of 1-based sample positions: strictly increasing in
// U-mode, arbitrary in V-mode.
using Vertex = std::vector<std::size_t>;
using VertexSet = std::vector<Vertex>;

// Characterizing graph on the summands of U_n or V_n. Two distinct vertices
// are adjacent iff some pair of their positions is within distance m; every
// vertex carries a loop. The graph is never materialized.
struct GraphSpec {
  std::size_t n = 0;
  std::size_t r = 0;
  std::size_t m = 0;
  Mode mode = Mode::U;

  void validate() const;
  double vertex_count() const { return term_count(mode, n, r); }
};

void validate_vertex(const Vertex& v, const GraphSpec& spec);

bool adjacent(const Vertex& a, const Vertex& b, const GraphSpec& spec);

/// Calls visit(v) for every vertex in lexicographic order.
void for_each_vertex(const GraphSpec& spec, const std::function<void(const Vertex&)>& visit);

inline constexpr double kGraphEnumerationBudget = 1e7;

/// Exact |L(a)|, loop included. Throws BudgetExceeded above 1e7 vertices.
std::size_t neighborhood_count(const Vertex& a, const GraphSpec& spec);

/// Exact |L(V')| for a vertex set (union of neighborhoods).
std::size_t strong_set_count(const VertexSet& set, const GraphSpec& spec);

/// r^2 (2m+1) C(n, r-1) in U-mode, r^2 (2m+1) n^(r-1) in V-mode.
double neighborhood_bound(const GraphSpec& spec);

/// r^2 |V'| (2m+1) C(n, r-1) (U) or n^(r-1) (V).
double strong_set_bound(std::size_t set_size, const GraphSpec& spec);

/// r^2 R F (2m+1) C(n, r-1) (U) or n^(r-1) (V); upper bound on Q_{R,n,m}.
double q_bound(std::size_t R, double bound, const GraphSpec& spec);

/// F C(n, r) (U) or F n^r (V); upper bound on M_n = sum E|w(alpha)|.
double m_bound(double bound, const GraphSpec& spec);

struct GammaValue {
  double value = 0.0;
  bool out_of_range = false;  // value >= 1, outside (0, 1)
};

/// gamma_R = 8 R beta(m). Values >= 1 are reported and flagged, not rejected.
GammaValue gamma(std::size_t R, double beta_m);

struct FactorizationGap {
  double gap = 0.0;
  double bound = 0.0;
  bool separated = false;
};

/// |E prod_{V1 u V2} w - E prod_{V1} w * E prod_{V2} w| by exact enumeration
/// over every path of length graph.n, together with the bound
/// 8 |V1 u V2| F^{|V1 u V2|} beta(m). `separated` reports whether the graph
/// has no edge between V1 and V2; the bound only applies when it does not.
FactorizationGap factorization_gap(const ProcessSpec& spec, const Kernel& kernel, const VertexSet& v1,
                                   const VertexSet& v2, const GraphSpec& graph,
                                   std::uint64_t budget = kDefaultEnumerationBudget);

/// Same, reusing a precomputed path table of length graph.n.
FactorizationGap factorization_gap(const PathTable& paths, const ProcessSpec& spec, const Kernel& kernel,
                                   const VertexSet& v1, const VertexSet& v2, const GraphSpec& graph);

// Bounded function of the values at a fixed set of 1-based positions.
struct IndexFunction {
  std::vector<std::size_t> positions;  // strictly increasing
  std::function<double(std::span<const double>)> fn;
  double bound = 1.0;
};

struct CovarianceGap {
  double gap = 0.0;
  double bound = 0.0;
};

/// |E g1 g2 - E g1 E g2| by exact enumeration and the bound
/// 8 (|I| + |I'|) F' F'' beta(gap_m). Requires min |i - i'| > gap_m and
/// gap_m >= 1; throws PreconditionViolation otherwise.
CovarianceGap covariance_gap(const ProcessSpec& spec, const IndexFunction& g1, const IndexFunction& g2,
                             std::size_t gap_m, std::uint64_t budget = kDefaultEnumerationBudget);

CovarianceGap covariance_gap(const PathTable& paths, const ProcessSpec& spec, const IndexFunction& g1,
                             const IndexFunction& g2, std::size_t gap_m);

/// Essential supremum over the conditioning atoms of sigma{w(alpha), alpha in V'}
/// of sum_{beta in L(V')} E(|w(beta)| | sigma{w(alpha), alpha in V'}).
/// Empirical counterpart of Q_{R,n,m} for a single V'.
double strong_dependency_sum(const PathTable& paths, const Kernel& kernel, const VertexSet& set,
                             const GraphSpec& graph);

struct NeighborhoodAuditRow {
  Mode mode = Mode::U;
  std::size_t n = 0, r = 0, m = 0;
  std::size_t vertices = 0;
  std::size_t max_count = 0;
  std::size_t min_count = 0;
  double bound = 0.0;
  std::size_t violations = 0;
  double ratio() const { return bound > 0 ? static_cast<double>(max_count) / bound : 0.0; }
};

/// Exhaustive comparison of exact neighborhood sizes with the bound for every
/// vertex of every instance in the grid (instances with n < r in U-mode are
/// skipped).
std::vector<NeighborhoodAuditRow> audit_neighborhoods(std::span<const std::size_t> n_values,
                                                      std::span<const std::size_t> r_values,
                                                      std::span<const std::size_t> m_values,
                                                      std::span<const Mode> modes, std::size_t jobs = 1);

}  // namespace ustat
