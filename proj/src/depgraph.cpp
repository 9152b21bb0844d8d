#include "ustat/depgraph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "parallel.hpp"
#include "ustat/combinatorics.hpp"
#include "ustat/error.hpp"
#include "ustat/summation.hpp"

namespace ustat {

namespace {

std::size_t distance(std::size_t a, std::size_t b) { return a > b ? a - b : b - a; }

double beta_or_one(const ProcessSpec& spec, std::size_t lag) {
  // Lag 0 carries no mixing information; 1 is the trivial bound.
  return lag == 0 ? 1.0 : beta_coefficient(spec, lag).value;
}

double lower_power(const GraphSpec& spec, std::size_t s) {
  return spec.mode == Mode::U ? binomial(spec.n, s) : int_power(static_cast<double>(spec.n), s);
}

std::vector<Vertex> all_vertices(const GraphSpec& spec) {
  std::vector<Vertex> out;
  for_each_vertex(spec, [&](const Vertex& v) { out.push_back(v); });
  return out;
}

double term_value(const Kernel& kernel, const Vertex& alpha, std::span<const double> path) {
  double vals[16];
  std::vector<double> heap;
  double* buf = vals;
  if (alpha.size() > 16) {
    heap.resize(alpha.size());
    buf = heap.data();
  }
  for (std::size_t k = 0; k < alpha.size(); ++k) buf[k] = path[alpha[k] - 1];
  return kernel(alpha, std::span<const double>(buf, alpha.size()));
}

void check_set(const VertexSet& set, const GraphSpec& graph, const char* what) {
  if (set.empty()) throw PreconditionViolation(std::string(what) + ": vertex set is empty");
  for (const auto& v : set) validate_vertex(v, graph);
}

void check_positions(const IndexFunction& g, std::size_t length, const char* what) {
  if (g.positions.empty()) throw PreconditionViolation(std::string(what) + ": empty index set");
  for (std::size_t k = 0; k < g.positions.size(); ++k) {
    if (g.positions[k] < 1 || g.positions[k] > length) {
      throw PreconditionViolation(std::string(what) + ": position out of range");
    }
    if (k > 0 && g.positions[k] <= g.positions[k - 1]) {
      throw PreconditionViolation(std::string(what) + ": positions must be strictly increasing");
    }
  }
  if (!g.fn) throw PreconditionViolation(std::string(what) + ": function is empty");
}

double eval_index_function(const IndexFunction& g, std::span<const double> path, std::vector<double>& buf) {
  buf.resize(g.positions.size());
  for (std::size_t k = 0; k < g.positions.size(); ++k) buf[k] = path[g.positions[k] - 1];
  return g.fn(buf);
}

}  // namespace

void GraphSpec::validate() const {
  if (n == 0 || r == 0) throw ConfigError("graph requires n >= 1 and r >= 1");
  if (mode == Mode::U && n < r) throw ConfigError("U-mode graph requires n >= r");
}

void validate_vertex(const Vertex& v, const GraphSpec& spec) {
  if (v.size() != spec.r) throw PreconditionViolation("vertex has the wrong arity");
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (v[k] < 1 || v[k] > spec.n) throw PreconditionViolation("vertex position out of range");
    if (spec.mode == Mode::U && k > 0 && v[k] <= v[k - 1]) {
      throw PreconditionViolation("U-mode vertex must be strictly increasing");
    }
  }
}

bool adjacent(const Vertex& a, const Vertex& b, const GraphSpec& spec) {
  validate_vertex(a, spec);
  validate_vertex(b, spec);
  if (a == b) return true;
  for (std::size_t j : a) {
    for (std::size_t k : b) {
      if (distance(j, k) <= spec.m) return true;
    }
  }
  return false;
}

void for_each_vertex(const GraphSpec& spec, const std::function<void(const Vertex&)>& visit) {
  spec.validate();
  if (spec.mode == Mode::U) {
    Vertex v = first_combination(spec.r);
    do visit(v);
    while (next_combination(v, spec.n));
  } else {
    Vertex v(spec.r, 1);
    do visit(v);
    while (next_tuple(v, spec.n));
  }
}

std::size_t neighborhood_count(const Vertex& a, const GraphSpec& spec) {
  spec.validate();
  validate_vertex(a, spec);
  if (spec.vertex_count() > kGraphEnumerationBudget) {
    throw BudgetExceeded("neighborhood_count: more than 1e7 vertices; use neighborhood_bound");
  }
  std::size_t count = 0;
  for_each_vertex(spec, [&](const Vertex& b) { count += adjacent(a, b, spec) ? 1 : 0; });
  return count;
}

std::size_t strong_set_count(const VertexSet& set, const GraphSpec& spec) {
  spec.validate();
  check_set(set, spec, "strong_set_count");
  if (spec.vertex_count() > kGraphEnumerationBudget) {
    throw BudgetExceeded("strong_set_count: more than 1e7 vertices; use strong_set_bound");
  }
  std::size_t count = 0;
  for_each_vertex(spec, [&](const Vertex& b) {
    for (const auto& a : set) {
      if (adjacent(a, b, spec)) {
        ++count;
        return;
      }
    }
  });
  return count;
}

double neighborhood_bound(const GraphSpec& spec) { return strong_set_bound(1, spec); }

double strong_set_bound(std::size_t set_size, const GraphSpec& spec) {
  const double r = static_cast<double>(spec.r);
  return r * r * static_cast<double>(set_size) * (2.0 * static_cast<double>(spec.m) + 1.0) *
         lower_power(spec, spec.r - 1);
}

double q_bound(std::size_t R, double bound, const GraphSpec& spec) {
  return strong_set_bound(R, spec) * bound;
}

double m_bound(double bound, const GraphSpec& spec) { return bound * lower_power(spec, spec.r); }

GammaValue gamma(std::size_t R, double beta_m) {
  if (beta_m < 0.0 || beta_m > 1.0) throw PreconditionViolation("gamma: beta(m) must lie in [0, 1]");
  GammaValue g;
  g.value = 8.0 * static_cast<double>(R) * beta_m;
  g.out_of_range = g.value >= 1.0;
  return g;
}

FactorizationGap factorization_gap(const PathTable& paths, const ProcessSpec& spec, const Kernel& kernel,
                                   const VertexSet& v1, const VertexSet& v2, const GraphSpec& graph) {
  graph.validate();
  if (kernel.order() != graph.r) throw PreconditionViolation("kernel order differs from graph arity");
  if (paths.length != graph.n) throw PreconditionViolation("path table length differs from graph n");
  check_set(v1, graph, "factorization_gap V1");
  check_set(v2, graph, "factorization_gap V2");
  for (const auto& a : v1) {
    if (std::find(v2.begin(), v2.end(), a) != v2.end()) {
      throw PreconditionViolation("factorization_gap: V1 and V2 must be disjoint");
    }
  }

  FactorizationGap out;
  out.separated = true;
  for (const auto& a : v1) {
    for (const auto& b : v2) out.separated = out.separated && !adjacent(a, b, graph);
  }

  CompensatedSum joint, first, second;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto path = paths.path(i);
    double p1 = 1.0, p2 = 1.0;
    for (const auto& a : v1) p1 *= term_value(kernel, a, path);
    for (const auto& b : v2) p2 *= term_value(kernel, b, path);
    const double w = paths.probs[i];
    joint.add(w * p1 * p2);
    first.add(w * p1);
    second.add(w * p2);
  }
  out.gap = std::abs(joint.value() - first.value() * second.value());
  const double size = static_cast<double>(v1.size() + v2.size());
  out.bound = 8.0 * size * std::pow(kernel.bound(), size) * beta_or_one(spec, graph.m);
  return out;
}

FactorizationGap factorization_gap(const ProcessSpec& spec, const Kernel& kernel, const VertexSet& v1,
                                   const VertexSet& v2, const GraphSpec& graph, std::uint64_t budget) {
  graph.validate();
  return factorization_gap(enumerate_paths(spec, graph.n, budget), spec, kernel, v1, v2, graph);
}

CovarianceGap covariance_gap(const PathTable& paths, const ProcessSpec& spec, const IndexFunction& g1,
                             const IndexFunction& g2, std::size_t gap_m) {
  check_positions(g1, paths.length, "covariance_gap g1");
  check_positions(g2, paths.length, "covariance_gap g2");
  if (gap_m == 0) throw PreconditionViolation("covariance_gap: gap must be >= 1");
  std::size_t min_distance = paths.length;
  for (std::size_t i : g1.positions) {
    for (std::size_t j : g2.positions) min_distance = std::min(min_distance, distance(i, j));
  }
  if (min_distance <= gap_m) {
    throw PreconditionViolation("covariance_gap: index sets are not separated by more than gap_m (min distance " +
                                std::to_string(min_distance) + ")");
  }
  CompensatedSum joint, first, second;
  std::vector<double> buf;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto path = paths.path(i);
    const double a = eval_index_function(g1, path, buf);
    const double b = eval_index_function(g2, path, buf);
    const double w = paths.probs[i];
    joint.add(w * a * b);
    first.add(w * a);
    second.add(w * b);
  }
  CovarianceGap out;
  out.gap = std::abs(joint.value() - first.value() * second.value());
  out.bound = 8.0 * static_cast<double>(g1.positions.size() + g2.positions.size()) * g1.bound * g2.bound *
              beta_coefficient(spec, gap_m).value;
  return out;
}

CovarianceGap covariance_gap(const ProcessSpec& spec, const IndexFunction& g1, const IndexFunction& g2,
                             std::size_t gap_m, std::uint64_t budget) {
  std::size_t length = 0;
  for (std::size_t i : g1.positions) length = std::max(length, i);
  for (std::size_t i : g2.positions) length = std::max(length, i);
  if (length == 0) throw PreconditionViolation("covariance_gap: empty index set");
  return covariance_gap(enumerate_paths(spec, length, budget), spec, g1, g2, gap_m);
}

double strong_dependency_sum(const PathTable& paths, const Kernel& kernel, const VertexSet& set,
                             const GraphSpec& graph) {
  graph.validate();
  check_set(set, graph, "strong_dependency_sum");
  if (paths.length != graph.n) throw PreconditionViolation("path table length differs from graph n");
  std::vector<Vertex> strong;
  for_each_vertex(graph, [&](const Vertex& b) {
    for (const auto& a : set) {
      if (adjacent(a, b, graph)) {
        strong.push_back(b);
        return;
      }
    }
  });
  struct Atom {
    double mass = 0.0;
    CompensatedSum weighted;
  };
  std::map<std::vector<double>, Atom> atoms;
  std::vector<double> key(set.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto path = paths.path(i);
    for (std::size_t k = 0; k < set.size(); ++k) key[k] = term_value(kernel, set[k], path);
    double s = 0.0;
    for (const auto& b : strong) s += std::abs(term_value(kernel, b, path));
    auto& atom = atoms[key];
    atom.mass += paths.probs[i];
    atom.weighted.add(paths.probs[i] * s);
  }
  double best = 0.0;
  for (const auto& [k, atom] : atoms) {
    if (atom.mass > 0.0) best = std::max(best, atom.weighted.value() / atom.mass);
  }
  return best;
}

std::vector<NeighborhoodAuditRow> audit_neighborhoods(std::span<const std::size_t> n_values,
                                                      std::span<const std::size_t> r_values,
                                                      std::span<const std::size_t> m_values,
                                                      std::span<const Mode> modes, std::size_t jobs) {
  std::vector<GraphSpec> instances;
  for (Mode mode : modes) {
    for (std::size_t r : r_values) {
      for (std::size_t m : m_values) {
        for (std::size_t n : n_values) {
          if (n == 0 || r == 0 || (mode == Mode::U && n < r)) continue;
          instances.push_back({n, r, m, mode});
        }
      }
    }
  }
  for (const auto& g : instances) {
    if (g.vertex_count() > 2e4) {
      throw BudgetExceeded("audit_neighborhoods: instance with more than 2e4 vertices");
    }
  }
  std::vector<NeighborhoodAuditRow> rows(instances.size());
  detail::parallel_for(instances.size(), jobs, [&](std::size_t idx) {
    const GraphSpec& g = instances[idx];
    const auto verts = all_vertices(g);
    NeighborhoodAuditRow row;
    row.mode = g.mode;
    row.n = g.n;
    row.r = g.r;
    row.m = g.m;
    row.vertices = verts.size();
    row.bound = neighborhood_bound(g);
    row.min_count = verts.size();
    for (const auto& a : verts) {
      std::size_t count = 0;
      for (const auto& b : verts) {
        bool adj = a == b;
        for (std::size_t i = 0; i < g.r && !adj; ++i) {
          for (std::size_t j = 0; j < g.r && !adj; ++j) adj = distance(a[i], b[j]) <= g.m;
        }
        count += adj ? 1 : 0;
      }
      row.max_count = std::max(row.max_count, count);
      row.min_count = std::min(row.min_count, count);
      if (static_cast<double>(count) > row.bound) ++row.violations;
    }
    rows[idx] = row;
  });
  return rows;
}

}  // namespace ustat
