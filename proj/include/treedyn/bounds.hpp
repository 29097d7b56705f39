#pragma once

// Entropy bounds: the P-Lipschitz bound, the defect frequency of g_N, and
// star/comb extraction for trees with many endpoints.

#include "treedyn/constructions.hpp"
#include "treedyn/core.hpp"
#include "treedyn/spectral.hpp"
#include "treedyn/tree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace treedyn {

// ---------------------------------------------------------------------------
// P-Lipschitz bound

struct LipschitzSpec {
  Digraph graph;
  /// L_A for every arc.
  std::vector<double> constants;
  /// The subsystem B (arc indices).
  std::vector<std::size_t> subsystem;
};

struct LipschitzBound {
  double bound;
  Rational theta;
};

/// log+ L_B + 2 theta_B log+ L_A, where theta_B is the maximal cycle frequency
/// of arcs outside B.
inline LipschitzBound p_lipschitz_bound(const LipschitzSpec& spec) {
  const std::size_t n = spec.graph.size();
  if (spec.subsystem.empty()) throw BoundsError("empty subsystem");
  if (spec.constants.size() != n) throw BoundsError("constants do not match the graph");
  for (double l : spec.constants)
    if (!(l > 0)) throw BoundsError("Lipschitz constants must be positive");
  std::vector<long long> weight(n, 1);
  double l_b = 0;
  for (auto a : spec.subsystem) {
    if (a >= n) throw BoundsError("subsystem arc out of range");
    weight[a] = 0;
    l_b = std::max(l_b, spec.constants[a]);
  }
  double l_a = *std::max_element(spec.constants.begin(), spec.constants.end());
  LipschitzBound out;
  out.theta = max_cycle_mean(spec.graph, weight);
  out.bound = log_plus(l_b) + 2 * to_double(out.theta) * log_plus(l_a);
  return out;
}

// ---------------------------------------------------------------------------
// Defect frequency of g_N

struct ThetaDefect {
  Rational theta;
  Rational limit;  // 2/(N-5)
  bool ok;
};

inline ThetaDefect theta_defect(const ExtensionResult& ext, const std::vector<std::size_t>& defect) {
  const auto& g = ext.map.transition().adjacency;
  std::vector<long long> w(g.size(), 0);
  for (auto a : defect) w.at(a) = 1;
  ThetaDefect out;
  out.theta = max_cycle_mean(g, w);
  out.limit = Rational(2, ext.N - 5);
  out.ok = out.theta <= out.limit;
  return out;
}

inline ThetaDefect theta_defect(const ExtensionResult& ext) { return theta_defect(ext, ext.defect); }

// ---------------------------------------------------------------------------
// Endpoint-count bound

namespace detail {

/// Host edges to the first endpoint reached by leaving through
/// `first`, always continuing through the smallest vertex id.
inline std::vector<std::size_t> run_to_leaf(const MetricTree& t, Incidence first) {
  std::vector<std::size_t> path{first.edge};
  std::size_t cur = first.neighbor, via = first.edge;
  while (t.degree(cur) > 1) {
    std::optional<Incidence> next;
    for (const auto& inc : t.incident(cur))
      if (inc.edge != via && (!next || t.vertex_id(inc.neighbor) < t.vertex_id(next->neighbor))) next = inc;
    cur = next->neighbor;
    via = next->edge;
    path.push_back(via);
  }
  return path;
}

/// Incidences of v sorted by neighbor id.
inline std::vector<Incidence> sorted_incidences(const MetricTree& t, std::size_t v) {
  auto inc = t.incident(v);
  std::sort(inc.begin(), inc.end(), [&](const Incidence& a, const Incidence& b) {
    return t.vertex_id(a.neighbor) < t.vertex_id(b.neighbor);
  });
  return inc;
}

/// Branch points of the host beyond the incidence `first`.  Inside the
/// closure of that component degrees equal host degrees, except at the root.
inline std::size_t branch_points_beyond(const MetricTree& t, const Incidence& first) {
  std::size_t count = 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{first.neighbor, first.edge}};
  while (!stack.empty()) {
    auto [v, via] = stack.back();
    stack.pop_back();
    if (t.degree(v) >= 3) ++count;
    for (const auto& inc : t.incident(v))
      if (inc.edge != via) stack.push_back({inc.neighbor, inc.edge});
  }
  return count;
}

/// Builds a (p+3)-comb inside the part of the host reached from `anchor`
/// through `entry`, with the anchor as an endpoint attached to an extreme
/// branch point of the comb.  Appends host edge indices to `out`.
inline void comb_from(const MetricTree& t, std::size_t anchor, Incidence entry, int p, std::vector<std::size_t>& out) {
  // Nearest branch point from the anchor.
  std::size_t cur = entry.neighbor, via = entry.edge;
  out.push_back(via);
  while (t.degree(cur) == 2) {
    for (const auto& inc : t.incident(cur))
      if (inc.edge != via) {
        via = inc.edge;
        cur = inc.neighbor;
        break;
      }
    out.push_back(via);
  }
  if (t.degree(cur) < 3)
    throw BoundsError("comb extraction failed: no branch point beyond '" + t.vertex_id(anchor) + "'");
  const std::size_t b = cur;
  std::vector<Incidence> others;
  for (const auto& inc : sorted_incidences(t, b))
    if (inc.edge != via) others.push_back(inc);

  if (p == 0) {
    for (std::size_t d = 0; d < 2; ++d) {
      auto leg = run_to_leaf(t, others[d]);
      out.insert(out.end(), leg.begin(), leg.end());
    }
    return;
  }
  // Richest component; ties go to the smallest neighbor id (others is sorted).
  std::size_t best = 0, best_count = 0;
  for (std::size_t d = 0; d < others.size(); ++d) {
    auto c = branch_points_beyond(t, others[d]);
    if (c > best_count) {
      best_count = c;
      best = d;
    }
  }
  if (best_count == 0) throw BoundsError("comb extraction failed: not enough branch points");
  comb_from(t, b, others[best], p - 1, out);
  std::size_t third = best == 0 ? 1 : 0;
  auto leg = run_to_leaf(t, others[third]);
  out.insert(out.end(), leg.begin(), leg.end());
}

inline MetricTree subtree_from_edges(const MetricTree& t, std::vector<std::size_t> edges) {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  std::set<std::size_t> vs;
  for (auto e : edges) {
    vs.insert(t.edge(e).a);
    vs.insert(t.edge(e).b);
  }
  std::vector<std::string> vertices;
  for (auto v : vs) vertices.push_back(t.vertex_id(v));
  std::vector<EdgeSpec> specs;
  for (auto e : edges) {
    const auto& ed = t.edge(e);
    specs.push_back({ed.id, t.vertex_id(ed.a), t.vertex_id(ed.b), ed.length});
  }
  return MetricTree::build(std::move(vertices), std::move(specs));
}

inline std::size_t max_order(const MetricTree& t) {
  std::size_t k = 0;
  for (std::size_t v = 0; v < t.vertex_count(); ++v) k = std::max(k, t.degree(v));
  return k;
}

inline std::size_t branch_point_count(const MetricTree& t) {
  std::size_t c = 0;
  for (std::size_t v = 0; v < t.vertex_count(); ++v) c += t.degree(v) >= 3;
  return c;
}

}  // namespace detail

/// True iff the tree is an n-comb (an arc counts as a 2-comb): every branch
/// point has order 3 and all branch points lie on one arc.
inline bool is_comb(const MetricTree& t) {
  std::vector<std::size_t> branch;
  for (std::size_t v = 0; v < t.vertex_count(); ++v) {
    if (t.degree(v) > 3) return false;
    if (t.degree(v) == 3) branch.push_back(v);
  }
  if (branch.size() <= 2) return true;
  // Branch points lie on an arc iff, in the tree they span, none has three
  // directions leading to other branch points.
  for (auto b : branch) {
    std::size_t directions = 0;
    for (const auto& inc : t.incident(b))
      if (detail::branch_points_beyond(t, inc) > 0) ++directions;
    if (directions > 2) return false;
  }
  return true;
}

/// A (p+3)-comb in a tree whose branch points have order at most k (k >= 3)
/// and which has at least k^p branch points.  Returns the comb as a subtree
/// of the host with host ids.
inline MetricTree extract_comb(const MetricTree& t, int p) {
  if (p < 0) throw BoundsError("extract_comb: p must be nonnegative");
  const auto pc = classify(t);
  if (pc.endpoints.empty() || pc.branch_points.empty()) throw BoundsError("degenerate tree: no branch point");
  const auto anchor = t.vertex(*std::min_element(pc.endpoints.begin(), pc.endpoints.end()));
  std::vector<std::size_t> edges;
  detail::comb_from(t, anchor, t.incident(anchor).front(), p, edges);
  return detail::subtree_from_edges(t, std::move(edges));
}

struct ExtractionReport {
  std::string kind;  // "star" or "comb"
  MetricTree subtree;
  std::vector<std::string> endpoints;
  int k = 0;
  /// Endpoint count of the extracted star or comb.
  int size = 0;
  double certified_bound = 0;
};

/// k with sqrt(log n) - 1 <= k < sqrt(log n), at least 1.
inline int extraction_k(std::size_t n) {
  double s = std::sqrt(std::log(static_cast<double>(n)));
  int k = static_cast<int>(std::ceil(s)) - 1;
  return std::max(k, 1);
}

/// Finds a (k+1)-star, or failing that a (2k+2)-comb, and certifies
/// log 2 / (k+1) or log 2 / 2^r with 2^r <= 2k+2 respectively.
inline ExtractionReport extract_and_bound(const MetricTree& t) {
  const std::size_t n = endpoint_count(t);
  if (n < 2) throw BoundsError("degenerate tree: fewer than 2 endpoints");
  ExtractionReport out;
  const double log2 = std::log(2.0);

  if (n == 2) {
    out.kind = "star";
    out.subtree = t;
    out.k = 1;
    out.size = 2;
    out.certified_bound = log2 / 2;
    out.endpoints = classify(t).endpoints;
    return out;
  }

  const int k = extraction_k(n);
  out.k = k;
  std::optional<std::size_t> hub;
  for (std::size_t v = 0; v < t.vertex_count(); ++v)
    if (t.degree(v) >= static_cast<std::size_t>(k + 1) && (!hub || t.degree(v) > t.degree(*hub))) hub = v;

  std::vector<std::size_t> edges;
  if (hub) {
    auto inc = detail::sorted_incidences(t, *hub);
    for (int d = 0; d < k + 1; ++d) {
      auto leg = detail::run_to_leaf(t, inc[static_cast<std::size_t>(d)]);
      edges.insert(edges.end(), leg.begin(), leg.end());
    }
    out.kind = "star";
    out.size = k + 1;
    out.certified_bound = log2 / (k + 1);
  } else {
    out.subtree = extract_comb(t, 2 * k - 1);
    out.kind = "comb";
    out.size = 2 * k + 2;
    int two_r = 1;
    while (2 * two_r <= 2 * k + 2) two_r *= 2;
    out.certified_bound = log2 / two_r;
  }
  if (hub) out.subtree = detail::subtree_from_edges(t, std::move(edges));
  out.endpoints = classify(out.subtree).endpoints;
  if (static_cast<int>(out.endpoints.size()) != out.size)
    throw BoundsError("extraction failed: subtree has " + std::to_string(out.endpoints.size()) + " endpoints, expected " +
                      std::to_string(out.size));
  return out;
}

/// Branch-point count is at least n/k, k the largest branch order.
inline bool branch_count_check(const MetricTree& t) {
  const std::size_t n = endpoint_count(t);
  if (n < 3) throw BoundsError("fewer than 3 endpoints");
  return detail::branch_point_count(t) * detail::max_order(t) >= n;
}

}  // namespace treedyn
