#pragma once

// Pointwise realization of P-linear maps in exact rational arithmetic:
// evaluation, orbits, periodic points along transition cycles, segment-set
// iteration, and refinement of the invariant set.

#include "treedyn/core.hpp"
#include "treedyn/markov.hpp"

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace treedyn {

/// Point of a basic arc at normalized position t in [0, 1] from the arc's
/// "from" end.  Canonical form puts a vertex on its lowest-index arc.
struct ArcPoint {
  std::size_t arc = 0;
  Rational t;

  friend bool operator==(const ArcPoint& l, const ArcPoint& r) { return l.arc == r.arc && l.t == r.t; }
  friend bool operator<(const ArcPoint& l, const ArcPoint& r) {
    return l.arc != r.arc ? l.arc < r.arc : l.t < r.t;
  }
};

inline ArcPoint vertex_point(const MarkovMap& f, std::size_t v) {
  const auto& t = f.tree();
  std::size_t best = MetricTree::npos;
  for (const auto& inc : t.incident(v)) best = std::min(best, inc.edge);
  if (best == MetricTree::npos) throw DynamicsError("vertex has no arc");
  return {best, t.edge(best).a == v ? Rational(0) : Rational(1)};
}

/// Vertex at the point, if it is an arc end.
inline std::optional<std::size_t> as_vertex(const MarkovMap& f, const ArcPoint& x) {
  if (x.t == 0) return f.tree().edge(x.arc).a;
  if (x.t == 1) return f.tree().edge(x.arc).b;
  return std::nullopt;
}

inline ArcPoint canonical(const MarkovMap& f, const ArcPoint& x) {
  if (x.arc >= f.arc_count() || x.t < 0 || x.t > 1) throw DynamicsError("point outside the tree");
  if (auto v = as_vertex(f, x)) return vertex_point(f, *v);
  return x;
}

inline ArcPoint to_arc_point(const MarkovMap& f, const TreePoint& p) {
  if (auto v = std::get_if<VertexPoint>(&p)) return vertex_point(f, f.tree().vertex(v->id));
  const auto& ep = std::get<EdgePoint>(p);
  auto e = f.tree().edge_index(ep.edge);
  const Rational& len = f.tree().edge(e).length;
  if (ep.offset <= 0 || ep.offset >= len) throw DynamicsError("offset not inside edge '" + ep.edge + "'");
  return {e, ep.offset / len};
}

inline TreePoint to_tree_point(const MarkovMap& f, const ArcPoint& x) {
  auto c = canonical(f, x);
  if (auto v = as_vertex(f, c)) return at_vertex(f.tree().vertex_id(*v));
  const auto& e = f.tree().edge(c.arc);
  return on_edge(e.id, c.t * e.length);
}

namespace detail {

/// Point at distance d along f(A) (0 <= d <= length of f(A)).
inline ArcPoint along_image(const MarkovMap& f, std::size_t arc, Rational d) {
  const auto& path = f.transition().images[arc];
  for (const auto& piece : path) {
    const Rational& len = f.tree().edge(piece.arc).length;
    if (d <= len) {
      Rational local = d / len;
      return canonical(f, {piece.arc, piece.forward ? local : Rational(1 - local)});
    }
    d -= len;
  }
  throw DynamicsError("internal: distance beyond the image of the arc");
}

inline Rational image_length(const MarkovMap& f, std::size_t arc) {
  return f.transition().slopes[arc] * f.tree().edge(arc).length;
}

}  // namespace detail

inline ArcPoint eval_point(const MarkovMap& f, const ArcPoint& x) {
  auto c = canonical(f, x);
  if (auto v = as_vertex(f, c)) return vertex_point(f, f.image(*v));
  return detail::along_image(f, c.arc, c.t * detail::image_length(f, c.arc));
}

inline std::vector<ArcPoint> orbit(const MarkovMap& f, const ArcPoint& x, std::size_t steps) {
  std::vector<ArcPoint> out{canonical(f, x)};
  for (std::size_t i = 0; i < steps; ++i) out.push_back(eval_point(f, out.back()));
  return out;
}

// ---------------------------------------------------------------------------
// Periodic points

struct PeriodicPoint {
  ArcPoint point;
  std::size_t period;               // minimal period
  std::vector<std::size_t> cycle;   // transition cycle used, starting at the arc
};

/// Fixed point of the return map along the transition cycle
/// cycle[0] -> cycle[1] -> ... -> cycle[k-1] -> cycle[0].
inline PeriodicPoint periodic_point_on_cycle(const MarkovMap& f, const std::vector<std::size_t>& cycle) {
  if (cycle.empty()) throw DynamicsError("empty cycle");
  const auto& td = f.transition();
  // Affine chart t0 -> alpha * t0 + beta from the current domain [lo, hi] of
  // cycle[0] onto [0, 1] of the current arc.
  Rational lo = 0, hi = 1, alpha = 1, beta = 0;
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    const auto from = cycle[i];
    const auto to = cycle[(i + 1) % cycle.size()];
    if (from >= f.arc_count() || to >= f.arc_count()) throw DynamicsError("arc index out of range");
    const Rational total = detail::image_length(f, from);
    Rational start = 0;
    std::optional<OrientedArc> hit;
    for (const auto& piece : td.images[from]) {
      if (piece.arc == to) {
        hit = piece;
        break;
      }
      start += f.tree().edge(piece.arc).length;
    }
    if (!hit) throw DynamicsError("not a transition cycle: arc " + std::to_string(from) + " does not cover " +
                                  std::to_string(to));
    const Rational len = f.tree().edge(to).length;
    // u in [start/total, (start+len)/total] maps to w = (u*total - start)/len
    // (or 1 - that when the piece is walked backwards).
    Rational a = total / len, b = -start / len;
    if (!hit->forward) {
      a = -a;
      b = 1 - b;
    }
    Rational u_lo = start / total, u_hi = (start + len) / total;
    // Restrict the domain: current chart value must lie in [u_lo, u_hi].
    Rational t1 = (u_lo - beta) / alpha, t2 = (u_hi - beta) / alpha;
    if (t1 > t2) std::swap(t1, t2);
    lo = std::max(lo, t1);
    hi = std::min(hi, t2);
    alpha = a * alpha;
    beta = a * beta + b;
  }
  if (abs(alpha) == 1) throw DynamicsError("neutral cycle slope 1");
  Rational fixed = beta / (1 - alpha);
  if (fixed < lo || fixed > hi) throw DynamicsError("internal: fixed point outside its domain");

  PeriodicPoint out;
  out.point = canonical(f, {cycle[0], fixed});
  out.cycle = cycle;
  auto orb = orbit(f, out.point, cycle.size());
  if (!(orb.back() == out.point)) throw DynamicsError("internal: periodic point failed orbit check");
  out.period = cycle.size();
  for (std::size_t p = 1; p < cycle.size(); ++p)
    if (cycle.size() % p == 0 && orb[p] == out.point) {
      out.period = p;
      break;
    }
  return out;
}

/// Periodic point in `arc` from a shortest transition cycle through it.
inline PeriodicPoint periodic_point_in_arc(const MarkovMap& f, std::size_t arc, std::size_t max_period) {
  const auto& adj = f.transition().adjacency;
  if (arc >= adj.size()) throw DynamicsError("arc index out of range");
  std::vector<std::size_t> parent(adj.size(), MetricTree::npos);
  std::vector<std::size_t> depth(adj.size(), 0);
  std::deque<std::size_t> queue;
  std::optional<std::size_t> closing;
  for (auto v : adj[arc]) {
    if (v == arc) {
      closing = arc;
      break;
    }
    if (parent[v] == MetricTree::npos) {
      parent[v] = arc;
      depth[v] = 1;
      queue.push_back(v);
    }
  }
  while (!closing && !queue.empty()) {
    auto u = queue.front();
    queue.pop_front();
    for (auto v : adj[u]) {
      if (v == arc) {
        closing = u;
        break;
      }
      if (parent[v] == MetricTree::npos && v != arc) {
        parent[v] = u;
        depth[v] = depth[u] + 1;
        queue.push_back(v);
      }
    }
  }
  if (!closing) throw DynamicsError("no cycle through arc " + std::to_string(arc));
  std::vector<std::size_t> rev;
  for (auto u = *closing; u != arc; u = parent[u]) rev.push_back(u);
  std::vector<std::size_t> cycle{arc};
  cycle.insert(cycle.end(), rev.rbegin(), rev.rend());
  if (cycle.size() > max_period) throw DynamicsError("no cycle through arc within max_period");
  return periodic_point_on_cycle(f, cycle);
}

// ---------------------------------------------------------------------------
// Segment sets

/// Finite union of closed subintervals of [0, 1] on each basic arc.
class SegmentSet {
 public:
  using Interval = std::pair<Rational, Rational>;

  explicit SegmentSet(std::size_t arcs = 0) : parts_(arcs) {}

  static SegmentSet single(std::size_t arcs, std::size_t arc, Rational from, Rational to) {
    SegmentSet s(arcs);
    s.add(arc, std::move(from), std::move(to));
    s.normalize();
    return s;
  }

  void add(std::size_t arc, Rational from, Rational to) {
    if (arc >= parts_.size()) throw DynamicsError("arc index out of range");
    if (from > to) std::swap(from, to);
    if (from < 0 || to > 1) throw DynamicsError("segment outside [0, 1]");
    parts_[arc].push_back({std::move(from), std::move(to)});
  }

  /// Sorts, merges overlapping or touching intervals, drops points.
  void normalize() {
    for (auto& list : parts_) {
      std::sort(list.begin(), list.end());
      std::vector<Interval> merged;
      for (auto& iv : list) {
        if (iv.first == iv.second) continue;
        if (!merged.empty() && iv.first <= merged.back().second)
          merged.back().second = std::max(merged.back().second, iv.second);
        else
          merged.push_back(std::move(iv));
      }
      list = std::move(merged);
    }
  }

  std::size_t arc_count() const { return parts_.size(); }
  const std::vector<Interval>& on(std::size_t arc) const { return parts_.at(arc); }
  bool full(std::size_t arc) const {
    const auto& l = parts_.at(arc);
    return l.size() == 1 && l[0].first == 0 && l[0].second == 1;
  }
  std::size_t full_count() const {
    std::size_t n = 0;
    for (std::size_t a = 0; a < parts_.size(); ++a) n += full(a);
    return n;
  }
  bool empty() const {
    for (const auto& l : parts_)
      if (!l.empty()) return false;
    return true;
  }
  /// Total length in the map's metric.
  Rational measure(const MarkovMap& f) const {
    Rational m = 0;
    for (std::size_t a = 0; a < parts_.size(); ++a)
      for (const auto& [x, y] : parts_[a]) m += (y - x) * f.tree().edge(a).length;
    return m;
  }

 private:
  std::vector<std::vector<Interval>> parts_;
};

inline SegmentSet image(const MarkovMap& f, const SegmentSet& s) {
  SegmentSet out(f.arc_count());
  const auto& td = f.transition();
  for (std::size_t a = 0; a < f.arc_count(); ++a) {
    if (s.on(a).empty()) continue;
    const Rational total = detail::image_length(f, a);
    for (const auto& [u, v] : s.on(a)) {
      const Rational d0 = u * total, d1 = v * total;
      Rational start = 0;
      for (const auto& piece : td.images[a]) {
        const Rational& len = f.tree().edge(piece.arc).length;
        const Rational end = start + len;
        Rational x = std::max(d0, start), y = std::min(d1, end);
        if (x < y) {
          Rational lx = (x - start) / len, ly = (y - start) / len;
          if (piece.forward)
            out.add(piece.arc, lx, ly);
          else
            out.add(piece.arc, 1 - ly, 1 - lx);
        }
        start = end;
        if (start >= d1) break;
      }
    }
  }
  out.normalize();
  return out;
}

struct WitnessStep {
  std::size_t step;
  std::size_t arcs_full;
  double total_measure;
};

struct WitnessResult {
  std::optional<std::size_t> covered_in;
  std::vector<WitnessStep> trace;
};

/// Iterates the seed until every basic arc is covered or `cap` steps pass.
inline WitnessResult exactness_witness(const MarkovMap& f, SegmentSet seed, std::size_t cap) {
  if (seed.arc_count() != f.arc_count()) throw DynamicsError("seed does not match the map");
  seed.normalize();
  if (seed.empty()) throw DynamicsError("empty seed");
  if (cap < 1) throw DynamicsError("cap must be >= 1");
  WitnessResult r;
  SegmentSet cur = std::move(seed);
  for (std::size_t step = 0;; ++step) {
    r.trace.push_back({step, cur.full_count(), to_double(cur.measure(f))});
    if (cur.full_count() == f.arc_count()) {
      r.covered_in = step;
      return r;
    }
    if (step == cap) return r;
    cur = image(f, cur);
  }
}

// ---------------------------------------------------------------------------
// Refinement

/// Adds the forward orbits of `extra` to the invariant set.  The pointwise
/// action is unchanged; only the basic arcs get finer.
inline MarkovMap refine_invariant_set(const MarkovMap& f, const std::vector<ArcPoint>& extra,
                                      std::size_t cap = 10000) {
  std::set<ArcPoint> interior;
  for (const auto& x0 : extra) {
    std::set<ArcPoint> seen;
    auto x = canonical(f, x0);
    std::size_t steps = 0;
    while (!as_vertex(f, x) && seen.insert(x).second) {
      if (++steps > cap) throw DynamicsError("orbit not finite within cap");
      x = eval_point(f, x);
    }
    interior.insert(seen.begin(), seen.end());
  }
  if (interior.empty()) return f;

  std::vector<TreePoint> cuts;
  for (const auto& x : interior) cuts.push_back(to_tree_point(f, x));
  auto sub = subdivide_at(f.tree(), cuts);

  std::map<ArcPoint, std::string> name;
  std::size_t k = 0;
  for (const auto& x : interior) name[x] = sub.point_vertex[k++];
  auto id_of = [&](const ArcPoint& p) {
    if (auto v = as_vertex(f, p)) return f.tree().vertex_id(*v);
    return name.at(p);
  };

  std::map<std::string, std::string> img;
  for (std::size_t v = 0; v < f.tree().vertex_count(); ++v)
    img[f.tree().vertex_id(v)] = f.tree().vertex_id(f.image(v));
  for (const auto& x : interior) img[name.at(x)] = id_of(eval_point(f, x));
  return MarkovMap::create(sub.tree, img);
}

}  // namespace treedyn
