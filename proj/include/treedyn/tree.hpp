#pragma once

// Finite metric trees with exact rational edge lengths.

#include "treedyn/core.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace treedyn {

struct EdgeSpec {
  std::string id;
  std::string from;
  std::string to;
  Rational length;
};

struct Edge {
  std::string id;
  std::size_t a = 0;  // "from" vertex
  std::size_t b = 0;  // "to" vertex
  Rational length;
};

struct Incidence {
  std::size_t edge;
  std::size_t neighbor;
};

/// Immutable, validated finite tree.  Vertices and edges keep the order in
/// which they were given; that order is the index order used everywhere else.
class MetricTree {
 public:
  MetricTree() = default;

  static MetricTree build(std::vector<std::string> vertices, std::vector<EdgeSpec> edges) {
    MetricTree t;
    if (vertices.empty()) throw TreeError("disconnected: tree has no vertices");
    for (auto& id : vertices) {
      if (id.empty()) throw TreeError("duplicate id: empty vertex id");
      if (!t.vindex_.emplace(id, t.vids_.size()).second)
        throw TreeError("duplicate id: vertex '" + id + "'");
      t.vids_.push_back(std::move(id));
    }
    t.adj_.assign(t.vids_.size(), {});

    std::vector<std::size_t> parent(t.vids_.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };

    for (auto& spec : edges) {
      if (spec.id.empty()) throw TreeError("duplicate id: empty edge id");
      if (t.eindex_.count(spec.id)) throw TreeError("duplicate id: edge '" + spec.id + "'");
      if (spec.length <= 0)
        throw TreeError("nonpositive length: edge '" + spec.id + "' has length " +
                        to_string(spec.length));
      auto a = t.find_vertex(spec.from);
      auto b = t.find_vertex(spec.to);
      if (!a || !b) throw TreeError("unknown vertex in edge '" + spec.id + "'");
      if (*a == *b) throw TreeError("cycle detected: self-loop at '" + spec.from + "'");
      auto ra = find(*a), rb = find(*b);
      if (ra == rb)
        throw TreeError("cycle detected: edge '" + spec.id + "' closes a cycle");
      parent[ra] = rb;
      std::size_t idx = t.edges_.size();
      t.eindex_.emplace(spec.id, idx);
      t.edges_.push_back(Edge{std::move(spec.id), *a, *b, std::move(spec.length)});
      t.adj_[*a].push_back({idx, *b});
      t.adj_[*b].push_back({idx, *a});
    }
    if (t.edges_.size() + 1 != t.vids_.size()) throw TreeError("disconnected");
    return t;
  }

  std::size_t vertex_count() const { return vids_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<std::string>& vertex_ids() const { return vids_; }
  const std::string& vertex_id(std::size_t v) const { return vids_.at(v); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(std::size_t e) const { return edges_.at(e); }
  const std::vector<Incidence>& incident(std::size_t v) const { return adj_.at(v); }
  std::size_t degree(std::size_t v) const { return adj_.at(v).size(); }

  std::optional<std::size_t> find_vertex(const std::string& id) const {
    auto it = vindex_.find(id);
    if (it == vindex_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<std::size_t> find_edge(const std::string& id) const {
    auto it = eindex_.find(id);
    if (it == eindex_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t vertex(const std::string& id) const {
    if (auto v = find_vertex(id)) return *v;
    throw TreeError("unknown vertex '" + id + "'");
  }
  std::size_t edge_index(const std::string& id) const {
    if (auto e = find_edge(id)) return *e;
    throw TreeError("unknown edge '" + id + "'");
  }

  std::size_t other_end(std::size_t e, std::size_t v) const {
    const Edge& ed = edges_.at(e);
    return ed.a == v ? ed.b : ed.a;
  }

  /// Edge joining u and v, if they are adjacent.
  std::optional<std::size_t> edge_between(std::size_t u, std::size_t v) const {
    for (const auto& inc : adj_.at(u))
      if (inc.neighbor == v) return inc.edge;
    return std::nullopt;
  }

  Rational total_length() const {
    Rational s = 0;
    for (const auto& e : edges_) s += e.length;
    return s;
  }

  /// Edges of the unique vertex path from u to v, in traversal order.
  std::vector<std::size_t> edge_path(std::size_t u, std::size_t v) const {
    std::vector<std::size_t> via(vids_.size(), npos);
    std::vector<char> seen(vids_.size(), 0);
    std::deque<std::size_t> queue{v};
    seen[v] = 1;
    while (!queue.empty() && !seen[u]) {
      auto x = queue.front();
      queue.pop_front();
      for (const auto& inc : adj_[x]) {
        if (seen[inc.neighbor]) continue;
        seen[inc.neighbor] = 1;
        via[inc.neighbor] = inc.edge;
        queue.push_back(inc.neighbor);
      }
    }
    std::vector<std::size_t> path;
    for (auto x = u; x != v; x = other_end(via[x], x)) path.push_back(via[x]);
    return path;
  }

  friend bool operator==(const MetricTree& l, const MetricTree& r) {
    if (l.vids_ != r.vids_ || l.edges_.size() != r.edges_.size()) return false;
    for (std::size_t i = 0; i < l.edges_.size(); ++i) {
      const auto &x = l.edges_[i], &y = r.edges_[i];
      if (x.id != y.id || x.a != y.a || x.b != y.b || x.length != y.length) return false;
    }
    return true;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<std::string> vids_;
  std::unordered_map<std::string, std::size_t> vindex_;
  std::vector<Edge> edges_;
  std::unordered_map<std::string, std::size_t> eindex_;
  std::vector<std::vector<Incidence>> adj_;
};

// ---------------------------------------------------------------------------
// Points

struct VertexPoint {
  std::string id;
};

/// Interior point of an edge; `offset` is measured from the edge's "from" end.
struct EdgePoint {
  std::string edge;
  Rational offset;
};

using TreePoint = std::variant<VertexPoint, EdgePoint>;

inline TreePoint at_vertex(std::string id) { return VertexPoint{std::move(id)}; }
inline TreePoint on_edge(std::string edge, Rational offset) {
  return EdgePoint{std::move(edge), std::move(offset)};
}

namespace detail {

struct Located {
  bool is_vertex;
  std::size_t index;  // vertex or edge
  Rational offset;
};

inline Located locate(const MetricTree& t, const TreePoint& p) {
  if (auto v = std::get_if<VertexPoint>(&p)) return {true, t.vertex(v->id), 0};
  const auto& ep = std::get<EdgePoint>(p);
  auto e = t.edge_index(ep.edge);
  if (ep.offset <= 0 || ep.offset >= t.edge(e).length)
    throw TreeError("offset " + to_string(ep.offset) + " not inside edge '" + ep.edge + "'");
  return {false, e, ep.offset};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Classification

struct PointClass {
  std::vector<std::string> endpoints;
  std::vector<std::string> branch_points;
  std::map<std::string, std::size_t> orders;
};

inline PointClass classify(const MetricTree& t) {
  PointClass pc;
  for (std::size_t v = 0; v < t.vertex_count(); ++v) {
    auto d = t.degree(v);
    pc.orders[t.vertex_id(v)] = d;
    if (d == 1) pc.endpoints.push_back(t.vertex_id(v));
    if (d >= 3) pc.branch_points.push_back(t.vertex_id(v));
  }
  return pc;
}

inline std::size_t endpoint_count(const MetricTree& t) {
  std::size_t n = 0;
  for (std::size_t v = 0; v < t.vertex_count(); ++v) n += t.degree(v) == 1;
  return n;
}

// ---------------------------------------------------------------------------
// Geodesics

/// One traversed piece of an edge, from offset `from` to offset `to`
/// (offsets measured from the edge's "from" end; to < from means the edge is
/// walked backwards).
struct PathPiece {
  std::size_t edge;
  Rational from;
  Rational to;
};

struct Geodesic {
  std::vector<PathPiece> pieces;

  Rational length() const {
    Rational s = 0;
    for (const auto& p : pieces) s += abs(p.to - p.from);
    return s;
  }
};

inline Geodesic geodesic(const MetricTree& t, const TreePoint& pa, const TreePoint& pb) {
  auto a = detail::locate(t, pa);
  auto b = detail::locate(t, pb);

  if (a.is_vertex == b.is_vertex && a.index == b.index && a.offset == b.offset)
    throw TreeError("coincident points");
  if (!a.is_vertex && !b.is_vertex && a.index == b.index) return {{{a.index, a.offset, b.offset}}};

  struct Port {
    std::size_t vertex;
    std::optional<PathPiece> piece;  // partial edge between the point and `vertex`
  };
  auto ports = [&](const detail::Located& x, bool leaving) {
    std::vector<Port> out;
    if (x.is_vertex) {
      out.push_back({x.index, std::nullopt});
      return out;
    }
    const Edge& e = t.edge(x.index);
    Rational zero = 0;
    if (leaving) {
      out.push_back({e.a, PathPiece{x.index, x.offset, zero}});
      out.push_back({e.b, PathPiece{x.index, x.offset, e.length}});
    } else {
      out.push_back({e.a, PathPiece{x.index, zero, x.offset}});
      out.push_back({e.b, PathPiece{x.index, e.length, x.offset}});
    }
    return out;
  };

  for (const auto& from : ports(a, true)) {
    for (const auto& to : ports(b, false)) {
      auto path = t.edge_path(from.vertex, to.vertex);
      auto uses = [&](const detail::Located& x) {
        return !x.is_vertex && std::find(path.begin(), path.end(), x.index) != path.end();
      };
      if (uses(a) || uses(b)) continue;
      Geodesic g;
      if (from.piece) g.pieces.push_back(*from.piece);
      std::size_t cur = from.vertex;
      for (auto e : path) {
        const Edge& ed = t.edge(e);
        if (ed.a == cur)
          g.pieces.push_back({e, Rational(0), ed.length});
        else
          g.pieces.push_back({e, ed.length, Rational(0)});
        cur = t.other_end(e, cur);
      }
      if (to.piece) g.pieces.push_back(*to.piece);
      return g;
    }
  }
  throw TreeError("internal: no geodesic found");
}

// ---------------------------------------------------------------------------
// Subdivision

struct Subdivision {
  MetricTree tree;
  /// Vertex id that each requested point became (same order as the input).
  std::vector<std::string> point_vertex;
  /// Old edge id -> ids of the pieces replacing it, in order from its "from" end.
  std::map<std::string, std::vector<std::string>> edge_pieces;
};

inline Subdivision subdivide_at(const MetricTree& t, const std::vector<TreePoint>& points) {
  std::map<std::size_t, std::set<Rational>> cuts;
  std::vector<detail::Located> located;
  for (const auto& p : points) {
    located.push_back(detail::locate(t, p));
    if (!located.back().is_vertex) cuts[located.back().index].insert(located.back().offset);
  }

  std::vector<std::string> vertices = t.vertex_ids();
  std::set<std::string> taken(vertices.begin(), vertices.end());
  for (const auto& e : t.edges()) taken.insert(e.id);
  auto fresh = [&](std::string base) {
    std::string id = base;
    for (int k = 2; taken.count(id); ++k) id = base + "#" + std::to_string(k);
    taken.insert(id);
    return id;
  };

  Subdivision out;
  std::map<std::pair<std::size_t, Rational>, std::string> cut_vertex;
  std::vector<EdgeSpec> edges;
  for (std::size_t ei = 0; ei < t.edge_count(); ++ei) {
    const Edge& e = t.edge(ei);
    auto it = cuts.find(ei);
    if (it == cuts.end()) {
      edges.push_back({e.id, t.vertex_id(e.a), t.vertex_id(e.b), e.length});
      out.edge_pieces[e.id] = {e.id};
      continue;
    }
    std::string prev = t.vertex_id(e.a);
    Rational prev_off = 0;
    std::size_t k = 0;
    auto& pieces = out.edge_pieces[e.id];
    for (const auto& off : it->second) {
      auto vid = fresh(e.id + "@" + to_string(off));
      vertices.push_back(vid);
      cut_vertex[{ei, off}] = vid;
      pieces.push_back(fresh(e.id + "." + std::to_string(k++)));
      edges.push_back({pieces.back(), prev, vid, off - prev_off});
      prev = vid;
      prev_off = off;
    }
    pieces.push_back(fresh(e.id + "." + std::to_string(k)));
    edges.push_back({pieces.back(), prev, t.vertex_id(e.b), e.length - prev_off});
  }
  out.tree = MetricTree::build(std::move(vertices), std::move(edges));
  for (const auto& loc : located)
    out.point_vertex.push_back(loc.is_vertex ? t.vertex_id(loc.index)
                                             : cut_vertex.at({loc.index, loc.offset}));
  return out;
}

// ---------------------------------------------------------------------------
// Standard shapes

/// n-star: hub "b", leaves "s1".."sn", legs "e1".."en".  For n = 2 the result
/// is an arc whose middle vertex "b" has order 2.
inline MetricTree make_star(int n, const Rational& leg_length = 1) {
  if (n < 2) throw TreeError("star needs n >= 2");
  std::vector<std::string> v{"b"};
  std::vector<EdgeSpec> e;
  for (int i = 1; i <= n; ++i) {
    v.push_back("s" + std::to_string(i));
    e.push_back({"e" + std::to_string(i), "b", v.back(), leg_length});
  }
  return MetricTree::build(std::move(v), std::move(e));
}

/// n-comb: spine vertices "b1".."b{n-2}", teeth tips "t1".."t{n-2}", spine
/// ends "l" and "r".  For n = 2 the result is the arc [l, r].
inline MetricTree make_comb(int n, const Rational& spacing = 1, const Rational& tooth = 1) {
  if (n < 2) throw TreeError("comb needs n >= 2");
  if (n == 2) return MetricTree::build({"l", "r"}, {{"s0", "l", "r", spacing}});
  std::vector<std::string> v{"l"};
  std::vector<EdgeSpec> e;
  for (int i = 1; i <= n - 2; ++i) v.push_back("b" + std::to_string(i));
  std::string prev = "l";
  for (int i = 1; i <= n - 2; ++i) {
    auto b = "b" + std::to_string(i);
    e.push_back({"s" + std::to_string(i - 1), prev, b, spacing});
    prev = b;
  }
  v.push_back("r");
  e.push_back({"s" + std::to_string(n - 2), prev, "r", spacing});
  for (int i = 1; i <= n - 2; ++i) {
    auto tip = "t" + std::to_string(i);
    v.push_back(tip);
    e.push_back({"h" + std::to_string(i), "b" + std::to_string(i), tip, tooth});
  }
  return MetricTree::build(std::move(v), std::move(e));
}

namespace detail {

struct TreeDraft {
  std::vector<std::string> vertices;
  std::vector<EdgeSpec> edges;

  std::size_t degree(const std::string& v) const {
    std::size_t d = 0;
    for (const auto& e : edges) d += (e.from == v) + (e.to == v);
    return d;
  }
  std::vector<std::string> endpoints() const {
    std::vector<std::string> out;
    for (const auto& v : vertices)
      if (degree(v) == 1) out.push_back(v);
    return out;
  }
  /// Splits the first terminal edge at its midpoint and returns the new vertex.
  std::string split_terminal_edge(const std::string& name) {
    for (std::size_t i = 0; i < edges.size(); ++i) {
      auto& e = edges[i];
      if (degree(e.from) != 1 && degree(e.to) != 1) continue;
      Rational half = e.length / 2;
      vertices.push_back(name);
      EdgeSpec second{e.id + "'", name, e.to, half};
      e.to = name;
      e.length = half;
      edges.insert(edges.begin() + static_cast<std::ptrdiff_t>(i) + 1, second);
      return name;
    }
    throw TreeError("tree has no terminal edge");
  }
  TreeDraft prefixed(const std::string& pre) const {
    TreeDraft d;
    for (const auto& v : vertices) d.vertices.push_back(pre + v);
    for (const auto& e : edges) d.edges.push_back({pre + e.id, pre + e.from, pre + e.to, e.length});
    return d;
  }
};

}  // namespace detail

/// Tree of Ye's class with the given star signature and `attached` extra free
/// arcs.  Level 1 is an n_1-star; level l glues n_l copies of level l-1 onto
/// the ends of an n_l-star at terminal-edge midpoints of the copies.
inline MetricTree make_ye_tree(const std::vector<int>& signature, int attached) {
  if (signature.empty() || attached < 0)
    throw TreeError("invalid signature: need at least one star and attached >= 0");
  for (int n : signature)
    if (n < 2) throw TreeError("invalid signature: every entry must be >= 2");

  detail::TreeDraft draft;
  {
    auto star = make_star(signature[0]);
    draft.vertices = star.vertex_ids();
    for (const auto& e : star.edges())
      draft.edges.push_back({e.id, star.vertex_id(e.a), star.vertex_id(e.b), e.length});
  }
  for (std::size_t level = 1; level < signature.size(); ++level) {
    const int n = signature[level];
    const std::string tag = "L" + std::to_string(level + 1);
    detail::TreeDraft next;
    next.vertices.push_back(tag + "b");
    for (int j = 1; j <= n; ++j) {
      auto copy = draft.prefixed(tag + "c" + std::to_string(j) + ".");
      auto glue = copy.split_terminal_edge(tag + "c" + std::to_string(j) + ".m");
      next.vertices.insert(next.vertices.end(), copy.vertices.begin(), copy.vertices.end());
      next.edges.insert(next.edges.end(), copy.edges.begin(), copy.edges.end());
      next.edges.push_back({tag + "e" + std::to_string(j), tag + "b", glue, Rational(1)});
    }
    draft = std::move(next);
  }
  for (int k = 1; k <= attached; ++k) {
    auto base = draft.split_terminal_edge("x" + std::to_string(k));
    auto tip = "y" + std::to_string(k);
    draft.vertices.push_back(tip);
    draft.edges.push_back({"f" + std::to_string(k), base, tip, Rational(1)});
  }
  return MetricTree::build(std::move(draft.vertices), std::move(draft.edges));
}

}  // namespace treedyn
