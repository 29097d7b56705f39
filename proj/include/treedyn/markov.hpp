#pragma once

// P-linear Markov self-maps of trees.
//
// A map is stored combinatorially: the tree's vertex set is the invariant
// set P and every vertex carries its image vertex.  Each basic arc (edge)
// [p, q] is mapped onto the geodesic [f(p), f(q)] proportionally to length.

#include "treedyn/core.hpp"
#include "treedyn/spectral.hpp"
#include "treedyn/tree.hpp"

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace treedyn {

/// Arc `arc` traversed from its "from" end (forward) or from its "to" end.
struct OrientedArc {
  std::size_t arc;
  bool forward;
};

struct TransitionData {
  SquareMatrix matrix;
  Digraph adjacency;
  /// length(f(A)) / length(A)
  std::vector<Rational> slopes;
  /// The geodesic f(A), walked from f(from(A)) to f(to(A)).
  std::vector<std::vector<OrientedArc>> images;
};

class MarkovMap {
 public:
  MarkovMap() = default;

  /// Validates `image` (indexed by vertex) and derives the transition data.
  static MarkovMap create(MetricTree tree, std::vector<std::size_t> image) {
    if (image.size() != tree.vertex_count()) throw MapError("image not in P: image size mismatch");
    for (auto v : image)
      if (v >= tree.vertex_count()) throw MapError("image not in P: vertex index out of range");
    for (const auto& e : tree.edges())
      if (image[e.a] == image[e.b])
        throw MapError("degenerate arc image: edge '" + e.id + "' = [" + tree.vertex_id(e.a) + ", " +
                       tree.vertex_id(e.b) + "] maps to the single point " +
                       tree.vertex_id(image[e.a]));
    MarkovMap m;
    m.tree_ = std::move(tree);
    m.image_ = std::move(image);
    m.transition_ = std::make_shared<const TransitionData>(m.derive_transition());
    return m;
  }

  static MarkovMap create(MetricTree tree, const std::map<std::string, std::string>& image) {
    std::vector<std::size_t> img(tree.vertex_count(), MetricTree::npos);
    for (const auto& [from, to] : image) {
      auto f = tree.find_vertex(from);
      auto t = tree.find_vertex(to);
      if (!f) throw MapError("image not in P: unknown point '" + from + "'");
      if (!t) throw MapError("image not in P: '" + to + "'");
      img[*f] = *t;
    }
    for (std::size_t v = 0; v < img.size(); ++v)
      if (img[v] == MetricTree::npos) throw MapError("image not in P: no image for '" + tree.vertex_id(v) + "'");
    return create(std::move(tree), std::move(img));
  }

  const MetricTree& tree() const { return tree_; }
  const std::vector<std::size_t>& images() const { return image_; }
  std::size_t image(std::size_t v) const { return image_.at(v); }
  std::size_t arc_count() const { return tree_.edge_count(); }
  const TransitionData& transition() const { return *transition_; }

  /// Same combinatorics on new arc lengths.
  MarkovMap with_lengths(const std::vector<Rational>& lengths) const {
    if (lengths.size() != arc_count()) throw MapError("length vector does not match arc count");
    std::vector<EdgeSpec> edges;
    for (std::size_t i = 0; i < arc_count(); ++i) {
      const auto& e = tree_.edge(i);
      edges.push_back({e.id, tree_.vertex_id(e.a), tree_.vertex_id(e.b), lengths[i]});
    }
    return create(MetricTree::build(tree_.vertex_ids(), std::move(edges)), image_);
  }

  friend bool operator==(const MarkovMap& l, const MarkovMap& r) {
    return l.tree_ == r.tree_ && l.image_ == r.image_;
  }

 private:
  TransitionData derive_transition() const {
    const std::size_t n = arc_count();
    TransitionData td;
    td.matrix = SquareMatrix(n);
    td.adjacency.assign(n, {});
    td.slopes.resize(n);
    td.images.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& e = tree_.edge(i);
      std::size_t cur = image_[e.a];
      Rational covered = 0;
      for (auto arc : tree_.edge_path(cur, image_[e.b])) {
        const auto& target = tree_.edge(arc);
        td.images[i].push_back({arc, target.a == cur});
        td.matrix.at(i, arc) = 1;
        covered += target.length;
        cur = tree_.other_end(arc, cur);
      }
      td.slopes[i] = covered / e.length;
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (td.matrix(i, j)) td.adjacency[i].push_back(j);
    return td;
  }

  MetricTree tree_;
  std::vector<std::size_t> image_;
  std::shared_ptr<const TransitionData> transition_;
};

inline const TransitionData& transition(const MarkovMap& f) { return f.transition(); }

// ---------------------------------------------------------------------------
// Construction from marked points

struct Mark {
  std::string id;
  TreePoint at;
};

/// Builds the map whose invariant set is `marks`.  Interior marks become
/// vertices; unmarked vertices of order 2 are absorbed into the basic arcs.
/// The normalized tree names its vertices after the marks and its edges
/// "<from>-<to>".
inline MarkovMap from_point_images(const MetricTree& tree, const std::vector<Mark>& marks,
                                   const std::map<std::string, std::string>& image) {
  std::set<std::string> ids;
  std::vector<TreePoint> points;
  for (const auto& mk : marks) {
    if (!ids.insert(mk.id).second) throw MapError("duplicate mark id '" + mk.id + "'");
    points.push_back(mk.at);
  }
  auto sub = subdivide_at(tree, points);
  const MetricTree& fine = sub.tree;

  std::vector<long> mark_of(fine.vertex_count(), -1);
  for (std::size_t i = 0; i < marks.size(); ++i) {
    auto v = fine.vertex(sub.point_vertex[i]);
    if (mark_of[v] >= 0)
      throw MapError("marks '" + marks[static_cast<std::size_t>(mark_of[v])].id + "' and '" + marks[i].id +
                     "' denote the same point");
    mark_of[v] = static_cast<long>(i);
  }
  for (std::size_t v = 0; v < fine.vertex_count(); ++v) {
    if (mark_of[v] >= 0) continue;
    if (fine.degree(v) >= 3) throw MapError("marks miss a branch point: '" + fine.vertex_id(v) + "'");
    if (fine.degree(v) <= 1) throw MapError("marks miss an endpoint: '" + fine.vertex_id(v) + "'");
  }

  std::vector<std::string> vertices;
  for (const auto& mk : marks) vertices.push_back(mk.id);
  std::vector<EdgeSpec> edges;
  std::set<std::string> edge_ids;
  for (std::size_t i = 0; i < marks.size(); ++i) {
    auto start = fine.vertex(sub.point_vertex[i]);
    for (const auto& inc : fine.incident(start)) {
      // Follow unmarked order-2 vertices to the next mark.
      std::size_t cur = inc.neighbor, via = inc.edge;
      Rational length = fine.edge(via).length;
      while (mark_of[cur] < 0) {
        for (const auto& nx : fine.incident(cur))
          if (nx.edge != via) {
            via = nx.edge;
            cur = nx.neighbor;
            break;
          }
        length += fine.edge(via).length;
      }
      auto j = static_cast<std::size_t>(mark_of[cur]);
      if (j < i) continue;
      std::string id = marks[i].id + "-" + marks[j].id;
      for (int k = 2; edge_ids.count(id); ++k) id = marks[i].id + "-" + marks[j].id + "#" + std::to_string(k);
      edge_ids.insert(id);
      edges.push_back({id, marks[i].id, marks[j].id, length});
    }
  }
  auto normalized = MetricTree::build(std::move(vertices), std::move(edges));

  for (const auto& mk : marks)
    if (!image.count(mk.id)) throw MapError("image not in P: no image for mark '" + mk.id + "'");
  for (const auto& [from, to] : image) {
    if (!ids.count(from)) throw MapError("image not in P: '" + from + "' is not a mark");
    if (!ids.count(to)) throw MapError("image not in P: '" + to + "'");
  }
  return MarkovMap::create(std::move(normalized), image);
}

// ---------------------------------------------------------------------------
// Entropy and dynamical type

enum class EntropyMethod { rome, power, both };

/// log+ of the Perron root of the transition matrix.  With `both`, the rome
/// and power-iteration roots must agree within `tol`; the rome value is
/// returned.
inline double entropy(const MarkovMap& f, EntropyMethod method = EntropyMethod::power, double tol = 1e-10) {
  const auto& m = f.transition().matrix;
  switch (method) {
    case EntropyMethod::power:
      return log_plus(perron(m));
    case EntropyMethod::rome:
      return log_plus(rome_root(m).lambda);
    case EntropyMethod::both: {
      double by_power = perron(m);
      double by_rome = rome_root(m).lambda;
      if (std::abs(by_power - by_rome) > tol)
        throw MapError("methods disagree beyond tol: rome " + std::to_string(by_rome) + " vs power " +
                       std::to_string(by_power));
      return log_plus(by_rome);
    }
  }
  return 0;
}

struct DynamicalProperties {
  bool transitive = false;
  bool exact = false;
};

inline DynamicalProperties dynamical_properties(const MarkovMap& f) {
  auto p = matrix_profile(f.transition().matrix);
  DynamicalProperties d;
  d.transitive = p.irreducible && !p.permutation;
  // A single arc mapped onto itself is primitive as a matrix but is a
  // homeomorphism, so exactness also requires transitivity.
  d.exact = p.primitive && d.transitive;
  return d;
}

// ---------------------------------------------------------------------------
// (P,S)-linearity

struct PSFailure {
  char condition;  // 'a', 'b', 'c', or '-' for malformed input
  std::string witness;
};

struct PSReport {
  bool ok = true;
  std::vector<PSFailure> failures;
};

/// Checks (a) f(s_i) = s_{i+1}, (b) [s_0, s_n] is a basic arc ending at an
/// endpoint s_n, (c) every other basic arc has a transition path to it.
inline PSReport check_ps_linear(const MarkovMap& f, const std::vector<std::string>& chain) {
  PSReport r;
  auto fail = [&](char c, std::string w) {
    r.ok = false;
    r.failures.push_back({c, std::move(w)});
  };
  const auto& t = f.tree();
  std::vector<std::size_t> s;
  for (const auto& id : chain) {
    auto v = t.find_vertex(id);
    if (!v) {
      fail('-', "'" + id + "' is not a point of P");
      return r;
    }
    s.push_back(*v);
  }
  if (s.size() < 2) {
    fail('-', "S needs at least two points");
    return r;
  }
  if (std::set<std::size_t>(s.begin(), s.end()).size() != s.size()) {
    fail('-', "S has repeated points");
    return r;
  }
  const std::size_t n = s.size() - 1;

  for (std::size_t i = 0; i < n; ++i)
    if (f.image(s[i]) != s[i + 1])
      fail('a', "f(" + chain[i] + ") = " + t.vertex_id(f.image(s[i])) + ", expected " + chain[i + 1]);

  auto arc = t.edge_between(s[0], s[n]);
  if (!arc) fail('b', "[" + chain[0] + ", " + chain[n] + "] is not a basic arc");
  if (t.degree(s[n]) != 1) fail('b', chain[n] + " is not an endpoint");

  if (arc) {
    // Reverse reachability from A_S.
    const auto& adj = f.transition().adjacency;
    Digraph rev(adj.size());
    for (std::size_t u = 0; u < adj.size(); ++u)
      for (auto v : adj[u]) rev[v].push_back(u);
    std::vector<char> seen(adj.size(), 0);
    std::vector<std::size_t> stack{*arc};
    seen[*arc] = 1;
    while (!stack.empty()) {
      auto u = stack.back();
      stack.pop_back();
      for (auto v : rev[u])
        if (!seen[v]) {
          seen[v] = 1;
          stack.push_back(v);
        }
    }
    for (std::size_t a = 0; a < adj.size(); ++a)
      if (!seen[a] && a != *arc) fail('c', "no path from arc '" + t.edge(a).id + "' to A_S");
  }
  return r;
}

// ---------------------------------------------------------------------------
// Constant slope

struct ConstantSlope {
  MarkovMap map;
  double lambda;
};

/// Re-metrizes a transitive map so every arc has slope lambda: arc lengths
/// become the right Perron eigenvector, normalized to total length 1.
inline ConstantSlope rescale_constant_slope(const MarkovMap& f, double tol = 1e-10) {
  const auto& m = f.transition().matrix;
  auto p = matrix_profile(m);
  if (!p.irreducible || p.permutation) throw MapError("not transitive");
  auto pv = perron_vector(m, PerronOptions{std::min(tol, 1e-12)});
  std::vector<Rational> lengths;
  for (double a : pv.vector) lengths.push_back(from_double(a));
  return {f.with_lengths(lengths), pv.value};
}

}  // namespace treedyn
