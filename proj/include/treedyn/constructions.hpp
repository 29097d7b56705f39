#pragma once

// Explicit maps: zero-entropy (P,S)-linear maps on stars and combs, and the
// exact extension g_N over a (P,S)-linear base.

#include "treedyn/core.hpp"
#include "treedyn/markov.hpp"
#include "treedyn/tree.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace treedyn {

struct ConstructedMap {
  MarkovMap map;
  /// The tuple S = (s_0, ..., s_n) as vertex ids.
  std::vector<std::string> S;
};

// ---------------------------------------------------------------------------
// Stars

enum class StarVariant { fixed_hub, literal };

/// n-star with P = {b; s1'..sn'; s1..sn}, s_i' at the leg midpoints.  Arcs are
/// I_i = [b, s_i'] followed by O_i = [s_i', s_i].
inline ConstructedMap star_map(int n, StarVariant variant = StarVariant::fixed_hub) {
  if (n < 2) throw ConstructionError("star_map: n must be at least 2");
  auto s = [](int i) { return "s" + std::to_string(i); };
  auto sp = [](int i) { return "s" + std::to_string(i) + "'"; };
  std::vector<std::string> vertices{"b"};
  for (int i = 1; i <= n; ++i) vertices.push_back(sp(i));
  for (int i = 1; i <= n; ++i) vertices.push_back(s(i));
  std::vector<EdgeSpec> edges;
  for (int i = 1; i <= n; ++i) edges.push_back({"I" + std::to_string(i), "b", sp(i), Rational(1, 2)});
  for (int i = 1; i <= n; ++i) edges.push_back({"O" + std::to_string(i), sp(i), s(i), Rational(1, 2)});

  std::map<std::string, std::string> image;
  image["b"] = variant == StarVariant::fixed_hub ? "b" : sp(1);
  for (int i = 1; i < n; ++i) {
    image[sp(i)] = sp(i + 1);
    image[s(i)] = s(i + 1);
  }
  image[sp(n)] = s(1);
  image[s(n)] = sp(1);

  ConstructedMap out{MarkovMap::create(MetricTree::build(vertices, edges), image), {sp(n)}};
  for (int i = 1; i <= n; ++i) out.S.push_back(s(i));
  return out;
}

// ---------------------------------------------------------------------------
// Combs

namespace detail {

inline std::string word(std::size_t bits, int len) {
  std::string w;
  for (int i = 0; i < len; ++i) w += ((bits >> i) & 1u) ? '1' : '0';
  return w;
}

/// Successor with the carry running from the first letter rightwards.
inline std::string word_succ(std::string w) {
  for (auto& c : w) {
    if (c == '0') {
      c = '1';
      return w;
    }
    c = '0';
  }
  return w;
}

inline std::vector<std::string> words(int len) {
  std::vector<std::string> out;
  for (std::size_t b = 0; b < (std::size_t{1} << len); ++b) out.push_back(word(b, len));
  return out;
}

/// Position on the spine, reading the first letter as most significant.
inline Rational comb_a(const std::string& alpha) {
  Rational x = 0;
  for (std::size_t i = 0; i < alpha.size(); ++i)
    if (alpha[i] == '1') x += Rational(1, Integer(1) << (i + 1));
  return x + Rational(1, Integer(1) << (alpha.size() + 1));
}

inline Rational comb_b(const std::string& beta, int r) {
  Rational d(1, Integer(1) << (r + 2));
  auto a = comb_a(beta.substr(0, beta.size() - 1));
  if (beta.back() == '0') return a - d;
  return a + d;
}

}  // namespace detail

struct CombMap {
  MarkovMap map;
  std::vector<std::string> S;
  /// Spine coordinate of every a_alpha and b_beta.
  std::map<std::string, Rational> coordinates;
  /// Level (index length) of each basic arc, by arc index.
  std::vector<int> levels;
};

/// The 2^r-comb with P = {a_alpha} u {b_beta} u {c_gamma}.  Vertex ids are
/// "a<word>", "b<word>", "c<word>" (a_theta is "a"); arcs are named A<word>,
/// B<word> and C<word>.
inline CombMap comb_map(int r) {
  if (r < 1) throw ConstructionError("comb_map: r must be at least 1");
  if (r > 16) throw ConstructionError("comb_map: r too large");
  CombMap out;
  std::vector<std::pair<Rational, std::string>> spine;
  for (int len = 0; len < r; ++len)
    for (const auto& w : detail::words(len)) {
      out.coordinates["a" + w] = detail::comb_a(w);
      spine.push_back({detail::comb_a(w), "a" + w});
    }
  for (int len = 1; len <= r; ++len)
    for (const auto& w : detail::words(len)) {
      out.coordinates["b" + w] = detail::comb_b(w, r);
      spine.push_back({detail::comb_b(w, r), "b" + w});
    }
  std::sort(spine.begin(), spine.end());

  std::vector<std::string> vertices;
  for (const auto& [x, id] : spine) vertices.push_back(id);
  const auto tips = detail::words(r);
  for (const auto& g : tips) vertices.push_back("c" + g);

  std::vector<EdgeSpec> edges;
  for (std::size_t i = 0; i + 1 < spine.size(); ++i) {
    const auto& [x, u] = spine[i];
    const auto& [y, v] = spine[i + 1];
    std::string name;
    if (u[0] == 'a')
      name = "A" + v.substr(1);
    else if (v[0] == 'a')
      name = "A" + u.substr(1);
    else
      name = "B" + (u.size() < v.size() ? u : v).substr(1);
    edges.push_back({name, u, v, y - x});
    out.levels.push_back(static_cast<int>(name.size()) - 1);
  }
  for (const auto& g : tips) {
    edges.push_back({"C" + g, "b" + g, "c" + g, 1});
    out.levels.push_back(r);
  }

  std::map<std::string, std::string> image;
  for (int len = 0; len < r; ++len)
    for (const auto& w : detail::words(len)) image["a" + w] = "a" + detail::word_succ(w);
  for (int len = 1; len <= r; ++len)
    for (const auto& w : detail::words(len)) {
      const std::string ones(static_cast<std::size_t>(len), '1');
      if (w != ones)
        image["b" + w] = "b" + detail::word_succ(w);
      else if (len == r)
        image["b" + w] = "c" + std::string(static_cast<std::size_t>(r), '0');
      else
        image["b" + w] = "b" + std::string(static_cast<std::size_t>(len + 1), '0');
    }
  for (const auto& g : tips)
    image["c" + g] = g == std::string(static_cast<std::size_t>(r), '1') ? "b" + std::string(static_cast<std::size_t>(r), '0')
                                                                        : "c" + detail::word_succ(g);

  out.map = MarkovMap::create(MetricTree::build(vertices, edges), image);
  out.S.push_back("b" + std::string(static_cast<std::size_t>(r), '1'));
  std::string g(static_cast<std::size_t>(r), '0');
  for (std::size_t i = 0; i < tips.size(); ++i, g = detail::word_succ(g)) out.S.push_back("c" + g);
  return out;
}

// ---------------------------------------------------------------------------
// Covering walk

struct SweepWalk {
  /// j_1..j_m: the arc traversed in step l.
  std::vector<std::size_t> arcs;
  /// v_0..v_m: v_0 = v_m = start, step l runs from v_{l-1} to v_l.
  std::vector<std::size_t> vertices;
};

/// Depth-first double cover of the tree from `start` (arcs in index order).
inline SweepWalk sweep_walk(const MetricTree& t, const std::string& start) {
  auto s = t.find_vertex(start);
  if (!s) throw ConstructionError("start not a vertex: '" + start + "'");
  SweepWalk w;
  w.vertices.push_back(*s);
  struct Frame {
    std::size_t v;
    std::size_t via;  // edge used to enter v
    std::size_t next;
  };
  std::vector<Frame> stack{{*s, MetricTree::npos, 0}};
  while (!stack.empty()) {
    auto& top = stack.back();
    const auto& inc = t.incident(top.v);
    if (top.next < inc.size()) {
      const auto e = inc[top.next++];
      if (e.edge == top.via) continue;
      w.arcs.push_back(e.edge);
      w.vertices.push_back(e.neighbor);
      stack.push_back({e.neighbor, e.edge, 0});
      continue;
    }
    if (top.via != MetricTree::npos) {
      const auto back = t.other_end(top.via, top.v);
      w.arcs.push_back(top.via);
      w.vertices.push_back(back);
    }
    stack.pop_back();
  }
  return w;
}

inline SweepWalk sweep_walk(const MarkovMap& f, const std::string& start) { return sweep_walk(f.tree(), start); }

// ---------------------------------------------------------------------------
// Exact extension g_N

struct ExtensionResult {
  MarkovMap map;
  /// Role of every arc: "B[k]" (k-th base arc, 1-based), "A[i][j]" or
  /// "A[n][N-1,l]" with the numbers substituted.
  std::vector<std::string> labels;
  int N = 0;
  int n = 0;
  int m = 0;
  int p = 0;
  std::vector<std::size_t> defect;
  std::vector<std::string> S_base;
  SweepWalk walk;

  std::size_t arc(const std::string& label) const {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == label) return i;
    throw ConstructionError("no arc labelled '" + label + "'");
  }
};

namespace detail {

inline std::string tj(int i, int j) { return "t[" + std::to_string(i) + "][" + std::to_string(j) + "]"; }
inline std::string tl(int n, int N, int l) {
  return "t[" + std::to_string(n) + "][" + std::to_string(N - 1) + "," + std::to_string(l) + "]";
}
inline std::string aj(int i, int j) { return "A[" + std::to_string(i) + "][" + std::to_string(j) + "]"; }
inline std::string al(int n, int N, int l) {
  return "A[" + std::to_string(n) + "][" + std::to_string(N - 1) + "," + std::to_string(l) + "]";
}

}  // namespace detail

/// Attaches a leg of N arcs at each s_i (i >= 1), splits A_n^{N-1} into m
/// pieces following a covering walk of the base from s_1, and defines g on
/// the new points.  Legs have length 1.
inline ExtensionResult extend_exact(const MarkovMap& f, const std::vector<std::string>& S, int N) {
  if (N <= 6) throw ConstructionError("N too small: need N > 6, got " + std::to_string(N));
  auto report = check_ps_linear(f, S);
  if (!report.ok) {
    std::string why;
    for (const auto& fl : report.failures) why += std::string(" (") + fl.condition + ") " + fl.witness + ";";
    throw ConstructionError("base not (P,S)-linear:" + why);
  }
  const int n = static_cast<int>(S.size()) - 1;
  if (n < 2) throw ConstructionError("base not (P,S)-linear: S must have n >= 2");

  const MetricTree& base = f.tree();
  ExtensionResult out;
  out.N = N;
  out.n = n;
  out.p = static_cast<int>(base.edge_count());
  out.S_base = S;
  out.walk = sweep_walk(base, S[1]);
  const int m = static_cast<int>(out.walk.arcs.size());
  out.m = m;

  std::vector<std::string> vertices = base.vertex_ids();
  std::vector<EdgeSpec> edges;
  for (std::size_t k = 0; k < base.edge_count(); ++k) {
    const auto& e = base.edge(k);
    edges.push_back({e.id, base.vertex_id(e.a), base.vertex_id(e.b), e.length});
    out.labels.push_back("B[" + std::to_string(k + 1) + "]");
  }
  const Rational piece(1, N);
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= N; ++j) vertices.push_back(detail::tj(i, j));
    for (int j = 1; j <= N; ++j) {
      const std::string from = j == 1 ? S[static_cast<std::size_t>(i)] : detail::tj(i, j - 1);
      if (i == n && j == N - 1) {
        for (int l = 1; l < m; ++l) vertices.push_back(detail::tl(n, N, l));
        for (int l = 1; l <= m; ++l) {
          const std::string a = l == 1 ? detail::tj(n, N - 2) : detail::tl(n, N, l - 1);
          const std::string b = l == m ? detail::tj(n, N - 1) : detail::tl(n, N, l);
          out.defect.push_back(edges.size());
          edges.push_back({detail::al(n, N, l), a, b, piece / m});
          out.labels.push_back(detail::al(n, N, l));
        }
        continue;
      }
      if (j == N || (i == n && (j == N - 4 || j == N - 3))) out.defect.push_back(edges.size());
      edges.push_back({detail::aj(i, j), from, detail::tj(i, j), piece});
      out.labels.push_back(detail::aj(i, j));
    }
  }
  std::sort(out.defect.begin(), out.defect.end());

  std::map<std::string, std::string> image;
  for (std::size_t v = 0; v < base.vertex_count(); ++v) image[base.vertex_id(v)] = base.vertex_id(f.image(v));
  image[S[static_cast<std::size_t>(n)]] = detail::tj(1, 1);
  for (int i = 1; i < n; ++i)
    for (int j = 1; j <= N; ++j) image[detail::tj(i, j)] = detail::tj(i + 1, j);
  for (int j = 1; j <= N; ++j) {
    std::string to;
    if (j <= N - 6)
      to = detail::tj(1, j + 1);
    else if (j == N - 5 || j == N - 3)
      to = detail::tj(1, N - 1);
    else if (j == N - 4)
      to = detail::tj(1, N);
    else if (j == N - 2 || j == N - 1)
      to = S[1];
    else
      to = detail::tj(1, 1);
    image[detail::tj(n, j)] = to;
  }
  for (int l = 1; l < m; ++l)
    image[detail::tl(n, N, l)] = base.vertex_id(out.walk.vertices[static_cast<std::size_t>(l)]);

  out.map = MarkovMap::create(MetricTree::build(std::move(vertices), std::move(edges)), image);
  return out;
}

// ---------------------------------------------------------------------------
// Lower-bound root

/// Largest positive root of sum_{k=1}^{N-4} x^{-nk} = 1.
inline double lower_bound_root(int n, int N) {
  if (n < 2) throw ConstructionError("lower_bound_root: n must be at least 2");
  if (N <= 6) throw ConstructionError("N too small: need N > 6, got " + std::to_string(N));
  // With y = x^{-n} the sum is y (1 - y^{N-4}) / (1 - y), decreasing in x.
  auto excess = [&](double x) {
    double y = std::pow(x, -n), term = 1, sum = 0;
    for (int k = 1; k <= N - 4; ++k) sum += (term *= y);
    return sum - 1;
  };
  double lo = 1, hi = std::pow(2.0, 1.0 / n);
  while (hi - lo > 1e-15) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (excess(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace treedyn
