#pragma once

// Nonnegative integer matrices and their transition graphs: strong
// components, primitivity, Perron roots, the rome method, cycle means.

#include "treedyn/core.hpp"
#include "treedyn/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace treedyn {

using Digraph = std::vector<std::vector<std::size_t>>;

class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n) : n_(n), a_(n * n, 0) {}

  static SquareMatrix from_rows(const std::vector<std::vector<long long>>& rows) {
    SquareMatrix m(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.size()) throw SpectralError("matrix is not square");
      for (std::size_t j = 0; j < rows.size(); ++j) {
        if (rows[i][j] < 0) throw SpectralError("matrix has a negative entry");
        m.at(i, j) = rows[i][j];
      }
    }
    return m;
  }

  std::size_t size() const { return n_; }
  long long operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  long long& at(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }

  std::vector<std::vector<long long>> rows() const {
    std::vector<std::vector<long long>> r(n_, std::vector<long long>(n_));
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) r[i][j] = (*this)(i, j);
    return r;
  }

  Digraph graph() const {
    Digraph g(n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        if ((*this)(i, j) != 0) g[i].push_back(j);
    return g;
  }

  long long max_row_sum() const {
    long long best = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      long long s = 0;
      for (std::size_t j = 0; j < n_; ++j) s += (*this)(i, j);
      best = std::max(best, s);
    }
    return best;
  }

  /// Entrywise M <= N.
  bool dominated_by(const SquareMatrix& o) const {
    if (o.n_ != n_) return false;
    for (std::size_t k = 0; k < a_.size(); ++k)
      if (a_[k] > o.a_[k]) return false;
    return true;
  }

  friend bool operator==(const SquareMatrix& l, const SquareMatrix& r) {
    return l.n_ == r.n_ && l.a_ == r.a_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<long long> a_;
};

// ---------------------------------------------------------------------------
// Strong components

struct SccDecomposition {
  /// Components in reverse topological order (sinks first); members sorted.
  std::vector<std::vector<std::size_t>> components;
  std::vector<std::size_t> component_of;
};

/// Tarjan's algorithm, iterative.
inline SccDecomposition strong_components(const Digraph& g) {
  const std::size_t n = g.size();
  constexpr auto unset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> index(n, unset), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<std::size_t> stack;
  std::vector<std::pair<std::size_t, std::size_t>> work;  // (vertex, next child position)
  SccDecomposition out;
  out.component_of.assign(n, unset);
  std::size_t counter = 0;

  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != unset) continue;
    work.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!work.empty()) {
      auto& [v, pos] = work.back();
      if (pos < g[v].size()) {
        auto w = g[v][pos++];
        if (index[w] == unset) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          work.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const auto done = v;
      work.pop_back();
      if (!work.empty()) low[work.back().first] = std::min(low[work.back().first], low[done]);
      if (low[done] == index[done]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          out.component_of[w] = out.components.size();
          comp.push_back(w);
        } while (w != done);
        std::sort(comp.begin(), comp.end());
        out.components.push_back(std::move(comp));
      }
    }
  }
  return out;
}

namespace detail {

inline bool has_self_loop(const Digraph& g, std::size_t v) {
  return std::find(g[v].begin(), g[v].end(), v) != g[v].end();
}

inline bool nontrivial(const Digraph& g, const std::vector<std::size_t>& comp) {
  return comp.size() > 1 || has_self_loop(g, comp.front());
}

/// gcd of loop lengths inside one nontrivial strong component.
inline std::size_t component_period(const Digraph& g, const SccDecomposition& scc, std::size_t c) {
  const auto& comp = scc.components[c];
  std::vector<long> level(g.size(), -1);
  std::deque<std::size_t> queue{comp.front()};
  level[comp.front()] = 0;
  std::size_t period = 0;
  while (!queue.empty()) {
    auto u = queue.front();
    queue.pop_front();
    for (auto v : g[u]) {
      if (scc.component_of[v] != c) continue;
      if (level[v] < 0) {
        level[v] = level[u] + 1;
        queue.push_back(v);
      } else {
        period = std::gcd(period, static_cast<std::size_t>(std::labs(level[u] + 1 - level[v])));
      }
    }
  }
  return period;
}

}  // namespace detail

struct MatrixProfile {
  std::vector<std::vector<std::size_t>> sccs;
  bool irreducible = false;
  bool primitive = false;
  bool permutation = false;
  bool structurally_zero_entropy = false;
  /// gcd of loop lengths; 0 when the matrix is not irreducible.
  std::size_t period = 0;
};

inline MatrixProfile matrix_profile(const SquareMatrix& m) {
  MatrixProfile p;
  const auto g = m.graph();
  auto scc = strong_components(g);
  p.sccs = scc.components;
  const std::size_t n = m.size();

  p.irreducible = n > 0 && scc.components.size() == 1 && detail::nontrivial(g, scc.components[0]);
  if (p.irreducible) {
    p.period = detail::component_period(g, scc, 0);
    p.primitive = p.period == 1;
  }

  p.permutation = n > 0;
  for (std::size_t i = 0; i < n && p.permutation; ++i) {
    std::size_t row_ones = 0, col_ones = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (m(i, j) > 1 || m(j, i) > 1) p.permutation = false;
      row_ones += m(i, j) == 1;
      col_ones += m(j, i) == 1;
    }
    if (row_ones != 1 || col_ones != 1) p.permutation = false;
  }

  // Every nontrivial component is a single simple cycle of unit entries.
  p.structurally_zero_entropy = true;
  for (std::size_t c = 0; c < scc.components.size(); ++c) {
    const auto& comp = scc.components[c];
    if (!detail::nontrivial(g, comp)) continue;
    for (auto u : comp) {
      std::size_t inside = 0;
      for (auto v : g[u])
        if (scc.component_of[v] == c) inside += (m(u, v) == 1) ? 1 : 2;
      if (inside != 1) p.structurally_zero_entropy = false;
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Perron eigenvalue by power iteration

struct PerronOptions {
  double tol = 1e-12;
  std::size_t max_iterations = 1'000'000;
};

namespace detail {

struct BlockPower {
  double value;
  std::vector<double> vector;  // indexed like the block, sums to 1
};

/// Power iteration on B + I for an irreducible block B; the Collatz-Wielandt
/// bounds min/max (Bx)_i/x_i bracket the Perron root at every step.
inline BlockPower block_power(const SquareMatrix& m, const std::vector<std::size_t>& block,
                              const PerronOptions& opt) {
  const std::size_t k = block.size();
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(k);
  std::vector<std::size_t> local(m.size(), static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < k; ++i) local[block[i]] = i;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (auto v = m(block[i], block[j])) rows[i].push_back({j, static_cast<double>(v)});

  std::vector<double> x(k, 1.0 / static_cast<double>(k)), y(k);
  for (std::size_t it = 0; it < opt.max_iterations; ++it) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0, total = 0;
    for (std::size_t i = 0; i < k; ++i) {
      double s = 0;
      for (auto [j, v] : rows[i]) s += v * x[j];
      double ratio = s / x[i];
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
      y[i] = s + x[i];
      total += y[i];
    }
    if (hi - lo <= opt.tol * std::max(1.0, hi)) return {0.5 * (lo + hi), x};
    for (std::size_t i = 0; i < k; ++i) x[i] = y[i] / total;
  }
  throw SpectralError("no convergence within cap");
}

inline bool is_unit_cycle(const SquareMatrix& m, const Digraph& g, const SccDecomposition& scc,
                          std::size_t c) {
  for (auto u : scc.components[c]) {
    std::size_t inside = 0;
    for (auto v : g[u])
      if (scc.component_of[v] == c) inside += m(u, v) == 1 ? 1 : 2;
    if (inside != 1) return false;
  }
  return true;
}

}  // namespace detail

/// Spectral radius: the maximum over strong components of the component's
/// Perron root (0 for a matrix without loops).
inline double perron(const SquareMatrix& m, const PerronOptions& opt = {}) {
  const auto g = m.graph();
  auto scc = strong_components(g);
  double best = 0;
  for (std::size_t c = 0; c < scc.components.size(); ++c) {
    const auto& comp = scc.components[c];
    if (!detail::nontrivial(g, comp)) continue;
    if (detail::is_unit_cycle(m, g, scc, c)) {
      best = std::max(best, 1.0);
      continue;
    }
    best = std::max(best, detail::block_power(m, comp, opt).value);
  }
  return best;
}

inline double perron(const SquareMatrix& m, double tol) { return perron(m, PerronOptions{tol}); }

struct PerronVector {
  double value;
  std::vector<double> vector;  // strictly positive, sums to 1
};

/// Perron root and right eigenvector of an irreducible matrix.
inline PerronVector perron_vector(const SquareMatrix& m, const PerronOptions& opt = {}) {
  auto prof = matrix_profile(m);
  if (!prof.irreducible) throw SpectralError("perron_vector needs an irreducible matrix");
  std::vector<std::size_t> all(m.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  auto r = detail::block_power(m, all, opt);
  return {r.value, r.vector};
}

// ---------------------------------------------------------------------------
// Rome method

/// Total count and total width of the rome-simple paths of one length.
struct PathTerm {
  std::size_t length;
  Integer count;
  Integer width;
};

struct RomeData {
  std::vector<std::size_t> rome;
  /// series[i][j]: coefficient of y^len is the summed width of the simple
  /// paths of that length from rome[i] to rome[j]  (y stands for 1/x).
  std::vector<std::vector<IntPoly>> series;
  std::vector<std::vector<IntPoly>> counts;

  std::vector<PathTerm> paths(std::size_t i, std::size_t j) const {
    std::vector<PathTerm> out;
    const auto& w = series[i][j];
    const auto& c = counts[i][j];
    for (long len = 1; len <= std::max(w.degree(), c.degree()); ++len) {
      auto n = c.coeff(static_cast<std::size_t>(len));
      if (n != 0) out.push_back({static_cast<std::size_t>(len), n, w.coeff(static_cast<std::size_t>(len))});
    }
    return out;
  }
};

namespace detail {

/// A loop inside `allowed`, or empty if the induced subgraph is acyclic.
inline std::vector<std::size_t> find_cycle(const Digraph& g, const std::vector<char>& allowed) {
  Digraph sub(g.size());
  for (std::size_t u = 0; u < g.size(); ++u)
    if (allowed[u])
      for (auto v : g[u])
        if (allowed[v]) sub[u].push_back(v);
  auto scc = strong_components(sub);
  for (std::size_t c = 0; c < scc.components.size(); ++c) {
    const auto& comp = scc.components[c];
    if (!allowed[comp.front()] || !nontrivial(sub, comp)) continue;
    // Walk inside the component until a vertex repeats.
    std::vector<long> seen_at(g.size(), -1);
    std::vector<std::size_t> walk;
    std::size_t u = comp.front();
    while (seen_at[u] < 0) {
      seen_at[u] = static_cast<long>(walk.size());
      walk.push_back(u);
      for (auto v : sub[u])
        if (scc.component_of[v] == c) {
          u = v;
          break;
        }
    }
    std::vector<std::size_t> cyc(walk.begin() + seen_at[u], walk.end());
    cyc.push_back(u);
    return cyc;
  }
  return {};
}

inline std::string format_cycle(const std::vector<std::size_t>& cyc) {
  std::string s;
  for (std::size_t i = 0; i < cyc.size(); ++i) s += (i ? " -> " : "") + std::to_string(cyc[i]);
  return s;
}

}  // namespace detail

inline RomeData verify_rome(const SquareMatrix& m, std::vector<std::size_t> rome) {
  const std::size_t n = m.size();
  if (rome.empty()) throw SpectralError("not a rome: empty set");
  std::sort(rome.begin(), rome.end());
  if (std::adjacent_find(rome.begin(), rome.end()) != rome.end())
    throw SpectralError("not a rome: repeated index");
  if (rome.back() >= n) throw SpectralError("not a rome: index out of range");

  const auto g = m.graph();
  std::vector<char> outside(n, 1);
  std::vector<long> slot(n, -1);
  for (std::size_t i = 0; i < rome.size(); ++i) {
    outside[rome[i]] = 0;
    slot[rome[i]] = static_cast<long>(i);
  }
  if (auto cyc = detail::find_cycle(g, outside); !cyc.empty())
    throw SpectralError("not a rome: cycle avoiding it " + detail::format_cycle(cyc));

  // Topological order of the complement (Kahn).
  std::vector<std::size_t> indeg(n, 0), order;
  for (std::size_t u = 0; u < n; ++u)
    if (outside[u])
      for (auto v : g[u])
        if (outside[v]) ++indeg[v];
  std::deque<std::size_t> queue;
  for (std::size_t u = 0; u < n; ++u)
    if (outside[u] && indeg[u] == 0) queue.push_back(u);
  while (!queue.empty()) {
    auto u = queue.front();
    queue.pop_front();
    order.push_back(u);
    for (auto v : g[u])
      if (outside[v] && --indeg[v] == 0) queue.push_back(v);
  }

  const std::size_t k = rome.size();
  RomeData d;
  d.rome = rome;
  d.series.assign(k, std::vector<IntPoly>(k));
  d.counts.assign(k, std::vector<IntPoly>(k));
  const IntPoly y = IntPoly::monomial(1, 1);
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<IntPoly> width(n), count(n);
    auto step = [&](std::size_t u, const IntPoly& w, const IntPoly& c) {
      for (auto v : g[u]) {
        IntPoly wv = w.shifted(1) * Integer(m(u, v));
        IntPoly cv = c.shifted(1);
        if (outside[v]) {
          width[v] += wv;
          count[v] += cv;
        } else {
          auto j = static_cast<std::size_t>(slot[v]);
          d.series[i][j] += wv;
          d.counts[i][j] += cv;
        }
      }
    };
    step(rome[i], IntPoly::constant(1), IntPoly::constant(1));
    for (auto u : order)
      if (!count[u].is_zero()) step(u, width[u], count[u]);
  }
  return d;
}

/// Greedy rome: repeatedly take a highest-degree vertex lying on a cycle of
/// the remaining graph until the rest is acyclic.
inline std::vector<std::size_t> find_rome(const SquareMatrix& m) {
  const std::size_t n = m.size();
  if (n == 0) throw SpectralError("empty matrix");
  const auto g = m.graph();
  std::vector<char> outside(n, 1);
  std::vector<std::size_t> rome;
  for (;;) {
    Digraph sub(n);
    std::vector<std::size_t> deg(n, 0);
    for (std::size_t u = 0; u < n; ++u)
      if (outside[u])
        for (auto v : g[u])
          if (outside[v]) {
            sub[u].push_back(v);
            ++deg[u];
            ++deg[v];
          }
    auto scc = strong_components(sub);
    std::optional<std::size_t> pick;
    for (const auto& comp : scc.components) {
      if (!outside[comp.front()] || !detail::nontrivial(sub, comp)) continue;
      for (auto u : comp)
        if (!pick || deg[u] > deg[*pick] || (deg[u] == deg[*pick] && u < *pick)) pick = u;
    }
    if (!pick) break;
    rome.push_back(*pick);
    outside[*pick] = 0;
  }
  if (rome.empty()) rome.push_back(0);
  std::sort(rome.begin(), rome.end());
  return rome;
}

namespace detail {

/// Fraction-free (Bareiss) determinant over Z[y].
inline IntPoly determinant(std::vector<std::vector<IntPoly>> a) {
  const std::size_t k = a.size();
  if (k == 0) return IntPoly::constant(1);
  IntPoly prev = IntPoly::constant(1);
  bool negate = false;
  for (std::size_t c = 0; c + 1 < k; ++c) {
    if (a[c][c].is_zero()) {
      std::size_t r = c + 1;
      while (r < k && a[r][c].is_zero()) ++r;
      if (r == k) return {};
      std::swap(a[r], a[c]);
      negate = !negate;
    }
    for (std::size_t i = c + 1; i < k; ++i) {
      for (std::size_t j = c + 1; j < k; ++j)
        a[i][j] = (a[c][c] * a[i][j] - a[i][c] * a[c][j]).divexact(prev);
      a[i][c] = {};
    }
    prev = a[c][c];
  }
  return negate ? -a[k - 1][k - 1] : a[k - 1][k - 1];
}

}  // namespace detail

struct RomeRoot {
  double lambda;
  /// det(M - xE), lowest degree first.
  IntPoly charpoly;
  RomeData data;
};

/// Characteristic polynomial through a rome:
///   det(M - xE) = (-1)^(n-k) x^n det(R(x) - E),
/// with R(x) the matrix of simple-path series in 1/x.  The Perron root is
/// then isolated from the exact polynomial.
inline RomeRoot rome_root(const SquareMatrix& m, std::vector<std::size_t> rome, double tol = 1e-12) {
  RomeRoot out;
  out.data = verify_rome(m, std::move(rome));
  const std::size_t n = m.size();
  const std::size_t k = out.data.rome.size();

  auto r = out.data.series;
  for (std::size_t i = 0; i < k; ++i) r[i][i] -= IntPoly::constant(1);
  IntPoly det_y = detail::determinant(std::move(r));
  if (det_y.degree() > static_cast<long>(n))
    throw SpectralError("internal: rome determinant has degree above matrix size");

  const bool flip = (n - k) % 2 == 1;
  std::vector<Integer> chi(n + 1);
  for (std::size_t j = 0; j <= n; ++j) chi[n - j] = flip ? Integer(-det_y.coeff(j)) : det_y.coeff(j);
  out.charpoly = IntPoly(std::move(chi));

  IntPoly monic = (n % 2 == 1) ? -out.charpoly : out.charpoly;
  out.lambda = largest_root_of_nonnegative_charpoly(monic, Integer(1 + m.max_row_sum()), tol);
  return out;
}

/// Rome chosen by find_rome.  No tolerance overload here: a braced rome such
/// as {0} would bind to it.
inline RomeRoot rome_root(const SquareMatrix& m) { return rome_root(m, find_rome(m)); }

// ---------------------------------------------------------------------------
// Maximum cycle mean (Karp)

/// Maximum over directed cycles of (sum of vertex weights on the cycle) /
/// (cycle length); 0 when the graph has no cycle.
inline Rational max_cycle_mean(const Digraph& g, const std::vector<long long>& weights) {
  if (weights.size() != g.size()) throw SpectralError("weights do not match the graph");
  auto scc = strong_components(g);
  Rational best = 0;
  constexpr long long minus_inf = std::numeric_limits<long long>::min();
  for (std::size_t c = 0; c < scc.components.size(); ++c) {
    const auto& comp = scc.components[c];
    if (!detail::nontrivial(g, comp)) continue;
    const std::size_t m = comp.size();
    std::vector<std::size_t> local(g.size(), 0);
    for (std::size_t i = 0; i < m; ++i) local[comp[i]] = i;
    // walk[s][v]: best weight of a walk with s edges from comp[0] to v,
    // counting the weight of every vertex entered.
    std::vector<std::vector<long long>> walk(m + 1, std::vector<long long>(m, minus_inf));
    walk[0][0] = 0;
    for (std::size_t s = 1; s <= m; ++s)
      for (std::size_t i = 0; i < m; ++i) {
        if (walk[s - 1][i] == minus_inf) continue;
        for (auto v : g[comp[i]]) {
          if (scc.component_of[v] != c) continue;
          auto j = local[v];
          walk[s][j] = std::max(walk[s][j], walk[s - 1][i] + weights[v]);
        }
      }
    std::optional<Rational> comp_best;
    for (std::size_t v = 0; v < m; ++v) {
      if (walk[m][v] == minus_inf) continue;
      std::optional<Rational> worst;
      for (std::size_t s = 0; s < m; ++s) {
        if (walk[s][v] == minus_inf) continue;
        Rational r(walk[m][v] - walk[s][v], static_cast<long long>(m - s));
        if (!worst || r < *worst) worst = r;
      }
      if (worst && (!comp_best || *worst > *comp_best)) comp_best = worst;
    }
    if (comp_best && *comp_best > best) best = *comp_best;
  }
  return best;
}

}  // namespace treedyn
