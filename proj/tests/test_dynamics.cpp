#include "support/oracles.hpp"
#include "treedyn/constructions.hpp"
#include "treedyn/dynamics.hpp"

#include <catch_amalgamated.hpp>

using namespace treedyn;
using Catch::Matchers::ContainsSubstring;

namespace {

MarkovMap tent() {
  auto arc = MetricTree::build({"a", "b"}, {{"e", "a", "b", 1}});
  return from_point_images(arc,
                           {{"p0", at_vertex("a")}, {"ph", on_edge("e", Rational(1, 2))}, {"p1", at_vertex("b")}},
                           {{"p0", "p0"}, {"ph", "p1"}, {"p1", "p0"}});
}

MarkovMap swap_map() {
  auto t = MetricTree::build({"p0", "p1", "p2"}, {{"A", "p0", "p1", 1}, {"B", "p1", "p2", 1}});
  return MarkovMap::create(t, std::map<std::string, std::string>{{"p0", "p2"}, {"p1", "p1"}, {"p2", "p0"}});
}

/// Global coordinate on the tent's unit arc.
Rational global(const MarkovMap& f, const ArcPoint& x) {
  auto c = canonical(f, x);
  Rational start = c.arc == 0 ? Rational(0) : Rational(1, 2);
  return start + c.t / 2;
}

/// Steps for the tent map to spread [lo, hi] over [0, 1], by plain interval
/// bookkeeping on the unit interval.
int tent_cover_steps(double lo, double hi) {
  std::vector<std::pair<double, double>> s{{lo, hi}};
  for (int step = 0; step < 100; ++step) {
    std::sort(s.begin(), s.end());
    std::vector<std::pair<double, double>> m;
    for (auto iv : s)
      if (!m.empty() && iv.first <= m.back().second + 1e-15)
        m.back().second = std::max(m.back().second, iv.second);
      else
        m.push_back(iv);
    if (m.size() == 1 && m[0].first <= 1e-15 && m[0].second >= 1 - 1e-15) return step;
    std::vector<std::pair<double, double>> next;
    for (auto [a, b] : m) {
      if (a < 0.5) next.push_back({2 * a, 2 * std::min(b, 0.5)});
      if (b > 0.5) next.push_back({2 - 2 * b, 2 - 2 * std::max(a, 0.5)});
    }
    s = next;
  }
  return -1;
}

}  // namespace

TEST_CASE("tent evaluation", "[dynamics]") {
  auto f = tent();
  REQUIRE(f.arc_count() == 2);
  auto y = eval_point(f, {0, Rational(1, 2)});
  CHECK(global(f, y) == Rational(1, 2));
  CHECK(as_vertex(f, y));
  for (auto x : {Rational(1, 7), Rational(2, 5), Rational(3, 8)}) {
    auto img = eval_point(f, {0, 2 * x});
    CHECK(global(f, img) == 2 * x);
  }
  auto z = eval_point(f, {1, Rational(1, 5)});  // global 3/5
  CHECK(global(f, z) == Rational(4, 5));
}

TEST_CASE("marked vertices map to their images", "[dynamics]") {
  for (const auto& f : {tent(), star_map(3).map, comb_map(2).map}) {
    for (std::size_t v = 0; v < f.tree().vertex_count(); ++v) {
      auto y = eval_point(f, vertex_point(f, v));
      REQUIRE(as_vertex(f, y));
      CHECK(*as_vertex(f, y) == f.image(v));
      // Orbits of marked points stay marked.
      for (const auto& p : orbit(f, vertex_point(f, v), 12)) CHECK(as_vertex(f, p));
    }
  }
}

TEST_CASE("star map translates along the inner cycle", "[dynamics]") {
  auto f = star_map(3).map;
  CHECK(eval_point(f, {0, Rational(1, 2)}) == ArcPoint{1, Rational(1, 2)});
  CHECK(eval_point(f, {1, Rational(1, 3)}) == ArcPoint{2, Rational(1, 3)});
}

TEST_CASE("orbits", "[dynamics]") {
  auto f = tent();
  auto fixed = ArcPoint{1, Rational(1, 3)};
  for (const auto& p : orbit(f, fixed, 5)) CHECK(p == fixed);
  CHECK(orbit(f, fixed, 0) == std::vector<ArcPoint>{fixed});

  // Star n = 2: s1 -> s2 -> s1' -> s2' -> s1.
  auto s = star_map(2).map;
  const auto& t = s.tree();
  auto o = orbit(s, vertex_point(s, t.vertex("s1")), 4);
  std::vector<std::string> ids;
  for (const auto& p : o) ids.push_back(t.vertex_id(*as_vertex(s, p)));
  CHECK(ids == std::vector<std::string>{"s1", "s2", "s1'", "s2'", "s1"});
}

TEST_CASE("periodic points", "[dynamics]") {
  auto f = tent();
  auto p = periodic_point_in_arc(f, 1, 4);
  CHECK(p.period == 1);
  CHECK(global(f, p.point) == Rational(2, 3));

  auto p0 = periodic_point_in_arc(f, 0, 4);
  auto o = orbit(f, p0.point, p0.period);
  CHECK(o.back() == o.front());

  // O_1 -> O_2 -> O_3 -> O_1 is an isometric loop; the inner loop runs
  // through I_3, which has slope 2.
  auto star = star_map(3).map;
  CHECK_THROWS_WITH(periodic_point_in_arc(star, 3, 10), ContainsSubstring("neutral cycle slope 1"));
  auto inner = periodic_point_in_arc(star, 0, 10);
  CHECK(orbit(star, inner.point, inner.period).back() == inner.point);
  CHECK_THROWS_WITH(periodic_point_in_arc(swap_map(), 0, 1), ContainsSubstring("no cycle through arc"));

  auto base = star_map(2);
  auto e = extend_exact(base.map, base.S, 10);
  auto a11 = e.arc("A[1][1]");
  auto q = periodic_point_in_arc(e.map, a11, 100);
  CHECK(q.point.arc == a11);
  auto oq = orbit(e.map, q.point, q.period);
  CHECK(oq.back() == q.point);
}

TEST_CASE("periodic points on random cycles are exact", "[dynamics][property]") {
  auto base = star_map(2);
  auto e = extend_exact(base.map, base.S, 12);
  const auto& f = e.map;
  oracle::Rng rng(53);
  std::uniform_int_distribution<std::size_t> pick(0, f.arc_count() - 1);
  int found = 0;
  for (int trial = 0; trial < 30; ++trial) {
    try {
      auto p = periodic_point_in_arc(f, pick(rng), 200);
      auto o = orbit(f, p.point, p.period);
      CHECK(o.back() == p.point);
      for (std::size_t k = 1; k < p.period; ++k) CHECK_FALSE(o[k] == p.point);
      ++found;
    } catch (const DynamicsError& err) {
      CHECK_THAT(err.what(), ContainsSubstring("neutral cycle slope 1"));
    }
  }
  CHECK(found > 0);
}

TEST_CASE("full arcs map onto their transition rows", "[dynamics][property]") {
  auto base = star_map(2);
  std::vector<MarkovMap> maps{tent(), star_map(4).map, comb_map(3).map, extend_exact(base.map, base.S, 10).map};
  for (const auto& f : maps)
    for (std::size_t a = 0; a < f.arc_count(); ++a) {
      auto img = image(f, SegmentSet::single(f.arc_count(), a, 0, 1));
      std::vector<std::size_t> full;
      for (std::size_t b = 0; b < f.arc_count(); ++b) {
        if (img.full(b)) full.push_back(b);
        else CHECK(img.on(b).empty());
      }
      CHECK(full == f.transition().adjacency[a]);
    }
}

TEST_CASE("segment sets", "[dynamics]") {
  SegmentSet s(2);
  s.add(0, Rational(1, 2), Rational(3, 4));
  s.add(0, Rational(1, 4), Rational(1, 2));
  s.add(1, Rational(1, 3), Rational(1, 3));
  s.normalize();
  REQUIRE(s.on(0).size() == 1);
  CHECK(s.on(0)[0] == SegmentSet::Interval{Rational(1, 4), Rational(3, 4)});
  CHECK(s.on(1).empty());
  CHECK(s.full_count() == 0);
  CHECK_THROWS_AS(s.add(0, 0, 2), DynamicsError);
}

TEST_CASE("tent witness", "[dynamics]") {
  auto f = tent();
  // Global [0.3, 0.4] lives on the first arc at [0.6, 0.8].
  auto seed = SegmentSet::single(2, 0, Rational(3, 5), Rational(4, 5));
  auto w = exactness_witness(f, seed, 50);
  REQUIRE(w.covered_in);
  CHECK(static_cast<int>(*w.covered_in) == tent_cover_steps(0.3, 0.4));
  CHECK(*w.covered_in <= 6);
  CHECK(w.trace.front().step == 0);
  CHECK(w.trace.back().arcs_full == 2);
  CHECK(w.trace.back().total_measure == 1.0);
  CHECK_THROWS_WITH(exactness_witness(f, SegmentSet(2), 5), ContainsSubstring("empty seed"));
}

TEST_CASE("permutation maps never cover", "[dynamics]") {
  auto f = swap_map();
  for (auto [lo, hi] : std::vector<std::pair<Rational, Rational>>{{Rational(1, 10), Rational(1, 5)}, {0, 1}}) {
    auto w = exactness_witness(f, SegmentSet::single(2, 0, lo, hi), 200);
    CHECK_FALSE(w.covered_in);
    CHECK(w.trace.size() == 201);
  }
}

TEST_CASE("g_N witnesses from random seeds", "[dynamics][property]") {
  auto base = star_map(2);
  auto e = extend_exact(base.map, base.S, 10);
  const auto& f = e.map;
  oracle::Rng rng(59);
  std::uniform_int_distribution<std::size_t> pick(0, f.arc_count() - 1);
  std::uniform_int_distribution<int> num(0, 99);
  for (int trial = 0; trial < 20; ++trial) {
    int a = num(rng), b = num(rng);
    if (a == b) b = (a + 1) % 100;
    auto seed = SegmentSet::single(f.arc_count(), pick(rng), Rational(std::min(a, b), 100), Rational(std::max(a, b), 100));
    auto w = exactness_witness(f, seed, 50 * f.arc_count());
    CHECK(w.covered_in);
  }
}
