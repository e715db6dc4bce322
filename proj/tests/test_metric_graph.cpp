#include <doctest.h>

#include <cmath>
#include <random>

#include "qgdirac/metric_graph.hpp"

using namespace qgdirac;

TEST_CASE("3-star build: caps, edges, lengths") {
  const MetricGraph g = MetricGraph::build(preset_star(3, 20.0));
  CHECK(g.vertices().size() == 4);
  CHECK(g.edges().size() == 3);
  int caps = 0;
  for (const auto& v : g.vertices())
    if (v.is_truncation_cap) {
      ++caps;
      CHECK(g.degree(v.id) == 1);
    }
  CHECK(caps == 3);
  for (const auto& e : g.edges()) {
    CHECK(e.length == doctest::Approx(20.0));
    CHECK(e.was_half_line);
  }
}

TEST_CASE("interval build") {
  const MetricGraph g = MetricGraph::build(preset_interval(M_PI));
  CHECK(g.vertices().size() == 2);
  CHECK(g.edges().size() == 1);
  for (const auto& v : g.vertices()) CHECK(!v.is_truncation_cap);
}

TEST_CASE("tadpole build: loop attach vertex plus one cap") {
  const MetricGraph g = MetricGraph::build(preset_tadpole(2.0, 15.0));
  CHECK(g.vertices().size() == 2);
  CHECK(g.edges().size() == 2);
  CHECK(g.degree(0) == 3);  // loop twice + leg
  int caps = 0;
  for (const auto& v : g.vertices()) caps += v.is_truncation_cap ? 1 : 0;
  CHECK(caps == 1);
}

TEST_CASE("build errors") {
  GraphSpec spec;
  spec.vertices = {{Vec2{0, 0}}, {Vec2{1, 0}}, {Vec2{5, 5}}};
  GraphSpec::EdgeSpec e;
  e.v0 = 0;
  e.v1 = 1;
  e.length = 1.0;
  spec.edges = {e};
  CHECK_THROWS_AS(MetricGraph::build(spec), std::invalid_argument);  // vertex 2 unreachable

  spec.vertices = {{Vec2{0, 0}}, {Vec2{1, 0}}};
  spec.edges[0].length = -1.0;
  CHECK_THROWS_AS(MetricGraph::build(spec), std::invalid_argument);  // nonpositive length

  spec.edges[0].length = 1.0;
  spec.edges[0].v1 = 7;
  CHECK_THROWS_AS(MetricGraph::build(spec), std::invalid_argument);  // dangling id
}

TEST_CASE("path distance on interval and star") {
  const MetricGraph gi = MetricGraph::build(preset_interval(M_PI));
  CHECK(gi.path_distance({0, 0.0}, {0, M_PI}) == doctest::Approx(M_PI));

  const MetricGraph gs = MetricGraph::build(preset_star(3, 20.0));
  CHECK(gs.path_distance({0, 2.0}, {1, 3.0}) == doctest::Approx(5.0));
  CHECK(gs.path_distance({0, 2.0}, {0, 2.0}) == doctest::Approx(0.0));
}

TEST_CASE("tadpole loop distance picks the shorter arc") {
  const MetricGraph g = MetricGraph::build(preset_tadpole(2.0, 15.0));
  // loop of length 2: points at s = 0.3 and s = 1.8, arcs 1.5 and 0.5
  CHECK(g.path_distance({0, 0.3}, {0, 1.8}) == doctest::Approx(0.5));
}

TEST_CASE("path_distance invalid edge id") {
  const MetricGraph g = MetricGraph::build(preset_interval(1.0));
  CHECK_THROWS_AS(g.path_distance({3, 0.0}, {0, 0.0}), std::invalid_argument);
}

TEST_CASE("compact core") {
  const auto star = MetricGraph::build(preset_star(3, 20.0)).compact_core();
  CHECK(star.edge_ids.empty());
  CHECK(star.total_length == doctest::Approx(0.0));

  const auto tad = MetricGraph::build(preset_tadpole(2.0, 15.0)).compact_core();
  CHECK(tad.edge_ids.size() == 1);
  CHECK(tad.total_length == doctest::Approx(2.0));

  const auto iv = MetricGraph::build(preset_interval(M_PI)).compact_core();
  CHECK(iv.edge_ids.size() == 1);
  CHECK(iv.total_length == doctest::Approx(M_PI));
}

TEST_CASE("compact core invariant under truncation length") {
  const auto a = MetricGraph::build(preset_tadpole(2.0, 10.0)).compact_core();
  const auto b = MetricGraph::build(preset_tadpole(2.0, 30.0)).compact_core();
  CHECK(a.total_length == doctest::Approx(b.total_length));
}

TEST_CASE("path distance is a metric on random triples") {
  std::mt19937_64 rng(20240811);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const std::vector<MetricGraph> graphs = {MetricGraph::build(preset_interval(M_PI)),
                                           MetricGraph::build(preset_star(3, 20.0)),
                                           MetricGraph::build(preset_tadpole(2.0, 15.0))};
  for (const auto& g : graphs) {
    auto random_point = [&]() {
      const int e = static_cast<int>(unif(rng) * g.edges().size());
      return GraphPoint{e, unif(rng) * g.edge(e).length};
    };
    for (int i = 0; i < 1000; ++i) {
      const GraphPoint a = random_point(), b = random_point(), c = random_point();
      const double ab = g.path_distance(a, b);
      const double ba = g.path_distance(b, a);
      const double ac = g.path_distance(a, c);
      const double cb = g.path_distance(c, b);
      CHECK(ab == ba);               // symmetry, exact
      CHECK(ab <= ac + cb + 1e-12);  // triangle inequality
      CHECK(g.path_distance(a, a) == 0.0);
    }
  }
}

TEST_CASE("embedding: positions and closed loop") {
  const MetricGraph g = MetricGraph::build(preset_star(4, 10.0));
  const Vec2 tip = g.embed({0, 10.0});
  CHECK(tip.x == doctest::Approx(10.0));
  CHECK(tip.y == doctest::Approx(0.0));
  const Vec2 mid = g.embed({1, 5.0});  // leg at angle pi/2
  CHECK(mid.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(mid.y == doctest::Approx(5.0));

  const MetricGraph tad = MetricGraph::build(preset_tadpole(2.0, 15.0));
  const Vec2 a = tad.embed({0, 0.0});
  const Vec2 b = tad.embed({0, 2.0});
  CHECK(distance(a, b) < 1e-9);
}
