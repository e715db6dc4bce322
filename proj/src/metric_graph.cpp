#include "qgdirac/metric_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace qgdirac {

double Vec2::norm() const { return std::hypot(x, y); }

double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

namespace {

double polyline_length(const std::vector<Vec2>& pts) {
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) len += distance(pts[i - 1], pts[i]);
  return len;
}

// Circle through `anchor` with polyline arclength exactly `length`, used for
// loop edges without an explicit embedding.  The polygon radius is adjusted
// so the chord sum equals `length`.
std::vector<Vec2> loop_polyline(const Vec2& anchor, double length) {
  const int segments = 64;
  const double r = length / (2.0 * segments * std::sin(M_PI / segments));
  const Vec2 center{anchor.x, anchor.y + r};
  std::vector<Vec2> pts;
  pts.reserve(segments + 1);
  for (int k = 0; k <= segments; ++k) {
    const double a = -M_PI / 2.0 + 2.0 * M_PI * k / segments;
    pts.push_back({center.x + r * std::cos(a), center.y + r * std::sin(a)});
  }
  pts.front() = anchor;
  pts.back() = anchor;
  return pts;
}

}  // namespace

MetricGraph MetricGraph::build(const GraphSpec& spec) {
  if (spec.vertices.empty()) throw std::invalid_argument("graph spec has no vertices");
  MetricGraph g;
  g.truncation_length_ = spec.truncation_length;
  for (std::size_t i = 0; i < spec.vertices.size(); ++i) {
    g.vertices_.push_back(Vertex{static_cast<int>(i), spec.vertices[i].position, false});
  }

  for (const auto& es : spec.edges) {
    Edge e;
    e.id = static_cast<int>(g.edges_.size());
    if (es.v0 < 0 || es.v0 >= static_cast<int>(g.vertices_.size()))
      throw std::invalid_argument("edge references dangling vertex id " + std::to_string(es.v0));
    e.v0 = es.v0;
    if (es.half_line) {
      if (spec.truncation_length <= 0.0)
        throw std::invalid_argument("truncation length must be positive");
      const double dn = es.direction.norm();
      if (dn <= 0.0) throw std::invalid_argument("half line needs a direction");
      const Vec2 dir{es.direction.x / dn, es.direction.y / dn};
      Vertex cap;
      cap.id = static_cast<int>(g.vertices_.size());
      cap.position = g.vertices_[e.v0].position + dir * spec.truncation_length;
      cap.is_truncation_cap = true;
      g.vertices_.push_back(cap);
      e.v1 = cap.id;
      e.length = spec.truncation_length;
      e.was_half_line = true;
      e.polyline = {g.vertices_[e.v0].position, cap.position};
    } else {
      if (es.v1 < 0 || es.v1 >= static_cast<int>(g.vertices_.size()))
        throw std::invalid_argument("edge references dangling vertex id " + std::to_string(es.v1));
      if (!(es.length > 0.0) || !std::isfinite(es.length))
        throw std::invalid_argument("edge length must be positive and finite");
      e.v1 = es.v1;
      e.length = es.length;
      if (!es.polyline.empty()) {
        e.polyline = es.polyline;
      } else if (e.v0 == e.v1) {
        e.polyline = loop_polyline(g.vertices_[e.v0].position, e.length);
      } else {
        e.polyline = {g.vertices_[e.v0].position, g.vertices_[e.v1].position};
      }
      const double plen = polyline_length(e.polyline);
      if (std::abs(plen - e.length) > 1e-12 * std::max(1.0, e.length))
        throw std::invalid_argument("edge " + std::to_string(e.id) +
                                    ": polyline arclength differs from metric length");
    }
    g.edges_.push_back(std::move(e));
  }

  g.origin_ = spec.origin;
  g.finalize();
  g.check_point(g.origin_);
  return g;
}

void MetricGraph::finalize() {
  const int nv = static_cast<int>(vertices_.size());
  degrees_.assign(nv, 0);
  for (const auto& e : edges_) {
    degrees_[e.v0] += 1;
    degrees_[e.v1] += 1;  // a loop contributes 2 to its vertex
  }

  // Connectivity via BFS over edge incidence.
  std::vector<char> seen(nv, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  std::vector<std::vector<std::pair<int, double>>> adj(nv);
  for (const auto& e : edges_) {
    adj[e.v0].push_back({e.v1, e.length});
    adj[e.v1].push_back({e.v0, e.length});
  }
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (const auto& [w, len] : adj[v]) {
      (void)len;
      if (!seen[w]) {
        seen[w] = 1;
        q.push(w);
      }
    }
  }
  if (std::count(seen.begin(), seen.end(), 1) != nv)
    throw std::invalid_argument("graph is not connected");

  // All-pairs vertex distances (vertex counts are small).
  const double inf = std::numeric_limits<double>::infinity();
  vertex_dist_ = Eigen::MatrixXd::Constant(nv, nv, inf);
  for (int v = 0; v < nv; ++v) vertex_dist_(v, v) = 0.0;
  for (const auto& e : edges_) {
    vertex_dist_(e.v0, e.v1) = std::min(vertex_dist_(e.v0, e.v1), e.length);
    vertex_dist_(e.v1, e.v0) = std::min(vertex_dist_(e.v1, e.v0), e.length);
  }
  for (int k = 0; k < nv; ++k)
    for (int i = 0; i < nv; ++i)
      for (int j = 0; j < nv; ++j)
        vertex_dist_(i, j) = std::min(vertex_dist_(i, j), vertex_dist_(i, k) + vertex_dist_(k, j));
}

void MetricGraph::check_point(const GraphPoint& p) const {
  if (p.edge < 0 || p.edge >= static_cast<int>(edges_.size()))
    throw std::invalid_argument("invalid edge id " + std::to_string(p.edge));
  const double len = edges_[p.edge].length;
  if (p.s < -1e-12 || p.s > len + 1e-12)
    throw std::invalid_argument("arclength coordinate out of range");
}

double MetricGraph::path_distance(const GraphPoint& a, const GraphPoint& b) const {
  check_point(a);
  check_point(b);
  const Edge& ea = edges_[a.edge];
  const Edge& eb = edges_[b.edge];
  double best = std::numeric_limits<double>::infinity();
  if (a.edge == b.edge) best = std::abs(a.s - b.s);
  // Through-endpoint routes (covers loops and multi-edges).
  const double a_end[2] = {a.s, ea.length - a.s};
  const int a_v[2] = {ea.v0, ea.v1};
  const double b_end[2] = {b.s, eb.length - b.s};
  const int b_v[2] = {eb.v0, eb.v1};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      best = std::min(best, a_end[i] + vertex_dist_(a_v[i], b_v[j]) + b_end[j]);
  return best;
}

MetricGraph::CompactCore MetricGraph::compact_core() const {
  CompactCore core;
  for (const auto& e : edges_) {
    if (!e.was_half_line) {
      core.edge_ids.push_back(e.id);
      core.total_length += e.length;
    }
  }
  return core;
}

Vec2 MetricGraph::embed(const GraphPoint& p) const {
  check_point(p);
  const Edge& e = edges_[p.edge];
  double remaining = std::clamp(p.s, 0.0, e.length);
  for (std::size_t i = 1; i < e.polyline.size(); ++i) {
    const double seg = distance(e.polyline[i - 1], e.polyline[i]);
    if (remaining <= seg || i + 1 == e.polyline.size()) {
      const double t = (seg > 0.0) ? std::min(remaining / seg, 1.0) : 0.0;
      return e.polyline[i - 1] + (e.polyline[i] - e.polyline[i - 1]) * t;
    }
    remaining -= seg;
  }
  return e.polyline.back();
}

GraphSpec preset_interval(double length) {
  GraphSpec spec;
  spec.vertices = {{Vec2{0.0, 0.0}}, {Vec2{length, 0.0}}};
  GraphSpec::EdgeSpec e;
  e.v0 = 0;
  e.v1 = 1;
  e.length = length;
  spec.edges = {e};
  spec.truncation_length = length;  // unused, no half lines
  spec.origin = GraphPoint{0, 0.0};
  return spec;
}

GraphSpec preset_star(int legs, double truncation_length) {
  if (legs < 2) throw std::invalid_argument("star preset needs at least 2 legs");
  GraphSpec spec;
  spec.vertices = {{Vec2{0.0, 0.0}}};
  for (int j = 0; j < legs; ++j) {
    GraphSpec::EdgeSpec e;
    e.v0 = 0;
    e.half_line = true;
    const double ang = 2.0 * M_PI * j / legs;
    e.direction = Vec2{std::cos(ang), std::sin(ang)};
    spec.edges.push_back(e);
  }
  spec.truncation_length = truncation_length;
  spec.origin = GraphPoint{0, 0.0};
  return spec;
}

GraphSpec preset_tadpole(double loop_length, double truncation_length) {
  GraphSpec spec;
  spec.vertices = {{Vec2{0.0, 0.0}}};
  GraphSpec::EdgeSpec loop;
  loop.v0 = 0;
  loop.v1 = 0;
  loop.length = loop_length;
  spec.edges.push_back(loop);
  GraphSpec::EdgeSpec leg;
  leg.v0 = 0;
  leg.half_line = true;
  leg.direction = Vec2{0.0, -1.0};
  spec.edges.push_back(leg);
  spec.truncation_length = truncation_length;
  spec.origin = GraphPoint{0, 0.0};
  return spec;
}

}  // namespace qgdirac
