#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qgdirac {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}
  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double a) const { return {a * x, a * y}; }
  double norm() const;
};

double distance(const Vec2& a, const Vec2& b);

struct Vertex {
  int id = -1;
  Vec2 position;
  bool is_truncation_cap = false;
};

// Edge carries an arclength coordinate running from `v0` (coordinate 0) to
// `v1` (coordinate `length`).  The embedding polyline has total arclength
// equal to `length`; for straight edges it is just the two endpoints.
struct Edge {
  int id = -1;
  int v0 = -1;
  int v1 = -1;
  double length = 0.0;
  bool was_half_line = false;
  std::vector<Vec2> polyline;
};

struct GraphPoint {
  int edge = 0;
  double s = 0.0;
  GraphPoint() = default;
  GraphPoint(int e, double s_) : edge(e), s(s_) {}
};

// Input description of a graph.  Half-line edges give an anchor vertex and a
// direction; build() replaces them by finite edges of length
// `truncation_length` ending in fresh degree-1 cap vertices.
struct GraphSpec {
  struct VertexSpec {
    Vec2 position;
  };
  struct EdgeSpec {
    int v0 = -1;
    int v1 = -1;          // ignored for half lines
    double length = 0.0;  // ignored for half lines
    bool half_line = false;
    Vec2 direction;                // half lines only; need not be normalized
    std::vector<Vec2> polyline;    // optional explicit embedding
  };
  std::vector<VertexSpec> vertices;
  std::vector<EdgeSpec> edges;
  double truncation_length = 20.0;
  GraphPoint origin{0, 0.0};
};

class MetricGraph {
 public:
  static MetricGraph build(const GraphSpec& spec);

  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int id) const { return edges_.at(id); }
  int degree(int vertex_id) const { return degrees_.at(vertex_id); }
  double truncation_length() const { return truncation_length_; }
  GraphPoint origin() const { return origin_; }

  // Shortest distance along the edges.
  double path_distance(const GraphPoint& a, const GraphPoint& b) const;

  struct CompactCore {
    std::vector<int> edge_ids;
    double total_length = 0.0;
  };
  CompactCore compact_core() const;

  // Embedded position of a graph point (piecewise linear along the polyline).
  Vec2 embed(const GraphPoint& p) const;

  void check_point(const GraphPoint& p) const;

 private:
  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::vector<int> degrees_;
  double truncation_length_ = 0.0;
  GraphPoint origin_;
  Eigen::MatrixXd vertex_dist_;  // all-pairs shortest vertex distances

  void finalize();
};

// Built-in presets.  `star` has `legs` half-lines joined at the origin,
// embedded as straight rays at equal angles; `interval` is a single finite
// edge on the x axis; `tadpole` is a loop attached to one half-line.
GraphSpec preset_interval(double length);
GraphSpec preset_star(int legs, double truncation_length);
GraphSpec preset_tadpole(double loop_length, double truncation_length);

}  // namespace qgdirac
