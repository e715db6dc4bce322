#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "qgdirac/metric_graph.hpp"
#include "qgdirac/model.hpp"

namespace qgdirac {

using Spinor = Eigen::VectorXcd;
using Complex = std::complex<double>;

// Staggered spinor grid: component 1 lives on integer nodes (vertex nodes
// shared across incident edges, which enforces the trace continuity
// condition exactly), component 2 on interval midpoints.  Truncation caps
// carry no component-1 slot: the first component vanishes at the artificial
// wall, so localized states are repelled from the truncation boundary and
// the truncation error decays in the leg length.  Regular degree-1 vertices
// (interval ends) keep their slot; there the missing outward midpoint
// realizes the natural second-component trace condition.
struct StaggeredGrid {
  struct EdgeGrid {
    int edge = -1;
    int n = 0;        // intervals
    double h = 0.0;   // length / n
    int first_interior = -1;  // comp-1 nodes j = 1 .. n-1, contiguous
    int first_mid = -1;       // midpoints j+1/2, j = 0 .. n-1, contiguous
    int v0_slot = -1;         // comp-1 slot of node 0 (-1 at a wall cap)
    int v1_slot = -1;         // comp-1 slot of node n (-1 at a wall cap)
  };

  std::vector<EdgeGrid> edges;
  std::vector<int> vertex_slot;  // per vertex id; -1 for truncation caps
  int n_total = 0;
  int n_comp1 = 0;
  int n_comp2 = 0;
  std::vector<bool> comp2;           // slot type
  std::vector<GraphPoint> site;      // DOF location on the graph
  std::vector<Vec2> embedded_site;   // cached embedding of `site`

  // Collocation of |u|^2 onto comp-1 nodes: for node slot j the second
  // component enters through the adjacent midpoints m with weights w_jm;
  // sum_j w_jm equals the midpoint quadrature weight h_m, so the collocated
  // L^2 sum reproduces the mass-matrix inner product exactly.
  struct NodeStencil {
    std::vector<int> mids;
    std::vector<double> w;
  };
  struct MidStencil {
    std::vector<int> nodes;
    std::vector<double> w;  // same weights, viewed from the midpoint
  };
  std::vector<NodeStencil> node_stencil;  // indexed by comp-1 slot
  std::vector<MidStencil> mid_stencil;    // indexed by comp-2 slot

  int comp1_slot_of_node(const EdgeGrid& eg, int j) const {
    if (j == 0) return eg.v0_slot;
    if (j == eg.n) return eg.v1_slot;
    return eg.first_interior + (j - 1);
  }
};

struct DiscreteOperator {
  const MetricGraph* graph = nullptr;
  SolverParams params;
  StaggeredGrid grid;
  Eigen::MatrixXcd H;      // Hermitian weak-form operator, weights absorbed
  Eigen::VectorXd Mdiag;   // diagonal quadrature mass matrix
  Eigen::MatrixXd Hreal;   // real symmetric gauge of H (second component
                           // rotated by i); used by the eigensolver and the
                           // hot matvec path

  int dim() const { return grid.n_total; }
  void check_dim(const Spinor& u) const;

  // H u through the real gauge, two real matvecs.
  Spinor apply_H(const Spinor& u) const;
};

DiscreteOperator assemble(const MetricGraph& g, const SolverParams& params);

struct SpectralSplit {
  Eigen::VectorXd lambda;        // ascending
  Eigen::MatrixXd basis_real;    // M-orthonormal eigenvectors, real gauge
  int first_nonneg = 0;          // index of first nonnegative eigenvalue
  double max_scaled_residual = 0.0;

  int dim() const { return static_cast<int>(lambda.size()); }
  int n_negative() const { return first_nonneg; }
  int n_positive() const { return dim() - first_nonneg; }

  // Complex eigenvector k (gauge applied).
  Spinor eigenvector(const DiscreteOperator& op, int k) const;
};

SpectralSplit spectral_split(const DiscreteOperator& op, const SolverParams& params);

// Coefficients on the M-orthonormal eigenbasis and back.
Eigen::VectorXcd to_coeffs(const DiscreteOperator& op, const SpectralSplit& split,
                           const Spinor& u);
Spinor from_coeffs(const DiscreteOperator& op, const SpectralSplit& split,
                   const Eigen::VectorXcd& coeffs);

enum class SpectralSign { positive, negative };

Spinor project(const DiscreteOperator& op, const SpectralSplit& split, const Spinor& u,
               SpectralSign sign);

double form_norm(const DiscreteOperator& op, const SpectralSplit& split, const Spinor& u);

Complex l2_inner(const DiscreteOperator& op, const Spinor& u, const Spinor& v);
double l2_norm(const DiscreteOperator& op, const Spinor& u);

// Collocated squared modulus |u|^2 at comp-1 nodes (see StaggeredGrid).
Eigen::VectorXd collocated_sq_modulus(const DiscreteOperator& op, const Spinor& u);

double lp_norm(const DiscreteOperator& op, const Spinor& u, double p);

// Discrete first-derivative seminorm built from staggered differences
// (component 1 at midpoints, component 2 at interior nodes).
double h1_seminorm(const DiscreteOperator& op, const Spinor& u);

}  // namespace qgdirac
