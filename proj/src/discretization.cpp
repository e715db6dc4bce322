#include "qgdirac/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qgdirac {

namespace {

StaggeredGrid build_grid(const MetricGraph& g, const SolverParams& params) {
  StaggeredGrid grid;
  const auto& verts = g.vertices();
  grid.vertex_slot.assign(verts.size(), -1);

  int slot = 0;
  for (const auto& v : verts) {
    if (v.is_truncation_cap) continue;  // wall: no first-component DOF
    grid.vertex_slot[v.id] = slot++;
  }

  for (const auto& e : g.edges()) {
    StaggeredGrid::EdgeGrid eg;
    eg.edge = e.id;
    eg.n = static_cast<int>(std::llround(e.length / params.h_target));
    if (eg.n < 4)
      throw std::invalid_argument("edge " + std::to_string(e.id) +
                                  ": fewer than 4 grid intervals; refine h_target");
    eg.h = e.length / eg.n;
    eg.first_interior = slot;
    slot += eg.n - 1;
    eg.v0_slot = grid.vertex_slot[e.v0];
    eg.v1_slot = grid.vertex_slot[e.v1];
    grid.edges.push_back(eg);
  }
  grid.n_comp1 = slot;
  for (auto& eg : grid.edges) {
    eg.first_mid = slot;
    slot += eg.n;
  }
  grid.n_total = slot;
  grid.n_comp2 = grid.n_total - grid.n_comp1;

  grid.comp2.assign(grid.n_total, false);
  grid.site.assign(grid.n_total, GraphPoint{});
  for (const auto& eg : grid.edges) {
    const Edge& e = g.edge(eg.edge);
    for (int j = 1; j < eg.n; ++j)
      grid.site[eg.first_interior + j - 1] = GraphPoint{e.id, j * eg.h};
    for (int j = 0; j < eg.n; ++j) {
      grid.comp2[eg.first_mid + j] = true;
      grid.site[eg.first_mid + j] = GraphPoint{e.id, (j + 0.5) * eg.h};
    }
    if (eg.v0_slot >= 0) grid.site[eg.v0_slot] = GraphPoint{e.id, 0.0};
    if (eg.v1_slot >= 0) grid.site[eg.v1_slot] = GraphPoint{e.id, e.length};
  }
  grid.embedded_site.resize(grid.n_total);
  for (int i = 0; i < grid.n_total; ++i) grid.embedded_site[i] = g.embed(grid.site[i]);

  // Collocation stencils; a midpoint whose neighbor node is a wall passes its
  // full quadrature weight to the surviving node.
  grid.node_stencil.assign(grid.n_comp1, {});
  grid.mid_stencil.assign(grid.n_comp2, {});
  for (const auto& eg : grid.edges) {
    for (int i = 0; i < eg.n; ++i) {
      const int m = eg.first_mid + i;
      const int a = grid.comp1_slot_of_node(eg, i);
      const int b = grid.comp1_slot_of_node(eg, i + 1);
      const double half = 0.5 * eg.h;
      if (a >= 0 && b >= 0) {
        grid.node_stencil[a].mids.push_back(m);
        grid.node_stencil[a].w.push_back(half);
        grid.node_stencil[b].mids.push_back(m);
        grid.node_stencil[b].w.push_back(half);
      } else if (a >= 0) {
        grid.node_stencil[a].mids.push_back(m);
        grid.node_stencil[a].w.push_back(eg.h);
      } else if (b >= 0) {
        grid.node_stencil[b].mids.push_back(m);
        grid.node_stencil[b].w.push_back(eg.h);
      } else {
        throw std::logic_error("interval with two wall endpoints");
      }
    }
  }
  for (int j = 0; j < grid.n_comp1; ++j) {
    const auto& ns = grid.node_stencil[j];
    for (std::size_t k = 0; k < ns.mids.size(); ++k) {
      auto& ms = grid.mid_stencil[ns.mids[k] - grid.n_comp1];
      ms.nodes.push_back(j);
      ms.w.push_back(ns.w[k]);
    }
  }
  return grid;
}

}  // namespace

void DiscreteOperator::check_dim(const Spinor& u) const {
  if (u.size() != grid.n_total)
    throw std::invalid_argument("spinor dimension mismatch: " + std::to_string(u.size()) +
                                " vs " + std::to_string(grid.n_total));
}

DiscreteOperator assemble(const MetricGraph& g, const SolverParams& params) {
  params.check();
  DiscreteOperator op;
  op.graph = &g;
  op.params = params;
  op.grid = build_grid(g, params);
  const auto& grid = op.grid;
  const int n = grid.n_total;
  const double mc2 = params.mc2();
  const Complex ic(0.0, params.c);

  // Quadrature weights: trapezoid for component 1 (vertex slots collect the
  // half-interval weights of every incident edge end), midpoint rule for
  // component 2.
  op.Mdiag = Eigen::VectorXd::Zero(n);
  for (const auto& eg : grid.edges) {
    for (int j = 1; j < eg.n; ++j) op.Mdiag[eg.first_interior + j - 1] = eg.h;
    for (int j = 0; j < eg.n; ++j) op.Mdiag[eg.first_mid + j] = eg.h;
    if (eg.v0_slot >= 0) op.Mdiag[eg.v0_slot] += 0.5 * eg.h;
    if (eg.v1_slot >= 0) op.Mdiag[eg.v1_slot] += 0.5 * eg.h;
  }

  op.H = Eigen::MatrixXcd::Zero(n, n);
  for (int j = 0; j < grid.n_comp1; ++j) op.H(j, j) = Complex(mc2 * op.Mdiag[j], 0.0);
  for (const auto& eg : grid.edges) {
    for (int i = 0; i < eg.n; ++i) {
      const int m = eg.first_mid + i;
      op.H(m, m) = Complex(-mc2 * eg.h, 0.0);
      const int a = grid.comp1_slot_of_node(eg, i);
      const int b = grid.comp1_slot_of_node(eg, i + 1);
      if (a >= 0) {
        op.H(m, a) += ic;
        op.H(a, m) += -ic;
      }
      if (b >= 0) {
        op.H(m, b) += -ic;
        op.H(b, m) += ic;
      }
    }
  }

  op.Hreal.resize(n, n);
  for (int j = 0; j < n; ++j) {
    const Complex dj = grid.comp2[j] ? Complex(0.0, -1.0) : Complex(1.0, 0.0);
    for (int i = 0; i < n; ++i) {
      const Complex di = grid.comp2[i] ? Complex(0.0, -1.0) : Complex(1.0, 0.0);
      op.Hreal(i, j) = (std::conj(di) * op.H(i, j) * dj).real();
    }
  }
  return op;
}

Spinor DiscreteOperator::apply_H(const Spinor& u) const {
  check_dim(u);
  const int n = dim();
  Eigen::VectorXd re(n), im(n);
  for (int i = 0; i < n; ++i) {
    Complex ui = u[i];
    if (grid.comp2[i]) ui *= Complex(0.0, 1.0);  // gauge adjoint
    re[i] = ui.real();
    im[i] = ui.imag();
  }
  const Eigen::VectorXd yre = Hreal * re;
  const Eigen::VectorXd yim = Hreal * im;
  Spinor y(n);
  for (int i = 0; i < n; ++i) {
    Complex v(yre[i], yim[i]);
    if (grid.comp2[i]) v *= Complex(0.0, -1.0);
    y[i] = v;
  }
  return y;
}

SpectralSplit spectral_split(const DiscreteOperator& op, const SolverParams& params) {
  const int n = op.dim();
  const Eigen::MatrixXd& Hr = op.Hreal;
  const Eigen::VectorXd sq = op.Mdiag.cwiseSqrt();
  const Eigen::VectorXd isq = sq.cwiseInverse();
  Eigen::MatrixXd B = isq.asDiagonal() * Hr * isq.asDiagonal();
  // symmetrize against rounding in the scaling
  B = 0.5 * (B + B.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigensolver failed to converge");

  SpectralSplit split;
  split.lambda = es.eigenvalues();
  split.basis_real = isq.asDiagonal() * es.eigenvectors();

  // Generalized residuals per pair.
  Eigen::MatrixXd R = Hr * split.basis_real -
                      op.Mdiag.asDiagonal() * split.basis_real * split.lambda.asDiagonal();
  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    const double r = R.col(k).norm() / (std::abs(split.lambda[k]) + 1.0);
    worst = std::max(worst, r);
  }
  split.max_scaled_residual = worst;
  if (worst > params.eig_tol)
    throw std::runtime_error("eigensolver residual " + std::to_string(worst) +
                             " exceeds eig_tol");

  split.first_nonneg = static_cast<int>(
      std::lower_bound(split.lambda.data(), split.lambda.data() + n, 0.0) - split.lambda.data());
  return split;
}

Spinor SpectralSplit::eigenvector(const DiscreteOperator& op, int k) const {
  Spinor v(dim());
  for (int i = 0; i < dim(); ++i) {
    const double w = basis_real(i, k);
    v[i] = op.grid.comp2[i] ? Complex(0.0, -w) : Complex(w, 0.0);
  }
  return v;
}

Eigen::VectorXcd to_coeffs(const DiscreteOperator& op, const SpectralSplit& split,
                           const Spinor& u) {
  op.check_dim(u);
  const int n = op.dim();
  Eigen::VectorXd re(n), im(n);
  for (int i = 0; i < n; ++i) {
    Complex ui = u[i];
    if (op.grid.comp2[i]) ui *= Complex(0.0, 1.0);  // gauge adjoint
    re[i] = op.Mdiag[i] * ui.real();
    im[i] = op.Mdiag[i] * ui.imag();
  }
  const Eigen::VectorXd cre = split.basis_real.transpose() * re;
  const Eigen::VectorXd cim = split.basis_real.transpose() * im;
  Eigen::VectorXcd c(n);
  for (int k = 0; k < n; ++k) c[k] = Complex(cre[k], cim[k]);
  return c;
}

Spinor from_coeffs(const DiscreteOperator& op, const SpectralSplit& split,
                   const Eigen::VectorXcd& coeffs) {
  const int n = op.dim();
  if (coeffs.size() != n) throw std::invalid_argument("coefficient dimension mismatch");
  const Eigen::VectorXd yre = split.basis_real * coeffs.real();
  const Eigen::VectorXd yim = split.basis_real * coeffs.imag();
  Spinor u(n);
  for (int i = 0; i < n; ++i) {
    Complex v(yre[i], yim[i]);
    if (op.grid.comp2[i]) v *= Complex(0.0, -1.0);  // gauge
    u[i] = v;
  }
  return u;
}

Spinor project(const DiscreteOperator& op, const SpectralSplit& split, const Spinor& u,
               SpectralSign sign) {
  Eigen::VectorXcd c = to_coeffs(op, split, u);
  if (sign == SpectralSign::positive)
    c.head(split.first_nonneg).setZero();
  else
    c.tail(split.dim() - split.first_nonneg).setZero();
  return from_coeffs(op, split, c);
}

double form_norm(const DiscreteOperator& op, const SpectralSplit& split, const Spinor& u) {
  const Eigen::VectorXcd c = to_coeffs(op, split, u);
  double s = 0.0;
  for (int k = 0; k < split.dim(); ++k) s += std::abs(split.lambda[k]) * std::norm(c[k]);
  return std::sqrt(s);
}

Complex l2_inner(const DiscreteOperator& op, const Spinor& u, const Spinor& v) {
  op.check_dim(u);
  op.check_dim(v);
  Complex s(0.0, 0.0);
  for (int i = 0; i < op.dim(); ++i) s += op.Mdiag[i] * std::conj(u[i]) * v[i];
  return s;
}

double l2_norm(const DiscreteOperator& op, const Spinor& u) {
  return std::sqrt(std::max(0.0, l2_inner(op, u, u).real()));
}

Eigen::VectorXd collocated_sq_modulus(const DiscreteOperator& op, const Spinor& u) {
  op.check_dim(u);
  const auto& grid = op.grid;
  Eigen::VectorXd rho2(grid.n_comp1);
  for (int j = 0; j < grid.n_comp1; ++j) {
    double s = std::norm(u[j]);
    const auto& ns = grid.node_stencil[j];
    double acc = 0.0;
    for (std::size_t k = 0; k < ns.mids.size(); ++k) acc += ns.w[k] * std::norm(u[ns.mids[k]]);
    rho2[j] = s + acc / op.Mdiag[j];
  }
  return rho2;
}

double lp_norm(const DiscreteOperator& op, const Spinor& u, double p) {
  if (p < 2.0) throw std::invalid_argument("lp_norm requires p >= 2");
  const Eigen::VectorXd rho2 = collocated_sq_modulus(op, u);
  double s = 0.0;
  for (int j = 0; j < op.grid.n_comp1; ++j)
    s += op.Mdiag[j] * std::pow(rho2[j], 0.5 * p);
  return std::pow(s, 1.0 / p);
}

double h1_seminorm(const DiscreteOperator& op, const Spinor& u) {
  op.check_dim(u);
  const auto& grid = op.grid;
  double s = 0.0;
  for (const auto& eg : grid.edges) {
    for (int i = 0; i < eg.n; ++i) {
      const int a = grid.comp1_slot_of_node(eg, i);
      const int b = grid.comp1_slot_of_node(eg, i + 1);
      const Complex ua = (a >= 0) ? u[a] : Complex(0.0, 0.0);
      const Complex ub = (b >= 0) ? u[b] : Complex(0.0, 0.0);
      s += std::norm(ub - ua) / eg.h;
    }
    for (int i = 0; i + 1 < eg.n; ++i) {
      const int m0 = eg.first_mid + i;
      const int m1 = eg.first_mid + i + 1;
      s += std::norm(u[m1] - u[m0]) / eg.h;
    }
  }
  return std::sqrt(s);
}

}  // namespace qgdirac
