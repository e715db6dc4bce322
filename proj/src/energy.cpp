#include "qgdirac/energy.hpp"

#include <cmath>
#include <stdexcept>

namespace qgdirac {

EnergyContext::EnergyContext(const MetricGraph& g, const DiscreteOperator& op,
                             const SpectralSplit& split, Nonlinearity nl,
                             std::optional<Potential> V)
    : graph_(&g), op_(&op), split_(&split), nl_(std::move(nl)), pot_(std::move(V)) {}

Eigen::VectorXd EnergyContext::field_diag(const Eigen::VectorXd& node_values) const {
  const auto& grid = op_->grid;
  Eigen::VectorXd q = Eigen::VectorXd::Zero(grid.n_total);
  for (int j = 0; j < grid.n_comp1; ++j) {
    q[j] = op_->Mdiag[j] * node_values[j];
    const auto& ns = grid.node_stencil[j];
    for (std::size_t k = 0; k < ns.mids.size(); ++k) q[ns.mids[k]] += ns.w[k] * node_values[j];
  }
  return q;
}

FieldTerm EnergyContext::constant_field(double lambda) const {
  if (std::abs(lambda) >= mc2())
    throw std::invalid_argument("|lambda| must be below mc^2");
  FieldTerm f;
  f.kind = FieldTerm::Kind::constant_lambda;
  f.value = lambda;
  f.node_values = Eigen::VectorXd::Constant(op_->grid.n_comp1, lambda);
  f.q = lambda * op_->Mdiag;  // collocated quadrature of a constant is exact
  return f;
}

FieldTerm EnergyContext::external_field(double eps) const {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (!pot_) throw std::invalid_argument("no potential configured");
  pot_->check_scaling(*graph_, eps);
  FieldTerm f;
  f.kind = FieldTerm::Kind::external;
  f.value = eps;
  const auto& grid = op_->grid;
  f.node_values.resize(grid.n_comp1);
  for (int j = 0; j < grid.n_comp1; ++j)
    f.node_values[j] = pot_->value_scaled(*graph_, grid.site[j], eps);
  f.q = field_diag(f.node_values);
  return f;
}

double EnergyContext::quadratic_part(const Spinor& u) const {
  const Spinor Hu = op_->apply_H(u);
  double s = 0.0;
  for (int i = 0; i < op_->dim(); ++i) s += (std::conj(u[i]) * Hu[i]).real();
  return 0.5 * s;
}

double EnergyContext::nonlinear_part(const Spinor& u) const {
  const Eigen::VectorXd rho2 = collocated_sq_modulus(*op_, u);
  double s = 0.0;
  for (int j = 0; j < op_->grid.n_comp1; ++j)
    s += op_->Mdiag[j] * nl_.F(std::sqrt(rho2[j]));
  return s;
}

double EnergyContext::field_part(const FieldTerm& field, const Spinor& u) const {
  double s = 0.0;
  for (int i = 0; i < op_->dim(); ++i) s += field.q[i] * std::norm(u[i]);
  return 0.5 * s;
}

double EnergyContext::value(const FieldTerm& field, const Spinor& u) const {
  op_->check_dim(u);
  return quadratic_part(u) + field_part(field, u) - nonlinear_part(u);
}

double EnergyContext::value_and_gradient(const FieldTerm& field, const Spinor& u,
                                         Spinor& riesz) const {
  op_->check_dim(u);
  const auto& grid = op_->grid;
  const Spinor Hu = op_->apply_H(u);

  double quad = 0.0;
  for (int i = 0; i < op_->dim(); ++i) quad += (std::conj(u[i]) * Hu[i]).real();
  quad *= 0.5;

  double fieldv = 0.0;
  for (int i = 0; i < op_->dim(); ++i) fieldv += field.q[i] * std::norm(u[i]);
  fieldv *= 0.5;

  const Eigen::VectorXd rho2 = collocated_sq_modulus(*op_, u);
  Eigen::VectorXd fval(grid.n_comp1);
  double nonl = 0.0;
  for (int j = 0; j < grid.n_comp1; ++j) {
    const double rho = std::sqrt(rho2[j]);
    fval[j] = nl_.f(rho);
    nonl += op_->Mdiag[j] * nl_.F(rho);
  }

  riesz.resize(op_->dim());
  for (int i = 0; i < op_->dim(); ++i)
    riesz[i] = Hu[i] / op_->Mdiag[i] + (field.q[i] / op_->Mdiag[i]) * u[i];
  for (int j = 0; j < grid.n_comp1; ++j) {
    riesz[j] -= fval[j] * u[j];
    const auto& ns = grid.node_stencil[j];
    for (std::size_t k = 0; k < ns.mids.size(); ++k) {
      const int m = ns.mids[k];
      riesz[m] -= (ns.w[k] * fval[j] / op_->Mdiag[m]) * u[m];
    }
  }
  return quad + fieldv - nonl;
}

GradientRep EnergyContext::gradient(const FieldTerm& field, const Spinor& u) const {
  GradientRep g;
  value_and_gradient(field, u, g.riesz);
  return g;
}

double J_lambda(const EnergyContext& ctx, double lambda, const Spinor& u) {
  return ctx.value(ctx.constant_field(lambda), u);
}

double I_eps(const EnergyContext& ctx, double eps, const Spinor& u) {
  return ctx.value(ctx.external_field(eps), u);
}

Workspace Workspace::make(const GraphSpec& gspec, const SolverParams& params, Nonlinearity nl,
                          std::optional<Potential> V) {
  Workspace ws;
  ws.graph = std::make_unique<MetricGraph>(MetricGraph::build(gspec));
  ws.op = std::make_unique<DiscreteOperator>(assemble(*ws.graph, params));
  ws.split = std::make_unique<SpectralSplit>(spectral_split(*ws.op, params));
  ws.ctx = std::make_unique<EnergyContext>(*ws.graph, *ws.op, *ws.split, std::move(nl),
                                           std::move(V));
  return ws;
}

}  // namespace qgdirac
