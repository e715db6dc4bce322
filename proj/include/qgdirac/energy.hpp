#pragma once

#include <memory>
#include <optional>

#include "qgdirac/discretization.hpp"
#include "qgdirac/model.hpp"

namespace qgdirac {

// Selects the quadratic field of the functional: J_lambda uses a constant
// lambda, I_eps samples the scaled external field V(eps x) on the grid.
struct FieldTerm {
  enum class Kind { constant_lambda, external };
  Kind kind = Kind::constant_lambda;
  double value = 0.0;  // lambda or eps
  // Per-slot diagonal weights q_i of the quadratic form u -> sum q_i |u_i|^2,
  // equal to the collocated node quadrature of V |u|^2.
  Eigen::VectorXd q;
  // Field sampled at comp-1 node sites (matches the collocation rule).
  Eigen::VectorXd node_values;
};

struct GradientRep {
  Spinor riesz;  // Riesz vector of the derivative in the Mdiag inner product
  double action(const DiscreteOperator& op, const Spinor& v) const {
    return l2_inner(op, riesz, v).real();
  }
};

// Immutable evaluation context for one (graph, operator, split, model)
// tuple.  All evaluations are pure; FieldTerm objects are prepared up front
// so concurrent workers never mutate shared state.
class EnergyContext {
 public:
  EnergyContext(const MetricGraph& g, const DiscreteOperator& op, const SpectralSplit& split,
                Nonlinearity nl, std::optional<Potential> V);

  const MetricGraph& graph() const { return *graph_; }
  const DiscreteOperator& op() const { return *op_; }
  const SpectralSplit& split() const { return *split_; }
  const Nonlinearity& nonlinearity() const { return nl_; }
  const std::optional<Potential>& potential() const { return pot_; }
  double mc2() const { return op_->params.mc2(); }

  FieldTerm constant_field(double lambda) const;
  FieldTerm external_field(double eps) const;

  // Value of J_lambda / I_eps.
  double value(const FieldTerm& field, const Spinor& u) const;
  // Riesz gradient: M^{-1} H u + field part - nonlinear part.
  GradientRep gradient(const FieldTerm& field, const Spinor& u) const;
  // Value and gradient in one pass (shares the H matvec).
  double value_and_gradient(const FieldTerm& field, const Spinor& u, Spinor& riesz) const;

  double quadratic_part(const Spinor& u) const;       // 1/2 (||u+||^2 - ||u-||^2)
  double nonlinear_part(const Spinor& u) const;       // integral of F(|u|)
  double field_part(const FieldTerm& field, const Spinor& u) const;

 private:
  const MetricGraph* graph_;
  const DiscreteOperator* op_;
  const SpectralSplit* split_;
  Nonlinearity nl_;
  std::optional<Potential> pot_;

  Eigen::VectorXd field_diag(const Eigen::VectorXd& node_values) const;
};

double J_lambda(const EnergyContext& ctx, double lambda, const Spinor& u);
double I_eps(const EnergyContext& ctx, double eps, const Spinor& u);

// Convenience owner bundling a graph, operator, split and context; the heavy
// spectral factorization happens once here.  Members live behind unique_ptr
// so the cross-references stay valid when the workspace is moved.
struct Workspace {
  std::unique_ptr<MetricGraph> graph;
  std::unique_ptr<DiscreteOperator> op;
  std::unique_ptr<SpectralSplit> split;
  std::unique_ptr<EnergyContext> ctx;

  static Workspace make(const GraphSpec& gspec, const SolverParams& params, Nonlinearity nl,
                        std::optional<Potential> V);
};

}  // namespace qgdirac
