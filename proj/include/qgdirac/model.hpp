#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qgdirac/metric_graph.hpp"

namespace qgdirac {

struct SolverParams {
  double m = 1.0;
  double c = 1.0;
  double h_target = 0.1;
  double eig_tol = 1e-9;
  double mc2() const { return m * c * c; }
  void check() const;
};

// Superquadratic nonlinearity f with primitive F(t) = integral of f(s) s ds.
// Families: a single power f(t) = a t^{p-2}, or a sum of such terms.  The
// admissible theta in the superquadraticity bound theta*F <= f t^2 is the
// smallest exponent of the sum.
class Nonlinearity {
 public:
  static Nonlinearity pure_power(double p, double a = 1.0);
  static Nonlinearity power_sum(std::vector<double> p, std::vector<double> a);

  double f(double t) const;
  double F(double t) const;
  double fprime(double t) const;  // t > 0

  double theta() const { return theta_; }
  double p_max() const;
  double growth_c1() const;  // c1 with f(t) <= c1 (1 + t^{p_max-2})
  const std::vector<double>& exponents() const { return p_; }
  const std::vector<double>& coefficients() const { return a_; }
  std::string describe() const;

 private:
  std::vector<double> p_;
  std::vector<double> a_;
  double theta_ = 0.0;
};

struct Well {
  GraphPoint center;
  double depth = 0.0;  // A_i > 0
  double width = 1.0;  // s_i > 0
};

// External field V(x) = V_inf - sum_i A_i exp(-d(x, z_i)^2 / s_i^2), with d
// the graph path metric.  The scaled field V(eps x) is realized by dilating
// the well centers along their edges: d(eps x, z_i) = eps d(x, z_i/eps) on
// rays through the origin, so the field on the fixed grid is
// V_inf - sum_i A_i exp(-eps^2 d(x, Z_i(eps))^2 / s_i^2).
class Potential {
 public:
  Potential(double v_infty, std::vector<Well> wells);

  double value(const MetricGraph& g, const GraphPoint& x) const;
  double value_scaled(const MetricGraph& g, const GraphPoint& x, double eps) const;
  GraphPoint scaled_center(const MetricGraph& g, const Well& w, double eps) const;

  double v_infty() const { return v_infty_; }
  const std::vector<Well>& wells() const { return wells_; }

  // eps must keep every dilated well center on its edge with clearance for
  // the dilated width; throws otherwise.
  void check_scaling(const MetricGraph& g, double eps) const;

 private:
  double v_infty_ = 0.0;
  std::vector<Well> wells_;
};

struct ConditionResult {
  std::string name;
  bool pass = false;
  double worst_margin = 0.0;  // >= 0 means satisfied
  std::string detail;
};

struct ValidationReport {
  std::vector<ConditionResult> conditions;
  bool pass() const;
  std::string format() const;
};

// Margins for (f1)-(f2) over a sample grid on [0, t_max].  theta_override
// replaces the family's own theta in the (f2) check.
ValidationReport validate_f(const Nonlinearity& nl, double t_max, int n_samples,
                            std::optional<double> theta_override = std::nullopt);

struct PotentialReport {
  ValidationReport report;
  double v_min = 0.0;
  double v_max = 0.0;
  std::vector<GraphPoint> minima;  // detected equal-depth sampled minima
};

PotentialReport validate_V(const Potential& V, const MetricGraph& g, const SolverParams& params,
                           double sample_h);

struct Lemma22Constants {
  double A = 0.0;
  double B = 0.0;
  double theta = 0.0;
};

// A = F(1); B the smallest value >= A with F(t) >= A t^theta - B t^2 on the
// sample grid.
Lemma22Constants lemma22_constants(const Nonlinearity& nl, double t_max, int n_samples = 4096);

}  // namespace qgdirac
