#include "qgdirac/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace qgdirac {

void SolverParams::check() const {
  if (!(m > 0.0)) throw std::invalid_argument("mass m must be positive");
  if (!(c > 0.0)) throw std::invalid_argument("speed of light c must be positive");
  if (!(h_target > 0.0)) throw std::invalid_argument("grid spacing h_target must be positive");
  if (!(eig_tol > 0.0)) throw std::invalid_argument("eig_tol must be positive");
}

Nonlinearity Nonlinearity::pure_power(double p, double a) {
  return power_sum({p}, {a});
}

Nonlinearity Nonlinearity::power_sum(std::vector<double> p, std::vector<double> a) {
  if (p.empty() || p.size() != a.size())
    throw std::invalid_argument("nonlinearity needs matching exponent/coefficient lists");
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] > 2.0)) throw std::invalid_argument("nonlinearity exponents must exceed 2");
    if (!(a[i] > 0.0)) throw std::invalid_argument("nonlinearity coefficients must be positive");
  }
  Nonlinearity nl;
  nl.p_ = std::move(p);
  nl.a_ = std::move(a);
  nl.theta_ = *std::min_element(nl.p_.begin(), nl.p_.end());
  return nl;
}

double Nonlinearity::f(double t) const {
  if (t < 0.0) throw std::invalid_argument("f evaluated at negative argument");
  double v = 0.0;
  for (std::size_t i = 0; i < p_.size(); ++i) v += a_[i] * std::pow(t, p_[i] - 2.0);
  return v;
}

double Nonlinearity::F(double t) const {
  if (t < 0.0) throw std::invalid_argument("F evaluated at negative argument");
  double v = 0.0;
  for (std::size_t i = 0; i < p_.size(); ++i) v += a_[i] * std::pow(t, p_[i]) / p_[i];
  return v;
}

double Nonlinearity::fprime(double t) const {
  if (!(t > 0.0)) throw std::invalid_argument("f' evaluated at nonpositive argument");
  double v = 0.0;
  for (std::size_t i = 0; i < p_.size(); ++i)
    v += a_[i] * (p_[i] - 2.0) * std::pow(t, p_[i] - 3.0);
  return v;
}

double Nonlinearity::p_max() const { return *std::max_element(p_.begin(), p_.end()); }

double Nonlinearity::growth_c1() const {
  // f(t) = sum a_i t^{p_i-2} <= (sum a_i)(1 + t^{p_max-2}) for t >= 0.
  double s = 0.0;
  for (double a : a_) s += a;
  return s;
}

std::string Nonlinearity::describe() const {
  std::ostringstream os;
  os << "f(t) = ";
  for (std::size_t i = 0; i < p_.size(); ++i) {
    if (i) os << " + ";
    os << a_[i] << " t^" << (p_[i] - 2.0);
  }
  os << "  (theta = " << theta_ << ")";
  return os.str();
}

Potential::Potential(double v_infty, std::vector<Well> wells)
    : v_infty_(v_infty), wells_(std::move(wells)) {
  for (const auto& w : wells_) {
    if (!(w.depth > 0.0)) throw std::invalid_argument("well depth must be positive");
    if (!(w.width > 0.0)) throw std::invalid_argument("well width must be positive");
  }
}

double Potential::value(const MetricGraph& g, const GraphPoint& x) const {
  double v = v_infty_;
  for (const auto& w : wells_) {
    const double d = g.path_distance(x, w.center);
    v -= w.depth * std::exp(-(d * d) / (w.width * w.width));
  }
  return v;
}

GraphPoint Potential::scaled_center(const MetricGraph& g, const Well& w, double eps) const {
  GraphPoint z = w.center;
  z.s = w.center.s / eps;
  if (z.s > g.edge(z.edge).length + 1e-12)
    throw std::invalid_argument("scaled well center leaves its edge; increase truncation length "
                                "or eps");
  return z;
}

double Potential::value_scaled(const MetricGraph& g, const GraphPoint& x, double eps) const {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  double v = v_infty_;
  for (const auto& w : wells_) {
    const GraphPoint z = scaled_center(g, w, eps);
    const double d = eps * g.path_distance(x, z);
    v -= w.depth * std::exp(-(d * d) / (w.width * w.width));
  }
  return v;
}

void Potential::check_scaling(const MetricGraph& g, double eps) const {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  for (const auto& w : wells_) {
    const GraphPoint z = scaled_center(g, w, eps);
    const double clearance = g.edge(z.edge).length - z.s;
    if (clearance < w.width / eps)
      throw std::invalid_argument(
          "truncation too short for eps: dilated well has no clearance before the cap");
    if (eps * g.truncation_length() < 2.0 * w.width)
      throw std::invalid_argument("eps * truncation_length must exceed the well widths");
  }
}

bool ValidationReport::pass() const {
  return std::all_of(conditions.begin(), conditions.end(),
                     [](const ConditionResult& c) { return c.pass; });
}

std::string ValidationReport::format() const {
  std::ostringstream os;
  for (const auto& c : conditions) {
    os << (c.pass ? "[ok]   " : "[FAIL] ") << c.name << "  worst margin " << c.worst_margin;
    if (!c.detail.empty()) os << "  (" << c.detail << ")";
    os << "\n";
  }
  return os.str();
}

ValidationReport validate_f(const Nonlinearity& nl, double t_max, int n_samples,
                            std::optional<double> theta_override) {
  if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
  const double theta = theta_override.value_or(nl.theta());
  const double c1 = nl.growth_c1();
  const double pmax = nl.p_max();
  const double tol = 1e-12;

  ValidationReport rep;
  ConditionResult zero{"f(0) = 0", true, 0.0, ""};
  zero.worst_margin = -std::abs(nl.f(0.0));
  zero.pass = std::abs(nl.f(0.0)) <= tol;
  rep.conditions.push_back(zero);

  ConditionResult nonneg{"f >= 0", true, std::numeric_limits<double>::infinity(), ""};
  ConditionResult mono{"f' >= 0 on (0, t_max]", true, std::numeric_limits<double>::infinity(), ""};
  ConditionResult growth{"f(t) <= c1 (1 + t^{p-2})", true,
                         std::numeric_limits<double>::infinity(), ""};
  ConditionResult super{"theta F(t) <= f(t) t^2", true, std::numeric_limits<double>::infinity(),
                        "theta = " + std::to_string(theta)};
  ConditionResult pos{"F(t) > 0 for t > 0", true, std::numeric_limits<double>::infinity(), ""};

  for (int i = 1; i <= n_samples; ++i) {
    const double t = t_max * static_cast<double>(i) / n_samples;
    const double ft = nl.f(t);
    const double Ft = nl.F(t);
    nonneg.worst_margin = std::min(nonneg.worst_margin, ft);
    mono.worst_margin = std::min(mono.worst_margin, nl.fprime(t));
    growth.worst_margin = std::min(growth.worst_margin,
                                   c1 * (1.0 + std::pow(t, pmax - 2.0)) - ft);
    // relative margin: the equality case theta = p must survive rounding
    super.worst_margin = std::min(super.worst_margin,
                                  (ft * t * t - theta * Ft) / std::max(1.0, ft * t * t));
    pos.worst_margin = std::min(pos.worst_margin, Ft);
  }
  for (ConditionResult* c : {&nonneg, &mono, &growth, &super, &pos}) {
    c->pass = c->worst_margin >= -tol;
    rep.conditions.push_back(*c);
  }
  return rep;
}

PotentialReport validate_V(const Potential& V, const MetricGraph& g, const SolverParams& params,
                           double sample_h) {
  params.check();
  if (!(sample_h > 0.0)) throw std::invalid_argument("sample spacing must be positive");
  PotentialReport out;
  const double mc2 = params.mc2();

  struct Sample {
    GraphPoint p;
    double v;
  };
  std::vector<Sample> samples;
  for (const auto& e : g.edges()) {
    const int n = std::max(2, static_cast<int>(std::ceil(e.length / sample_h)));
    for (int i = 0; i <= n; ++i) {
      const GraphPoint p{e.id, e.length * i / n};
      samples.push_back({p, V.value(g, p)});
    }
  }
  double vmin = samples.front().v, vmax = samples.front().v;
  for (const auto& s : samples) {
    vmin = std::min(vmin, s.v);
    vmax = std::max(vmax, s.v);
  }
  out.v_min = vmin;
  out.v_max = vmax;

  ConditionResult lower{"V > -mc^2", vmin - (-mc2) > 0.0, vmin + mc2, ""};
  ConditionResult upper{"V <= V_inf < mc^2", mc2 - V.v_infty() > 0.0 && vmax <= V.v_infty() + 1e-12,
                        mc2 - vmax, ""};
  out.report.conditions.push_back(lower);
  out.report.conditions.push_back(upper);

  // Equal-depth sampled minima: within tolerance of the global sampled
  // minimum, deduplicated by path distance.
  const double depth_tol = 1e-6 * std::max(1.0, std::abs(vmin)) + 1e-9;
  for (const auto& s : samples) {
    if (s.v <= vmin + depth_tol) {
      bool dup = false;
      for (const auto& z : out.minima)
        if (g.path_distance(z, s.p) < 4.0 * sample_h) dup = true;
      if (!dup) out.minima.push_back(s.p);
    }
  }
  ConditionResult wells{"equal-depth minima detected", !out.minima.empty(),
                        static_cast<double>(out.minima.size()),
                        "k = " + std::to_string(out.minima.size())};
  out.report.conditions.push_back(wells);
  return out;
}

Lemma22Constants lemma22_constants(const Nonlinearity& nl, double t_max, int n_samples) {
  if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
  Lemma22Constants k;
  k.theta = nl.theta();
  k.A = nl.F(1.0);
  if (!(k.A > 0.0)) throw std::invalid_argument("F(1) must be positive");
  double B = k.A;
  for (int i = 1; i <= n_samples; ++i) {
    const double t = t_max * static_cast<double>(i) / n_samples;
    const double need = (k.A * std::pow(t, k.theta) - nl.F(t)) / (t * t);
    B = std::max(B, need);
  }
  if (!std::isfinite(B))
    throw std::runtime_error("lemma22_constants: inequality unsatisfiable on grid");
  k.B = B;
  return k;
}

}  // namespace qgdirac
