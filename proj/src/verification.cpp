#include "qgdirac/verification.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace qgdirac {

std::string OracleReport::format() const {
  std::ostringstream os;
  os << (pass ? "[ok]   " : "[FAIL] ") << name << "  samples " << samples << "  seed " << seed
     << "  worst margin " << worst_margin;
  if (!detail.empty()) os << "  (" << detail << ")";
  return os.str();
}

double lemma32_h(const Nonlinearity& nl, const Eigen::Vector2cd& u, const Eigen::Vector2cd& v,
                 double t) {
  const double au = u.norm();
  const Eigen::Vector2cd tv = t * u + v;
  const Complex dot = u.dot(t * t / 2.0 * u - 0.5 * u + t * v);  // conjugates u
  return nl.f(au) * dot.real() + nl.F(au) - nl.F(tv.norm());
}

OracleReport lemma32_scan(const Nonlinearity& nl, long n_samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  OracleReport rep;
  rep.name = "lemma32 scalar inequality h(t) < 0";
  rep.seed = seed;
  rep.samples = n_samples;
  double worst = -1e300;
  for (long i = 0; i < n_samples; ++i) {
    Eigen::Vector2cd u, v;
    // u may vanish (u = 0 is an admissible branch); v stays away from 0 so
    // the margin cannot degenerate toward the excluded boundary case.
    const double su = (unif(rng) < 0.05) ? 0.0 : 1.0;
    u << su * Complex(gauss(rng), gauss(rng)), su * Complex(gauss(rng), gauss(rng));
    v << Complex(gauss(rng), gauss(rng)), Complex(gauss(rng), gauss(rng));
    const double vn = v.norm();
    const double target = 0.1 + 2.9 * unif(rng);
    v *= target / vn;
    const double t = 1.0 + 4.0 * unif(rng);
    worst = std::max(worst, lemma32_h(nl, u, v, t));
  }
  rep.worst_margin = worst;
  rep.pass = worst < -1e-15;
  rep.detail = nl.describe();
  return rep;
}

std::vector<double> dispersion_interval(double length, double m, double c, int n_max) {
  const double mc2 = m * c * c;
  std::vector<double> out;
  out.push_back(mc2);
  for (int n = 1; n <= n_max; ++n) {
    const double k = n * M_PI / length;
    const double lam = std::sqrt(mc2 * mc2 + c * c * k * k);
    out.push_back(lam);
    out.push_back(-lam);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> dispersion_interval_discrete(double length, double m, double c, int n,
                                                 int n_max) {
  const double mc2 = m * c * c;
  const double h = length / n;
  std::vector<double> out;
  out.push_back(mc2);
  for (int j = 1; j <= n_max; ++j) {
    const double k = j * M_PI / length;
    const double kappa = 2.0 / h * std::sin(0.5 * k * h);
    const double lam = std::sqrt(mc2 * mc2 + c * c * kappa * kappa);
    out.push_back(lam);
    out.push_back(-lam);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Spinor random_spinor(const DiscreteOperator& op, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Spinor u(op.dim());
  for (int i = 0; i < op.dim(); ++i) u[i] = Complex(gauss(rng), gauss(rng));
  const double n = l2_norm(op, u);
  return u / n;
}

Spinor random_bandlimited_spinor(const EnergyContext& ctx, int band, std::uint64_t seed) {
  const auto& split = ctx.split();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(split.dim());
  // symmetric band around the gap
  const int p0 = split.first_nonneg;
  for (int j = 0; j < band; ++j) {
    if (p0 + j < split.dim()) c[p0 + j] = Complex(gauss(rng), gauss(rng));
    if (p0 - 1 - j >= 0) c[p0 - 1 - j] = Complex(gauss(rng), gauss(rng));
  }
  Spinor u = from_coeffs(ctx.op(), split, c);
  const double n = l2_norm(ctx.op(), u);
  return u / n;
}

OracleReport lemma21_scan(const EnergyContext& ctx, int n_samples, std::uint64_t seed) {
  OracleReport rep;
  rep.name = "lemma21 gap inequality mc^2 ||u||_2^2 <= ||u||^2";
  rep.seed = seed;
  rep.samples = n_samples;
  const double mc2 = ctx.mc2();
  double worst = 1e300;
  for (int i = 0; i < n_samples; ++i) {
    const Spinor u = random_spinor(ctx.op(), seed + 77777ULL * i);
    const double fn = form_norm(ctx.op(), ctx.split(), u);
    const double l2 = l2_norm(ctx.op(), u);
    const double margin = fn * fn - mc2 * l2 * l2;
    worst = std::min(worst, margin + 1e-10 * fn * fn);
  }
  rep.worst_margin = worst;
  rep.pass = worst >= 0.0;
  return rep;
}

GradientCheckReport gradient_check_energy(const EnergyContext& ctx, const FieldTerm& field,
                                          int n_pairs, const std::vector<double>& deltas,
                                          std::uint64_t seed) {
  GradientCheckReport out;
  out.report.name = "central-difference check of the energy gradient";
  out.report.seed = seed;
  out.report.samples = n_pairs * static_cast<long>(deltas.size());

  std::vector<double> err(deltas.size(), 0.0);
  double worst_rel = 0.0;
  for (int i = 0; i < n_pairs; ++i) {
    const Spinor u = random_bandlimited_spinor(ctx, 40, seed + 13ULL * i);
    const Spinor v = random_bandlimited_spinor(ctx, 40, seed + 13ULL * i + 7ULL);
    const GradientRep g = ctx.gradient(field, u);
    const double exact = g.action(ctx.op(), v);
    for (std::size_t d = 0; d < deltas.size(); ++d) {
      const double h = deltas[d];
      const double cd = (ctx.value(field, u + h * v) - ctx.value(field, u - h * v)) / (2.0 * h);
      const double e = std::abs(cd - exact);
      err[d] = std::max(err[d], e);
      if (d + 1 == deltas.size())
        worst_rel = std::max(worst_rel, e / std::max(1.0, std::abs(exact)));
    }
  }
  // observed order from the two extreme deltas
  const double h1 = deltas.front(), h2 = deltas.back();
  out.observed_order = std::log(err.front() / err.back()) / std::log(h1 / h2);
  out.worst_rel_error = worst_rel;
  out.report.worst_margin = out.observed_order;
  out.report.pass = out.observed_order >= 1.8 && out.observed_order <= 2.2;
  std::ostringstream os;
  os << "order " << out.observed_order << ", worst rel err " << worst_rel;
  out.report.detail = os.str();
  return out;
}

GradientCheckReport gradient_check_reduced(const EnergyContext& ctx, const FieldTerm& field,
                                           int n_dirs, const std::vector<double>& deltas,
                                           std::uint64_t seed, const SolverOptions& opts) {
  GradientCheckReport out;
  out.report.name = "central-difference check of the reduced tangent gradient";
  out.report.seed = seed;
  out.report.samples = n_dirs * static_cast<long>(deltas.size());

  SphereSolver solver(ctx, field, opts);
  const Eigen::VectorXcd w_hat = solver.seed_random(seed);
  const Spinor w = solver.synth_pos_unit(w_hat);
  const Spinor grad = reduced_grad(ctx, field, w, opts);

  const auto& split = ctx.split();
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<double> err(deltas.size(), 0.0);
  for (int i = 0; i < n_dirs; ++i) {
    // random Y+ direction, tangent-projected in the form metric
    Eigen::VectorXcd zc = Eigen::VectorXcd::Zero(split.dim());
    const int p0 = split.first_nonneg;
    const int band = std::min(30, split.n_positive());
    for (int j = 0; j < band; ++j) zc[p0 + j] = Complex(gauss(rng), gauss(rng)) / (1.0 + j);
    Spinor z = from_coeffs(ctx.op(), split, zc);
    // subtract the w component (form metric)
    const Eigen::VectorXcd wc = to_coeffs(ctx.op(), split, w);
    Complex inner(0.0, 0.0);
    double wn = 0.0;
    for (int k = p0; k < split.dim(); ++k) {
      inner += split.lambda[k] * std::conj(wc[k]) * zc[k];
      wn += split.lambda[k] * std::norm(wc[k]);
    }
    z -= (inner.real() / wn) * w;
    // normalize z in the form norm
    const double zn = form_norm(ctx.op(), split, z);
    z /= zn;

    double exact = 0.0;  // (grad, z)_Y
    {
      const Eigen::VectorXcd gc = to_coeffs(ctx.op(), split, grad);
      const Eigen::VectorXcd zc2 = to_coeffs(ctx.op(), split, z);
      for (int k = p0; k < split.dim(); ++k)
        exact += split.lambda[k] * (std::conj(gc[k]) * zc2[k]).real();
    }
    for (std::size_t d = 0; d < deltas.size(); ++d) {
      const double h = deltas[d];
      // the reduced functional is ray-invariant, so central differences along
      // the straight line through w probe the spherical derivative
      const double vp = reduced_value(ctx, field, ((w + h * z) / form_norm(ctx.op(), split, w + h * z)).eval(), opts);
      const double vm = reduced_value(ctx, field, ((w - h * z) / form_norm(ctx.op(), split, w - h * z)).eval(), opts);
      const double cd = (vp - vm) / (2.0 * h);
      err[d] = std::max(err[d], std::abs(cd - exact));
    }
  }
  const double h1 = deltas.front(), h2 = deltas.back();
  out.observed_order = std::log(err.front() / err.back()) / std::log(h1 / h2);
  out.worst_rel_error = err.back();
  out.report.worst_margin = out.observed_order;
  out.report.pass = out.observed_order >= 1.8 && out.observed_order <= 2.2;
  std::ostringstream os;
  os << "order " << out.observed_order << ", err(" << h2 << ") = " << err.back();
  out.report.detail = os.str();
  return out;
}

}  // namespace qgdirac
