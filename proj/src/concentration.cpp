#include "qgdirac/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qgdirac/parallel.hpp"

namespace qgdirac {

BarycenterConfig BarycenterConfig::from_minima(std::vector<Vec2> minima,
                                               std::vector<GraphPoint> minima_gp) {
  if (minima.empty() || minima.size() != minima_gp.size())
    throw std::invalid_argument("barycenter config needs matching minima lists");
  BarycenterConfig cfg;
  cfg.minima = std::move(minima);
  cfg.minima_gp = std::move(minima_gp);
  double rmax = 0.0;
  for (const auto& z : cfg.minima) rmax = std::max(rmax, z.norm());
  cfg.r0 = std::max(1.0, 2.0 * rmax);
  double sep = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cfg.minima.size(); ++i)
    for (std::size_t j = i + 1; j < cfg.minima.size(); ++j)
      sep = std::min(sep, distance(cfg.minima[i], cfg.minima[j]));
  cfg.rho0 = std::isfinite(sep) ? sep / 3.0 : cfg.r0 / 2.0;
  cfg.check();
  return cfg;
}

void BarycenterConfig::check() const {
  if (!(r0 > 0.0) || !(rho0 > 0.0)) throw std::invalid_argument("r0 and rho0 must be positive");
  for (std::size_t i = 0; i < minima.size(); ++i) {
    if (minima[i].norm() + rho0 > r0 + 1e-12)
      throw std::invalid_argument("rho0 ball around a minimum leaves the r0 ball");
    for (std::size_t j = i + 1; j < minima.size(); ++j)
      if (distance(minima[i], minima[j]) <= 2.0 * rho0 - 1e-12)
        throw std::invalid_argument("rho0 balls around distinct minima overlap");
  }
}

Vec2 chi(const Vec2& x, double r0) {
  if (!(r0 > 0.0)) throw std::invalid_argument("r0 must be positive");
  const double n = x.norm();
  if (n <= r0) return x;
  return x * (r0 / n);
}

Vec2 barycenter_Q(const EnergyContext& ctx, double eps, const Spinor& u, double r0) {
  const auto& op = ctx.op();
  const auto& grid = op.grid;
  const Eigen::VectorXd rho2 = collocated_sq_modulus(op, u);
  double mass = 0.0;
  Vec2 acc{0.0, 0.0};
  for (int j = 0; j < grid.n_comp1; ++j) {
    const double w = op.Mdiag[j] * rho2[j];
    const Vec2 cx = chi(grid.embedded_site[j] * eps, r0);
    acc = acc + cx * w;
    mass += w;
  }
  if (!(mass > 0.0)) throw std::invalid_argument("barycenter of the zero spinor");
  return acc * (1.0 / mass);
}

double relative_l2_distance(const DiscreteOperator& op, const Spinor& a, const Spinor& b) {
  const double na = l2_norm(op, a);
  const double nb = l2_norm(op, b);
  const double d = l2_norm(op, (a - b).eval());
  return d / std::max(na, nb);
}

ConcentrationRow localized_search(const EnergyContext& ctx, double eps, int well_index,
                                  const BarycenterConfig& bary, std::uint64_t seed,
                                  const SolverOptions& opts) {
  if (!ctx.potential()) throw std::invalid_argument("localized search needs a potential");
  const auto& wells = ctx.potential()->wells();
  if (well_index < 0 || well_index >= static_cast<int>(wells.size()))
    throw std::invalid_argument("well index out of range");
  ctx.potential()->check_scaling(ctx.graph(), eps);

  const FieldTerm field = ctx.external_field(eps);
  SphereSolver solver(ctx, field, opts);

  const Well& well = wells[well_index];
  const GraphPoint z_eps = ctx.potential()->scaled_center(ctx.graph(), well, eps);
  const double width = std::max(1.5 / ctx.mc2(), 0.5 * well.width / eps);
  const Eigen::VectorXcd w0 = solver.seed_localized(z_eps, width);
  (void)seed;  // the localized seed is deterministic; kept for interface symmetry

  const GroundState gs = solver.minimize(w0);

  ConcentrationRow row;
  row.eps = eps;
  row.well = well_index;
  row.level = gs.level;
  row.residual = gs.tangent_residual;
  row.u = gs.point.u;
  row.Q = barycenter_Q(ctx, eps, gs.point.u, bary.r0);
  row.dist = distance(row.Q, bary.minima[well_index]);

  const Eigen::VectorXd rho2 = collocated_sq_modulus(ctx.op(), gs.point.u);
  int jmax = 0;
  for (int j = 1; j < ctx.op().grid.n_comp1; ++j)
    if (rho2[j] > rho2[jmax]) jmax = j;
  row.peak = ctx.op().grid.site[jmax];

  if (!gs.converged) {
    row.accepted = false;
    row.reason = "solver did not converge";
  } else if (row.dist >= bary.rho0) {
    row.accepted = false;
    row.reason = "barycenter converged outside the rho0 ball";
  } else {
    row.accepted = true;
  }
  return row;
}

std::vector<ConcentrationRecord> multiplicity_experiment(const EnergyContext& ctx,
                                                         const std::vector<double>& eps_list,
                                                         const BarycenterConfig& bary,
                                                         std::uint64_t seed,
                                                         const SolverOptions& opts) {
  std::vector<double> eps_sorted = eps_list;
  std::sort(eps_sorted.begin(), eps_sorted.end(), std::greater<double>());
  const int k = static_cast<int>(bary.minima.size());

  std::vector<ConcentrationRecord> records(eps_sorted.size());
  const int cells = static_cast<int>(eps_sorted.size()) * k;
  std::vector<ConcentrationRow> rows(cells);
  parallel_for_index(cells, [&](int cell) {
    const int e = cell / k;
    const int i = cell % k;
    rows[cell] = localized_search(ctx, eps_sorted[e], i, bary, seed + cell, opts);
  });

  for (std::size_t e = 0; e < eps_sorted.size(); ++e) {
    ConcentrationRecord rec;
    rec.eps = eps_sorted[e];
    for (int i = 0; i < k; ++i) rec.rows.push_back(rows[e * k + i]);
    rec.pairwise_rel_l2.assign(k, std::vector<double>(k, 0.0));
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        if (i != j)
          rec.pairwise_rel_l2[i][j] =
              relative_l2_distance(ctx.op(), rec.rows[i].u, rec.rows[j].u);
    records[e] = std::move(rec);
  }
  return records;
}

}  // namespace qgdirac
