#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qgdirac/nehari.hpp"

namespace qgdirac {

struct BarycenterConfig {
  double r0 = 0.0;    // truncation radius of chi
  double rho0 = 0.0;  // separation radius around the minima
  std::vector<Vec2> minima;          // embedded well positions z_i
  std::vector<GraphPoint> minima_gp; // the same minima as graph points

  // Defaults: rho0 one third of the smallest pairwise separation, r0 twice
  // the largest |z_i|; requires disjoint rho0 balls inside the r0 ball.
  static BarycenterConfig from_minima(std::vector<Vec2> minima,
                                      std::vector<GraphPoint> minima_gp);
  void check() const;
};

// Radial truncation of the identity at radius r0 (1-Lipschitz).
Vec2 chi(const Vec2& x, double r0);

// Barycenter of |u|^2 under x -> chi(eps x) on embedded coordinates.
Vec2 barycenter_Q(const EnergyContext& ctx, double eps, const Spinor& u, double r0);

struct ConcentrationRow {
  double eps = 0.0;
  int well = 0;
  double level = 0.0;
  Vec2 Q;
  double dist = 0.0;       // |Q - z_i|
  double residual = 0.0;   // tangent residual of the sphere solve
  bool accepted = false;
  std::string reason;      // set when not accepted
  GraphPoint peak;         // argmax of the collocated |u| over nodes
  Spinor u;
};

struct ConcentrationRecord {
  double eps = 0.0;
  std::vector<ConcentrationRow> rows;  // one per well
  std::vector<std::vector<double>> pairwise_rel_l2;
};

// Seeds near well i, minimizes the reduced functional, and accepts the
// result only when converged with barycenter inside the rho0 ball of z_i.
ConcentrationRow localized_search(const EnergyContext& ctx, double eps, int well_index,
                                  const BarycenterConfig& bary, std::uint64_t seed,
                                  const SolverOptions& opts);

// Runs localized searches for every (eps, well) cell, eps descending.
std::vector<ConcentrationRecord> multiplicity_experiment(const EnergyContext& ctx,
                                                         const std::vector<double>& eps_list,
                                                         const BarycenterConfig& bary,
                                                         std::uint64_t seed,
                                                         const SolverOptions& opts);

double relative_l2_distance(const DiscreteOperator& op, const Spinor& a, const Spinor& b);

}  // namespace qgdirac
