#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qgdirac/energy.hpp"
#include "qgdirac/nehari.hpp"

namespace qgdirac {

// Brute-force oracles.  These deliberately avoid the implementation paths
// they check: the dispersion oracle is closed-form, the scalar-lemma scan
// works on C^2 samples, and the gradient checks use plain central
// differences of the energy values.
struct OracleReport {
  std::string name;
  std::uint64_t seed = 0;
  long samples = 0;
  double worst_margin = 0.0;  // >= 0 (resp. < 0 where stated) means pass
  bool pass = false;
  std::string detail;
  std::string format() const;
};

// h(t) of the scalar fiber inequality, evaluated from closed forms.
double lemma32_h(const Nonlinearity& nl, const Eigen::Vector2cd& u, const Eigen::Vector2cd& v,
                 double t);

// Randomized scan: h < 0 strictly away from the boundary case (t,v) = (1,0).
OracleReport lemma32_scan(const Nonlinearity& nl, long n_samples, std::uint64_t seed);

// Eigenvalues of the one-edge operator with vanishing second-component
// traces at both ends: {+mc^2} and +-sqrt(m^2 c^4 + c^2 (n pi / l)^2).
std::vector<double> dispersion_interval(double length, double m, double c, int n_max);

// Discrete counterpart of the dispersion relation for the staggered grid,
// with the reduced symbol kappa = (2/h) sin(k h / 2).
std::vector<double> dispersion_interval_discrete(double length, double m, double c, int n,
                                                 int n_max);

// Gap inequality mc^2 ||u||_L2^2 <= ||u||^2 over random spinors.
OracleReport lemma21_scan(const EnergyContext& ctx, int n_samples, std::uint64_t seed);

struct GradientCheckReport {
  OracleReport report;
  double observed_order = 0.0;
  double worst_rel_error = 0.0;
};

// Central-difference validation of the energy gradient; the observed
// Richardson order over the given deltas should be close to 2.
GradientCheckReport gradient_check_energy(const EnergyContext& ctx, const FieldTerm& field,
                                          int n_pairs, const std::vector<double>& deltas,
                                          std::uint64_t seed);

// Same for the reduced tangent gradient on the unit sphere of Y+.
GradientCheckReport gradient_check_reduced(const EnergyContext& ctx, const FieldTerm& field,
                                           int n_dirs, const std::vector<double>& deltas,
                                           std::uint64_t seed, const SolverOptions& opts);

// Random spinor with unit L2 norm (used by several scans and tests).
Spinor random_spinor(const DiscreteOperator& op, std::uint64_t seed);

// Random smooth (band-limited) spinor built from the lowest eigenmodes.
Spinor random_bandlimited_spinor(const EnergyContext& ctx, int band, std::uint64_t seed);

}  // namespace qgdirac
