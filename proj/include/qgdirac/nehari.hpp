#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "qgdirac/energy.hpp"

namespace qgdirac {

struct SolverOptions {
  double tol_fiber = 1e-10;
  double tol_sphere = 1e-8;
  double tol_nehari = 1e-7;
  int max_iter_fiber = 500;
  int max_iter_sphere = 2000;
  int neg_band = 0;   // 0 = full negative basis
  int seed_band = 30; // positive modes used by random starts
  double t_min = 1e-10;
  double t_max = 1e8;
};

struct FiberUnboundedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FiberCollapseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SolverIterationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FiberPoint {
  double t = 1.0;
  Eigen::VectorXcd v_coeffs;  // negative-band eigenbasis coefficients
};

struct NehariPoint {
  Spinor u;
  double value = 0.0;
  double residual_self = 0.0;  // |I'(u)[u]|
  double residual_neg = 0.0;   // sup_k |I'(u)[v_k]| / ||v_k|| over Y^-
  FiberPoint fiber;
  Spinor grad_riesz;  // Riesz gradient of the functional at u
  int iterations = 0;
  bool converged = false;
};

struct GroundState {
  Eigen::VectorXcd w_pos;  // positive-mode coefficients of w, ||w|| = 1
  Spinor w;
  NehariPoint point;
  double level = 0.0;
  int iterations = 0;
  bool converged = false;
  double tangent_residual = 0.0;
  double gradient_dual_norm = 0.0;  // full Y' dual norm of I'(u)
  std::vector<double> residual_trace;
};

// Concave maximization of the functional over the fiber Y^- + [0,inf) w.
// The solve runs in log(t) and whitened negative coordinates with an L-BFGS
// ascent and Armijo backtracking; maximality is certified post hoc by
// outward sampling in `nehari` tests rather than assumed.
class FiberSolver {
 public:
  FiberSolver(const EnergyContext& ctx, const FieldTerm& field, const SolverOptions& opts);

  int band() const { return band_; }
  int band_start() const { return k0_; }

  NehariPoint maximize(const Spinor& w_unit, const FiberPoint* warm = nullptr) const;

  // Diagnostics for a converged point.
  double fiber_residual(const Spinor& w_unit, const NehariPoint& p) const;

 private:
  const EnergyContext* ctx_;
  const FieldTerm* field_;
  SolverOptions opts_;
  int k0_ = 0;    // first negative mode of the band
  int band_ = 0;  // band size

  friend class SphereSolver;
  struct Eval {
    double value;
    double g_tau;
    Eigen::VectorXcd g_neg_whitened;
    Spinor grad_riesz;
  };
  Eval evaluate(const Spinor& w_unit, double tau, const Eigen::VectorXcd& b_whitened) const;
  Spinor synth_neg(const Eigen::VectorXcd& b) const;
  Eigen::VectorXcd project_neg(const Spinor& g) const;
};

double reduced_value(const EnergyContext& ctx, const FieldTerm& field, const Spinor& w_unit,
                     const SolverOptions& opts);

// Tangent Riesz gradient of the reduced functional at w (form metric on Y+),
// returned as a spinor in Y+ orthogonal to w.
Spinor reduced_grad(const EnergyContext& ctx, const FieldTerm& field, const Spinor& w_unit,
                    const SolverOptions& opts);

class SphereSolver {
 public:
  SphereSolver(const EnergyContext& ctx, const FieldTerm& field, const SolverOptions& opts);

  GroundState minimize(const Eigen::VectorXcd& w_pos_init) const;

  // Unit positive-mode coefficient seeds.
  Eigen::VectorXcd seed_lowest_mode(bool symmetry_breaking_bump = true) const;
  Eigen::VectorXcd seed_random(std::uint64_t seed) const;
  Eigen::VectorXcd seed_localized(const GraphPoint& center, double width) const;

  Spinor synth_pos_unit(const Eigen::VectorXcd& w_pos) const;

  // chart lift of the profile's spatial derivative on its dominant edge
  // (the translation generator the valley acceleration searches along)
  Eigen::VectorXcd translation_direction(const Spinor& u) const;

 private:
  const EnergyContext* ctx_;
  const FieldTerm* field_;
  SolverOptions opts_;
  FiberSolver fiber_;
  int p0_ = 0;      // first positive mode
  int n_pos_ = 0;

  struct SphereEval {
    double value;
    Eigen::VectorXcd grad_tangent;  // whitened coordinates
    NehariPoint point;
  };
  SphereEval evaluate(const Eigen::VectorXcd& w_hat, const FiberPoint* warm) const;
  Eigen::VectorXcd retract(const Eigen::VectorXcd& base, const Eigen::VectorXcd& step) const;
  bool try_eval(const Eigen::VectorXcd& w_t, const FiberPoint& seed, SphereEval* t) const;
  bool subspace_newton(Eigen::VectorXcd& w, SphereEval& cur, FiberPoint& warm,
                       const std::vector<Eigen::VectorXcd>& recent) const;
  bool valley_slide(Eigen::VectorXcd& w, SphereEval& cur, FiberPoint& warm) const;
};

struct MultistartResult {
  GroundState best;
  std::vector<double> levels;  // converged levels in start order
  double spread = 0.0;         // max - min of converged levels
  int n_started = 0;
  int n_converged = 0;
};

// Minimum of the reduced functional over deterministic multistarts: the
// lowest-mode start plus seeded random band-limited starts; external fields
// add one localized start per well.
MultistartResult minimize_multistart(const EnergyContext& ctx, const FieldTerm& field,
                                     int n_starts, std::uint64_t seed,
                                     const SolverOptions& opts);

MultistartResult ground_level_d(const EnergyContext& ctx, double lambda, int n_starts,
                                std::uint64_t seed, const SolverOptions& opts);

MultistartResult c_eps(const EnergyContext& ctx, double eps, int n_starts, std::uint64_t seed,
                       const SolverOptions& opts);

// Full-space dual norm ||I'(u)||_{Y'} = sqrt(sum |<v_k, G>|^2 / |lambda_k|).
double gradient_dual_norm(const EnergyContext& ctx, const FieldTerm& field, const Spinor& u);

}  // namespace qgdirac
