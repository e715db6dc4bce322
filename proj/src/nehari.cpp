#include "qgdirac/nehari.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

#include "qgdirac/parallel.hpp"

namespace qgdirac {

namespace {

// Gauge-adjusted real/imag parts used by the restricted basis transforms.
void split_gauged(const DiscreteOperator& op, const Spinor& u, Eigen::VectorXd& re,
                  Eigen::VectorXd& im, bool premultiply_mass) {
  const int n = op.dim();
  re.resize(n);
  im.resize(n);
  for (int i = 0; i < n; ++i) {
    Complex ui = u[i];
    if (op.grid.comp2[i]) ui *= Complex(0.0, 1.0);
    const double w = premultiply_mass ? op.Mdiag[i] : 1.0;
    re[i] = w * ui.real();
    im[i] = w * ui.imag();
  }
}

Spinor merge_gauged(const DiscreteOperator& op, const Eigen::VectorXd& re,
                    const Eigen::VectorXd& im) {
  const int n = op.dim();
  Spinor u(n);
  for (int i = 0; i < n; ++i) {
    Complex v(re[i], im[i]);
    if (op.grid.comp2[i]) v *= Complex(0.0, -1.0);
    u[i] = v;
  }
  return u;
}

Eigen::VectorXcd project_block(const DiscreteOperator& op, const SpectralSplit& split,
                               const Spinor& g, int k0, int count) {
  Eigen::VectorXd re, im;
  split_gauged(op, g, re, im, true);
  const auto block = split.basis_real.middleCols(k0, count);
  const Eigen::VectorXd cre = block.transpose() * re;
  const Eigen::VectorXd cim = block.transpose() * im;
  Eigen::VectorXcd c(count);
  for (int k = 0; k < count; ++k) c[k] = Complex(cre[k], cim[k]);
  return c;
}

Spinor synth_block(const DiscreteOperator& op, const SpectralSplit& split,
                   const Eigen::VectorXcd& c, int k0, int count) {
  const auto block = split.basis_real.middleCols(k0, count);
  const Eigen::VectorXd re = block * c.real();
  const Eigen::VectorXd im = block * c.imag();
  return merge_gauged(op, re, im);
}

double real_dot(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  return a.dot(b).real();  // Eigen dot conjugates the left factor
}

}  // namespace

FiberSolver::FiberSolver(const EnergyContext& ctx, const FieldTerm& field,
                         const SolverOptions& opts)
    : ctx_(&ctx), field_(&field), opts_(opts) {
  const int n_neg = ctx.split().n_negative();
  band_ = (opts.neg_band > 0) ? std::min(opts.neg_band, n_neg) : n_neg;
  k0_ = ctx.split().first_nonneg - band_;  // modes nearest the gap
}

Spinor FiberSolver::synth_neg(const Eigen::VectorXcd& b) const {
  return synth_block(ctx_->op(), ctx_->split(), b, k0_, band_);
}

Eigen::VectorXcd FiberSolver::project_neg(const Spinor& g) const {
  return project_block(ctx_->op(), ctx_->split(), g, k0_, band_);
}

FiberSolver::Eval FiberSolver::evaluate(const Spinor& w_unit, double tau,
                                        const Eigen::VectorXcd& b_whitened) const {
  const auto& split = ctx_->split();
  const double t = std::exp(tau);
  Eigen::VectorXcd b(band_);
  for (int k = 0; k < band_; ++k)
    b[k] = b_whitened[k] / std::sqrt(std::abs(split.lambda[k0_ + k]));
  Spinor u = t * w_unit;
  if (band_ > 0) u += synth_neg(b);

  Eval ev;
  ev.grad_riesz.resize(ctx_->op().dim());
  ev.value = ctx_->value_and_gradient(*field_, u, ev.grad_riesz);
  ev.g_tau = t * l2_inner(ctx_->op(), ev.grad_riesz, w_unit).real();
  ev.g_neg_whitened = project_neg(ev.grad_riesz);
  for (int k = 0; k < band_; ++k)
    ev.g_neg_whitened[k] /= std::sqrt(std::abs(split.lambda[k0_ + k]));
  return ev;
}

NehariPoint FiberSolver::maximize(const Spinor& w_unit, const FiberPoint* warm) const {
  const auto& split = ctx_->split();
  double tau = 0.0;
  Eigen::VectorXcd bw = Eigen::VectorXcd::Zero(band_);
  if (warm && warm->v_coeffs.size() == band_ && warm->t > 1e-3 && warm->t < 1e3) {
    // adopt the warm start only when it beats the cold one; a stale warm
    // point can sit in the basin of the trivial state
    double tau_w = std::log(warm->t);
    Eigen::VectorXcd bw_w(band_);
    for (int k = 0; k < band_; ++k)
      bw_w[k] = warm->v_coeffs[k] * std::sqrt(std::abs(split.lambda[k0_ + k]));
    if (evaluate(w_unit, tau_w, bw_w).value > evaluate(w_unit, tau, bw).value) {
      tau = tau_w;
      bw = bw_w;
    }
  }

  // L-BFGS ascent in (tau, whitened negative coordinates).
  const int mem = 10;
  std::deque<Eigen::VectorXd> S, Yv;
  std::deque<double> rho;
  const int dim = 1 + 2 * band_;
  auto pack = [&](double gt, const Eigen::VectorXcd& gb) {
    Eigen::VectorXd v(dim);
    v[0] = gt;
    for (int k = 0; k < band_; ++k) {
      v[1 + 2 * k] = gb[k].real();
      v[2 + 2 * k] = gb[k].imag();
    }
    return v;
  };

  Eval ev = evaluate(w_unit, tau, bw);
  int it = 0;
  bool converged = false;
  for (; it < opts_.max_iter_fiber; ++it) {
    const double t = std::exp(tau);
    if (t > opts_.t_max)
      throw FiberUnboundedError("fiber maximization unbounded: no interior maximum");
    if (t < opts_.t_min)
      throw FiberCollapseError("fiber scale collapsed below t_min");

    const double resid = std::sqrt(std::pow(ev.g_tau / t, 2) + ev.g_neg_whitened.squaredNorm());
    if (resid <= opts_.tol_fiber * (1.0 + std::abs(ev.value))) {
      // the log coordinate degenerates toward u = 0, where the residual
      // vanishes without a maximizer; that is a collapse, not convergence
      if (ev.value <= 0.0 || t < 1e-6)
        throw FiberCollapseError("fiber ascent collapsed to the trivial state");
      converged = true;
      break;
    }

    // two-loop recursion on the gradient of -value
    Eigen::VectorXd g = -pack(ev.g_tau, ev.g_neg_whitened);
    Eigen::VectorXd q = g;
    std::vector<double> alpha(S.size());
    for (int i = static_cast<int>(S.size()) - 1; i >= 0; --i) {
      alpha[i] = rho[i] * S[i].dot(q);
      q -= alpha[i] * Yv[i];
    }
    double gamma = 1.0;
    if (!S.empty()) {
      const double sy = S.back().dot(Yv.back());
      const double yy = Yv.back().squaredNorm();
      if (sy > 0 && yy > 0) gamma = sy / yy;
    }
    q *= gamma;
    for (std::size_t i = 0; i < S.size(); ++i) {
      const double beta = rho[i] * Yv[i].dot(q);
      q += (alpha[i] - beta) * S[i];
    }
    Eigen::VectorXd d = -q;  // descent for -value
    double slope = g.dot(d);
    if (!(slope < 0)) {      // fall back to plain preconditioned gradient
      d = -g;
      slope = g.dot(d);
    }

    // Below the value-comparison floor the Armijo test cannot certify
    // decrease; there the locally Newton-like steps are accepted on a
    // monotone gradient norm instead.
    const bool endgame = resid <= 1e-5 * (1.0 + std::abs(ev.value));
    const double gnorm = g.norm();
    const double slack = 1e-13 * (1.0 + std::abs(ev.value));

    double step = 1.0;
    bool accepted = false;
    Eval trial;
    double tau_t = tau;
    Eigen::VectorXcd bw_t = bw;
    for (int ls = 0; ls < 60; ++ls) {
      tau_t = tau + step * d[0];
      for (int k = 0; k < band_; ++k)
        bw_t[k] = bw[k] + step * Complex(d[1 + 2 * k], d[2 + 2 * k]);
      if (tau_t > std::log(opts_.t_max) + 2.0) {
        // an overshooting trial is just backtracked; divergence is decided
        // by the accepted point at the loop head
        step *= 0.5;
        continue;
      }
      trial = evaluate(w_unit, tau_t, bw_t);
      if (-trial.value <= -ev.value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      if (endgame && -trial.value <= -ev.value + slack) {
        const double tnorm = pack(trial.g_tau, trial.g_neg_whitened).norm();
        if (tnorm <= 0.5 * gnorm) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
      if (step < 1e-16) break;
    }
    if (!accepted) break;  // stagnation at rounding level; report residual as is

    Eigen::VectorXd s = pack(tau_t - tau, bw_t - bw);
    Eigen::VectorXd gnew = -pack(trial.g_tau, trial.g_neg_whitened);
    Eigen::VectorXd y = gnew - g;
    const double sy = s.dot(y);
    if (sy > 1e-14 * s.norm() * y.norm()) {
      S.push_back(s);
      Yv.push_back(y);
      rho.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > mem) {
        S.pop_front();
        Yv.pop_front();
        rho.pop_front();
      }
    }
    tau = tau_t;
    bw = bw_t;
    ev = trial;
  }

  NehariPoint p;
  const double t = std::exp(tau);
  p.fiber.t = t;
  p.fiber.v_coeffs.resize(band_);
  for (int k = 0; k < band_; ++k)
    p.fiber.v_coeffs[k] = bw[k] / std::sqrt(std::abs(split.lambda[k0_ + k]));
  p.u = t * w_unit;
  if (band_ > 0) p.u += synth_neg(p.fiber.v_coeffs);
  p.value = ev.value;
  p.iterations = it;
  p.converged = converged;

  // Constraint residuals against the full negative basis.
  p.residual_self = std::abs(l2_inner(ctx_->op(), ev.grad_riesz, p.u).real());
  const int n_neg_full = split.n_negative();
  if (n_neg_full > 0) {
    const Eigen::VectorXcd gfull =
        project_block(ctx_->op(), split, ev.grad_riesz, 0, n_neg_full);
    double worst = 0.0;
    for (int k = 0; k < n_neg_full; ++k)
      worst = std::max(worst, std::abs(gfull[k]) / std::sqrt(std::abs(split.lambda[k])));
    p.residual_neg = worst;
  }
  p.grad_riesz = ev.grad_riesz;
  return p;
}

double FiberSolver::fiber_residual(const Spinor& w_unit, const NehariPoint& p) const {
  Eigen::VectorXcd bw(band_);
  for (int k = 0; k < band_; ++k)
    bw[k] = p.fiber.v_coeffs[k] * std::sqrt(std::abs(ctx_->split().lambda[k0_ + k]));
  const Eval ev = evaluate(w_unit, std::log(p.fiber.t), bw);
  return std::sqrt(std::pow(ev.g_tau / p.fiber.t, 2) + ev.g_neg_whitened.squaredNorm());
}

double reduced_value(const EnergyContext& ctx, const FieldTerm& field, const Spinor& w_unit,
                     const SolverOptions& opts) {
  FiberSolver fiber(ctx, field, opts);
  const NehariPoint p = fiber.maximize(w_unit);
  if (!p.converged) throw SolverIterationError("fiber maximization hit the iteration cap");
  return p.value;
}

Spinor reduced_grad(const EnergyContext& ctx, const FieldTerm& field, const Spinor& w_unit,
                    const SolverOptions& opts) {
  FiberSolver fiber(ctx, field, opts);
  const NehariPoint p = fiber.maximize(w_unit);
  if (!p.converged) throw SolverIterationError("fiber maximization hit the iteration cap");
  const auto& split = ctx.split();
  const int p0 = split.first_nonneg;
  const int n_pos = split.n_positive();
  const double s0 = p.fiber.t;  // ||m(w)^+|| for a unit base

  Eigen::VectorXcd gpos = project_block(ctx.op(), split, p.grad_riesz, p0, n_pos);
  Eigen::VectorXcd gamma(n_pos);
  for (int k = 0; k < n_pos; ++k) gamma[k] = s0 * gpos[k] / split.lambda[p0 + k];

  // tangent projection in the form metric
  const Eigen::VectorXcd wpos = project_block(ctx.op(), split, w_unit, p0, n_pos);
  double inner = 0.0;
  double wnorm2 = 0.0;
  for (int k = 0; k < n_pos; ++k) {
    inner += split.lambda[p0 + k] * (std::conj(wpos[k]) * gamma[k]).real();
    wnorm2 += split.lambda[p0 + k] * std::norm(wpos[k]);
  }
  for (int k = 0; k < n_pos; ++k) gamma[k] -= (inner / wnorm2) * wpos[k];
  return synth_block(ctx.op(), split, gamma, p0, n_pos);
}

SphereSolver::SphereSolver(const EnergyContext& ctx, const FieldTerm& field,
                           const SolverOptions& opts)
    : ctx_(&ctx), field_(&field), opts_(opts), fiber_(ctx, field, opts) {
  p0_ = ctx.split().first_nonneg;
  n_pos_ = ctx.split().n_positive();
}

Spinor SphereSolver::synth_pos_unit(const Eigen::VectorXcd& w_hat) const {
  const auto& split = ctx_->split();
  Eigen::VectorXcd c(n_pos_);
  for (int k = 0; k < n_pos_; ++k) c[k] = w_hat[k] / std::sqrt(split.lambda[p0_ + k]);
  return synth_block(ctx_->op(), split, c, p0_, n_pos_);
}

Eigen::VectorXcd SphereSolver::translation_direction(const Spinor& u) const {
  const auto& op = ctx_->op();
  const auto& grid = op.grid;
  const Eigen::VectorXd rho2 = collocated_sq_modulus(op, u);
  int jmax = 0;
  for (int j = 1; j < grid.n_comp1; ++j)
    if (rho2[j] > rho2[jmax]) jmax = j;
  const int edge = grid.site[jmax].edge;

  // central differences of both components along that edge
  Spinor t = Spinor::Zero(op.dim());
  const auto& eg = grid.edges[edge];
  for (int j = 1; j < eg.n; ++j) {
    const int slot = grid.comp1_slot_of_node(eg, j);
    const int prev = grid.comp1_slot_of_node(eg, j - 1);
    const int next = grid.comp1_slot_of_node(eg, j + 1);
    const Complex up = (prev >= 0) ? u[prev] : Complex(0, 0);
    const Complex un = (next >= 0) ? u[next] : Complex(0, 0);
    if (slot >= 0) t[slot] = (un - up) / (2.0 * eg.h);
  }
  for (int i = 1; i + 1 < eg.n; ++i)
    t[eg.first_mid + i] = (u[eg.first_mid + i + 1] - u[eg.first_mid + i - 1]) / (2.0 * eg.h);

  const auto& split = ctx_->split();
  Eigen::VectorXcd gp = project_block(op, split, t, p0_, n_pos_);
  for (int k = 0; k < n_pos_; ++k) gp[k] *= std::sqrt(split.lambda[p0_ + k]);
  return gp;
}

SphereSolver::SphereEval SphereSolver::evaluate(const Eigen::VectorXcd& w_hat,
                                                const FiberPoint* warm) const {
  SphereEval ev;
  const Spinor w = synth_pos_unit(w_hat);
  ev.point = fiber_.maximize(w, warm);
  const auto& split = ctx_->split();
  const double s0 = ev.point.fiber.t;
  Eigen::VectorXcd gpos = project_block(ctx_->op(), split, ev.point.grad_riesz, p0_, n_pos_);
  ev.grad_tangent.resize(n_pos_);
  for (int k = 0; k < n_pos_; ++k)
    ev.grad_tangent[k] = s0 * gpos[k] / std::sqrt(split.lambda[p0_ + k]);
  const double inner = real_dot(w_hat, ev.grad_tangent);
  ev.grad_tangent -= inner * w_hat;
  ev.value = ev.point.value;
  return ev;
}

Eigen::VectorXcd SphereSolver::retract(const Eigen::VectorXcd& base,
                                       const Eigen::VectorXcd& step) const {
  Eigen::VectorXcd w_t = base + step;
  w_t /= w_t.norm();
  // fix the gauge: align the phase with the base point so iterates never
  // wander along the flat phase circle
  const Complex z = base.dot(w_t);
  if (std::abs(z) > 0) w_t *= std::conj(z) / std::abs(z);
  return w_t;
}

bool SphereSolver::try_eval(const Eigen::VectorXcd& w_t, const FiberPoint& seed,
                            SphereEval* t) const {
  try {
    FiberPoint warm = seed;
    *t = evaluate(w_t, &warm);
    return t->point.converged;
  } catch (const FiberCollapseError&) {
    return false;
  } catch (const FiberUnboundedError&) {
    return false;
  }
}

// Measures the Hessian of the reduced functional on a small adaptive
// subspace (current gradient, recent steps, the translation generator) by
// differencing gradients, then takes a clipped Newton step there.  The
// functional mixes O(1) transverse curvature with very soft localized modes
// that plain descent grinds on for thousands of iterations.
bool SphereSolver::subspace_newton(Eigen::VectorXcd& w, SphereEval& cur, FiberPoint& warm,
                                   const std::vector<Eigen::VectorXcd>& recent) const {
  std::vector<Eigen::VectorXcd> cand;
  cand.push_back(cur.grad_tangent);
  for (const auto& d : recent) cand.push_back(d);
  cand.push_back(translation_direction(cur.point.u));

  std::vector<Eigen::VectorXcd> B;
  for (auto v : cand) {
    v -= real_dot(w, v) * w;
    for (const auto& b : B) v -= real_dot(b, v) * b;
    const double n = v.norm();
    if (n > 1e-10) B.push_back(v / n);
    if (B.size() == 8) break;
  }
  if (B.empty()) return false;
  const int m = static_cast<int>(B.size());

  const double delta = 1e-4;
  Eigen::MatrixXd A(m, m);
  for (int j = 0; j < m; ++j) {
    SphereEval t;
    if (!try_eval(retract(w, delta * B[j]), warm, &t)) return false;
    const Eigen::VectorXcd hcol = (t.grad_tangent - cur.grad_tangent) / delta;
    for (int i = 0; i < m; ++i) A(i, j) = real_dot(B[i], hcol);
  }
  A = 0.5 * (A + A.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) return false;
  Eigen::VectorXd r(m);
  for (int i = 0; i < m; ++i) r[i] = real_dot(B[i], cur.grad_tangent);

  // absolute-value Newton with an eigenvalue floor
  const double vmax = es.eigenvalues().cwiseAbs().maxCoeff();
  if (!(vmax > 0)) return false;
  const double vfloor = std::max(1e-10, 1e-7 * vmax);
  Eigen::VectorXd z = es.eigenvectors().transpose() * r;
  for (int i = 0; i < m; ++i) z[i] /= std::max(std::abs(es.eigenvalues()[i]), vfloor);
  const Eigen::VectorXd x = -(es.eigenvectors() * z);
  Eigen::VectorXcd step = Eigen::VectorXcd::Zero(n_pos_);
  for (int i = 0; i < m; ++i) step += x[i] * B[i];

  const double slack = 1e-13 * (1.0 + std::abs(cur.value));
  double alpha = 1.0;
  for (int ls = 0; ls < 10; ++ls, alpha *= 0.5) {
    SphereEval t;
    const Eigen::VectorXcd w_t = retract(w, alpha * step);
    if (!try_eval(w_t, warm, &t)) continue;
    const bool value_progress = t.value < cur.value - 1e-12 * (1.0 + std::abs(cur.value));
    const bool grad_progress = t.grad_tangent.norm() <= 0.7 * cur.grad_tangent.norm();
    if (t.value <= cur.value + slack && (value_progress || grad_progress)) {
      w = w_t;
      cur = t;
      warm = cur.point.fiber;
      return true;
    }
  }
  return false;
}

// Marching secant along the translation valley.  The soliton slides along a
// leg under exponentially small forces; the balance point is a sign change
// of the directional derivative, which a bracketed march + secant finds in a
// few evaluations where model-based steps creep.  The direction is refreshed
// every step because the valley is curved in the chart.
bool SphereSolver::valley_slide(Eigen::VectorXcd& w, SphereEval& cur, FiberPoint& warm) const {
  const double slack = 1e-13 * (1.0 + std::abs(cur.value));
  bool moved = false;
  double xi = 0.25;
  for (int slide = 0; slide < 400; ++slide) {
    Eigen::VectorXcd v = translation_direction(cur.point.u);
    v -= real_dot(w, v) * w;
    const double vn = v.norm();
    if (vn < 1e-14) break;
    v /= vn;
    double d0 = real_dot(cur.grad_tangent, v);
    if (d0 > 0) {
      v = -v;
      d0 = -d0;
    }
    if (-d0 < 1e-3 * cur.grad_tangent.norm()) break;  // valley component spent

    bool stepped = false;
    bool finished = false;
    for (int h = 0; h < 8 && !stepped; ++h, xi *= 0.5) {
      const Eigen::VectorXcd w_t = retract(w, xi * v);
      SphereEval t;
      if (!try_eval(w_t, warm, &t)) continue;
      if (t.value > cur.value + slack) continue;
      const double d1 = real_dot(t.grad_tangent, v);
      if (d1 >= 0.0) {
        // sign flip inside [0, xi]: secant refine on this short segment
        double lo = 0.0, dlo = d0, hi = xi, dhi = d1;
        SphereEval best = t;
        double xibest = xi;
        for (int sec = 0; sec < 12 && hi - lo > 1e-12; ++sec) {
          double mid =
              (dhi > dlo) ? lo - dlo * (hi - lo) / (dhi - dlo) : 0.5 * (lo + hi);
          if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
          SphereEval tm;
          const Eigen::VectorXcd w_m = retract(w, mid * v);
          if (!try_eval(w_m, best.point.fiber, &tm)) break;
          const double dm = real_dot(tm.grad_tangent, v);
          if (tm.grad_tangent.norm() < best.grad_tangent.norm()) {
            best = tm;
            xibest = mid;
          }
          if (dm >= 0) {
            hi = mid;
            dhi = dm;
          } else {
            lo = mid;
            dlo = dm;
          }
        }
        w = retract(w, xibest * v);
        cur = best;
        warm = cur.point.fiber;
        moved = true;
        stepped = true;
        finished = true;
      } else {
        w = w_t;
        cur = t;
        warm = cur.point.fiber;
        moved = true;
        stepped = true;
      }
    }
    if (!stepped || finished) break;
    xi = std::min(2.0 * xi, 0.5);
  }
  return moved;
}

GroundState SphereSolver::minimize(const Eigen::VectorXcd& w_pos_init) const {
  Eigen::VectorXcd w = w_pos_init;
  if (w.size() != n_pos_) throw std::invalid_argument("sphere seed has wrong dimension");
  const double n0 = w.norm();
  if (!(n0 > 0)) throw std::invalid_argument("sphere seed vanishes");
  w /= n0;

  GroundState out;
  SphereEval cur = evaluate(w, nullptr);
  FiberPoint warm = cur.point.fiber;

  // Safeguarded Barzilai-Borwein descent plus subspace Newton rounds.
  std::vector<Eigen::VectorXcd> recent;
  double bb = 0.5;
  Eigen::VectorXcd s_prev, y_prev;
  int it = 0;
  bool converged = false;
  bool fiber_ok = cur.point.converged;
  int last_newton = -1000;
  double plateau_resid = std::numeric_limits<double>::infinity();
  int plateau_it = 0;

  for (; it < opts_.max_iter_sphere && fiber_ok; ++it) {
    const double resid = cur.grad_tangent.norm();
    out.residual_trace.push_back(resid);
    if (resid <= opts_.tol_sphere * (1.0 + std::abs(cur.value))) {
      converged = true;
      break;
    }

    if (resid < 0.3 * plateau_resid) {
      plateau_resid = resid;
      plateau_it = it;
    }
    const bool stalled = it - plateau_it >= 12;
    if (it >= 3 && it - last_newton >= 8 && (stalled || it - last_newton >= 40)) {
      last_newton = it;
      const bool newton_moved = subspace_newton(w, cur, warm, recent);
      bool slide_moved = false;
      if (!newton_moved || stalled) slide_moved = valley_slide(w, cur, warm);
      if (newton_moved || slide_moved) {
        plateau_resid = cur.grad_tangent.norm();
        plateau_it = it;
        continue;
      }
    }

    // BB-scaled steepest descent with Armijo and a near-floor gradient rule
    if (s_prev.size() > 0) {
      const double sy = real_dot(s_prev, y_prev);
      const double ss = s_prev.squaredNorm();
      if (sy > 1e-16 * ss) bb = std::clamp(ss / sy, 1e-3, 1e3);
    }
    const bool endgame = resid <= 1e-5 * (1.0 + std::abs(cur.value));
    const double slack = 1e-13 * (1.0 + std::abs(cur.value));
    bool accepted = false;
    Eigen::VectorXcd w_t;
    SphereEval trial;
    double alpha = bb;
    for (int ls = 0; ls < 40; ++ls) {
      w_t = retract(w, -alpha * cur.grad_tangent);
      SphereEval t;
      if (try_eval(w_t, warm, &t)) {
        if (t.value <= cur.value - 1e-4 * alpha * resid * resid) {
          accepted = true;
          trial = t;
          break;
        }
        if (endgame && t.value <= cur.value + slack &&
            t.grad_tangent.norm() <= 0.9 * resid) {
          accepted = true;
          trial = t;
          break;
        }
      }
      alpha *= 0.5;
      if (alpha < 1e-14) break;
    }
    if (!accepted) break;  // line search failure: return best so far, flagged

    s_prev = w_t - w;
    y_prev = trial.grad_tangent - cur.grad_tangent;
    Eigen::VectorXcd dn = s_prev;
    const double dnn = dn.norm();
    if (dnn > 0) {
      recent.insert(recent.begin(), dn / dnn);
      if (recent.size() > 5) recent.pop_back();
    }
    w = w_t;
    cur = trial;
    warm = cur.point.fiber;
    fiber_ok = cur.point.converged;
  }

  out.w_pos = w;
  out.w = synth_pos_unit(w);
  out.point = cur.point;
  out.level = cur.value;
  out.iterations = it;
  out.converged = converged && cur.point.converged;
  out.tangent_residual = cur.grad_tangent.norm();
  out.gradient_dual_norm = gradient_dual_norm(*ctx_, *field_, cur.point.u);
  return out;
}

Eigen::VectorXcd SphereSolver::seed_lowest_mode(bool symmetry_breaking_bump) const {
  const auto& split = ctx_->split();
  const auto& op = ctx_->op();
  Spinor v = split.eigenvector(op, p0_);
  if (symmetry_breaking_bump) {
    const MetricGraph& g = ctx_->graph();
    const Edge& e0 = g.edge(0);
    const GraphPoint anchor{0, e0.length / 3.0};
    const double width = std::max(1.0, e0.length / 6.0);
    for (int i = 0; i < op.dim(); ++i) {
      const double d = g.path_distance(op.grid.site[i], anchor);
      v[i] *= 1.0 + 0.5 * std::exp(-d * d / (width * width));
    }
  }
  Eigen::VectorXcd gp = project_block(op, split, v, p0_, n_pos_);
  Eigen::VectorXcd w(n_pos_);
  for (int k = 0; k < n_pos_; ++k) w[k] = gp[k] * std::sqrt(split.lambda[p0_ + k]);
  w /= w.norm();
  return w;
}

Eigen::VectorXcd SphereSolver::seed_random(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int band = std::min(opts_.seed_band, n_pos_);
  Eigen::VectorXcd w = Eigen::VectorXcd::Zero(n_pos_);
  for (int j = 0; j < band; ++j) {
    const double env = 1.0 / (1.0 + j);
    w[j] = env * Complex(gauss(rng), gauss(rng));
  }
  w /= w.norm();
  return w;
}

Eigen::VectorXcd SphereSolver::seed_localized(const GraphPoint& center, double width) const {
  const auto& op = ctx_->op();
  const auto& split = ctx_->split();
  const MetricGraph& g = ctx_->graph();
  Spinor v = Spinor::Zero(op.dim());
  for (int j = 0; j < op.grid.n_comp1; ++j) {
    const double d = g.path_distance(op.grid.site[j], center);
    v[j] = std::exp(-d * d / (width * width));
  }
  Eigen::VectorXcd gp = project_block(op, split, v, p0_, n_pos_);
  Eigen::VectorXcd w(n_pos_);
  for (int k = 0; k < n_pos_; ++k) w[k] = gp[k] * std::sqrt(split.lambda[p0_ + k]);
  const double nrm = w.norm();
  if (!(nrm > 0)) throw std::invalid_argument("localized seed has no positive-mode content");
  w /= nrm;
  return w;
}

MultistartResult minimize_multistart(const EnergyContext& ctx, const FieldTerm& field,
                                     int n_starts, std::uint64_t seed,
                                     const SolverOptions& opts) {
  if (n_starts < 1) throw std::invalid_argument("need at least one start");
  SphereSolver solver(ctx, field, opts);

  std::vector<Eigen::VectorXcd> seeds;
  seeds.push_back(solver.seed_lowest_mode());
  if (field.kind == FieldTerm::Kind::external && ctx.potential()) {
    const double width = 1.5 / ctx.mc2();
    for (const auto& well : ctx.potential()->wells()) {
      if (static_cast<int>(seeds.size()) >= n_starts) break;
      const GraphPoint z = ctx.potential()->scaled_center(ctx.graph(), well, field.value);
      seeds.push_back(solver.seed_localized(z, std::max(width, well.width / field.value * 0.5)));
    }
  }
  for (std::uint64_t j = seeds.size(); static_cast<int>(seeds.size()) < n_starts; ++j)
    seeds.push_back(solver.seed_random(seed + 1000003ULL * j));

  std::vector<GroundState> results(seeds.size());
  parallel_for_index(static_cast<int>(seeds.size()), [&](int i) {
    results[i] = solver.minimize(seeds[i]);
  });

  MultistartResult mr;
  mr.n_started = static_cast<int>(seeds.size());
  int best = -1;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i].converged) continue;
    mr.levels.push_back(results[i].level);
    if (best < 0 || results[i].level < results[best].level) best = static_cast<int>(i);
  }
  mr.n_converged = static_cast<int>(mr.levels.size());
  if (best < 0) throw SolverIterationError("all multistarts failed to converge");
  mr.best = results[best];
  mr.spread = *std::max_element(mr.levels.begin(), mr.levels.end()) -
              *std::min_element(mr.levels.begin(), mr.levels.end());
  return mr;
}

MultistartResult ground_level_d(const EnergyContext& ctx, double lambda, int n_starts,
                                std::uint64_t seed, const SolverOptions& opts) {
  const FieldTerm field = ctx.constant_field(lambda);
  return minimize_multistart(ctx, field, n_starts, seed, opts);
}

MultistartResult c_eps(const EnergyContext& ctx, double eps, int n_starts, std::uint64_t seed,
                       const SolverOptions& opts) {
  const FieldTerm field = ctx.external_field(eps);
  return minimize_multistart(ctx, field, n_starts, seed, opts);
}

double gradient_dual_norm(const EnergyContext& ctx, const FieldTerm& field, const Spinor& u) {
  const GradientRep g = ctx.gradient(field, u);
  const Eigen::VectorXcd c = to_coeffs(ctx.op(), ctx.split(), g.riesz);
  double s = 0.0;
  for (int k = 0; k < ctx.split().dim(); ++k)
    s += std::norm(c[k]) / std::abs(ctx.split().lambda[k]);
  return std::sqrt(s);
}

}  // namespace qgdirac
