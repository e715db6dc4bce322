#include <doctest.h>

#include <cmath>
#include <random>

#include "qgdirac/discretization.hpp"
#include "qgdirac/verification.hpp"

using namespace qgdirac;

namespace {

SolverParams params_h(double h) {
  SolverParams p;
  p.m = 1.0;
  p.c = 1.0;
  p.h_target = h;
  return p;
}

struct Setup {
  MetricGraph graph;
  DiscreteOperator op;
  SpectralSplit split;
};

Setup make(const GraphSpec& spec, double h) {
  Setup s{MetricGraph::build(spec), {}, {}};
  s.op = assemble(s.graph, params_h(h));
  s.split = spectral_split(s.op, s.op.params);
  return s;
}

}  // namespace

TEST_CASE("interval slot count: 201 + 200") {
  const MetricGraph g = MetricGraph::build(preset_interval(M_PI));
  const DiscreteOperator op = assemble(g, params_h(M_PI / 200.0));
  CHECK(op.grid.n_comp1 == 201);
  CHECK(op.grid.n_comp2 == 200);
  CHECK(op.dim() == 401);
}

TEST_CASE("3-star slot count from the index maps") {
  const MetricGraph g = MetricGraph::build(preset_star(3, 20.0));
  const DiscreteOperator op = assemble(g, params_h(0.1));
  // slot-count oracle: interior comp-1 nodes per leg, one shared center,
  // no comp-1 slot at the truncation walls, one midpoint per interval
  int expected_c1 = 0, expected_c2 = 0, vertices_with_slot = 0;
  for (const auto& eg : op.grid.edges) {
    CHECK(eg.n == 200);
    expected_c1 += eg.n - 1;
    expected_c2 += eg.n;
  }
  for (const auto& v : g.vertices())
    if (!v.is_truncation_cap) ++vertices_with_slot;
  expected_c1 += vertices_with_slot;
  CHECK(vertices_with_slot == 1);
  CHECK(op.grid.n_comp1 == expected_c1);
  CHECK(op.grid.n_comp2 == expected_c2);
  CHECK(op.dim() == 3 * 199 + 1 + 3 * 200);
}

TEST_CASE("assemble rejects too-coarse grids") {
  const MetricGraph g = MetricGraph::build(preset_interval(1.0));
  CHECK_THROWS_AS(assemble(g, params_h(0.5)), std::invalid_argument);
}

TEST_CASE("H is exactly Hermitian") {
  for (const auto& spec :
       {preset_interval(M_PI), preset_star(3, 8.0), preset_tadpole(2.0, 8.0)}) {
    const MetricGraph g = MetricGraph::build(spec);
    const DiscreteOperator op = assemble(g, params_h(0.1));
    double dev = 0.0;
    for (int i = 0; i < op.dim(); ++i)
      for (int j = 0; j < op.dim(); ++j)
        dev = std::max(dev, std::abs(op.H(i, j) - std::conj(op.H(j, i))));
    CHECK(dev == 0.0);
  }
}

TEST_CASE("mass matrix: positive, exact for constants") {
  const MetricGraph g = MetricGraph::build(preset_interval(M_PI));
  const DiscreteOperator op = assemble(g, params_h(M_PI / 200.0));
  for (int i = 0; i < op.dim(); ++i) CHECK(op.Mdiag[i] > 0.0);
  Spinor u = Spinor::Zero(op.dim());
  for (int j = 0; j < op.grid.n_comp1; ++j) u[j] = 1.0;  // constant first component
  CHECK(l2_inner(op, u, u).real() == doctest::Approx(M_PI).epsilon(1e-14));
}

namespace {

// magnitudes ascending; the +- branches share |lambda| analytically, so
// matching magnitude sequences avoids an artificial sign tie-break
std::vector<double> abs_sorted(const std::vector<double>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (double x : v) out.push_back(std::abs(x));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("interval eigenvalues match the dispersion oracle") {
  const Setup s = make(preset_interval(M_PI), M_PI / 200.0);
  const std::vector<double> lam(s.split.lambda.data(), s.split.lambda.data() + s.split.dim());
  const auto got = abs_sorted(lam);
  const auto want = abs_sorted(dispersion_interval(M_PI, 1.0, 1.0, 8));
  for (int i = 0; i < 15; ++i) CHECK(std::abs(got[i] - want[i]) / want[i] < 2e-3);

  // sign structure: +mc^2 present (constant mode, exact), -mc^2 absent,
  // higher modes in +- pairs
  int pos = 0, neg = 0;
  for (double v : lam)
    if (std::abs(v) < want[15]) (v > 0 ? pos : neg) += 1;
  CHECK(pos == neg + 1);
  double nearest_plus = 1e300, nearest_minus = 1e300;
  for (double v : lam) {
    nearest_plus = std::min(nearest_plus, std::abs(v - 1.0));
    nearest_minus = std::min(nearest_minus, std::abs(v + 1.0));
  }
  CHECK(nearest_plus < 1e-10);
  CHECK(nearest_minus > 1e-3);
}

TEST_CASE("eigenvalue error drops at second order under h-halving") {
  const auto err = [](double h) {
    const Setup s = make(preset_interval(M_PI), h);
    const std::vector<double> lam(s.split.lambda.data(), s.split.lambda.data() + s.split.dim());
    const auto got = abs_sorted(lam);
    const auto want = abs_sorted(dispersion_interval(M_PI, 1.0, 1.0, 10));
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) worst = std::max(worst, std::abs(got[i] - want[i]) / want[i]);
    return worst;
  };
  const double e1 = err(M_PI / 100.0);
  const double e2 = err(M_PI / 200.0);
  const double order = std::log2(e1 / e2);
  CHECK(order >= 1.9);
  CHECK(order <= 2.3);
}

TEST_CASE("resolved band has no spurious doublers") {
  const int n = 200;
  const Setup s = make(preset_interval(M_PI), M_PI / n);
  const double h = M_PI / n;
  const double kmax = M_PI / (4.0 * h);
  const int nmax = static_cast<int>(std::floor(kmax + 1e-9));  // modes k = j pi / l with l = pi
  const auto pred = dispersion_interval_discrete(M_PI, 1.0, 1.0, n, nmax);
  // window boundary halfway between the last included and first excluded mode
  const auto above = dispersion_interval_discrete(M_PI, 1.0, 1.0, n, nmax + 1);
  const double lam_cut = 0.5 * (pred.back() + above.back());

  std::vector<double> got(s.split.lambda.data(), s.split.lambda.data() + s.split.dim());
  std::vector<char> used(got.size(), 0);
  int matched = 0;
  for (double v : pred) {
    if (std::abs(v) > lam_cut) continue;
    int best = -1;
    double bd = 1e300;
    for (std::size_t i = 0; i < got.size(); ++i) {
      if (used[i]) continue;
      const double d = std::abs(got[i] - v);
      if (d < bd) {
        bd = d;
        best = static_cast<int>(i);
      }
    }
    REQUIRE(best >= 0);
    CHECK(bd < 1e-8 * (1.0 + std::abs(v)));
    used[best] = 1;
    ++matched;
  }
  CHECK(matched == 2 * nmax + 1);
  int in_band = 0;
  for (double v : got) in_band += (std::abs(v) <= lam_cut) ? 1 : 0;
  CHECK(matched == in_band);
}

TEST_CASE("spectral gap is structural: min |lambda| >= mc^2 (1 - 10 h^2)") {
  for (const auto& spec :
       {preset_interval(M_PI), preset_star(3, 20.0), preset_tadpole(2.0, 15.0)}) {
    const Setup s = make(spec, 0.1);
    double min_abs = 1e300;
    for (int k = 0; k < s.split.dim(); ++k)
      min_abs = std::min(min_abs, std::abs(s.split.lambda[k]));
    CHECK(min_abs >= 1.0 - 10.0 * 0.1 * 0.1);
  }
}

TEST_CASE("eigenpair residuals and M-orthonormality") {
  const Setup s = make(preset_tadpole(2.0, 8.0), 0.1);
  CHECK(s.split.max_scaled_residual <= s.op.params.eig_tol);
  // orthonormality against the mass matrix
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> pick(0, s.split.dim() - 1);
  for (int trial = 0; trial < 50; ++trial) {
    const int a = pick(rng), b = pick(rng);
    const Spinor va = s.split.eigenvector(s.op, a);
    const Spinor vb = s.split.eigenvector(s.op, b);
    const Complex ip = l2_inner(s.op, va, vb);
    CHECK(std::abs(ip - (a == b ? 1.0 : 0.0)) < 1e-10);
  }
}

TEST_CASE("projectors: resolution of identity, idempotence, orthogonality") {
  const Setup s = make(preset_star(3, 8.0), 0.1);
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Spinor u = random_spinor(s.op, rng());
    const Spinor up = project(s.op, s.split, u, SpectralSign::positive);
    const Spinor um = project(s.op, s.split, u, SpectralSign::negative);
    CHECK((up + um - u).norm() < 1e-10 * u.norm());
    const Spinor upp = project(s.op, s.split, up, SpectralSign::positive);
    CHECK((upp - up).norm() < 1e-10);
    CHECK(std::abs(l2_inner(s.op, up, um)) < 1e-10);
  }
  // eigenvector case
  const int k = s.split.first_nonneg;  // lowest positive mode
  const Spinor vk = s.split.eigenvector(s.op, k);
  CHECK((project(s.op, s.split, vk, SpectralSign::positive) - vk).norm() < 1e-10);
  CHECK(project(s.op, s.split, vk, SpectralSign::negative).norm() < 1e-10);
}

TEST_CASE("form norm: single mode and gap inequality") {
  const Setup s = make(preset_interval(M_PI), M_PI / 100.0);
  const int k = s.split.first_nonneg + 3;
  const Spinor vk = s.split.eigenvector(s.op, k);
  CHECK(form_norm(s.op, s.split, vk) ==
        doctest::Approx(std::sqrt(s.split.lambda[k])).epsilon(1e-10));

  // the constant first-component spinor is the lambda = +mc^2 eigenfunction
  Spinor cu = Spinor::Zero(s.op.dim());
  for (int j = 0; j < s.op.grid.n_comp1; ++j) cu[j] = 1.0;
  const double fn = form_norm(s.op, s.split, cu);
  const double l2 = l2_norm(s.op, cu);
  CHECK(fn * fn == doctest::Approx(l2 * l2).epsilon(1e-10));

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const Spinor u = random_spinor(s.op, rng());
    const double f2 = std::pow(form_norm(s.op, s.split, u), 2);
    const double n2 = std::pow(l2_norm(s.op, u), 2);
    CHECK(1.0 * n2 <= f2 * (1.0 + 1e-10));
  }
}

TEST_CASE("l2 inner product: conjugate symmetry, definiteness") {
  const Setup s = make(preset_interval(1.0), 0.01);
  std::mt19937_64 rng(3);
  const Spinor u = random_spinor(s.op, rng());
  const Spinor v = random_spinor(s.op, rng());
  CHECK(std::abs(l2_inner(s.op, u, v) - std::conj(l2_inner(s.op, v, u))) < 1e-14);
  CHECK(l2_inner(s.op, u, u).real() > 0.0);
  CHECK(l2_norm(s.op, Spinor::Zero(s.op.dim())) == 0.0);
}

TEST_CASE("lp norm: p=2 equals the l2 norm exactly, scaling, p<2 rejected") {
  const Setup s = make(preset_star(3, 8.0), 0.1);
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const Spinor u = random_spinor(s.op, rng());
    CHECK(lp_norm(s.op, u, 2.0) == doctest::Approx(l2_norm(s.op, u)).epsilon(1e-12));
    const double a = 0.37;
    CHECK(lp_norm(s.op, a * u, 4.0) == doctest::Approx(a * lp_norm(s.op, u, 4.0)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(lp_norm(s.op, Spinor::Zero(s.op.dim()), 1.5), std::invalid_argument);
}

TEST_CASE("dimension mismatch raises") {
  const Setup s = make(preset_interval(1.0), 0.01);
  Spinor bad = Spinor::Zero(s.op.dim() + 1);
  CHECK_THROWS_AS(l2_norm(s.op, bad), std::invalid_argument);
  CHECK_THROWS_AS(form_norm(s.op, s.split, bad), std::invalid_argument);
}
