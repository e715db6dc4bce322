#include <doctest.h>

#include <cmath>
#include <random>

#include "qgdirac/energy.hpp"
#include "qgdirac/verification.hpp"

using namespace qgdirac;

namespace {

Workspace star_ws(std::optional<Potential> V = std::nullopt) {
  SolverParams params;
  params.h_target = 0.1;
  return Workspace::make(preset_star(3, 8.0), params, Nonlinearity::pure_power(4.0),
                         std::move(V));
}

}  // namespace

TEST_CASE("J at zero is zero; gradient at zero vanishes") {
  Workspace ws = star_ws();
  const FieldTerm f = ws.ctx->constant_field(0.3);
  const Spinor zero = Spinor::Zero(ws.op->dim());
  CHECK(ws.ctx->value(f, zero) == 0.0);
  const GradientRep g = ws.ctx->gradient(f, zero);
  CHECK(g.riesz.norm() == 0.0);
}

TEST_CASE("|lambda| >= mc^2 rejected") {
  Workspace ws = star_ws();
  CHECK_THROWS_AS(ws.ctx->constant_field(1.0), std::invalid_argument);
  CHECK_THROWS_AS(ws.ctx->constant_field(-1.5), std::invalid_argument);
}

TEST_CASE("J on a positive eigenvector matches direct quadrature") {
  Workspace ws = star_ws();
  const auto& split = *ws.split;
  const int k = split.first_nonneg + 2;
  const Spinor vk = split.eigenvector(*ws.op, k);
  const double lambda = 0.2;
  const FieldTerm f = ws.ctx->constant_field(lambda);
  for (double alpha : {0.3, 1.0, 2.4}) {
    const Spinor u = alpha * vk;
    // independent route: quadratic part from the eigenvalue, nonlinear part
    // from the collocated quadrature
    const double quad = 0.5 * alpha * alpha * split.lambda[k];   // M-normalized mode
    const double l2 = 0.5 * lambda * alpha * alpha;              // ||v_k||_L2 = 1
    const Eigen::VectorXd rho2 = collocated_sq_modulus(*ws.op, u);
    double nl = 0.0;
    for (int j = 0; j < ws.op->grid.n_comp1; ++j)
      nl += ws.op->Mdiag[j] * std::pow(rho2[j], 2.0) / 4.0;
    CHECK(ws.ctx->value(f, u) == doctest::Approx(quad + l2 - nl).epsilon(1e-10));
  }
}

TEST_CASE("J on Y^- is strictly negative (paper bound)") {
  Workspace ws = star_ws();
  const double lambda = 0.4;
  const FieldTerm f = ws.ctx->constant_field(lambda);
  std::mt19937_64 rng(23);
  for (int i = 0; i < 30; ++i) {
    Spinor u = random_spinor(*ws.op, rng());
    u = project(*ws.op, *ws.split, u, SpectralSign::negative);
    const double fn = form_norm(*ws.op, *ws.split, u);
    const double bound = 0.5 * (-1.0 + std::abs(lambda) / 1.0) * fn * fn;
    CHECK(ws.ctx->value(f, u) <= bound + 1e-12);
    CHECK(ws.ctx->value(f, u) < 0.0);
  }
}

TEST_CASE("constant potential reduces I_eps to J_lambda exactly") {
  const double lam = -0.15;
  // a potential with no wells is the constant V_inf
  SolverParams params;
  params.h_target = 0.1;
  Workspace ws = Workspace::make(preset_star(3, 8.0), params, Nonlinearity::pure_power(4.0),
                                 Potential(lam, {}));
  const FieldTerm fe = ws.ctx->external_field(0.5);
  const FieldTerm fc = ws.ctx->constant_field(lam);
  std::mt19937_64 rng(29);
  for (int i = 0; i < 10; ++i) {
    const Spinor u = random_spinor(*ws.op, rng());
    CHECK(ws.ctx->value(fe, u) == doctest::Approx(ws.ctx->value(fc, u)).epsilon(1e-14));
  }
}

TEST_CASE("I_eps sandwiched between J_V0 and J_Vinf") {
  SolverParams params;
  params.h_target = 0.1;
  const Potential V(0.25, {Well{GraphPoint{0, 0.0}, 0.4, 1.0}});
  Workspace ws = Workspace::make(preset_star(3, 8.0), params, Nonlinearity::pure_power(4.0), V);
  const double v0 = -0.15, vinf = 0.25;
  const FieldTerm fe = ws.ctx->external_field(0.5);
  const FieldTerm f0 = ws.ctx->constant_field(v0);
  const FieldTerm fi = ws.ctx->constant_field(vinf);
  std::mt19937_64 rng(31);
  for (int i = 0; i < 100; ++i) {
    const Spinor u = random_spinor(*ws.op, rng());
    const double ie = ws.ctx->value(fe, u);
    CHECK(ie >= ws.ctx->value(f0, u) - 1e-12);
    CHECK(ie <= ws.ctx->value(fi, u) + 1e-12);
  }
}

TEST_CASE("gauge invariance under a constant phase") {
  Workspace ws = star_ws();
  const FieldTerm f = ws.ctx->constant_field(0.1);
  std::mt19937_64 rng(37);
  for (int i = 0; i < 10; ++i) {
    const Spinor u = random_spinor(*ws.op, rng());
    const double phi = 2.0 * M_PI * (i + 1) / 11.0;
    const Spinor v = std::exp(Complex(0.0, phi)) * u;
    CHECK(ws.ctx->value(f, v) == doctest::Approx(ws.ctx->value(f, u)).epsilon(1e-12));
  }
}

TEST_CASE("splitting consistency: form norms of projections vs eigencoefficients") {
  Workspace ws = star_ws();
  std::mt19937_64 rng(41);
  for (int i = 0; i < 10; ++i) {
    const Spinor u = random_spinor(*ws.op, rng());
    const Spinor up = project(*ws.op, *ws.split, u, SpectralSign::positive);
    const Spinor um = project(*ws.op, *ws.split, u, SpectralSign::negative);
    const double via_proj = 0.5 * (std::pow(form_norm(*ws.op, *ws.split, up), 2) -
                                   std::pow(form_norm(*ws.op, *ws.split, um), 2));
    const Eigen::VectorXcd c = to_coeffs(*ws.op, *ws.split, u);
    double via_coeffs = 0.0;
    for (int k = 0; k < ws.split->dim(); ++k)
      via_coeffs += 0.5 * ws.split->lambda[k] * std::norm(c[k]);
    CHECK(via_proj == doctest::Approx(via_coeffs).epsilon(1e-10));
    CHECK(ws.ctx->quadratic_part(u) == doctest::Approx(via_coeffs).epsilon(1e-10));
  }
}

TEST_CASE("linear case: I'(v_k)[z] = lambda_k <v_k, z>_L2 when f = 0, V = 0") {
  // realize f = 0 by a tiny coefficient and subtracting; instead use the
  // quadratic part directly: gradient of 1/2 u^H H u is M^{-1} H u
  Workspace ws = star_ws();
  const auto& split = *ws.split;
  const int k = split.first_nonneg + 1;
  const Spinor vk = split.eigenvector(*ws.op, k);
  const Spinor Hv = ws.op->apply_H(vk);
  std::mt19937_64 rng(43);
  for (int i = 0; i < 5; ++i) {
    const Spinor z = random_spinor(*ws.op, rng());
    Complex s(0.0, 0.0);
    for (int q = 0; q < ws.op->dim(); ++q) s += std::conj(Hv[q]) * z[q];
    // weak action of H equals lambda_k <v_k, z>_M
    CHECK(std::abs(s - split.lambda[k] * l2_inner(*ws.op, vk, z)) < 1e-9);
  }
}

TEST_CASE("energy gradient passes the central-difference oracle") {
  Workspace ws = star_ws();
  const FieldTerm f = ws.ctx->constant_field(0.2);
  const GradientCheckReport rep = gradient_check_energy(*ws.ctx, f, 20, {1e-3, 1e-4}, 4242);
  CHECK(rep.report.pass);
  CHECK(rep.observed_order >= 1.8);
  CHECK(rep.observed_order <= 2.2);
}

TEST_CASE("gradient of the quadratic part alone is exact for central differences") {
  // f = 0 case: quadratic + field only (no nonlinearity) is tested through a
  // spinor with vanishing collocated modulus contribution: use scaling limit
  Workspace ws = star_ws();
  const FieldTerm f = ws.ctx->constant_field(0.0);
  std::mt19937_64 rng(47);
  const Spinor u = 1e-4 * random_spinor(*ws.op, rng());
  const Spinor v = random_spinor(*ws.op, rng());
  const GradientRep g = ws.ctx->gradient(f, u);
  const double exact = g.action(*ws.op, v);
  const double d = 1e-3;
  const double cd = (ws.ctx->value(f, u + d * v) - ws.ctx->value(f, u - d * v)) / (2.0 * d);
  // quartic nonlinearity at 1e-4 amplitude contributes O(1e-9) only
  CHECK(std::abs(cd - exact) < 1e-8);
}

TEST_CASE("gradient representation action matches l2 pairing") {
  Workspace ws = star_ws();
  const FieldTerm f = ws.ctx->constant_field(0.1);
  std::mt19937_64 rng(53);
  const Spinor u = random_spinor(*ws.op, rng());
  const GradientRep g = ws.ctx->gradient(f, u);
  const Spinor v = random_spinor(*ws.op, rng());
  CHECK(g.action(*ws.op, v) == doctest::Approx(l2_inner(*ws.op, g.riesz, v).real()).epsilon(1e-12));
}
