#include <doctest.h>

#include <cmath>
#include <random>

#include "qgdirac/model.hpp"

using namespace qgdirac;

TEST_CASE("pure power values: f(2) = 4, F(2) = 4 for p = 4") {
  const Nonlinearity nl = Nonlinearity::pure_power(4.0);
  CHECK(nl.f(2.0) == doctest::Approx(4.0));
  CHECK(nl.F(2.0) == doctest::Approx(4.0));
  CHECK(nl.f(0.0) == 0.0);
  CHECK(nl.F(0.0) == 0.0);
  CHECK(nl.theta() == doctest::Approx(4.0));
}

TEST_CASE("finite-difference consistency F'(t) = f(t) t") {
  const Nonlinearity nl = Nonlinearity::power_sum({3.0, 5.0}, {1.0, 0.7});
  const double t = 1.3;
  for (double d : {1e-3, 1e-4}) {
    const double cd = (nl.F(t + d) - nl.F(t - d)) / (2.0 * d);
    CHECK(std::abs(cd - nl.f(t) * t) <= 10.0 * d * d);
  }
}

TEST_CASE("negative arguments rejected") {
  const Nonlinearity nl = Nonlinearity::pure_power(4.0);
  CHECK_THROWS_AS(nl.f(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(nl.F(-0.5), std::invalid_argument);
  CHECK_THROWS_AS(nl.fprime(0.0), std::invalid_argument);
}

TEST_CASE("validate_f: pure power passes with theta F = f t^2 an identity") {
  const Nonlinearity nl = Nonlinearity::pure_power(4.0);
  const ValidationReport rep = validate_f(nl, 10.0, 5000);
  CHECK(rep.pass());
  // equality case of the superquadraticity bound at theta = p
  for (double t : {0.1, 0.7, 2.0, 9.5})
    CHECK(nl.theta() * nl.F(t) == doctest::Approx(nl.f(t) * t * t).epsilon(1e-14));
}

TEST_CASE("validate_f: power sum needs theta = min exponent") {
  // f(t) = t^2 + t^3 (exponents 4 and 5)
  const Nonlinearity nl = Nonlinearity::power_sum({4.0, 5.0}, {1.0, 1.0});
  CHECK(validate_f(nl, 10.0, 5000).pass());            // theta = 4 = min p
  const ValidationReport bad = validate_f(nl, 10.0, 5000, 5.0);  // theta = max p fails small t
  CHECK(!bad.pass());
  bool super_failed = false;
  for (const auto& c : bad.conditions)
    if (c.name.find("theta F") != std::string::npos) super_failed = !c.pass;
  CHECK(super_failed);
}

TEST_CASE("invalid nonlinearity families rejected at construction") {
  CHECK_THROWS_AS(Nonlinearity::pure_power(2.0), std::invalid_argument);   // p must exceed 2
  CHECK_THROWS_AS(Nonlinearity::pure_power(4.0, -1.0), std::invalid_argument);  // f >= 0 fails
}

TEST_CASE("f monotone on random pairs") {
  const Nonlinearity nl = Nonlinearity::power_sum({3.0, 4.0, 6.0}, {0.5, 1.0, 0.25});
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unif(0.0, 8.0);
  for (int i = 0; i < 10000; ++i) {
    double a = unif(rng), b = unif(rng);
    if (a > b) std::swap(a, b);
    CHECK(nl.f(b) >= nl.f(a));
  }
}

TEST_CASE("lemma22 constants: A = F(1), pure power needs B = A") {
  const Nonlinearity nl = Nonlinearity::pure_power(4.0);
  const Lemma22Constants k = lemma22_constants(nl, 10.0);
  CHECK(k.A == doctest::Approx(0.25));
  CHECK(k.B == doctest::Approx(0.25));
  CHECK(k.theta == doctest::Approx(4.0));
}

TEST_CASE("lemma22 margin scan on the sample grid") {
  for (const Nonlinearity& nl :
       {Nonlinearity::pure_power(3.0), Nonlinearity::power_sum({4.0, 6.0}, {1.0, 2.0})}) {
    const Lemma22Constants k = lemma22_constants(nl, 12.0);
    CHECK(k.A == doctest::Approx(nl.F(1.0)));
    CHECK(k.B >= k.A);
    for (int i = 1; i <= 4096; ++i) {
      const double t = 12.0 * i / 4096.0;
      CHECK(nl.F(t) - k.A * std::pow(t, k.theta) + k.B * t * t >= -1e-12);
    }
  }
}

TEST_CASE("potential: single well arithmetic and (V1) margins") {
  const MetricGraph g = MetricGraph::build(preset_star(3, 20.0));
  SolverParams params;  // mc^2 = 1

  // depth 0.5 below V_inf = 0.3: min V = -0.2, inside (-1, 1)
  const Potential ok(0.3, {Well{GraphPoint{0, 0.0}, 0.5, 1.0}});
  CHECK(ok.value(g, {0, 0.0}) == doctest::Approx(-0.2));
  const PotentialReport rep = validate_V(ok, g, params, 0.1);
  CHECK(rep.report.pass());
  CHECK(rep.v_min == doctest::Approx(-0.2).epsilon(1e-6));

  // depth 2.0 dips below -mc^2
  const Potential bad(0.5, {Well{GraphPoint{0, 0.0}, 2.0, 1.0}});
  const PotentialReport repb = validate_V(bad, g, params, 0.1);
  CHECK(!repb.report.pass());
}

TEST_CASE("two equal wells on distinct legs are both detected") {
  const MetricGraph g = MetricGraph::build(preset_star(3, 20.0));
  SolverParams params;
  const Potential V(0.1, {Well{GraphPoint{0, 1.0}, 0.3, 0.5}, Well{GraphPoint{1, 1.0}, 0.3, 0.5}});
  const PotentialReport rep = validate_V(V, g, params, 0.05);
  CHECK(rep.report.pass());
  CHECK(rep.minima.size() == 2);
}

TEST_CASE("potential is Lipschitz along sampled pairs") {
  const MetricGraph g = MetricGraph::build(preset_star(3, 10.0));
  const Potential V(0.1, {Well{GraphPoint{0, 1.0}, 0.4, 0.6}});
  // slope bound for a Gaussian well: A * sqrt(2/e) / s
  double lip = 0.0;
  for (const auto& w : V.wells()) lip += w.depth * std::sqrt(2.0 / std::exp(1.0)) / w.width;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const int e1 = static_cast<int>(unif(rng) * 3), e2 = static_cast<int>(unif(rng) * 3);
    const GraphPoint a{e1, unif(rng) * 10.0}, b{e2, unif(rng) * 10.0};
    const double dv = std::abs(V.value(g, a) - V.value(g, b));
    CHECK(dv <= lip * g.path_distance(a, b) + 1e-12);
  }
}

TEST_CASE("scaled field: wells dilate along their edges") {
  const MetricGraph g = MetricGraph::build(preset_star(3, 20.0));
  const Potential V(0.1, {Well{GraphPoint{0, 1.0}, 0.3, 0.5}});
  const double eps = 0.2;
  // the dilated minimum sits at s = 1/eps = 5 on edge 0
  CHECK(V.value_scaled(g, {0, 5.0}, eps) == doctest::Approx(0.1 - 0.3));
  // V(eps x) = V at the eps-dilated point: check against the unscaled field
  for (double s : {0.5, 2.0, 7.0}) {
    const double direct = V.value(g, {0, eps * s});
    CHECK(V.value_scaled(g, {0, s}, eps) == doctest::Approx(direct).epsilon(1e-12));
  }
  // scaling must fail when the dilated well leaves the truncated edge
  CHECK_THROWS_AS(V.value_scaled(g, {0, 1.0}, 0.01), std::invalid_argument);
}
