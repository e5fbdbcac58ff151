#include <cmath>

#include "cilt/correlators.hpp"
#include "cilt/parallel.hpp"
#include "doctest.h"

using namespace cilt;

namespace {

ModelParams p191() { return derive_params(1, 9, 1, {0.7, 0.4}); }

// l(x) through a fully separate code path (lgamma on shifted arguments)
double l_ref(double x) {
  return std::tgamma(x) / std::tgamma(1.0 - x);
}

Insertion make_ins(Complex z, double alpha, long long m, double tangent = 0.0,
                   bool inf = false) {
  Insertion q;
  q.position = z;
  q.alpha = alpha;
  q.m = m;
  q.tangent = tangent;
  q.at_infinity = inf;
  return q;
}

}  // namespace

TEST_CASE("df integrand: positivity, conjugation, independent re-derivation") {
  DfSpec spec;
  spec.s = 1;
  spec.a1 = -4.0 / 3.0;
  spec.a2 = -4.0 / 3.0;
  spec.beta_sq = 4.0 / 9.0;
  spec.validate();

  // s = 1, no phase, x real in (0,1): positive real x^{a1} (1-x)^{a2}
  const Complex v = df_integrand({Complex{0.37, 0.0}}, spec);
  CHECK(v.imag() == 0.0);
  CHECK(v.real() == doctest::Approx(std::pow(0.37, spec.a1) *
                                    std::pow(0.63, spec.a2)));

  // conjugation symmetry with phases
  DfSpec sm = spec;
  sm.s = 2;
  sm.a2 = -1.2;
  sm.w1 = 2;
  sm.w2 = -1;
  std::vector<Complex> xs = {{0.3, 0.4}, {-0.7, 1.1}};
  std::vector<Complex> xc = {std::conj(xs[0]), std::conj(xs[1])};
  CHECK(std::abs(df_integrand(xc, sm) - std::conj(df_integrand(xs, sm))) < 1e-15);

  // from-scratch re-derivation with a separate log/atan2 path
  auto oracle = [&](const std::vector<Complex>& x) {
    double log_mod = 0.0, phase = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
      log_mod += sm.a1 * 0.5 * std::log(x[i].real() * x[i].real() +
                                        x[i].imag() * x[i].imag());
      const double re1 = 1.0 - x[i].real(), im1 = -x[i].imag();
      log_mod += sm.a2 * 0.5 * std::log(re1 * re1 + im1 * im1);
      phase += sm.w1 * std::atan2(x[i].imag(), x[i].real());
      phase -= sm.w2 * std::atan2(im1, re1);
      for (size_t j = i + 1; j < x.size(); ++j) {
        const double dx = x[i].real() - x[j].real();
        const double dy = x[i].imag() - x[j].imag();
        log_mod += sm.beta_sq * 0.5 * std::log(dx * dx + dy * dy);
      }
    }
    return Complex{std::exp(log_mod) * std::cos(phase),
                   std::exp(log_mod) * std::sin(phase)};
  };
  CHECK(std::abs(df_integrand(xs, sm) - oracle(xs)) <
        1e-13 * std::abs(oracle(xs)));

  CHECK_THROWS_AS(df_integrand({Complex{0, 0}}, spec), std::domain_error);
}

TEST_CASE("df integral: s = 0 convention and the s = 1 DOZZ value") {
  const Complex mu{0.7, 0.4};
  DfSpec s0;
  s0.s = 0;
  s0.a1 = s0.a2 = -1.0;
  s0.beta_sq = 0.5;
  CHECK(df_integral(s0, mu, DfMethod::quadrature, 0).value == Complex{1, 0});

  // beta = 2/3, alpha = (-2,-2,-2): value -mu pi / l(2/3)^3
  DfSpec s1;
  s1.s = 1;
  s1.a1 = s1.a2 = -4.0 / 3.0;
  s1.beta_sq = 4.0 / 9.0;
  const Complex expect = -mu * PI / std::pow(l_ref(2.0 / 3.0), 3);
  auto got = df_integral(s1, mu, DfMethod::quadrature, 0);
  CHECK(std::abs(got.value - expect) < 1e-3 * std::abs(expect));
  CHECK(std::abs(got.value - expect) < 5e-6 * std::abs(expect));  // actual rate
}

TEST_CASE("imaginary DOZZ closed form") {
  auto params = p191();
  CHECK(imaginary_dozz(params, {-2, -2, -4.0 / 3.0}, 0).value == Complex{1, 0});

  const Complex expect = -PI * params.mu / std::pow(l_ref(2.0 / 3.0), 3);
  auto dz = imaginary_dozz(params, {-2, -2, -2}, 1);
  REQUIRE(!dz.singular);
  CHECK(std::abs(dz.value - expect) < 1e-12 * std::abs(expect));

  // s = 1 general identity: -pi mu / prod l(-beta alpha_j / 2)
  for (auto alphas : std::vector<std::array<double, 3>>{
           {-2, -8.0 / 3.0, -2.0 / 3.0},
           {-4.0 / 3.0, -2, -8.0 / 3.0},
           {-2.0 / 3.0, -2.0 / 3.0, -14.0 / 3.0}}) {
    auto d = imaginary_dozz(params, alphas, 1);
    if (d.singular) continue;
    double denom = 1.0;
    for (double a : alphas) denom *= l_ref(-0.5 * params.beta * a);
    const Complex ref = -PI * params.mu / denom;
    CHECK(std::abs(d.value - ref) < 1e-12 * std::abs(ref));
  }
}

TEST_CASE("df quadrature matches DOZZ for more s = 1 charge assignments") {
  // the k = 2 lattice admits several admissible sum-rule triples
  auto params = derive_params(1, 9, 2, {0.7, 0.4});
  const double beta = params.beta;
  for (auto alphas : std::vector<std::array<double, 3>>{
           {-7.0 / 3.0, -7.0 / 3.0, -4.0 / 3.0},
           {-5.0 / 3.0, -2.0, -7.0 / 3.0}}) {
    // admissibility: all > Q and the truncation gives s = 1
    DfSpec spec;
    spec.s = 1;
    spec.a1 = beta * alphas[0];
    spec.a2 = beta * alphas[1];
    spec.beta_sq = beta * beta;
    spec.validate();
    auto quad = df_integral(spec, params.mu, DfMethod::quadrature, 0);
    auto dz = imaginary_dozz(params, alphas, 1);
    REQUIRE(!dz.singular);
    CHECK(std::abs(quad.value - dz.value) < 1e-3 * std::abs(dz.value));
  }
}

TEST_CASE("df permutation covariance: x -> 1 - x swaps the insertions") {
  const Complex mu{1.0, 0.0};
  DfSpec a;
  a.s = 1;
  a.a1 = -1.3;
  a.a2 = -1.0;
  a.w1 = 1;
  a.w2 = -2;
  a.beta_sq = 0.8;
  DfSpec b = a;
  std::swap(b.a1, b.a2);
  b.w1 = -a.w2;
  b.w2 = -a.w1;
  auto va = df_integral(a, mu, DfMethod::quadrature, 0);
  auto vb = df_integral(b, mu, DfMethod::quadrature, 0);
  CHECK(std::abs(va.value - vb.value) <
        1e-5 * std::abs(va.value) + va.std_error + vb.std_error);
}

TEST_CASE("df conjugation: negating the magnetic phases conjugates the value") {
  const Complex mu{1.0, 0.0};
  DfSpec a;
  a.s = 1;
  a.a1 = -1.2;
  a.a2 = -1.0;
  a.w1 = 2;
  a.w2 = 1;
  a.beta_sq = 0.7;
  DfSpec b = a;
  b.w1 = -a.w1;
  b.w2 = -a.w2;
  auto va = df_integral(a, mu, DfMethod::quadrature, 0);
  auto vb = df_integral(b, mu, DfMethod::quadrature, 0);
  CHECK(std::abs(va.value - std::conj(vb.value)) < 1e-8 * std::abs(va.value));
}

TEST_CASE("df quadrature matches DOZZ at s = 2 (1e-3 relative)") {
  auto params = derive_params(1, 9, 2, {1.0, 0.0});
  const std::array<double, 3> alphas = {-7.0 / 3.0, -7.0 / 3.0, -2.0};
  DfSpec spec;
  spec.s = 2;
  spec.a1 = params.beta * alphas[0];
  spec.a2 = params.beta * alphas[1];
  spec.beta_sq = params.beta * params.beta;
  auto quad = df_integral(spec, params.mu, DfMethod::quadrature, 0);
  auto dz = imaginary_dozz(params, alphas, 2);
  REQUIRE(!dz.singular);
  CHECK(std::abs(quad.value - dz.value) < 1e-3 * std::abs(dz.value));
  CHECK(std::abs(quad.value - dz.value) < 1e-4 * std::abs(dz.value));
}

TEST_CASE("df Monte Carlo agrees with quadrature and is thread-deterministic") {
  const Complex mu{1.0, 0.0};
  DfSpec s1;
  s1.s = 1;
  s1.a1 = s1.a2 = -4.0 / 3.0;
  s1.beta_sq = 4.0 / 9.0;
  auto quad = df_integral(s1, mu, DfMethod::quadrature, 0);
  auto mc = df_integral(s1, mu, DfMethod::monte_carlo, 400000, 3);
  CHECK(std::abs(mc.value - quad.value) < 3.0 * mc.std_error);

  set_threads(1);
  auto mc1 = df_integral(s1, mu, DfMethod::monte_carlo, 100000, 3);
  set_threads(0);
  auto mc2 = df_integral(s1, mu, DfMethod::monte_carlo, 100000, 3);
  CHECK(mc1.value == mc2.value);
}

TEST_CASE("three point: ell = 0 normal form, spin rotation, vanishing rule") {
  auto params = p191();
  // ell = 0: sum alpha = 2Q = -16/3
  InsertionSet ins = {make_ins({0, 0}, -2, 0), make_ins({1, 0}, -2, 0),
                      make_ins({0, 0}, -4.0 / 3.0, 0, 0.0, true)};
  auto r = three_point(params, ins, SphereMetricKind::g0);
  REQUIRE(r.variant == ThreePointResult::Variant::value);
  CHECK(r.ell == 0);
  CHECK(std::abs(r.value - Complex{TWO_PI * params.radius, 0}) < 1e-12);

  // rotating tangent v1 multiplies by exp(-i Q R m_1 theta) exactly
  InsertionSet mag = {make_ins({0, 0}, -2, 1), make_ins({1, 0}, -2, -1),
                      make_ins({0, 0}, -4.0 / 3.0, 0, 0.0, true)};
  auto base = three_point(params, mag, SphereMetricKind::g0);
  REQUIRE(base.variant == ThreePointResult::Variant::value);
  const double theta = 0.77;
  InsertionSet rot = mag;
  rot[0].tangent += theta;
  auto rotated = three_point(params, rot, SphereMetricKind::g0);
  const Complex expect_phase =
      std::polar(1.0, -params.q_charge * params.radius * 1.0 * theta);
  CHECK(std::abs(rotated.value - expect_phase * base.value) <
        1e-12 * std::abs(base.value));

  // theta = 2 pi simulated as two pi-rotations gives phase 1 (Q R integer)
  InsertionSet full = mag;
  full[0].tangent += PI;
  full[0].tangent += PI;
  auto turned = three_point(params, full, SphereMetricKind::g0);
  CHECK(std::abs(turned.value - base.value) < 1e-10 * std::abs(base.value));

  // spin phases compose additively
  InsertionSet two_step = mag;
  two_step[0].tangent += 0.3;
  two_step[0].tangent += 0.4;
  InsertionSet one_step = mag;
  one_step[0].tangent += 0.7;
  CHECK(three_point(params, two_step, SphereMetricKind::g0).value ==
        three_point(params, one_step, SphereMetricKind::g0).value);

  // vanishing: negative ell
  InsertionSet van = {make_ins({0, 0}, -2, 0), make_ins({1, 0}, -2, 0),
                      make_ins({0, 0}, -2.0 / 3.0, 0, 0.0, true)};
  auto v = three_point(params, van, SphereMetricKind::g0);
  CHECK(v.variant == ThreePointResult::Variant::vanishing);
  CHECK(v.value == Complex{0, 0});

  // invalid carries a reason
  InsertionSet bad = {make_ins({0, 0}, -2, 1), make_ins({1, 0}, -2, 0),
                      make_ins({0, 0}, -4.0 / 3.0, 0, 0.0, true)};
  auto b = three_point(params, bad, SphereMetricKind::g0);
  CHECK(b.variant == ThreePointResult::Variant::invalid);
  CHECK(!b.reason.empty());
}

TEST_CASE("three point decomposition multiplies back to the value") {
  auto params = p191();
  InsertionSet mag = {make_ins({0.3, 0.2}, -2, 1, 0.4),
                      make_ins({1.2, -0.1}, -2, -1, -0.3),
                      make_ins({-0.7, 0.6}, -4.0 / 3.0, 0, 0.2)};
  auto r = three_point(params, mag, SphereMetricKind::g0);
  REQUIRE(r.variant == ThreePointResult::Variant::value);
  const Complex product = r.prefactor * r.spin_phase * r.structure_constant *
                          r.metric_factors * r.anomaly;
  CHECK(std::abs(product - r.value) <= 1e-12 * std::abs(r.value));
}

TEST_CASE("Moebius covariance of the three point function") {
  auto params = p191();

  // identity map: deviation 0
  InsertionSet ins = {make_ins({0.2, 0.1}, -2, 0), make_ins({1.3, -0.4}, -2, 0),
                      make_ins({-0.8, 0.9}, -4.0 / 3.0, 0)};
  Mobius id;
  CHECK(mobius_covariance_check(params, ins, id) < 1e-14);

  // psi(z) = 1/z on a collinear ell = 0 configuration: algebra only
  InsertionSet col = {make_ins({0.5, 0}, -2, 0), make_ins({1.0, 0}, -2, 0),
                      make_ins({2.5, 0}, -4.0 / 3.0, 0)};
  Mobius inv{{0, 0}, {0, 1}, {0, 1}, {0, 0}};
  inv.normalize();
  CHECK(mobius_covariance_check(params, col, inv) < 1e-10);

  // rotation-like map on an ell = 1 configuration with quadrature structure
  // constants (magnetic, so the DF route is exercised)
  InsertionSet ell1 = {make_ins({0.4, 0.2}, -2, 1, 0.3),
                       make_ins({1.1, -0.3}, -2, -1, -0.2),
                       make_ins({-0.6, 0.8}, -2, 0, 0.1)};
  Mobius rot{{std::cos(0.4), std::sin(0.4)}, {0.1, 0}, {0, 0}, {1, 0}};
  rot.normalize();
  CHECK(mobius_covariance_check(params, ell1, rot) < 1e-6);
}
