#include <cmath>
#include <random>

#include "cilt/geometry.hpp"
#include "cilt/parallel.hpp"
#include "doctest.h"

using namespace cilt;

TEST_CASE("g0 sphere Green function") {
  CHECK(green_sphere_g0({0, 0}, {1, 0}) == doctest::Approx(0.0));
  CHECK(green_sphere_g0({2, 0}, {0.5, 0}) ==
        doctest::Approx(std::log(4.0 / 3.0)).epsilon(1e-15));
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    Complex z{u(rng), u(rng)}, w{u(rng), u(rng)};
    if (std::abs(z - w) < 1e-3) continue;
    CHECK(std::abs(green_sphere_g0(z, w) - green_sphere_g0(w, z)) < 1e-15);
  }
  CHECK_THROWS_AS(green_sphere_g0({1, 1}, {1, 1}), std::domain_error);
}

TEST_CASE("torus Green function: invariances and truncation tail") {
  const Complex tau{0.3, 1.1};
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.05, 0.95);

  for (int i = 0; i < 20; ++i) {
    Complex z{u(rng), u(rng)}, w{u(rng), u(rng)};
    z = Complex(z.real(), 0) + tau * z.imag();
    w = Complex(w.real(), 0) + tau * w.imag();
    if (std::abs(z - w) < 0.05) continue;
    auto a = green_torus(tau, z, w, 24);
    // translation invariance under lattice-respecting shifts
    const Complex shift = Complex(0.37, 0) + tau * 0.21;
    auto b = green_torus(tau, z + shift, w + shift, 24);
    CHECK(std::abs(a.value - b.value) < 1e-12);
    // symmetry
    auto c = green_torus(tau, w, z, 24);
    CHECK(std::abs(a.value - c.value) < 1e-12);
  }

  // doubling the mode count moves the value by less than the reported tail
  int tested = 0;
  for (int i = 0; i < 50; ++i) {
    Complex z{u(rng), u(rng)}, w{u(rng), u(rng)};
    z = Complex(z.real(), 0) + tau * z.imag();
    w = Complex(w.real(), 0) + tau * w.imag();
    if (std::abs(z - w) < 0.05) continue;
    auto a = green_torus(tau, z, w, 32);
    auto b = green_torus(tau, z, w, 64);
    CHECK(std::abs(a.value - b.value) <= a.tail_bound);
    ++tested;
  }
  CHECK(tested >= 40);

  // truncated sum converges to the resummed kernel within the tail bound
  for (int i = 0; i < 20; ++i) {
    Complex z{u(rng), u(rng)}, w{u(rng), u(rng)};
    z = Complex(z.real(), 0) + tau * z.imag();
    w = Complex(w.real(), 0) + tau * w.imag();
    if (std::abs(z - w) < 0.05) continue;
    auto a = green_torus(tau, z, w, 48);
    const double f = green_torus_fast(tau, z, w);
    CHECK(std::abs(a.value - f) <= a.tail_bound);
  }
}

TEST_CASE("torus Green function has zero spatial mean") {
  const Complex tau{0.0, 1.0};
  const Complex w{0.31, 0.57};
  QuadratureGrid g = torus_grid(tau, 96);
  double mean = 0;
  for (size_t i = 0; i < g.nodes.size(); ++i)
    mean += green_torus_fast(tau, g.nodes[i], w) * g.weights[i];
  CHECK(std::abs(mean) < 2e-4);  // midpoint-rule error around the log singularity
}

TEST_CASE("disc Dirichlet Green function") {
  CHECK(green_disc_dirichlet({0, 0}, {0.4, 0.1}) ==
        doctest::Approx(-std::log(std::abs(Complex{0.4, 0.1}))).epsilon(1e-14));
  // boundary decay along a ray, monotone tail
  double prev = green_disc_dirichlet({0.2, 0.3}, {0.9, 0.0});
  for (double r : {0.99, 0.999}) {
    double g = green_disc_dirichlet({0.2, 0.3}, {r, 0.0});
    CHECK(g < prev);
    CHECK(g > 0.0);
    prev = g;
  }
  CHECK(green_disc_dirichlet({0.2, 0.3}, {0.999, 0.0}) < 5e-3);
  // positivity on random interior pairs
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-0.99, 0.99);
  int n = 0;
  while (n < 10000) {
    Complex z{u(rng), u(rng)}, w{u(rng), u(rng)};
    if (std::abs(z) >= 0.99 || std::abs(w) >= 0.99 || std::abs(z - w) < 1e-6)
      continue;
    CHECK(green_disc_dirichlet(z, w) >= 0.0);
    ++n;
  }
}

TEST_CASE("disc Green matches a five-point Dirichlet solve") {
  const Complex src{0.25, 0.1}, probe{-0.3, 0.35};
  const double fd = fd_disc_green(src, probe, 200);
  const double ex = green_disc_dirichlet(src, probe);
  CHECK(std::abs(fd - ex) < 2e-3);
}

TEST_CASE("annulus Dirichlet Green: boundary decay, symmetry, FD oracle") {
  const double q = 0.35;
  const Complex z{0.6, 0.1}, w{-0.15, 0.55};
  CHECK(green_annulus_dirichlet(q, z, w) ==
        doctest::Approx(green_annulus_dirichlet(q, w, z)).epsilon(1e-13));
  CHECK(green_annulus_dirichlet(q, z, {0.999, 0.0}) < 5e-3);
  CHECK(green_annulus_dirichlet(q, z, std::polar(q * 1.001, 1.0)) < 5e-3);
  CHECK(std::abs(fd_annulus_green(q, z, w, 200) -
                 green_annulus_dirichlet(q, z, w)) < 2e-3);
}

TEST_CASE("Moebius maps") {
  Mobius id;
  for (Complex z : {Complex{0.3, 0.4}, Complex{-2, 1}}) {
    auto im = mobius_apply(id, ExtPoint::at(z));
    CHECK(std::abs(im.point.z - z) == 0.0);
    CHECK(im.deriv_modulus == doctest::Approx(1.0));
  }
  // psi(z) = 1/z : normalized (a,b,c,d) = (0, i, i, 0)
  Mobius inv{{0, 0}, {0, 1}, {0, 1}, {0, 0}};
  inv.normalize();
  CHECK(mobius_apply(inv, ExtPoint::at({0, 0})).point.infinite);
  CHECK(std::abs(mobius_apply(inv, ExtPoint::inf()).point.z) < 1e-15);
  CHECK(std::abs(mobius_apply(inv, ExtPoint::at({1, 0})).point.z - Complex{1, 0}) <
        1e-15);
  CHECK(std::abs(mobius_apply(inv, ExtPoint::at({-1, 0})).point.z + Complex{1, 0}) <
        1e-15);

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto rand_mobius = [&]() {
    Mobius m{{u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}};
    m.normalize();
    return m;
  };
  for (int i = 0; i < 30; ++i) {
    Mobius f = rand_mobius(), g = rand_mobius();
    Mobius fg = Mobius::compose(f, g);
    Complex z{u(rng), u(rng)};
    auto one = mobius_apply(fg, ExtPoint::at(z));
    auto two = mobius_apply(f, mobius_apply(g, ExtPoint::at(z)).point);
    if (one.point.infinite || two.point.infinite) continue;
    CHECK(std::abs(one.point.z - two.point.z) < 1e-12);
  }

  // cross-ratio preservation
  auto cross = [](Complex a, Complex b, Complex c, Complex d) {
    return ((a - c) / (a - d)) * ((b - d) / (b - c));
  };
  for (int i = 0; i < 20; ++i) {
    Mobius f = rand_mobius();
    Complex a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)}, d{u(rng), u(rng)};
    auto fa = mobius_apply(f, ExtPoint::at(a)), fb = mobius_apply(f, ExtPoint::at(b)),
         fc = mobius_apply(f, ExtPoint::at(c)), fd = mobius_apply(f, ExtPoint::at(d));
    if (fa.point.infinite || fb.point.infinite || fc.point.infinite ||
        fd.point.infinite)
      continue;
    const Complex r1 = cross(a, b, c, d);
    const Complex r2 = cross(fa.point.z, fb.point.z, fc.point.z, fd.point.z);
    CHECK(std::abs(r1 - r2) < 1e-12 * std::max(1.0, std::abs(r1)));
  }
}

TEST_CASE("curvature values and Gauss-Bonnet") {
  auto round = Surface::sphere_round();
  CHECK(curvature(round, {0.3, -0.7}) == doctest::Approx(2.0));
  auto torus = Surface::torus({0.2, 1.3});
  CHECK(curvature(torus, {0.1, 0.1}) == doctest::Approx(0.0));
  auto g0 = Surface::sphere_g0();
  CHECK(curvature(g0, {0.5, 0}) == doctest::Approx(0.0));
  CHECK(curvature(g0, {3.0, 0}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(curvature(g0, {1.0, 0}), std::domain_error);

  // (1/4pi) Int K dv = 2 on the round sphere (production grid, 1e-8)
  QuadratureGrid g = sphere_round_grid(160, 320);
  double total = 0;
  for (size_t i = 0; i < g.nodes.size(); ++i)
    total += curvature(round, g.nodes[i]) * g.weights[i];
  CHECK(std::abs(total / (4.0 * PI) - 2.0) < 1e-8);

  // flat torus: 0 exactly
  QuadratureGrid tg = torus_grid({0.2, 1.3}, 64);
  double tk = 0;
  for (size_t i = 0; i < tg.nodes.size(); ++i)
    tk += curvature(torus, tg.nodes[i]) * tg.weights[i];
  CHECK(tk == 0.0);

  // conformal deformation: Gauss-Bonnet still 2 within quadrature tolerance
  auto bump = gaussian_bump({0.4, 0.2}, 0.5, 0.8);
  auto conf = Surface::sphere_conformal(bump);
  double tc = 0;
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    const Complex z = g.nodes[i];
    // dv_conf = e^{rho} dv_round
    tc += curvature(conf, z) * std::exp(bump.value(z)) * g.weights[i];
  }
  CHECK(std::abs(tc / (4.0 * PI) - 2.0) < 1e-8);
}

TEST_CASE("anomaly functional") {
  // flat torus, constant rho -> 0
  ConformalField cst;
  cst.value = [](Complex) { return 0.7; };
  cst.gradient = [](Complex) { return Complex{0, 0}; };
  cst.laplacian = [](Complex) { return 0.0; };
  CHECK(anomaly_functional(cst, Surface::torus({0, 1})) == doctest::Approx(0.0));

  // sphere with a bump: stratified Monte Carlo quadrature oracle
  auto bump = gaussian_bump({0.3, -0.2}, 0.6, 0.5);
  const double det = anomaly_functional(bump, Surface::sphere_round());

  CounterRng rng{424242, 1};
  const int nc = 512, nphi = 1024;
  double mc = 0;
  std::uint64_t ctr = 0;
  for (int i = 0; i < nc; ++i)
    for (int j = 0; j < nphi; ++j) {
      const double c = -1.0 + 2.0 * (i + rng.uniform(ctr++)) / nc;
      const double phi = TWO_PI * (j + rng.uniform(ctr++)) / nphi;
      const double psi = std::acos(c);
      const Complex z = std::polar(std::tan(0.5 * psi), phi);
      const double lam = std::log(2.0) - std::log1p(std::norm(z));
      const double grad2 = std::norm(bump.gradient(z)) * std::exp(-2.0 * lam);
      const double kr = 2.0 * bump.value(z);
      mc += grad2 + 2.0 * kr;  // |d rho|^2 + 2 K rho, K = 2
    }
  mc *= (2.0 / nc) * (TWO_PI / nphi) / (96.0 * PI);
  CHECK(std::abs(mc - det) < 1e-6);
}

TEST_CASE("grid total weights match areas") {
  CHECK(sphere_round_grid(80, 160).total_weight() ==
        doctest::Approx(4.0 * PI).epsilon(1e-12));
  CHECK(torus_grid({0.3, 1.7}, 32).total_weight() ==
        doctest::Approx(1.7).epsilon(1e-12));
  CHECK(disc_grid(48, 96).total_weight() == doctest::Approx(PI).epsilon(1e-12));
}
