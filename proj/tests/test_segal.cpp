#include <cmath>

#include "cilt/parallel.hpp"
#include "cilt/segal.hpp"
#include "doctest.h"

using namespace cilt;

namespace {

BoundaryField random_field(int n_modes, std::uint64_t seed, double c, long long k) {
  CounterRng rng{seed, 2};
  BoundaryField f;
  f.c = c;
  f.k = k;
  for (int n = 1; n <= n_modes; ++n) {
    double g1, g2;
    rng.gaussian_pair(n, g1, g2);
    f.modes.push_back(Complex(g1, g2) / (2.0 * std::sqrt((double)n)));
  }
  return f;
}

// RK4 integration of the radial mode ODE u'' + u'/r - n^2 u / r^2 = 0.
void rk4_mode(double n, double q, double u0, double du0, double& u1, double& du1) {
  const int steps = 4000;
  const double h = (1.0 - q) / steps;
  double r = q, u = u0, du = du0;
  auto f = [&](double rr, double uu, double dd, double& k_u, double& k_du) {
    k_u = dd;
    k_du = -dd / rr + n * n * uu / (rr * rr);
  };
  for (int i = 0; i < steps; ++i) {
    double k1u, k1d, k2u, k2d, k3u, k3d, k4u, k4d;
    f(r, u, du, k1u, k1d);
    f(r + 0.5 * h, u + 0.5 * h * k1u, du + 0.5 * h * k1d, k2u, k2d);
    f(r + 0.5 * h, u + 0.5 * h * k2u, du + 0.5 * h * k2d, k3u, k3d);
    f(r + h, u + h * k3u, du + h * k3d, k4u, k4d);
    u += h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
    du += h / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d);
    r += h;
  }
  u1 = u;
  du1 = du;
}

}  // namespace

TEST_CASE("DN maps: disc eigenvalues, annulus blocks, decoupling limit") {
  auto disc = dn_map_disc(8);
  for (int n = 1; n <= 8; ++n) CHECK(disc.block(n, 0, 0) == doctest::Approx(n));
  CHECK(disc.block(0, 0, 0) == 0.0);

  // annulus q -> 0: coth -> 1, csch -> 0, disc behavior on the outer circle
  auto deep = dn_map_annulus(1e-6, 5);
  CHECK(deep.block(3, 0, 0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(std::abs(deep.block(3, 0, 1)) < 1e-12);

  // annulus q = 0.5, n = 3: block against the radial two-point RK4 solve
  const double q = 0.5;
  auto ann = dn_map_annulus(q, 4);
  // fundamental solutions from r = q
  double u1a, du1a, u1b, du1b;
  rk4_mode(3, q, 1.0, 0.0, u1a, du1a);
  rk4_mode(3, q, 0.0, 1.0, u1b, du1b);
  // boundary-data-to-coefficient map for data (out, in) = (phi_1, phi_q):
  // u = A * sol_a + B * sol_b with u(q) = A, u'(q) = B
  // constraints: u(1) = phi1 -> A u1a + B u1b = phi1 ; u(q) = phiq -> A = phiq
  // DN entries in the cylinder normalization: out: +r u'(1), in: -q u'(q)
  auto dn_entries = [&](double phi1, double phiq, double& out, double& in) {
    const double A = phiq;
    const double B = (phi1 - A * u1a) / u1b;
    out = 1.0 * (A * du1a + B * du1b);
    in = -q * B;
  };
  double o10, i10, o01, i01;
  dn_entries(1.0, 0.0, o10, i10);
  dn_entries(0.0, 1.0, o01, i01);
  CHECK(o10 == doctest::Approx(ann.block(3, 0, 0)).epsilon(1e-12));
  CHECK(i10 == doctest::Approx(ann.block(3, 1, 0)).epsilon(1e-12));
  CHECK(o01 == doctest::Approx(ann.block(3, 0, 1)).epsilon(1e-12));
  CHECK(i01 == doctest::Approx(ann.block(3, 1, 1)).epsilon(1e-12));
}

TEST_CASE("DN operator: symmetry, positivity, constant kernel") {
  auto ann = dn_map_annulus(0.37, 32);
  for (int n = 0; n <= 32; ++n) {
    CHECK(ann.block(n, 0, 1) == ann.block(n, 1, 0));
    const double tr = ann.block(n, 0, 0) + ann.block(n, 1, 1);
    const double det = ann.block(n, 0, 0) * ann.block(n, 1, 1) -
                       ann.block(n, 0, 1) * ann.block(n, 1, 0);
    CHECK(tr >= 0.0);
    CHECK(det >= -1e-12);
    if (n == 0) {
      // kernel is exactly the constant vector
      CHECK(std::abs(ann.block(0, 0, 0) + ann.block(0, 0, 1)) < 1e-15);
    } else {
      CHECK(det > 0.0);  // positive definite away from the zero mode
    }
  }
  // constant boundary field is annihilated
  BoundaryField cst;
  cst.c = 2.2;
  CHECK(ann.quadratic_form(cst, cst) == doctest::Approx(0.0));
}

TEST_CASE("smoothing: interior-circle difference entries decay like e^{-2nL}") {
  const double r0 = 0.45, L = -std::log(r0);
  auto dn = dn_map_interior_circle(r0, 64);
  std::vector<double> xs, ys;
  for (int n = 4; n <= 20; ++n) {
    const double diff = dn.block(n, 0, 0) - 2.0 * n;
    REQUIRE(diff > 0);
    xs.push_back(n);
    // remove the known 2n prefactor; the claim is about the exponential rate
    ys.push_back(std::log(diff / (2.0 * n)));
  }
  auto [a, slope] = linear_fit(xs, ys);
  (void)a;
  CHECK(std::abs(slope - (-2.0 * L)) < 0.05 * 2.0 * L);
}

TEST_CASE("inverse interior-circle map matches the Dirichlet Green pairing") {
  const double r0 = 0.45;
  const int N = 6;
  auto dn = dn_map_interior_circle(r0, N);
  for (int probe = 0; probe < 5; ++probe) {
    BoundaryField f = random_field(N, 40 + probe, 0.3 * probe - 0.5, 0);
    // <D^{-1} f, f> from the blocks
    double lhs = f.c * f.c / dn.block(0, 0, 0);
    for (int n = 1; n <= N; ++n)
      lhs += 2.0 * std::norm(f.modes[n - 1]) / dn.block(n, 0, 0);
    // (1/2pi)^2 IntInt G_D phi phi with the log part analytic
    const int M = 2048;
    double smooth = 0;
    for (int i = 0; i < M; ++i) {
      const double th = TWO_PI * i / M;
      const Complex y = std::polar(r0, th);
      for (int j = 0; j < M; ++j) {
        const double tp = TWO_PI * (j + 0.5) / M;
        const Complex yp = std::polar(r0, tp);
        smooth += (green_disc_dirichlet(y, yp) + std::log(std::abs(y - yp))) *
                  f.value(th) * f.value(tp);
      }
    }
    smooth /= (double)M * M;
    double logpart = -std::log(r0) * f.c * f.c;
    for (int n = 1; n <= N; ++n) logpart += std::norm(f.modes[n - 1]) / (double)n;
    CHECK(std::abs(lhs - (smooth + logpart)) < 1e-8 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("free amplitudes: disc trivial, constants trivial, energy oracle") {
  BoundaryField f = random_field(24, 7, 0.9, 0);
  CHECK(free_amplitude_disc(f) == doctest::Approx(1.0).epsilon(1e-14));

  BoundaryField cst;
  cst.c = -1.3;
  CHECK(free_amplitude_annulus(0.41, cst, cst) == doctest::Approx(1.0));

  // single mode n with amplitude t: closed form against the Dirichlet energy
  // of the harmonic extension, Int |dP|^2 dv = 2 pi <phi, D_Sigma phi>
  const double q = 0.5;
  const int n = 2;
  const double t = 0.37;
  BoundaryField outer;
  outer.modes = {{0, 0}, {t, 0}};
  BoundaryField inner;  // zero data on the inner circle
  inner.modes = {{0, 0}, {0, 0}};

  // energy quadrature in the cylinder chart with analytic gradients:
  // P = 2 Re[(a e^{n s} + b e^{-n s}) e^{i n theta}], s = ln r
  const double l = -std::log(q);
  const double qn = std::pow(q, n), q2n = qn * qn;
  const Complex a = Complex{t / (1.0 - q2n), 0};
  const Complex b = Complex{-t * q2n / (1.0 - q2n), 0};
  std::vector<double> sx, sw;
  gauss_legendre_ab(200, -l, 0.0, sx, sw);
  double energy = 0;
  const int nth = 256;
  for (size_t i = 0; i < sx.size(); ++i) {
    for (int j = 0; j < nth; ++j) {
      const double th = TWO_PI * (j + 0.5) / nth;
      const Complex cphase = std::polar(1.0, n * th);
      const Complex radial = a * std::exp(n * sx[i]) + b * std::exp(-n * sx[i]);
      const Complex dradial =
          (double)n * (a * std::exp(n * sx[i]) - b * std::exp(-n * sx[i]));
      const double ps = 2.0 * (dradial * cphase).real();
      const double pth = 2.0 * (radial * Complex(0, (double)n) * cphase).real();
      energy += (ps * ps + pth * pth) * sw[i] * (TWO_PI / nth);
    }
  }
  auto dn = dn_map_annulus(q, n);
  const double qform = dn.quadratic_form(outer, inner);
  CHECK(std::abs(energy - TWO_PI * qform) < 1e-10 * std::abs(energy));

  const double amp = free_amplitude_annulus(q, outer, inner);
  CHECK(amp == doctest::Approx(std::exp(-0.5 * (qform - d_quadratic_form(outer) -
                                                d_quadratic_form(inner)))));
}

TEST_CASE("sector amplitude: winding delta, kc symmetry, bump reductions") {
  const double R = 1.5, q = 0.55;
  AnnulusAmplitude amp{q, R, 16};

  BoundaryField out = random_field(16, 3, 0.4, 1);
  BoundaryField in = random_field(16, 4, -0.2, 2);
  CHECK(amp.value(out, in) == 0.0);  // k mismatch

  // zero boundary data, k = 0: the theta sum is symmetric under kc -> -kc
  const double l = -std::log(q);
  for (long long kc = 1; kc <= 6; ++kc) {
    const double plus = std::exp(-0.5 * sq(TWO_PI * R * (double)kc) / l);
    const double minus = std::exp(-0.5 * sq(TWO_PI * R * (double)(-kc)) / l);
    CHECK(plus == minus);
  }

  // bump-form reduction: ||omega_bump||^2 - Var/(2 pi) = ||omega_harm||^2
  for (long long kc : {1LL, 2LL}) {
    auto bump = annulus_relative_form(kc, q, R);
    const double bump_norm = regularized_norm(bump, Surface::annulus(q), {1e-2}).value;
    const double var = bump_girsanov_variance(q, R, kc);
    const double harm = sq(TWO_PI * R * (double)kc) * TWO_PI / l;
    CHECK(std::abs((bump_norm - var / TWO_PI) - harm) < 1e-8 * harm);
  }

  // cross term for constant boundary data against the log-profile pairing:
  // Int grad P . omega^c dA with P = a + b ln r
  const double c_out = 0.8, c_in = -0.4;
  const double cross = bump_cross_term(q, R, 1, c_out, c_in);
  auto prof = radial_log_profile(c_out, c_in, q);
  auto form = annulus_relative_form(1, q, R);
  // quadrature in polar coordinates: grad P = b/r r-hat
  const double bcoef = (c_in - c_out) / std::log(q);
  // bump support in r: panel exactly over [q^{3/4}, q^{1/4}]
  std::vector<double> rx, rw;
  gauss_legendre_ab(400, std::pow(q, 0.75), std::pow(q, 0.25), rx, rw);
  double direct = 0;
  for (size_t i = 0; i < rx.size(); ++i) {
    const Complex z{rx[i], 0.0};
    const Complex v = form.covector(z);  // radial by construction
    direct += (bcoef / rx[i]) * v.real() * rx[i] * rw[i] * TWO_PI;
  }
  (void)prof;
  CHECK(std::abs(cross - direct) < 1e-8 * std::max(1.0, std::abs(cross)));
}

TEST_CASE("per-mode free-part gluing identity (coth addition)") {
  const double dev = glue_mode_identity_deviation(0.6, 0.6, 64, {0.7, -0.3}, {0.2, 0.5});
  CHECK(dev < 1e-10);
  const double dev2 = glue_mode_identity_deviation(0.45, 0.7, 48, {1.1, 0.0}, {-0.4, 0.9});
  CHECK(dev2 < 1e-10);
}

TEST_CASE("annulus gluing with the 1/(sqrt 2 pi) constant") {
  const double R = 1.5;
  GlueBattery battery;
  // constant fields: zero-mode and winding factors only
  BoundaryField c1;
  c1.c = 0.7;
  BoundaryField c2;
  c2.c = -0.9;
  battery.outer.push_back(c1);
  battery.inner.push_back(c2);
  // random mode batteries, winding sectors 0 and 1
  for (int b = 0; b < 4; ++b) {
    battery.outer.push_back(random_field(64, 100 + b, 0.3 * b, b % 2));
    battery.inner.push_back(random_field(64, 200 + b, -0.2 * b, b % 2));
  }
  const double dev = glue_check(0.6, 0.6, 64, battery, R);
  CHECK(dev < 1e-6);
  const double dev2 = glue_check(0.5, 0.75, 48, battery, R);
  CHECK(dev2 < 1e-6);

  // truncation decay: the N-truncated glued amplitude approaches the deep
  // reference exponentially in N
  AnnulusAmplitude ref{0.36, R, 256};
  BoundaryField fo = random_field(256, 11, 0.2, 0);
  BoundaryField fi = random_field(256, 12, -0.5, 0);
  const double full = ref.value(fo, fi);
  std::vector<double> xs, ys;
  for (int N : {4, 6, 8, 10, 12, 14}) {
    AnnulusAmplitude trunc{0.36, R, N};
    const double v = trunc.value(fo, fi);
    const double err = std::abs(v - full) / std::abs(full);
    xs.push_back(N);
    ys.push_back(std::log(err));
  }
  auto [icpt, slope] = linear_fit(xs, ys);
  (void)icpt;
  // truncation theory: the csch cross terms decay like e^{-n L}, L = ln(1/0.36)
  const double L36 = -std::log(0.36);
  CHECK(slope < -0.6 * L36);
  CHECK(slope > -1.8 * L36);
}

TEST_CASE("self-gluing reproduces the torus instanton weights") {
  const double q = 0.2, R = 1.3;
  CHECK(self_glue_torus_check(q, 64, 3, R) < 1e-6);

  // weight(k)/weight(0) matches exp(-pi R^2 k^2 tau_2)
  const double l = -std::log(q);
  AnnulusAmplitude amp{q, R, 64};
  for (long long k : {1LL, 2LL}) {
    const double ratio = amp.winding_weight(k) / amp.winding_weight(0);
    CHECK(std::abs(ratio - std::exp(-PI * R * R * (double)(k * k) * l / TWO_PI)) <
          1e-6 * ratio);
  }

  // R-scaling: doubling R multiplies -log(weight(1)/weight(0)) by 4
  AnnulusAmplitude amp2{q, 2.0 * R, 64};
  const double g1 = -std::log(amp.winding_weight(1) / amp.winding_weight(0));
  const double g2 = -std::log(amp2.winding_weight(1) / amp2.winding_weight(0));
  CHECK(g2 == doctest::Approx(4.0 * g1).epsilon(1e-8));

  CHECK(self_glue_mode_trace(q, 64) > 1.0);
}
