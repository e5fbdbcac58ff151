#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cilt/geometry.hpp"
#include "cilt/numerics.hpp"
#include "cilt/parallel.hpp"

namespace cilt {

// Torus GFF in the mode representation: Hermitian coefficients over the
// sheared dual-lattice box |m| <= N, |n - round(m tau1)| <= N, with mode
// variance 2 pi / lambda. Deterministic for a given seed.
struct TorusField {
  Complex tau{0.0, 1.0};
  int n_modes = 0;  // N
  std::uint64_t seed = 0;
  // coefficient of exp(2 pi i (m x' + n y')) for m > 0 or (m == 0, n > 0);
  // the conjugate mode is implied. Indexed by the packed list below.
  std::vector<Complex> coeff;
  std::vector<std::pair<int, long long>> modes;  // (m, n)

  // physical |k| and Laplace eigenvalue of a mode
  double eigenvalue(int m, long long n) const;

  // field values on the lattice-uniform G x G grid (row-major in x'), with
  // the circle-average multiplier J0(|k| eps) applied when eps > 0
  std::vector<double> grid_values(int G, double eps) const;

  // exact circle average at a point via per-mode Bessel multipliers
  double circle_average(Complex z, double eps) const;

  // E[X_eps(x)^2] of the truncated field, deterministic mode sum
  double variance_eps(double eps) const;
};

TorusField sample_torus_gff(Complex tau, int n_modes, std::uint64_t seed);

// Dirichlet GFF samples on a fixed grid via dense Cholesky of the exact
// image-formula covariance; the regularized diagonal is -ln(eps) + W(x).
struct DiscSampler {
  QuadratureGrid grid;
  double eps = 0.0;
  std::vector<double> chol;  // lower-triangular factor, row-major
  int jitter_steps = 0;      // diagonal jitter fallbacks taken by Cholesky

  int size() const { return (int)grid.nodes.size(); }
  std::vector<double> sample(std::uint64_t seed, std::uint64_t index) const;
};

// domain: unit disc, or the annulus q < |z| < 1 (Dirichlet on both circles),
// as a subdomain of the disc for the Markov split tests.
DiscSampler make_disc_sampler(const QuadratureGrid& grid, double eps,
                              double domain_radius = 1.0);
DiscSampler make_annulus_sampler(const QuadratureGrid& grid, double q, double eps);
// joint sampler of (X_eps, X_eps') at two regularizations on one grid
DiscSampler make_disc_sampler_two_eps(const QuadratureGrid& grid, double eps1,
                                      double eps2);

// Uniform average over the geodesic circle of radius eps: trapezoid with 128
// nodes and bilinear interpolation for grid fields; exact per-mode for the
// torus representation. Throws when eps is below the representation's
// resolution floor.
double circle_average_grid(const std::function<double(Complex)>& field, Complex x,
                           double eps, int n_nodes = 128);

// Truncated Fourier boundary data on a circle: zero mode c, winding k and
// modes phi_n = (x_n + i y_n) / (2 sqrt n) for 1 <= n <= N (phi_{-n} implied
// by conjugation).
struct BoundaryField {
  double c = 0.0;
  long long k = 0;
  std::vector<Complex> modes;  // phi_1 .. phi_N

  int n_modes() const { return (int)modes.size(); }
  double value(double theta) const;  // c + k R theta skipped: winding excluded
};

// Harmonic extension of boundary data. Disc: sum phi_n r^|n| e^{i n theta} + c.
// Annulus: per-mode two-point solves a r^|n| + b r^{-|n|}, log-linear zero
// mode; inner data may carry a different constant.
struct HarmonicExtension {
  std::function<double(Complex)> value;
};
HarmonicExtension harmonic_extension_disc(const BoundaryField& b);
HarmonicExtension harmonic_extension_annulus(const BoundaryField& outer,
                                             const BoundaryField& inner, double q);
// Radial winding-sector profile: harmonic, value_out on |z|=1, value_in on
// |z|=q (the a + b ln r solve).
HarmonicExtension radial_log_profile(double value_out, double value_in, double q);

// eps^{-beta^2/2} Int f(x) e^{i beta (X_eps(x) + shift(x))} dv(x) over the
// grid; X_eps given as precomputed values at the grid nodes.
Complex gmc_integral(const std::vector<double>& field_eps,
                     const QuadratureGrid& grid,
                     const std::function<Complex(Complex)>& f,
                     const std::function<double(Complex)>& shift, double beta,
                     double eps);

struct GmcEstimate {
  Complex value{0, 0};
  double std_error = 0.0;
  long long n_samples = 0;
  double eps = 0.0;
};

// Deterministic double quadrature of
//   IntInt f(x) conj(f(y)) e^{beta^2 G(x,y) - beta^2 (W(x)+W(y))/2} dv dv
// on the flat torus, reduced by translation invariance when f == 1 is passed
// as a null function. Conformal factor omega deforms the metric as e^omega g.
double second_moment_oracle_torus(Complex tau, double beta,
                                  const std::function<Complex(Complex)>& f,
                                  const std::function<double(Complex)>& omega,
                                  int n_grid, bool parallel = true);
// Serial reference of the same kernel (bitwise identical chunk layout).
double second_moment_oracle_torus_serial(Complex tau, double beta,
                                         const std::function<Complex(Complex)>& f,
                                         const std::function<double(Complex)>& omega,
                                         int n_grid);

// MC estimate of E |M_beta(1)|^2 on the torus over n_samples fields.
GmcEstimate torus_second_moment_mc(Complex tau, double beta, int n_modes,
                                   double eps, int grid_n, int n_samples,
                                   std::uint64_t seed);

// W probe: E[X_eps^2] + ln(eps) for the full (untruncated) field via the
// regular part of the double circle average of the Green function.
double variance_regular_part_torus(Complex tau, double eps, int n_nodes = 96);

// E[exp(mu |M_beta(disc)|)] by MC over the Cholesky sampler, plus the (u, v)
// comparison quantities of the exponential-moment bound computed by
// quadrature: u^2 = IntInt e^{beta^2 G_D} dv dv, v = area.
struct ExpMomentProbe {
  double estimate = 0.0;
  double std_error = 0.0;
  double u = 0.0;
  double v = 0.0;
};
// The sampling grid is built internally with node spacing 2.5 eps over the
// sub-disc |z| < radius, so changing eps changes resolution and
// regularization together (two-resolution self-consistency).
ExpMomentProbe exp_moment_probe(double mu, double beta, int n_samples, double eps,
                                double radius, std::uint64_t seed);

}  // namespace cilt
