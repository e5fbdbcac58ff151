#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cilt/numerics.hpp"

namespace cilt {

// Smooth conformal field rho with analytic derivatives, used for conformal
// deformations e^rho g and for the anomaly functional.
struct ConformalField {
  std::function<double(Complex)> value;
  std::function<Complex(Complex)> gradient;   // (d/dx, d/dy) as re/im
  std::function<double(Complex)> laplacian;   // euclidean Laplacian
};

// Gaussian bump rho(z) = amp * exp(-|z-z0|^2 / (2 s^2)) with closed-form
// derivatives; the standard test deformation.
ConformalField gaussian_bump(Complex z0, double s, double amp);

struct Surface {
  enum class Kind { sphere, torus, disc, annulus } kind = Kind::sphere;
  enum class SphereMetric { g0, round, conformal } sphere_metric = SphereMetric::round;
  ConformalField rho;      // sphere conformal deformation of round (optional)
  bool has_rho = false;
  Complex tau{0.0, 1.0};   // torus modulus, Im tau > 0
  double q_mod = 0.5;      // annulus inner radius in (0,1)

  static Surface sphere_round();
  static Surface sphere_g0();
  static Surface sphere_conformal(ConformalField rho);
  static Surface torus(Complex tau);
  static Surface disc();
  static Surface annulus(double q_mod);

  // log conformal factor Lambda with g = e^{2 Lambda} |dz|^2 in the z chart
  // (sphere metrics only).
  double log_factor(Complex z) const;
  Complex log_factor_gradient(Complex z) const;
};

// Pointwise scalar curvature. Throws std::domain_error for the g0 sphere
// metric on |z| = 1 where it is not defined.
double curvature(const Surface& surface, Complex x);

// (1/96pi) Int (|d rho|^2 + 2 K_g rho) dv_g over a closed base surface.
double anomaly_functional(const ConformalField& rho, const Surface& base);
// Same functional over the g0 sphere base: the curvature of g0 is a uniform
// layer on |z|=1, so the K-term becomes 4 * Int_{|z|=1} rho dtheta.
double anomaly_functional_g0(const std::function<double(Complex)>& rho,
                             int n_grid = 256);

struct QuadratureGrid {
  std::vector<Complex> nodes;
  std::vector<double> weights;  // metric volume weights
  std::vector<int> chart;       // chart labels (0 = primary)

  double total_weight() const;
  void dump_csv(const std::string& path) const;
};

// Sphere grid in rotation-invariant (psi, phi) coordinates, Gauss-Legendre in
// cos psi x trapezoid in phi, weights for the round metric (area 4pi).
QuadratureGrid sphere_round_grid(int n_psi, int n_phi);
// Torus grid: uniform in lattice coordinates, weights tau2 / N^2.
QuadratureGrid torus_grid(Complex tau, int n);
// Unit-disc grid: polar, radially graded toward the boundary; flat metric.
QuadratureGrid disc_grid(int n_r, int n_theta);
// Near-uniform node spacing h up to radius r_max; the grid for the Cholesky
// field samplers (circle averages of radius eps need spacing > 2 eps).
QuadratureGrid disc_uniform_grid(double h, double r_max);

// Green function ln(1/|z-w|) + ln|z|_+ + ln|w|_+ of the g0 sphere metric.
// The companion W_{g0} is identically zero.
double green_sphere_g0(Complex z, Complex w);
inline constexpr double W_g0 = 0.0;

// Flat-torus Green function by truncated dual-lattice sum over the sheared
// index box |m| <= N, |n - round(m tau1)| <= N, with an analytic tail bound.
struct GreenValue {
  double value = 0.0;
  double tail_bound = 0.0;
};
GreenValue green_torus(Complex tau, Complex z, Complex w, int n_modes);

// Exponentially convergent evaluation (Poisson-resummed in the second index);
// used as the production kernel in quadrature oracles.
double green_torus_fast(Complex tau, Complex z, Complex w);
// Regular part W for the flat torus: lim_{w->z} [G(z,w) + ln|z-w|] (constant).
double torus_green_regular_part(Complex tau);

// Dirichlet Green function of the unit disc, image formula
// ln|1 - z conj(w)| - ln|z - w|.
double green_disc_dirichlet(Complex z, Complex w);

// Dirichlet Green function of the annulus q < |z| < 1 (flat conformal class),
// mode-resummed; z, w in the disc chart.
double green_annulus_dirichlet(double q, Complex z, Complex w);
// Regular parts W(x) = lim [G + ln|z-w|] in the disc chart.
double disc_green_regular_part(Complex z);
double annulus_green_regular_part(double q, Complex z);

// Moebius maps psi(z) = (az+b)/(cz+d), ad - bc = 1.
struct Mobius {
  Complex a{1, 0}, b{0, 0}, c{0, 0}, d{1, 0};

  void normalize();  // scales to ad - bc = 1; throws if degenerate
  static Mobius compose(const Mobius& f, const Mobius& g);  // f after g
};

struct ExtPoint {
  Complex z{0, 0};
  bool infinite = false;
  static ExtPoint inf() { return {Complex{0, 0}, true}; }
  static ExtPoint at(Complex w) { return {w, false}; }
};

struct MobiusImage {
  ExtPoint point;
  double deriv_modulus = 0.0;  // |psi'(z)|, 0 when z or image is infinite
  double deriv_arg = 0.0;      // arg psi'(z)
};

MobiusImage mobius_apply(const Mobius& map, const ExtPoint& z);

// Five-point finite-difference Dirichlet solves (polar grid, singular part
// handled analytically); oracles for the closed-form Green functions.
double fd_disc_green(Complex z_src, Complex z_probe, int n_grid);
double fd_annulus_green(double q, Complex z_src, Complex z_probe, int n_grid);

}  // namespace cilt
