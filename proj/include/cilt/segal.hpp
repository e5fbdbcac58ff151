#pragma once

#include <vector>

#include "cilt/chaos.hpp"
#include "cilt/forms.hpp"
#include "cilt/numerics.hpp"

namespace cilt {

// Dirichlet-to-Neumann operator in Fourier modes, pairing normalized as
// <1,u> = (1/2pi) Int u dtheta. Boundary fields are expressed in the cylinder
// chart angle on every circle; this orientation convention is the one that
// closes the free-part gluing identity and is frozen by the conformance
// tests.
struct DnOperator {
  enum class Kind { disc, annulus, interior_circle } kind = Kind::disc;
  int n_modes = 0;
  double L = 0.0;  // annulus: ln(1/q); interior circle: ln(1/r0)

  // disc: eigenvalue |n|, zero mode 0
  // annulus: per-mode 2x2 block n [[coth nL, -csch nL], [-csch nL, coth nL]]
  //          in the (outer, inner) basis, zero-mode block (1/L) [[1,-1],[-1,1]]
  // interior circle (in the unit disc): scalar 2n/(1 - r0^{2n}), zero mode 1/L
  double block(int n, int row, int col) const;

  // <phi, D phi> for one or two boundary fields
  double quadratic_form(const BoundaryField& outer, const BoundaryField& inner) const;
  double quadratic_form(const BoundaryField& single) const;
};

DnOperator dn_map_disc(int n_modes);
DnOperator dn_map_annulus(double q, int n_modes);
DnOperator dn_map_interior_circle(double r0, int n_modes);

// The reference quadratic form (D phi, phi) = 2 sum_j sum_{n>0} n |phi_{j,n}|^2.
double d_quadratic_form(const BoundaryField& f);

// exp(-1/2 <phi, (D_Sigma - D) phi>); identically 1 on the disc.
double free_amplitude_disc(const BoundaryField& f);
double free_amplitude_annulus(double q, const BoundaryField& outer,
                              const BoundaryField& inner);

// Free-boson amplitude of the flat annulus q < |z| < 1 with winding sectors,
// determinant normalization Z = det(Delta_D)^{-1/2} carried symbolically
// (excluded from the value; only Z-ratios enter the gluing checks):
//   delta(k_out = k_in) e^{-L k^2 R^2 / 2}
//   * sum_{k^c} e^{-(dc + 2 pi R k^c)^2 / (2L)}       (zero mode + relative
//     cohomology, the bump-profile norm and its Girsanov variance collapsing
//     to the harmonic representative)
//   * prod_n exp(-n[(coth nL - 1)(|u|^2 + |w|^2) - 2 csch nL Re(u conj w)]).
struct AnnulusAmplitude {
  double q = 0.5;
  double radius = 1.0;  // R
  int n_modes = 0;

  double L() const { return -std::log(q); }
  double winding_weight(long long k) const;
  double theta_factor(double dc) const;  // the k^c sum
  double mode_factor(int n, Complex u, Complex w) const;
  // full value; zero when the windings differ
  double value(const BoundaryField& outer, const BoundaryField& inner) const;
};

// Girsanov variance of the relative bump form through the Dirichlet Green
// function (radial mode-zero quadrature); the harmonic-representative
// reduction ||omega_harm||^2 = ||omega_bump||^2 - Var/(2 pi) is checked
// against this in the tests.
double bump_girsanov_variance(double q, double radius, long long kc);

// Cross term <d P phi, omega^c>_2 of the harmonic extension with the relative
// form (only the radial zero mode survives).
double bump_cross_term(double q, double radius, long long kc, double c_out,
                       double c_in);

// Closed-form ratio of flat-cylinder Dirichlet determinants
// Z(L1) Z(L2) / Z(L1 + L2), from det(Delta_D) = L e^{-L/6} prod (1-e^{-2mL})^2.
double cylinder_z_ratio(double l1, double l2);

// Prop-level gluing check: compares the direct annulus(q1 q2) amplitude
// against (1/(sqrt 2 pi)) Z-ratio times the paired integral over the glued
// circle (c-integral by trapezoid, winding delta, per-mode Gaussian algebra).
// Returns the worst relative deviation over the given boundary battery.
struct GlueBattery {
  std::vector<BoundaryField> outer, inner;  // matched lists
};
double glue_check(double q1, double q2, int n_modes, const GlueBattery& battery,
                  double radius);

// Per-mode free-part identity: Gaussian convolution of the two mode factors
// equals (1-q1^{2n})(1-q2^{2n})/(1-q^{2n}) times the glued factor. Returns the
// worst deviation over n = 1..N at the given probe amplitudes.
double glue_mode_identity_deviation(double q1, double q2, int n_modes, Complex u,
                                    Complex w);

// Self-gluing to the torus of modulus tau = i L / (2 pi): the winding-sector
// weight table (boundary winding k, relative integer k^c) against the
// instanton weights. Returns the worst relative deviation over |k|, |k^c| <=
// n_sectors.
double self_glue_torus_check(double q, int n_modes, int n_sectors, double radius);

// Trace of the mode part, prod_n coth(n L / 2) truncated at N (the oscillator
// trace of the sector amplitude; k-independent).
double self_glue_mode_trace(double q, int n_modes);

}  // namespace cilt
