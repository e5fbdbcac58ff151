#pragma once

#include <functional>
#include <vector>

#include "cilt/geometry.hpp"
#include "cilt/numerics.hpp"

namespace cilt {

// Closed 1-forms with 2*pi*R*Z periods: torus cohomology representatives,
// sphere/annulus magnetic forms, annulus relative (compactly supported) form.
struct ClosedOneForm {
  enum class Repr { torus_constant, sphere_magnetic, annulus_winding, annulus_relative };
  Repr repr = Repr::sphere_magnetic;
  double radius = 1.0;  // R, the 2*pi*R period normalization

  // torus_constant
  long long k1 = 0, k2 = 0;
  Complex tau{0.0, 1.0};

  // sphere_magnetic
  std::vector<Complex> points;
  std::vector<long long> charges;

  // annulus_winding / annulus_relative
  long long k_wind = 0;
  double q_mod = 0.5;  // annulus modulus for the bump profile support

  // Pointwise evaluation as a euclidean covector (a,b) with omega = a dx + b dy
  // in the z chart (sphere/annulus) or lattice chart (torus).
  Complex covector(Complex z) const;

  // Line integral along a straight segment, exact for sphere_magnetic
  // (angle increments) and torus_constant, numeric for the annulus bumps.
  double integrate_segment(Complex a, Complex b) const;

  // Line integral along a polyline.
  double integrate_polyline(const std::vector<Complex>& pts) const;
};

// omega_k = k1 w1 + k2 w2 on the torus, w1 = dx - (t1/t2) dy, w2 = dy/t2,
// scaled by 2 pi R.
ClosedOneForm torus_form(long long k1, long long k2, Complex tau, double R);

// ||omega_k||^2 = (2 pi R)^2 |k2 - k1 tau|^2 / tau2, closed form.
double torus_form_norm(long long k1, long long k2, Complex tau, double R);
// Quadrature cross-check of the same norm (Int omega ^ * omega).
double torus_form_norm_quadrature(long long k1, long long k2, Complex tau, double R,
                                  int n);

// Sum over k in Z^2 of exp(-||omega_k||^2 / (4 pi)) truncated at |k|_inf <=
// cutoff, with a rigorous Gaussian tail remainder.
struct InstantonSum {
  double value = 0.0;
  double remainder = 0.0;
};
InstantonSum instanton_sum(Complex tau, double R, int cutoff);
// Weight of a single (k1,k2) sector, exp(-pi R^2 |k2 - k1 tau|^2 / tau2).
double instanton_weight(Complex tau, double R, long long k1, long long k2);

// nu = R sum_j m_j d arg(z - z_j); requires sum m_j = 0.
ClosedOneForm magnetic_form_sphere(const std::vector<Complex>& points,
                                   const std::vector<long long>& charges, double R);

// Winding form on the annulus q < |z| < 1: w = a R dtheta with loop integrals
// -+ 2 pi R k on the two boundary circles (outer outgoing).
ClosedOneForm annulus_winding_form(long long k, double q, double R);

// Relative form 2 pi R k^c h'(t) dt (t = ln r) with a smooth bump profile h,
// h = 0 near r = q and h = 1 near r = 1.
ClosedOneForm annulus_relative_form(long long kc, double q, double R);

// Renormalized L2 norm of a magnetic form against a sphere metric:
// lim_{eps->0} [ ||nu||^2_{g,eps} + 2 pi R^2 log(eps) sum m_j^2 ], by
// Richardson extrapolation over the given decreasing eps sequence.
struct RegularizedNorm {
  double value = 0.0;
  double residual = 0.0;
};
RegularizedNorm regularized_norm(const ClosedOneForm& form, const Surface& surface,
                                 const std::vector<double>& eps_sequence);

}  // namespace cilt
