#include "cilt/forms.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace cilt {

namespace {

// Smootherstep profile, C^2, h(0)=0, h(1)=1.
inline double smoothstep5(double u) {
  if (u <= 0) return 0.0;
  if (u >= 1) return 1.0;
  return u * u * u * (u * (6.0 * u - 15.0) + 10.0);
}
inline double smoothstep5_d(double u) {
  if (u <= 0 || u >= 1) return 0.0;
  return 30.0 * u * u * (u - 1.0) * (u - 1.0);
}

}  // namespace

Complex ClosedOneForm::covector(Complex z) const {
  switch (repr) {
    case Repr::torus_constant: {
      const double t1 = tau.real(), t2 = tau.imag();
      const double a = TWO_PI * radius * (double)k1;
      const double b = TWO_PI * radius * ((double)k2 - (double)k1 * t1) / t2;
      (void)z;
      return {a, b};
    }
    case Repr::sphere_magnetic: {
      double a = 0, b = 0;
      for (size_t j = 0; j < points.size(); ++j) {
        const Complex d = z - points[j];
        const double r2 = std::norm(d);
        a += radius * (double)charges[j] * (-d.imag()) / r2;
        b += radius * (double)charges[j] * d.real() / r2;
      }
      return {a, b};
    }
    case Repr::annulus_winding: {
      const double r2 = std::norm(z);
      const double c = -(double)k_wind * radius;
      return {c * (-z.imag()) / r2, c * z.real() / r2};
    }
    case Repr::annulus_relative: {
      const double r = std::abs(z);
      const double t0 = std::log(q_mod);
      const double t = std::log(r);
      // active on the middle half of [t0, 0]
      const double lo = 0.75 * t0, hi = 0.25 * t0;
      const double u = (t - lo) / (hi - lo);
      const double hp = smoothstep5_d(u) / (hi - lo);
      const double c = TWO_PI * radius * (double)k_wind * hp;
      const double r2 = std::norm(z);
      return {c * z.real() / r2, c * z.imag() / r2};
    }
  }
  return {0, 0};
}

double ClosedOneForm::integrate_segment(Complex a, Complex b) const {
  switch (repr) {
    case Repr::torus_constant: {
      const Complex v = covector(a);
      const Complex d = b - a;
      return v.real() * d.real() + v.imag() * d.imag();
    }
    case Repr::sphere_magnetic: {
      // Angle swept by z_j from a straight segment lies in (-pi, pi).
      double s = 0;
      for (size_t j = 0; j < points.size(); ++j) {
        const Complex num = b - points[j], den = a - points[j];
        s += radius * (double)charges[j] * std::arg(num / den);
      }
      return s;
    }
    case Repr::annulus_winding: {
      return -(double)k_wind * radius * std::arg((b / a));
    }
    case Repr::annulus_relative: {
      // exact: the form is d(2 pi R k^c h(ln r))
      const double t0 = std::log(q_mod);
      const double lo = 0.75 * t0, hi = 0.25 * t0;
      auto h = [&](Complex z) {
        return smoothstep5((std::log(std::abs(z)) - lo) / (hi - lo));
      };
      return TWO_PI * radius * (double)k_wind * (h(b) - h(a));
    }
  }
  return 0;
}

double ClosedOneForm::integrate_polyline(const std::vector<Complex>& pts) const {
  double s = 0;
  for (size_t i = 0; i + 1 < pts.size(); ++i)
    s += integrate_segment(pts[i], pts[i + 1]);
  return s;
}

ClosedOneForm torus_form(long long k1, long long k2, Complex tau, double R) {
  if (tau.imag() <= 0) throw std::invalid_argument("torus_form: Im tau > 0");
  ClosedOneForm f;
  f.repr = ClosedOneForm::Repr::torus_constant;
  f.k1 = k1;
  f.k2 = k2;
  f.tau = tau;
  f.radius = R;
  return f;
}

double torus_form_norm(long long k1, long long k2, Complex tau, double R) {
  const double t2 = tau.imag();
  return sq(TWO_PI * R) * std::norm((double)k2 - (double)k1 * tau) / t2;
}

double torus_form_norm_quadrature(long long k1, long long k2, Complex tau, double R,
                                  int n) {
  // Int omega ^ * omega = |omega|^2_euclid * area (constant covector).
  ClosedOneForm f = torus_form(k1, k2, tau, R);
  const Complex v = f.covector(Complex{0.1, 0.1});
  QuadratureGrid g = torus_grid(tau, n);
  double s = 0;
  for (double w : g.weights) s += std::norm(v) * w;
  return s;
}

double instanton_weight(Complex tau, double R, long long k1, long long k2) {
  return std::exp(-PI * R * R * std::norm((double)k2 - (double)k1 * tau) /
                  tau.imag());
}

InstantonSum instanton_sum(Complex tau, double R, int cutoff) {
  if (cutoff < 3) throw std::invalid_argument("instanton_sum: cutoff >= 3");
  InstantonSum out;
  for (long long k1 = -cutoff; k1 <= cutoff; ++k1)
    for (long long k2 = -cutoff; k2 <= cutoff; ++k2)
      out.value += instanton_weight(tau, R, k1, k2);

  // Gaussian tail: the quadratic form pi R^2 |k2 - k1 tau|^2 / tau2 dominates
  // c |k|^2 with c from the smallest eigenvalue of [[|tau|^2, -tau1],[-tau1, 1]].
  const double t1 = tau.real(), t2 = tau.imag();
  const double tr = std::norm(tau) + 1.0;
  const double lam_min = 0.5 * (tr - std::sqrt(tr * tr - 4.0 * t2 * t2));
  const double c = PI * R * R * lam_min / t2;
  const double K = cutoff;
  out.remainder = 8.0 * (std::exp(-c * K * K) / (2.0 * c) +
                         std::sqrt(PI) / (2.0 * std::sqrt(c)) *
                             std::erfc(std::sqrt(c) * K));
  return out;
}

ClosedOneForm magnetic_form_sphere(const std::vector<Complex>& points,
                                   const std::vector<long long>& charges,
                                   double R) {
  if (points.size() != charges.size())
    throw std::invalid_argument("magnetic_form_sphere: size mismatch");
  long long s = std::accumulate(charges.begin(), charges.end(), 0LL);
  if (s != 0) {
    std::ostringstream os;
    os << "magnetic_form_sphere: neutrality fails, sum m_j = " << s;
    throw std::invalid_argument(os.str());
  }
  for (size_t i = 0; i < points.size(); ++i)
    for (size_t j = i + 1; j < points.size(); ++j)
      if (std::abs(points[i] - points[j]) < 1e-12)
        throw std::invalid_argument("magnetic_form_sphere: points must be distinct");
  ClosedOneForm f;
  f.repr = ClosedOneForm::Repr::sphere_magnetic;
  f.points = points;
  f.charges = charges;
  f.radius = R;
  return f;
}

ClosedOneForm annulus_winding_form(long long k, double q, double R) {
  ClosedOneForm f;
  f.repr = ClosedOneForm::Repr::annulus_winding;
  f.k_wind = k;
  f.q_mod = q;
  f.radius = R;
  return f;
}

ClosedOneForm annulus_relative_form(long long kc, double q, double R) {
  ClosedOneForm f;
  f.repr = ClosedOneForm::Repr::annulus_relative;
  f.k_wind = kc;
  f.q_mod = q;
  f.radius = R;
  return f;
}

namespace {

// ||nu||^2_{g,eps} for the sphere magnetic form via the contour identity
// nu ^ * nu = d(H nu) with H = R sum m_j ln|z - z_j| single valued:
// the area integral over the ball complement collapses to circle integrals
// around each excluded geodesic ball (no contribution from infinity, by
// neutrality).
double magnetic_norm_eps(const ClosedOneForm& f, const Surface& surf, double eps) {
  const int n = 1024;
  double total = 0.0;
  for (size_t j = 0; j < f.points.size(); ++j) {
    const double rho_j = eps * std::exp(-surf.log_factor(f.points[j]));
    double circ = 0.0;
    for (int i = 0; i < n; ++i) {
      const double th = TWO_PI * (i + 0.5) / n;
      const Complex z = f.points[j] + std::polar(rho_j, th);
      double H = 0.0;
      for (size_t l = 0; l < f.points.size(); ++l)
        H += f.radius * (double)f.charges[l] * std::log(std::abs(z - f.points[l]));
      // tangent of the ccw circle
      const Complex t = Complex(0, 1) * std::polar(1.0, th);
      const Complex v = f.covector(z);
      circ += H * (v.real() * t.real() + v.imag() * t.imag()) * rho_j;
    }
    circ *= TWO_PI / n;
    total -= circ;  // inner boundaries are negatively oriented
  }
  return total;
}

}  // namespace

RegularizedNorm regularized_norm(const ClosedOneForm& form, const Surface& surface,
                                 const std::vector<double>& eps_sequence) {
  RegularizedNorm out;
  if (form.repr == ClosedOneForm::Repr::sphere_magnetic) {
    if (eps_sequence.size() < 3)
      throw std::invalid_argument("regularized_norm: need >= 3 eps values");
    for (size_t i = 1; i < eps_sequence.size(); ++i)
      if (!(eps_sequence[i] < eps_sequence[i - 1]))
        throw std::invalid_argument("regularized_norm: eps must decrease");
    double msq = 0;
    for (long long m : form.charges) msq += (double)(m * m);
    std::vector<double> h(eps_sequence), fvals;
    for (double eps : eps_sequence) {
      const double neps = magnetic_norm_eps(form, surface, eps);
      fvals.push_back(neps + TWO_PI * form.radius * form.radius * std::log(eps) * msq);
    }
    double res = 0;
    out.value = richardson(h, fvals, 2, &res);
    out.residual = res;
    if (!(std::isfinite(out.value)) || res > 1e-3 * std::max(1.0, std::abs(out.value))) {
      std::ostringstream os;
      os << "regularized_norm: extrapolation did not converge (residual = " << res
         << ")";
      throw std::runtime_error(os.str());
    }
    return out;
  }

  // No poles: plain L2 norm (counterterm vanishes). Closed forms for the
  // annulus representatives, quadrature cross-checkable from tests.
  if (form.repr == ClosedOneForm::Repr::annulus_winding) {
    const double L = -std::log(form.q_mod);
    out.value = TWO_PI * L * sq((double)form.k_wind * form.radius);
    return out;
  }
  if (form.repr == ClosedOneForm::Repr::annulus_relative) {
    // || 2 pi R kc h'(t) dt ||^2 = (2 pi R kc)^2 * 2 pi Int h'(t)^2 dt
    const double t0 = std::log(form.q_mod);
    const double lo = 0.75 * t0, hi = 0.25 * t0;
    std::vector<double> x, w;
    gauss_legendre_ab(200, lo, hi, x, w);
    double ih = 0;
    for (size_t i = 0; i < x.size(); ++i)
      ih += sq(smoothstep5_d((x[i] - lo) / (hi - lo)) / (hi - lo)) * w[i];
    out.value = sq(TWO_PI * form.radius * (double)form.k_wind) * TWO_PI * ih;
    return out;
  }
  if (form.repr == ClosedOneForm::Repr::torus_constant) {
    out.value = torus_form_norm(form.k1, form.k2, form.tau, form.radius);
    return out;
  }
  throw std::invalid_argument("regularized_norm: unsupported form");
}

}  // namespace cilt
