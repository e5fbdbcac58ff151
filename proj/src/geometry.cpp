#include "cilt/geometry.hpp"

#include <cassert>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace cilt {

ConformalField gaussian_bump(Complex z0, double s, double amp) {
  ConformalField f;
  const double s2 = s * s;
  f.value = [=](Complex z) {
    return amp * std::exp(-std::norm(z - z0) / (2.0 * s2));
  };
  f.gradient = [=](Complex z) {
    const Complex d = z - z0;
    const double v = amp * std::exp(-std::norm(d) / (2.0 * s2));
    return Complex(-v * d.real() / s2, -v * d.imag() / s2);
  };
  f.laplacian = [=](Complex z) {
    const double r2 = std::norm(z - z0);
    const double v = amp * std::exp(-r2 / (2.0 * s2));
    return v * (r2 / (s2 * s2) - 2.0 / s2);
  };
  return f;
}

Surface Surface::sphere_round() {
  Surface s;
  s.kind = Kind::sphere;
  s.sphere_metric = SphereMetric::round;
  return s;
}
Surface Surface::sphere_g0() {
  Surface s;
  s.kind = Kind::sphere;
  s.sphere_metric = SphereMetric::g0;
  return s;
}
Surface Surface::sphere_conformal(ConformalField rho) {
  Surface s;
  s.kind = Kind::sphere;
  s.sphere_metric = SphereMetric::conformal;
  s.rho = std::move(rho);
  s.has_rho = true;
  return s;
}
Surface Surface::torus(Complex tau) {
  if (tau.imag() <= 0) throw std::invalid_argument("torus: Im tau must be > 0");
  Surface s;
  s.kind = Kind::torus;
  s.tau = tau;
  return s;
}
Surface Surface::disc() {
  Surface s;
  s.kind = Kind::disc;
  return s;
}
Surface Surface::annulus(double q_mod) {
  if (!(q_mod > 0.0 && q_mod < 1.0))
    throw std::invalid_argument("annulus: q must be in (0,1)");
  Surface s;
  s.kind = Kind::annulus;
  s.q_mod = q_mod;
  return s;
}

double Surface::log_factor(Complex z) const {
  assert(kind == Kind::sphere);
  switch (sphere_metric) {
    case SphereMetric::round:
      return std::log(2.0) - std::log1p(std::norm(z));
    case SphereMetric::g0: {
      const double r = std::abs(z);
      return r <= 1.0 ? 0.0 : -2.0 * std::log(r);
    }
    case SphereMetric::conformal:
      return std::log(2.0) - std::log1p(std::norm(z)) + 0.5 * rho.value(z);
  }
  return 0.0;
}

Complex Surface::log_factor_gradient(Complex z) const {
  assert(kind == Kind::sphere);
  const double r2 = std::norm(z);
  const Complex grad_round(-2.0 * z.real() / (1.0 + r2), -2.0 * z.imag() / (1.0 + r2));
  switch (sphere_metric) {
    case SphereMetric::round:
      return grad_round;
    case SphereMetric::g0: {
      if (r2 <= 1.0) return {0.0, 0.0};
      return Complex(-2.0 * z.real() / r2, -2.0 * z.imag() / r2);
    }
    case SphereMetric::conformal:
      return grad_round + 0.5 * rho.gradient(z);
  }
  return {0.0, 0.0};
}

double curvature(const Surface& surface, Complex x) {
  switch (surface.kind) {
    case Surface::Kind::torus:
    case Surface::Kind::disc:
    case Surface::Kind::annulus:
      return 0.0;  // flat (annulus in the cylinder metric |dz|^2/|z|^2)
    case Surface::Kind::sphere:
      break;
  }
  switch (surface.sphere_metric) {
    case Surface::SphereMetric::round:
      return 2.0;
    case Surface::SphereMetric::g0: {
      const double r = std::abs(x);
      if (std::abs(r - 1.0) < 1e-9)
        throw std::domain_error("curvature: g0 metric is not smooth on |z| = 1");
      return 0.0;
    }
    case Surface::SphereMetric::conformal: {
      // K_ghat = e^{-rho} (Delta_g rho + K_g) on the round base, with the
      // nonnegative Laplacian Delta_g = -e^{-2 Lambda_round} Delta_0.
      const double lam = std::log(2.0) - std::log1p(std::norm(x));
      const double lap_g = -std::exp(-2.0 * lam) * surface.rho.laplacian(x);
      return std::exp(-surface.rho.value(x)) * (lap_g + 2.0);
    }
  }
  return 0.0;
}

double QuadratureGrid::total_weight() const {
  double s = 0;
  for (double w : weights) s += w;
  return s;
}

void QuadratureGrid::dump_csv(const std::string& path) const {
  std::ofstream os(path);
  os << "re,im,weight,chart\n";
  for (size_t i = 0; i < nodes.size(); ++i)
    os << nodes[i].real() << "," << nodes[i].imag() << "," << weights[i] << ","
       << chart[i] << "\n";
}

QuadratureGrid sphere_round_grid(int n_psi, int n_phi) {
  QuadratureGrid g;
  std::vector<double> c, wc;
  gauss_legendre(n_psi, c, wc);
  g.nodes.reserve((size_t)n_psi * n_phi);
  const double wphi = TWO_PI / n_phi;
  for (int i = 0; i < n_psi; ++i) {
    const double psi = std::acos(c[i]);
    const double r = std::tan(0.5 * psi);
    for (int j = 0; j < n_phi; ++j) {
      const double phi = (j + 0.5) * wphi;
      g.nodes.push_back(std::polar(r, phi));
      g.weights.push_back(wc[i] * wphi);
      g.chart.push_back(r <= 1.0 ? 0 : 1);
    }
  }
  return g;
}

QuadratureGrid torus_grid(Complex tau, int n) {
  QuadratureGrid g;
  const double w = tau.imag() / ((double)n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double u = (i + 0.5) / n, v = (j + 0.5) / n;
      g.nodes.push_back(Complex(u, 0) + tau * v);
      g.weights.push_back(w);
      g.chart.push_back(0);
    }
  return g;
}

QuadratureGrid disc_grid(int n_r, int n_theta) {
  QuadratureGrid g;
  std::vector<double> r, wr;
  gauss_legendre_ab(n_r, 0.0, 1.0, r, wr);
  const double wth = TWO_PI / n_theta;
  for (int i = 0; i < n_r; ++i)
    for (int j = 0; j < n_theta; ++j) {
      const double th = (j + 0.5) * wth;
      g.nodes.push_back(std::polar(r[i], th));
      g.weights.push_back(r[i] * wr[i] * wth);
      g.chart.push_back(0);
    }
  return g;
}

QuadratureGrid disc_uniform_grid(double h, double r_max) {
  QuadratureGrid g;
  const int n_rings = (int)std::floor(r_max / h);
  for (int k = 0; k < n_rings; ++k) {
    const double r = (k + 0.5) * h;
    const int n = std::max(6, (int)std::lround(TWO_PI * r / h));
    const double w = TWO_PI * r * h / n;
    for (int j = 0; j < n; ++j) {
      g.nodes.push_back(std::polar(r, TWO_PI * (j + 0.5) / n));
      g.weights.push_back(w);
      g.chart.push_back(0);
    }
  }
  return g;
}

double green_sphere_g0(Complex z, Complex w) {
  const double d = std::abs(z - w);
  if (d == 0.0) throw std::domain_error("green_sphere_g0: coincident points");
  const double zp = std::max(std::abs(z), 1.0);
  const double wp = std::max(std::abs(w), 1.0);
  return -std::log(d) + std::log(zp) + std::log(wp);
}

namespace {

// Lattice coordinates (u,v) of z - w on the torus C/(Z + tau Z).
inline void lattice_coords(Complex tau, Complex z, Complex w, double& u, double& v) {
  const Complex d = z - w;
  v = d.imag() / tau.imag();
  u = d.real() - tau.real() * v;
  u -= std::floor(u);
  v -= std::floor(v);
}

inline double b2(double x) { return x * x - x + 1.0 / 6.0; }

}  // namespace

GreenValue green_torus(Complex tau, Complex z, Complex w, int n_modes) {
  if (n_modes < 16) throw std::invalid_argument("green_torus: n_modes >= 16");
  double u, v;
  lattice_coords(tau, z, w, u, v);
  if (u == 0.0 && v == 0.0)
    throw std::domain_error("green_torus: coincident points mod lattice");
  const double t1 = tau.real(), t2 = tau.imag();
  const int N = n_modes;

  double sum = 0.0;
  for (int m = -N; m <= N; ++m) {
    const long long c = (long long)std::llround(m * t1);
    for (long long n = c - N; n <= c + N; ++n) {
      if (m == 0 && n == 0) continue;
      const double qd = sq((double)n - m * t1) + sq(m * t2);
      sum += std::cos(TWO_PI * (m * u + n * v)) / qd;
    }
  }
  GreenValue out;
  out.value = t2 / TWO_PI * sum;

  // Tail estimate. Inner (n) truncation: for every |m| <= N the missing terms
  // are bounded by min(2/(N - 1/2), pi/(|m| t2)). Outer (m) truncation uses
  // the Poisson-resummed form: |t_m| <= S(m) / m with geometric S.
  double tail = 0.0;
  for (int m = -N; m <= N; ++m) {
    double inner = 2.0 / (N - 0.5);
    if (m != 0) inner = std::min(inner, PI / (std::abs((double)m) * t2));
    tail += inner;
  }
  tail *= t2 / TWO_PI;

  const double dmin = std::min(v, 1.0 - v);
  const double a = TWO_PI * t2 * dmin;
  const double cfull = TWO_PI * t2;
  double tail_m;
  if (a > 1e-10) {
    tail_m = 2.0 * std::exp(-a * (N + 1)) / ((N + 1) * (1.0 - std::exp(-a))) +
             3.0 * std::exp(-cfull * (N + 1)) / ((N + 1) * (1.0 - std::exp(-cfull)));
  } else {
    // Separation nearly along the real cycle: Dirichlet-kernel bound in u.
    double su = std::abs(std::sin(PI * u));
    tail_m = su > 1e-12 ? 2.0 / ((N + 1) * su) : 1e30;
    tail_m += 3.0 * std::exp(-cfull * (N + 1)) / ((N + 1) * (1.0 - std::exp(-cfull)));
  }
  out.tail_bound = tail + tail_m;
  return out;
}

double green_torus_fast(Complex tau, Complex z, Complex w) {
  double u, v;
  lattice_coords(tau, z, w, u, v);
  if (u == 0.0 && v == 0.0)
    throw std::domain_error("green_torus_fast: coincident points mod lattice");
  const double t1 = tau.real(), t2 = tau.imag();
  double g = PI * t2 * b2(v);
  // Image ladder in the second lattice direction: closed log form per image.
  for (int j = -40; j <= 40; ++j) {
    const double d = std::abs(v - j);
    const double x = std::exp(-TWO_PI * t2 * d);
    if (x < 1e-18 && j != 0 && j != 1) continue;
    const double phi = TWO_PI * (u + t1 * (v - j));
    // sum_m cos(m phi) x^m / m = -log(1 - 2x cos(phi) + x^2)/2
    g += -0.5 * std::log1p(x * x - 2.0 * x * std::cos(phi));
  }
  return g;
}

double torus_green_regular_part(Complex tau) {
  const double t1 = tau.real(), t2 = tau.imag();
  double wreg = PI * t2 / 6.0 - std::log(TWO_PI);
  for (int k = 1; k <= 200; ++k) {
    const double x = std::exp(-TWO_PI * t2 * k);
    if (x < 1e-18) break;
    wreg += -std::log1p(-2.0 * x * std::cos(TWO_PI * t1 * k) + x * x);
  }
  return wreg;
}

double green_disc_dirichlet(Complex z, Complex w) {
  if (std::abs(z) >= 1.0 || std::abs(w) >= 1.0)
    throw std::domain_error("green_disc_dirichlet: points must be interior");
  const double d = std::abs(z - w);
  if (d == 0.0) throw std::domain_error("green_disc_dirichlet: coincident points");
  return std::log(std::abs(1.0 - z * std::conj(w))) - std::log(d);
}

double disc_green_regular_part(Complex z) { return std::log1p(-std::norm(z)); }

double green_annulus_dirichlet(double q, Complex z, Complex w) {
  const double rz = std::abs(z), rw = std::abs(w);
  if (!(rz > q && rz < 1.0 && rw > q && rw < 1.0))
    throw std::domain_error("green_annulus_dirichlet: points must be interior");
  const double L = -std::log(q);
  const double t = std::log(rz), s = std::log(rw);
  const double dth = std::arg(z) - std::arg(w);
  const double dt = std::abs(t - s);
  if (dt == 0.0 && std::abs(std::remainder(dth, TWO_PI)) < 1e-300)
    throw std::domain_error("green_annulus_dirichlet: coincident points");

  // Free-cylinder part, closed log form.
  const double x = std::exp(-dt);
  double g = -0.5 * std::log1p(x * x - 2.0 * x * std::cos(dth));
  // Zero mode of the Dirichlet interval Green function.
  const double tlo = std::min(t, s), thi = std::max(t, s);
  g += (tlo + L) * (-thi) / L;
  // Mode corrections g_n - e^{-n dt}/(2n), geometric decay.
  const double a = std::min(t, s) + L, b = -std::max(t, s);  // a,b >= 0, a+b = L-dt
  for (int n = 1; n <= 400; ++n) {
    // sinh(na) sinh(nb) / sinh(nL) - e^{-n dt}/2, stable via exponentials:
    // = e^{-n dt} [ (1-e^{-2na})(1-e^{-2nb}) / (1-e^{-2nL}) - 1 ] / 2
    const double e2a = std::exp(-2.0 * n * a), e2b = std::exp(-2.0 * n * b);
    const double e2L = std::exp(-2.0 * n * L);
    const double corr = 0.5 * std::exp(-n * dt) *
                        ((1.0 - e2a) * (1.0 - e2b) / (1.0 - e2L) - 1.0);
    const double term = 2.0 * corr * std::cos(n * dth) / n;
    g += term;
    if (std::abs(corr) < 1e-18) break;
  }
  return g;
}

double annulus_green_regular_part(double q, Complex z) {
  const double L = -std::log(q);
  const double t = std::log(std::abs(z));
  // W_cyl(t) + ln r  (disc-chart normalization).
  double wreg = (t + L) * (-t) / L + t;
  const double a = t + L, b = -t;
  for (int n = 1; n <= 400; ++n) {
    const double e2a = std::exp(-2.0 * n * a), e2b = std::exp(-2.0 * n * b);
    const double e2L = std::exp(-2.0 * n * L);
    const double corr = 0.5 * ((1.0 - e2a) * (1.0 - e2b) / (1.0 - e2L) - 1.0);
    wreg += 2.0 * corr / n;
    if (std::abs(corr) < 1e-18) break;
  }
  return wreg;
}

void Mobius::normalize() {
  const Complex det = a * d - b * c;
  if (std::abs(det) < 1e-14) throw std::invalid_argument("Mobius: degenerate map");
  const Complex s = 1.0 / std::sqrt(det);
  a *= s;
  b *= s;
  c *= s;
  d *= s;
}

Mobius Mobius::compose(const Mobius& f, const Mobius& g) {
  Mobius h;
  h.a = f.a * g.a + f.b * g.c;
  h.b = f.a * g.b + f.b * g.d;
  h.c = f.c * g.a + f.d * g.c;
  h.d = f.c * g.b + f.d * g.d;
  h.normalize();
  return h;
}

MobiusImage mobius_apply(const Mobius& map, const ExtPoint& z) {
  MobiusImage out;
  if (z.infinite) {
    if (std::abs(map.c) < 1e-14) {
      out.point = ExtPoint::inf();
    } else {
      out.point = ExtPoint::at(map.a / map.c);
    }
    return out;
  }
  const Complex den = map.c * z.z + map.d;
  if (std::abs(den) < 1e-14) {
    out.point = ExtPoint::inf();
    return out;
  }
  out.point = ExtPoint::at((map.a * z.z + map.b) / den);
  const Complex dpsi = 1.0 / (den * den);  // ad - bc = 1
  out.deriv_modulus = std::abs(dpsi);
  out.deriv_arg = std::arg(dpsi);
  return out;
}

double anomaly_functional(const ConformalField& rho, const Surface& base) {
  if (base.kind == Surface::Kind::sphere) {
    if (base.sphere_metric == Surface::SphereMetric::g0)
      throw std::invalid_argument("anomaly_functional: use anomaly_functional_g0");
    QuadratureGrid g = sphere_round_grid(160, 320);
    double grad = 0, curv = 0;
    for (size_t i = 0; i < g.nodes.size(); ++i) {
      const Complex z = g.nodes[i];
      const double w = g.weights[i];
      const double lam = base.log_factor(z);
      // |d rho|_g^2 dv_g = |grad rho|^2 dA = |grad rho|^2 e^{-2 Lambda} dv.
      grad += std::norm(rho.gradient(z)) * std::exp(-2.0 * lam) * w;
      curv += curvature(base, z) * rho.value(z) * w;
    }
    return (grad + 2.0 * curv) / (96.0 * PI);
  }
  if (base.kind == Surface::Kind::torus) {
    QuadratureGrid g = torus_grid(base.tau, 256);
    double grad = 0;
    for (size_t i = 0; i < g.nodes.size(); ++i)
      grad += std::norm(rho.gradient(g.nodes[i])) * g.weights[i];
    return grad / (96.0 * PI);  // K = 0
  }
  throw std::invalid_argument("anomaly_functional: closed surfaces only");
}

double anomaly_functional_g0(const std::function<double(Complex)>& rho, int n_grid) {
  // |d rho|^2 term needs gradients; this variant is used by the correlator
  // assembly where rho = omega is known in closed form between two metrics,
  // so we take a finite-difference gradient on the integration grid.
  QuadratureGrid g = sphere_round_grid(n_grid, 2 * n_grid);
  const double h = 1e-5;
  double grad = 0;
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    const Complex z = g.nodes[i];
    const double lam = std::log(2.0) - std::log1p(std::norm(z));
    const double gx = (rho(z + h) - rho(z - h)) / (2 * h);
    const double gy = (rho(z + Complex(0, h)) - rho(z - Complex(0, h))) / (2 * h);
    grad += (gx * gx + gy * gy) * std::exp(-2.0 * lam) * g.weights[i];
  }
  // Curvature of g0 is a uniform layer on |z| = 1:  Int K rho dv = 4 Int rho dtheta.
  double layer = 0;
  const int n = 512;
  for (int j = 0; j < n; ++j)
    layer += rho(std::polar(1.0, TWO_PI * (j + 0.5) / n));
  layer *= 4.0 * TWO_PI / n;
  return (grad + 2.0 * layer) / (96.0 * PI);
}

namespace {

// Five-point Dirichlet Laplace solve on a (s, theta) rectangle with theta
// periodic, conjugate gradients on the flux (symmetrized) stencil. Two
// charts: the unit-disc polar chart with a staggered axis (the r=0 flux
// coefficient vanishes, no axis condition needed) and the flat cylinder
// chart for annuli.
struct PolarLaplace {
  int nr = 0, nth = 0;
  bool disc = false;
  double s_lo = 0, s_hi = 1;
  double hs = 0, hth = 0;
  std::vector<double> bc_lo, bc_hi;  // Dirichlet data rows
  std::vector<double> u;             // nr x nth interior solution

  int at(int i, int j) const { return i * nth + ((j % nth) + nth) % nth; }
  double s_of(int i) const { return disc ? (i + 0.5) * hs : s_lo + (i + 1) * hs; }

  void setup(int nr_, int nth_, bool disc_, double lo, double hi) {
    nr = nr_;
    nth = nth_;
    disc = disc_;
    s_lo = lo;
    s_hi = hi;
    hs = disc ? (hi - lo) / (nr + 0.5) : (hi - lo) / (nr + 1);
    hth = TWO_PI / nth;
    bc_lo.assign(nth, 0.0);
    bc_hi.assign(nth, 0.0);
  }

  // A u with A = -L_sym (SPD); boundary contributions go to rhs.
  void apply(const std::vector<double>& x, std::vector<double>& y,
             const std::vector<double>* rhs) const {
    for (int i = 0; i < nr; ++i) {
      const double si = s_of(i);
      // flux coefficients: r_{i +- 1/2} in the disc chart, 1 in the cylinder
      const double cm = disc ? (si - 0.5 * hs) : 1.0;
      const double cp = disc ? (si + 0.5 * hs) : 1.0;
      const double cth = disc ? 1.0 / si : 1.0;
      for (int j = 0; j < nth; ++j) {
        double acc = (cm + cp) / (hs * hs) * x[at(i, j)];
        if (i > 0) acc -= cm / (hs * hs) * x[at(i - 1, j)];
        if (i < nr - 1) acc -= cp / (hs * hs) * x[at(i + 1, j)];
        acc += cth / (hth * hth) *
               (2.0 * x[at(i, j)] - x[at(i, j + 1)] - x[at(i, j - 1)]);
        y[at(i, j)] = acc;
      }
    }
    if (rhs) {
      for (int j = 0; j < nth; ++j) {
        if (!disc) {
          const double cm = 1.0;
          y[at(0, j)] -= cm / (hs * hs) * bc_lo[j];
        }
        const double si = s_of(nr - 1);
        const double cp = disc ? (si + 0.5 * hs) : 1.0;
        y[at(nr - 1, j)] -= cp / (hs * hs) * bc_hi[j];
      }
    }
  }

  void solve() {
    const size_t n = (size_t)nr * nth;
    std::vector<double> rhs(n, 0.0), zero(n, 0.0);
    apply(zero, rhs, &rhs);  // rhs = -A*0 + boundary terms
    for (double& v : rhs) v = -v;
    u.assign(n, 0.0);
    std::vector<double> r = rhs, p = rhs, Ap(n);
    double rr = 0;
    for (double v : r) rr += v * v;
    const double rr0 = rr > 0 ? rr : 1.0;
    for (int it = 0; it < 40000 && rr > 1e-24 * rr0; ++it) {
      apply(p, Ap, nullptr);
      double pAp = 0;
      for (size_t m = 0; m < n; ++m) pAp += p[m] * Ap[m];
      const double alpha = rr / pAp;
      for (size_t m = 0; m < n; ++m) {
        u[m] += alpha * p[m];
        r[m] -= alpha * Ap[m];
      }
      double rr2 = 0;
      for (double v : r) rr2 += v * v;
      const double beta = rr2 / rr;
      rr = rr2;
      for (size_t m = 0; m < n; ++m) p[m] = r[m] + beta * p[m];
    }
  }

  double sample(double s, double th) const {
    const double fi = disc ? (s / hs - 0.5) : ((s - s_lo) / hs - 1.0);
    int i = (int)std::floor(fi);
    i = std::max(0, std::min(nr - 2, i));
    const double wi = fi - i;
    const double fj = th / hth;
    int j = (int)std::floor(fj);
    const double wj = fj - j;
    return (1 - wi) * ((1 - wj) * u[at(i, j)] + wj * u[at(i, j + 1)]) +
           wi * ((1 - wj) * u[at(i + 1, j)] + wj * u[at(i + 1, j + 1)]);
  }
};

}  // namespace

double fd_disc_green(Complex z_src, Complex z_probe, int n_grid) {
  // G = -ln|z - w| + u with u harmonic, u|_{r=1} = ln|z_b - w|.
  PolarLaplace P;
  P.setup(n_grid, n_grid, true, 0.0, 1.0);
  for (int j = 0; j < P.nth; ++j) {
    const Complex zb = std::polar(1.0, j * P.hth);
    P.bc_hi[j] = std::log(std::abs(zb - z_src));
  }
  P.solve();
  double th = std::arg(z_probe);
  if (th < 0) th += TWO_PI;
  return -std::log(std::abs(z_probe - z_src)) + P.sample(std::abs(z_probe), th);
}

double fd_annulus_green(double q, Complex z_src, Complex z_probe, int n_grid) {
  // Cylinder chart t = ln r. The singular model must be harmonic away from
  // the source: m = -ln|2 sinh((dt + i dth)/2)| = -ln(2(cosh dt - cos dth))/2.
  const double L = -std::log(q);
  const double ts = std::log(std::abs(z_src));
  const double phs = std::arg(z_src);
  auto mker = [&](double t, double th) {
    return -0.5 * std::log(2.0 * (std::cosh(t - ts) - std::cos(th - phs)));
  };
  PolarLaplace P;
  P.setup(n_grid, n_grid, false, -L, 0.0);
  for (int j = 0; j < P.nth; ++j) {
    P.bc_lo[j] = -mker(-L, j * P.hth);
    P.bc_hi[j] = -mker(0.0, j * P.hth);
  }
  P.solve();
  double th = std::arg(z_probe);
  if (th < 0) th += TWO_PI;
  const double t = std::log(std::abs(z_probe));
  return mker(t, th) + P.sample(t, th);
}

}  // namespace cilt
