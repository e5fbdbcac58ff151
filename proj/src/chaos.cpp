#include "cilt/chaos.hpp"

#include <cmath>
#include <stdexcept>

namespace cilt {

double TorusField::eigenvalue(int m, long long n) const {
  const double t1 = tau.real(), t2 = tau.imag();
  return sq(TWO_PI / t2) * (sq((double)n - m * t1) + sq(m * t2));
}

TorusField sample_torus_gff(Complex tau, int n_modes, std::uint64_t seed) {
  if (n_modes < 8) throw std::invalid_argument("sample_torus_gff: n_modes >= 8");
  TorusField f;
  f.tau = tau;
  f.n_modes = n_modes;
  f.seed = seed;
  const double t1 = tau.real(), t2 = tau.imag();
  CounterRng rng{seed, 11};
  std::uint64_t ctr = 0;
  for (int m = 0; m <= n_modes; ++m) {
    const long long c = (long long)std::llround(m * t1);
    for (long long n = c - n_modes; n <= c + n_modes; ++n) {
      if (m == 0 && n <= 0) continue;  // half lattice: m > 0 or (m = 0, n > 0)
      const double lam = f.eigenvalue(m, n);
      const double sigma = std::sqrt(PI / (t2 * lam));
      double g1, g2;
      rng.gaussian_pair(ctr++, g1, g2);
      f.modes.push_back({m, n});
      f.coeff.push_back(Complex(g1, g2) * sigma);
    }
  }
  return f;
}

std::vector<double> TorusField::grid_values(int G, double eps) const {
  // pack Hermitian modes into a G x G spectral array, inverse DFT
  std::vector<Complex> spec((size_t)G * G, Complex{0, 0});
  auto wrap = [G](long long v) { return (int)(((v % G) + G) % G); };
  for (size_t i = 0; i < modes.size(); ++i) {
    const auto [m, n] = modes[i];
    double mult = 1.0;
    if (eps > 0) mult = std::cyl_bessel_j(0, std::sqrt(eigenvalue(m, n)) * eps);
    const Complex a = coeff[i] * mult;
    spec[(size_t)wrap(m) * G + wrap(n)] += a;
    spec[(size_t)wrap(-m) * G + wrap(-n)] += std::conj(a);
  }
  fft2_pow2(spec, G);
  std::vector<double> out((size_t)G * G);
  // spec index (i, j) now holds X at lattice point (x', y') = (i, j)/G
  for (size_t i = 0; i < out.size(); ++i) out[i] = spec[i].real();
  return out;
}

double TorusField::circle_average(Complex z, double eps) const {
  if (eps > 0 && eps < 1.0 / n_modes)
    throw std::invalid_argument("circle_average: eps below resolution floor");
  const double t1 = tau.real(), t2 = tau.imag();
  const double yp = z.imag() / t2;
  const double xp = z.real() - t1 * yp;
  double val = 0;
  for (size_t i = 0; i < modes.size(); ++i) {
    const auto [m, n] = modes[i];
    const double mult =
        eps > 0 ? std::cyl_bessel_j(0, std::sqrt(eigenvalue(m, n)) * eps) : 1.0;
    const Complex ph = std::polar(1.0, TWO_PI * (m * xp + n * yp));
    val += 2.0 * (coeff[i] * ph).real() * mult;
  }
  return val;
}

double TorusField::variance_eps(double eps) const {
  const double t2 = tau.imag();
  double var = 0;
  for (const auto& [m, n] : modes) {
    const double lam = eigenvalue(m, n);
    const double mult =
        eps > 0 ? std::cyl_bessel_j(0, std::sqrt(lam) * eps) : 1.0;
    var += 2.0 * (TWO_PI / (t2 * lam)) * mult * mult;
  }
  return var;
}

namespace {

// dense Cholesky with diagonal jitter fallback
int cholesky_jitter(std::vector<double>& a, int n) {
  int jitters = 0;
  double maxdiag = 0;
  for (int i = 0; i < n; ++i) maxdiag = std::max(maxdiag, a[(size_t)i * n + i]);
  for (int attempt = 0; attempt < 12; ++attempt) {
    std::vector<double> L = a;
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      for (int j = 0; j <= i; ++j) {
        double s = L[(size_t)i * n + j];
        for (int k = 0; k < j; ++k)
          s -= L[(size_t)i * n + k] * L[(size_t)j * n + k];
        if (i == j) {
          if (s <= 0) {
            ok = false;
            break;
          }
          L[(size_t)i * n + i] = std::sqrt(s);
        } else {
          L[(size_t)i * n + j] = s / L[(size_t)j * n + j];
        }
      }
    }
    if (ok) {
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) L[(size_t)i * n + j] = 0.0;
      a = L;
      return jitters;
    }
    const double jit = maxdiag * 1e-11 * std::pow(10.0, attempt);
    for (int i = 0; i < n; ++i) a[(size_t)i * n + i] += jit;
    ++jitters;
  }
  throw std::runtime_error("cholesky_jitter: matrix not positive definite");
}

}  // namespace

DiscSampler make_disc_sampler(const QuadratureGrid& grid, double eps,
                              double domain_radius) {
  const int n = (int)grid.nodes.size();
  const double a = domain_radius;
  DiscSampler s;
  s.grid = grid;
  s.eps = eps;
  s.chol.assign((size_t)n * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      double c;
      if (i == j) {
        // G(x,y) = G_unit(x/a, y/a), so the regular part gains ln a
        c = -std::log(eps) + disc_green_regular_part(grid.nodes[i] / a) +
            std::log(a);
      } else {
        c = green_disc_dirichlet(grid.nodes[i] / a, grid.nodes[j] / a);
      }
      s.chol[(size_t)i * n + j] = s.chol[(size_t)j * n + i] = c;
    }
  s.jitter_steps = cholesky_jitter(s.chol, n);
  return s;
}

DiscSampler make_annulus_sampler(const QuadratureGrid& grid, double q, double eps) {
  const int n = (int)grid.nodes.size();
  DiscSampler s;
  s.grid = grid;
  s.eps = eps;
  s.chol.assign((size_t)n * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      double c;
      if (i == j) {
        c = -std::log(eps) + annulus_green_regular_part(q, grid.nodes[i]);
      } else {
        c = green_annulus_dirichlet(q, grid.nodes[i], grid.nodes[j]);
      }
      s.chol[(size_t)i * n + j] = s.chol[(size_t)j * n + i] = c;
    }
  s.jitter_steps = cholesky_jitter(s.chol, n);
  return s;
}

DiscSampler make_disc_sampler_two_eps(const QuadratureGrid& grid, double eps1,
                                      double eps2) {
  const int m = (int)grid.nodes.size();
  const int n = 2 * m;
  DiscSampler s;
  s.grid = grid;
  s.eps = eps1;
  s.chol.assign((size_t)n * n, 0.0);
  auto cov = [&](int i, int j) {
    const int a = i % m, b = j % m;
    const double ea = i < m ? eps1 : eps2, eb = j < m ? eps1 : eps2;
    if (a == b)  // concentric circle averages: -ln(max radius) + W
      return -std::log(std::max(ea, eb)) + disc_green_regular_part(grid.nodes[a]);
    return green_disc_dirichlet(grid.nodes[a], grid.nodes[b]);
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j)
      s.chol[(size_t)i * n + j] = s.chol[(size_t)j * n + i] = cov(i, j);
  s.jitter_steps = cholesky_jitter(s.chol, n);
  return s;
}

std::vector<double> DiscSampler::sample(std::uint64_t seed,
                                        std::uint64_t index) const {
  const int n = (int)std::sqrt((double)chol.size());
  CounterRng rng{seed, 1000 + index};
  std::vector<double> g(n), out(n, 0.0);
  for (int i = 0; i < n; ++i) g[i] = rng.gaussian(i);
  for (int i = 0; i < n; ++i) {
    double acc = 0;
    for (int j = 0; j <= i; ++j) acc += chol[(size_t)i * n + j] * g[j];
    out[i] = acc;
  }
  return out;
}

double circle_average_grid(const std::function<double(Complex)>& field, Complex x,
                           double eps, int n_nodes) {
  double acc = 0;
  for (int i = 0; i < n_nodes; ++i)
    acc += field(x + std::polar(eps, TWO_PI * (i + 0.5) / n_nodes));
  return acc / n_nodes;
}

double BoundaryField::value(double theta) const {
  double v = c;
  for (int n = 1; n <= (int)modes.size(); ++n)
    v += 2.0 * (modes[n - 1] * std::polar(1.0, n * theta)).real();
  return v;
}

HarmonicExtension harmonic_extension_disc(const BoundaryField& b) {
  HarmonicExtension h;
  BoundaryField bc = b;
  h.value = [bc](Complex z) {
    const double r = std::abs(z), th = std::arg(z);
    double v = bc.c;
    for (int n = 1; n <= (int)bc.modes.size(); ++n)
      v += 2.0 * (bc.modes[n - 1] * std::polar(std::pow(r, n), n * th)).real();
    return v;
  };
  return h;
}

HarmonicExtension harmonic_extension_annulus(const BoundaryField& outer,
                                             const BoundaryField& inner,
                                             double q) {
  if (!(q > 0 && q < 1))
    throw std::invalid_argument("harmonic_extension_annulus: q in (0,1)");
  const int N = std::max(outer.n_modes(), inner.n_modes());
  // per-mode a r^n + b r^{-n}; conditioning guard on the 2x2 solves
  std::vector<Complex> a(N + 1), b(N + 1);
  for (int n = 1; n <= N; ++n) {
    const Complex po = n <= outer.n_modes() ? outer.modes[n - 1] : Complex{0, 0};
    const Complex pi_ = n <= inner.n_modes() ? inner.modes[n - 1] : Complex{0, 0};
    const double qn = std::pow(q, n);
    const double q2n = qn * qn;
    if (1.0 / (1.0 - q2n) > 1e12)
      throw std::runtime_error(
          "harmonic_extension_annulus: per-mode solve condition exceeds 1e12");
    // stable rearrangement: b = (phi_in - phi_out q^n) q^n / (1 - q^{2n})
    b[n] = (pi_ - po * qn) * qn / (1.0 - q2n);
    a[n] = po - b[n];
  }
  const double c_out = outer.c, c_in = inner.c, lq = std::log(q);
  HarmonicExtension h;
  h.value = [=](Complex z) {
    const double r = std::abs(z), th = std::arg(z);
    double v = c_out + (c_in - c_out) * std::log(r) / lq;
    for (int n = 1; n <= N; ++n) {
      const Complex radial = a[n] * std::pow(r, n) + b[n] * std::pow(r, -n);
      v += 2.0 * (radial * std::polar(1.0, n * th)).real();
    }
    return v;
  };
  return h;
}

HarmonicExtension radial_log_profile(double value_out, double value_in, double q) {
  const double b = (value_in - value_out) / std::log(q);
  HarmonicExtension h;
  h.value = [=](Complex z) { return value_out + b * std::log(std::abs(z)); };
  return h;
}

Complex gmc_integral(const std::vector<double>& field_eps,
                     const QuadratureGrid& grid,
                     const std::function<Complex(Complex)>& f,
                     const std::function<double(Complex)>& shift, double beta,
                     double eps) {
  const double norm = std::pow(eps, -0.5 * beta * beta);
  Complex acc{0, 0};
  for (size_t i = 0; i < grid.nodes.size(); ++i) {
    const Complex z = grid.nodes[i];
    const double phase = beta * (field_eps[i] + (shift ? shift(z) : 0.0));
    const Complex fv = f ? f(z) : Complex{1, 0};
    acc += fv * std::polar(grid.weights[i], phase);
  }
  return norm * acc;
}

namespace {

double torus_w_at(Complex tau, const std::function<double(Complex)>& omega,
                  Complex z) {
  double w = torus_green_regular_part(tau);
  if (omega) w += 0.5 * omega(z);
  return w;
}

// S(b) = E |U - V|^{-b} over unit-square pairs, through the square
// line-picking density: p(r) = 2r(r^2 - 4r + pi) on [0,1] and
// 2r(4 sqrt(r^2-1) - (r^2 + 2 - pi) - 4 atan(sqrt(r^2-1))) on [1, sqrt 2].
double cell_self_integral(double b) {
  auto density = [](double r) {
    if (r <= 1.0) return 2.0 * r * (r * r - 4.0 * r + PI);
    const double s = std::sqrt(r * r - 1.0);
    return 2.0 * r * (4.0 * s - (r * r + 2.0 - PI) - 4.0 * std::atan(s));
  };
  // graded at 0: r = u^{2/(2-b)} flattens p(r) r^{-b} ~ r^{1-b}
  std::vector<double> x, w;
  gauss_legendre_ab(200, 0.0, 1.0, x, w);
  double acc = 0;
  const double p = 2.0 / (2.0 - b);
  for (size_t i = 0; i < x.size(); ++i) {
    const double r = std::pow(x[i], p);
    acc += density(r) * std::pow(r, -b) * p * std::pow(x[i], p - 1.0) * w[i];
  }
  std::vector<double> x2, w2;
  gauss_legendre_ab(200, 1.0, std::sqrt(2.0), x2, w2);
  for (size_t i = 0; i < x2.size(); ++i)
    acc += density(x2[i]) * std::pow(x2[i], -b) * w2[i];
  return acc;
}

}  // namespace

static double second_moment_impl(Complex tau, double beta,
                                 const std::function<Complex(Complex)>& f,
                                 const std::function<double(Complex)>& omega,
                                 int n_grid, bool parallel) {
  const double b2 = beta * beta;
  if (b2 >= 2.0)
    throw std::invalid_argument("second_moment_oracle: beta^2 < 2 required");
  const double w0 = torus_green_regular_part(tau);

  if (!f && !omega) {
    // translation-reduced: v_g * Int K(d) dv(d), polar-graded near d = 0
    const double t2 = tau.imag();
    auto kern = [&](Complex d) {
      return std::exp(b2 * (green_torus_fast(tau, d, {0, 0}) - w0));
    };
    const double r0 = 0.25;
    auto cut = [&](double r) {
      const double u = r / r0;
      return u >= 1.0 ? 1.0 : u * u * (3 - 2 * u);
    };
    // polar part (1 - cut)
    std::vector<double> gr, gw;
    gauss_legendre_ab(64, 0.0, r0, gr, gw);
    double polar = 0;
    const int nth = 128;
    for (size_t i = 0; i < gr.size(); ++i)
      for (int j = 0; j < nth; ++j) {
        const Complex d = std::polar(gr[i], TWO_PI * (j + 0.5) / nth);
        polar += kern(d) * (1.0 - cut(gr[i])) * gr[i] * gw[i] * (TWO_PI / nth);
      }
    // lattice part (cut): smooth over the torus
    QuadratureGrid g = torus_grid(tau, n_grid);
    double lattice = sum_chunked(
        g.nodes.size(),
        [&](size_t i) {
          const Complex d = g.nodes[i];
          // distance to nearest lattice point in physical coordinates
          double du, dv;
          const Complex zz = d;
          dv = zz.imag() / tau.imag();
          du = zz.real() - tau.real() * dv;
          du -= std::round(du);
          dv -= std::round(dv);
          const double dist = std::abs(Complex(du, 0) + tau * dv);
          return kern(d) * cut(dist) * g.weights[i];
        },
        {1024, parallel});
    return t2 * (polar + lattice);
  }

  // general path: full double quadrature over the product grid
  QuadratureGrid g = torus_grid(tau, n_grid);
  const size_t M = g.nodes.size();
  std::vector<double> wv(M), dvw(M);
  std::vector<Complex> fv(M);
  for (size_t i = 0; i < M; ++i) {
    wv[i] = torus_w_at(tau, omega, g.nodes[i]);
    dvw[i] = g.weights[i] * (omega ? std::exp(omega(g.nodes[i])) : 1.0);
    fv[i] = f ? f(g.nodes[i]) : Complex{1, 0};
  }
  // diagonal cells: f_i f_i IntInt_{cell^2} e^{b2 G} dv dv with the
  // log-singular kernel integrated in closed-graded form; at beta = 0 this
  // reduces to the exact |Int f dv|^2 identity.
  const double S = cell_self_integral(b2);
  double total = sum_chunked(
      M,
      [&](size_t i) {
        double row = 0;
        for (size_t j = 0; j < M; ++j) {
          if (i == j) continue;
          const double G = green_torus_fast(tau, g.nodes[i], g.nodes[j]);
          const double k = std::exp(b2 * (G - 0.5 * (wv[i] + wv[j])));
          row += (fv[i] * std::conj(fv[j])).real() * k * dvw[i] * dvw[j];
        }
        const double h2 = dvw[i];  // physical cell area
        row += std::norm(fv[i]) * S * std::pow(h2, 2.0 - 0.5 * b2);
        return row;
      },
      {4, parallel});
  return total;
}

double second_moment_oracle_torus(Complex tau, double beta,
                                  const std::function<Complex(Complex)>& f,
                                  const std::function<double(Complex)>& omega,
                                  int n_grid, bool parallel) {
  return second_moment_impl(tau, beta, f, omega, n_grid, parallel);
}

double second_moment_oracle_torus_serial(Complex tau, double beta,
                                         const std::function<Complex(Complex)>& f,
                                         const std::function<double(Complex)>& omega,
                                         int n_grid) {
  return second_moment_impl(tau, beta, f, omega, n_grid, false);
}

GmcEstimate torus_second_moment_mc(Complex tau, double beta, int n_modes,
                                   double eps, int grid_n, int n_samples,
                                   std::uint64_t seed) {
  // The truncated mode set carries slightly less eps-scale variance than the
  // full field (the J0^2 tail); match it to the exact circle-average variance
  // so the regularized measure is represented faithfully at finite n_modes.
  // The factor is deterministic and tends to 1 as n_modes grows.
  const double var_exact = -std::log(eps) + variance_regular_part_torus(tau, eps);
  const double var_trunc = sample_torus_gff(tau, n_modes, 1).variance_eps(eps);
  const double deficit = var_exact - var_trunc;
  const double norm = std::pow(eps, -0.5 * beta * beta) *
                      std::exp(-0.5 * beta * beta * deficit);
  const double w = tau.imag() / ((double)grid_n * grid_n);
  std::vector<double> sq_abs(n_samples);
  for_each_index((size_t)n_samples, [&](size_t s) {
    TorusField f = sample_torus_gff(tau, n_modes, seed + 7919 * s);
    std::vector<double> x = f.grid_values(grid_n, eps);
    Complex m{0, 0};
    for (double v : x) m += std::polar(w, beta * v);
    m *= norm;
    sq_abs[s] = std::norm(m);
  });
  double mean = 0;
  for (double v : sq_abs) mean += v;
  mean /= n_samples;
  double var = 0;
  for (double v : sq_abs) var += sq(v - mean);
  var /= (n_samples - 1.0);
  GmcEstimate est;
  est.value = mean;
  est.std_error = std::sqrt(var / n_samples);
  est.n_samples = n_samples;
  est.eps = eps;
  return est;
}

double variance_regular_part_torus(Complex tau, double eps, int n_nodes) {
  // E[X_eps^2] + ln eps = avg over two eps-circles of [G(u,u') + ln|u-u'|];
  // the two node families are phase-offset so the regular integrand is never
  // evaluated at coincident points.
  const Complex x{0.31, 0.41};
  double acc = 0;
  for (int i = 0; i < n_nodes; ++i) {
    const Complex u = x + std::polar(eps, TWO_PI * i / n_nodes);
    for (int j = 0; j < n_nodes; ++j) {
      const Complex v = x + std::polar(eps, TWO_PI * (j + 0.5) / n_nodes);
      acc += green_torus_fast(tau, u, v) + std::log(std::abs(u - v));
    }
  }
  return acc / ((double)n_nodes * n_nodes);
}

ExpMomentProbe exp_moment_probe(double mu, double beta, int n_samples, double eps,
                                double radius, std::uint64_t seed) {
  QuadratureGrid grid = disc_uniform_grid(2.5 * eps, radius);
  DiscSampler sampler = make_disc_sampler(grid, eps);
  const double norm = std::pow(eps, -0.5 * beta * beta);
  std::vector<double> vals(n_samples);
  for_each_index((size_t)n_samples, [&](size_t s) {
    std::vector<double> x = sampler.sample(seed, s);
    Complex m{0, 0};
    for (size_t i = 0; i < grid.nodes.size(); ++i)
      m += std::polar(grid.weights[i], beta * x[i]);
    vals[s] = std::exp(mu * std::abs(norm * m));
  });
  ExpMomentProbe p;
  for (double v : vals) p.estimate += v;
  p.estimate /= n_samples;
  double var = 0;
  for (double v : vals) var += sq(v - p.estimate);
  p.std_error = std::sqrt(var / ((n_samples - 1.0) * n_samples));
  // comparison quantities of the exponential-moment bound
  double u2 = 0, vtot = 0;
  const double b2 = beta * beta;
  for (size_t i = 0; i < grid.nodes.size(); ++i) {
    vtot += grid.weights[i];
    for (size_t j = 0; j < grid.nodes.size(); ++j) {
      const double G =
          i == j ? -std::log(eps) + disc_green_regular_part(grid.nodes[i])
                 : green_disc_dirichlet(grid.nodes[i], grid.nodes[j]);
      u2 += std::exp(b2 * G) * grid.weights[i] * grid.weights[j];
    }
  }
  p.u = std::sqrt(u2);
  p.v = vtot;
  return p;
}

}  // namespace cilt
