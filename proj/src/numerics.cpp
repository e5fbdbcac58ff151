#include "cilt/numerics.hpp"

#include <cassert>

namespace cilt {

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double z = std::cos(PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

void gauss_legendre_ab(int n, double a, double b, std::vector<double>& x,
                       std::vector<double>& w) {
  gauss_legendre(n, x, w);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    x[i] = mid + half * x[i];
    w[i] *= half;
  }
}

double richardson(const std::vector<double>& h, const std::vector<double>& f,
                  int order, double* residual) {
  const size_t n = f.size();
  assert(h.size() == n && n >= 2);
  std::vector<std::vector<double>> tab(1, f);
  std::vector<double> last = f;
  for (int k = 1; k <= order && k < (int)n; ++k) {
    std::vector<double> next(n - k);
    for (size_t i = 0; i < n - k; ++i) {
      // Eliminate the h^k term between columns i and i+1.
      double r = h[i] / h[i + k];
      double rk = std::pow(r, k);
      next[i] = (rk * last[i + 1] - last[i]) / (rk - 1.0);
    }
    last = next;
  }
  if (residual) {
    *residual = last.size() >= 2 ? std::abs(last.back() - last[last.size() - 2])
                                 : std::abs(f.back() - f.front());
  }
  return last.back();
}

std::pair<double, double> linear_fit(const std::vector<double>& x,
                                     const std::vector<double>& y) {
  const size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double d = n * sxx - sx * sx;
  double b = (n * sxy - sx * sy) / d;
  double a = (sy - b * sx) / n;
  return {a, b};
}

}  // namespace cilt

namespace cilt {

void fft_pow2(std::vector<Complex>& a, bool inverse_sign) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse_sign ? -TWO_PI : TWO_PI) / (double)len;
    const Complex wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      Complex w(1.0, 0.0);
      for (size_t j = 0; j < len / 2; ++j) {
        Complex u = a[i + j], v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

void fft2_pow2(std::vector<Complex>& a, int n) {
  std::vector<Complex> buf(n);
  for (int r = 0; r < n; ++r) {
    buf.assign(a.begin() + (size_t)r * n, a.begin() + (size_t)(r + 1) * n);
    fft_pow2(buf);
    std::copy(buf.begin(), buf.end(), a.begin() + (size_t)r * n);
  }
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < n; ++r) buf[r] = a[(size_t)r * n + c];
    fft_pow2(buf);
    for (int r = 0; r < n; ++r) a[(size_t)r * n + c] = buf[r];
  }
}

}  // namespace cilt
