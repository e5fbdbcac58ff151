#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace cilt {

using Complex = std::complex<double>;
using std::size_t;

inline constexpr double PI = 3.141592653589793238462643383279502884;
inline constexpr double TWO_PI = 2.0 * PI;

template <typename T> inline T sq(const T& a) { return a * a; }

inline double rel_err(double a, double b) {
  double s = std::max(std::abs(a), std::abs(b));
  return s > 0 ? std::abs(a - b) / s : 0.0;
}
inline double rel_err(const Complex& a, const Complex& b) {
  double s = std::max(std::abs(a), std::abs(b));
  return s > 0 ? std::abs(a - b) / s : 0.0;
}

// Gauss-Legendre nodes/weights on [-1,1], Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

// Nodes/weights mapped to [a,b].
void gauss_legendre_ab(int n, double a, double b, std::vector<double>& x,
                       std::vector<double>& w);

// Successive Richardson elimination of powers h, h^2, ... from f(h_i).
// h must be decreasing. Returns the extrapolated limit and the residual
// (last correction magnitude) through *residual if non-null.
double richardson(const std::vector<double>& h, const std::vector<double>& f,
                  int order, double* residual);

// Linear least-squares fit y ~ a + b x; returns (a,b).
std::pair<double, double> linear_fit(const std::vector<double>& x,
                                     const std::vector<double>& y);

// In-place radix-2 FFT, out[j] = sum_m in[m] exp(+2 pi i m j / n); n a power
// of two. fft2 applies it along both axes of a row-major n x n array.
void fft_pow2(std::vector<Complex>& a, bool inverse_sign = false);
void fft2_pow2(std::vector<Complex>& a, int n);

}  // namespace cilt
