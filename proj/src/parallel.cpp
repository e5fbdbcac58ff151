#include "cilt/parallel.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cilt {

namespace {
int g_threads = 0;
}

int max_threads() {
#ifdef _OPENMP
  return g_threads > 0 ? g_threads : omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) { g_threads = n; }

template <typename T, typename F>
static T sum_impl(std::size_t n, const F& term, std::size_t chunk, bool parallel) {
  if (n == 0) return T{};
  if (chunk == 0) chunk = 1;
  const std::size_t nchunks = (n + chunk - 1) / chunk;
  std::vector<T> partial(nchunks, T{});
#ifdef _OPENMP
  const int nt = parallel ? max_threads() : 1;
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
  for (long long c = 0; c < (long long)nchunks; ++c) {
    T acc{};
    const std::size_t lo = (std::size_t)c * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    for (std::size_t i = lo; i < hi; ++i) acc += term(i);
    partial[c] = acc;
  }
#else
  (void)parallel;
  for (std::size_t c = 0; c < nchunks; ++c) {
    T acc{};
    const std::size_t lo = c * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    for (std::size_t i = lo; i < hi; ++i) acc += term(i);
    partial[c] = acc;
  }
#endif
  T total{};
  for (std::size_t c = 0; c < nchunks; ++c) total += partial[c];
  return total;
}

double sum_chunked(std::size_t n, const std::function<double(std::size_t)>& term,
                   const SumOptions& opt) {
  return sum_impl<double>(n, term, opt.chunk, opt.parallel);
}

std::complex<double> sum_chunked_c(
    std::size_t n, const std::function<std::complex<double>(std::size_t)>& term,
    const SumOptions& opt) {
  return sum_impl<std::complex<double>>(n, term, opt.chunk, opt.parallel);
}

double sum_chunked_serial(std::size_t n,
                          const std::function<double(std::size_t)>& term,
                          std::size_t chunk) {
  return sum_impl<double>(n, term, chunk, false);
}

std::complex<double> sum_chunked_serial_c(
    std::size_t n, const std::function<std::complex<double>(std::size_t)>& term,
    std::size_t chunk) {
  return sum_impl<std::complex<double>>(n, term, chunk, false);
}

void for_each_index(std::size_t n, const std::function<void(std::size_t)>& body,
                    bool parallel) {
#ifdef _OPENMP
  const int nt = parallel ? max_threads() : 1;
#pragma omp parallel for schedule(static) num_threads(nt)
  for (long long i = 0; i < (long long)n; ++i) body((std::size_t)i);
#else
  (void)parallel;
  for (std::size_t i = 0; i < n; ++i) body(i);
#endif
}

// SplitMix64 finalizer applied to a keyed counter.
static inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t CounterRng::next_u64(std::uint64_t counter) const {
  std::uint64_t k = mix64(seed ^ 0x6a09e667f3bcc909ULL);
  k = mix64(k ^ stream);
  return mix64(k ^ counter);
}

double CounterRng::uniform(std::uint64_t counter) const {
  // 53-bit mantissa, strictly inside (0,1).
  return ((next_u64(counter) >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

void CounterRng::gaussian_pair(std::uint64_t counter, double& g0, double& g1) const {
  const double u1 = uniform(2 * counter);
  const double u2 = uniform(2 * counter + 1);
  const double r = std::sqrt(-2.0 * std::log(u1));
  g0 = r * std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  g1 = r * std::sin(2.0 * 3.141592653589793238462643383279502884 * u2);
}

double CounterRng::gaussian(std::uint64_t counter) const {
  double a, b;
  gaussian_pair(counter, a, b);
  return a;
}

}  // namespace cilt
