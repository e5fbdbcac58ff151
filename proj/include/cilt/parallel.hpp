#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

namespace cilt {

// Chunked deterministic reductions. The accumulation order is fixed by the
// chunk layout, never by the thread schedule: partials are written to slots
// indexed by chunk and folded serially, so results are bit-identical for any
// thread count (including the serial reference path).

int max_threads();
void set_threads(int n);  // 0 = library default

struct SumOptions {
  std::size_t chunk = 1024;
  bool parallel = true;
};

double sum_chunked(std::size_t n, const std::function<double(std::size_t)>& term,
                   const SumOptions& opt = {});

std::complex<double> sum_chunked_c(
    std::size_t n, const std::function<std::complex<double>(std::size_t)>& term,
    const SumOptions& opt = {});

// Serial reference: same chunk layout, plain loop. Kept for the kernel
// equivalence tests and the benchmark target.
double sum_chunked_serial(std::size_t n,
                          const std::function<double(std::size_t)>& term,
                          std::size_t chunk = 1024);
std::complex<double> sum_chunked_serial_c(
    std::size_t n, const std::function<std::complex<double>(std::size_t)>& term,
    std::size_t chunk = 1024);

// Parallel for over [0,n) with no reduction (independent writes).
void for_each_index(std::size_t n, const std::function<void(std::size_t)>& body,
                    bool parallel = true);

// Counter-based RNG: stateless, keyed by (seed, stream, counter). Streams are
// independent, so MC estimates are reproducible for any thread count.
struct CounterRng {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  std::uint64_t next_u64(std::uint64_t counter) const;
  double uniform(std::uint64_t counter) const;  // (0,1)
  // Two independent N(0,1) draws per counter (Box-Muller).
  void gaussian_pair(std::uint64_t counter, double& g0, double& g1) const;
  double gaussian(std::uint64_t counter) const;
};

}  // namespace cilt
