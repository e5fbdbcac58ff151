// Timing comparison of the OpenMP kernels against the serial reference path.
// The chunk-indexed reductions make the two bitwise equal; the interesting
// column is the speedup.
#include <chrono>
#include <cmath>
#include <cstdio>

#include "cilt/chaos.hpp"
#include "cilt/correlators.hpp"
#include "cilt/parallel.hpp"

using namespace cilt;

static double now() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

int main() {
  std::printf("threads available: %d\n\n", max_threads());
  std::printf("%-28s %10s %10s %9s %8s\n", "kernel", "serial[s]", "omp[s]",
              "speedup", "equal");

  {
    const std::size_t n = 40'000'000;
    auto term = [](std::size_t i) {
      const double x = 1e-7 * (double)(i % 1000003);
      return std::sin(x) * std::exp(-x * x);
    };
    const double t0 = now();
    const double serial = sum_chunked_serial(n, term);
    const double t1 = now();
    const double parallel = sum_chunked(n, term);
    const double t2 = now();
    std::printf("%-28s %10.3f %10.3f %8.2fx %8s\n", "sum_chunked (sin/exp)",
                t1 - t0, t2 - t1, (t1 - t0) / (t2 - t1),
                serial == parallel ? "yes" : "NO");
  }

  {
    // the general-f route is the O(M^2) pair kernel
    const Complex tau{0.0, 1.0};
    auto f = [](Complex z) { return Complex{1.0 + 0.2 * z.real(), 0.0}; };
    const double t0 = now();
    const double serial =
        second_moment_oracle_torus_serial(tau, 1.0, f, nullptr, 56);
    const double t1 = now();
    const double parallel =
        second_moment_oracle_torus(tau, 1.0, f, nullptr, 56, true);
    const double t2 = now();
    std::printf("%-28s %10.3f %10.3f %8.2fx %8s\n", "gmc second-moment oracle",
                t1 - t0, t2 - t1, (t1 - t0) / (t2 - t1),
                serial == parallel ? "yes" : "NO");
  }

  {
    DfSpec spec;
    spec.s = 2;
    spec.a1 = spec.a2 = -14.0 / 9.0;
    spec.beta_sq = 4.0 / 9.0;
    const double t0 = now();
    set_threads(1);
    auto serial = df_integral(spec, {1, 0}, DfMethod::monte_carlo, 2000000, 5);
    const double t1 = now();
    set_threads(0);
    auto parallel = df_integral(spec, {1, 0}, DfMethod::monte_carlo, 2000000, 5);
    const double t2 = now();
    std::printf("%-28s %10.3f %10.3f %8.2fx %8s\n", "df s=2 importance MC",
                t1 - t0, t2 - t1, (t1 - t0) / (t2 - t1),
                serial.value == parallel.value ? "yes" : "NO");
  }
  return 0;
}
