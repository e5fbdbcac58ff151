#pragma once

// Disc covariance reconstruction through the interior-circle split: two
// independent Dirichlet pieces plus the harmonic extension of the circle
// trace. Shared between the unit tests and the acceptance suite.

#include <cmath>
#include <vector>

#include "cilt/chaos.hpp"
#include "cilt/geometry.hpp"

namespace cilt_test {

using namespace cilt;

struct MarkovProbe {
  double direct = 0.0, direct_se = 0.0;
  double split = 0.0, split_se = 0.0;
};

// Estimates E[X(x) X(y)] two ways at the given probe pairs: the direct disc
// sampler against the split reconstruction Y1 + Y2 + P (trace sampled in
// Fourier modes, E|phi_n|^2 = (1 - r0^{2n})/(2n), zero mode variance -ln r0).
inline std::vector<MarkovProbe> markov_split_probes(
    const std::vector<std::pair<Complex, Complex>>& pairs, double r0,
    int n_samples, std::uint64_t seed) {
  const double eps = 1.0 / 256.0;
  const int n_trace_modes = 48;

  // probe points gathered into one grid per region for the samplers
  std::vector<Complex> pts;
  for (auto& [a, b] : pairs) {
    pts.push_back(a);
    pts.push_back(b);
  }
  QuadratureGrid probe_grid;
  probe_grid.nodes = pts;
  probe_grid.weights.assign(pts.size(), 0.0);
  probe_grid.chart.assign(pts.size(), 0);

  DiscSampler direct = make_disc_sampler(probe_grid, eps);

  QuadratureGrid inner_grid, outer_grid;
  std::vector<int> region(pts.size(), 0);
  for (size_t i = 0; i < pts.size(); ++i) {
    if (std::abs(pts[i]) < r0) {
      region[i] = 0;
      inner_grid.nodes.push_back(pts[i]);
    } else {
      region[i] = 1;
      outer_grid.nodes.push_back(pts[i]);
    }
  }
  inner_grid.weights.assign(inner_grid.nodes.size(), 0.0);
  inner_grid.chart.assign(inner_grid.nodes.size(), 0);
  outer_grid.weights.assign(outer_grid.nodes.size(), 0.0);
  outer_grid.chart.assign(outer_grid.nodes.size(), 0);

  DiscSampler y1 = make_disc_sampler(inner_grid, eps, r0);
  DiscSampler y2 = make_annulus_sampler(outer_grid, r0, eps);

  std::vector<std::vector<double>> prod_direct(pairs.size()),
      prod_split(pairs.size());

  CounterRng trace_rng{seed, 555};
  for (int s = 0; s < n_samples; ++s) {
    std::vector<double> xd = direct.sample(seed ^ 0x9e37, s);

    // split: sample trace modes on |z| = r0
    BoundaryField trace;
    trace.c = trace_rng.gaussian(1000000ull * s) * std::sqrt(-std::log(r0));
    for (int n = 1; n <= n_trace_modes; ++n) {
      double g1, g2;
      trace_rng.gaussian_pair(1000000ull * s + n, g1, g2);
      const double sd = std::sqrt((1.0 - std::pow(r0, 2 * n)) / (4.0 * n));
      trace.modes.push_back(Complex(g1, g2) * sd);
    }
    // harmonic extensions: inside sum phi_n (r/r0)^n e^{i n th} + c,
    // outside the annulus extension with zero outer data
    auto p_inside = [&](Complex z) {
      const double r = std::abs(z) / r0, th = std::arg(z);
      double v = trace.c;
      for (int n = 1; n <= n_trace_modes; ++n)
        v += 2.0 * (trace.modes[n - 1] * std::polar(std::pow(r, n), n * th)).real();
      return v;
    };
    BoundaryField zero;
    HarmonicExtension p_outside = harmonic_extension_annulus(zero, trace, r0);

    std::vector<double> xi = y1.sample(seed ^ 0x1234, s);
    std::vector<double> xo = y2.sample(seed ^ 0x5678, s);

    std::vector<double> xs(pts.size());
    int ci = 0, co = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
      if (region[i] == 0)
        xs[i] = xi[ci++] + p_inside(pts[i]);
      else
        xs[i] = xo[co++] + p_outside.value(pts[i]);
    }
    for (size_t p = 0; p < pairs.size(); ++p) {
      prod_direct[p].push_back(xd[2 * p] * xd[2 * p + 1]);
      prod_split[p].push_back(xs[2 * p] * xs[2 * p + 1]);
    }
  }

  std::vector<MarkovProbe> out(pairs.size());
  for (size_t p = 0; p < pairs.size(); ++p) {
    auto stats = [&](const std::vector<double>& v, double& mean, double& se) {
      mean = 0;
      for (double x : v) mean += x;
      mean /= v.size();
      double var = 0;
      for (double x : v) var += (x - mean) * (x - mean);
      se = std::sqrt(var / ((v.size() - 1.0) * v.size()));
    };
    stats(prod_direct[p], out[p].direct, out[p].direct_se);
    stats(prod_split[p], out[p].split, out[p].split_se);
  }
  return out;
}

}  // namespace cilt_test
