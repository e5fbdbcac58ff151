#pragma once

#include <array>
#include <optional>
#include <vector>

#include "cilt/chaos.hpp"
#include "cilt/geometry.hpp"
#include "cilt/params.hpp"
#include "cilt/special.hpp"

namespace cilt {

// Data of the s-fold Coulomb-gas integral over C^s:
//   prod_j |x_j|^{a1} |1-x_j|^{a2} e^{i (w1 arg x_j - w2 arg(1-x_j))}
//   prod_{i<j} |x_i - x_j|^{beta^2},
// radial exponents a = beta*alpha at the insertions 0 and 1, integer magnetic
// phases, branch of arg fixed to (-pi, pi].
struct DfSpec {
  long long s = 0;
  double a1 = 0.0, a2 = 0.0;
  long long w1 = 0, w2 = 0;
  double beta_sq = 0.0;

  // a3 from the truncation sum rule: a1 + a2 + a3 = beta^2 - 4 - s beta^2
  double a3() const { return beta_sq - 4.0 - (double)s * beta_sq - a1 - a2; }
  // integrability: a1, a2 > -2 at the insertions, a3 > -2 at infinity
  void validate() const;
};

Complex df_integrand(const std::vector<Complex>& x_vec, const DfSpec& spec);

enum class DfMethod { quadrature, monte_carlo };

// (-mu)^s / s! times the s-fold integral. Quadrature supports s <= 2
// (region-split polar rules graded at 0, 1 and the inversion chart at
// infinity); MC uses the importance mixture of point-mass densities at 0, 1,
// the uniform middle and the inversion tail.
GmcEstimate df_integral(const DfSpec& spec, Complex mu, DfMethod method,
                        long long budget, std::uint64_t seed = 1);

// Imaginary DOZZ closed form for zero magnetic charge,
//   (-pi mu / l(b/4))^s prod_{j=1..s} l(j b/4)
//     / prod_{j=0..s-1} l(-beta a_k/2 - j b/4)  (k = 1,2,3),
// with b = beta^2. l-poles are tagged, never thrown as infinities.
struct DozzResult {
  Complex value{0, 0};
  bool singular = false;  // an l-pole was hit
  bool zero = false;
};
DozzResult imaginary_dozz(const ModelParams& params, const std::array<double, 3>& alphas,
                          long long s);

// Sphere metric descriptor for the correlator assembly.
enum class SphereMetricKind { g0, round };

struct ThreePointResult {
  enum class Variant { value, vanishing, invalid } variant = Variant::invalid;
  Complex value{0, 0};
  long long ell = 0;
  std::string reason;
  // decomposition: value = prefactor * spin_phase * structure_constant *
  //                        metric_factors * anomaly
  double prefactor = 0.0;        // P_{alpha,m}(z) distance exponents
  Complex spin_phase{1, 0};
  Complex structure_constant{0, 0};  // 2 pi R * df_integral
  double metric_factors = 1.0;       // prod g(z_j)^{-Delta_j}
  double anomaly = 1.0;              // e^{c A(omega)} between g0 and the metric
  double quadrature_error = 0.0;
};

ThreePointResult three_point(const ModelParams& params, const InsertionSet& insertions,
                             SphereMetricKind metric, long long mc_budget = 0,
                             std::uint64_t seed = 1);

// Max relative deviation of three_point at the psi-images (tangents
// transported by arg psi') against the covariance-transported original.
double mobius_covariance_check(const ModelParams& params,
                               const InsertionSet& insertions, const Mobius& map,
                               SphereMetricKind metric = SphereMetricKind::g0,
                               long long mc_budget = 0);

}  // namespace cilt
