#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cilt/numerics.hpp"
#include "cilt/rational.hpp"

namespace cilt {

// Coupling data of the compactified model. Rational mode takes (p,q,k) with
// beta^2 = 4p/q and R = (k/2) sqrt(pq); then beta*R = k*p and Q*R = k(p-q)/2
// are exact integers kept alongside the floating values so the selection
// rule never rounds.
struct ModelParams {
  double beta = 0.0;
  double radius = 0.0;   // R
  double q_charge = 0.0; // Q = beta/2 - 2/beta
  Complex mu{1.0, 0.0};
  double central_charge = 0.0;

  enum class Mode { rational, irrational } mode = Mode::rational;

  // rational mode only
  long long p = 0, q = 0, k = 0;
  long long beta_R = 0;  // = k p
  long long q_R = 0;     // = k (p - q) / 2

  bool qr_is_integer() const { return mode == Mode::rational; }
};

// Marked point with electro-magnetic data. position is a finite complex
// coordinate or the infinity marker on the sphere (chart w = 1/z).
struct Insertion {
  Complex position{0.0, 0.0};
  bool at_infinity = false;
  double alpha = 0.0;    // electric charge
  long long m = 0;       // magnetic charge
  double tangent = 0.0;  // unit direction, angle in radians
};

using InsertionSet = std::vector<Insertion>;

struct TruncationResult {
  enum class Variant { order, vanishing, invalid } variant = Variant::invalid;
  long long ell = 0;
  std::string reason;

  static TruncationResult order_of(long long l) {
    return {Variant::order, l, {}};
  }
  static TruncationResult vanishing() { return {Variant::vanishing, 0, {}}; }
  static TruncationResult invalid(std::string why) {
    return {Variant::invalid, 0, std::move(why)};
  }
};

// Builds rational-mode parameters from (p,q,k,mu). Throws std::invalid_argument
// when gcd(p,q) != 1, beta^2 >= 2, or Q R is not an integer (the message names
// the smallest admissible k).
ModelParams derive_params(long long p, long long q, long long k, Complex mu);

// Irrational mode: (beta, R) stored directly; requires beta*R integer and
// Q*R NOT an integer.
ModelParams irrational_params(double beta, double radius, Complex mu);

// Delta_{(alpha,m)} = (alpha/2)(alpha/2 - Q) + m^2 R^2 / 4.
double conformal_weight(double alpha, long long m, const ModelParams& params);
// Spin s = Q R m.
double spin(long long m, const ModelParams& params);

// Truncation / selection rule, exact integer arithmetic in rational mode:
// ell = (chi*QR - sum_j e_j) / (k p) with alpha_j = e_j / R.
TruncationResult seiberg_truncation(const InsertionSet& insertions,
                                    const ModelParams& params, int euler_char);

}  // namespace cilt
