#include "cilt/params.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace cilt {

ModelParams derive_params(long long p, long long q, long long k, Complex mu) {
  if (p <= 0 || q <= 0 || k <= 0)
    throw std::invalid_argument("derive_params: p, q, k must be positive");
  if (std::gcd(p, q) != 1)
    throw std::invalid_argument("derive_params: p and q must be coprime");
  if (4 * p >= 2 * q) {  // beta^2 = 4p/q < 2, strict
    std::ostringstream os;
    os << "derive_params: beta^2 = 4*" << p << "/" << q
       << " violates the strict bound beta^2 < 2";
    throw std::invalid_argument(os.str());
  }
  if (mu == Complex{0.0, 0.0})
    throw std::invalid_argument("derive_params: mu must be nonzero");
  // Q R = k (p - q) / 2 must be an integer.
  if ((k * (p - q)) % 2 != 0) {
    std::ostringstream os;
    os << "derive_params: Q*R = k(p-q)/2 = " << k << "*(" << p - q
       << ")/2 is not an integer; smallest admissible k is 2";
    throw std::invalid_argument(os.str());
  }
  ModelParams m;
  m.mode = ModelParams::Mode::rational;
  m.p = p;
  m.q = q;
  m.k = k;
  m.mu = mu;
  m.beta = 2.0 * std::sqrt((double)p / (double)q);
  m.radius = 0.5 * k * std::sqrt((double)p * (double)q);
  m.q_charge = 0.5 * m.beta - 2.0 / m.beta;
  m.beta_R = k * p;
  m.q_R = k * (p - q) / 2;
  m.central_charge = 1.0 - 6.0 * (double)((p - q) * (p - q)) / (double)(p * q);
  return m;
}

ModelParams irrational_params(double beta, double radius, Complex mu) {
  if (!(beta > 0.0) || !(beta * beta < 2.0))
    throw std::invalid_argument("irrational_params: need 0 < beta^2 < 2");
  if (radius <= 0.0)
    throw std::invalid_argument("irrational_params: R must be positive");
  const double br = beta * radius;
  if (std::abs(br - std::round(br)) > 1e-9)
    throw std::invalid_argument("irrational_params: beta*R must be an integer");
  const double Q = 0.5 * beta - 2.0 / beta;
  const double qr = Q * radius;
  if (std::abs(qr - std::round(qr)) < 1e-9)
    throw std::invalid_argument(
        "irrational_params: Q*R is an integer; use derive_params (rational mode)");
  ModelParams m;
  m.mode = ModelParams::Mode::irrational;
  m.beta = beta;
  m.radius = radius;
  m.mu = mu;
  m.q_charge = Q;
  m.beta_R = (long long)std::llround(br);
  m.central_charge = 1.0 - 6.0 * Q * Q;
  return m;
}

double conformal_weight(double alpha, long long m, const ModelParams& params) {
  return 0.5 * alpha * (0.5 * alpha - params.q_charge) +
         0.25 * (double)(m * m) * params.radius * params.radius;
}

double spin(long long m, const ModelParams& params) {
  return params.q_charge * params.radius * (double)m;
}

TruncationResult seiberg_truncation(const InsertionSet& insertions,
                                    const ModelParams& params, int euler_char) {
  if (euler_char != 2 && euler_char != 0)
    return TruncationResult::invalid("euler characteristic must be 2 or 0");

  long long msum = 0;
  for (const auto& ins : insertions) msum += ins.m;
  if (msum != 0) {
    std::ostringstream os;
    os << "magnetic neutrality sum m_j = 0 fails (sum = " << msum << ")";
    return TruncationResult::invalid(os.str());
  }
  for (const auto& ins : insertions) {
    if (!(ins.alpha > params.q_charge)) {
      std::ostringstream os;
      os << "Seiberg bound alpha > Q fails: alpha = " << ins.alpha
         << " <= Q = " << params.q_charge;
      return TruncationResult::invalid(os.str());
    }
  }

  if (params.mode == ModelParams::Mode::rational) {
    // alpha_j = e_j / R with e_j integer. ell = (chi*QR - sum e_j) / (k p).
    long long esum = 0;
    for (const auto& ins : insertions) {
      const double e = ins.alpha * params.radius;
      const double er = std::round(e);
      if (std::abs(e - er) > 1e-9) {
        std::ostringstream os;
        os << "alpha = " << ins.alpha << " is not in (1/R)Z";
        return TruncationResult::invalid(os.str());
      }
      esum += (long long)std::llround(er);
    }
    const Rational ell =
        Rational(euler_char * params.q_R - esum, params.beta_R);
    if (!ell.is_nonneg_integer()) return TruncationResult::vanishing();
    return TruncationResult::order_of(ell.num);
  }

  // Irrational mode: ell = (chi Q - sum alpha)/beta tested numerically with
  // the 1e-9 rounding window of the contract.
  double asum = 0.0;
  for (const auto& ins : insertions) asum += ins.alpha;
  const double ell = (euler_char * params.q_charge - asum) / params.beta;
  const double er = std::round(ell);
  if (std::abs(ell - er) > 1e-9 || er < -0.5) return TruncationResult::vanishing();
  return TruncationResult::order_of((long long)std::llround(er));
}

}  // namespace cilt
