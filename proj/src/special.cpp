#include "cilt/special.hpp"

#include <cmath>

namespace cilt {

int gamma_sign(double x) {
  if (x > 0) return 1;
  // Gamma alternates sign between consecutive negative integers:
  // positive on (-2,-1), negative on (-1,0), etc.
  double f = std::floor(x);
  long long k = (long long)f;  // x in (k, k+1), k <= -1
  return (((-k) % 2) == 0) ? 1 : -1;
}

LValue l_func(double x) {
  const double tol = 1e-8;
  const double r = std::round(x);
  if (std::abs(x - r) < tol) {
    if (r <= 0.0) {
      LValue v;
      v.kind = LValue::Kind::pole;
      // Approaching the pole from above, Gamma(x)/Gamma(1-x) has the sign of
      // gamma_sign just right of r divided by Gamma(1-r) > 0 sign.
      v.sign = gamma_sign(r + 0.5 * tol) * gamma_sign(1.0 - r);
      return v;
    }
    if (r >= 1.0) {  // positive integers are zeros of l
      LValue v;
      v.kind = LValue::Kind::zero;
      v.sign = gamma_sign(r) * gamma_sign(1.0 - r - 0.5 * tol);
      v.value = v.sign >= 0 ? 0.0 : -0.0;
      return v;
    }
  }
  LValue v;
  v.kind = LValue::Kind::finite;
  const double la = std::lgamma(x);        // log|Gamma(x)|
  const double lb = std::lgamma(1.0 - x);  // log|Gamma(1-x)|
  const int s = gamma_sign(x) * gamma_sign(1.0 - x);
  v.value = s * std::exp(la - lb);
  v.sign = s;
  return v;
}

void LProduct::mul(const LValue& v) {
  switch (v.kind) {
    case LValue::Kind::finite:
      log_abs += std::log(std::abs(v.value));
      if (v.value < 0) sign = -sign;
      break;
    case LValue::Kind::zero:
      ++n_zero;
      if (v.sign < 0) sign = -sign;
      break;
    case LValue::Kind::pole:
      ++n_pole;
      if (v.sign < 0) sign = -sign;
      break;
  }
}

void LProduct::div(const LValue& v) {
  switch (v.kind) {
    case LValue::Kind::finite:
      log_abs -= std::log(std::abs(v.value));
      if (v.value < 0) sign = -sign;
      break;
    case LValue::Kind::zero:
      ++n_pole;  // dividing by a zero makes a pole
      if (v.sign < 0) sign = -sign;
      break;
    case LValue::Kind::pole:
      ++n_zero;
      if (v.sign < 0) sign = -sign;
      break;
  }
}

}  // namespace cilt
