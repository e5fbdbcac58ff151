#pragma once

#include <complex>
#include <cstdint>
#include <string>

namespace cilt {

// l(x) = Gamma(x) / Gamma(1-x), the building block of the imaginary DOZZ
// formula. Evaluated through log-gamma of |x| with explicit sign bookkeeping,
// so long products of l-factors stay finite. Poles (x = 0,-1,-2,...) and
// zeros (x = 1,2,3,...) within 1e-8 are tagged instead of returning inf/0
// silently.
struct LValue {
  enum class Kind { finite, zero, pole } kind = Kind::finite;
  double value = 0.0;  // finite value; for zero: signed 0; for pole: unset
  int sign = 1;        // sign of the residue-side limit for tagged cases

  bool is_finite() const { return kind == Kind::finite; }
};

LValue l_func(double x);

// Product helper: multiplies l-values, propagating pole/zero tags.
// pole*zero is treated as a pole (caller decides; DOZZ never needs it).
struct LProduct {
  int n_zero = 0;
  int n_pole = 0;
  double log_abs = 0.0;
  int sign = 1;

  void mul(const LValue& v);
  void div(const LValue& v);
  bool is_finite() const { return n_zero == 0 && n_pole == 0; }
  bool is_zero() const { return n_zero > n_pole; }
  bool is_pole() const { return n_pole > n_zero; }
  double value() const { return sign * std::exp(log_abs); }
};

// Sign of Gamma(x) for non-pole real x.
int gamma_sign(double x);

}  // namespace cilt
