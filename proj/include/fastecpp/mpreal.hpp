#pragma once

// Minimal RAII layer over MPFR with a complex type on top.  Every value
// carries its own precision; operations round to the destination's.

#include <mpfr.h>

#include <cmath>
#include <utility>

#include "fastecpp/bigint.hpp"

namespace fastecpp::mp {

class Real {
 public:
  explicit Real(mpfr_prec_t prec) {
    mpfr_init2(v_, prec);
    mpfr_set_zero(v_, 1);
  }
  Real(mpfr_prec_t prec, long x) : Real(prec) { mpfr_set_si(v_, x, MPFR_RNDN); }
  Real(const Real& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  Real(Real&& o) noexcept {
    mpfr_init2(v_, MPFR_PREC_MIN);
    mpfr_swap(v_, o.v_);
  }
  Real& operator=(const Real& o) {
    if (this != &o) mpfr_set(v_, o.v_, MPFR_RNDN);
    return *this;
  }
  Real& operator=(Real&& o) noexcept {
    mpfr_swap(v_, o.v_);
    return *this;
  }
  ~Real() { mpfr_clear(v_); }

  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }
  mpfr_prec_t prec() const { return mpfr_get_prec(v_); }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

 private:
  mpfr_t v_;
};

struct Complex {
  Real re;
  Real im;

  explicit Complex(mpfr_prec_t prec) : re(prec), im(prec) {}
  Complex(mpfr_prec_t prec, long r) : re(prec, r), im(prec) {}
  mpfr_prec_t prec() const { return re.prec(); }
};

inline void add(Complex& z, const Complex& x, const Complex& y) {
  mpfr_add(z.re.get(), x.re.get(), y.re.get(), MPFR_RNDN);
  mpfr_add(z.im.get(), x.im.get(), y.im.get(), MPFR_RNDN);
}

inline void sub(Complex& z, const Complex& x, const Complex& y) {
  mpfr_sub(z.re.get(), x.re.get(), y.re.get(), MPFR_RNDN);
  mpfr_sub(z.im.get(), x.im.get(), y.im.get(), MPFR_RNDN);
}

/// z = x * y; z may alias x or y.
inline void mul(Complex& z, const Complex& x, const Complex& y) {
  const mpfr_prec_t p = z.prec();
  Real ac(p), bd(p), ad(p), bc(p);
  mpfr_mul(ac.get(), x.re.get(), y.re.get(), MPFR_RNDN);
  mpfr_mul(bd.get(), x.im.get(), y.im.get(), MPFR_RNDN);
  mpfr_mul(ad.get(), x.re.get(), y.im.get(), MPFR_RNDN);
  mpfr_mul(bc.get(), x.im.get(), y.re.get(), MPFR_RNDN);
  mpfr_sub(z.re.get(), ac.get(), bd.get(), MPFR_RNDN);
  mpfr_add(z.im.get(), ad.get(), bc.get(), MPFR_RNDN);
}

inline void mul_si(Complex& z, const Complex& x, long k) {
  mpfr_mul_si(z.re.get(), x.re.get(), k, MPFR_RNDN);
  mpfr_mul_si(z.im.get(), x.im.get(), k, MPFR_RNDN);
}

/// z = x / y; z may alias x or y.
inline void div(Complex& z, const Complex& x, const Complex& y) {
  const mpfr_prec_t p = z.prec();
  Real den(p), t(p), re(p), im(p);
  mpfr_sqr(den.get(), y.re.get(), MPFR_RNDN);
  mpfr_sqr(t.get(), y.im.get(), MPFR_RNDN);
  mpfr_add(den.get(), den.get(), t.get(), MPFR_RNDN);
  // (a + bi)(c - di) / (c^2 + d^2)
  mpfr_mul(re.get(), x.re.get(), y.re.get(), MPFR_RNDN);
  mpfr_mul(t.get(), x.im.get(), y.im.get(), MPFR_RNDN);
  mpfr_add(re.get(), re.get(), t.get(), MPFR_RNDN);
  mpfr_mul(im.get(), x.im.get(), y.re.get(), MPFR_RNDN);
  mpfr_mul(t.get(), x.re.get(), y.im.get(), MPFR_RNDN);
  mpfr_sub(im.get(), im.get(), t.get(), MPFR_RNDN);
  mpfr_div(z.re.get(), re.get(), den.get(), MPFR_RNDN);
  mpfr_div(z.im.get(), im.get(), den.get(), MPFR_RNDN);
}

/// z = x^k for k >= 0 by repeated squaring.
inline void pow_ui(Complex& z, const Complex& x, unsigned long k) {
  Complex base = x;
  Complex acc(z.prec(), 1);
  while (k) {
    if (k & 1) mul(acc, acc, base);
    k >>= 1;
    if (k) mul(base, base, base);
  }
  z = std::move(acc);
}

/// Nearest integer to x and |x - round(x)| as a double.
inline std::pair<Int, double> round_to_int(const Real& x) {
  Int n;
  mpfr_get_z(n.get_mpz_t(), x.get(), MPFR_RNDN);
  Real diff(x.prec());
  mpfr_sub_z(diff.get(), x.get(), n.get_mpz_t(), MPFR_RNDN);
  return {n, std::abs(diff.to_double())};
}

}  // namespace fastecpp::mp
