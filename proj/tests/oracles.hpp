#pragma once

// Independent reference implementations for the test suite.  Each one is
// slow and obvious on purpose and shares no code path with the library
// beyond GMP/MPFR primitives.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "fastecpp/bigint.hpp"
#include "fastecpp/mpreal.hpp"

namespace oracle {

using fastecpp::Int;

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

inline std::vector<std::pair<std::uint64_t, unsigned>> factor(std::uint64_t n) {
  std::vector<std::pair<std::uint64_t, unsigned>> out;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    unsigned e = 0;
    while (n % d == 0) {
      n /= d;
      ++e;
    }
    if (e) out.emplace_back(d, e);
  }
  if (n > 1) out.emplace_back(n, 1);
  return out;
}

inline std::uint64_t powmod(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
  unsigned __int128 r = 1 % m, x = b % m;
  while (e) {
    if (e & 1) r = r * x % m;
    x = x * x % m;
    e >>= 1;
  }
  return static_cast<std::uint64_t>(r);
}

/// Legendre symbol by Euler's criterion, p an odd prime.
inline int legendre(std::int64_t a, std::uint64_t p) {
  const auto ap = static_cast<std::uint64_t>(((a % static_cast<std::int64_t>(p)) + static_cast<std::int64_t>(p)) %
                                             static_cast<std::int64_t>(p));
  if (ap == 0) return 0;
  return powmod(ap, (p - 1) / 2, p) == 1 ? 1 : -1;
}

/// Jacobi symbol from the factorization of odd n.
inline int jacobi(std::int64_t a, std::uint64_t n) {
  int r = 1;
  for (auto [p, e] : factor(n))
    for (unsigned i = 0; i < e; ++i) r *= legendre(a, p);
  return r;
}

/// All (t, v), t, v >= 0, with t^2 + |D| v^2 = 4N.
inline std::set<std::pair<std::uint64_t, std::uint64_t>> pell_solutions(std::uint64_t n, std::uint64_t abs_d) {
  std::set<std::pair<std::uint64_t, std::uint64_t>> out;
  for (std::uint64_t t = 0; t * t <= 4 * n; ++t) {
    const std::uint64_t rest = 4 * n - t * t;
    if (rest % abs_d) continue;
    const std::uint64_t v2 = rest / abs_d;
    const auto v = static_cast<std::uint64_t>(std::llround(std::sqrt(static_cast<double>(v2))));
    for (std::uint64_t w = v > 0 ? v - 1 : 0; w <= v + 1; ++w)
      if (w * w == v2) out.insert({t, w});
  }
  return out;
}

struct Form {
  std::int64_t a, b, c;
};

inline std::int64_t gcd3(std::int64_t a, std::int64_t b, std::int64_t c) {
  auto g = [](std::int64_t x, std::int64_t y) {
    x = x < 0 ? -x : x;
    y = y < 0 ? -y : y;
    while (y) {
      const std::int64_t t = x % y;
      x = y;
      y = t;
    }
    return x;
  };
  return g(g(a, b), c);
}

/// Reduced primitive forms by scanning every (a, b) with a <= sqrt(|D|/3).
inline std::vector<Form> reduced_forms(std::int64_t d) {
  std::vector<Form> out;
  const std::int64_t n = -d;
  for (std::int64_t a = 1; a * a * 3 <= n; ++a)
    for (std::int64_t b = -a; b <= a; ++b) {
      const std::int64_t num = b * b - d;
      if (num % (4 * a)) continue;
      const std::int64_t c = num / (4 * a);
      if (c < a) continue;
      if ((b < 0) && (-b == a || a == c)) continue;
      if (gcd3(a, b, c) != 1) continue;
      out.push_back({a, b, c});
    }
  return out;
}

inline std::vector<std::uint64_t> primes_upto(std::uint64_t bound) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t p = 2; p <= bound; ++p)
    if (is_prime(p)) out.push_back(p);
  return out;
}

/// Smooth part of m over the given primes by repeated division.
inline std::pair<Int, Int> smooth_part(Int m, const std::vector<std::uint64_t>& primes) {
  Int c = 1;
  for (std::uint64_t p : primes) {
    while (mpz_divisible_ui_p(m.get_mpz_t(), p)) {
      mpz_divexact_ui(m.get_mpz_t(), m.get_mpz_t(), p);
      c *= static_cast<unsigned long>(p);
    }
  }
  return {c, m};
}

inline std::pair<Int, Int> smooth_part(Int m, std::uint64_t bound) { return smooth_part(std::move(m), primes_upto(bound)); }

/// Affine group law on y^2 = x^3 + ax + b over F_p, p < 2^31.
struct SmallCurve {
  std::int64_t p, a, b;

  struct Pt {
    std::int64_t x = 0, y = 0;
    bool inf = true;
    bool operator==(const Pt&) const = default;
  };

  std::int64_t md(std::int64_t v) const { return ((v % p) + p) % p; }
  std::int64_t inv(std::int64_t v) const { return static_cast<std::int64_t>(powmod(static_cast<std::uint64_t>(md(v)), static_cast<std::uint64_t>(p - 2), static_cast<std::uint64_t>(p))); }

  Pt add(const Pt& u, const Pt& v) const {
    if (u.inf) return v;
    if (v.inf) return u;
    std::int64_t lam;
    if (u.x == v.x) {
      if (md(u.y + v.y) == 0) return Pt{};
      lam = md(md(3 * md(u.x * u.x) + a) * inv(2 * u.y));
    } else {
      lam = md(md(v.y - u.y) * inv(v.x - u.x));
    }
    const std::int64_t x3 = md(lam * lam - u.x - v.x);
    const std::int64_t y3 = md(lam * md(u.x - x3) - u.y);
    return Pt{x3, y3, false};
  }

  std::vector<Pt> points() const {
    std::vector<Pt> out{Pt{}};
    for (std::int64_t x = 0; x < p; ++x)
      for (std::int64_t y = 0; y < p; ++y)
        if (md(y * y) == md(md(md(x * x) * x) + md(a * x) + b)) out.push_back(Pt{x, y, false});
    return out;
  }

  std::uint64_t order(const Pt& q) const {
    Pt r = q;
    std::uint64_t k = 1;
    while (!r.inf) {
      r = add(r, q);
      ++k;
    }
    return k;
  }
};

/// j(tau) = E4^3 / Delta with E4 = 1 + 240 sum sigma_3(n) q^n and
/// Delta = q prod (1 - q^n)^24, q = exp(2 pi i tau), tau = (-b + sqrt D)/2a.
inline fastecpp::mp::Complex j_e4_delta(std::int64_t a, std::int64_t b, std::int64_t d, long prec, int terms) {
  using namespace fastecpp::mp;
  Real pi(prec), r(prec), th(prec);
  mpfr_const_pi(pi.get(), MPFR_RNDN);
  mpfr_set_si(r.get(), -d, MPFR_RNDN);
  mpfr_sqrt(r.get(), r.get(), MPFR_RNDN);
  mpfr_mul(r.get(), r.get(), pi.get(), MPFR_RNDN);
  mpfr_div_si(r.get(), r.get(), -a, MPFR_RNDN);
  mpfr_exp(r.get(), r.get(), MPFR_RNDN);
  mpfr_mul_si(th.get(), pi.get(), -b, MPFR_RNDN);
  mpfr_div_si(th.get(), th.get(), a, MPFR_RNDN);
  Complex q(prec);
  mpfr_cos(q.re.get(), th.get(), MPFR_RNDN);
  mpfr_sin(q.im.get(), th.get(), MPFR_RNDN);
  mpfr_mul(q.re.get(), q.re.get(), r.get(), MPFR_RNDN);
  mpfr_mul(q.im.get(), q.im.get(), r.get(), MPFR_RNDN);

  Complex e4(prec, 1), prod(prec, 1), qn(prec, 1), t(prec), one(prec, 1);
  for (int n = 1; n <= terms; ++n) {
    mul(qn, qn, q);
    long sigma = 0;
    for (long k = 1; k <= n; ++k)
      if (n % k == 0) sigma += k * k * k;
    mul_si(t, qn, 240 * sigma);
    add(e4, e4, t);
    sub(t, one, qn);
    mul(prod, prod, t);
  }
  Complex delta(prec);
  pow_ui(delta, prod, 24);
  mul(delta, delta, q);
  Complex num(prec);
  pow_ui(num, e4, 3);
  Complex j(prec);
  div(j, num, delta);
  return j;
}

}  // namespace oracle
