#pragma once

// Number-theoretic primitives: Jacobi symbol, Miller-Rabin, modular square
// roots and the modified Cornacchia solver for 4N = t^2 + |D| v^2.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>

#include "fastecpp/bigint.hpp"

namespace fastecpp::numth {

/// Jacobi symbol (a|n) for odd n >= 1.
inline int jacobi(const Int& a, const Int& n) {
  if (n <= 0 || mpz_even_p(n.get_mpz_t()))
    throw std::invalid_argument("jacobi: modulus must be odd and positive");
  return mpz_jacobi(a.get_mpz_t(), n.get_mpz_t());
}

namespace detail {

inline std::uint64_t mulmod64(std::uint64_t a, std::uint64_t b, std::uint64_t n) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % n);
}

inline std::uint64_t powmod64(std::uint64_t b, std::uint64_t e, std::uint64_t n) {
  std::uint64_t r = 1 % n;
  b %= n;
  while (e) {
    if (e & 1) r = mulmod64(r, b, n);
    b = mulmod64(b, b, n);
    e >>= 1;
  }
  return r;
}

// One strong-probable-prime round, n odd > 2, n - 1 = d * 2^s.
inline bool sprp64(std::uint64_t n, std::uint64_t a, std::uint64_t d, unsigned s) {
  a %= n;
  if (a == 0) return true;
  std::uint64_t x = powmod64(a, d, n);
  if (x == 1 || x == n - 1) return true;
  for (unsigned r = 1; r < s; ++r) {
    x = mulmod64(x, x, n);
    if (x == n - 1) return true;
    if (x == 1) return false;
  }
  return false;
}

inline bool sprp(const Int& n, const Int& a, const Int& d, unsigned long s, const Int& nm1) {
  Int x = powm(a, d, n);
  if (x == 1 || x == nm1) return true;
  for (unsigned long r = 1; r < s; ++r) {
    x = mod(x * x, n);
    if (x == nm1) return true;
    if (x == 1) return false;
  }
  return false;
}

constexpr std::array<unsigned, 25> kSmallPrimes{2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                                                 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97};

// First twelve primes: a deterministic Miller-Rabin base set for n < 3.3e24.
constexpr std::array<unsigned, 12> kDeterministicBases{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

}  // namespace detail

/// Below this bound is_probable_prime() is exact.
inline const Int& deterministic_bound() {
  static const Int bound = pow2(64);
  return bound;
}

/// Miller-Rabin.  false means n is certainly composite.  For n < 2^64 the
/// answer is exact; above, base 2 plus rounds-1 bases derived
/// deterministically from n are used.
inline bool is_probable_prime(const Int& n, unsigned rounds = 64) {
  if (n < 2) throw std::invalid_argument("is_probable_prime: n must be >= 2");
  for (unsigned p : detail::kSmallPrimes) {
    if (n == p) return true;
    if (mpz_divisible_ui_p(n.get_mpz_t(), p)) return false;
  }
  if (n < 97 * 97) return true;

  if (fits_u64(n)) {
    const std::uint64_t v = to_u64(n);
    std::uint64_t d = v - 1;
    unsigned s = 0;
    while ((d & 1) == 0) {
      d >>= 1;
      ++s;
    }
    for (unsigned a : detail::kDeterministicBases)
      if (!detail::sprp64(v, a, d, s)) return false;
    return true;
  }

  const Int nm1 = n - 1;
  const unsigned long s = mpz_scan1(nm1.get_mpz_t(), 0);
  Int d;
  mpz_tdiv_q_2exp(d.get_mpz_t(), nm1.get_mpz_t(), s);
  if (!detail::sprp(n, Int(2), d, s, nm1)) return false;
  if (rounds <= 1) return true;
  IntRng rng(hash_int(n));
  const Int span = n - 3;
  for (unsigned r = 1; r < rounds; ++r) {
    const Int a = rng.below(span) + 2;  // a in [2, n-2]
    if (!detail::sprp(n, a, d, s, nm1)) return false;
  }
  return true;
}

/// Square root of a modulo an odd N assumed prime, canonicalised to
/// min(r, N - r).  Returns nullopt when a is a non-residue, and also when the
/// computed root fails r^2 == a (only possible for composite N).
inline std::optional<Int> sqrt_mod(const Int& a_in, const Int& n) {
  if (n < 3 || mpz_even_p(n.get_mpz_t())) throw std::invalid_argument("sqrt_mod: modulus must be odd and >= 3");
  const Int a = mod(a_in, n);
  if (a == 0) return Int(0);
  if (jacobi(a, n) != 1) return std::nullopt;

  Int r;
  const unsigned long n8 = mpz_fdiv_ui(n.get_mpz_t(), 8);
  if (n8 % 4 == 3) {
    r = powm(a, (n + 1) / 4, n);
  } else if (n8 == 5) {
    // Atkin: v = (2a)^((N-5)/8), i = 2av^2, r = av(i - 1).
    const Int two_a = mod(2 * a, n);
    const Int v = powm(two_a, (n - 5) / 8, n);
    const Int i = mod(two_a * v * v, n);
    r = mod(a * v * (i - 1), n);
  } else {
    // Tonelli-Shanks on N - 1 = q * 2^s.
    if (is_square(n)) return std::nullopt;
    const Int nm1 = n - 1;
    const unsigned long s = mpz_scan1(nm1.get_mpz_t(), 0);
    Int q;
    mpz_tdiv_q_2exp(q.get_mpz_t(), nm1.get_mpz_t(), s);
    Int z = 2;
    while (jacobi(z, n) != -1) ++z;
    Int c = powm(z, q, n);
    r = powm(a, (q + 1) / 2, n);
    Int t = powm(a, q, n);
    unsigned long m = s;
    while (t != 1) {
      unsigned long i = 0;
      Int t2 = t;
      while (t2 != 1 && i < m) {
        t2 = mod(t2 * t2, n);
        ++i;
      }
      if (i == 0 || i >= m) return std::nullopt;
      Int b = c;
      for (unsigned long k = 0; k + i + 1 < m; ++k) b = mod(b * b, n);
      r = mod(r * b, n);
      c = mod(b * b, n);
      t = mod(t * c, n);
      m = i;
    }
  }
  if (mod(r * r, n) != a) return std::nullopt;
  const Int other = n - r;
  return other < r ? other : r;
}

struct PellSolution {
  Int t;
  Int v;
  bool operator==(const PellSolution&) const = default;
};

inline bool is_discriminant(const Int& d) {
  const unsigned long r = mpz_fdiv_ui(d.get_mpz_t(), 4);
  return d < 0 && (r == 0 || r == 1);
}

/// Modified Cornacchia: finds (t, v) with t^2 + |D| v^2 = 4N from a square
/// root of D modulo N, or nullopt when this root class yields no solution.
inline std::optional<PellSolution> cornacchia(const Int& n, const Int& d, const Int& root_d) {
  if (n < 3 || mpz_even_p(n.get_mpz_t())) throw std::invalid_argument("cornacchia: N must be odd and >= 3");
  if (!is_discriminant(d)) throw std::invalid_argument("cornacchia: D must be a negative discriminant");
  const Int abs_d = -d;
  const Int four_n = 4 * n;
  if (abs_d >= four_n) throw std::invalid_argument("cornacchia: |D| must be < 4N");
  if (mod(root_d * root_d - d, n) != 0) throw std::invalid_argument("cornacchia: root is not a square root of D mod N");

  Int x0 = mod(root_d, n);
  if (mpz_odd_p(x0.get_mpz_t()) != mpz_odd_p(d.get_mpz_t())) x0 = n - x0;

  Int a = 2 * n;
  Int b = x0;
  const Int limit = isqrt(four_n);
  while (b > limit) {
    Int r = a % b;
    a = b;
    b = r;
  }
  const Int rest = four_n - b * b;
  if (!mpz_divisible_p(rest.get_mpz_t(), abs_d.get_mpz_t())) return std::nullopt;
  const Int v2 = rest / abs_d;
  if (!is_square(v2)) return std::nullopt;
  return PellSolution{b, isqrt(v2)};
}

}  // namespace fastecpp::numth
