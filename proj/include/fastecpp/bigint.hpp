#pragma once

// Thin helpers over GMP's mpz_class shared by every module, plus the
// composite-evidence value that any stage of the pipeline may produce.

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace fastecpp {

using Int = mpz_class;

inline std::size_t bit_size(const Int& n) {
  return mpz_sgn(n.get_mpz_t()) == 0 ? 0 : mpz_sizeinbase(n.get_mpz_t(), 2);
}

/// Least nonnegative residue of a modulo n (n > 0).
inline Int mod(const Int& a, const Int& n) {
  Int r;
  mpz_mod(r.get_mpz_t(), a.get_mpz_t(), n.get_mpz_t());
  return r;
}

inline Int powm(const Int& base, const Int& exp, const Int& n) {
  Int r;
  mpz_powm(r.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), n.get_mpz_t());
  return r;
}

inline Int gcd(const Int& a, const Int& b) {
  Int g;
  mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return g;
}

inline Int isqrt(const Int& n) {
  Int r;
  mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
  return r;
}

inline Int iroot(const Int& n, unsigned long k) {
  Int r;
  mpz_root(r.get_mpz_t(), n.get_mpz_t(), k);
  return r;
}

inline bool is_square(const Int& n) {
  return mpz_sgn(n.get_mpz_t()) >= 0 && mpz_perfect_square_p(n.get_mpz_t()) != 0;
}

inline Int pow_ui(const Int& base, unsigned long e) {
  Int r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
  return r;
}

inline Int pow2(unsigned long e) {
  Int r;
  mpz_ui_pow_ui(r.get_mpz_t(), 2, e);
  return r;
}

inline Int from_u64(std::uint64_t v) {
  static_assert(sizeof(unsigned long) == 8, "LP64 platform expected");
  return Int(static_cast<unsigned long>(v));
}

inline Int from_i64(std::int64_t v) {
  static_assert(sizeof(long) == 8, "LP64 platform expected");
  return Int(static_cast<long>(v));
}

inline bool fits_u64(const Int& n) { return mpz_fits_ulong_p(n.get_mpz_t()) != 0; }

inline std::uint64_t to_u64(const Int& n) { return mpz_get_ui(n.get_mpz_t()); }

inline std::string to_dec(const Int& n) { return n.get_str(10); }

/// Parses a canonical decimal integer: optional '-', no leading zeros, no
/// whitespace, "-0" rejected.
inline std::optional<Int> parse_canonical_dec(std::string_view s) {
  std::string_view digits = s;
  bool negative = false;
  if (!digits.empty() && digits.front() == '-') {
    negative = true;
    digits.remove_prefix(1);
  }
  if (digits.empty()) return std::nullopt;
  for (char ch : digits)
    if (ch < '0' || ch > '9') return std::nullopt;
  if (digits.size() > 1 && digits.front() == '0') return std::nullopt;
  if (negative && digits == "0") return std::nullopt;
  Int v;
  if (mpz_set_str(v.get_mpz_t(), std::string(s).c_str(), 10) != 0) return std::nullopt;
  return v;
}

enum class EvidenceKind { gcd_factor, impossible_arithmetic, order_check_failed };

inline const char* to_string(EvidenceKind k) {
  switch (k) {
    case EvidenceKind::gcd_factor: return "gcd-factor";
    case EvidenceKind::impossible_arithmetic: return "impossible-arithmetic";
    case EvidenceKind::order_check_failed: return "order-check-failed";
  }
  return "unknown";
}

/// Proof that N is composite, or at least that arithmetic modulo N behaved
/// in a way that is impossible for a prime.  When `factor` is present it
/// satisfies 1 < factor < N and factor | N.
struct CompositeEvidence {
  EvidenceKind kind = EvidenceKind::impossible_arithmetic;
  std::optional<Int> factor;
  std::string detail;
};

template <class T>
using OrComposite = std::variant<T, CompositeEvidence>;

/// Evidence from a gcd g = gcd(x, N) that is not 1.  Keeps g only when it is
/// a proper divisor.
inline CompositeEvidence evidence_from_gcd(const Int& g, const Int& n, std::string detail) {
  CompositeEvidence ev;
  if (g > 1 && g < n) {
    ev.kind = EvidenceKind::gcd_factor;
    ev.factor = g;
  } else {
    ev.kind = EvidenceKind::impossible_arithmetic;
  }
  ev.detail = std::move(detail);
  return ev;
}

/// Thrown inside deep arithmetic (polynomials, curves) and converted to an
/// OrComposite result at public API boundaries.
struct CompositeFound {
  CompositeEvidence evidence;
};

/// Modular inverse, or evidence when gcd(a, n) != 1.
inline OrComposite<Int> invert(const Int& a, const Int& n) {
  Int r;
  if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), n.get_mpz_t()) != 0) return r;
  return evidence_from_gcd(gcd(a, n), n, "non-invertible element");
}

/// Same as invert() but throws CompositeFound.
inline Int invert_or_throw(const Int& a, const Int& n, const char* what) {
  Int r;
  if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), n.get_mpz_t()) != 0) return r;
  throw CompositeFound{evidence_from_gcd(gcd(a, n), n, what)};
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Mixes the limbs of n into a 64-bit seed.
inline std::uint64_t hash_int(const Int& n) {
  std::uint64_t h = splitmix64(static_cast<std::uint64_t>(mpz_size(n.get_mpz_t())));
  const std::size_t limbs = mpz_size(n.get_mpz_t());
  for (std::size_t i = 0; i < limbs; ++i)
    h = splitmix64(h ^ static_cast<std::uint64_t>(mpz_getlimbn(n.get_mpz_t(), i)));
  return h;
}

/// Deterministic generator of big integers below a bound, seeded once.
class IntRng {
 public:
  explicit IntRng(std::uint64_t seed) : state_(gmp_randinit_mt) {
    state_.seed(static_cast<unsigned long>(seed));
  }
  Int below(const Int& bound) { return state_.get_z_range(bound); }
  Int bits(unsigned long nbits) { return state_.get_z_bits(nbits); }

 private:
  gmp_randclass state_;
};

}  // namespace fastecpp
