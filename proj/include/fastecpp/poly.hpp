#pragma once

// Dense univariate polynomials over Z/NZ.  Coefficients ascending, kept in
// [0, N) and trimmed; the zero polynomial is the empty vector.  A leading
// coefficient that is not invertible modulo N throws CompositeFound.

#include <algorithm>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fastecpp/bigint.hpp"

namespace fastecpp::poly {

using Poly = std::vector<Int>;

inline int degree(const Poly& f) { return static_cast<int>(f.size()) - 1; }

inline void trim(Poly& f) {
  while (!f.empty() && f.back() == 0) f.pop_back();
}

inline Poly reduce(Poly f, const Int& n) {
  for (auto& c : f) c = mod(c, n);
  trim(f);
  return f;
}

inline Poly sub(const Poly& a, const Poly& b, const Int& n) {
  Poly r(std::max(a.size(), b.size()));
  for (std::size_t i = 0; i < r.size(); ++i) {
    Int x = i < a.size() ? a[i] : Int(0);
    if (i < b.size()) x -= b[i];
    r[i] = mod(x, n);
  }
  trim(r);
  return r;
}

namespace detail {

// sum f[i] 2^(slot (i - lo)) for i in [lo, hi), split recursively.
inline Int pack(const Poly& f, std::size_t lo, std::size_t hi, std::size_t slot) {
  if (hi - lo == 1) return f[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  Int high = pack(f, mid, hi, slot);
  mpz_mul_2exp(high.get_mpz_t(), high.get_mpz_t(), slot * (mid - lo));
  return high + pack(f, lo, mid, slot);
}

inline void unpack(const Int& v, std::size_t lo, std::size_t hi, std::size_t slot, const Int& n, Poly& out) {
  if (hi - lo == 1) {
    out[lo] = mod(v, n);
    return;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  Int low, high;
  mpz_fdiv_r_2exp(low.get_mpz_t(), v.get_mpz_t(), slot * (mid - lo));
  mpz_fdiv_q_2exp(high.get_mpz_t(), v.get_mpz_t(), slot * (mid - lo));
  unpack(low, lo, mid, slot, n, out);
  unpack(high, mid, hi, slot, n, out);
}

}  // namespace detail

/// Product by Kronecker substitution: pack, one big multiplication, unpack.
inline Poly mul(const Poly& a, const Poly& b, const Int& n) {
  if (a.empty() || b.empty()) return {};
  const std::size_t terms = std::min(a.size(), b.size());
  std::size_t slot = 2 * bit_size(n) + 1;
  while ((std::size_t{1} << (slot - 2 * bit_size(n))) < terms + 1) ++slot;
  Int prod = detail::pack(a, 0, a.size(), slot);
  if (&a == &b)
    prod *= prod;
  else
    prod *= detail::pack(b, 0, b.size(), slot);
  Poly r(a.size() + b.size() - 1);
  detail::unpack(prod, 0, r.size(), slot, n, r);
  trim(r);
  return r;
}

inline Poly make_monic(Poly f, const Int& n) {
  if (f.empty() || f.back() == 1) return f;
  const Int inv = invert_or_throw(f.back(), n, "non-invertible leading coefficient");
  for (auto& c : f) c = mod(c * inv, n);
  return f;
}

/// Quotient and remainder of a by a nonzero f.
inline std::pair<Poly, Poly> divmod(Poly a, const Poly& f_in, const Int& n) {
  if (f_in.empty()) throw std::invalid_argument("poly::divmod by zero polynomial");
  const Poly f = make_monic(f_in, n);
  const Int lc_inv = f_in.back() == 1 ? Int(1) : invert_or_throw(f_in.back(), n, "non-invertible leading coefficient");
  const int df = degree(f);
  if (degree(a) < df) return {Poly{}, a};
  Poly q(static_cast<std::size_t>(degree(a) - df + 1));
  for (int i = degree(a); i >= df; --i) {
    const Int c = mod(a[static_cast<std::size_t>(i)], n);
    q[static_cast<std::size_t>(i - df)] = c;
    if (c == 0) continue;
    for (int j = 0; j < df; ++j) {
      auto& slot = a[static_cast<std::size_t>(i - df + j)];
      mpz_submul(slot.get_mpz_t(), c.get_mpz_t(), f[static_cast<std::size_t>(j)].get_mpz_t());
    }
    a[static_cast<std::size_t>(i)] = 0;
  }
  a.resize(static_cast<std::size_t>(df));
  // q was computed against the monic f; rescale to divide by f_in.
  for (auto& c : q) c = mod(c * lc_inv, n);
  trim(q);
  return {q, reduce(std::move(a), n)};
}

inline Poly rem(const Poly& a, const Poly& f, const Int& n) { return divmod(a, f, n).second; }

/// Monic gcd.
inline Poly gcd(Poly a, Poly b, const Int& n) {
  while (!b.empty()) {
    Poly r = rem(a, b, n);
    a = std::move(b);
    b = std::move(r);
  }
  return make_monic(std::move(a), n);
}

/// (x + delta)^e mod f for monic f of degree >= 1.
inline Poly powmod_linear(const Int& delta, const Int& e, const Poly& f, const Int& n) {
  Poly result{1};
  const std::size_t bits = bit_size(e);
  for (std::size_t i = bits; i-- > 0;) {
    result = rem(mul(result, result, n), f, n);
    if (mpz_tstbit(e.get_mpz_t(), i)) {
      // multiply by (x + delta): shift plus scalar multiple
      Poly shifted(result.size() + 1);
      for (std::size_t k = 0; k < result.size(); ++k) {
        shifted[k + 1] += result[k];
        shifted[k] += result[k] * delta;
      }
      result = rem(reduce(std::move(shifted), n), f, n);
    }
  }
  return rem(result, f, n);
}

inline Int eval(const Poly& f, const Int& x, const Int& n) {
  Int acc = 0;
  for (std::size_t i = f.size(); i-- > 0;) acc = mod(acc * x + f[i], n);
  return acc;
}

}  // namespace fastecpp::poly
