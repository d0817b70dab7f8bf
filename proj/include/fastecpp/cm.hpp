#pragma once

// Complex multiplication, first half: the Hilbert class polynomial H_D by
// complex approximation of j at the CM points of the reduced forms, and a
// root of H_D modulo N by equal-degree splitting.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "fastecpp/bigint.hpp"
#include "fastecpp/binio.hpp"
#include "fastecpp/mpreal.hpp"
#include "fastecpp/parallel.hpp"
#include "fastecpp/poly.hpp"

namespace fastecpp::cm {

struct ReducedForm {
  std::int64_t a, b, c;
  bool operator==(const ReducedForm&) const = default;
};

/// Reduced primitive forms of discriminant D < 0: b^2 - 4ac = D,
/// |b| <= a <= c, b >= 0 when |b| = a or a = c.
inline std::vector<ReducedForm> reduced_forms(std::int64_t d) {
  if (d >= 0 || ((-d) % 4 != 0 && (-d) % 4 != 3)) throw std::invalid_argument("reduced_forms: D must be a negative discriminant");
  std::vector<ReducedForm> out;
  const std::int64_t abs_d = -d;
  for (std::int64_t a = 1; 3 * a * a <= abs_d; ++a) {
    for (std::int64_t b = -a + 1; b <= a; ++b) {
      if ((b & 1) != (abs_d & 1)) continue;
      const std::int64_t num = b * b + abs_d;
      if (num % (4 * a) != 0) continue;
      const std::int64_t c = num / (4 * a);
      if (c < a) continue;
      if (b < 0 && c == a) continue;
      if (std::gcd(std::gcd(a, b < 0 ? -b : b), c) != 1) continue;
      out.push_back({a, b, c});
    }
  }
  return out;
}

/// Monic integer polynomial, coefficients ascending.
struct ClassPolynomial {
  std::int64_t d = 0;
  std::vector<Int> coeffs;

  std::size_t degree() const { return coeffs.empty() ? 0 : coeffs.size() - 1; }
  bool operator==(const ClassPolynomial&) const = default;
};

struct BuildInfo {
  long first_precision = 0;
  long final_precision = 0;
  double first_residual = 0;  // max distance to the nearest integer, first attempt
  double final_residual = 0;
  unsigned attempts = 0;
};

/// Working precision in bits: pi sqrt|D| sum(1/a) / ln 2 + 10h + 64.
inline long initial_precision(std::int64_t d, const std::vector<ReducedForm>& forms) {
  double inv_a = 0;
  for (const auto& f : forms) inv_a += 1.0 / static_cast<double>(f.a);
  const double size_bits = std::numbers::pi * std::sqrt(static_cast<double>(-d)) * inv_a / std::numbers::ln2;
  return static_cast<long>(std::ceil(size_bits)) + 10 * static_cast<long>(forms.size()) + 64;
}

namespace detail {

// prod_{n>=1} (1 - q^n) by the pentagonal number series
//   1 + sum_{k>=1} (-1)^k (q^{k(3k-1)/2} + q^{k(3k+1)/2}),
// summing while the exponent stays below `max_exp`.
inline mp::Complex euler_product(const mp::Complex& q, double max_exp) {
  const mpfr_prec_t p = q.prec();
  mp::Complex sum(p, 1);
  mp::Complex q_k(p, 1);      // q^k
  mp::Complex q_e1(p, 1);     // q^{k(3k-1)/2}
  mp::Complex step(p);        // q^{3k-2} = q^{e1(k) - e1(k-1)}
  mp::pow_ui(step, q, 1);
  mp::Complex q3(p);
  mp::pow_ui(q3, q, 3);
  mp::Complex term(p);
  for (std::uint64_t k = 1;; ++k) {
    mp::mul(q_e1, q_e1, step);  // now q^{k(3k-1)/2}
    mp::mul(step, step, q3);
    mp::mul(q_k, q_k, q);
    const double e1 = static_cast<double>(k) * (3.0 * static_cast<double>(k) - 1) / 2;
    if (e1 > max_exp) break;
    mp::mul(term, q_e1, q_k);  // q^{k(3k+1)/2}
    mp::add(term, term, q_e1);
    if (k % 2)
      mp::sub(sum, sum, term);
    else
      mp::add(sum, sum, term);
  }
  return sum;
}

}  // namespace detail

/// j((-b + sqrt D) / 2a) at `prec` bits, from f = q prod (1 + q^n)^24 and
/// j = (256 f + 1)^3 / f.
inline mp::Complex j_invariant(const ReducedForm& form, std::int64_t d, long prec) {
  const mpfr_prec_t p = prec + 32;
  mp::Real pi(p), t(p), radius(p), angle(p);
  mpfr_const_pi(pi.get(), MPFR_RNDN);
  // |q| = exp(-pi sqrt|D| / a), arg q = -pi b / a.
  mpfr_set_si(t.get(), -d, MPFR_RNDN);
  mpfr_sqrt(t.get(), t.get(), MPFR_RNDN);
  mpfr_mul(t.get(), t.get(), pi.get(), MPFR_RNDN);
  mpfr_div_si(t.get(), t.get(), form.a, MPFR_RNDN);
  mpfr_neg(t.get(), t.get(), MPFR_RNDN);
  mpfr_exp(radius.get(), t.get(), MPFR_RNDN);
  mpfr_mul_si(angle.get(), pi.get(), -form.b, MPFR_RNDN);
  mpfr_div_si(angle.get(), angle.get(), form.a, MPFR_RNDN);
  mp::Complex q(p);
  mpfr_sin_cos(q.im.get(), q.re.get(), angle.get(), MPFR_RNDN);
  mpfr_mul(q.re.get(), q.re.get(), radius.get(), MPFR_RNDN);
  mpfr_mul(q.im.get(), q.im.get(), radius.get(), MPFR_RNDN);

  // Tail below 2^-(prec+8) relative to the leading 1.
  const double log2_inv_q = std::numbers::pi * std::sqrt(static_cast<double>(-d)) / static_cast<double>(form.a) / std::numbers::ln2;
  const double max_exp = (static_cast<double>(prec) + 8) / log2_inv_q + 1;

  mp::Complex q2(p);
  mp::mul(q2, q, q);
  const mp::Complex e1 = detail::euler_product(q, max_exp);
  const mp::Complex e2 = detail::euler_product(q2, max_exp / 2 + 1);
  mp::Complex ratio(p);
  mp::div(ratio, e2, e1);
  mp::Complex f(p);
  mp::pow_ui(f, ratio, 24);
  mp::mul(f, f, q);
  mp::Complex num(p);
  mp::mul_si(num, f, 256);
  mpfr_add_ui(num.re.get(), num.re.get(), 1, MPFR_RNDN);
  mp::pow_ui(num, num, 3);
  mp::Complex j(p);
  mp::div(j, num, f);
  return j;
}

namespace detail {

using CPoly = std::vector<mp::Complex>;

inline CPoly cmul(const CPoly& x, const CPoly& y, mpfr_prec_t p) {
  CPoly r(x.size() + y.size() - 1, mp::Complex(p));
  mp::Complex t(p);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t k = 0; k < y.size(); ++k) {
      mp::mul(t, x[i], y[k]);
      mp::add(r[i + k], r[i + k], t);
    }
  return r;
}

inline CPoly product_tree(std::vector<CPoly> level, mpfr_prec_t p) {
  while (level.size() > 1) {
    std::vector<CPoly> next;
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) next.push_back(cmul(level[i], level[i + 1], p));
    if (level.size() % 2) next.push_back(std::move(level.back()));
    level = std::move(next);
  }
  return std::move(level.front());
}

}  // namespace detail

/// H_D = prod over reduced forms (x - j(tau)), rounded to integers.  A
/// coefficient further than 1/4 from an integer (real or imaginary part)
/// triggers a retry at doubled precision.
inline ClassPolynomial hilbert_class_poly(std::int64_t d, std::uint32_t hmax, WorkerPool* pool = nullptr,
                                          BuildInfo* info = nullptr) {
  const auto forms = reduced_forms(d);
  if (forms.size() > hmax) throw std::invalid_argument("hilbert_class_poly: class number " + std::to_string(forms.size()) + " exceeds hmax");
  BuildInfo local;
  long prec = initial_precision(d, forms);
  local.first_precision = prec;
  constexpr unsigned kMaxAttempts = 6;
  for (unsigned attempt = 1; attempt <= kMaxAttempts; ++attempt, prec *= 2) {
    const mpfr_prec_t p = prec;
    auto eval = [&](std::size_t i) {
      detail::CPoly lin(2, mp::Complex(p));
      const mp::Complex j = j_invariant(forms[i], d, prec);
      mpfr_neg(lin[0].re.get(), j.re.get(), MPFR_RNDN);
      mpfr_neg(lin[0].im.get(), j.im.get(), MPFR_RNDN);
      mpfr_set_ui(lin[1].re.get(), 1, MPFR_RNDN);
      return lin;
    };
    std::vector<detail::CPoly> factors;
    if (pool) {
      factors = pool->map(forms.size(), eval);
    } else {
      for (std::size_t i = 0; i < forms.size(); ++i) factors.push_back(eval(i));
    }
    const detail::CPoly prod = detail::product_tree(std::move(factors), p);
    ClassPolynomial out;
    out.d = d;
    double residual = 0;
    for (const auto& c : prod) {
      auto [n, dist] = mp::round_to_int(c.re);
      residual = std::max({residual, dist, std::abs(c.im.to_double())});
      out.coeffs.push_back(std::move(n));
    }
    if (attempt == 1) local.first_residual = residual;
    local.final_residual = residual;
    local.final_precision = prec;
    local.attempts = attempt;
    if (residual < 0.25 && out.coeffs.back() == 1) {
      if (info) *info = local;
      return out;
    }
  }
  throw std::logic_error("hilbert_class_poly: precision escalation exceeded for D = " + std::to_string(d));
}

/// A root of H_D modulo N.  Composite evidence when the arithmetic is
/// impossible for prime N: a non-invertible leading coefficient during a
/// gcd, no root at all, or splitting that fails 64 times in a row.
inline OrComposite<Int> root_mod(const ClassPolynomial& hpoly, const Int& n, std::uint64_t seed) {
  try {
    const poly::Poly f = poly::reduce(hpoly.coeffs, n);
    if (poly::degree(f) < 1) return CompositeEvidence{EvidenceKind::impossible_arithmetic, std::nullopt, "class polynomial vanishes mod N"};
    if (poly::degree(f) == 1) return mod(-f[0], n);
    const poly::Poly xn = poly::powmod_linear(Int(0), n, f, n);
    poly::Poly g = poly::gcd(poly::sub(xn, poly::Poly{0, 1}, n), f, n);
    if (poly::degree(g) < 1) return CompositeEvidence{EvidenceKind::impossible_arithmetic, std::nullopt, "class polynomial has no root mod N"};
    IntRng rng(seed);
    const Int half = (n - 1) / 2;
    while (poly::degree(g) > 1) {
      bool split = false;
      for (unsigned attempt = 0; attempt < 64 && !split; ++attempt) {
        const Int delta = rng.below(n);
        const poly::Poly w = poly::powmod_linear(delta, half, g, n);
        const poly::Poly h = poly::gcd(poly::sub(w, poly::Poly{1}, n), g, n);
        if (poly::degree(h) >= 1 && poly::degree(h) < poly::degree(g)) {
          if (2 * poly::degree(h) <= poly::degree(g))
            g = h;
          else
            g = poly::make_monic(poly::divmod(g, h, n).first, n);
          split = true;
        }
      }
      if (!split) return CompositeEvidence{EvidenceKind::impossible_arithmetic, std::nullopt, "equal-degree splitting failed"};
    }
    return mod(-g[0], n);
  } catch (const CompositeFound& e) {
    return e.evidence;
  }
}

// Class-polynomial cache file:
//   "FECPPHCP" | u32 version=1 | varint |D| | varint degree |
//   (degree + 1) x (u8 sign, magnitude), coefficients ascending
inline constexpr std::string_view kClassPolyMagic = "FECPPHCP";
inline constexpr std::uint32_t kClassPolyVersion = 1;

inline void save_class_poly(const ClassPolynomial& h, const std::filesystem::path& path) {
  binio::Writer w;
  w.header(kClassPolyMagic, kClassPolyVersion);
  w.varint(static_cast<std::uint64_t>(-h.d));
  w.varint(h.degree());
  for (const auto& c : h.coeffs) {
    w.u8(c < 0 ? 1 : 0);
    w.magnitude(abs(c));
  }
  w.save(path);
}

inline ClassPolynomial load_class_poly(const std::filesystem::path& path) {
  auto r = binio::Reader::load(path);
  r.expect_header(kClassPolyMagic, kClassPolyVersion);
  ClassPolynomial h;
  h.d = -static_cast<std::int64_t>(r.varint());
  const std::uint64_t deg = r.varint();
  if (deg > (1u << 20)) throw binio::FormatError("implausible degree");
  for (std::uint64_t i = 0; i <= deg; ++i) {
    const bool negative = r.u8() != 0;
    Int c = r.magnitude();
    h.coeffs.push_back(negative ? Int(-c) : c);
  }
  if (!r.at_end() || h.coeffs.back() != 1) throw binio::FormatError("bad class polynomial record");
  return h;
}

}  // namespace fastecpp::cm
