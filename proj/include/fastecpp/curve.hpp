#pragma once

// Short Weierstrass curves y^2 = x^3 + ax + b over Z/NZ for N that is only
// believed prime.  Arithmetic runs in Jacobian coordinates without
// inversions.  Special cases are decided modulo N exactly; whenever such a
// decision could differ modulo a prime factor of N, a gcd exposes it.  A
// prime p | N on which the computation went wrong ends up with X = Y = Z = 0
// (mod p), which is absorbing, and normalization rejects it.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "fastecpp/bigint.hpp"
#include "fastecpp/numth.hpp"

namespace fastecpp::curve {

struct Curve {
  Int n, a, b;
  bool operator==(const Curve&) const = default;
};

/// Affine point or the identity.
struct Point {
  Int x = 0, y = 0;
  bool infinity = false;

  static Point identity() { return Point{0, 0, true}; }
  bool operator==(const Point&) const = default;
};

struct Jacobian {
  Int X = 1, Y = 1, Z = 0;
};

inline Int discriminant_part(const Int& a, const Int& b, const Int& n) {
  return mod(4 * a * a * a + 27 * b * b, n);
}

/// Curve with gcd(4a^3 + 27b^2, N) = 1, or evidence.
inline OrComposite<Curve> make_curve(const Int& n, const Int& a, const Int& b) {
  const Int g = gcd(discriminant_part(a, b, n), n);
  if (g != 1) return evidence_from_gcd(g, n, "singular curve");
  return Curve{n, mod(a, n), mod(b, n)};
}

inline bool on_curve(const Curve& e, const Point& p) {
  if (p.infinity) return true;
  return mod(p.y * p.y - (p.x * p.x * p.x + e.a * p.x + e.b), e.n) == 0;
}

namespace detail {

inline void require_unit(const Int& v, const Int& n, const char* what) {
  const Int g = gcd(v, n);
  if (g != 1) throw CompositeFound{evidence_from_gcd(g, n, what)};
}

inline Jacobian lift(const Point& p) {
  if (p.infinity) return Jacobian{};
  return Jacobian{p.x, p.y, 1};
}

inline bool is_zero(const Int& v, const Int& n) { return mod(v, n) == 0; }

}  // namespace detail

inline Jacobian dbl(const Jacobian& p, const Curve& e) {
  const Int& n = e.n;
  if (detail::is_zero(p.Z, n)) {
    detail::require_unit(p.X, n, "degenerate identity");
    return Jacobian{};
  }
  if (detail::is_zero(p.Y, n)) {
    detail::require_unit(p.Z, n, "degenerate two-torsion point");
    return Jacobian{};
  }
  const Int xx = mod(p.X * p.X, n);
  const Int yy = mod(p.Y * p.Y, n);
  const Int zz = mod(p.Z * p.Z, n);
  const Int s = mod(4 * p.X * yy, n);
  const Int m = mod(3 * xx + e.a * mod(zz * zz, n), n);
  Jacobian r;
  r.X = mod(m * m - 2 * s, n);
  r.Y = mod(m * (s - r.X) - 8 * mod(yy * yy, n), n);
  r.Z = mod(2 * p.Y * p.Z, n);
  return r;
}

inline Jacobian add(const Jacobian& p, const Jacobian& q, const Curve& e) {
  const Int& n = e.n;
  if (detail::is_zero(p.Z, n)) {
    detail::require_unit(p.X, n, "degenerate identity");
    return q;
  }
  if (detail::is_zero(q.Z, n)) {
    detail::require_unit(q.X, n, "degenerate identity");
    return p;
  }
  const Int z1z1 = mod(p.Z * p.Z, n);
  const Int z2z2 = mod(q.Z * q.Z, n);
  const Int u1 = mod(p.X * z2z2, n);
  const Int u2 = mod(q.X * z1z1, n);
  const Int s1 = mod(p.Y * q.Z * z2z2, n);
  const Int s2 = mod(q.Y * p.Z * z1z1, n);
  const Int h = mod(u2 - u1, n);
  const Int r = mod(s2 - s1, n);
  if (h == 0) {
    if (r == 0) return dbl(p, e);
    // p = -q modulo N; modulo a factor r may still vanish (p = q there).
    detail::require_unit(r, n, "ambiguous addition");
    return Jacobian{};
  }
  const Int hh = mod(h * h, n);
  const Int hhh = mod(hh * h, n);
  const Int v = mod(u1 * hh, n);
  Jacobian out;
  out.X = mod(r * r - hhh - 2 * v, n);
  out.Y = mod(r * (v - out.X) - s1 * hhh, n);
  out.Z = mod(p.Z * q.Z * h, n);
  return out;
}

/// Affine form; the identity needs Z = 0 with X a unit, anything else an
/// invertible Z.
inline OrComposite<Point> normalize(const Jacobian& p, const Curve& e) {
  const Int& n = e.n;
  if (detail::is_zero(p.Z, n)) {
    const Int g = gcd(p.X, n);
    if (g != 1) return evidence_from_gcd(g, n, "degenerate identity");
    return Point::identity();
  }
  auto inv = invert(p.Z, n);
  if (auto* ev = std::get_if<CompositeEvidence>(&inv)) return *ev;
  const Int& zi = std::get<Int>(inv);
  const Int zi2 = mod(zi * zi, n);
  return Point{mod(p.X * zi2, n), mod(p.Y * zi2 * zi, n), false};
}

/// [k]P for k >= 0, left-to-right double-and-add.
inline OrComposite<Point> scalar_mul(const Point& p, const Int& k, const Curve& e) {
  if (k < 0) throw std::invalid_argument("scalar_mul: k must be nonnegative");
  try {
    const Jacobian base = detail::lift(p);
    Jacobian acc;
    for (std::size_t i = bit_size(k); i-- > 0;) {
      acc = dbl(acc, e);
      if (mpz_tstbit(k.get_mpz_t(), i)) acc = add(acc, base, e);
    }
    return normalize(acc, e);
  } catch (const CompositeFound& f) {
    return f.evidence;
  }
}

/// Smallest c >= 2 with (c|N) = -1; evidence if some c shares a factor
/// with N or none is found below `limit`.
inline OrComposite<Int> smallest_nonresidue(const Int& n, unsigned long limit = 1u << 20) {
  for (unsigned long c = 2; c < limit; ++c) {
    const int j = numth::jacobi(Int(c), n);
    if (j == -1) return Int(c);
    if (j == 0 && Int(c) < n) return evidence_from_gcd(gcd(Int(c), n), n, "small factor while searching a non-residue");
  }
  return CompositeEvidence{EvidenceKind::impossible_arithmetic, std::nullopt, "no quadratic non-residue found"};
}

/// CM curves with j-invariant j0: the curve and its quadratic twist in the
/// general case, six sextic twists for j0 = 0, four quartic twists for
/// j0 = 1728.
inline OrComposite<std::vector<Curve>> curves_from_j(const Int& j0_in, const Int& n) {
  const Int j0 = mod(j0_in, n);
  auto nr = smallest_nonresidue(n);
  if (auto* ev = std::get_if<CompositeEvidence>(&nr)) return *ev;
  Int g = std::get<Int>(nr);
  std::vector<std::pair<Int, Int>> coeffs;
  if (j0 == 0) {
    // Generator of F_N^* / (F_N^*)^6 needs a non-square that, when 3 | N-1,
    // is also a non-cube.
    if (mod(n, 3) == 1) {
      const Int e3 = (n - 1) / 3;
      while (numth::jacobi(g, n) != -1 || powm(g, e3, n) == 1) {
        g += 1;
        if (g >= n) return CompositeEvidence{EvidenceKind::impossible_arithmetic, std::nullopt, "no sextic generator"};
      }
    }
    Int b = 1;
    for (int i = 0; i < 6; ++i, b = mod(b * g, n)) coeffs.emplace_back(0, b);
  } else if (j0 == mod(Int(1728), n)) {
    Int a = 1;
    for (int i = 0; i < 4; ++i, a = mod(a * g, n)) coeffs.emplace_back(a, 0);
  } else {
    auto inv = invert(mod(1728 - j0, n), n);
    if (auto* ev = std::get_if<CompositeEvidence>(&inv)) return *ev;
    const Int k = mod(j0 * std::get<Int>(inv), n);
    const Int g2 = mod(g * g, n);
    coeffs.emplace_back(mod(3 * k, n), mod(2 * k, n));
    coeffs.emplace_back(mod(3 * k * g2, n), mod(2 * k * g2 * g, n));
  }
  std::vector<Curve> out;
  for (const auto& [a, b] : coeffs) {
    auto c = make_curve(n, a, b);
    if (auto* ev = std::get_if<CompositeEvidence>(&c)) return *ev;
    out.push_back(std::get<Curve>(c));
  }
  return out;
}

/// j(E) = 1728 * 4a^3 / (4a^3 + 27b^2).
inline OrComposite<Int> j_invariant(const Curve& e) {
  const Int four_a3 = mod(4 * e.a * e.a * e.a, e.n);
  auto inv = invert(discriminant_part(e.a, e.b, e.n), e.n);
  if (auto* ev = std::get_if<CompositeEvidence>(&inv)) return *ev;
  return mod(1728 * four_a3 * std::get<Int>(inv), e.n);
}

/// N' > (N^(1/4) + 1)^2, decided in integers: with A = (N'+1)^2 + 4N' - N
/// the condition is A > 0 and A^2 > 16 N' (N'+1)^2.
inline bool nprime_above_floor(const Int& nprime, const Int& n) {
  if (nprime < 1) return false;
  const Int s = nprime + 1;
  const Int a = s * s + 4 * nprime - n;
  if (a <= 0) return false;
  return a * a > 16 * nprime * s * s;
}

struct OrderPoint {
  Curve curve;
  Point p;  // random point on the curve
  Point q;  // [c]P, of order N'
};

/// Random point: x uniform below N, y from a square root of x^3 + ax + b.
/// nullopt after `attempts` non-residues in a row.
inline OrComposite<std::optional<Point>> random_point(const Curve& e, IntRng& rng, unsigned attempts = 64) {
  for (unsigned i = 0; i < attempts; ++i) {
    const Int x = rng.below(e.n);
    const Int rhs = mod(x * x * x + e.a * x + e.b, e.n);
    if (rhs == 0) return std::optional<Point>(Point{x, 0, false});
    const int j = numth::jacobi(rhs, e.n);
    if (j == 0) return evidence_from_gcd(gcd(rhs, e.n), e.n, "curve value shares a factor with N");
    if (j == -1) continue;
    auto y = numth::sqrt_mod(rhs, e.n);
    if (!y || mod(*y * *y, e.n) != rhs)
      return CompositeEvidence{EvidenceKind::impossible_arithmetic, std::nullopt, "square root of a residue failed"};
    return std::optional<Point>(Point{x, *y, false});
  }
  return std::optional<Point>();
}

/// Searches the curves in order for a point Q = [c]P != O with [N']Q = O,
/// using up to `points_per_curve` random points each.  A curve is abandoned
/// as soon as [N']Q != O, since then its order is not m.  nullopt means
/// FAILURE for this (D, m).
inline OrComposite<std::optional<OrderPoint>> find_order_point(const std::vector<Curve>& curves, const Int& m,
                                                               const Int& c, const Int& nprime, std::uint64_t seed,
                                                               unsigned points_per_curve = 8) {
  if (c * nprime != m) throw std::invalid_argument("find_order_point: m must equal c * N'");
  IntRng rng(seed);
  for (const auto& e : curves) {
    for (unsigned i = 0; i < points_per_curve; ++i) {
      auto pt = random_point(e, rng);
      if (auto* ev = std::get_if<CompositeEvidence>(&pt)) return *ev;
      const auto& p = std::get<std::optional<Point>>(pt);
      if (!p) break;
      auto q = scalar_mul(*p, c, e);
      if (auto* ev = std::get_if<CompositeEvidence>(&q)) return *ev;
      const Point& qp = std::get<Point>(q);
      if (qp.infinity) continue;
      auto r = scalar_mul(qp, nprime, e);
      if (auto* ev = std::get_if<CompositeEvidence>(&r)) return *ev;
      if (!std::get<Point>(r).infinity) break;
      return std::optional<OrderPoint>(OrderPoint{e, *p, qp});
    }
  }
  return std::optional<OrderPoint>();
}

}  // namespace fastecpp::curve
