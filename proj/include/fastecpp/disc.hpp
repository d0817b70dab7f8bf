#pragma once

// Discriminant side of the candidate search: class numbers by enumeration of
// reduced forms, signed primes with (q*|N) = 1, and the pool of fundamental
// discriminants built as products of distinct signed primes together with
// their square roots modulo N.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fastecpp/binio.hpp"
#include "fastecpp/bigint.hpp"
#include "fastecpp/numth.hpp"
#include "fastecpp/parallel.hpp"
#include "fastecpp/primes.hpp"

namespace fastecpp::disc {

/// q* in {-4, 8, -8} or +-q for an odd prime q with q* = 1 (mod 4).
struct SignedPrime {
  std::int64_t value = 0;

  /// The underlying prime: 2 for -4 and +-8.
  std::uint64_t prime() const {
    const std::uint64_t a = value < 0 ? static_cast<std::uint64_t>(-value) : static_cast<std::uint64_t>(value);
    return (a == 4 || a == 8) ? 2 : a;
  }
  std::uint64_t magnitude() const { return value < 0 ? static_cast<std::uint64_t>(-value) : static_cast<std::uint64_t>(value); }

  friend bool operator==(SignedPrime, SignedPrime) = default;
  /// Ascending |q*|; -8 sorts before 8.
  friend bool operator<(SignedPrime x, SignedPrime y) {
    if (x.magnitude() != y.magnitude()) return x.magnitude() < y.magnitude();
    return x.value < y.value;
  }
};

inline bool is_squarefree(std::uint64_t n) {
  if (n % 4 == 0) return false;
  for (std::uint64_t p = 3; p * p <= n; p += 2)
    if (n % (p * p) == 0) return false;
  return true;
}

/// Standard fundamentality predicate for negative D.
inline bool is_fundamental(std::int64_t d) {
  if (d >= 0) return false;
  const std::uint64_t a = static_cast<std::uint64_t>(-d);
  if (a % 4 == 3) return is_squarefree(a);  // D = 1 (mod 4)
  if (a % 4 != 0) return false;
  const std::uint64_t m = a / 4;               // D/4 = -m must be 2 or 3 mod 4
  return (m % 4 == 1 || m % 4 == 2) && is_squarefree(m);
}

inline std::vector<std::uint32_t> factor_class_number(std::uint32_t h) {
  std::vector<std::uint32_t> out;
  for (auto p : factor_small(h)) out.push_back(static_cast<std::uint32_t>(p));
  return out;
}

struct Disc {
  std::int64_t d = 0;
  std::uint32_t h = 0;
  std::vector<std::uint32_t> hfac;
  std::vector<SignedPrime> parts;

  std::uint64_t abs() const { return static_cast<std::uint64_t>(-d); }
  std::uint32_t largest_hfac() const { return hfac.empty() ? 1 : hfac.back(); }
};

/// Class numbers of all fundamental D with -dmax <= D < 0.
class ClassNumberTable {
 public:
  ClassNumberTable() = default;
  ClassNumberTable(std::uint64_t dmax, std::vector<std::uint32_t> h_by_abs)
      : dmax_(dmax), h_(std::move(h_by_abs)) {
    if (h_.size() != dmax_ + 1) throw std::invalid_argument("class number table size mismatch");
  }

  std::uint64_t dmax() const { return dmax_; }

  /// h(D) for fundamental D in range, nullopt otherwise.
  std::optional<std::uint32_t> h(std::int64_t d) const {
    if (d >= 0) return std::nullopt;
    const auto a = static_cast<std::uint64_t>(-d);
    if (a > dmax_ || h_[a] == 0) return std::nullopt;
    return h_[a];
  }

  std::size_t count() const {
    return static_cast<std::size_t>(std::count_if(h_.begin(), h_.end(), [](auto v) { return v != 0; }));
  }

  const std::vector<std::uint32_t>& raw() const { return h_; }

  bool operator==(const ClassNumberTable&) const = default;

 private:
  std::uint64_t dmax_ = 0;
  std::vector<std::uint32_t> h_;  // indexed by |D|, 0 for non-fundamental
};

namespace detail {

// Counts reduced forms (a, b, c), b^2 - 4ac = D, |b| <= a <= c, b >= 0 when
// |b| = a or a = c, for every |D| in [lo, hi] that is flagged fundamental.
// Forms of fundamental discriminant are automatically primitive.
inline void count_forms(std::uint64_t lo, std::uint64_t hi, const std::vector<bool>& fundamental,
                        std::vector<std::uint32_t>& h) {
  for (std::int64_t a = 1; static_cast<std::uint64_t>(3 * a * a) <= hi; ++a) {
    for (std::int64_t b = -a + 1; b <= a; ++b) {
      const auto b2 = static_cast<std::uint64_t>(b * b);
      const auto four_a = static_cast<std::uint64_t>(4 * a);
      std::uint64_t c = std::max<std::uint64_t>(static_cast<std::uint64_t>(a), (lo + b2 + four_a - 1) / four_a);
      for (;; ++c) {
        const std::uint64_t abs_d = four_a * c - b2;
        if (abs_d > hi) break;
        if (abs_d < lo) continue;
        if (!fundamental[abs_d]) continue;
        if (b < 0 && (c == static_cast<std::uint64_t>(a))) continue;
        ++h[abs_d];
      }
    }
  }
}

}  // namespace detail

/// Builds the table by enumerating reduced forms.  Work is split into fixed
/// |D|-ranges so the result never depends on the worker count.
inline ClassNumberTable class_number_table(std::uint64_t dmax, WorkerPool& pool) {
  if (dmax < 4) throw std::invalid_argument("class_number_table: dmax must be >= 4");
  std::vector<bool> fundamental(dmax + 1, false);
  {
    // Squarefree sieve, then the mod-4 conditions.
    std::vector<bool> sqfree(dmax + 1, true);
    for (std::uint64_t p = 2; p * p <= dmax; ++p)
      for (std::uint64_t j = p * p; j <= dmax; j += p * p) sqfree[j] = false;
    for (std::uint64_t a = 3; a <= dmax; ++a) {
      if (a % 4 == 3)
        fundamental[a] = sqfree[a];
      else if (a % 4 == 0) {
        const std::uint64_t m = a / 4;
        fundamental[a] = (m % 4 == 1 || m % 4 == 2) && sqfree[m];
      }
    }
  }
  std::vector<std::uint32_t> h(dmax + 1, 0);
  const auto ranges = even_ranges(static_cast<std::size_t>(dmax - 2), 64);
  pool.parallel_for(ranges.size(), [&](std::size_t i) {
    detail::count_forms(3 + ranges[i].first, 2 + ranges[i].second, fundamental, h);
  });
  return ClassNumberTable(dmax, std::move(h));
}

inline ClassNumberTable class_number_table(std::uint64_t dmax, unsigned workers = 1) {
  WorkerPool pool(workers);
  return class_number_table(dmax, pool);
}

// Class-number cache file:
//   "FECPPCNT" | u32 version=1 | varint dmax | varint count | count x (varint |D|, varint h)
// Pairs are ascending in |D|.
inline constexpr std::string_view kClassNumberMagic = "FECPPCNT";
inline constexpr std::uint32_t kClassNumberVersion = 1;

inline void save_class_numbers(const ClassNumberTable& table, const std::filesystem::path& path) {
  binio::Writer w;
  w.header(kClassNumberMagic, kClassNumberVersion);
  w.varint(table.dmax());
  w.varint(table.count());
  const auto& h = table.raw();
  for (std::uint64_t a = 0; a < h.size(); ++a) {
    if (h[a] == 0) continue;
    w.varint(a);
    w.varint(h[a]);
  }
  w.save(path);
}

inline ClassNumberTable load_class_numbers(const std::filesystem::path& path) {
  auto r = binio::Reader::load(path);
  r.expect_header(kClassNumberMagic, kClassNumberVersion);
  const std::uint64_t dmax = r.varint();
  const std::uint64_t count = r.varint();
  if (dmax > (std::uint64_t{1} << 40)) throw binio::FormatError("implausible dmax");
  std::vector<std::uint32_t> h(dmax + 1, 0);
  std::uint64_t prev = 0;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t a = r.varint();
    const std::uint64_t v = r.varint();
    if (a > dmax || a <= prev || v == 0 || v > 0xffffffffu) throw binio::FormatError("bad class number record");
    h[a] = static_cast<std::uint32_t>(v);
    prev = a;
  }
  if (!r.at_end()) throw binio::FormatError("trailing bytes in class number file");
  return ClassNumberTable(dmax, std::move(h));
}

/// Loads `dir/classnumbers-<dmax>.bin` if present, otherwise builds and
/// stores it.  An empty dir disables caching.
inline ClassNumberTable cached_class_number_table(std::uint64_t dmax, WorkerPool& pool,
                                                  const std::filesystem::path& dir) {
  if (dir.empty()) return class_number_table(dmax, pool);
  const auto path = dir / ("classnumbers-" + std::to_string(dmax) + ".bin");
  if (std::filesystem::exists(path)) {
    try {
      return load_class_numbers(path);
    } catch (const std::exception&) {
      // unreadable cache: rebuild below
    }
  }
  auto table = class_number_table(dmax, pool);
  std::filesystem::create_directories(dir);
  save_class_numbers(table, path);
  return table;
}

/// The `count` smallest signed primes (by |q*|) with (q*|N) = 1.  A prime
/// dividing N (other than N itself) yields composite evidence.
inline OrComposite<std::vector<SignedPrime>> signed_primes(const Int& n, std::size_t count) {
  if (n < 3 || mpz_even_p(n.get_mpz_t())) throw std::invalid_argument("signed_primes: N must be odd and >= 3");
  std::vector<SignedPrime> out;
  if (count == 0) return out;
  auto accept = [&](std::int64_t q) {
    if (out.size() < count && numth::jacobi(from_i64(q), n) == 1) out.push_back({q});
  };
  // -4 sorts between 3 and 5, -8 and 8 between 7 and 11.
  constexpr std::uint64_t kTwoMagnitudes[] = {4, 8};
  std::size_t two_next = 0;
  std::uint64_t last = 2;
  for (std::uint64_t limit = 1024; out.size() < count && limit <= (std::uint64_t{1} << 32); limit *= 2) {
    for (auto p : primes_in_range(last, limit)) {
      while (two_next < 2 && kTwoMagnitudes[two_next] < p) {
        if (two_next == 0) {
          accept(-4);
        } else {
          accept(-8);
          accept(8);
        }
        ++two_next;
      }
      if (out.size() >= count) break;
      if (mpz_divisible_ui_p(n.get_mpz_t(), p)) {
        if (n == p) continue;
        return evidence_from_gcd(Int(static_cast<unsigned long>(p)), n, "small prime divides N");
      }
      const auto q = static_cast<std::int64_t>(p);
      accept(p % 4 == 1 ? q : -q);
    }
    last = limit;
  }
  return out;
}

struct PoolEntry {
  Disc disc;
  Int root;  // root^2 = D (mod N)
  std::size_t max_part_index = 0;  // position of its largest signed prime
};

namespace detail {

struct Enumerated {
  Disc disc;
  std::vector<std::size_t> indices;
};

// DFS over subsets of distinct signed primes (at most one of -4, +-8) with
// |product| <= dmax.  `primes` must be sorted ascending by |q*|.
inline void enumerate(const std::vector<SignedPrime>& primes, const ClassNumberTable& table, std::uint64_t dmax,
                      std::uint32_t hmax, std::uint32_t pmax, unsigned maxparts, std::size_t start,
                      std::int64_t product, bool has_two, std::vector<std::size_t>& path,
                      std::vector<Enumerated>& out) {
  for (std::size_t i = start; i < primes.size(); ++i) {
    const SignedPrime q = primes[i];
    const bool is_two = q.prime() == 2;
    if (is_two && has_two) continue;
    // Later entries are at least as large in magnitude.
    const auto cur = static_cast<std::uint64_t>(product < 0 ? -product : product);
    if (q.magnitude() > dmax / cur) break;
    const std::int64_t next = product * q.value;
    path.push_back(i);
    if (next < 0) {
      if (auto h = table.h(next); h && *h <= hmax) {
        auto hfac = factor_class_number(*h);
        const std::uint32_t top = hfac.empty() ? 1 : hfac.back();
        if (top <= pmax) {
          Enumerated e;
          e.disc.d = next;
          e.disc.h = *h;
          e.disc.hfac = std::move(hfac);
          for (auto k : path) e.disc.parts.push_back(primes[k]);
          e.indices = path;
          out.push_back(std::move(e));
        }
      }
    }
    if (path.size() < maxparts)
      enumerate(primes, table, dmax, hmax, pmax, maxparts, i + 1, next, has_two || is_two, path, out);
    path.pop_back();
  }
}

inline bool pool_order(const Disc& x, const Disc& y) {
  if (x.h != y.h) return x.h < y.h;
  return x.abs() < y.abs();
}

}  // namespace detail

struct PoolLimits {
  std::uint64_t dmax = 1u << 20;
  std::uint32_t hmax = 64;
  std::uint32_t pmax = 29;
  unsigned maxparts = 3;
};

/// Every admissible discriminant over `primes` (sorted by |q*|), without
/// roots.  Each entry records the index of its largest signed prime so a
/// caller can ask which discriminants a prefix of `primes` reaches.
inline std::vector<PoolEntry> enumerate_pool(const std::vector<SignedPrime>& primes, const ClassNumberTable& table,
                                             const PoolLimits& lim) {
  std::vector<detail::Enumerated> found;
  std::vector<std::size_t> path;
  const std::uint64_t dmax = std::min(lim.dmax, table.dmax());
  detail::enumerate(primes, table, dmax, lim.hmax, lim.pmax, lim.maxparts, 0, 1, false, path, found);
  std::vector<PoolEntry> out;
  out.reserve(found.size());
  for (auto& e : found) out.push_back(PoolEntry{std::move(e.disc), Int(0), e.indices.back()});
  std::stable_sort(out.begin(), out.end(),
                   [](const PoolEntry& x, const PoolEntry& y) { return detail::pool_order(x.disc, y.disc); });
  return out;
}

/// Pool of discriminants with rootD = product of the component roots mod N.
/// `roots` pairs each signed prime with a square root of it modulo N.
inline std::vector<PoolEntry> build_pool(const std::vector<std::pair<SignedPrime, Int>>& roots, const Int& n,
                                         const ClassNumberTable& table, const PoolLimits& lim) {
  auto sorted = roots;
  std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<SignedPrime> primes;
  for (const auto& [q, r] : sorted) primes.push_back(q);
  auto pool = enumerate_pool(primes, table, lim);
  for (auto& e : pool) {
    Int r = 1;
    for (const auto& part : e.disc.parts) {
      const auto it = std::lower_bound(sorted.begin(), sorted.end(), part,
                                       [](const auto& x, const SignedPrime& key) { return x.first < key; });
      r = mod(r * it->second, n);
    }
    e.root = r;
  }
  return pool;
}

}  // namespace fastecpp::disc
