#pragma once

// Batched extraction of smooth parts: a product P of all primes in a range,
// P mod m_i for many m_i at once via product and remainder trees, then the
// iterated-gcd ladder c' = gcd(m, P mod m), c'' = gcd(m / c', c'), ...

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "fastecpp/bigint.hpp"
#include "fastecpp/binio.hpp"
#include "fastecpp/parallel.hpp"
#include "fastecpp/primes.hpp"

namespace fastecpp::trialdiv {

/// Product of the primes in (lo, hi].
struct PrimeProduct {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  Int value = 1;
  std::size_t nbits = 1;
  bool empty = true;  // no prime in range, value == 1
  std::size_t prime_count = 0;
};

/// Balanced product of a list of integers, 1 for the empty list.
inline Int product_of(std::vector<Int> level) {
  if (level.empty()) return 1;
  while (level.size() > 1) {
    std::vector<Int> next((level.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) next[i / 2] = level[i] * level[i + 1];
    if (level.size() % 2) next.back() = std::move(level.back());
    level = std::move(next);
  }
  return std::move(level.front());
}

inline PrimeProduct prime_product(std::uint64_t lo, std::uint64_t hi) {
  if (lo > hi) throw std::invalid_argument("prime_product: lo must not exceed hi");
  const auto primes = primes_in_range(lo, hi);
  // Leaves are word-sized products of consecutive primes.
  std::vector<Int> leaves;
  unsigned long acc = 1;
  for (std::uint64_t p : primes) {
    if (acc > (~0ul) / p) {
      leaves.emplace_back(acc);
      acc = 1;
    }
    acc *= static_cast<unsigned long>(p);
  }
  if (acc != 1) leaves.emplace_back(acc);
  PrimeProduct out;
  out.lo = lo;
  out.hi = hi;
  out.value = product_of(std::move(leaves));
  out.nbits = bit_size(out.value);
  out.empty = primes.empty();
  out.prime_count = primes.size();
  return out;
}

/// Contiguous products covering (0, count * width].
inline std::vector<PrimeProduct> prime_products(std::uint64_t width, unsigned count, WorkerPool& pool) {
  return pool.map(count, [&](std::size_t i) { return prime_product(i * width, (i + 1) * width); });
}

// Prime-product cache file:
//   "FECPPPRP" | u32 version=1 | varint lo | varint hi | varint prime_count | magnitude(P)
// where magnitude is a varint byte count followed by the bytes, least
// significant first.
inline constexpr std::string_view kProductMagic = "FECPPPRP";
inline constexpr std::uint32_t kProductVersion = 1;

inline void save_prime_product(const PrimeProduct& p, const std::filesystem::path& path) {
  binio::Writer w;
  w.header(kProductMagic, kProductVersion);
  w.varint(p.lo);
  w.varint(p.hi);
  w.varint(p.prime_count);
  w.magnitude(p.value);
  w.save(path);
}

inline PrimeProduct load_prime_product(const std::filesystem::path& path) {
  auto r = binio::Reader::load(path);
  r.expect_header(kProductMagic, kProductVersion);
  PrimeProduct p;
  p.lo = r.varint();
  p.hi = r.varint();
  p.prime_count = r.varint();
  p.value = r.magnitude();
  if (!r.at_end() || p.lo > p.hi || p.value < 1) throw binio::FormatError("bad prime product record");
  p.nbits = bit_size(p.value);
  p.empty = p.prime_count == 0;
  return p;
}

inline std::vector<PrimeProduct> cached_prime_products(std::uint64_t width, unsigned count, WorkerPool& pool,
                                                       const std::filesystem::path& dir) {
  if (dir.empty()) return prime_products(width, count, pool);
  std::filesystem::create_directories(dir);
  return pool.map(count, [&](std::size_t i) {
    const std::uint64_t lo = i * width, hi = (i + 1) * width;
    const auto path = dir / ("primes-" + std::to_string(lo) + "-" + std::to_string(hi) + ".bin");
    if (std::filesystem::exists(path)) {
      try {
        auto p = load_prime_product(path);
        if (p.lo == lo && p.hi == hi) return p;
      } catch (const std::exception&) {
        // rebuild
      }
    }
    auto p = prime_product(lo, hi);
    save_prime_product(p, path);
    return p;
  });
}

namespace detail {

inline unsigned ceil_log2(std::size_t n) {
  unsigned d = 0;
  while ((std::size_t{1} << d) < n) ++d;
  return d;
}

// P mod m_i for one batch: tree[0] holds the leaves, tree.back() the root.
inline void remainder_tree_batch(const Int& p, const std::vector<Int>& ms, std::size_t first, std::size_t last,
                                 std::vector<Int>& out) {
  const std::size_t n = last - first;
  if (n == 1) {
    out[first] = mod(p, ms[first]);
    return;
  }
  std::vector<std::vector<Int>> tree;
  tree.emplace_back(ms.begin() + static_cast<std::ptrdiff_t>(first), ms.begin() + static_cast<std::ptrdiff_t>(last));
  while (tree.back().size() > 1) {
    const auto& below = tree.back();
    std::vector<Int> level((below.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < below.size(); i += 2) level[i / 2] = below[i] * below[i + 1];
    if (below.size() % 2) level.back() = below.back();
    tree.push_back(std::move(level));
  }
  std::vector<Int> rem{mod(p, tree.back().front())};
  tree.pop_back();
  while (!tree.empty()) {
    auto& level = tree.back();
    std::vector<Int> next(level.size());
    for (std::size_t i = 0; i < level.size(); ++i) next[i] = mod(rem[i / 2], level[i]);
    rem = std::move(next);
    tree.pop_back();
  }
  for (std::size_t i = 0; i < n; ++i) out[first + i] = std::move(rem[i]);
}

}  // namespace detail

/// Greedy split of ms into consecutive batches whose whole product tree
/// (all levels) stays within `budget_bits`; each batch has at least one
/// element, and its root product is at most 2^budget_bits.
inline std::vector<std::pair<std::size_t, std::size_t>> plan_batches(const std::vector<Int>& ms,
                                                                     std::size_t budget_bits) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t start = 0, sum = 0;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const std::size_t bits = bit_size(ms[i]);
    const std::size_t n = i - start + 1;
    if (n > 1 && (detail::ceil_log2(n) + 1) * (sum + bits) > budget_bits) {
      out.emplace_back(start, i);
      start = i;
      sum = 0;
    }
    sum += bits;
  }
  if (start < ms.size()) out.emplace_back(start, ms.size());
  return out;
}

/// P mod m_i for every i.  Batches are sized from nbits(P) so the product
/// tree of a batch never exceeds half the size of P.
inline std::vector<Int> remainder_tree(const Int& p, const std::vector<Int>& ms) {
  for (const auto& m : ms)
    if (m < 2) throw std::invalid_argument("remainder_tree: moduli must be >= 2");
  std::vector<Int> out(ms.size());
  const std::size_t budget = std::max<std::size_t>(bit_size(p) / 2, 1);
  for (const auto& [first, last] : plan_batches(ms, budget)) detail::remainder_tree_batch(p, ms, first, last, out);
  return out;
}

/// m = c * rough with c composed of primes dividing P and gcd(rough, P) = 1.
struct SmoothSplit {
  Int m;
  Int c = 1;
  Int rough;

  bool operator==(const SmoothSplit&) const = default;
};

/// Smooth part of m from r = P mod m.  The ladder runs until the gcd is 1,
/// so every prime power dividing m is removed completely.
inline SmoothSplit smooth_split(const Int& m, const Int& p_mod_m) {
  if (m < 2) throw std::invalid_argument("smooth_split: m must be >= 2");
  SmoothSplit s{m, 1, m};
  Int g = gcd(m, p_mod_m);  // squarefree part of c
  while (g > 1) {
    s.c *= g;
    mpz_divexact(s.rough.get_mpz_t(), s.rough.get_mpz_t(), g.get_mpz_t());
    g = gcd(s.rough, g);
  }
  return s;
}

/// Splits every m against the product of all supplied prime products, which
/// must cover contiguous ranges starting at the bottom.  Work is partitioned
/// in two dimensions, batches of ms times prime ranges; per-range smooth
/// parts are multiplied together in the join step.
inline std::vector<SmoothSplit> batch_factor(const std::vector<Int>& ms, const std::vector<PrimeProduct>& products,
                                             unsigned batches, WorkerPool& pool) {
  for (std::size_t r = 0; r < products.size(); ++r) {
    if (r == 0 ? products[r].lo > 1 : products[r].lo != products[r - 1].hi)
      throw std::invalid_argument("batch_factor: prime products must be contiguous from 2");
  }
  if (ms.empty()) return {};
  for (const auto& m : ms)
    if (m < 2) throw std::invalid_argument("batch_factor: moduli must be >= 2");
  const auto groups = even_ranges(ms.size(), std::max(1u, batches));
  const std::size_t nr = products.size();
  // partial[g * nr + r][i] = smooth part of ms[groups[g].first + i] over range r.
  std::vector<std::vector<Int>> partial(groups.size() * nr);
  pool.parallel_for(partial.size(), [&](std::size_t task) {
    const auto& [first, last] = groups[task / nr];
    const auto& prod = products[task % nr];
    std::vector<Int> slice(ms.begin() + static_cast<std::ptrdiff_t>(first), ms.begin() + static_cast<std::ptrdiff_t>(last));
    auto rems = remainder_tree(prod.value, slice);
    std::vector<Int> cs(slice.size());
    for (std::size_t i = 0; i < slice.size(); ++i) cs[i] = smooth_split(slice[i], rems[i]).c;
    partial[task] = std::move(cs);
  });
  std::vector<SmoothSplit> out(ms.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t i = groups[g].first; i < groups[g].second; ++i) {
      Int c = 1;
      for (std::size_t r = 0; r < nr; ++r) c *= partial[g * nr + r][i - groups[g].first];
      SmoothSplit s{ms[i], c, 0};
      mpz_divexact(s.rough.get_mpz_t(), ms[i].get_mpz_t(), c.get_mpz_t());
      out[i] = std::move(s);
    }
  }
  return out;
}

}  // namespace fastecpp::trialdiv
