#pragma once

// Sieve of Eratosthenes, plain and segmented.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace fastecpp {

inline std::vector<std::uint32_t> primes_up_to(std::uint32_t n) {
  std::vector<std::uint32_t> out;
  if (n < 2) return out;
  std::vector<bool> composite(static_cast<std::size_t>(n) + 1, false);
  for (std::uint64_t i = 2; i <= n; ++i) {
    if (composite[i]) continue;
    out.push_back(static_cast<std::uint32_t>(i));
    for (std::uint64_t j = i * i; j <= n; j += i) composite[j] = true;
  }
  return out;
}

/// Primes p with lo < p <= hi, by a segmented sieve over windows of 2^18.
inline std::vector<std::uint64_t> primes_in_range(std::uint64_t lo, std::uint64_t hi) {
  std::vector<std::uint64_t> out;
  if (hi < 2 || hi <= lo) return out;
  const auto root = static_cast<std::uint32_t>(std::sqrt(static_cast<double>(hi))) + 2;
  const auto base = primes_up_to(root);
  constexpr std::uint64_t kWindow = 1u << 18;
  std::vector<bool> composite;
  for (std::uint64_t start = std::max<std::uint64_t>(lo + 1, 2); start <= hi; start += kWindow) {
    const std::uint64_t end = std::min(hi, start + kWindow - 1);
    composite.assign(end - start + 1, false);
    for (std::uint64_t p : base) {
      if (p * p > end) break;
      std::uint64_t first = std::max(p * p, (start + p - 1) / p * p);
      for (std::uint64_t j = first; j <= end; j += p) composite[j - start] = true;
    }
    for (std::uint64_t v = start; v <= end; ++v)
      if (!composite[v - start]) out.push_back(v);
  }
  return out;
}

/// Trial-division factorisation of a small integer into primes (with
/// multiplicity, ascending).
inline std::vector<std::uint64_t> factor_small(std::uint64_t n) {
  std::vector<std::uint64_t> f;
  for (std::uint64_t p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
    while (n % p == 0) {
      f.push_back(p);
      n /= p;
    }
  }
  if (n > 1) f.push_back(n);
  return f;
}

}  // namespace fastecpp
