#pragma once

// Distribution of the smooth exponent alpha = log(c) / log(B) for L-bit
// numbers n = c * q with c B-smooth and q prime: analytic density, bucket
// masses, the best-of-n amplification, and a Monte Carlo check.

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fastecpp/bigint.hpp"
#include "fastecpp/numth.hpp"
#include "fastecpp/parallel.hpp"
#include "fastecpp/trialdiv.hpp"

namespace fastecpp::stats {

// Euler-Mascheroni constant, 50 digits.
inline constexpr const char* kGammaDigits = "0.57721566490153286060651209008240243104215933593992";
inline constexpr double kGamma = 0.57721566490153286060651209008240243104215933593992;

inline double exp_gamma() { return std::exp(kGamma); }

struct Unsupported : std::domain_error {
  using std::domain_error::domain_error;
};

/// f(alpha) = 1/e^gamma on (0, 1] and (1 - ln alpha)/e^gamma on (1, 2].
inline double density(double alpha) {
  if (!(alpha > 0)) throw std::invalid_argument("density: alpha must be positive");
  if (alpha > 2) throw Unsupported("density: only a bound is available for alpha > 2");
  if (alpha <= 1) return 1 / exp_gamma();
  return (1 - std::log(alpha)) / exp_gamma();
}

/// P(alpha <= x).  Exact for x <= 2; for x > 2 a lower bound.
inline double cumulative(double x) {
  if (x <= 0) return 0;
  if (x <= 1) return x / exp_gamma();
  return (2 * x - 1 - x * std::log(x)) / exp_gamma();
}

inline bool cumulative_is_bound(double x) { return x > 2; }

struct Buckets {
  double p1 = 0;             // alpha <= 1
  double p2 = 0;             // 1 < alpha <= 2
  double p_tail_bound = 0;   // alpha > 2, the complement
  double p_gt_e_bound = 0;   // alpha > e, upper bound
};

inline Buckets bucket_probabilities() {
  Buckets b;
  b.p1 = cumulative(1);
  b.p2 = (2 - 2 * std::numbers::ln2) / exp_gamma();
  b.p_tail_bound = 1 - b.p1 - b.p2;
  b.p_gt_e_bound = 1 - cumulative(std::numbers::e);
  return b;
}

/// 1 - (1 - p)^n: chance that at least one of n candidates succeeds.
inline double max_statistics_gain(double p, double n) {
  if (!(p > 0 && p < 1)) throw std::invalid_argument("max_statistics_gain: p must lie in (0, 1)");
  if (n < 0) throw std::invalid_argument("max_statistics_gain: n must be nonnegative");
  return 1 - std::pow(1 - p, n);
}

/// e^gamma log2(B) / L.
inline double expected_acceptance(unsigned bits, double log2_b) { return exp_gamma() * log2_b / bits; }

struct SampleReport {
  unsigned bits = 0;
  std::uint64_t bound = 0;
  std::uint64_t n_total = 0;
  std::uint64_t n_prime_conditioned = 0;
  std::vector<std::uint64_t> histogram;  // counts of alpha in [i w, (i+1) w)
  double bin_width = 0.1;
  std::uint64_t c1 = 0, c2 = 0, c_tail = 0, c_gt_e = 0;

  double acceptance_rate() const { return n_total ? static_cast<double>(n_prime_conditioned) / n_total : 0; }
  double frac(std::uint64_t c) const { return n_prime_conditioned ? static_cast<double>(c) / n_prime_conditioned : 0; }
  double p1() const { return frac(c1); }
  double p2() const { return frac(c2); }
  double p_tail() const { return frac(c_tail); }
  double p_gt_e() const { return frac(c_gt_e); }
  double log2_bound() const { return std::log2(static_cast<double>(bound)); }
};

namespace detail {

inline constexpr std::uint64_t kChunk = 4096;

struct ChunkResult {
  std::uint64_t accepted = 0;
  std::vector<double> alphas;
};

inline ChunkResult sample_chunk(unsigned bits, const trialdiv::PrimeProduct& p, std::uint64_t count,
                                std::uint64_t seed) {
  IntRng rng(seed);
  std::vector<Int> ms(count);
  const Int top = pow2(bits - 1);
  for (auto& m : ms) {
    m = rng.bits(bits - 1) + top;
  }
  const auto rems = trialdiv::remainder_tree(p.value, ms);
  const double log_b = std::log(static_cast<double>(p.hi));
  ChunkResult out;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const auto s = trialdiv::smooth_split(ms[i], rems[i]);
    if (s.rough < 2 || !numth::is_probable_prime(s.rough, 20)) continue;
    ++out.accepted;
    long exp = 0;
    const double mant = mpz_get_d_2exp(&exp, s.c.get_mpz_t());
    out.alphas.push_back((std::log(mant) + static_cast<double>(exp) * std::numbers::ln2) / log_b);
  }
  return out;
}

}  // namespace detail

/// Uniform `bits`-bit integers, even ones included: dropping them would strip
/// the 2-part (one bit on average) from every smooth part and bias alpha low.
/// The part composed of primes <= bound is stripped and the sample kept iff
/// the rest is a probable prime.  Work is cut into fixed chunks with seeds
/// derived from (seed, chunk), so the report does not depend on the worker
/// count.
inline SampleReport sample(unsigned bits, std::uint64_t bound, std::uint64_t n_samples, std::uint64_t seed,
                           WorkerPool& pool, const trialdiv::PrimeProduct* product = nullptr) {
  if (bits < 8) throw std::invalid_argument("sample: bit size too small");
  if (bound < 3) throw std::invalid_argument("sample: bound too small");
  trialdiv::PrimeProduct local;
  if (!product || product->lo > 1 || product->hi != bound) {
    local = trialdiv::prime_product(1, bound);
    product = &local;
  }
  const std::uint64_t chunks = (n_samples + detail::kChunk - 1) / detail::kChunk;
  auto results = pool.map(chunks, [&](std::size_t i) {
    const std::uint64_t count = std::min<std::uint64_t>(detail::kChunk, n_samples - i * detail::kChunk);
    return detail::sample_chunk(bits, *product, count, splitmix64(seed ^ splitmix64(i)));
  });
  SampleReport r;
  r.bits = bits;
  r.bound = bound;
  r.n_total = n_samples;
  r.histogram.assign(40, 0);
  for (const auto& c : results) {
    r.n_prime_conditioned += c.accepted;
    for (double a : c.alphas) {
      if (a <= 1)
        ++r.c1;
      else if (a <= 2)
        ++r.c2;
      else
        ++r.c_tail;
      if (a > std::numbers::e) ++r.c_gt_e;
      const auto bin = static_cast<std::size_t>(a / r.bin_width);
      if (bin >= r.histogram.size()) r.histogram.resize(bin + 1, 0);
      ++r.histogram[bin];
    }
  }
  return r;
}

inline SampleReport sample(unsigned bits, std::uint64_t bound, std::uint64_t n_samples, std::uint64_t seed,
                           unsigned workers = 1) {
  WorkerPool pool(workers);
  return sample(bits, bound, n_samples, seed, pool);
}

/// Aligned table, empirical next to analytic.
inline std::string format_table(const SampleReport& r) {
  const Buckets b = bucket_probabilities();
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "L=" << r.bits << " B=" << r.bound << " samples=" << r.n_total << " conditioned=" << r.n_prime_conditioned
     << "\n";
  os << std::left << std::setw(16) << "bucket" << std::right << std::setw(12) << "empirical" << std::setw(12)
     << "analytic" << "  kind\n";
  auto row = [&](const char* name, double emp, double ana, const char* kind) {
    os << std::left << std::setw(16) << name << std::right << std::setw(12) << emp << std::setw(12) << ana << "  "
       << kind << "\n";
  };
  row("alpha<=1", r.p1(), b.p1, "exact");
  row("1<alpha<=2", r.p2(), b.p2, "exact");
  row("alpha>2", r.p_tail(), b.p_tail_bound, "complement");
  row("alpha>e", r.p_gt_e(), b.p_gt_e_bound, "BOUND");
  row("acceptance", r.acceptance_rate(), expected_acceptance(r.bits, r.log2_bound()), "asymptotic");
  return os.str();
}

/// key=value lines.
inline std::string format_kv(const SampleReport& r) {
  const Buckets b = bucket_probabilities();
  std::ostringstream os;
  os << std::setprecision(8);
  os << "L=" << r.bits << "\nB=" << r.bound << "\nn_total=" << r.n_total
     << "\nn_prime_conditioned=" << r.n_prime_conditioned << "\np1=" << r.p1() << "\np2=" << r.p2()
     << "\np_tail=" << r.p_tail() << "\np_gt_e=" << r.p_gt_e() << "\nanalytic.p1=" << b.p1
     << "\nanalytic.p2=" << b.p2 << "\nanalytic.p_tail_bound=" << b.p_tail_bound
     << "\nanalytic.p_gt_e_bound=" << b.p_gt_e_bound << "\nacceptance=" << r.acceptance_rate()
     << "\nanalytic.acceptance=" << expected_acceptance(r.bits, r.log2_bound()) << "\n";
  return os.str();
}

/// alpha_lo,alpha_hi,count,density lines.
inline std::string format_histogram_csv(const SampleReport& r) {
  std::ostringstream os;
  os << "alpha_lo,alpha_hi,count,density\n";
  for (std::size_t i = 0; i < r.histogram.size(); ++i) {
    const double lo = static_cast<double>(i) * r.bin_width;
    const double dens = r.n_prime_conditioned ? static_cast<double>(r.histogram[i]) / (r.n_prime_conditioned * r.bin_width) : 0;
    os << lo << "," << lo + r.bin_width << "," << r.histogram[i] << "," << dens << "\n";
  }
  return os.str();
}

}  // namespace fastecpp::stats
