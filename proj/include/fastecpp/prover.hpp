#pragma once

// The downrun.  One coordinator drives each step through
//   1. square roots of signed primes,
//   2. Cornacchia over every reachable pool discriminant,
//   3. batched trial division of all cardinalities,
//   4. Miller-Rabin on the rough parts, smallest first,
// then builds the CM curve and a point of order N' for the retained
// candidate.  Workers only ever see homogeneous, independent task batches.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "fastecpp/bigint.hpp"
#include "fastecpp/cert.hpp"
#include "fastecpp/cm.hpp"
#include "fastecpp/curve.hpp"
#include "fastecpp/disc.hpp"
#include "fastecpp/numth.hpp"
#include "fastecpp/parallel.hpp"
#include "fastecpp/stats.hpp"
#include "fastecpp/trialdiv.hpp"

namespace fastecpp::prover {

struct ProverConfig {
  unsigned workers = 1;
  std::uint64_t seed = 1;
  std::uint64_t range_width = std::uint64_t{1} << 24;
  unsigned ranges = 0;  // 0: max(1, workers / batches)
  unsigned batches = 16;
  std::uint64_t dmax_cap = std::uint64_t{1} << 20;
  std::uint32_t hmax = 64;
  std::optional<std::uint32_t> pmax;
  unsigned maxparts = 3;
  unsigned round_cap = 8;
  Int base_threshold = pow2(64);  // at most 2^64
  unsigned mr_rounds = 64;
  unsigned points_per_curve = 8;
  std::size_t signed_prime_cap = 4096;
  std::filesystem::path cache_dir;  // empty: no disk caches
  std::ostream* progress = nullptr;
};

struct StepParams {
  unsigned bits = 0;                 // L
  std::uint64_t dmax_formula = 0;    // before the desk cap
  std::uint64_t dmax = 0;
  std::uint32_t hmax = 0;
  std::uint32_t pmax = 0;
  std::size_t k = 0;                 // signed primes per worker
  unsigned workers = 1;
  unsigned ranges = 1;
  std::uint64_t range_width = 0;
  std::uint64_t bound = 0;           // B = ranges * range_width
  unsigned maxparts = 3;

  double log2_bound() const { return std::log2(static_cast<double>(bound)); }
};

/// Smallest power of two >= min(2^35, max(2^20, L^2 / 2)).
inline std::uint64_t dmax_for_bits(unsigned bits) {
  const std::uint64_t half_sq = static_cast<std::uint64_t>(bits) * bits / 2;
  const std::uint64_t target = std::min<std::uint64_t>(std::uint64_t{1} << 35, std::max<std::uint64_t>(std::uint64_t{1} << 20, half_sq));
  std::uint64_t p = 1;
  while (p < target) p <<= 1;
  return p;
}

inline std::uint32_t pmax_for_bits(unsigned bits) { return std::max<std::uint32_t>(29, bits >> 10); }

inline StepParams select_params(const Int& n, const ProverConfig& cfg) {
  StepParams p;
  p.bits = static_cast<unsigned>(bit_size(n));
  p.dmax_formula = dmax_for_bits(p.bits);
  p.dmax = std::min(p.dmax_formula, cfg.dmax_cap);
  p.hmax = cfg.hmax;
  p.pmax = cfg.pmax ? *cfg.pmax : pmax_for_bits(p.bits);
  p.workers = std::max(1u, cfg.workers);
  p.ranges = cfg.ranges ? cfg.ranges : std::max(1u, p.workers / std::max(1u, cfg.batches));
  p.range_width = cfg.range_width;
  p.bound = p.range_width * p.ranges;
  p.maxparts = cfg.maxparts;
  return p;
}

/// Estimated surviving N' contributed by one discriminant: Pell success
/// about 1/sqrt|D|, two cardinalities, each smooth-times-prime with
/// probability e^gamma log2(B) / L.
inline double expected_survivors(std::uint64_t abs_d, unsigned bits, double log2_bound) {
  return 2 / std::sqrt(static_cast<double>(abs_d)) * stats::expected_acceptance(bits, log2_bound);
}

struct KChoice {
  std::size_t k = 0;
  double expected = 0;
  bool exhausted = false;
};

/// Minimal k such that the untried discriminants reachable from the first
/// k * w signed primes are expected to leave at least 3 (round 1) or 1
/// (later rounds) N'.  Later rounds at least double the previous k.
inline KChoice choose_k(const std::vector<disc::PoolEntry>& universe, const std::vector<char>& tried,
                        std::size_t primes_available, const StepParams& p, unsigned round, std::size_t prev_k) {
  const double target = round <= 1 ? 3.0 : 1.0;
  std::vector<double> contrib(primes_available, 0.0);
  for (std::size_t i = 0; i < universe.size(); ++i) {
    if (tried[i] || universe[i].max_part_index >= primes_available) continue;
    contrib[universe[i].max_part_index] += expected_survivors(universe[i].disc.abs(), p.bits, p.log2_bound());
  }
  const std::size_t w = std::max(1u, p.workers);
  const std::size_t k_all = (primes_available + w - 1) / w;
  KChoice out;
  out.k = k_all;
  out.exhausted = true;
  double acc = 0;
  for (std::size_t i = 0; i < primes_available; ++i) {
    acc += contrib[i];
    if (acc >= target) {
      out.k = (i + 1 + w - 1) / w;
      out.exhausted = false;
      break;
    }
  }
  if (round > 1) out.k = std::max(out.k, 2 * prev_k);
  out.k = std::max<std::size_t>(1, std::min(out.k, k_all));
  out.expected = 0;
  for (std::size_t i = 0; i < std::min(primes_available, out.k * w); ++i) out.expected += contrib[i];
  return out;
}

struct Timings {
  double precompute = 0;  // substep 0: class numbers, prime products
  double roots = 0;       // substep 1
  double cornacchia = 0;  // substep 2
  double trialdiv = 0;    // substep 3
  double mr = 0;          // substep 4
  double phase2 = 0;      // class polynomial, root, curve, point

  Timings& operator+=(const Timings& o) {
    precompute += o.precompute;
    roots += o.roots;
    cornacchia += o.cornacchia;
    trialdiv += o.trialdiv;
    mr += o.mr;
    phase2 += o.phase2;
    return *this;
  }
  double total() const { return precompute + roots + cornacchia + trialdiv + mr + phase2; }
};

struct StepRecord {
  unsigned level = 0;
  unsigned bits = 0;
  unsigned nprime_bits = 0;
  std::int64_t d = 0;
  std::uint32_t h = 0;
  unsigned rounds = 0;
  std::size_t k = 0;
  std::size_t discriminants = 0;
  std::size_t cardinalities = 0;
  std::size_t candidates = 0;
  std::size_t phase2_attempts = 0;
  double expected = 0;
  Timings time;
};

enum class Status { proved, composite, give_up };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::proved: return "proved";
    case Status::composite: return "composite";
    case Status::give_up: return "give-up";
  }
  return "unknown";
}

struct StepOutcome {
  Status status = Status::give_up;
  cert::CertStep step;
  std::optional<CompositeEvidence> evidence;
  std::string message;
  StepRecord record;
};

struct RunReport {
  Int n;
  Status status = Status::give_up;
  unsigned workers = 1;
  std::uint64_t seed = 0;
  double log2_bound = 0;
  std::vector<StepRecord> steps;
  Timings time;
  double wall_seconds = 0;

  /// Mean of bits(N) - bits(N') over the steps.
  double mean_gain() const {
    if (steps.empty()) return 0;
    double s = 0;
    for (const auto& r : steps) s += static_cast<double>(r.bits) - r.nprime_bits;
    return s / static_cast<double>(steps.size());
  }

  std::string to_text() const {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(6);
    const double total = time.total();
    auto pct = [&](double x) { return total > 0 ? 100.0 * x / total : 0.0; };
    os << "fastecpp-report 1\n";
    os << "N=" << to_dec(n) << "\nbits=" << bit_size(n) << "\nstatus=" << to_string(status) << "\nworkers=" << workers
       << "\nseed=" << seed << "\nlog2B=" << log2_bound << "\nsteps=" << steps.size() << "\nwall_seconds=" << wall_seconds
       << "\n";
    const std::pair<const char*, double> parts[] = {
        {"substep0_precompute", time.precompute}, {"substep1_roots", time.roots},
        {"substep2_cornacchia", time.cornacchia}, {"substep3_trialdiv", time.trialdiv},
        {"substep4_mr", time.mr},                 {"phase2", time.phase2}};
    for (const auto& [name, secs] : parts)
      os << "seconds." << name << "=" << secs << "\npercent." << name << "=" << pct(secs) << "\n";
    os << "mean_gain=" << mean_gain() << "\ngain_over_log2B=" << (log2_bound > 0 ? mean_gain() / log2_bound : 0) << "\n";
    for (const auto& r : steps) {
      os << "step." << r.level << "=bits:" << r.bits << " nprime_bits:" << r.nprime_bits << " D:" << r.d
         << " h:" << r.h << " rounds:" << r.rounds << " k:" << r.k << " discriminants:" << r.discriminants
         << " cardinalities:" << r.cardinalities << " candidates:" << r.candidates
         << " phase2_attempts:" << r.phase2_attempts << " expected:" << r.expected << " seconds:" << r.time.total()
         << "\n";
    }
    return os.str();
  }
};

struct ProveResult {
  Status status = Status::give_up;
  cert::Certificate certificate;
  std::optional<CompositeEvidence> evidence;
  std::string message;
  RunReport report;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Pell {
  std::size_t entry;
  Int t, v;
};

struct Candidate {
  std::size_t entry;
  Int t, m, c, nprime;
};

// Traces t' with m = N + 1 +- t' for the curves of discriminant D: the
// solution itself, plus the extra twists of D = -4 and D = -3.
inline std::vector<Int> traces(std::int64_t d, const Int& t, const Int& v) {
  std::vector<Int> out{t};
  if (d == -4) {
    out.push_back(2 * v);
  } else if (d == -3) {
    out.push_back(abs(t + 3 * v) / 2);
    out.push_back(abs(t - 3 * v) / 2);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

class Prover {
 public:
  explicit Prover(ProverConfig cfg) : cfg_(std::move(cfg)), pool_(std::max(1u, cfg_.workers)) {
    if (cfg_.base_threshold > cert::terminal_bound() || cfg_.base_threshold < 5)
      throw std::invalid_argument("base threshold must lie in [5, 2^64]");
    if (cfg_.range_width < 2) throw std::invalid_argument("range width must be >= 2");
  }

  const ProverConfig& config() const { return cfg_; }
  WorkerPool& pool() { return pool_; }

  /// One downrun step for a probable prime N.
  StepOutcome run_step(const Int& n, unsigned level = 0) {
    StepOutcome out;
    StepRecord& rec = out.record;
    rec.level = level;
    rec.bits = static_cast<unsigned>(bit_size(n));
    if (n < 5 || mpz_even_p(n.get_mpz_t()))
      throw std::invalid_argument("run_step: N must be odd and >= 5");
    StepParams params = select_params(n, cfg_);
    const std::uint64_t step_seed = splitmix64(cfg_.seed ^ splitmix64(level + 1));

    auto t0 = std::chrono::steady_clock::now();
    const auto& table = class_numbers(params.dmax);
    const auto& products = prime_products(params);
    rec.time.precompute += detail::seconds_since(t0);

    auto composite = [&](CompositeEvidence ev) {
      out.status = Status::composite;
      out.evidence = std::move(ev);
      return out;
    };

    auto sp = disc::signed_primes(n, cfg_.signed_prime_cap);
    if (auto* ev = std::get_if<CompositeEvidence>(&sp)) return composite(*ev);
    const auto& primes = std::get<std::vector<disc::SignedPrime>>(sp);
    const disc::PoolLimits lim{params.dmax, params.hmax, params.pmax, params.maxparts};
    const auto universe = disc::enumerate_pool(primes, table, lim);
    std::vector<char> tried(universe.size(), 0);
    for (std::size_t i = 0; i < universe.size(); ++i)
      if (Int(static_cast<unsigned long>(universe[i].disc.abs())) >= 4 * n) tried[i] = 1;  // Cornacchia needs |D| < 4N
    std::vector<std::optional<Int>> roots(primes.size());
    std::size_t have_roots = 0;

    std::size_t prev_k = 0;
    for (unsigned round = 1; round <= cfg_.round_cap; ++round) {
      rec.rounds = round;
      const KChoice kc = choose_k(universe, tried, primes.size(), params, round, prev_k);
      params.k = prev_k = kc.k;
      rec.k = kc.k;
      rec.expected = kc.expected;
      if (kc.exhausted) say(level, round, "warning: signed-prime budget too small for the survivor target");
      const std::size_t count = std::min(primes.size(), kc.k * params.workers);

      // Substep 1.
      t0 = std::chrono::steady_clock::now();
      if (count > have_roots) {
        auto fresh = pool_.map(count - have_roots, [&](std::size_t i) { return numth::sqrt_mod(from_i64(primes[have_roots + i].value), n); });
        for (std::size_t i = 0; i < fresh.size(); ++i) {
          const Int q = from_i64(primes[have_roots + i].value);
          if (!fresh[i] || mod(*fresh[i] * *fresh[i] - q, n) != 0)
            return composite({EvidenceKind::impossible_arithmetic, std::nullopt, "square root of a residue failed"});
          roots[have_roots + i] = std::move(fresh[i]);
        }
        have_roots = count;
      }
      rec.time.roots += detail::seconds_since(t0);
      say(level, round, "substep=1 primes=" + std::to_string(count) + " k=" + std::to_string(kc.k) +
                            " expected=" + std::to_string(kc.expected) + " seconds=" + std::to_string(detail::seconds_since(t0)));

      // Substep 2: all reachable, untried discriminants.
      t0 = std::chrono::steady_clock::now();
      std::vector<std::size_t> batch;
      for (std::size_t i = 0; i < universe.size(); ++i) {
        if (tried[i] || universe[i].max_part_index >= count) continue;
        tried[i] = 1;
        batch.push_back(i);
      }
      rec.discriminants += batch.size();
      auto pell = pool_.map(batch.size(), [&](std::size_t j) -> std::optional<detail::Pell> {
        const auto& e = universe[batch[j]];
        Int root = 1;
        for (const auto& part : e.disc.parts) {
          const auto it = std::lower_bound(primes.begin(), primes.end(), part);
          root = mod(root * *roots[static_cast<std::size_t>(it - primes.begin())], n);
        }
        auto sol = numth::cornacchia(n, from_i64(e.disc.d), root);
        if (!sol) return std::nullopt;
        return detail::Pell{batch[j], sol->t, sol->v};
      });
      std::vector<Int> ms;
      std::vector<std::pair<std::size_t, Int>> meta;  // (entry, t') per m
      for (const auto& s : pell) {
        if (!s) continue;
        for (const Int& tr : detail::traces(universe[s->entry].disc.d, s->t, s->v)) {
          for (int sign : {-1, 1}) {
            if (sign == 1 && tr == 0) continue;
            const Int m = n + 1 + sign * tr;
            if (m < 2) continue;
            ms.push_back(m);
            meta.emplace_back(s->entry, tr);
          }
        }
      }
      rec.cardinalities += ms.size();
      rec.time.cornacchia += detail::seconds_since(t0);
      say(level, round, "substep=2 discriminants=" + std::to_string(batch.size()) + " cardinalities=" +
                            std::to_string(ms.size()) + " seconds=" + std::to_string(detail::seconds_since(t0)));

      // Substep 3.
      t0 = std::chrono::steady_clock::now();
      const auto splits = trialdiv::batch_factor(ms, products, cfg_.batches, pool_);
      std::vector<detail::Candidate> cands;
      for (std::size_t i = 0; i < splits.size(); ++i) {
        const auto& s = splits[i];
        if (s.c < 2 || bit_size(s.rough) >= bit_size(n) || !curve::nprime_above_floor(s.rough, n)) continue;
        cands.push_back({meta[i].first, meta[i].second, s.m, s.c, s.rough});
      }
      std::stable_sort(cands.begin(), cands.end(), [](const auto& x, const auto& y) { return x.nprime < y.nprime; });
      rec.candidates += cands.size();
      rec.time.trialdiv += detail::seconds_since(t0);
      say(level, round, "substep=3 smooth_candidates=" + std::to_string(cands.size()) +
                            " seconds=" + std::to_string(detail::seconds_since(t0)));

      // Substep 4 and phase 2, smallest N' first, tests in batches of w.
      for (std::size_t first = 0; first < cands.size(); first += params.workers) {
        const std::size_t last = std::min(cands.size(), first + params.workers);
        t0 = std::chrono::steady_clock::now();
        auto prime = pool_.map(last - first, [&](std::size_t j) -> char {
          return numth::is_probable_prime(cands[first + j].nprime, cfg_.mr_rounds) ? 1 : 0;
        });
        rec.time.mr += detail::seconds_since(t0);
        for (std::size_t j = 0; j < prime.size(); ++j) {
          if (!prime[j]) continue;
          const auto& cand = cands[first + j];
          t0 = std::chrono::steady_clock::now();
          ++rec.phase2_attempts;
          auto built = phase2(n, universe[cand.entry].disc, cand, step_seed ^ splitmix64(rec.phase2_attempts));
          rec.time.phase2 += detail::seconds_since(t0);
          if (auto* ev = std::get_if<CompositeEvidence>(&built)) return composite(*ev);
          if (auto& st = std::get<std::optional<cert::CertStep>>(built)) {
            out.status = Status::proved;
            out.step = *st;
            rec.d = universe[cand.entry].disc.d;
            rec.h = universe[cand.entry].disc.h;
            rec.nprime_bits = static_cast<unsigned>(bit_size(cand.nprime));
            say(level, round, "substep=4 accepted D=" + std::to_string(rec.d) + " h=" + std::to_string(rec.h) +
                                  " nprime_bits=" + std::to_string(rec.nprime_bits) +
                                  " phase2_attempts=" + std::to_string(rec.phase2_attempts));
            return out;
          }
          say(level, round, "phase2 failure for D=" + std::to_string(universe[cand.entry].disc.d) + ", falling back");
        }
      }
      say(level, round, "substep=4 no surviving candidate");
      const bool all_tried = count == primes.size() &&
                             std::all_of(tried.begin(), tried.end(), [](char c) { return c != 0; });
      if (all_tried) break;
    }
    out.status = Status::give_up;
    out.message = "no candidate after " + std::to_string(rec.rounds) + " rounds";
    return out;
  }

  ProveResult prove(const Int& n) {
    if (n < 2) throw std::invalid_argument("prove: N must be >= 2");
    const auto start = std::chrono::steady_clock::now();
    ProveResult res;
    res.report.n = n;
    res.report.workers = pool_.size();
    res.report.seed = cfg_.seed;
    auto finish = [&](Status s) {
      res.status = s;
      res.report.status = s;
      res.report.wall_seconds = detail::seconds_since(start);
      for (const auto& r : res.report.steps) res.report.time += r.time;
      return res;
    };
    if (n < cfg_.base_threshold) {
      if (!numth::is_probable_prime(n)) {
        res.evidence = CompositeEvidence{EvidenceKind::impossible_arithmetic, std::nullopt, "deterministic test failed"};
        return finish(Status::composite);
      }
      res.certificate.terminal = n;
      return finish(Status::proved);
    }
    if (mpz_even_p(n.get_mpz_t())) {
      res.evidence = evidence_from_gcd(Int(2), n, "even");
      return finish(Status::composite);
    }
    if (!numth::is_probable_prime(n, cfg_.mr_rounds)) {
      res.evidence = CompositeEvidence{EvidenceKind::impossible_arithmetic, std::nullopt, "Miller-Rabin witness"};
      return finish(Status::composite);
    }
    res.report.log2_bound = select_params(n, cfg_).log2_bound();
    Int cur = n;
    for (unsigned level = 0; cur >= cfg_.base_threshold; ++level) {
      auto st = run_step(cur, level);
      res.report.steps.push_back(st.record);
      if (st.status == Status::composite) {
        res.evidence = st.evidence;
        if (level == 0) return finish(Status::composite);
        res.message = "an intermediate probable prime turned out composite";
        return finish(Status::give_up);
      }
      if (st.status == Status::give_up) {
        res.message = st.message;
        return finish(Status::give_up);
      }
      res.certificate.steps.push_back(st.step);
      cur = st.step.nprime;
    }
    if (!numth::is_probable_prime(cur)) {
      res.message = "terminal value failed the deterministic test";
      return finish(Status::give_up);
    }
    res.certificate.terminal = cur;
    return finish(Status::proved);
  }

 private:
  void say(unsigned level, unsigned round, const std::string& msg) {
    if (cfg_.progress) *cfg_.progress << "[fastecpp] level=" << level << " round=" << round << " " << msg << "\n";
  }

  const disc::ClassNumberTable& class_numbers(std::uint64_t dmax) {
    auto it = tables_.find(dmax);
    if (it == tables_.end()) {
      it = tables_.emplace(dmax, cfg_.cache_dir.empty() ? disc::class_number_table(dmax, pool_)
                                                        : disc::cached_class_number_table(dmax, pool_, cfg_.cache_dir))
               .first;
    }
    return it->second;
  }

  const std::vector<trialdiv::PrimeProduct>& prime_products(const StepParams& p) {
    const auto key = std::make_pair(p.range_width, p.ranges);
    auto it = products_.find(key);
    if (it == products_.end()) {
      it = products_.emplace(key, trialdiv::cached_prime_products(p.range_width, p.ranges, pool_, cfg_.cache_dir)).first;
    }
    return it->second;
  }

  const cm::ClassPolynomial& class_poly(const disc::Disc& d) {
    auto it = polys_.find(d.d);
    if (it != polys_.end()) return it->second;
    std::filesystem::path path;
    if (!cfg_.cache_dir.empty()) {
      std::filesystem::create_directories(cfg_.cache_dir);
      path = cfg_.cache_dir / ("classpoly-" + std::to_string(d.abs()) + ".bin");
      if (std::filesystem::exists(path)) {
        try {
          auto h = cm::load_class_poly(path);
          if (h.d == d.d && h.degree() == d.h) return polys_.emplace(d.d, std::move(h)).first->second;
        } catch (const std::exception&) {
          // rebuild
        }
      }
    }
    auto h = cm::hilbert_class_poly(d.d, cfg_.hmax, &pool_);
    if (!path.empty()) cm::save_class_poly(h, path);
    return polys_.emplace(d.d, std::move(h)).first->second;
  }

  OrComposite<std::optional<cert::CertStep>> phase2(const Int& n, const disc::Disc& d, const detail::Candidate& cand,
                                                    std::uint64_t seed) {
    const auto& h = class_poly(d);
    auto j0 = cm::root_mod(h, n, seed);
    if (auto* ev = std::get_if<CompositeEvidence>(&j0)) return *ev;
    auto curves = curve::curves_from_j(std::get<Int>(j0), n);
    if (auto* ev = std::get_if<CompositeEvidence>(&curves)) return *ev;
    auto found = curve::find_order_point(std::get<std::vector<curve::Curve>>(curves), cand.m, cand.c, cand.nprime,
                                         splitmix64(seed), cfg_.points_per_curve);
    if (auto* ev = std::get_if<CompositeEvidence>(&found)) return *ev;
    const auto& op = std::get<std::optional<curve::OrderPoint>>(found);
    if (!op) return std::optional<cert::CertStep>();
    cert::CertStep s{n, from_i64(d.d), cand.t, cand.m, cand.c, cand.nprime, op->curve.a, op->curve.b, op->p.x, op->p.y};
    if (auto bad = cert::verify_step(s))
      return CompositeEvidence{EvidenceKind::order_check_failed, std::nullopt,
                               std::string("constructed step rejected: ") + cert::to_string(*bad)};
    return std::optional<cert::CertStep>(s);
  }

  ProverConfig cfg_;
  WorkerPool pool_;
  std::map<std::uint64_t, disc::ClassNumberTable> tables_;
  std::map<std::pair<std::uint64_t, unsigned>, std::vector<trialdiv::PrimeProduct>> products_;
  std::map<std::int64_t, cm::ClassPolynomial> polys_;
};

inline ProveResult prove(const Int& n, const ProverConfig& cfg) {
  Prover p(cfg);
  return p.prove(n);
}

}  // namespace fastecpp::prover
