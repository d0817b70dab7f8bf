// fastecpp: prove, verify, stats, bench.
// Exit codes: 0 ok, 1 mathematical reject (composite, bad certificate),
// 2 I/O or parse error, 3 give-up.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fastecpp/fastecpp.hpp"

namespace {

using namespace fastecpp;

constexpr int kOk = 0;
constexpr int kReject = 1;
constexpr int kIo = 2;
constexpr int kGiveUp = 3;

struct ProverFlags {
  unsigned workers = 1;
  std::uint64_t seed = 1;
  std::string range_width = "2^24";
  unsigned ranges = 0;
  std::string dmax_cap = "2^20";
  std::uint32_t hmax = 64;
  std::uint32_t pmax = 0;
  unsigned maxparts = 3;
  unsigned round_cap = 8;
  std::string cache_dir;
  bool quiet = false;

  void add(CLI::App* app) {
    app->add_option("-w,--workers", workers, "worker threads")->capture_default_str()->check(CLI::Range(1u, 1024u));
    app->add_option("--seed", seed, "randomness seed")->capture_default_str();
    app->add_option("--range-width", range_width, "width of one prime range for trial division")->capture_default_str();
    app->add_option("--ranges", ranges, "prime ranges (0: max(1, workers/16))")->capture_default_str();
    app->add_option("--dmax-cap", dmax_cap, "cap on the discriminant bound")->capture_default_str();
    app->add_option("--hmax", hmax, "largest admissible class number")->capture_default_str()->check(CLI::Range(1u, 4096u));
    app->add_option("--pmax", pmax, "largest prime factor of h (0: max(29, L/1024))")->capture_default_str();
    app->add_option("--maxparts", maxparts, "signed primes per discriminant")->capture_default_str()->check(CLI::Range(1u, 7u));
    app->add_option("--round-cap", round_cap, "rounds per step before giving up")->capture_default_str()->check(CLI::Range(1u, 64u));
    app->add_option("--cache-dir", cache_dir, "directory for class-number, prime-product and class-polynomial caches");
    app->add_flag("-q,--quiet", quiet, "no progress output");
  }

  prover::ProverConfig config() const {
    prover::ProverConfig c;
    c.workers = workers;
    c.seed = seed;
    const Int width = input::parse_expression(range_width);
    const Int cap = input::parse_expression(dmax_cap);
    if (width < 16 || !fits_u64(width) || width > pow2(40)) throw std::invalid_argument("--range-width out of range");
    if (cap < 16 || !fits_u64(cap) || cap > pow2(35)) throw std::invalid_argument("--dmax-cap out of range");
    c.range_width = to_u64(width);
    c.ranges = ranges;
    c.dmax_cap = to_u64(cap);
    c.hmax = hmax;
    if (pmax) c.pmax = pmax;
    c.maxparts = maxparts;
    c.round_cap = round_cap;
    c.cache_dir = cache_dir;
    c.progress = quiet ? nullptr : &std::cerr;
    return c;
  }
};

void print_evidence(const CompositeEvidence& ev) {
  std::cout << "evidence=" << to_string(ev.kind);
  if (ev.factor) std::cout << " factor=" << to_dec(*ev.factor);
  if (!ev.detail.empty()) std::cout << " detail=\"" << ev.detail << "\"";
  std::cout << "\n";
}

int cmd_prove(const std::string& expr, const ProverFlags& flags, const std::string& out_path,
              const std::string& report_path) {
  const Int n = input::parse_expression(expr);
  auto cfg = flags.config();
  const auto res = prover::prove(n, cfg);
  if (!report_path.empty()) {
    std::ofstream f(report_path);
    f << res.report.to_text();
    if (!f) {
      std::cerr << "error: cannot write report " << report_path << "\n";
      return kIo;
    }
  }
  switch (res.status) {
    case prover::Status::composite:
      std::cout << "composite N=" << to_dec(n) << "\n";
      if (res.evidence) print_evidence(*res.evidence);
      return kReject;
    case prover::Status::give_up:
      std::cout << "give-up N=" << to_dec(n) << " reason=\"" << res.message << "\"\n";
      return kGiveUp;
    case prover::Status::proved: break;
  }
  try {
    cert::save(res.certificate, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  }
  // Closure check: what was written must parse back and verify.
  const auto reread = cert::load(out_path);
  const auto v = cert::verify(reread, cfg.workers);
  if (!v.accepted || reread != res.certificate) {
    std::cout << "internal error: written certificate does not verify (step " << v.index << ", "
              << cert::to_string(v.reason) << ")\n";
    return kReject;
  }
  const auto& rep = res.report;
  const double total = rep.time.total();
  auto pct = [&](double x) { return total > 0 ? 100.0 * x / total : 0.0; };
  std::cout << "proved N=" << to_dec(n) << "\n";
  std::cout << "bits=" << bit_size(n) << " steps=" << res.certificate.steps.size() << " certificate=" << out_path
            << "\n";
  std::cout << std::fixed << std::setprecision(1) << "time " << rep.wall_seconds << "s: precompute "
            << pct(rep.time.precompute) << "%, roots " << pct(rep.time.roots) << "%, cornacchia "
            << pct(rep.time.cornacchia) << "%, trial division " << pct(rep.time.trialdiv) << "%, miller-rabin "
            << pct(rep.time.mr) << "%, phase 2 " << pct(rep.time.phase2) << "%\n";
  std::cout << std::setprecision(3) << "mean gain " << rep.mean_gain() << " bits/step = "
            << (rep.log2_bound > 0 ? rep.mean_gain() / rep.log2_bound : 0) << " log2(B)\n";
  return kOk;
}

int cmd_verify(const std::string& path, unsigned workers) {
  cert::Certificate c;
  try {
    c = cert::load(path);
  } catch (const std::exception& e) {
    std::cout << "error: " << e.what() << "\n";
    return kIo;
  }
  const auto v = cert::verify(c, workers);
  std::cout << std::fixed << std::setprecision(6);
  if (!v.accepted) {
    std::cout << "REJECT step=" << v.index << " reason=" << cert::to_string(v.reason) << "\n";
    return kReject;
  }
  std::cout << "ACCEPT N=" << to_dec(c.subject()) << " steps=" << c.steps.size() << " seconds.total="
            << v.total_seconds() << " seconds.critical_path=" << v.critical_path_seconds() << "\n";
  return kOk;
}

int cmd_stats(unsigned bits, const std::string& bound_expr, std::uint64_t samples, std::uint64_t seed,
              unsigned workers, const std::string& format, const std::string& histogram, bool analytic_only) {
  const auto b = stats::bucket_probabilities();
  std::cout << std::fixed << std::setprecision(6);
  std::cout << "analytic p(alpha<=1)=" << b.p1 << " p(1<alpha<=2)=" << b.p2 << " p(alpha>2)=" << b.p_tail_bound
            << " p(alpha>e)<=" << b.p_gt_e_bound << " (bound)\n";
  const double q = (3 - 2 * std::numbers::ln2) / stats::exp_gamma();
  std::cout << "max-statistics gain, q=(3-2ln2)/e^gamma, n=8.9: " << stats::max_statistics_gain(1 - q, 8.9) << "\n";
  if (analytic_only) return kOk;
  const Int bound = input::parse_expression(bound_expr);
  if (bound < 1024 || !fits_u64(bound) || bound > pow2(32)) throw std::invalid_argument("--bound out of range");
  if (bits < 64) throw std::invalid_argument("--bits must be >= 64");
  const auto r = stats::sample(bits, to_u64(bound), samples, seed, workers);
  std::cout << (format == "kv" ? stats::format_kv(r) : stats::format_table(r));
  if (!histogram.empty()) {
    std::ofstream f(histogram);
    f << stats::format_histogram_csv(r);
    if (!f) {
      std::cerr << "error: cannot write " << histogram << "\n";
      return kIo;
    }
  }
  return kOk;
}

int cmd_bench(const std::vector<unsigned>& digits, const ProverFlags& flags, unsigned max_digits) {
  auto cfg = flags.config();
  prover::Prover p(cfg);
  std::cout << std::left << std::setw(8) << "digits" << std::right << std::setw(8) << "log2B" << std::setw(8)
            << "steps" << std::setw(12) << "time[s]" << std::setw(10) << "gain/B" << std::setw(10) << "verify"
            << "\n";
  double gain_sum = 0;
  std::size_t step_sum = 0;
  bool all_ok = true;
  for (unsigned d : digits) {
    if (d > max_digits) throw std::invalid_argument("digit count above --max-digits");
    const Int n = input::next_probable_prime(pow_ui(Int(10), d));
    const auto res = p.prove(n);
    const bool ok = res.status == prover::Status::proved && cert::verify(res.certificate, p.pool()).accepted;
    all_ok = all_ok && ok;
    const double log2b = res.report.log2_bound;
    for (const auto& s : res.report.steps) gain_sum += static_cast<double>(s.bits) - s.nprime_bits;
    step_sum += res.report.steps.size();
    std::cout << std::left << std::setw(8) << d << std::right << std::fixed << std::setprecision(1) << std::setw(8)
              << log2b << std::setw(8) << res.certificate.steps.size() << std::setw(12) << std::setprecision(2)
              << res.report.wall_seconds << std::setw(10)
              << (log2b > 0 ? res.report.mean_gain() / log2b : 0) << std::setw(10)
              << (ok ? "ok" : prover::to_string(res.status)) << "\n";
  }
  if (step_sum) {
    const double log2b = prover::select_params(pow2(64), cfg).log2_bound();
    std::cout << "mean gain per step: " << std::setprecision(2) << gain_sum / static_cast<double>(step_sum)
              << " bits = " << gain_sum / static_cast<double>(step_sum) / log2b << " log2(B)\n";
  }
  return all_ok ? kOk : kReject;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FastECPP primality prover"};
  app.require_subcommand(1);

  ProverFlags prove_flags;
  std::string number, out_path = "certificate.txt", report_path;
  auto* prove = app.add_subcommand("prove", "prove a number prime and write a certificate");
  prove->add_option("number", number, "decimal, a^b+c, or first-prime-after:<expr>")->required();
  prove->add_option("-o,--out", out_path, "certificate path")->capture_default_str();
  prove->add_option("--report", report_path, "run report path (key=value text)");
  prove_flags.add(prove);

  std::string cert_path;
  unsigned verify_workers = 1;
  auto* verify = app.add_subcommand("verify", "verify a certificate file");
  verify->add_option("certificate", cert_path, "certificate path")->required();
  verify->add_option("-w,--workers", verify_workers, "worker threads")->capture_default_str()->check(CLI::Range(1u, 1024u));

  unsigned stat_bits = 256, stat_workers = 1;
  std::string stat_bound = "2^20", stat_format = "table", stat_hist;
  std::uint64_t stat_samples = 100000, stat_seed = 1;
  bool analytic_only = false;
  auto* st = app.add_subcommand("stats", "smooth-cofactor distribution, analytic and sampled");
  st->add_option("--bits", stat_bits, "bit size L of the samples")->capture_default_str();
  st->add_option("--bound", stat_bound, "smoothness bound B")->capture_default_str();
  st->add_option("--samples", stat_samples, "number of samples")->capture_default_str();
  st->add_option("--seed", stat_seed, "randomness seed")->capture_default_str();
  st->add_option("-w,--workers", stat_workers, "worker threads")->capture_default_str()->check(CLI::Range(1u, 1024u));
  st->add_option("--format", stat_format, "table or kv")->capture_default_str()->check(CLI::IsMember({"table", "kv"}));
  st->add_option("--histogram", stat_hist, "write the alpha histogram as CSV to this path");
  st->add_flag("--analytic-only", analytic_only, "skip sampling");

  ProverFlags bench_flags;
  bench_flags.quiet = true;
  std::vector<unsigned> digits;
  unsigned max_digits = 1000;
  auto* bench = app.add_subcommand("bench", "prove the first prime after 10^d for each d");
  bench->add_option("digits", digits, "list of d");
  bench->add_option("--max-digits", max_digits, "largest accepted d")->capture_default_str();
  bench_flags.add(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kIo;
  }

  try {
    if (*prove) return cmd_prove(number, prove_flags, out_path, report_path);
    if (*verify) return cmd_verify(cert_path, verify_workers);
    if (*st) return cmd_stats(stat_bits, stat_bound, stat_samples, stat_seed, stat_workers, stat_format, stat_hist, analytic_only);
    if (*bench) return cmd_bench(digits, bench_flags, max_digits);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  }
  return kIo;
}
