#pragma once

// Primality certificates: a chain of curve steps N -> N' -> ... ending in a
// terminal value below 2^64 that the deterministic probable-prime test
// settles outright.  The verifier trusts nothing in the file.
//
// Text form (LF line endings, single spaces, canonical decimals):
//
//   FASTECPP-CERT 1
//   step N=<n> D=<d> t=<t> m=<m> c=<c> Nprime=<n'> a=<a> b=<b> x=<x> y=<y>
//   ...
//   terminal N=<n>
//
// The grammar and the checks are described in docs/certificate-format.md.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fastecpp/bigint.hpp"
#include "fastecpp/curve.hpp"
#include "fastecpp/disc.hpp"
#include "fastecpp/numth.hpp"
#include "fastecpp/parallel.hpp"

namespace fastecpp::cert {

struct CertStep {
  Int n, d, t, m, c, nprime, a, b, x, y;
  bool operator==(const CertStep&) const = default;
};

struct Certificate {
  std::vector<CertStep> steps;
  Int terminal;
  bool operator==(const Certificate&) const = default;

  /// The number this certificate proves prime.
  const Int& subject() const { return steps.empty() ? terminal : steps.front().n; }
};

enum class Reason {
  accepted,
  bad_range,          // a field outside its canonical range
  bad_discriminant,   // D not fundamental or inconsistent with (N, t)
  bad_cardinality,    // m not in {N + 1 - t, N + 1 + t}
  bad_cofactor,       // c < 2 or c * N' != m
  small_nprime,       // N' <= (N^(1/4) + 1)^2
  size_not_decreasing,
  singular_curve,
  off_curve,
  order_check_failed,
  linkage,            // N of a step differs from N' of the previous one
  terminal,           // terminal too large or not prime
};

inline const char* to_string(Reason r) {
  switch (r) {
    case Reason::accepted: return "accepted";
    case Reason::bad_range: return "bad-range";
    case Reason::bad_discriminant: return "bad-discriminant";
    case Reason::bad_cardinality: return "bad-cardinality";
    case Reason::bad_cofactor: return "bad-cofactor";
    case Reason::small_nprime: return "small-Nprime";
    case Reason::size_not_decreasing: return "size-not-decreasing";
    case Reason::singular_curve: return "singular-curve";
    case Reason::off_curve: return "off-curve";
    case Reason::order_check_failed: return "order-check-failed";
    case Reason::linkage: return "linkage";
    case Reason::terminal: return "terminal";
  }
  return "unknown";
}

inline const Int& terminal_bound() { return numth::deterministic_bound(); }

/// nullopt means accepted.
inline std::optional<Reason> verify_step(const CertStep& s) {
  const Int& n = s.n;
  if (n < 5 || mpz_even_p(n.get_mpz_t()) || mpz_divisible_ui_p(n.get_mpz_t(), 3)) return Reason::bad_range;
  for (const Int* v : {&s.a, &s.b, &s.x, &s.y})
    if (*v < 0 || *v >= n) return Reason::bad_range;
  if (s.t < 0 || s.t * s.t > 4 * n) return Reason::bad_range;

  if (s.d >= 0 || !mpz_fits_slong_p(s.d.get_mpz_t()) || !disc::is_fundamental(s.d.get_si())) return Reason::bad_discriminant;
  {
    const Int rest = 4 * n - s.t * s.t;
    const Int abs_d = -s.d;
    if (rest <= 0 || !mpz_divisible_p(rest.get_mpz_t(), abs_d.get_mpz_t()) || !is_square(rest / abs_d))
      return Reason::bad_discriminant;
  }
  if (s.m != n + 1 - s.t && s.m != n + 1 + s.t) return Reason::bad_cardinality;
  if (s.c < 2 || s.nprime < 1 || s.c * s.nprime != s.m) return Reason::bad_cofactor;
  if (!curve::nprime_above_floor(s.nprime, n)) return Reason::small_nprime;
  if (bit_size(s.nprime) >= bit_size(n)) return Reason::size_not_decreasing;

  if (gcd(curve::discriminant_part(s.a, s.b, n), n) != 1) return Reason::singular_curve;
  const curve::Curve e{n, s.a, s.b};
  const curve::Point p{s.x, s.y, false};
  if (!curve::on_curve(e, p)) return Reason::off_curve;

  auto q = curve::scalar_mul(p, s.c, e);
  if (std::holds_alternative<CompositeEvidence>(q) || std::get<curve::Point>(q).infinity) return Reason::order_check_failed;
  auto r = curve::scalar_mul(std::get<curve::Point>(q), s.nprime, e);
  if (std::holds_alternative<CompositeEvidence>(r) || !std::get<curve::Point>(r).infinity) return Reason::order_check_failed;
  return std::nullopt;
}

inline bool terminal_ok(const Int& t) {
  return t >= 2 && t < terminal_bound() && numth::is_probable_prime(t);
}

struct Verdict {
  bool accepted = true;
  std::size_t index = 0;  // failing step; steps.size() for the terminal
  Reason reason = Reason::accepted;
  std::vector<double> step_seconds;

  double total_seconds() const {
    double s = 0;
    for (double x : step_seconds) s += x;
    return s;
  }
  double critical_path_seconds() const {
    double s = 0;
    for (double x : step_seconds) s = std::max(s, x);
    return s;
  }
};

/// All steps in parallel, then linkage and the terminal.  On failure the
/// lowest failing index is reported.
inline Verdict verify(const Certificate& cert, WorkerPool& pool) {
  const std::size_t n = cert.steps.size();
  std::vector<std::optional<Reason>> results(n);
  std::vector<double> seconds(n);
  pool.parallel_for(n, [&](std::size_t i) {
    const auto start = std::chrono::steady_clock::now();
    results[i] = verify_step(cert.steps[i]);
    seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });
  Verdict v;
  v.step_seconds = seconds;
  for (std::size_t i = 0; i <= n; ++i) {
    std::optional<Reason> bad;
    if (i < n) {
      if (i > 0 && cert.steps[i].n != cert.steps[i - 1].nprime)
        bad = Reason::linkage;
      else
        bad = results[i];
    } else if (n > 0 && cert.terminal != cert.steps.back().nprime) {
      bad = Reason::linkage;
    } else if (!terminal_ok(cert.terminal)) {
      bad = Reason::terminal;
    }
    if (bad) {
      v.accepted = false;
      v.index = i;
      v.reason = *bad;
      return v;
    }
  }
  return v;
}

inline Verdict verify(const Certificate& cert, unsigned workers = 1) {
  WorkerPool pool(workers);
  return verify(cert, pool);
}

// Text format.

inline constexpr std::string_view kHeader = "FASTECPP-CERT 1";

struct ParseError : std::runtime_error {
  std::size_t line;
  ParseError(std::size_t l, const std::string& what)
      : std::runtime_error("line " + std::to_string(l) + ": " + what), line(l) {}
};

inline std::string serialize(const Certificate& c) {
  std::string out(kHeader);
  out += '\n';
  for (const auto& s : c.steps) {
    out += "step N=" + to_dec(s.n) + " D=" + to_dec(s.d) + " t=" + to_dec(s.t) + " m=" + to_dec(s.m) +
           " c=" + to_dec(s.c) + " Nprime=" + to_dec(s.nprime) + " a=" + to_dec(s.a) + " b=" + to_dec(s.b) +
           " x=" + to_dec(s.x) + " y=" + to_dec(s.y) + '\n';
  }
  out += "terminal N=" + to_dec(c.terminal) + '\n';
  return out;
}

namespace detail {

inline std::vector<std::string_view> split_spaces(std::string_view line, std::size_t lineno) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t sp = line.find(' ', start);
    const std::string_view tok = line.substr(start, sp == std::string_view::npos ? std::string_view::npos : sp - start);
    if (tok.empty()) throw ParseError(lineno, "non-canonical whitespace");
    out.push_back(tok);
    if (sp == std::string_view::npos) break;
    start = sp + 1;
  }
  return out;
}

inline Int field(std::string_view tok, std::string_view key, std::size_t lineno) {
  if (tok.size() <= key.size() || tok.substr(0, key.size()) != key || tok[key.size()] != '=')
    throw ParseError(lineno, "expected key '" + std::string(key) + "'");
  auto v = parse_canonical_dec(tok.substr(key.size() + 1));
  if (!v) throw ParseError(lineno, "non-canonical integer for '" + std::string(key) + "'");
  return *v;
}

}  // namespace detail

inline Certificate parse(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) throw ParseError(lines.size() + 1, "missing final newline");
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  if (lines.empty()) throw ParseError(1, "empty certificate");
  for (std::size_t i = 0; i < lines.size(); ++i)
    if (lines[i].find_first_of("\r\t") != std::string_view::npos) throw ParseError(i + 1, "non-canonical whitespace");
  if (lines[0] != kHeader) {
    if (lines[0].substr(0, 14) == kHeader.substr(0, 14)) throw ParseError(1, "unsupported format version");
    throw ParseError(1, "missing header");
  }
  static constexpr std::string_view kKeys[] = {"N", "D", "t", "m", "c", "Nprime", "a", "b", "x", "y"};
  Certificate cert;
  bool have_terminal = false;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (have_terminal) throw ParseError(lineno, "record after terminal");
    const auto toks = detail::split_spaces(lines[i], lineno);
    if (toks[0] == "step") {
      if (toks.size() != 11) throw ParseError(lineno, "step record needs 10 fields");
      CertStep s;
      Int* slots[] = {&s.n, &s.d, &s.t, &s.m, &s.c, &s.nprime, &s.a, &s.b, &s.x, &s.y};
      for (std::size_t k = 0; k < 10; ++k) *slots[k] = detail::field(toks[k + 1], kKeys[k], lineno);
      cert.steps.push_back(std::move(s));
    } else if (toks[0] == "terminal") {
      if (toks.size() != 2) throw ParseError(lineno, "terminal record needs 1 field");
      cert.terminal = detail::field(toks[1], "N", lineno);
      have_terminal = true;
    } else {
      throw ParseError(lineno, "unknown record '" + std::string(toks[0]) + "'");
    }
  }
  if (!have_terminal) throw ParseError(lines.size() + 1, "missing terminal record");
  return cert;
}

inline void save(const Certificate& c, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << serialize(c);
  if (!f) throw std::runtime_error("write failed: " + path);
}

/// Throws std::runtime_error on I/O failure and ParseError on bad content.
inline Certificate load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

}  // namespace fastecpp::cert
