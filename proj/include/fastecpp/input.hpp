#pragma once

// Number expressions accepted on the command line:
//   123456789            decimal
//   10^20+39, 2^127-1    power with an optional signed offset
//   first-prime-after:E  smallest probable prime > E

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "fastecpp/bigint.hpp"
#include "fastecpp/numth.hpp"

namespace fastecpp::input {

/// Smallest probable prime strictly greater than n.
inline Int next_probable_prime(const Int& n) {
  Int c = n < 2 ? Int(2) : n + 1;
  if (c > 2 && mpz_even_p(c.get_mpz_t())) c += 1;
  while (!numth::is_probable_prime(c)) c += c == 2 ? 1 : 2;
  return c;
}

namespace detail {

inline Int plain(std::string_view s, std::string_view whole) {
  auto v = parse_canonical_dec(s);
  if (!v || *v < 0) throw std::invalid_argument("bad number expression: " + std::string(whole));
  return *v;
}

}  // namespace detail

inline Int parse_expression(std::string_view s) {
  constexpr std::string_view kNext = "first-prime-after:";
  if (s.substr(0, kNext.size()) == kNext) return next_probable_prime(parse_expression(s.substr(kNext.size())));
  const std::size_t caret = s.find('^');
  if (caret == std::string_view::npos) return detail::plain(s, s);
  const Int base = detail::plain(s.substr(0, caret), s);
  std::string_view rest = s.substr(caret + 1);
  const std::size_t op = rest.find_first_of("+-");
  const Int exp = detail::plain(rest.substr(0, op), s);
  if (!mpz_fits_ulong_p(exp.get_mpz_t()) || exp > 1000000) throw std::invalid_argument("exponent too large: " + std::string(s));
  Int v = pow_ui(base, exp.get_ui());
  if (op != std::string_view::npos) {
    const Int off = detail::plain(rest.substr(op + 1), s);
    v = rest[op] == '+' ? Int(v + off) : Int(v - off);
  }
  return v;
}

}  // namespace fastecpp::input
