#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "potts/errors.hpp"

namespace potts {

using Integer = mpz_class;
using Rational = mpq_class;

// Parses "a" or "a/b" (optionally signed) into a canonical rational.
inline Rational parse_rational(const std::string& text) {
  try {
    Rational x(text);
    x.canonicalize();
    return x;
  } catch (const std::invalid_argument&) {
    throw ParameterError("not a rational: '" + text + "'");
  }
}

// Canonical "a/b" rendering; integers print without the "/1".
inline std::string to_string(const Rational& x) { return x.get_str(); }
inline std::string to_string(const Integer& x) { return x.get_str(); }

inline Integer ipow(const Integer& base, unsigned long e) {
  Integer r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
  return r;
}

inline Integer ipow(unsigned long base, unsigned long e) {
  Integer r;
  mpz_ui_pow_ui(r.get_mpz_t(), base, e);
  return r;
}

inline Rational qpow(const Rational& base, unsigned long e) {
  Rational r;
  mpz_pow_ui(mpq_numref(r.get_mpq_t()), mpq_numref(base.get_mpq_t()), e);
  mpz_pow_ui(mpq_denref(r.get_mpq_t()), mpq_denref(base.get_mpq_t()), e);
  return r;  // canonical because base is
}

inline Integer binomial(unsigned long n, unsigned long k) {
  Integer r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

inline Integer integer_from_u64(std::uint64_t u) {
  Integer r;
  mpz_import(r.get_mpz_t(), 1, 1, sizeof(u), 0, 0, &u);
  return r;
}

// The dyadic rational u / 2^64 in [0,1); what a raw 64-bit draw stands for.
inline Rational dyadic_u64(std::uint64_t u) {
  Rational r(integer_from_u64(u));
  Integer two64 = ipow(2ul, 64);
  r /= Rational(two64);
  return r;
}

// Natural log of a positive rational whose parts may lie far outside the
// range of double.
inline double log_value(const Rational& x) {
  if (sgn(x) <= 0) throw ParameterError("log of non-positive rational");
  long en = 0, ed = 0;
  const double mn = mpz_get_d_2exp(&en, mpq_numref(x.get_mpq_t()));
  const double md = mpz_get_d_2exp(&ed, mpq_denref(x.get_mpq_t()));
  return std::log(mn) - std::log(md) + std::log(2.0) * static_cast<double>(en - ed);
}

inline double log_value(const Integer& x) {
  if (sgn(x) <= 0) throw ParameterError("log of non-positive integer");
  long e = 0;
  const double m = mpz_get_d_2exp(&e, x.get_mpz_t());
  return std::log(m) + std::log(2.0) * static_cast<double>(e);
}

}  // namespace potts
