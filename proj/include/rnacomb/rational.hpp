#pragma once

#include <gmpxx.h>

#include <stdexcept>
#include <string>

namespace rnacomb {

using Int = mpz_class;
using Rat = mpq_class;

// Accepts "a/b", plain integers, and decimal literals ("0.375" -> 3/8).
Rat parse_rational(const std::string& text);

// "a/b" when the denominator is not 1, plain decimal string otherwise.
std::string rat_string(const Rat& q);

std::string int_string(const Int& n);

inline bool is_integer(const Rat& q) { return q.get_den() == 1; }

// mpq_class(num, den) does not canonicalize; this does.
inline Rat frac(long num, long den) {
    Rat q(num, den);
    q.canonicalize();
    return q;
}

double rat_double(const Rat& q);

// log(q) for q > 0, exact enough for partition-function work.
double rat_log(const Rat& q);
double int_log(const Int& n);

Rat rat_pow(const Rat& base, long e);
Int int_pow(const Int& base, unsigned long e);

}  // namespace rnacomb
