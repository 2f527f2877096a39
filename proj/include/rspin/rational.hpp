#pragma once

// Exact rational scalars and small combinatorial helpers shared by every
// module.  All arithmetic in this library is exact; nothing here ever
// rounds.

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rspin {

using Rat = mpq_class;

inline bool is_zero(const Rat& x) { return sgn(x) == 0; }

inline Rat rat_from_string(const std::string& s) {
    Rat x;
    if (x.set_str(s, 10) != 0)
        throw std::invalid_argument("rational: cannot parse '" + s + "'");
    x.canonicalize();
    return x;
}

/// "p/q" (or just "p" for integers), the canonical textual form.
inline std::string rat_to_string(const Rat& x) { return x.get_str(); }

inline Rat factorial(long n) {
    if (n < 0) throw std::invalid_argument("factorial of negative argument");
    mpz_class f;
    mpz_fac_ui(f.get_mpz_t(), static_cast<unsigned long>(n));
    return Rat(f);
}

/// Binomial coefficient C(n, k) for n >= 0; zero when k is out of range.
inline Rat binomial(long n, long k) {
    if (k < 0 || k > n) return Rat(0);
    mpz_class b;
    mpz_bin_uiui(b.get_mpz_t(), static_cast<unsigned long>(n),
                 static_cast<unsigned long>(k));
    return Rat(b);
}

/// Falling-factorial binomial k(k-1)...(k-l+1)/l! for arbitrary integer k,
/// the coefficient appearing in the Leibniz expansion of Dx^k against a
/// multiplication operator.  Defined for negative k as well.
inline Rat generalized_binomial(long k, long l) {
    if (l < 0) return Rat(0);
    Rat num(1);
    for (long i = 0; i < l; ++i) num *= Rat(k - i);
    return num / factorial(l);
}

inline Rat pow_rat(const Rat& base, long e) {
    if (e == 0) return Rat(1);
    Rat b = e > 0 ? base : Rat(1) / base;
    long n = e > 0 ? e : -e;
    Rat acc(1);
    while (n > 0) {
        if (n & 1) acc *= b;
        b *= b;
        n >>= 1;
    }
    return acc;
}

}  // namespace rspin
