#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <string>

namespace spinnet {

/// Arbitrary-precision rational, always kept in lowest terms with a
/// positive denominator (GMP's mpq canonical form).
using ExactValue = boost::multiprecision::mpq_rational;
using ExactInteger = boost::multiprecision::mpz_int;

inline std::string numerator_string(const ExactValue& v) {
    return boost::multiprecision::numerator(v).str();
}

inline std::string denominator_string(const ExactValue& v) {
    return boost::multiprecision::denominator(v).str();
}

inline std::string to_string(const ExactValue& v) {
    auto den = boost::multiprecision::denominator(v);
    if (den == 1) return numerator_string(v);
    return numerator_string(v) + "/" + den.str();
}

inline double to_double(const ExactValue& v) { return v.convert_to<double>(); }

/// (-1)^n for any integer n.
constexpr int sign_power(long long n) noexcept { return (n % 2 == 0) ? 1 : -1; }

inline ExactInteger factorial(long n) {
    ExactInteger r = 1;
    for (long k = 2; k <= n; ++k) r *= k;
    return r;
}

}  // namespace spinnet
