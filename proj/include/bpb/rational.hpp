#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

namespace bpb {

// Arbitrary-precision rational scalar for the exact arithmetic mode.
// Expression templates are disabled so arithmetic yields plain values that
// flow through the scalar-generic code paths.
using Rational = boost::multiprecision::number<
    boost::multiprecision::backends::rational_adaptor<boost::multiprecision::backends::cpp_int_backend<>>,
    boost::multiprecision::et_off>;

// Doubles are dyadic rationals, so this conversion is exact.
inline Rational rational_from_double(double x) {
    if (!std::isfinite(x)) {
        throw std::invalid_argument("rational_from_double: non-finite input");
    }
    return Rational(x);
}

inline double rational_to_double(const Rational& q) {
    return q.convert_to<double>();
}

inline std::string rational_num_str(const Rational& q) { return numerator(q).str(); }
inline std::string rational_den_str(const Rational& q) { return denominator(q).str(); }

inline Rational rational_from_strings(const std::string& num, const std::string& den) {
    boost::multiprecision::cpp_int n(num);
    boost::multiprecision::cpp_int d(den);
    if (d == 0) throw std::invalid_argument("rational_from_strings: zero denominator");
    return Rational(n, d);
}

} // namespace bpb
