#pragma once

#include "bpb/rational.hpp"

#include <cmath>
#include <cstdlib>

namespace bpb {

// Thin layer that lets the lattice/solver code run over plain doubles or
// exact rationals with the same source.
template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
    static constexpr bool exact = false;
    static double from_double(double x) { return x; }
    static double to_double(double x) { return x; }
    static double abs(double x) { return std::fabs(x); }
    static bool finite(double x) { return std::isfinite(x); }
    // Slack for norm-equality assertions.
    static double norm_eq_tol() { return 1e-9; }
    // Slack for proof-step inequality checks.
    static double ledger_slack() { return 1e-12; }
    static const char* mode_name() { return "float"; }
};

template <>
struct ScalarTraits<Rational> {
    static constexpr bool exact = true;
    static Rational from_double(double x) { return rational_from_double(x); }
    static double to_double(const Rational& q) { return rational_to_double(q); }
    static Rational abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }
    static bool finite(const Rational&) { return true; }
    static Rational norm_eq_tol() { return Rational(0); }
    static Rational ledger_slack() { return Rational(0); }
    static const char* mode_name() { return "rational"; }
};

template <class S>
S scalar_abs(const S& x) { return ScalarTraits<S>::abs(x); }

template <class S>
S scalar_max(const S& a, const S& b) { return a < b ? b : a; }

template <class S>
S scalar_min(const S& a, const S& b) { return b < a ? b : a; }

} // namespace bpb
