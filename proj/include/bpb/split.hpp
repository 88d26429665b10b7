#pragma once

#include "bpb/errors.hpp"
#include "bpb/modulus.hpp"
#include "bpb/norm.hpp"
#include "bpb/vector.hpp"

#include <string>
#include <vector>

namespace bpb {

// Output of the disjoint-support splitter together with every intermediate
// quantity its correctness proof bounds, so callers can re-check them.
template <class S>
struct SplitResult {
    Vec<S> h1, h2;                 // disjoint supports, ||h1 + h2|| = 1
    Vec<S> g1, g2;                 // restrictions of f1, f2 before renormalizing
    std::vector<std::size_t> c1;   // indices with f2 <= f1 (ties land here)
    std::vector<std::size_t> c2;
    S denom{0};                    // ||g1 + g2||
    S cross_mass{0};               // ||2(f1 chi_{C2} + f2 chi_{C1})||, <= eps/3
    S g1_err{0}, g2_err{0};        // ||g_i - f_i||, <= eps/6
    S h1_err{0}, h2_err{0};        // ||h_i - f_i||, < eps
    bool bounds_ok = true;         // all of the above within tolerance
};

// Splits a positive pair (f1, f2) with ||f1 + f2|| <= 1 and
// 1/(1 + delta(eps/3)) <= ||f1 - f2|| into positive (h1, h2) with exactly
// disjoint supports, ||h1 + h2|| = 1 and ||h_i - f_i|| < eps. The partition
// is C1 = { t : f2(t) <= f1(t) } (ties to C1) and its complement; excluded
// coordinates are written as exact zeros rather than multiplied out.
// In strict mode hypothesis failures throw PreconditionError and bound
// failures throw LedgerError; otherwise they are recorded in the result.
template <class S>
SplitResult<S> disjoint_support_split(const Vec<S>& f1, const Vec<S>& f2, const S& eps,
                                      const NormedLattice<S>& Y, const Modulus<S>& delta,
                                      bool strict = true) {
    Vec<S>::require_same_dim(f1, f2, "disjoint_support_split");
    if (f1.dim() != Y.dim()) {
        throw std::invalid_argument("disjoint_support_split: vectors do not live in Y");
    }
    if (!(eps > S(0)) || !(eps < S(1))) {
        throw std::invalid_argument("disjoint_support_split: eps outside (0,1)");
    }
    const S slack = ScalarTraits<S>::ledger_slack();

    if (!nonnegative(f1) || !nonnegative(f2)) {
        throw PreconditionError("disjoint_support_split: f1, f2 must be >= 0");
    }
    const S sum_norm = Y.eval(f1 + f2);
    if (strict && !(sum_norm <= S(1) + slack)) {
        throw PreconditionError("disjoint_support_split: hypothesis ||f1 + f2|| <= 1 fails");
    }
    const S diff_norm = Y.eval(f1 - f2);
    const S d3 = delta(eps / S(3));
    // 1/(1+delta(eps/3)) <= ||f1 - f2||, tested in product form.
    if (strict && !(diff_norm * (S(1) + d3) + slack >= S(1))) {
        throw PreconditionError(
            "disjoint_support_split: hypothesis 1/(1 + delta(eps/3)) <= ||f1 - f2|| fails");
    }

    SplitResult<S> res;
    const std::size_t dim = f1.dim();
    std::vector<bool> in_c1(dim, false);
    for (std::size_t t = 0; t < dim; ++t) {
        if (f2[t] <= f1[t]) {
            in_c1[t] = true;
            res.c1.push_back(t);
        } else {
            res.c2.push_back(t);
        }
    }

    res.g1 = Vec<S>::zeros(dim);
    res.g2 = Vec<S>::zeros(dim);
    Vec<S> cross = Vec<S>::zeros(dim); // f1 on C2 plus f2 on C1
    for (std::size_t t = 0; t < dim; ++t) {
        if (in_c1[t]) {
            res.g1[t] = f1[t];
            cross[t] = f2[t];
        } else {
            res.g2[t] = f2[t];
            cross[t] = f1[t];
        }
    }

    res.cross_mass = Y.eval(S(2) * cross);
    res.g1_err = Y.eval(res.g1 - f1);
    res.g2_err = Y.eval(res.g2 - f2);
    res.denom = Y.eval(res.g1 + res.g2);

    if (!(res.denom > S(0))) {
        if (strict) {
            throw PreconditionError("disjoint_support_split: ||g1 + g2|| = 0 (degenerate input)");
        }
        res.bounds_ok = false;
        res.h1 = res.g1;
        res.h2 = res.g2;
        return res;
    }

    res.h1 = res.g1.scaled_by_inverse(res.denom);
    res.h2 = res.g2.scaled_by_inverse(res.denom);
    res.h1_err = Y.eval(res.h1 - f1);
    res.h2_err = Y.eval(res.h2 - f2);

    const S third = eps / S(3);
    const S sixth = eps / S(6);
    auto check = [&](bool ok, const char* what) {
        if (!ok) {
            res.bounds_ok = false;
            if (strict) {
                throw LedgerError(std::string("disjoint_support_split: bound failed: ") + what);
            }
        }
    };
    check(res.cross_mass <= third + slack, "||2(f1 chi_C2 + f2 chi_C1)|| <= eps/3");
    check(res.g1_err <= sixth + slack, "||g1 - f1|| <= eps/6");
    check(res.g2_err <= sixth + slack, "||g2 - f2|| <= eps/6");
    check(res.h1_err < eps + slack, "||h1 - f1|| < eps");
    check(res.h2_err < eps + slack, "||h2 - f2|| < eps");
    const S unit = Y.eval(res.h1 + res.h2);
    check(scalar_abs(unit - S(1)) <= ScalarTraits<S>::norm_eq_tol(), "||h1 + h2|| = 1");

    return res;
}

} // namespace bpb
