#pragma once

#include "bpb/errors.hpp"
#include "bpb/modulus.hpp"
#include "bpb/scalar.hpp"

#include <string>

namespace bpb {

// The two tolerances of a correction run. eta_internal is the construction's internal eta:
// 0 < eta < eps/18 and
//     1/(1 + delta(eps/18)) < 1/(1 + delta(eta^2)) - 3 eta.
// eta_definition = delta(eta^2)/(1 + delta(eta^2)) translates the run's
// admission threshold into the definition's form: the input must satisfy
// ||S x0|| > 1 - eta_definition, i.e. ||S x0|| > 1/(1 + delta(eta^2)).
template <class S>
struct EtaBudget {
    S epsilon{0};
    S eta_internal{0};
    S eta_definition{0};
    S delta_eps18{0};   // delta(eps/18)
    S delta_eta_sq{0};  // delta(eta_internal^2)
    Modulus<S> modulus; // delta form
};

namespace detail {

// Stable feasibility test for the eta constraint. The inequality
//   1/(1+d18) < 1/(1+dh) - 3 eta        (dh = delta(eta^2))
// rearranges to  dh + 3 eta (1+dh)(1+d18) < d18,  which compares small
// positive quantities directly instead of near-1 reciprocals. In float
// mode a relative margin keeps the downstream strict inequalities clear
// of rounding noise.
template <class S>
bool eta_feasible(const S& eta, const S& d18, const Modulus<S>& delta, S* dh_out) {
    const S dh = delta(eta * eta);
    if (dh_out) *dh_out = dh;
    S rhs = d18;
    if constexpr (!ScalarTraits<S>::exact) {
        rhs = d18 * (1.0 - 1e-9);
    }
    return dh + S(3) * eta * (S(1) + dh) * (S(1) + d18) < rhs;
}

} // namespace detail

// Largest admissible eta on a bisection grid (tolerance 1e-10), per the
// constraint above. Larger eta weakens the admission threshold the caller
// must meet, so the largest feasible value maximizes applicability.
template <class S>
EtaBudget<S> compute_eta(const S& eps, const Modulus<S>& delta) {
    if (!(eps > S(0)) || !(eps < S(1))) {
        throw std::invalid_argument("compute_eta: eps outside (0,1)");
    }
    if (delta.form != ModulusForm::Delta) {
        throw std::invalid_argument("compute_eta: modulus must be in delta form");
    }

    const S d18 = delta(eps / S(18));
    const S eta_floor = ScalarTraits<S>::from_double(1e-12);
    const S bisect_tol = ScalarTraits<S>::from_double(1e-10);

    const S hi_bound = eps / S(18); // exclusive: eta < eps/18
    S probe = hi_bound / S(2);
    while (probe > eta_floor && !detail::eta_feasible<S>(probe, d18, delta, nullptr)) {
        probe = probe / S(2);
    }
    if (!(probe > eta_floor)) {
        throw PreconditionError("compute_eta: modulus too weak (no eta above 1e-12 satisfies "
                                "the correction constraint)");
    }

    S lo = probe;      // feasible
    S hi = hi_bound;   // infeasible or excluded
    while (hi - lo > bisect_tol) {
        const S mid = (lo + hi) / S(2);
        if (detail::eta_feasible<S>(mid, d18, delta, nullptr)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    EtaBudget<S> budget;
    budget.epsilon = eps;
    budget.eta_internal = lo;
    budget.delta_eps18 = d18;
    detail::eta_feasible<S>(lo, d18, delta, &budget.delta_eta_sq);
    if (!(budget.delta_eta_sq > S(0))) {
        throw PreconditionError("compute_eta: modulus vanishes at eta^2; no usable "
                                "admission threshold");
    }
    budget.eta_definition = budget.delta_eta_sq / (S(1) + budget.delta_eta_sq);
    budget.modulus = delta;

    // Invariants of the budget type.
    if (!(budget.eta_internal > S(0)) || !(budget.eta_internal < eps / S(18)) ||
        !(budget.eta_definition > S(0)) || !(budget.eta_definition < eps)) {
        throw LedgerError("compute_eta: budget invariants violated");
    }
    return budget;
}

} // namespace bpb
