#pragma once

#include "bpb/budget.hpp"
#include "bpb/converse.hpp"
#include "bpb/rng.hpp"
#include "bpb/solver.hpp"

#include <utility>
#include <vector>

namespace bpb {

template <class S>
struct CorrectionInstance {
    PositiveOperator<S> S_op;
    Vec<S> x0;
};

// Feasible instance for the correction pipeline. The operator is built
// sign-compatible with a random sign pattern sigma: every row draws its
// mass from columns of a single sign class, so ||S sigma|| = ||S 1|| and
// x0 = sigma is exactly norm-attaining. Feasibility is then kept under
// perturbation: near-extreme coordinates move by less than a slice of the
// admission window, and C-columns carry at most another slice of mass.
// The admission gap is verified before returning; if rounding eats the
// margin the perturbations are shrunk, with the exact attainer as the
// final fallback.
template <class S>
CorrectionInstance<S> random_feasible_instance(Rng& rng, std::size_t n, std::size_t m,
                                               const NormedLattice<S>& Y,
                                               const EtaBudget<S>& budget) {
    if (Y.dim() != m) throw std::invalid_argument("random_feasible_instance: Y dim != m");
    const S eta = budget.eta_internal;
    const double eta_d = ScalarTraits<S>::to_double(eta);
    const double window = ScalarTraits<S>::to_double(budget.eta_definition);

    // p-norm admission windows sit below double resolution, so those
    // instances must attain exactly: no point perturbation, no C-mass.
    const bool additive = Y.norm().family() == NormFamily::L1 ||
                          Y.norm().family() == NormFamily::WeightedL1;

    std::vector<int> sigma(n);
    std::vector<bool> in_c(n, false);
    for (std::size_t j = 0; j < n; ++j) {
        sigma[j] = rng.bernoulli(0.5) ? 1 : -1;
        in_c[j] = rng.bernoulli(0.3);
    }
    const std::size_t anchor = std::size_t(rng.uniform_int(0, int(n) - 1));
    in_c[anchor] = false;

    std::vector<int> row_side(m);
    for (std::size_t i = 0; i < m; ++i) row_side[i] = rng.bernoulli(0.5) ? 1 : -1;

    for (int attempt = 0; attempt < 8; ++attempt) {
        const double shrink = std::pow(0.25, attempt);
        const double perturb_cap = additive ? 0.3 * std::min(eta_d, window) * shrink : 0.0;
        const double c_mass_cap = additive ? 0.2 * window * shrink : 0.0;

        Matrix<S> mat = Matrix<S>::zeros(m, n);
        bool any_mass = false;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (in_c[j] || sigma[j] != row_side[i]) continue;
                mat.at(i, j) = ScalarTraits<S>::from_double(rng.dyadic16());
                any_mass = any_mass || !(mat.at(i, j) == S(0));
            }
        }
        if (!any_mass) mat.at(0, anchor) = S(1);

        // C-columns: a sliver of mass, scaled so the whole block stays
        // within its cap after normalization.
        if (c_mass_cap > 0.0) {
            Matrix<S> cpart = Matrix<S>::zeros(m, n);
            for (std::size_t j = 0; j < n; ++j) {
                if (!in_c[j]) continue;
                for (std::size_t i = 0; i < m; ++i) {
                    if (rng.bernoulli(0.5)) cpart.at(i, j) = ScalarTraits<S>::from_double(rng.dyadic16());
                }
            }
            std::vector<bool> call(n, true);
            const S cnorm = Y.eval(cpart.apply_indicator(call));
            const S base = Y.eval(mat.apply_indicator(call));
            if (cnorm > S(0)) {
                const S target = ScalarTraits<S>::from_double(c_mass_cap) * base;
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t j = 0; j < n; ++j) {
                        if (in_c[j]) mat.at(i, j) = cpart.at(i, j) * target / cnorm;
                    }
                }
            }
        }

        PositiveOperator<S> op(mat, Y);
        const S nu = operator_norm_positive(op);
        if (!(nu > S(0))) continue;
        op = op.scaled_by_inverse(nu);

        Vec<S> x0 = Vec<S>::zeros(n);
        for (std::size_t j = 0; j < n; ++j) {
            if (in_c[j]) {
                const double span = std::max(0.0, 1.0 - eta_d) * 0.9;
                x0[j] = ScalarTraits<S>::from_double((2.0 * rng.dyadic16() - 1.0) * span);
            } else {
                const double r = j == anchor ? 0.0 : perturb_cap * rng.dyadic16();
                x0[j] = S(sigma[j]) * (S(1) - ScalarTraits<S>::from_double(r));
            }
        }

        const S gap = operator_norm_positive(op) - Y.eval(op.apply(x0));
        if (gap < budget.eta_definition) {
            return {std::move(op), std::move(x0)};
        }
    }
    throw std::logic_error("random_feasible_instance: could not realize the admission gap");
}

template <class S>
struct SplitPair {
    Vec<S> f1, f2;
    S eps;
};

// Hypothesis-satisfying pair for the disjoint-support splitter: a positive
// disjoint base with unit sum norm (for which the separation hypothesis is
// strict), contaminated by a cross leak that is halved until the hypothesis
// verifies again.
template <class S>
SplitPair<S> random_split_pair(Rng& rng, const NormedLattice<S>& Y, const Modulus<S>& delta) {
    const std::size_t dim = Y.dim();
    const S eps = ScalarTraits<S>::from_double(rng.uniform(0.15, 0.9));
    const S d3 = delta(eps / S(3));

    Vec<S> b1 = Vec<S>::zeros(dim), b2 = b1;
    for (std::size_t t = 0; t < dim; ++t) {
        (rng.bernoulli(0.5) ? b1 : b2)[t] = ScalarTraits<S>::from_double(0.05 + rng.dyadic16());
    }
    const S base = Y.eval(b1 + b2);
    for (std::size_t t = 0; t < dim; ++t) {
        b1[t] = b1[t] / base;
        b2[t] = b2[t] / base;
    }

    S leak = ScalarTraits<S>::from_double(0.2 * rng.dyadic16());
    for (int attempt = 0; attempt < 60; ++attempt) {
        Vec<S> f1 = b1, f2 = b2;
        for (std::size_t t = 0; t < dim; ++t) {
            f1[t] += leak * b2[t];
            f2[t] += leak * b1[t];
        }
        const S s = Y.eval(f1 + f2);
        for (std::size_t t = 0; t < dim; ++t) {
            f1[t] = f1[t] / s;
            f2[t] = f2[t] / s;
        }
        if (Y.eval(f1 - f2) * (S(1) + d3) >= S(1) + ScalarTraits<S>::from_double(1e-12)) {
            return {std::move(f1), std::move(f2), eps};
        }
        leak = leak / S(2);
    }
    return {b1, b2, eps};
}

// Converse instance over a 1+1 infinity sum: u has the requested norm, and
// v >= u reaches the unit sphere along a random positive direction.
template <class S>
ConverseInstance<S> random_converse_instance(Rng& rng, const NormedLattice<S>& Y,
                                             double u_norm_target) {
    const std::size_t dim = Y.dim();
    auto direction = [&]() {
        Vec<S> d = Vec<S>::zeros(dim);
        bool any = false;
        for (std::size_t i = 0; i < dim; ++i) {
            const double g = rng.uniform01();
            if (g > 0.35) {
                d[i] = ScalarTraits<S>::from_double(g);
                any = true;
            }
        }
        if (!any) d[0] = S(1);
        return d;
    };

    Vec<S> u = direction();
    {
        const S nu = Y.eval(u);
        const S target = ScalarTraits<S>::from_double(u_norm_target);
        for (std::size_t i = 0; i < dim; ++i) u[i] = u[i] * target / nu;
    }

    const Vec<S> w = direction();
    // ||u + s w|| = 1 has a unique root in s by monotonicity.
    double lo = 0.0, hi = 1.0;
    while (ScalarTraits<S>::to_double(Y.eval(u + ScalarTraits<S>::from_double(hi) * w)) < 1.0) {
        hi *= 2.0;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (ScalarTraits<S>::to_double(Y.eval(u + ScalarTraits<S>::from_double(mid) * w)) < 1.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Vec<S> v = u + ScalarTraits<S>::from_double(hi) * w;
    // Land exactly on the sphere: scale the additive part's largest summand
    // is messy for general norms; instead rescale v and lift u under it.
    const S nv = Y.eval(v);
    for (std::size_t i = 0; i < dim; ++i) v[i] = v[i] / nv;
    for (std::size_t i = 0; i < dim; ++i) u[i] = scalar_min(u[i], v[i]);

    InftySumDomain dom{1, 1};
    return ConverseInstance<S>(dom, Y, u, v, Vec<S>{S(1)}, Vec<S>{S(1)});
}

} // namespace bpb
