#pragma once

#include "bpb/errors.hpp"
#include "bpb/norm.hpp"
#include "bpb/rng.hpp"
#include "bpb/vector.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bpb {

// The three equivalent quantifications of uniform monotonicity. Delta is
// the defining modulus (||x+y|| <= 1 + delta(eps) forces ||y|| <= eps for
// positive x on the sphere and positive y); Eta2 and Eta3 bound ||u|| for
// 0 <= u <= v from below on ||v-u||, absolutely and relatively.
enum class ModulusForm { Delta, Eta2, Eta3 };

enum class ModulusSource { Analytic, NumericUnderApprox, Converted };

inline const char* form_name(ModulusForm f) {
    switch (f) {
        case ModulusForm::Delta: return "delta";
        case ModulusForm::Eta2: return "eta2";
        case ModulusForm::Eta3: return "eta3";
    }
    return "?";
}

template <class S>
struct Modulus {
    ModulusForm form = ModulusForm::Delta;
    ModulusSource source = ModulusSource::Analytic;
    std::string name;
    // False when the producing estimate concluded the norm is not uniformly
    // monotone at some probed argument.
    bool uniformly_monotone = true;
    std::function<S(const S&)> fn;

    S operator()(const S& t) const {
        if (!(t > S(0)) || !(t < S(1))) {
            throw std::invalid_argument("Modulus: argument outside (0,1)");
        }
        return fn(t);
    }
};

// Optimal modulus where a closed form exists. L1-type norms are additive on
// positive vectors, so delta(t) = t. For p-norms, (a+b)^p >= a^p + b^p on
// nonnegatives gives delta(t) = (1 + t^p)^{1/p} - 1, attained at disjoint
// supports; evaluated through expm1/log1p so tiny arguments do not flush
// to zero.
template <class S>
std::optional<Modulus<S>> analytic_modulus(const MonotoneNorm<S>& norm) {
    Modulus<S> m;
    m.form = ModulusForm::Delta;
    m.source = ModulusSource::Analytic;
    switch (norm.family()) {
        case NormFamily::L1:
        case NormFamily::WeightedL1:
            m.name = "analytic:" + norm.name();
            m.fn = [](const S& t) { return t; };
            return m;
        case NormFamily::Lp:
            if constexpr (ScalarTraits<S>::exact) {
                return std::nullopt;
            } else {
                m.name = "analytic:" + norm.name();
                const double p = norm.p();
                m.fn = [p](const S& t) {
                    return std::expm1(std::log1p(std::pow(static_cast<double>(t), p)) / p);
                };
                return m;
            }
        case NormFamily::Sup:
            return std::nullopt;
    }
    return std::nullopt;
}

template <class S>
Modulus<S> delta_to_eta(const Modulus<S>& delta, ModulusForm target = ModulusForm::Eta2) {
    if (delta.form != ModulusForm::Delta) {
        throw std::invalid_argument("delta_to_eta: input must be in delta form");
    }
    if (target != ModulusForm::Eta2 && target != ModulusForm::Eta3) {
        throw std::invalid_argument("delta_to_eta: target must be eta2 or eta3");
    }
    Modulus<S> out;
    out.form = target;
    out.source = ModulusSource::Converted;
    out.name = delta.name + "->" + form_name(target);
    out.uniformly_monotone = delta.uniformly_monotone;
    out.fn = [f = delta.fn](const S& t) {
        const S d = f(t);
        return d / (S(1) + d);
    };
    return out;
}

template <class S>
Modulus<S> eta_to_delta(const Modulus<S>& eta) {
    if (eta.form != ModulusForm::Eta2) {
        throw std::invalid_argument("eta_to_delta: input must be in eta2 form");
    }
    Modulus<S> out;
    out.form = ModulusForm::Delta;
    out.source = ModulusSource::Converted;
    out.name = eta.name + "->delta";
    out.uniformly_monotone = eta.uniformly_monotone;
    out.fn = [f = eta.fn](const S& t) { return f(t / S(2)); };
    return out;
}

// ---------------------------------------------------------------------------
// Numeric estimation of the modulus.

struct EstimateParams {
    int coarse_samples = 64;      // random positive pairs tried per call
    int refine_sweeps = 40;       // coordinate-descent sweeps on the best pair
    double safety = 0.99;         // under-approximation factor on the raw value
    double grid_tol = 0.01;       // documented accuracy budget of the estimate
    double not_um_threshold = 1e-6; // raw minimum gap below this flags not-UM
    std::uint64_t seed = 0x5eedULL;
};

struct EstimateResult {
    double value = 0.0;  // delta_hat(eps); 0 when flagged not uniformly monotone
    double raw = 0.0;    // min ||x+y|| - 1 before the safety factor
    bool uniformly_monotone = true;
    Vec<double> argmin_x, argmin_y;
};

namespace detail {

inline Vec<double> normalized_to(const NormedLattice<double>& L, Vec<double> v, double target) {
    const double nv = L.eval(v);
    if (!(nv > 0.0)) throw std::invalid_argument("normalized_to: zero vector");
    for (std::size_t i = 0; i < v.dim(); ++i) v[i] = v[i] * (target / nv);
    return v;
}

inline Vec<double> random_positive_direction(Rng& rng, std::size_t dim) {
    Vec<double> v = Vec<double>::zeros(dim);
    bool any = false;
    for (std::size_t i = 0; i < dim; ++i) {
        v[i] = rng.uniform01();
        any = any || v[i] > 0.0;
    }
    if (!any) v[0] = 1.0;
    return v;
}

} // namespace detail

// Under-approximates the optimal modulus at eps: minimizes ||x + y|| over
// positive x with ||x|| = 1 and positive y with ||y|| = eps, then shrinks
// the gap by the safety factor. Seeds include all disjoint coordinate
// pairs (which are optimal for every shipped family) plus random pairs;
// a projected coordinate descent polishes the best candidate. Any positive
// valid witness suffices downstream, so optimality is not required.
inline EstimateResult modulus_estimate(const NormedLattice<double>& L, double eps,
                                       const EstimateParams& params = {}) {
    if (!(eps > 0.0) || !(eps < 1.0)) {
        throw std::invalid_argument("modulus_estimate: eps outside (0,1)");
    }
    const std::size_t dim = L.dim();
    Rng rng(params.seed);

    Vec<double> best_x = Vec<double>::zeros(dim);
    Vec<double> best_y = Vec<double>::zeros(dim);
    double best = std::numeric_limits<double>::infinity();

    auto consider = [&](const Vec<double>& x, const Vec<double>& y) {
        const double val = L.eval(x + y);
        if (val < best) {
            best = val;
            best_x = x;
            best_y = y;
        }
    };

    for (std::size_t i = 0; i < dim; ++i) {
        const Vec<double> xi = detail::normalized_to(L, Vec<double>::unit(dim, i), 1.0);
        for (std::size_t j = 0; j < dim; ++j) {
            consider(xi, detail::normalized_to(L, Vec<double>::unit(dim, j), eps));
        }
    }
    for (int s = 0; s < params.coarse_samples; ++s) {
        consider(detail::normalized_to(L, detail::random_positive_direction(rng, dim), 1.0),
                 detail::normalized_to(L, detail::random_positive_direction(rng, dim), eps));
    }

    // Coordinate descent: perturb one entry, reproject onto the sphere of
    // the right radius, keep improvements.
    double step = 0.25;
    for (int sweep = 0; sweep < params.refine_sweeps && step > 1e-9; ++sweep) {
        bool improved = false;
        for (int side = 0; side < 2; ++side) {
            const double radius = side == 0 ? 1.0 : eps;
            for (std::size_t k = 0; k < dim; ++k) {
                for (double factor : {1.0 + step, 1.0 - step, 0.0}) {
                    Vec<double> cand = side == 0 ? best_x : best_y;
                    if (factor == 0.0) {
                        cand[k] = 0.0;
                    } else if (cand[k] == 0.0) {
                        cand[k] = step; // reopen a closed coordinate
                    } else {
                        cand[k] *= factor;
                    }
                    if (!nonnegative(cand) || !(L.eval(cand) > 0.0)) continue;
                    cand = detail::normalized_to(L, cand, radius);
                    const double val = side == 0 ? L.eval(cand + best_y) : L.eval(best_x + cand);
                    if (val < best) {
                        best = val;
                        (side == 0 ? best_x : best_y) = cand;
                        improved = true;
                    }
                }
            }
        }
        if (!improved) step *= 0.5;
    }

    EstimateResult res;
    res.argmin_x = best_x;
    res.argmin_y = best_y;
    res.raw = std::max(0.0, best - 1.0);
    if (res.raw < params.not_um_threshold) {
        res.value = 0.0;
        res.uniformly_monotone = false;
    } else {
        res.value = params.safety * res.raw;
        res.uniformly_monotone = true;
    }
    return res;
}

namespace detail {

struct NumericModulusState {
    NumericModulusState(NormedLattice<double> l, const EstimateParams& p)
        : lattice(std::move(l)), params(p) {}

    NormedLattice<double> lattice;
    EstimateParams params;
    std::map<double, double> cache;
    bool degenerate = false;
    std::mutex mu;
};

} // namespace detail

// Lazily evaluated numeric modulus backed by modulus_estimate. Each value
// is clamped against the cache so the curve stays nondecreasing: raising a
// value to a cached estimate at a smaller argument is sound because the
// optimal modulus is nondecreasing, and lowering to a cached estimate at a
// larger argument only strengthens the witness.
inline Modulus<double> numeric_modulus(const NormedLattice<double>& L,
                                       const EstimateParams& params = {}) {
    auto state = std::make_shared<detail::NumericModulusState>(L, params);
    Modulus<double> m;
    m.form = ModulusForm::Delta;
    m.source = ModulusSource::NumericUnderApprox;
    m.name = "numeric:" + L.norm().name();
    m.uniformly_monotone = L.norm().uniformly_monotone();
    m.fn = [state](const double& t) {
        std::lock_guard<std::mutex> lock(state->mu);
        auto it = state->cache.find(t);
        if (it != state->cache.end()) return it->second;
        const EstimateResult est = modulus_estimate(state->lattice, t, state->params);
        double v = est.value;
        if (!est.uniformly_monotone) state->degenerate = true;
        auto lo = state->cache.lower_bound(t);
        if (lo != state->cache.begin()) {
            auto below = std::prev(lo);
            v = std::max(v, below->second);
        }
        if (lo != state->cache.end()) {
            v = std::min(v, lo->second);
        }
        state->cache.emplace(t, v);
        return v;
    };
    return m;
}

// ---------------------------------------------------------------------------
// Witness validation by randomized counterexample search.

struct ModulusViolation {
    std::string kind;  // "value_not_positive", "delta_exceeds_t", "implication"
    double epsilon = 0.0;
    double lhs = 0.0, rhs = 0.0;
    std::vector<double> first, second; // witness pair: (x, y) or (v, u)
};

struct ValidationReport {
    std::size_t samples = 0;
    std::vector<ModulusViolation> violations;
    bool ok() const { return violations.empty(); }
};

namespace detail {

// Largest t in [0, hi] with pred(t) true, where pred is monotone
// true-then-false. Returns a verified-true point (or 0).
inline double bisect_last_true(const std::function<bool(double)>& pred, double hi) {
    if (pred(hi)) return hi;
    double lo = 0.0, h = hi;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + h);
        if (pred(mid)) lo = mid; else h = mid;
    }
    return lo;
}

} // namespace detail

// Searches for counterexamples to the form-appropriate implication on the
// given lattice. Samples are driven to the hypothesis boundary by bisection
// so the hypothesis side holds by construction; a violated conclusion is
// reported, never thrown.
inline ValidationReport validate_modulus(const NormedLattice<double>& L,
                                         const Modulus<double>& mod,
                                         std::size_t samples, std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("validate_modulus: samples must be >= 1");
    ValidationReport report;
    report.samples = samples;
    Rng rng(seed);
    const std::size_t dim = L.dim();
    const double conc_tol = 1e-9; // relative slack on the conclusion side

    auto record = [&](const std::string& kind, double eps, double lhs, double rhs,
                      const Vec<double>& a, const Vec<double>& b) {
        if (report.violations.size() < 64) { // cap stored witnesses
            report.violations.push_back({kind, eps, lhs, rhs, a.entries(), b.entries()});
        }
    };

    for (std::size_t s = 0; s < samples; ++s) {
        const double eps = s % 3 == 0 ? 0.1 + 0.4 * (s % 2) : rng.uniform(0.02, 0.98);
        double value = 0.0;
        try {
            value = mod(eps);
        } catch (const std::exception&) {
            value = 0.0;
        }
        if (!(value > 0.0) && mod.uniformly_monotone) {
            record("value_not_positive", eps, value, 0.0, Vec<double>::zeros(dim),
                   Vec<double>::zeros(dim));
        }
        if (mod.form == ModulusForm::Delta && value > eps * (1.0 + 1e-12)) {
            record("delta_exceeds_t", eps, value, eps, Vec<double>::zeros(dim),
                   Vec<double>::zeros(dim));
        }

        // Mix structured corner directions with random ones: corners witness
        // the sup-norm failure and over-stated moduli immediately.
        const bool corner = rng.bernoulli(0.25);
        Vec<double> xdir = corner ? Vec<double>::unit(dim, std::size_t(rng.uniform_int(0, int(dim) - 1)))
                                  : detail::random_positive_direction(rng, dim);
        Vec<double> ydir = corner && dim > 1
                               ? Vec<double>::unit(dim, std::size_t(rng.uniform_int(0, int(dim) - 1)))
                               : detail::random_positive_direction(rng, dim);

        if (mod.form == ModulusForm::Delta) {
            const Vec<double> x = detail::normalized_to(L, xdir, 1.0);
            const Vec<double> yhat = detail::normalized_to(L, ydir, 1.0);
            const double bound = 1.0 + value;
            // ||x + t yhat|| is nondecreasing in t on positives.
            const double t = detail::bisect_last_true(
                [&](double tt) { return L.eval(x + tt * yhat) <= bound; }, 4.0 + value);
            if (t > 0.0) {
                const Vec<double> y = t * yhat;
                const double ny = L.eval(y);
                if (ny > eps * (1.0 + conc_tol) + 1e-12) {
                    record("implication", eps, ny, eps, x, y);
                }
            }
        } else {
            const bool relative = mod.form == ModulusForm::Eta3;
            const double scale = relative ? rng.uniform(0.1, 4.0) : 1.0;
            const Vec<double> v = detail::normalized_to(L, xdir, scale);
            Vec<double> u_raw = v;
            for (std::size_t i = 0; i < dim; ++i) u_raw[i] *= rng.uniform01();
            if (corner && dim > 1) {
                u_raw = Vec<double>::zeros(dim);
                for (std::size_t i = 0; i < dim; ++i) u_raw[i] = i % 2 == 0 ? 0.0 : v[i];
            }
            const double target = (1.0 - value) * (relative ? L.eval(v) : 1.0);
            // ||v - t u_raw|| is nonincreasing in t for 0 <= u_raw <= v.
            const double t = detail::bisect_last_true(
                [&](double tt) { return L.eval(v - tt * u_raw) > target; }, 1.0);
            if (t > 0.0) {
                const Vec<double> u = t * u_raw;
                const double nu = L.eval(u);
                const double cap = eps * (relative ? L.eval(v) : 1.0);
                if (nu > cap * (1.0 + conc_tol) + 1e-12) {
                    record("implication", eps, nu, cap, v, u);
                }
            }
        }
    }
    return report;
}

} // namespace bpb
