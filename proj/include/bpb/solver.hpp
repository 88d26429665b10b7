#pragma once

#include "bpb/budget.hpp"
#include "bpb/errors.hpp"
#include "bpb/operator.hpp"
#include "bpb/split.hpp"

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace bpb {

// Index partition of the domain coordinates by proximity of x0 to -1 / +1:
//   A = { k : x0(k) < -1 + eta },  B = { k : x0(k) > 1 - eta },
//   C = { k : |x0(k)| <= 1 - eta }.
// Boundary values land in C, which only shrinks the perturbation.
struct PartitionABC {
    std::vector<std::size_t> A, B, C;
};

template <class S>
PartitionABC partition_near_extremes(const Vec<S>& x0, const S& eta) {
    PartitionABC part;
    for (std::size_t k = 0; k < x0.dim(); ++k) {
        if (x0[k] < S(-1) + eta) {
            part.A.push_back(k);
        } else if (x0[k] > S(1) - eta) {
            part.B.push_back(k);
        } else {
            part.C.push_back(k);
        }
    }
    return part;
}

template <class S>
struct LedgerEntry {
    std::string name;
    S lhs{0};
    S bound{0};
    bool is_lower_bound = false; // true: lhs must exceed bound
    bool ok = true;
};

template <class S>
struct Measured {
    S norm_T{0};
    S norm_Tu0{0};
    S dist_ops{0};
    S dist_points{0};
};

// The output contract of a correction run: a positive norm-one operator T
// attaining its norm exactly at u0, with the measured distances to the
// input pair, the budget that admitted the input, and every intermediate
// inequality of the construction.
template <class S>
struct BpbCertificate {
    PositiveOperator<S> S_op;  // normalized input operator
    PositiveOperator<S> T;
    Vec<S> x0;
    Vec<S> u0;
    Measured<S> measured;
    EtaBudget<S> budget;
    S input_scale{1};          // factor divided out of the raw input
    PartitionABC partition;
    std::vector<LedgerEntry<S>> ledger;
    bool precondition_met = false;
    bool constructed = false;  // the pipeline produced T and u0
    bool ledger_ok = false;
    bool valid = false;        // definition payload holds
};

enum class RunMode { Strict, Measure };

namespace detail {

template <class S>
std::string fmt_scalar(const S& v) {
    std::ostringstream os;
    os << ScalarTraits<S>::to_double(v);
    return os.str();
}

template <class S>
class LedgerBook {
public:
    LedgerBook(std::vector<LedgerEntry<S>>& entries, RunMode mode)
        : entries_(entries), mode_(mode) {}

    // lhs <= bound (+ slack in float mode).
    void upper(const std::string& name, const S& lhs, const S& bound) {
        const bool ok = lhs <= bound + ScalarTraits<S>::ledger_slack();
        push(name, lhs, bound, false, ok);
    }

    // lhs > bound, compared in the caller-provided stable form.
    void lower(const std::string& name, const S& lhs, const S& bound, bool ok) {
        push(name, lhs, bound, true, ok);
    }

    // lhs < bound, strict.
    void strict_upper(const std::string& name, const S& lhs, const S& bound) {
        push(name, lhs, bound, false, lhs < bound);
    }

    bool all_ok() const { return all_ok_; }

private:
    void push(const std::string& name, const S& lhs, const S& bound, bool lower, bool ok) {
        entries_.push_back({name, lhs, bound, lower, ok});
        all_ok_ = all_ok_ && ok;
        if (!ok && mode_ == RunMode::Strict) {
            throw LedgerError("correction pipeline: inequality '" + name + "' failed (lhs = " +
                              fmt_scalar(lhs) + ", bound = " + fmt_scalar(bound) + ")");
        }
    }

    std::vector<LedgerEntry<S>>& entries_;
    RunMode mode_;
    bool all_ok_ = true;
};

} // namespace detail

// Executes the correction construction for a positive norm-one operator out
// of a sup-norm domain:
//   1. admit x0 when ||S x0|| > 1 - eta_definition (checked in gap form);
//   2. partition coordinates into A / B / C and bound the C-block image;
//   3. split (S chi_A, S chi_B) into disjointly supported (h1, h2) at eps/6;
//   4. replace S by U f = S(f chi_A) chi_{supp h1} + S(f chi_B) chi_{supp h2},
//      built by structural masking so supports are exact;
//   5. return T = U/||U|| and u0 = chi_B - chi_A + x0 chi_C.
// Strict mode throws on any hypothesis or ledger failure; Measure mode
// records failures and pushes the construction through whenever the
// arithmetic is defined, for experiments that chart infeasible regimes.
template <class S>
BpbCertificate<S> run_correction_pipeline(const PositiveOperator<S>& S_in, const Vec<S>& x0_in,
                                          const S& eps, const Modulus<S>& delta, RunMode mode,
                                          std::optional<EtaBudget<S>> budget_in = std::nullopt) {
    if (!(eps > S(0)) || !(eps < S(1))) {
        throw std::invalid_argument("correction pipeline: eps outside (0,1)");
    }
    if (x0_in.dim() != S_in.domain_dim()) {
        throw std::invalid_argument("correction pipeline: x0 dim != domain dim");
    }
    const NormedLattice<S>& Y = S_in.codomain();
    const S tol = ScalarTraits<S>::norm_eq_tol();
    const S slack = ScalarTraits<S>::ledger_slack();

    // Normalize the operator; the definition quantifies over the unit sphere.
    const S raw_norm = operator_norm_positive(S_in);
    if (!(raw_norm > S(0))) {
        throw PreconditionError("correction pipeline: operator is zero");
    }
    S scale(1);
    PositiveOperator<S> S_op = S_in;
    if (scalar_abs(raw_norm - S(1)) > tol) {
        S_op = S_in.scaled_by_inverse(raw_norm);
        scale = raw_norm;
    }
    const S norm_S = operator_norm_positive(S_op);

    // The point must lie on the unit sphere; it is rejected, not rescaled.
    const S sup_x0 = sup_norm(x0_in);
    if (scalar_abs(sup_x0 - S(1)) > tol) {
        throw PreconditionError("correction pipeline: ||x0||_sup != 1 (got " +
                                detail::fmt_scalar(sup_x0) + ")");
    }

    const EtaBudget<S> budget = budget_in ? *budget_in : compute_eta(eps, delta);
    const S eta = budget.eta_internal;

    BpbCertificate<S> cert{S_op, S_op, x0_in, x0_in, {}, budget, scale,
                           {},   {},   false, false, false, false};
    detail::LedgerBook<S> book(cert.ledger, mode);

    // Admission threshold, compared as a gap so that near-1 thresholds
    // remain meaningful in float mode.
    const Vec<S> S_x0 = S_op.apply(x0_in);
    const S norm_Sx0 = Y.eval(S_x0);
    const S gap = norm_S - norm_Sx0;
    cert.precondition_met = gap < budget.eta_definition;
    if (!cert.precondition_met && mode == RunMode::Strict) {
        throw PreconditionError(
            "correction pipeline: point not near-attaining for this budget (1 - ||S x0|| = " +
            detail::fmt_scalar(gap) + " >= eta_definition = " +
            detail::fmt_scalar(budget.eta_definition) + ")");
    }

    cert.partition = partition_near_extremes(x0_in, eta);
    const auto& part = cert.partition;
    if (part.A.empty() && part.B.empty()) {
        // Excluded by the admission threshold: ||S(x0 chi_C)|| <= (1-eta)||S||.
        if (mode == RunMode::Strict) {
            throw LedgerError("correction pipeline: no coordinate of x0 is within eta of +-1");
        }
        return cert;
    }

    const std::size_t n = S_op.domain_dim();
    const std::size_t m = Y.dim();
    const auto mask_A = mask_from_indices(n, part.A);
    const auto mask_B = mask_from_indices(n, part.B);
    const auto mask_C = mask_from_indices(n, part.C);

    // C-block image bound, forced by uniform monotonicity.
    const Vec<S> S_chiC = S_op.matrix().apply_indicator(mask_C);
    book.upper("c_block_bound", Y.eval(S_chiC), eta);

    // A and B columns act like -1 and +1 up to eta.
    Vec<S> affA = Vec<S>::zeros(n);
    for (std::size_t k : part.A) affA[k] = S(1) + x0_in[k];
    Vec<S> affB = Vec<S>::zeros(n);
    for (std::size_t k : part.B) affB[k] = x0_in[k] - S(1);
    book.upper("a_block_affinity", Y.eval(S_op.apply(affA)), eta);
    book.upper("b_block_affinity", Y.eval(S_op.apply(affB)), eta);

    const Vec<S> SA = S_op.matrix().apply_indicator(mask_A);
    const Vec<S> SB = S_op.matrix().apply_indicator(mask_B);

    // Separation of the block images; stable product form of
    // ||S chi_B - S chi_A|| > 1/(1 + delta(eps/18)).
    const S sep = Y.eval(SB - SA);
    const S sep_bound = S(1) / (S(1) + budget.delta_eps18);
    book.lower("block_separation", sep, sep_bound,
               sep * (S(1) + budget.delta_eps18) + slack > S(1));

    book.upper("block_sum_bound", Y.eval(SA + SB), S(1));

    // Split at eps/6: the conclusion ||h_i - S chi_.|| < eps/6 is what the
    // replacement estimate needs, and its hypothesis is exactly the
    // separation bound above.
    const SplitResult<S> split =
        disjoint_support_split(SA, SB, eps / S(6), Y, delta, mode == RunMode::Strict);
    if (!(split.denom > S(0))) {
        return cert; // not constructible (measure mode only; strict threw)
    }
    book.upper("split_h1_error", split.h1_err, eps / S(6));
    book.upper("split_h2_error", split.h2_err, eps / S(6));

    const auto supp_h1 = support(split.h1);
    const auto supp_h2 = support(split.h2);
    {
        std::vector<bool> seen(m, false);
        for (std::size_t i : supp_h1) seen[i] = true;
        for (std::size_t i : supp_h2) {
            if (seen[i]) throw LedgerError("correction pipeline: split supports intersect");
        }
    }
    const auto rows_h1 = mask_from_indices(m, supp_h1);
    const auto rows_h2 = mask_from_indices(m, supp_h2);

    // Leak of the block images outside the kept rows.
    std::vector<bool> off_h1(m), off_h2(m);
    for (std::size_t i = 0; i < m; ++i) {
        off_h1[i] = !rows_h1[i];
        off_h2[i] = !rows_h2[i];
    }
    book.upper("a_mask_leak", Y.eval(restrict_to(SA, off_h1)), eps / S(6));
    book.upper("b_mask_leak", Y.eval(restrict_to(SB, off_h2)), eps / S(6));

    // U keeps A-columns on the rows of h1 and B-columns on the rows of h2;
    // C-columns are dropped. Masking is structural, never multiplicative.
    Matrix<S> U = Matrix<S>::zeros(m, n);
    for (std::size_t k : part.A) {
        for (std::size_t i : supp_h1) U.at(i, k) = S_op.matrix().at(i, k);
    }
    for (std::size_t k : part.B) {
        for (std::size_t i : supp_h2) U.at(i, k) = S_op.matrix().at(i, k);
    }
    const PositiveOperator<S> U_op(U, Y);
    const S norm_U = operator_norm_positive(U_op);

    const S half = eps / S(2);
    book.upper("replacement_distance", operator_norm_general(U - S_op.matrix(), Y), half);
    book.upper("replacement_norm_drift", scalar_abs(norm_U - S(1)), half);

    if (!(norm_U > S(0))) {
        if (mode == RunMode::Strict) {
            throw LedgerError("correction pipeline: replacement operator vanished");
        }
        return cert;
    }

    cert.T = U_op.scaled_by_inverse(norm_U);

    Vec<S> u0 = Vec<S>::zeros(n);
    for (std::size_t k : part.B) u0[k] = S(1);
    for (std::size_t k : part.A) u0[k] = S(-1);
    for (std::size_t k : part.C) u0[k] = x0_in[k];
    cert.u0 = u0;
    cert.constructed = true;

    cert.measured.norm_T = operator_norm_positive(cert.T);
    cert.measured.norm_Tu0 = Y.eval(cert.T.apply(u0));
    cert.measured.dist_ops = operator_distance(cert.T, S_op);
    cert.measured.dist_points = sup_norm(u0 - x0_in);

    book.upper("unit_point", scalar_abs(sup_norm(u0) - S(1)), S(0));
    book.upper("operator_norm_one", scalar_abs(cert.measured.norm_T - S(1)), tol);
    book.upper("exact_attainment", scalar_abs(cert.measured.norm_Tu0 - cert.measured.norm_T), tol);
    book.upper("point_distance_within_eta", cert.measured.dist_points, eta);
    book.strict_upper("operator_distance_below_eps", cert.measured.dist_ops, eps);

    cert.ledger_ok = book.all_ok();
    cert.valid = cert.precondition_met && cert.constructed &&
                 scalar_abs(cert.measured.norm_T - S(1)) <= tol &&
                 scalar_abs(cert.measured.norm_Tu0 - cert.measured.norm_T) <= tol &&
                 cert.measured.dist_ops < eps && cert.measured.dist_points < eps;
    return cert;
}

// Correction for positive operators out of (R^n, sup): runs the
// construction step by step and returns a fully measured certificate.
template <class S>
BpbCertificate<S> bpb_correct_linfty(const PositiveOperator<S>& S_in, const Vec<S>& x0,
                                     const S& eps, const Modulus<S>& delta) {
    return run_correction_pipeline(S_in, x0, eps, delta, RunMode::Strict);
}

// Variant for c0-type domains, modeled as finitely supported sequences: the
// operator has a declared active block of columns and everything beyond is
// zero. x0 may be longer than the active block; the sup norm must be
// attained inside it. The supremum characterizations over truncations
// collapse to the full active block and are recorded in the ledger.
template <class S>
BpbCertificate<S> bpb_correct_c0(const PositiveOperator<S>& S_in, const Vec<S>& x0,
                                 const S& eps, const Modulus<S>& delta) {
    const std::size_t active_n = S_in.domain_dim();
    const std::size_t work_n = std::max(active_n, x0.dim());
    const NormedLattice<S>& Y = S_in.codomain();
    const S tol = ScalarTraits<S>::norm_eq_tol();

    S sup_active(0);
    for (std::size_t k = 0; k < std::min(active_n, x0.dim()); ++k) {
        sup_active = scalar_max(sup_active, scalar_abs(x0[k]));
    }
    if (sup_active + tol < sup_norm(x0)) {
        throw PreconditionError(
            "c0 correction: sup norm of x0 is attained only beyond the active columns");
    }

    // Extend to the working block: zero columns, zero coordinates.
    Matrix<S> ext = Matrix<S>::zeros(Y.dim(), work_n);
    for (std::size_t i = 0; i < Y.dim(); ++i) {
        for (std::size_t j = 0; j < active_n; ++j) ext.at(i, j) = S_in.matrix().at(i, j);
    }
    Vec<S> x0_ext = Vec<S>::zeros(work_n);
    for (std::size_t k = 0; k < x0.dim(); ++k) x0_ext[k] = x0[k];
    const PositiveOperator<S> S_ext(ext, Y);

    BpbCertificate<S> cert = run_correction_pipeline(S_ext, x0_ext, eps, delta, RunMode::Strict);

    // Norm via partial sums of basis images: nondecreasing, attained at the
    // full block.
    const S norm_S = operator_norm_positive(cert.S_op);
    S prev(0);
    S max_partial(0);
    std::vector<bool> head(work_n, false);
    for (std::size_t k = 0; k < work_n; ++k) {
        head[k] = true;
        const S pk = Y.eval(cert.S_op.matrix().apply_indicator(head));
        if (pk + ScalarTraits<S>::ledger_slack() < prev) {
            throw LedgerError("c0 correction: partial-sum norms are not nondecreasing");
        }
        prev = pk;
        max_partial = scalar_max(max_partial, pk);
    }
    cert.ledger.push_back({"partial_sum_sup_attained", scalar_abs(max_partial - norm_S), tol,
                           false, scalar_abs(max_partial - norm_S) <= tol});

    // C-block bound via truncations C_n; for finite column support the
    // supremum is the full C-block value already checked by the pipeline.
    const auto mask_C = mask_from_indices(work_n, cert.partition.C);
    S max_trunc(0);
    std::vector<bool> cn(work_n, false);
    for (std::size_t k = 0; k < work_n; ++k) {
        if (mask_C[k]) cn[k] = true;
        max_trunc = scalar_max(max_trunc, Y.eval(cert.S_op.matrix().apply_indicator(cn)));
    }
    cert.ledger.push_back({"c_block_truncation_sup", max_trunc, cert.budget.eta_internal, false,
                           max_trunc <= cert.budget.eta_internal + ScalarTraits<S>::ledger_slack()});

    bool all_ok = true;
    for (const auto& e : cert.ledger) all_ok = all_ok && e.ok;
    if (!all_ok) {
        throw LedgerError("c0 correction: truncation ledger failed");
    }
    cert.ledger_ok = all_ok;
    return cert;
}

// If the admitted point was positive, the corrected point can be taken
// positive as well: |u0| works because | |u0| - x0 | <= |u0 - x0|
// coordinatewise and ||T u0|| <= ||T |u0| || <= ||T|| squeezes the norm.
template <class S>
BpbCertificate<S> positivity_lift(BpbCertificate<S> cert, const Vec<S>& x0) {
    if (!nonnegative(x0)) {
        throw PreconditionError("positivity_lift: x0 must be >= 0");
    }
    if (!cert.constructed) {
        throw PreconditionError("positivity_lift: certificate has no constructed point");
    }
    const NormedLattice<S>& Y = cert.T.codomain();
    const S tol = ScalarTraits<S>::norm_eq_tol();

    const Vec<S> lifted = abs(cert.u0);
    if (lifted == cert.u0) {
        return cert; // already positive
    }
    const S old_dist = sup_norm(cert.u0 - x0);
    const S new_norm = Y.eval(cert.T.apply(lifted));
    if (scalar_abs(new_norm - cert.measured.norm_T) > tol) {
        throw LedgerError("positivity_lift: norm attainment did not survive |u0|");
    }
    const S new_dist = sup_norm(lifted - x0);
    if (new_dist > old_dist + ScalarTraits<S>::ledger_slack()) {
        throw LedgerError("positivity_lift: distance to x0 increased");
    }
    cert.u0 = lifted;
    cert.measured.norm_Tu0 = new_norm;
    cert.measured.dist_points = new_dist;
    cert.ledger.push_back({"lift_preserves_attainment", scalar_abs(new_norm - cert.measured.norm_T),
                           tol, false, true});
    return cert;
}

// Independent re-check of a certificate: every norm is recomputed from the
// stored operators and points, with the operator norm taken over sign
// vectors rather than through the positive-operator shortcut.
template <class S>
struct VerifyResult {
    bool ok = true;
    std::vector<std::string> failures;
    Measured<S> recomputed;
};

template <class S>
VerifyResult<S> verify_certificate(const BpbCertificate<S>& cert) {
    VerifyResult<S> res;
    const NormedLattice<S>& Y = cert.T.codomain();
    const S tol = ScalarTraits<S>::norm_eq_tol();
    auto fail = [&](const std::string& msg) {
        res.ok = false;
        res.failures.push_back(msg);
    };

    if (!cert.T.matrix().nonnegative()) fail("T has a negative entry");
    res.recomputed.norm_T = operator_norm_general(cert.T.matrix(), Y);
    res.recomputed.norm_Tu0 = Y.eval(cert.T.apply(cert.u0));
    res.recomputed.dist_ops = operator_norm_general(cert.T.matrix() - cert.S_op.matrix(), Y);
    res.recomputed.dist_points = sup_norm(cert.u0 - cert.x0);

    if (scalar_abs(res.recomputed.norm_T - S(1)) > tol) fail("||T|| != 1");
    if (scalar_abs(res.recomputed.norm_Tu0 - res.recomputed.norm_T) > tol) {
        fail("||T u0|| != ||T||");
    }
    if (scalar_abs(sup_norm(cert.u0) - S(1)) > tol) fail("||u0||_sup != 1");
    if (!(res.recomputed.dist_ops < cert.budget.epsilon)) fail("||T - S|| >= eps");
    if (!(res.recomputed.dist_points < cert.budget.epsilon)) fail("||u0 - x0||_sup >= eps");

    const S meas_tol = ScalarTraits<S>::exact ? S(0) : S(1e-12);
    if (scalar_abs(res.recomputed.norm_T - cert.measured.norm_T) > meas_tol ||
        scalar_abs(res.recomputed.norm_Tu0 - cert.measured.norm_Tu0) > meas_tol ||
        scalar_abs(res.recomputed.dist_ops - cert.measured.dist_ops) > meas_tol ||
        scalar_abs(res.recomputed.dist_points - cert.measured.dist_points) > meas_tol) {
        fail("stored measurements disagree with recomputation");
    }
    return res;
}

} // namespace bpb
