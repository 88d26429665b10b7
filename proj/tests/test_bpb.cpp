#include "bpb/budget.hpp"
#include "bpb/instances.hpp"
#include "bpb/solver.hpp"
#include "bpb/split.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace bpb;
using testsup::make_lattice;

namespace {

Modulus<double> identity_delta() {
    return *analytic_modulus(MonotoneNorm<double>::l1());
}

Modulus<Rational> identity_delta_q() {
    return *analytic_modulus(MonotoneNorm<Rational>::l1());
}

// Independent eta oracle: scan the original constraint
//   1/(1 + delta(eps/18)) < 1/(1 + delta(eta^2)) - 3 eta
// on a fine grid and refine the boundary by bisection.
double eta_oracle(double eps, const Modulus<double>& delta) {
    const double c = 1.0 / (1.0 + delta(eps / 18.0));
    auto feasible = [&](double eta) {
        return eta > 0.0 && c < 1.0 / (1.0 + delta(eta * eta)) - 3.0 * eta;
    };
    const double cap = eps / 18.0;
    double lo = 0.0;
    for (int k = 1; k < 4096; ++k) {
        const double eta = cap * k / 4096.0;
        if (feasible(eta)) lo = eta;
    }
    REQUIRE(lo > 0.0);
    double hi = std::min(cap, lo + cap / 4096.0);
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (feasible(mid)) lo = mid; else hi = mid;
    }
    return lo;
}

} // namespace

// --------------------------------------------------------------------------
// eta selection

TEST_CASE("eta selection matches the scan oracle") {
    const auto delta = identity_delta();
    for (double eps : {0.3, 0.6, 0.9}) {
        const auto budget = compute_eta(eps, delta);
        const double oracle = eta_oracle(eps, delta);
        CHECK(budget.eta_internal == doctest::Approx(oracle).epsilon(1e-6));
        CHECK(budget.eta_internal < eps / 18.0);
        CHECK(budget.eta_internal > 0.0);
        // The selected eta itself satisfies the original strict constraint.
        CHECK(1.0 / (1.0 + delta(eps / 18.0)) <
              1.0 / (1.0 + delta(budget.eta_internal * budget.eta_internal)) -
                  3.0 * budget.eta_internal);
        CHECK(budget.eta_definition ==
              doctest::Approx(budget.delta_eta_sq / (1.0 + budget.delta_eta_sq)).epsilon(1e-15));
        CHECK(budget.eta_definition < eps);
    }
}

TEST_CASE("eta selection: spot instance at eps = 0.9") {
    // eta = 0.015 is admissible: 1/1.05 = 0.95238... < 1/(1 + 0.015^2) - 0.045.
    CHECK(1.0 / 1.05 < 1.0 / (1.0 + 0.015 * 0.015) - 3.0 * 0.015);
    const auto budget = compute_eta(0.9, identity_delta());
    CHECK(budget.eta_internal >= 0.015);
}

TEST_CASE("eta shrinks with eps and vanishes in the limit") {
    const auto delta = identity_delta();
    const auto small = compute_eta(0.01, delta);
    const auto mid = compute_eta(0.3, delta);
    CHECK(small.eta_internal < mid.eta_internal);
    CHECK(small.eta_definition < mid.eta_definition);
    CHECK(small.eta_definition < 1e-6);
}

TEST_CASE("degenerate modulus is rejected") {
    Modulus<double> flat;
    flat.form = ModulusForm::Delta;
    flat.name = "flat";
    flat.fn = [](const double&) { return 1e-15; };
    CHECK_THROWS_WITH_AS(compute_eta(0.5, flat), doctest::Contains("modulus too weak"),
                         PreconditionError);
}

TEST_CASE("eta selection works in rational mode") {
    const auto budget = compute_eta(Rational(9, 10), identity_delta_q());
    CHECK(budget.eta_internal > 0);
    CHECK(budget.eta_internal < Rational(9, 10) / 18);
    const Rational dh = budget.eta_internal * budget.eta_internal;
    CHECK(budget.delta_eta_sq == dh);
    CHECK(budget.eta_definition == dh / (1 + dh));
    // Exact admissibility of the selected eta.
    CHECK(Rational(1) / (1 + Rational(9, 10) / 18) <
          Rational(1) / (1 + dh) - 3 * budget.eta_internal);
}

// --------------------------------------------------------------------------
// disjoint-support splitter

TEST_CASE("splitter leaves disjoint inputs unchanged") {
    const auto Y = make_lattice<double>(NormFamily::L1, 2);
    const Vec<double> f1{0.6, 0.0}, f2{0.0, 0.4};
    const auto res = disjoint_support_split(f1, f2, 0.5, Y, identity_delta());
    CHECK(res.h1 == f1);
    CHECK(res.h2 == f2);
    CHECK(res.denom == doctest::Approx(1.0));
    CHECK(res.cross_mass == 0.0);
}

TEST_CASE("splitter follows the partition construction exactly (rational)") {
    const auto Y = make_lattice<Rational>(NormFamily::L1, 2);
    const Vec<Rational> f1{Rational(7, 10), Rational(1, 20)};
    const Vec<Rational> f2{Rational(1, 20), Rational(1, 5)};
    const Rational eps(4, 5);

    // Hypothesis: ||f1 - f2||_1 = 4/5 >= 1/(1 + delta(eps/3)) = 15/19.
    CHECK(Y.eval(f1 - f2) == Rational(4, 5));
    CHECK(Rational(4, 5) >= Rational(15, 19));

    const auto res = disjoint_support_split(f1, f2, eps, Y, identity_delta_q());
    CHECK((res.c1 == std::vector<std::size_t>{0}));
    CHECK((res.c2 == std::vector<std::size_t>{1}));
    CHECK((res.g1 == Vec<Rational>{Rational(7, 10), Rational(0)}));
    CHECK((res.g2 == Vec<Rational>{Rational(0), Rational(1, 5)}));
    CHECK(res.denom == Rational(9, 10));
    CHECK((res.h1 == Vec<Rational>{Rational(7, 9), Rational(0)}));
    CHECK((res.h2 == Vec<Rational>{Rational(0), Rational(2, 9)}));
    CHECK(res.h1_err == Rational(23, 180));
    CHECK(res.h2_err == Rational(13, 180));
    CHECK(res.h1_err < eps);
    CHECK(Y.eval(res.h1 + res.h2) == Rational(1));
    CHECK(res.cross_mass == Rational(1, 5));
    CHECK(res.cross_mass <= eps / 3);
    CHECK(res.g1_err == Rational(1, 20));
    CHECK(res.g1_err <= eps / 6);
}

TEST_CASE("splitter rejects a vanishing separation") {
    const auto Y = make_lattice<double>(NormFamily::L1, 2);
    // Equal inputs violate the hypotheses (here both of them: the sum norm
    // is 1.2 and the separation is 0).
    const Vec<double> f{0.3, 0.3};
    CHECK_THROWS_AS(disjoint_support_split(f, f, 0.5, Y, identity_delta()), PreconditionError);
    // With an admissible sum norm the named failure is the separation.
    const Vec<double> g{0.3, 0.2};
    CHECK_THROWS_WITH_AS(disjoint_support_split(g, g, 0.5, Y, identity_delta()),
                         doctest::Contains("||f1 - f2||"), PreconditionError);
}

TEST_CASE("splitter rejects negative inputs and oversized sums") {
    const auto Y = make_lattice<double>(NormFamily::L1, 2);
    CHECK_THROWS_AS(disjoint_support_split(Vec<double>{-0.1, 0.5}, Vec<double>{0.0, 0.1}, 0.5, Y,
                                           identity_delta()),
                    PreconditionError);
    CHECK_THROWS_WITH_AS(disjoint_support_split(Vec<double>{1.2, 0.0}, Vec<double>{0.0, 0.4}, 0.5,
                                                Y, identity_delta()),
                         doctest::Contains("||f1 + f2|| <= 1"), PreconditionError);
}

TEST_CASE("splitter property suite on hypothesis-satisfying pairs") {
    Rng rng(101);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t dim = std::size_t(rng.uniform_int(2, 10));
        const auto family = std::vector<NormFamily>{NormFamily::L1, NormFamily::Lp,
                                                    NormFamily::WeightedL1}[rng.uniform_int(0, 2)];
        const auto Y = make_lattice<double>(family, dim, trial % 2 ? 2.0 : 4.0, &rng);
        const auto delta = *analytic_modulus(Y.norm());
        const auto inst = random_split_pair<double>(rng, Y, delta);

        const auto res = disjoint_support_split(inst.f1, inst.f2, inst.eps, Y, delta);
        ++checked;

        // Exact disjointness.
        std::vector<bool> seen(dim, false);
        for (auto i : support(res.h1)) seen[i] = true;
        for (auto i : support(res.h2)) CHECK_FALSE(seen[i]);

        CHECK(std::fabs(Y.eval(res.h1 + res.h2) - 1.0) <= 1e-9);
        CHECK(res.h1_err < inst.eps);
        CHECK(res.h2_err < inst.eps);
        CHECK(res.cross_mass <= inst.eps / 3.0 + 1e-12);
        CHECK(res.g1_err <= inst.eps / 6.0 + 1e-12);
        CHECK(res.g2_err <= inst.eps / 6.0 + 1e-12);
    }
    CHECK(checked == 300);
}

// --------------------------------------------------------------------------
// the correction pipeline

TEST_CASE("already-attaining input is a fixed point") {
    const auto Y = make_lattice<double>(NormFamily::L1, 2);
    const PositiveOperator<double> S(Matrix<double>::from_rows({{0.5, 0.0}, {0.0, 0.5}}), Y);
    const Vec<double> x0{1.0, 1.0};

    const auto cert = bpb_correct_linfty(S, x0, 0.9, identity_delta());
    CHECK(cert.valid);
    CHECK(cert.partition.A.empty());
    CHECK((cert.partition.B == std::vector<std::size_t>{0, 1}));
    CHECK(cert.partition.C.empty());
    CHECK(cert.T.matrix() == S.matrix());
    CHECK(cert.u0 == x0);
    CHECK(cert.measured.dist_ops == 0.0);
    CHECK(cert.measured.dist_points == 0.0);
    CHECK(cert.measured.norm_T == doctest::Approx(1.0));
    CHECK(cert.measured.norm_Tu0 == cert.measured.norm_T);
    CHECK(cert.ledger_ok);
    CHECK(verify_certificate(cert).ok);
}

TEST_CASE("three-column instance walks the whole construction (exact)") {
    const auto Y = make_lattice<Rational>(NormFamily::L1, 2);
    // Columns: (1/2, 0), (0, 1/10^4), (0, 4999/10^4); row sums (1/2, 1/2).
    const Matrix<Rational> mat = Matrix<Rational>::from_rows(
        {{Rational(1, 2), Rational(0), Rational(0)},
         {Rational(0), Rational(1, 10000), Rational(4999, 10000)}});
    const PositiveOperator<Rational> S(mat, Y);
    const Vec<Rational> x0{Rational(1), Rational(0), Rational(-1)};
    const Rational eps(9, 10);

    CHECK(operator_norm_positive(S) == Rational(1));
    // Admission: ||S x0||_1 = 9999/10^4, so the gap is 1/10^4 < eta_definition.
    const auto budget = compute_eta(eps, identity_delta_q());
    CHECK(Rational(1) - Rational(9999, 10000) < budget.eta_definition);

    const auto cert = bpb_correct_linfty(S, x0, eps, identity_delta_q());
    CHECK(cert.valid);
    CHECK((cert.partition.A == std::vector<std::size_t>{2}));
    CHECK((cert.partition.B == std::vector<std::size_t>{0}));
    CHECK((cert.partition.C == std::vector<std::size_t>{1}));
    CHECK((cert.u0 == Vec<Rational>{Rational(1), Rational(0), Rational(-1)}));

    // Hand-executed construction: the C-column is dropped, the kept columns
    // divide by ||U|| = 9999/10^4.
    const Matrix<Rational> expected_T = Matrix<Rational>::from_rows(
        {{Rational(5000, 9999), Rational(0), Rational(0)},
         {Rational(0), Rational(0), Rational(4999, 9999)}});
    CHECK(cert.T.matrix() == expected_T);

    CHECK(cert.measured.norm_T == Rational(1));
    CHECK(cert.measured.norm_Tu0 == Rational(1));
    CHECK(cert.measured.dist_ops == Rational(1, 5000));
    CHECK(cert.measured.dist_points == Rational(0));
    CHECK(cert.measured.dist_ops < eps);
    CHECK(cert.ledger_ok);
    CHECK(verify_certificate(cert).ok);
}

TEST_CASE("far-from-attaining points are rejected with the named error") {
    const auto Y = make_lattice<double>(NormFamily::L1, 2);
    // The stated three-column instance: ||S x0|| = 0.24, far below the
    // admission threshold, so the run must refuse.
    const PositiveOperator<double> S(
        Matrix<double>::from_rows({{0.30, 0.02, 0.30}, {0.30, 0.02, 0.06}}), Y);
    CHECK(operator_norm_positive(S) == doctest::Approx(1.0));
    CHECK_THROWS_WITH_AS(
        bpb_correct_linfty(S, Vec<double>{1.0, 0.0, -1.0}, 0.9, identity_delta()),
        doctest::Contains("not near-attaining"), PreconditionError);

    const auto Y1 = make_lattice<double>(NormFamily::L1, 1);
    const PositiveOperator<double> H(Matrix<double>::from_rows({{0.5, 0.5}}), Y1);
    CHECK_THROWS_WITH_AS(bpb_correct_linfty(H, Vec<double>{1.0, 0.0}, 0.9, identity_delta()),
                         doctest::Contains("not near-attaining"), PreconditionError);
}

TEST_CASE("points off the unit sphere are rejected, not rescaled") {
    const auto Y = make_lattice<double>(NormFamily::L1, 2);
    const PositiveOperator<double> S(Matrix<double>::from_rows({{0.5, 0.0}, {0.0, 0.5}}), Y);
    CHECK_THROWS_WITH_AS(bpb_correct_linfty(S, Vec<double>{0.5, 0.5}, 0.9, identity_delta()),
                         doctest::Contains("||x0||_sup"), PreconditionError);
    CHECK_THROWS_AS(bpb_correct_linfty(S, Vec<double>{2.0, 1.0}, 0.9, identity_delta()),
                    PreconditionError);
}

TEST_CASE("operators are normalized first and the scale is reported") {
    const auto Y = make_lattice<double>(NormFamily::L1, 2);
    const PositiveOperator<double> S(Matrix<double>::from_rows({{1.0, 0.0}, {0.0, 1.0}}), Y);
    const auto cert = bpb_correct_linfty(S, Vec<double>{1.0, 1.0}, 0.9, identity_delta());
    CHECK(cert.input_scale == doctest::Approx(2.0));
    CHECK(cert.valid);
    CHECK(cert.measured.norm_T == doctest::Approx(1.0));

    const PositiveOperator<double> Z(Matrix<double>::zeros(2, 2), Y);
    CHECK_THROWS_WITH_AS(bpb_correct_linfty(Z, Vec<double>{1.0, 1.0}, 0.9, identity_delta()),
                         doctest::Contains("operator is zero"), PreconditionError);
}

TEST_CASE("negative-direction block only") {
    const auto Y = make_lattice<double>(NormFamily::L1, 1);
    const PositiveOperator<double> S(Matrix<double>::from_rows({{0.5, 0.5}}), Y);
    const auto cert = bpb_correct_linfty(S, Vec<double>{-1.0, -1.0}, 0.5, identity_delta());
    CHECK(cert.valid);
    CHECK(cert.partition.B.empty());
    CHECK((cert.partition.A == std::vector<std::size_t>{0, 1}));
    CHECK(cert.T.matrix() == S.matrix());
    CHECK((cert.u0 == Vec<double>{-1.0, -1.0}));
}

TEST_CASE("soundness over random feasible instances (float, all families)") {
    Rng rng(211);
    const auto families = std::vector<NormFamily>{NormFamily::L1, NormFamily::Lp,
                                                  NormFamily::WeightedL1};
    for (int trial = 0; trial < 120; ++trial) {
        const auto family = families[trial % families.size()];
        const double p = trial % 2 ? 2.0 : 4.0;
        const double eps = std::vector<double>{0.3, 0.6, 0.9}[trial % 3];
        const std::size_t n = std::size_t(rng.uniform_int(2, 10));
        const std::size_t m = std::size_t(rng.uniform_int(2, 10));
        const auto Y = make_lattice<double>(family, m, p, &rng);
        const auto delta = *analytic_modulus(Y.norm());
        const auto budget = compute_eta(eps, delta);
        const auto inst = random_feasible_instance(rng, n, m, Y, budget);

        const auto cert = bpb_correct_linfty(inst.S_op, inst.x0, eps, delta);
        CHECK(cert.valid);
        CHECK(cert.ledger_ok);
        CHECK(cert.T.matrix().nonnegative());
        CHECK(std::fabs(cert.measured.norm_T - 1.0) <= 1e-9);
        CHECK(std::fabs(cert.measured.norm_Tu0 - cert.measured.norm_T) <= 1e-9);
        CHECK(cert.measured.dist_ops < eps);
        CHECK(cert.measured.dist_points <= cert.budget.eta_internal);
        CHECK(cert.budget.eta_internal < eps);
        // Structural identity for u0.
        for (auto k : cert.partition.B) CHECK(cert.u0[k] == 1.0);
        for (auto k : cert.partition.A) CHECK(cert.u0[k] == -1.0);
        for (auto k : cert.partition.C) CHECK(cert.u0[k] == inst.x0[k]);
        CHECK(verify_certificate(cert).ok);
    }
}

TEST_CASE("rerunning the solver on its own output is the identity (exact)") {
    Rng rng(307);
    const auto Y = make_lattice<Rational>(NormFamily::L1, 4);
    const auto delta = identity_delta_q();
    const Rational eps = ScalarTraits<Rational>::from_double(0.6);
    const auto budget = compute_eta(eps, delta);
    for (int trial = 0; trial < 10; ++trial) {
        const auto inst = random_feasible_instance<Rational>(rng, 5, 4, Y, budget);
        const auto first = bpb_correct_linfty(inst.S_op, inst.x0, eps, delta);
        REQUIRE(first.valid);
        const auto second = bpb_correct_linfty(first.T, first.u0, eps, delta);
        CHECK(second.T.matrix() == first.T.matrix());
        CHECK(second.u0 == first.u0);
        CHECK(second.measured.norm_T == Rational(1));
        CHECK(second.measured.dist_ops == Rational(0));
        CHECK(second.measured.dist_points == Rational(0));
    }
}

// --------------------------------------------------------------------------
// positivity lift

TEST_CASE("positivity lift keeps already-positive points") {
    const auto Y = make_lattice<double>(NormFamily::L1, 2);
    const PositiveOperator<double> S(Matrix<double>::from_rows({{0.5, 0.0}, {0.0, 0.5}}), Y);
    const Vec<double> x0{1.0, 1.0};
    const auto cert = bpb_correct_linfty(S, x0, 0.9, identity_delta());
    const auto lifted = positivity_lift(cert, x0);
    CHECK(lifted.u0 == cert.u0);
    CHECK(lifted.measured.norm_Tu0 == cert.measured.norm_Tu0);
}

TEST_CASE("positivity lift replaces u0 by |u0| and re-verifies the norms") {
    const auto Y = make_lattice<double>(NormFamily::L1, 2);
    const auto delta = identity_delta();
    const PositiveOperator<double> T(
        Matrix<double>::from_rows({{0.5, 0.0, 0.0}, {0.0, 0.5, 0.0}}), Y);
    // A certificate attaining at a signed point, lifted against a positive x0.
    BpbCertificate<double> cert{T,
                                T,
                                Vec<double>{1.0, 1.0, 0.5},
                                Vec<double>{1.0, -1.0, 0.5},
                                {},
                                compute_eta(0.9, delta),
                                1.0,
                                {},
                                {},
                                true,
                                true,
                                true,
                                true};
    cert.measured.norm_T = 1.0;
    cert.measured.norm_Tu0 = 1.0;

    const Vec<double> x0{1.0, 1.0, 0.5};
    const auto lifted = positivity_lift(cert, x0);
    CHECK((lifted.u0 == Vec<double>{1.0, 1.0, 0.5}));
    CHECK(lifted.measured.norm_Tu0 == doctest::Approx(1.0)); // re-evaluated directly
    CHECK(lifted.measured.dist_points == 0.0);

    CHECK_THROWS_AS(positivity_lift(cert, Vec<double>{1.0, -1.0, 0.5}), PreconditionError);
}

// --------------------------------------------------------------------------
// c0 domain variant

TEST_CASE("c0 solver coincides bit-for-bit with the sup solver on the active block") {
    const auto Y = make_lattice<Rational>(NormFamily::L1, 2);
    const Matrix<Rational> mat = Matrix<Rational>::from_rows(
        {{Rational(1, 2), Rational(0), Rational(0)},
         {Rational(0), Rational(1, 10000), Rational(4999, 10000)}});
    const PositiveOperator<Rational> S(mat, Y);
    const Vec<Rational> x0{Rational(1), Rational(0), Rational(-1)};
    const Rational eps(9, 10);

    const auto a = bpb_correct_linfty(S, x0, eps, identity_delta_q());
    const auto b = bpb_correct_c0(S, x0, eps, identity_delta_q());
    CHECK(a.T.matrix() == b.T.matrix());
    CHECK(a.u0 == b.u0);
    CHECK(a.measured.norm_T == b.measured.norm_T);
    CHECK(a.measured.norm_Tu0 == b.measured.norm_Tu0);
    CHECK(a.measured.dist_ops == b.measured.dist_ops);
    CHECK(a.measured.dist_points == b.measured.dist_points);
    CHECK(a.budget.eta_internal == b.budget.eta_internal);
    CHECK(a.budget.eta_definition == b.budget.eta_definition);
}

TEST_CASE("c0 solver pads finitely supported points beyond the active block") {
    const auto Y = make_lattice<double>(NormFamily::L1, 2);
    const PositiveOperator<double> S(Matrix<double>::from_rows({{0.5, 0.0}, {0.0, 0.5}}), Y);
    const Vec<double> x0{1.0, 1.0, 0.0, 0.0};
    const auto cert = bpb_correct_c0(S, x0, 0.9, identity_delta());
    CHECK(cert.valid);
    CHECK(cert.u0.dim() == 4);
    CHECK(cert.u0[0] == 1.0);
    CHECK(cert.u0[2] == 0.0);
    CHECK(cert.T.matrix().cols() == 4);
}

TEST_CASE("c0 solver rejects points attaining only in the zero-column tail") {
    const auto Y = make_lattice<double>(NormFamily::L1, 1);
    const PositiveOperator<double> S(Matrix<double>::from_rows({{0.5, 0.5}}), Y);
    CHECK_THROWS_WITH_AS(
        bpb_correct_c0(S, Vec<double>{0.5, 0.5, 1.0}, 0.9, identity_delta()),
        doctest::Contains("beyond the active columns"), PreconditionError);

    // A unit basis vector over a zero column is inside the active block but
    // far from attaining, so the admission threshold rejects it.
    const PositiveOperator<double> Z(Matrix<double>::from_rows({{0.0, 0.5, 0.5}}), Y);
    CHECK_THROWS_WITH_AS(bpb_correct_c0(Z, Vec<double>{1.0, 0.0, 0.0}, 0.9, identity_delta()),
                         doctest::Contains("not near-attaining"), PreconditionError);
}

TEST_CASE("partial-sum supremum is attained at the full block (exhaustive oracle)") {
    Rng rng(401);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = std::size_t(rng.uniform_int(1, 8));
        const std::size_t m = std::size_t(rng.uniform_int(1, 6));
        const auto family = std::vector<NormFamily>{NormFamily::L1, NormFamily::Lp,
                                                    NormFamily::WeightedL1,
                                                    NormFamily::Sup}[rng.uniform_int(0, 3)];
        const auto Y = make_lattice<double>(family, m, 2.0, &rng);
        const PositiveOperator<double> T(testsup::random_nonneg_matrix<double>(rng, m, n), Y);

        double prev = 0.0, best = 0.0;
        std::vector<bool> head(n, false);
        for (std::size_t k = 0; k < n; ++k) {
            head[k] = true;
            const double pk = Y.eval(T.matrix().apply_indicator(head));
            CHECK(pk + 1e-12 >= prev);
            prev = pk;
            best = std::max(best, pk);
        }
        CHECK(best == doctest::Approx(operator_norm_positive(T)));
    }
}
