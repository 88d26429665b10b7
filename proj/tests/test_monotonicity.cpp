#include "bpb/modulus.hpp"
#include "bpb/rational.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace bpb;
using testsup::make_lattice;

namespace {

// Independent minimization oracle: dense random search plus a multiplicative
// polish, sharing no code with modulus_estimate. Minimizes ||x + y|| over
// positive x on the unit sphere and positive y on the eps-sphere.
double min_positive_pair_norm_oracle(const NormedLattice<double>& L, double eps,
                                     std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t dim = L.dim();
    auto renorm = [&](Vec<double> v, double r) {
        const double nv = L.eval(v);
        for (std::size_t i = 0; i < dim; ++i) v[i] *= r / nv;
        return v;
    };
    double best = std::numeric_limits<double>::infinity();
    Vec<double> bx = Vec<double>::zeros(dim), by = bx;
    for (int s = 0; s < 4000; ++s) {
        Vec<double> x = Vec<double>::zeros(dim), y = x;
        for (std::size_t i = 0; i < dim; ++i) {
            x[i] = rng.bernoulli(0.4) ? 0.0 : rng.uniform01();
            y[i] = rng.bernoulli(0.4) ? 0.0 : rng.uniform01();
        }
        if (!(L.eval(x) > 0.0) || !(L.eval(y) > 0.0)) continue;
        x = renorm(x, 1.0);
        y = renorm(y, eps);
        const double val = L.eval(x + y);
        if (val < best) {
            best = val;
            bx = x;
            by = y;
        }
    }
    for (double step = 0.5; step > 1e-10; step *= 0.5) {
        bool moved = true;
        while (moved) {
            moved = false;
            for (int side = 0; side < 2; ++side) {
                Vec<double>& target = side == 0 ? bx : by;
                const double r = side == 0 ? 1.0 : eps;
                for (std::size_t k = 0; k < dim; ++k) {
                    for (double f : {1.0 + step, 1.0 / (1.0 + step), 0.0}) {
                        Vec<double> cand = target;
                        cand[k] = cand[k] * f;
                        if (!(L.eval(cand) > 0.0)) continue;
                        cand = renorm(cand, r);
                        const double val =
                            side == 0 ? L.eval(cand + by) : L.eval(bx + cand);
                        if (val < best - 1e-15) {
                            best = val;
                            target = cand;
                            moved = true;
                        }
                    }
                }
            }
        }
    }
    return best;
}

} // namespace

TEST_CASE("l1 modulus estimate matches the additive identity") {
    // For x, y >= 0 the l1 norm adds, so the optimal modulus is delta(t) = t.
    for (std::size_t dim : {1, 2, 4, 6}) {
        const auto L = make_lattice<double>(NormFamily::L1, dim);
        for (double eps : {0.1, 0.5, 0.9}) {
            const auto est = modulus_estimate(L, eps);
            CHECK(est.uniformly_monotone);
            CHECK(est.raw == doctest::Approx(eps).epsilon(1e-9));
            CHECK(est.value <= eps);
            CHECK(est.value >= eps - 0.01); // documented accuracy budget
        }
    }
}

TEST_CASE("l2 modulus estimate against the brute-force oracle") {
    const auto L = make_lattice<double>(NormFamily::Lp, 2, 2.0);
    const double eps = 0.5;
    const double oracle_min = min_positive_pair_norm_oracle(L, eps, 777);
    CHECK(oracle_min == doctest::Approx(std::sqrt(1.25)).epsilon(1e-6)); // 1.1180...

    const auto est = modulus_estimate(L, eps);
    CHECK(est.raw == doctest::Approx(oracle_min - 1.0).epsilon(1e-6));
    CHECK(est.value == doctest::Approx(0.1180).epsilon(5e-3));
    CHECK(std::fabs(est.value - (std::sqrt(1.25) - 1.0)) <= 0.02 * (std::sqrt(1.25) - 1.0));
}

TEST_CASE("sup norm is flagged as not uniformly monotone") {
    const auto L = make_lattice<double>(NormFamily::Sup, 2);
    for (double eps : {0.1, 0.5, 0.9}) {
        const auto est = modulus_estimate(L, eps);
        CHECK_FALSE(est.uniformly_monotone);
        CHECK(est.value == 0.0);
        // Explicit witness x = (1,0), y = (0,eps): ||x+y||_sup = 1.
        CHECK(L.eval(Vec<double>{1.0, eps}) == 1.0);
    }
}

TEST_CASE("delta to eta conversion values") {
    const auto L = make_lattice<double>(NormFamily::L1, 2);
    const auto delta = *analytic_modulus(L.norm());
    const auto eta = delta_to_eta(delta);
    CHECK(eta.form == ModulusForm::Eta2);
    CHECK(eta.source == ModulusSource::Converted);
    CHECK(eta(0.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(eta(0.9) == doctest::Approx(0.9 / 1.9).epsilon(1e-12));

    // delta -> 0 forces eta -> 0.
    Modulus<double> tiny = delta;
    tiny.fn = [](const double&) { return 1e-14; };
    CHECK(delta_to_eta(tiny)(0.5) == doctest::Approx(1e-14).epsilon(1e-6));
}

TEST_CASE("eta to delta conversion values") {
    Modulus<double> eta;
    eta.form = ModulusForm::Eta2;
    eta.name = "eta-test";
    eta.fn = [](const double& t) { return t / (1.0 + t); };
    const auto delta = eta_to_delta(eta);
    CHECK(delta.form == ModulusForm::Delta);
    CHECK(delta(0.5) == doctest::Approx(0.2).epsilon(1e-12));

    Modulus<double> constant = eta;
    constant.fn = [](const double&) { return 0.25; };
    const auto dconst = eta_to_delta(constant);
    CHECK(dconst(0.1) == 0.25);
    CHECK(dconst(0.9) == 0.25);

    CHECK_THROWS_AS(eta_to_delta(delta), std::invalid_argument);
}

TEST_CASE("round-tripped modulus stays a valid witness") {
    // delta -> eta -> delta' gives (eps/2)/(1 + eps/2) on l1: weaker but valid.
    const auto L = make_lattice<double>(NormFamily::L1, 3);
    const auto delta = *analytic_modulus(L.norm());
    const auto round = eta_to_delta(delta_to_eta(delta));
    CHECK(round(0.5) == doctest::Approx(0.25 / 1.25).epsilon(1e-12));
    const auto report = validate_modulus(L, round, 10000, 5);
    CHECK(report.ok());
}

TEST_CASE("validate_modulus accepts the exact l1 modulus") {
    const auto L = make_lattice<double>(NormFamily::L1, 2);
    const auto report = validate_modulus(L, *analytic_modulus(L.norm()), 10000, 7);
    CHECK(report.ok());
    CHECK(report.samples == 10000);
}

TEST_CASE("validate_modulus rejects an over-stated modulus") {
    const auto L = make_lattice<double>(NormFamily::L1, 2);
    Modulus<double> wrong;
    wrong.form = ModulusForm::Delta;
    wrong.name = "2eps";
    wrong.fn = [](const double& t) { return 2.0 * t; };
    const auto report = validate_modulus(L, wrong, 10000, 9);
    CHECK_FALSE(report.ok());
    bool saw_exceeds = false, saw_implication = false;
    for (const auto& v : report.violations) {
        saw_exceeds = saw_exceeds || v.kind == "delta_exceeds_t";
        saw_implication = saw_implication || v.kind == "implication";
    }
    CHECK(saw_exceeds);
    CHECK(saw_implication);
}

TEST_CASE("validate_modulus rejects any positive modulus on the sup norm") {
    const auto L = make_lattice<double>(NormFamily::Sup, 2);
    Modulus<double> claimed;
    claimed.form = ModulusForm::Delta;
    claimed.name = "sup-claim";
    claimed.fn = [](const double& t) { return 0.5 * t; };
    CHECK_FALSE(validate_modulus(L, claimed, 10000, 13).ok());
}

TEST_CASE("delta form never exceeds its argument for shipped moduli") {
    Rng rng(15);
    for (auto family : {NormFamily::L1, NormFamily::WeightedL1, NormFamily::Lp}) {
        for (double p : {2.0, 4.0}) {
            if (family != NormFamily::Lp && p > 2.0) continue;
            const auto L = make_lattice<double>(family, 3, p, &rng);
            const auto delta = *analytic_modulus(L.norm());
            for (int s = 0; s < 500; ++s) {
                const double t = rng.uniform(1e-6, 1.0 - 1e-6);
                const double v = delta(t);
                CHECK(v > 0.0);
                CHECK(v <= t * (1.0 + 1e-12));
            }
        }
    }
}

TEST_CASE("numeric modulus is usable and validated on l1") {
    const auto L = make_lattice<double>(NormFamily::L1, 3);
    const auto mod = numeric_modulus(L);
    // Nondecreasing across interleaved queries.
    const double a = mod(0.5);
    const double b = mod(0.2);
    const double c = mod(0.8);
    CHECK(b <= a);
    CHECK(a <= c);
    CHECK(validate_modulus(L, mod, 2000, 17).ok());
}

TEST_CASE("estimated moduli pass validation for the uniformly monotone families") {
    Rng rng(19);
    for (auto family : {NormFamily::L1, NormFamily::Lp, NormFamily::WeightedL1}) {
        const auto L = make_lattice<double>(family, 3, 2.0, &rng);
        const auto mod = numeric_modulus(L);
        CHECK(validate_modulus(L, mod, 10000, 23).ok());
    }
}

TEST_CASE("modulus domain is the open unit interval") {
    const auto L = make_lattice<double>(NormFamily::L1, 2);
    const auto delta = *analytic_modulus(L.norm());
    CHECK_THROWS_AS(delta(0.0), std::invalid_argument);
    CHECK_THROWS_AS(delta(1.0), std::invalid_argument);
    CHECK_THROWS_AS(modulus_estimate(L, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(modulus_estimate(L, -0.1), std::invalid_argument);
}

TEST_CASE("conversions work in rational mode") {
    const auto L = make_lattice<Rational>(NormFamily::L1, 2);
    const auto delta = *analytic_modulus(L.norm());
    const auto eta = delta_to_eta(delta);
    CHECK(eta(Rational(1, 2)) == Rational(1, 3));
    const auto back = eta_to_delta(eta);
    CHECK(back(Rational(1, 2)) == Rational(1, 5));
}
