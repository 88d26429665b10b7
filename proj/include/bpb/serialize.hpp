#pragma once

#include "bpb/converse.hpp"
#include "bpb/solver.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace bpb {

using json = nlohmann::json;

inline constexpr const char* kFormatVersion = "0.1.0";

// Scalars: doubles as JSON numbers, rationals as numerator/denominator
// string pairs.
inline json scalar_to_json(double v) { return v; }
inline json scalar_to_json(const Rational& v) {
    return json{{"num", rational_num_str(v)}, {"den", rational_den_str(v)}};
}

template <class S>
S scalar_from_json(const json& j);

template <>
inline double scalar_from_json<double>(const json& j) {
    return j.get<double>();
}

template <>
inline Rational scalar_from_json<Rational>(const json& j) {
    if (j.is_number()) return rational_from_double(j.get<double>());
    return rational_from_strings(j.at("num").get<std::string>(), j.at("den").get<std::string>());
}

template <class S>
json vec_to_json(const Vec<S>& v) {
    json arr = json::array();
    for (std::size_t i = 0; i < v.dim(); ++i) arr.push_back(scalar_to_json(v[i]));
    return arr;
}

template <class S>
Vec<S> vec_from_json(const json& j) {
    std::vector<S> entries;
    entries.reserve(j.size());
    for (const auto& e : j) entries.push_back(scalar_from_json<S>(e));
    return Vec<S>(std::move(entries));
}

// Matrices are dense row-major.
template <class S>
json matrix_to_json(const Matrix<S>& mat) {
    json data = json::array();
    for (const S& x : mat.data()) data.push_back(scalar_to_json(x));
    return json{{"rows", mat.rows()}, {"cols", mat.cols()}, {"data", std::move(data)}};
}

template <class S>
Matrix<S> matrix_from_json(const json& j) {
    const std::size_t rows = j.at("rows").get<std::size_t>();
    const std::size_t cols = j.at("cols").get<std::size_t>();
    std::vector<S> data;
    data.reserve(rows * cols);
    for (const auto& e : j.at("data")) data.push_back(scalar_from_json<S>(e));
    return Matrix<S>(rows, cols, std::move(data));
}

template <class S>
json norm_to_json(const MonotoneNorm<S>& norm) {
    json j{{"family", family_name(norm.family())}};
    if (norm.family() == NormFamily::Lp) j["p"] = norm.p();
    if (norm.family() == NormFamily::WeightedL1) {
        json w = json::array();
        for (const S& wi : norm.weights()) w.push_back(scalar_to_json(wi));
        j["weights"] = std::move(w);
    }
    return j;
}

template <class S>
MonotoneNorm<S> norm_from_json(const json& j) {
    const std::string family = j.at("family").get<std::string>();
    if (family == "l1") return MonotoneNorm<S>::l1();
    if (family == "sup") return MonotoneNorm<S>::sup();
    if (family == "lp") return MonotoneNorm<S>::lp(j.value("p", 2.0));
    if (family == "weighted_l1") {
        std::vector<S> w;
        for (const auto& e : j.at("weights")) w.push_back(scalar_from_json<S>(e));
        return MonotoneNorm<S>::weighted_l1(std::move(w));
    }
    throw std::invalid_argument("norm_from_json: unknown family '" + family + "'");
}

template <class S>
json budget_to_json(const EtaBudget<S>& b) {
    return json{{"epsilon", scalar_to_json(b.epsilon)},
                {"eta_internal", scalar_to_json(b.eta_internal)},
                {"eta_definition", scalar_to_json(b.eta_definition)},
                {"delta_eps18", scalar_to_json(b.delta_eps18)},
                {"delta_eta_sq", scalar_to_json(b.delta_eta_sq)},
                {"modulus", b.modulus.name}};
}

template <class S>
json certificate_to_json(const BpbCertificate<S>& cert) {
    json ledger = json::array();
    for (const auto& e : cert.ledger) {
        ledger.push_back(json{{"name", e.name},
                              {"lhs", scalar_to_json(e.lhs)},
                              {"bound", scalar_to_json(e.bound)},
                              {"is_lower_bound", e.is_lower_bound},
                              {"ok", e.ok}});
    }
    return json{{"format", "bpblab.certificate"},
                {"version", kFormatVersion},
                {"mode", ScalarTraits<S>::mode_name()},
                {"norm", norm_to_json(cert.T.codomain().norm())},
                {"codomain_dim", cert.T.codomain().dim()},
                {"S", matrix_to_json(cert.S_op.matrix())},
                {"T", matrix_to_json(cert.T.matrix())},
                {"x0", vec_to_json(cert.x0)},
                {"u0", vec_to_json(cert.u0)},
                {"measured",
                 json{{"norm_T", scalar_to_json(cert.measured.norm_T)},
                      {"norm_Tu0", scalar_to_json(cert.measured.norm_Tu0)},
                      {"dist_ops", scalar_to_json(cert.measured.dist_ops)},
                      {"dist_points", scalar_to_json(cert.measured.dist_points)}}},
                {"budget", budget_to_json(cert.budget)},
                {"input_scale", scalar_to_json(cert.input_scale)},
                {"partition",
                 json{{"A", cert.partition.A}, {"B", cert.partition.B}, {"C", cert.partition.C}}},
                {"ledger", std::move(ledger)},
                {"precondition_met", cert.precondition_met},
                {"constructed", cert.constructed},
                {"ledger_ok", cert.ledger_ok},
                {"valid", cert.valid}};
}

// Rebuilds a certificate from its serialized form. The budget's modulus is
// restored as the analytic modulus of the codomain family, which every
// shipped certificate was produced with; the re-verification below does not
// consult it.
template <class S>
BpbCertificate<S> certificate_from_json(const json& j) {
    const std::size_t dim = j.at("codomain_dim").get<std::size_t>();
    NormedLattice<S> Y(dim, norm_from_json<S>(j.at("norm")));

    PositiveOperator<S> S_op(matrix_from_json<S>(j.at("S")), Y);
    PositiveOperator<S> T(matrix_from_json<S>(j.at("T")), Y);

    EtaBudget<S> budget;
    const json& b = j.at("budget");
    budget.epsilon = scalar_from_json<S>(b.at("epsilon"));
    budget.eta_internal = scalar_from_json<S>(b.at("eta_internal"));
    budget.eta_definition = scalar_from_json<S>(b.at("eta_definition"));
    budget.delta_eps18 = scalar_from_json<S>(b.at("delta_eps18"));
    budget.delta_eta_sq = scalar_from_json<S>(b.at("delta_eta_sq"));
    if (auto mod = analytic_modulus(Y.norm())) budget.modulus = *mod;

    BpbCertificate<S> cert{std::move(S_op),
                           std::move(T),
                           vec_from_json<S>(j.at("x0")),
                           vec_from_json<S>(j.at("u0")),
                           {},
                           std::move(budget),
                           scalar_from_json<S>(j.at("input_scale")),
                           {},
                           {},
                           j.at("precondition_met").get<bool>(),
                           j.at("constructed").get<bool>(),
                           j.at("ledger_ok").get<bool>(),
                           j.at("valid").get<bool>()};
    const json& meas = j.at("measured");
    cert.measured.norm_T = scalar_from_json<S>(meas.at("norm_T"));
    cert.measured.norm_Tu0 = scalar_from_json<S>(meas.at("norm_Tu0"));
    cert.measured.dist_ops = scalar_from_json<S>(meas.at("dist_ops"));
    cert.measured.dist_points = scalar_from_json<S>(meas.at("dist_points"));
    const json& part = j.at("partition");
    cert.partition.A = part.at("A").get<std::vector<std::size_t>>();
    cert.partition.B = part.at("B").get<std::vector<std::size_t>>();
    cert.partition.C = part.at("C").get<std::vector<std::size_t>>();
    for (const auto& e : j.at("ledger")) {
        cert.ledger.push_back({e.at("name").get<std::string>(),
                               scalar_from_json<S>(e.at("lhs")),
                               scalar_from_json<S>(e.at("bound")),
                               e.at("is_lower_bound").get<bool>(),
                               e.at("ok").get<bool>()});
    }
    return cert;
}

struct DocVerifyResult {
    bool ok = false;
    std::vector<std::string> failures;
};

// Independent verification of a serialized certificate document.
inline DocVerifyResult verify_certificate_document(const json& doc) {
    DocVerifyResult out;
    try {
        const std::string mode = doc.at("mode").get<std::string>();
        if (mode == "rational") {
            const auto res = verify_certificate(certificate_from_json<Rational>(doc));
            out.ok = res.ok;
            out.failures = res.failures;
        } else {
            const auto res = verify_certificate(certificate_from_json<double>(doc));
            out.ok = res.ok;
            out.failures = res.failures;
        }
    } catch (const std::exception& e) {
        out.ok = false;
        out.failures.push_back(std::string("malformed certificate: ") + e.what());
    }
    return out;
}

} // namespace bpb
