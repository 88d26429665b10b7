#include "bpb/harness.hpp"
#include "bpb/instances.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace bpb;

namespace {

py::object json_to_py(const json& j) {
    switch (j.type()) {
        case json::value_t::null:
            return py::none();
        case json::value_t::boolean:
            return py::bool_(j.get<bool>());
        case json::value_t::number_integer:
            return py::int_(j.get<std::int64_t>());
        case json::value_t::number_unsigned:
            return py::int_(j.get<std::uint64_t>());
        case json::value_t::number_float:
            return py::float_(j.get<double>());
        case json::value_t::string:
            return py::str(j.get<std::string>());
        case json::value_t::array: {
            py::list out;
            for (const auto& e : j) out.append(json_to_py(e));
            return out;
        }
        case json::value_t::object: {
            py::dict out;
            for (auto it = j.begin(); it != j.end(); ++it) {
                out[py::str(it.key())] = json_to_py(it.value());
            }
            return out;
        }
        default:
            return py::none();
    }
}

json py_to_json(py::handle h) {
    if (h.is_none()) return nullptr;
    if (py::isinstance<py::bool_>(h)) return h.cast<bool>();
    if (py::isinstance<py::int_>(h)) return h.cast<std::int64_t>();
    if (py::isinstance<py::float_>(h)) return h.cast<double>();
    if (py::isinstance<py::str>(h)) return h.cast<std::string>();
    if (py::isinstance<py::dict>(h)) {
        json out = json::object();
        for (auto item : h.cast<py::dict>()) {
            out[item.first.cast<std::string>()] = py_to_json(item.second);
        }
        return out;
    }
    if (py::isinstance<py::list>(h) || py::isinstance<py::tuple>(h)) {
        json out = json::array();
        for (auto item : h.cast<py::sequence>()) out.push_back(py_to_json(item));
        return out;
    }
    throw py::type_error("unsupported value in config/certificate structure");
}

template <class S>
MonotoneNorm<S> norm_from_args(const std::string& family, double p,
                               const std::optional<std::vector<double>>& weights) {
    if (family == "l1") return MonotoneNorm<S>::l1();
    if (family == "sup") return MonotoneNorm<S>::sup();
    if (family == "lp") return MonotoneNorm<S>::lp(p);
    if (family == "weighted_l1") {
        if (!weights) throw std::invalid_argument("weighted_l1 needs a weights list");
        std::vector<S> w;
        for (double wi : *weights) w.push_back(ScalarTraits<S>::from_double(wi));
        return MonotoneNorm<S>::weighted_l1(std::move(w));
    }
    throw std::invalid_argument("unknown norm family '" + family + "'");
}

template <class S>
Matrix<S> matrix_from_rows_py(const std::vector<std::vector<double>>& rows) {
    std::vector<std::vector<S>> conv;
    conv.reserve(rows.size());
    for (const auto& r : rows) {
        std::vector<S> row;
        row.reserve(r.size());
        for (double x : r) row.push_back(ScalarTraits<S>::from_double(x));
        conv.push_back(std::move(row));
    }
    return Matrix<S>::from_rows(conv);
}

template <class S>
Vec<S> vec_from_py(const std::vector<double>& entries) {
    std::vector<S> conv;
    conv.reserve(entries.size());
    for (double x : entries) conv.push_back(ScalarTraits<S>::from_double(x));
    return Vec<S>(std::move(conv));
}

template <class S>
Modulus<S> delta_for(const MonotoneNorm<S>& norm) {
    auto mod = analytic_modulus(norm);
    if (!mod) {
        throw std::invalid_argument("norm family '" + norm.name() +
                                    "' is not uniformly monotone");
    }
    return *mod;
}

template <class S>
py::object correct_impl(const std::vector<std::vector<double>>& S_rows,
                        const std::vector<double>& x0, double eps, const std::string& family,
                        double p, const std::optional<std::vector<double>>& weights, bool c0,
                        bool lift) {
    Matrix<S> mat = matrix_from_rows_py<S>(S_rows);
    NormedLattice<S> Y(mat.rows(), norm_from_args<S>(family, p, weights));
    PositiveOperator<S> op(std::move(mat), Y);
    const auto delta = delta_for<S>(Y.norm());
    const S eps_s = ScalarTraits<S>::from_double(eps);
    auto cert = c0 ? bpb_correct_c0(op, vec_from_py<S>(x0), eps_s, delta)
                   : bpb_correct_linfty(op, vec_from_py<S>(x0), eps_s, delta);
    if (lift) cert = positivity_lift(cert, abs(cert.x0));
    return json_to_py(certificate_to_json(cert));
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Constructive norm-attainment corrections for positive operators on "
              "finite-dimensional Banach lattices";
    m.attr("__version__") = kFormatVersion;

    py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
    py::register_exception<LedgerError>(m, "LedgerError", PyExc_RuntimeError);

    m.def(
        "lattice_ops",
        [](const std::vector<double>& x, const std::vector<double>& y) {
            const auto vx = vec_from_py<double>(x);
            const auto vy = vec_from_py<double>(y);
            py::dict out;
            out["meet"] = meet(vx, vy).entries();
            out["join"] = join(vx, vy).entries();
            out["abs"] = abs(vx).entries();
            out["pos_part"] = pos_part(vx).entries();
            out["neg_part"] = neg_part(vx).entries();
            return out;
        },
        py::arg("x"), py::arg("y"),
        "Coordinatewise meet/join of (x, y) and |x|, x+, x- of the first argument.");

    m.def(
        "operator_norm_positive",
        [](const std::vector<std::vector<double>>& rows, const std::string& family, double p,
           const std::optional<std::vector<double>>& weights) {
            Matrix<double> mat = matrix_from_rows_py<double>(rows);
            NormedLattice<double> Y(mat.rows(), norm_from_args<double>(family, p, weights));
            return operator_norm_positive(PositiveOperator<double>(std::move(mat), Y));
        },
        py::arg("matrix"), py::arg("family") = "l1", py::arg("p") = 2.0,
        py::arg("weights") = py::none(),
        "Norm of a positive operator out of a sup-norm domain: the codomain norm of the "
        "row sums.");

    m.def(
        "operator_norm_general",
        [](const std::vector<std::vector<double>>& rows, const std::string& family, double p,
           const std::optional<std::vector<double>>& weights, std::size_t n_max) {
            Matrix<double> mat = matrix_from_rows_py<double>(rows);
            NormedLattice<double> Y(mat.rows(), norm_from_args<double>(family, p, weights));
            return operator_norm_general(mat, Y, n_max);
        },
        py::arg("matrix"), py::arg("family") = "l1", py::arg("p") = 2.0,
        py::arg("weights") = py::none(), py::arg("n_max") = kMaxExactNormDim,
        "Exact operator norm over the sign vectors of the sup-norm unit ball.");

    m.def(
        "modulus_estimate",
        [](std::size_t dim, double eps, const std::string& family, double p,
           const std::optional<std::vector<double>>& weights, std::uint64_t seed) {
            NormedLattice<double> Y(dim, norm_from_args<double>(family, p, weights));
            EstimateParams params;
            params.seed = seed;
            const auto est = modulus_estimate(Y, eps, params);
            py::dict out;
            out["value"] = est.value;
            out["raw_gap"] = est.raw;
            out["uniformly_monotone"] = est.uniformly_monotone;
            out["argmin_x"] = est.argmin_x.entries();
            out["argmin_y"] = est.argmin_y.entries();
            return out;
        },
        py::arg("dim"), py::arg("eps"), py::arg("family") = "l1", py::arg("p") = 2.0,
        py::arg("weights") = py::none(), py::arg("seed") = 0x5eed,
        "Numeric under-approximation of the uniform-monotonicity modulus at eps.");

    m.def(
        "validate_modulus",
        [](std::size_t dim, const std::string& family, double p,
           const std::optional<std::vector<double>>& weights, std::size_t samples,
           std::uint64_t seed) {
            NormedLattice<double> Y(dim, norm_from_args<double>(family, p, weights));
            const auto report = validate_modulus(Y, delta_for<double>(Y.norm()), samples, seed);
            py::dict out;
            out["ok"] = report.ok();
            out["samples"] = report.samples;
            out["violations"] = report.violations.size();
            return out;
        },
        py::arg("dim"), py::arg("family") = "l1", py::arg("p") = 2.0,
        py::arg("weights") = py::none(), py::arg("samples") = 10000, py::arg("seed") = 1,
        "Randomized counterexample search against the family's analytic modulus.");

    m.def(
        "modulus_values",
        [](double eps, const std::string& family, double p,
           const std::optional<std::vector<double>>& weights, std::size_t dim) {
            NormedLattice<double> Y(dim, norm_from_args<double>(family, p, weights));
            const auto delta = delta_for<double>(Y.norm());
            const auto eta = delta_to_eta(delta);
            const auto round = eta_to_delta(eta);
            py::dict out;
            out["delta"] = delta(eps);
            out["eta"] = eta(eps);
            out["round_trip_delta"] = round(eps);
            return out;
        },
        py::arg("eps"), py::arg("family") = "l1", py::arg("p") = 2.0,
        py::arg("weights") = py::none(), py::arg("dim") = 2,
        "Analytic modulus value with its eta form and the round-tripped delta.");

    m.def(
        "compute_eta",
        [](double eps, const std::string& family, double p,
           const std::optional<std::vector<double>>& weights, std::size_t dim) {
            NormedLattice<double> Y(dim, norm_from_args<double>(family, p, weights));
            const auto budget = compute_eta(eps, delta_for<double>(Y.norm()));
            py::dict out;
            out["epsilon"] = budget.epsilon;
            out["eta_internal"] = budget.eta_internal;
            out["eta_definition"] = budget.eta_definition;
            return out;
        },
        py::arg("eps"), py::arg("family") = "l1", py::arg("p") = 2.0,
        py::arg("weights") = py::none(), py::arg("dim") = 2,
        "Largest admissible eta for the correction at eps, with the admission window.");

    m.def(
        "disjoint_support_split",
        [](const std::vector<double>& f1, const std::vector<double>& f2, double eps,
           const std::string& family, double p, const std::optional<std::vector<double>>& weights) {
            const auto v1 = vec_from_py<double>(f1);
            const auto v2 = vec_from_py<double>(f2);
            NormedLattice<double> Y(v1.dim(), norm_from_args<double>(family, p, weights));
            const auto res = disjoint_support_split(v1, v2, eps, Y, delta_for<double>(Y.norm()));
            py::dict out;
            out["h1"] = res.h1.entries();
            out["h2"] = res.h2.entries();
            out["denominator"] = res.denom;
            out["h1_err"] = res.h1_err;
            out["h2_err"] = res.h2_err;
            out["cross_mass"] = res.cross_mass;
            return out;
        },
        py::arg("f1"), py::arg("f2"), py::arg("eps"), py::arg("family") = "l1",
        py::arg("p") = 2.0, py::arg("weights") = py::none(),
        "Split a positive pair into disjointly supported functions with unit sum norm.");

    m.def(
        "bpb_correct_linfty",
        [](const std::vector<std::vector<double>>& S_rows, const std::vector<double>& x0,
           double eps, const std::string& family, double p,
           const std::optional<std::vector<double>>& weights, const std::string& mode,
           bool lift) {
            return mode == "rational"
                       ? correct_impl<Rational>(S_rows, x0, eps, family, p, weights, false, lift)
                       : correct_impl<double>(S_rows, x0, eps, family, p, weights, false, lift);
        },
        py::arg("S"), py::arg("x0"), py::arg("eps"), py::arg("family") = "l1",
        py::arg("p") = 2.0, py::arg("weights") = py::none(), py::arg("mode") = "float",
        py::arg("lift") = false,
        "Correct a positive near-attaining pair out of a sup-norm domain into an exactly "
        "attaining certificate.");

    m.def(
        "bpb_correct_c0",
        [](const std::vector<std::vector<double>>& S_rows, const std::vector<double>& x0,
           double eps, const std::string& family, double p,
           const std::optional<std::vector<double>>& weights, const std::string& mode,
           bool lift) {
            return mode == "rational"
                       ? correct_impl<Rational>(S_rows, x0, eps, family, p, weights, true, lift)
                       : correct_impl<double>(S_rows, x0, eps, family, p, weights, true, lift);
        },
        py::arg("S"), py::arg("x0"), py::arg("eps"), py::arg("family") = "l1",
        py::arg("p") = 2.0, py::arg("weights") = py::none(), py::arg("mode") = "float",
        py::arg("lift") = false,
        "Correction variant for finitely supported c0-type domains.");

    m.def(
        "verify_certificate",
        [](py::dict cert) {
            const auto res = verify_certificate_document(py_to_json(cert));
            py::dict out;
            out["ok"] = res.ok;
            out["failures"] = res.failures;
            return out;
        },
        py::arg("certificate"),
        "Re-verify a serialized certificate by recomputing every norm it claims.");

    m.def(
        "necessity_probe",
        [](const std::vector<double>& u, const std::vector<double>& v, double eps,
           const std::string& family, double p, const std::optional<std::vector<double>>& weights) {
            const auto vu = vec_from_py<double>(u);
            const auto vv = vec_from_py<double>(v);
            NormedLattice<double> Y(vu.dim(), norm_from_args<double>(family, p, weights));
            const auto delta = delta_for<double>(Y.norm());
            ConverseInstance<double> inst(InftySumDomain{1, 1}, Y, vu, vv, Vec<double>{1.0},
                                          Vec<double>{1.0});
            const auto row = necessity_probe(inst, eps, compute_eta(eps, delta));
            py::dict out;
            out["u_norm"] = row.u_norm;
            out["v_minus_u_norm"] = row.v_minus_u_norm;
            out["precondition_met"] = row.precondition_met;
            out["constructed"] = row.constructed;
            out["vacuous"] = row.vacuous;
            out["t_n0_max"] = row.t_n0_max;
            out["dist_ops"] = row.dist_ops;
            out["lower_bound_ok"] = row.lower_bound_ok;
            out["within_eps"] = row.within_eps;
            return out;
        },
        py::arg("u"), py::arg("v"), py::arg("eps"), py::arg("family") = "l1", py::arg("p") = 2.0,
        py::arg("weights") = py::none(),
        "Necessity experiment row for one adversarial pair 0 <= u <= v with ||v|| = 1.");

    m.def(
        "run_suite",
        [](py::handle config, const std::string& out_dir) {
            const auto suite = run_suite(py_to_json(config), "", out_dir);
            py::dict out;
            out["violations"] = suite.violations;
            py::list reports;
            for (const auto& rep : suite.reports) reports.append(json_to_py(report_json(rep)));
            out["reports"] = reports;
            out["files_written"] = suite.files_written;
            return out;
        },
        py::arg("config"), py::arg("out_dir") = "",
        "Run a config document (same schema as the CLI) and return the reports.");
}
