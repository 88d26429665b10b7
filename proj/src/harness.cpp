#include "bpb/harness.hpp"

#include "bpb/instances.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace bpb {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

NormSpec norm_spec_from_json(const json& j) {
    NormSpec spec;
    spec.family = j.value("family", "l1");
    spec.p = j.value("p", 2.0);
    if (j.contains("weights")) spec.weights = j.at("weights").get<std::vector<double>>();
    return spec;
}

template <class S>
NormedLattice<S> lattice_from_spec(const NormSpec& spec, std::size_t dim, std::uint64_t seed) {
    if (spec.family == "l1") return {dim, MonotoneNorm<S>::l1()};
    if (spec.family == "sup") return {dim, MonotoneNorm<S>::sup()};
    if (spec.family == "lp") return {dim, MonotoneNorm<S>::lp(spec.p)};
    if (spec.family == "weighted_l1") {
        std::vector<S> w;
        if (!spec.weights.empty()) {
            if (spec.weights.size() != dim) {
                throw std::invalid_argument("config: weighted_l1 weight count != m");
            }
            for (double wi : spec.weights) w.push_back(ScalarTraits<S>::from_double(wi));
        } else {
            Rng rng(Rng::mix(seed, 0xB1A5ull));
            for (std::size_t i = 0; i < dim; ++i) {
                w.push_back(ScalarTraits<S>::from_double(0.5 + 1.5 * rng.dyadic16()));
            }
        }
        return {dim, MonotoneNorm<S>::weighted_l1(std::move(w))};
    }
    throw std::invalid_argument("config: unknown norm family '" + spec.family + "'");
}

ExperimentConfig experiment_from_json(const json& j) {
    ExperimentConfig cfg;
    cfg.command = j.value("command", "");
    if (j.contains("norm")) cfg.norm = norm_spec_from_json(j.at("norm"));
    if (j.contains("dims")) {
        cfg.n = j.at("dims").value("n", cfg.n);
        cfg.m = j.at("dims").value("m", cfg.m);
    }
    cfg.epsilon = j.value("epsilon", cfg.epsilon);
    if (j.contains("epsilons")) cfg.epsilons = j.at("epsilons").get<std::vector<double>>();
    cfg.seed = j.value("seed", cfg.seed);
    cfg.count = j.value("count", cfg.count);
    cfg.mode = j.value("mode", cfg.mode);
    cfg.output = j.value("output", cfg.output);
    if (j.contains("u_norm")) {
        cfg.u_min = j.at("u_norm").value("min", cfg.u_min);
        cfg.u_max = j.at("u_norm").value("max", cfg.u_max);
    }
    cfg.samples = j.value("samples", cfg.samples);
    if (j.contains("instances")) cfg.explicit_instances = j.at("instances");
    return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.command != "modulus" && cfg.command != "bpb-linfty" && cfg.command != "bpb-c0" &&
        cfg.command != "converse") {
        throw std::invalid_argument("config: unknown command '" + cfg.command + "'");
    }
    if (cfg.n == 0 || cfg.m == 0) throw std::invalid_argument("config: dims must be >= 1");
    if (cfg.n > kMaxExactNormDim) {
        throw std::invalid_argument("config: n exceeds the exact-norm cap (n_max = " +
                                    std::to_string(kMaxExactNormDim) + ")");
    }
    if (cfg.command != "modulus" && (!(cfg.epsilon > 0.0) || !(cfg.epsilon < 1.0))) {
        throw std::invalid_argument("config: epsilon outside (0,1)");
    }
    if (cfg.mode != "float" && cfg.mode != "rational") {
        throw std::invalid_argument("config: mode must be float or rational");
    }
    if (cfg.mode == "rational" &&
        (cfg.norm.family == "lp" || (cfg.command != "modulus" && cfg.norm.family == "sup"))) {
        throw std::invalid_argument("config: rational mode supports l1/weighted_l1 codomains");
    }
}

template <class S>
void append_bpb_rows(const ExperimentConfig& cfg, bool c0_domain, RunReport& report) {
    const auto Y = lattice_from_spec<S>(cfg.norm, cfg.m, cfg.seed);
    const auto delta_opt = analytic_modulus(Y.norm());
    if (!delta_opt) {
        throw std::invalid_argument(
            "config: codomain norm is not uniformly monotone; no correction budget exists");
    }
    const S eps = ScalarTraits<S>::from_double(cfg.epsilon);
    const EtaBudget<S> budget = compute_eta(eps, *delta_opt);

    // Explicit instances carry full matrices; their shapes win over cfg dims.
    auto explicit_instance = [&](std::size_t i) {
        const json& ij = cfg.explicit_instances.at(i);
        Matrix<S> mat = matrix_from_json<S>(ij.at("S"));
        const auto Yi = lattice_from_spec<S>(cfg.norm, mat.rows(), cfg.seed);
        return CorrectionInstance<S>{PositiveOperator<S>(std::move(mat), Yi),
                                     vec_from_json<S>(ij.at("x0"))};
    };

    const bool use_explicit = cfg.explicit_instances.is_array();
    const std::size_t total = use_explicit ? cfg.explicit_instances.size() : cfg.count;
    json certs = json::array();
    json rejections = json::array();

    for (std::size_t i = 0; i < total; ++i) {
        RunRow row;
        row.instance_id = i;
        row.norm_family = cfg.norm.family;
        row.epsilon = cfg.epsilon;
        row.has_budget = true;
        row.eta_internal = ScalarTraits<S>::to_double(budget.eta_internal);
        row.eta_definition = ScalarTraits<S>::to_double(budget.eta_definition);

        const auto t0 = std::chrono::steady_clock::now();
        try {
            CorrectionInstance<S> inst = [&] {
                if (use_explicit) return explicit_instance(i);
                Rng rng(Rng::mix(cfg.seed, i));
                return random_feasible_instance<S>(rng, cfg.n, cfg.m, Y, budget);
            }();
            row.n = inst.S_op.domain_dim();
            row.m = inst.S_op.codomain().dim();

            const BpbCertificate<S> cert =
                c0_domain ? bpb_correct_c0(inst.S_op, inst.x0, eps, *delta_opt)
                          : bpb_correct_linfty(inst.S_op, inst.x0, eps, *delta_opt);

            row.precond_met = cert.precondition_met;
            row.has_measured = true;
            row.dist_ops = ScalarTraits<S>::to_double(cert.measured.dist_ops);
            row.dist_points = ScalarTraits<S>::to_double(cert.measured.dist_points);
            row.norm_T = ScalarTraits<S>::to_double(cert.measured.norm_T);
            row.norm_Tu0 = ScalarTraits<S>::to_double(cert.measured.norm_Tu0);

            // Success rows are re-verified from the serialized document
            // before they are written.
            json doc = certificate_to_json(cert);
            const DocVerifyResult reverify = verify_certificate_document(doc);
            row.ledger_ok = cert.ledger_ok && cert.valid && reverify.ok;
            if (!row.ledger_ok) ++report.violations;
            certs.push_back(std::move(doc));
        } catch (const PreconditionError& e) {
            row.n = cfg.n;
            row.m = cfg.m;
            row.precond_met = false;
            row.ledger_ok = true; // an inadmissible instance is not a violation
            rejections.push_back(json{{"instance_id", i}, {"error", e.what()}});
        } catch (const LedgerError& e) {
            row.n = cfg.n;
            row.m = cfg.m;
            row.ledger_ok = false;
            ++report.violations;
            rejections.push_back(json{{"instance_id", i}, {"error", e.what()}});
        }
        row.micros = std::chrono::duration_cast<std::chrono::microseconds>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
        report.rows.push_back(std::move(row));
    }
    report.details["certificates"] = std::move(certs);
    report.details["rejections"] = std::move(rejections);
}

void append_modulus_rows(const ExperimentConfig& cfg, RunReport& report) {
    const auto Y = lattice_from_spec<double>(cfg.norm, cfg.m, cfg.seed);
    std::vector<double> epsilons = cfg.epsilons;
    if (epsilons.empty()) epsilons = {0.1, 0.5, 0.9};

    EstimateParams params;
    params.seed = cfg.seed;
    json estimates = json::array();

    const bool family_um = Y.norm().uniformly_monotone();
    std::size_t validation_violations = 0;
    if (family_um) {
        const auto mod = numeric_modulus(Y, params);
        const auto val = validate_modulus(Y, mod, cfg.samples, Rng::mix(cfg.seed, 0xFACEull));
        validation_violations = val.violations.size();
    }

    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        RunRow row;
        row.instance_id = i;
        row.n = Y.dim();
        row.m = Y.dim();
        row.norm_family = cfg.norm.family;
        row.epsilon = epsilons[i];

        const auto t0 = std::chrono::steady_clock::now();
        const EstimateResult est = modulus_estimate(Y, epsilons[i], params);
        row.micros = std::chrono::duration_cast<std::chrono::microseconds>(
                         std::chrono::steady_clock::now() - t0)
                         .count();

        row.precond_met = est.uniformly_monotone;
        const bool flag_consistent = est.uniformly_monotone == family_um;
        row.ledger_ok = flag_consistent && validation_violations == 0;
        if (!row.ledger_ok) ++report.violations;

        estimates.push_back(json{{"epsilon", epsilons[i]},
                                 {"delta_hat", est.value},
                                 {"raw_gap", est.raw},
                                 {"uniformly_monotone", est.uniformly_monotone},
                                 {"argmin_x", vec_to_json(est.argmin_x)},
                                 {"argmin_y", vec_to_json(est.argmin_y)}});
        report.rows.push_back(std::move(row));
    }
    report.details["estimates"] = std::move(estimates);
    report.details["validation_violations"] = validation_violations;
    report.details["validation_samples"] = family_um ? cfg.samples : 0;
}

void append_converse_rows(const ExperimentConfig& cfg, RunReport& report) {
    const auto Y = lattice_from_spec<double>(cfg.norm, cfg.m, cfg.seed);
    const auto delta_opt = analytic_modulus(Y.norm());
    if (!delta_opt) {
        throw std::invalid_argument("config: converse experiments need a uniformly monotone Y");
    }
    const EtaBudget<double> budget = compute_eta(cfg.epsilon, *delta_opt);

    json rows_detail = json::array();
    for (std::size_t i = 0; i < cfg.count; ++i) {
        RunRow row;
        row.instance_id = i;
        row.n = 2;
        row.m = Y.dim();
        row.norm_family = cfg.norm.family;
        row.epsilon = cfg.epsilon;
        row.has_budget = true;
        row.eta_internal = budget.eta_internal;
        row.eta_definition = budget.eta_definition;

        const double span = cfg.count > 1 ? double(i) / double(cfg.count - 1) : 0.0;
        const double target = cfg.u_min + (cfg.u_max - cfg.u_min) * span;

        const auto t0 = std::chrono::steady_clock::now();
        Rng rng(Rng::mix(cfg.seed, i));
        const auto inst = random_converse_instance<double>(rng, Y, target);
        const NecessityRow<double> nrow = necessity_probe(inst, cfg.epsilon, budget);
        row.micros = std::chrono::duration_cast<std::chrono::microseconds>(
                         std::chrono::steady_clock::now() - t0)
                         .count();

        row.precond_met = nrow.precondition_met;
        row.has_measured = nrow.constructed;
        row.dist_ops = nrow.dist_ops;
        row.norm_T = nrow.constructed ? 1.0 : 0.0;
        row.ledger_ok = nrow.vacuous || (nrow.t_n0_zero && nrow.lower_bound_ok);
        if (!row.ledger_ok) ++report.violations;

        json detail{{"instance_id", i},
                    {"u_norm", nrow.u_norm},
                    {"v_minus_u_norm", nrow.v_minus_u_norm},
                    {"t_n0_max", nrow.t_n0_max},
                    {"dist_ops", nrow.dist_ops},
                    {"within_eps", nrow.within_eps},
                    {"vacuous", nrow.vacuous},
                    {"lift_and_extract_ok", nrow.lift_and_extract_ok},
                    {"note", nrow.note}};
        if (nrow.cheaper_alternative) detail["cheaper_alternative"] = *nrow.cheaper_alternative;
        rows_detail.push_back(std::move(detail));
        report.rows.push_back(std::move(row));
    }
    report.details["necessity"] = std::move(rows_detail);
}

} // namespace

std::vector<ExperimentConfig> parse_config(const json& doc) {
    std::vector<ExperimentConfig> out;
    if (doc.is_array()) {
        for (const auto& e : doc) out.push_back(experiment_from_json(e));
    } else if (doc.is_object() && doc.contains("experiments")) {
        for (const auto& e : doc.at("experiments")) out.push_back(experiment_from_json(e));
    } else if (doc.is_object()) {
        out.push_back(experiment_from_json(doc));
    } else {
        throw std::invalid_argument("config: expected an object or an array of experiments");
    }
    return out;
}

json config_to_json(const ExperimentConfig& cfg) {
    json j{{"command", cfg.command},
           {"norm", json{{"family", cfg.norm.family}}},
           {"dims", json{{"n", cfg.n}, {"m", cfg.m}}},
           {"epsilon", cfg.epsilon},
           {"seed", cfg.seed},
           {"count", cfg.count},
           {"mode", cfg.mode},
           {"samples", cfg.samples},
           {"u_norm", json{{"min", cfg.u_min}, {"max", cfg.u_max}}}};
    if (cfg.norm.family == "lp") j["norm"]["p"] = cfg.norm.p;
    if (!cfg.norm.weights.empty()) j["norm"]["weights"] = cfg.norm.weights;
    if (!cfg.epsilons.empty()) j["epsilons"] = cfg.epsilons;
    return j;
}

RunReport run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    RunReport report;
    report.config = cfg;
    if (cfg.command == "modulus") {
        append_modulus_rows(cfg, report);
    } else if (cfg.command == "converse") {
        append_converse_rows(cfg, report);
    } else {
        const bool c0 = cfg.command == "bpb-c0";
        if (cfg.mode == "rational") {
            append_bpb_rows<Rational>(cfg, c0, report);
        } else {
            append_bpb_rows<double>(cfg, c0, report);
        }
    }
    return report;
}

std::string report_csv(const RunReport& report) {
    std::ostringstream os;
    os << "instance_id,n,m,norm_family,epsilon,eta_internal,eta_definition,precond_met,"
          "dist_ops,dist_points,norm_T,norm_Tu0,ledger_ok,micros\n";
    for (const auto& r : report.rows) {
        os << r.instance_id << ',' << r.n << ',' << r.m << ',' << r.norm_family << ','
           << fmt_double(r.epsilon) << ',';
        if (r.has_budget) os << fmt_double(r.eta_internal);
        os << ',';
        if (r.has_budget) os << fmt_double(r.eta_definition);
        os << ',' << (r.precond_met ? 1 : 0) << ',';
        if (r.has_measured) os << fmt_double(r.dist_ops);
        os << ',';
        if (r.has_measured) os << fmt_double(r.dist_points);
        os << ',';
        if (r.has_measured) os << fmt_double(r.norm_T);
        os << ',';
        if (r.has_measured) os << fmt_double(r.norm_Tu0);
        os << ',' << (r.ledger_ok ? 1 : 0) << ',' << r.micros << '\n';
    }
    return os.str();
}

json report_json(const RunReport& report) {
    json rows = json::array();
    for (const auto& r : report.rows) {
        json row{{"instance_id", r.instance_id},
                 {"n", r.n},
                 {"m", r.m},
                 {"norm_family", r.norm_family},
                 {"epsilon", r.epsilon},
                 {"precond_met", r.precond_met},
                 {"ledger_ok", r.ledger_ok}};
        if (r.has_budget) {
            row["eta_internal"] = r.eta_internal;
            row["eta_definition"] = r.eta_definition;
        }
        if (r.has_measured) {
            row["dist_ops"] = r.dist_ops;
            row["dist_points"] = r.dist_points;
            row["norm_T"] = r.norm_T;
            row["norm_Tu0"] = r.norm_Tu0;
        }
        rows.push_back(std::move(row));
    }
    json summary{{"rows", report.rows.size()}, {"violations", report.violations}};
    std::size_t admitted = 0, ok = 0;
    double max_dist_ops = 0.0, max_dist_points = 0.0;
    bool any_measured = false;
    for (const auto& r : report.rows) {
        admitted += r.precond_met ? 1 : 0;
        ok += r.ledger_ok ? 1 : 0;
        if (r.has_measured) {
            any_measured = true;
            max_dist_ops = std::max(max_dist_ops, r.dist_ops);
            max_dist_points = std::max(max_dist_points, r.dist_points);
        }
    }
    summary["admitted"] = admitted;
    summary["ledger_ok"] = ok;
    if (any_measured) {
        summary["max_dist_ops"] = max_dist_ops;
        summary["max_dist_points"] = max_dist_points;
    }

    return json{{"format", "bpblab.report"},
                {"version", kFormatVersion},
                {"config", config_to_json(report.config)},
                {"rows", std::move(rows)},
                {"summary", std::move(summary)},
                {"details", report.details},
                {"violations", report.violations}};
}

SuiteResult run_suite(const json& config_doc, const std::string& command_override,
                      const std::string& out_override, std::optional<std::uint64_t> seed_override,
                      const std::string& mode_override) {
    SuiteResult result;
    auto configs = parse_config(config_doc);
    for (std::size_t i = 0; i < configs.size(); ++i) {
        ExperimentConfig cfg = configs[i];
        if (!command_override.empty()) {
            if (!cfg.command.empty() && cfg.command != command_override) {
                throw std::invalid_argument("config: experiment command '" + cfg.command +
                                            "' does not match the requested command '" +
                                            command_override + "'");
            }
            cfg.command = command_override;
        }
        if (!out_override.empty()) cfg.output = out_override;
        if (seed_override) cfg.seed = *seed_override;
        if (!mode_override.empty()) cfg.mode = mode_override;

        RunReport report = run_experiment(cfg);
        result.violations += report.violations;

        if (!cfg.output.empty()) {
            std::filesystem::create_directories(cfg.output);
            const std::string stem =
                cfg.output + "/" + std::to_string(i) + "_" + cfg.command;
            write_text_file(stem + ".csv", report_csv(report));
            write_text_file(stem + ".json", report_json(report).dump(2) + "\n");
            result.files_written.push_back(stem + ".csv");
            result.files_written.push_back(stem + ".json");
            if (report.details.contains("certificates")) {
                const auto& certs = report.details.at("certificates");
                for (std::size_t c = 0; c < certs.size(); ++c) {
                    const std::string cpath = stem + "_cert_" + std::to_string(c) + ".json";
                    write_text_file(cpath, certs.at(c).dump(2) + "\n");
                    result.files_written.push_back(cpath);
                }
            }
        }
        result.reports.push_back(std::move(report));
    }
    return result;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    json doc;
    in >> doc;
    return doc;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

} // namespace bpb
