#pragma once

#include "bpb/serialize.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bpb {

struct NormSpec {
    std::string family = "l1";
    double p = 2.0;
    std::vector<double> weights; // weighted_l1 only; generated from the seed if empty
};

// One experiment: which pipeline to run, over which instance family.
struct ExperimentConfig {
    std::string command; // modulus | bpb-linfty | bpb-c0 | converse
    NormSpec norm;
    std::size_t n = 4, m = 4;
    double epsilon = 0.5;
    std::vector<double> epsilons; // modulus sweeps; falls back to {epsilon}
    std::uint64_t seed = 1;
    std::size_t count = 10;
    std::string mode = "float"; // float | rational
    std::string output;         // directory for report files; empty writes nothing
    double u_min = 0.1, u_max = 0.5; // converse sweep of ||u||
    std::size_t samples = 10000;     // modulus validation sample count
    json explicit_instances;         // optional array of {"S": matrix, "x0": [...]}
};

std::vector<ExperimentConfig> parse_config(const json& doc);
json config_to_json(const ExperimentConfig& cfg);

// One CSV row. Optional fields render as empty cells.
struct RunRow {
    std::size_t instance_id = 0;
    std::size_t n = 0, m = 0;
    std::string norm_family;
    double epsilon = 0.0;
    bool has_budget = false;
    double eta_internal = 0.0, eta_definition = 0.0;
    bool precond_met = false;
    bool has_measured = false;
    double dist_ops = 0.0, dist_points = 0.0, norm_T = 0.0, norm_Tu0 = 0.0;
    bool ledger_ok = false;
    std::int64_t micros = 0;
};

struct RunReport {
    ExperimentConfig config;
    std::vector<RunRow> rows;
    json details = json::object(); // command-specific payload; no timing
    std::size_t violations = 0;
};

RunReport run_experiment(const ExperimentConfig& cfg);

// Fixed column set; micros is wall time and the one non-reproducible column.
std::string report_csv(const RunReport& report);
// Full-fidelity document; carries no timing so bytes reproduce given
// (config, seed, version).
json report_json(const RunReport& report);

struct SuiteResult {
    std::vector<RunReport> reports;
    std::size_t violations = 0;
    std::vector<std::string> files_written;
};

SuiteResult run_suite(const json& config_doc, const std::string& command_override = "",
                      const std::string& out_override = "",
                      std::optional<std::uint64_t> seed_override = std::nullopt,
                      const std::string& mode_override = "");

json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace bpb
