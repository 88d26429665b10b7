#include "bpb/harness.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct CommonFlags {
    std::string out;
    std::string mode;
    std::optional<std::uint64_t> seed;
};

void attach_common(CLI::App* sub, CommonFlags& flags, std::uint64_t& seed_slot, bool& seed_set) {
    sub->add_option("--out", flags.out, "Directory for report files");
    sub->add_option("--mode", flags.mode, "Arithmetic mode: float or rational")
        ->check(CLI::IsMember({"float", "rational"}));
    sub->add_option("--seed", seed_slot, "Override the experiment seed")
        ->each([&seed_set](const std::string&) { seed_set = true; });
}

int run_command(const std::string& command, const std::string& config_path,
                const CommonFlags& flags) {
    const bpb::json doc = bpb::load_json_file(config_path);
    const auto suite = bpb::run_suite(doc, command, flags.out, flags.seed, flags.mode);

    std::size_t rows = 0;
    for (const auto& rep : suite.reports) rows += rep.rows.size();
    std::cout << command << ": " << suite.reports.size() << " experiment(s), " << rows
              << " row(s), " << suite.violations << " violation(s)\n";
    for (const auto& f : suite.files_written) std::cout << "wrote " << f << "\n";
    return suite.violations == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constructive norm-attainment corrections for positive operators on "
                 "finite-dimensional lattices"};
    app.require_subcommand(1);

    struct SubSpec {
        const char* name;
        const char* help;
    };
    const SubSpec specs[] = {
        {"modulus", "Estimate and validate uniform-monotonicity moduli"},
        {"bpb-linfty", "Run the sup-norm-domain correction on generated or explicit instances"},
        {"bpb-c0", "Run the c0-domain correction on finitely supported instances"},
        {"converse", "Run the necessity experiment on adversarial pairs"},
    };

    std::string config_paths[4];
    CommonFlags flags[4];
    std::uint64_t seed_values[4] = {0, 0, 0, 0};
    bool seed_set[4] = {false, false, false, false};
    CLI::App* subs[4];
    for (int i = 0; i < 4; ++i) {
        subs[i] = app.add_subcommand(specs[i].name, specs[i].help);
        subs[i]->add_option("config", config_paths[i], "Experiment config (JSON)")->required();
        attach_common(subs[i], flags[i], seed_values[i], seed_set[i]);
    }

    auto* verify = app.add_subcommand("verify", "Re-verify a serialized certificate");
    std::string cert_path;
    verify->add_option("certificate", cert_path, "Certificate file (JSON)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) {
            const auto res = bpb::verify_certificate_document(bpb::load_json_file(cert_path));
            if (res.ok) {
                std::cout << "certificate verified\n";
                return 0;
            }
            std::cout << "certificate INVALID:\n";
            for (const auto& f : res.failures) std::cout << "  - " << f << "\n";
            return 1;
        }
        for (int i = 0; i < 4; ++i) {
            if (subs[i]->parsed()) {
                if (seed_set[i]) flags[i].seed = seed_values[i];
                return run_command(specs[i].name, config_paths[i], flags[i]);
            }
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
