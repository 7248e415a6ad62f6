#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "itd/harness.hpp"
#include "itd/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitVerifyFailed = 2;
constexpr int kExitIo = 3;

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw itd::ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw itd::ConfigError(std::string("config parse: ") + e.what());
    }
    return j;
}

std::vector<double> parse_alpha_list(const std::string& csv) {
    std::vector<double> alphas;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        try {
            alphas.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw itd::ConfigError("bad alpha value: " + tok);
        }
    }
    if (alphas.empty()) throw itd::ConfigError("--alphas needs at least one value");
    return alphas;
}

void print_report(const itd::VerificationReport& report) {
    for (const auto& p : report.properties) {
        std::printf("[%s] %-36s checks=%-8ld worst=%-12.3g %s\n", p.pass ? "PASS" : "FAIL",
                    p.name.c_str(), p.n_checked, p.worst, p.note.c_str());
    }
    std::printf("%s (%zu properties)\n", report.all_pass() ? "verification passed" : "VERIFICATION FAILED",
                report.properties.size());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"implicit-td: explicit/implicit TD(0), TD(lambda) and TDC policy evaluation"};
    app.set_version_flag("--version", ITD_VERSION);
    app.require_subcommand(1);

    std::string config_path, out_dir, alphas_csv, json_out, repro_name;
    bool serial = false;

    auto* run_cmd = app.add_subcommand("run", "run one experiment from a JSON config");
    run_cmd->add_option("config", config_path, "config file")->required();
    run_cmd->add_option("--out", out_dir, "output directory (default: config output_path)");
    run_cmd->add_flag("--serial", serial, "serial reference runner instead of OpenMP");

    auto* sweep_cmd = app.add_subcommand("sweep", "constant step-size sweep");
    sweep_cmd->add_option("config", config_path, "base config file")->required();
    sweep_cmd->add_option("--alphas", alphas_csv, "comma-separated list")->required();
    sweep_cmd->add_option("--out", out_dir, "output directory");

    auto* oracle_cmd = app.add_subcommand("oracle", "print the analytic oracle bundle as JSON");
    oracle_cmd->add_option("config", config_path, "config file")->required();

    auto* verify_cmd = app.add_subcommand("verify", "run the property verification suite");
    verify_cmd->add_option("--json", json_out, "also write the report as JSON");

    auto* repro_cmd = app.add_subcommand("repro", "reproduce a bundled reference experiment");
    repro_cmd->add_option("name", repro_name, "randomwalk-fig3 | mrp-fig5 | baird-table")
        ->required();
    repro_cmd->add_option("--out", out_dir, "output directory (default: out/<name>)");
    repro_cmd->add_flag("--serial", serial, "serial reference runner instead of OpenMP");

    CLI11_PARSE(app, argc, argv);
    const auto par = serial ? itd::Parallelism::Serial : itd::Parallelism::OpenMp;

    try {
        if (run_cmd->parsed()) {
            const itd::ExperimentConfig cfg = itd::config_from_json(load_json(config_path));
            const itd::ExperimentResult result = itd::run_experiment(cfg, par);
            const std::string dir = out_dir.empty() ? cfg.output_path : out_dir;
            itd::emit_outputs(result, dir);
            std::printf("wrote %s/{raw.csv,agg.csv,meta.json,env.json,oracle.json}\n", dir.c_str());
            for (itd::Metric m : cfg.metrics)
                std::printf("final %-12s mean=%.6g std=%.6g\n", itd::metric_name(m).c_str(),
                            itd::final_mean(result, m), itd::final_std(result, m));
            if (!result.diverged.empty())
                std::printf("diverged replications: %zu of %d\n", result.diverged.size(),
                            cfg.n_replications);
            return kExitOk;
        }
        if (sweep_cmd->parsed()) {
            const itd::ExperimentConfig cfg = itd::config_from_json(load_json(config_path));
            const auto table = itd::sweep_step_size(cfg, parse_alpha_list(alphas_csv), par);
            const std::string dir = out_dir.empty() ? cfg.output_path : out_dir;
            itd::emit_sweep(table, cfg, dir);
            for (const auto& row : table)
                std::printf("alpha=%-8g %-20s mean=%-12.6g std=%-12.6g diverged=%d\n", row.alpha,
                            row.variant.c_str(), row.mean_final, row.std_final, row.diverged);
            std::printf("wrote %s/sweep.csv\n", dir.c_str());
            return kExitOk;
        }
        if (oracle_cmd->parsed()) {
            const itd::ExperimentConfig cfg = itd::config_from_json(load_json(config_path));
            const itd::ExperimentResult probe = [&] {
                itd::ExperimentConfig c = cfg;
                c.n_steps = 0;
                c.n_replications = 1;
                return itd::run_experiment(c, itd::Parallelism::Serial);
            }();
            std::cout << itd::oracle_to_json(probe.oracle).dump(2) << "\n";
            return kExitOk;
        }
        if (verify_cmd->parsed()) {
            const itd::VerificationReport report = itd::run_verification_suite();
            print_report(report);
            if (!json_out.empty()) {
                std::ofstream out(json_out);
                if (!out) throw itd::IoError("cannot write " + json_out);
                out << report.to_json().dump(2) << "\n";
            }
            return report.all_pass() ? kExitOk : kExitVerifyFailed;
        }
        if (repro_cmd->parsed()) {
            const std::string dir = out_dir.empty() ? "out/" + repro_name : out_dir;
            itd::run_repro(repro_name, dir, par);
            std::printf("wrote artifacts under %s\n", dir.c_str());
            return kExitOk;
        }
    } catch (const itd::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const itd::IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
    return kExitOk;
}
