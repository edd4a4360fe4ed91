// cptpsa: command-line driver for the phase-sensitive amplification recipes.
//
//   cptpsa <subcommand> --config <path> [--out <dir>] [--format csv|structured|plot]
//                       [--threads N] [--seed N]
//
// Exit status: 0 success, 2 configuration error, 3 solver error, 4 I/O error.

#include "cptpsa/errors.hpp"
#include "cptpsa/experiments.hpp"
#include "cptpsa/io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace cptpsa;

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kSolverError = 3, kIoError = 4 };

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

// <subcommand>-<timestamp>, with a counter appended if that stem is taken.
std::string unique_stem(const fs::path& dir, const std::string& base) {
    auto taken = [&](const std::string& stem) {
        for (const char* ext : {".csv", ".json", ".svg"}) {
            if (fs::exists(dir / (stem + ext))) return true;
        }
        return false;
    };
    if (!taken(base)) return base;
    for (int k = 1;; ++k) {
        const std::string s = base + "-" + std::to_string(k);
        if (!taken(s)) return s;
    }
}

OutputFormat parse_format(const std::string& f) {
    if (f == "csv") return OutputFormat::kCsv;
    if (f == "structured") return OutputFormat::kStructured;
    if (f == "plot") return OutputFormat::kPlot;
    throw ConfigError("--format: expected csv, structured or plot");
}

struct CommonArgs {
    std::string config_path;
    std::string preset;
    std::string out_dir;
    std::string format;
    int threads = 1;
    std::uint64_t seed = 0;
};

void add_common(CLI::App* sub, CommonArgs& args, bool config_required) {
    auto* cfg = sub->add_option("--config", args.config_path, "JSON experiment config");
    auto* pre = sub->add_option("--preset", args.preset, "start from a named preset (paper-exp, analytic-regime)");
    if (config_required) {
        cfg->excludes(pre);
        pre->excludes(cfg);
    }
    sub->add_option("--out", args.out_dir, "output directory (overrides output.directory)");
    sub->add_option("--format", args.format, "csv | structured | plot (overrides output.format)")
        ->check(CLI::IsMember({"csv", "structured", "plot"}));
    sub->add_option("--threads", args.threads, "worker threads for sweeps")->check(CLI::PositiveNumber);
    sub->add_option("--seed", args.seed, "recorded in output metadata");
}

ExperimentConfig resolve_config(const CommonArgs& args) {
    ExperimentConfig c;
    if (!args.config_path.empty()) {
        c = load_config(args.config_path);
    } else if (!args.preset.empty()) {
        c = preset_config(args.preset);
    } else {
        throw ConfigError("--config: a config file or --preset is required");
    }
    if (!args.out_dir.empty()) c.output.directory = args.out_dir;
    if (!args.format.empty()) c.output.format = parse_format(args.format);
    c.validate();
    return c;
}

void write_outputs(const std::vector<RecipeOutput>& outputs, OutputFormat format, const fs::path& dir,
                   const std::string& subcommand) {
    const std::string stem = unique_stem(dir, subcommand + "-" + utc_timestamp());
    for (const auto& o : outputs) {
        const std::string s = o.suffix.empty() ? stem : stem + "-" + o.suffix;
        for (const auto& p : emit(o.table, format, dir, s, &o.plot)) {
            std::cout << p.string() << '\n';
        }
    }
}

void report(const std::vector<RecipeOutput>& outputs, const std::vector<std::string>& keys) {
    const auto& md = outputs.front().table.metadata;
    for (const auto& k : keys) {
        if (auto it = md.find(k); it != md.end()) std::cerr << k << " = " << it->second << '\n';
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"CPT-enabled phase-sensitive amplification in metastable helium: simulations and fits"};
    app.require_subcommand(1);

    struct Recipe {
        const char* name;
        const char* help;
        std::vector<RecipeOutput> (*run)(const ExperimentConfig&, const RunOptions&);
        std::vector<std::string> summary;
    };
    const std::vector<Recipe> recipes{
        {"scan-phase", "gain and output phase vs input relative phase", run_scan_phase,
         {"g_max", "theta_max", "g_min", "theta_min", "analytic_g_max", "analytic_theta_max", "output_phase_spread"}},
        {"heatmap", "gain and phase maps over theta x zeta/gamma_R, with and without D2", run_heatmap, {}},
        {"zprofile", "intensities and phases along z at Theta_MAX and Theta_MIN", run_zprofile, {}},
        {"spectrum", "PIA and PSA gain vs signal detuning", run_spectrum, {"pia_fwhm", "psa_fwhm"}},
        {"cpt-scan", "coupling transmission vs Zeeman detuning", run_cpt_scan, {"fwhm_two_photon"}},
    };

    std::vector<CommonArgs> args(recipes.size());
    std::vector<CLI::App*> subs;
    for (std::size_t k = 0; k < recipes.size(); ++k) {
        CLI::App* sub = app.add_subcommand(recipes[k].name, recipes[k].help);
        add_common(sub, args[k], true);
        subs.push_back(sub);
    }

    CommonArgs fit_args;
    std::string fit_input;
    double fit_max_rms = FitOptions{}.max_relative_rms;
    CLI::App* fit = app.add_subcommand("fit-mu", "fit mu to a scan-phase output file");
    add_common(fit, fit_args, false);
    fit->add_option("--input", fit_input, "ScanResult file (.csv or .json) with theta and gain columns")->required();
    fit->add_option("--max-relative-rms", fit_max_rms, "reject fits whose gain RMS exceeds this fraction of the mean");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        for (std::size_t k = 0; k < recipes.size(); ++k) {
            if (!subs[k]->parsed()) continue;
            const ExperimentConfig c = resolve_config(args[k]);
            const RunOptions opts{args[k].threads, args[k].seed};
            const auto outputs = recipes[k].run(c, opts);
            write_outputs(outputs, c.output.format, c.output.directory, recipes[k].name);
            report(outputs, recipes[k].summary);
            return kOk;
        }
        if (fit->parsed()) {
            FitOptions fo;
            fo.max_relative_rms = fit_max_rms;
            const auto outputs = run_fit_mu(load_scan_result(fit_input), fo);
            std::string dir = fit_args.out_dir;
            OutputFormat format = fit_args.format.empty() ? OutputFormat::kCsv : parse_format(fit_args.format);
            if (!fit_args.config_path.empty() || !fit_args.preset.empty()) {
                const ExperimentConfig c = resolve_config(fit_args);
                if (dir.empty()) dir = c.output.directory;
                format = c.output.format;
            }
            write_outputs(outputs, format, dir.empty() ? "." : dir, "fit-mu");
            const auto& row = outputs.front().table.rows.front();
            std::cerr << "mu = " << format_double(row[0]) << "\ntheta_offset = " << format_double(row[1])
                      << "\nrms = " << format_double(row[2]) << '\n';
            report(outputs, {"mu_medium", "relative_error"});
            return kOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kIoError;
    } catch (const Error& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return kSolverError;
    } catch (const std::exception& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return kSolverError;
    }
    return kConfigError;
}
