// The figure-reproduction recipes behind each CLI subcommand.
// Each recipe turns a validated config into one or more ScanResult tables with
// metadata attached, plus a plot description for the optional SVG.

#pragma once

#include "cptpsa/experiment_config.hpp"
#include "cptpsa/io.hpp"
#include "cptpsa/scan_result.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cptpsa {

inline constexpr const char* kLibraryVersion = "cptpsa 1.0.0";

struct RunOptions {
    int threads = 1;
    std::uint64_t seed = 0; // recorded in metadata; the recipes are deterministic
};

struct RecipeOutput {
    std::string suffix; // appended to the file stem ("" for the main table)
    ScanResult table;
    PlotSpec plot;
};

// Gain and output phase vs Theta, numeric and analytic.
std::vector<RecipeOutput> run_scan_phase(const ExperimentConfig& config, const RunOptions& options = {});

// Theta x zeta/gamma_R maps with the D2 line on and off.
std::vector<RecipeOutput> run_heatmap(const ExperimentConfig& config, const RunOptions& options = {});

// Field intensities and phases along z at Theta_MAX and Theta_MIN.
std::vector<RecipeOutput> run_zprofile(const ExperimentConfig& config, const RunOptions& options = {});

// PIA and PSA gain vs signal detuning.
std::vector<RecipeOutput> run_spectrum(const ExperimentConfig& config, const RunOptions& options = {});

// Coupling transmission vs Zeeman shift.
std::vector<RecipeOutput> run_cpt_scan(const ExperimentConfig& config, const RunOptions& options = {});

// Fits mu to a phase scan (columns theta, gain and optionally output_phase).
std::vector<RecipeOutput> run_fit_mu(const ScanResult& scan, const FitOptions& fit = {});

// Metadata common to every recipe output.
void stamp_metadata(ScanResult& table, const ExperimentConfig& config, const std::string& subcommand,
                    const RunOptions& options);

} // namespace cptpsa
