#include "cptpsa/experiments.hpp"

#include "cptpsa/analytic.hpp"
#include "cptpsa/errors.hpp"
#include "cptpsa/propagation.hpp"

#include <cmath>

namespace cptpsa {

namespace {

int theta_count(const ExperimentConfig& c, int fallback = 32) {
    const SweepAxis* a = c.axis("theta");
    return a ? a->count : fallback;
}

const SweepAxis& require_axis(const ExperimentConfig& c, const std::string& name, const std::string& recipe) {
    const SweepAxis* a = c.axis(name);
    if (!a) throw ConfigError("sweep: " + recipe + " needs an axis with parameter '" + name + "'");
    return *a;
}

std::string num(double v) {
    return format_double(v);
}

} // namespace

void stamp_metadata(ScanResult& table, const ExperimentConfig& c, const std::string& subcommand,
                    const RunOptions& options) {
    table.metadata["subcommand"] = subcommand;
    table.metadata["config_hash"] = config_hash_hex(c);
    table.metadata["preset"] = c.preset.empty() ? "none" : c.preset;
    table.metadata["version"] = kLibraryVersion;
    table.metadata["units"] = "rad/s, m";
    table.metadata["seed"] = std::to_string(options.seed);
    table.metadata["grid_n_steps"] = std::to_string(c.grid.n_steps);
    table.metadata["grid_tolerance"] = num(c.grid.tolerance);
    table.metadata["grid_max_refinements"] = std::to_string(c.grid.max_refinements);
    table.metadata["steady_state_rcond_min"] = "1e-13";
    table.metadata["include_d2"] = c.toggles.include_d2 ? "true" : "false";
    table.metadata["idler_on"] = c.toggles.idler_on ? "true" : "false";
    table.metadata["mu_medium"] = num(mu_from_medium(c.medium));
    table.metadata["optical_depth"] = num(c.medium.optical_depth());
    table.metadata["zeta"] = num(c.zeta());
    table.metadata["zeta_over_gamma_raman"] = num(c.zeta_over_gamma_raman());
    table.metadata["omega_c"] = num(c.fields.omega_c);
    table.metadata["probe_ratio"] = num(c.fields.probe_ratio);
}

std::vector<RecipeOutput> run_scan_phase(const ExperimentConfig& c, const RunOptions& options) {
    const PhaseScan scan =
        scan_phase(c.field_state(), c.medium, c.grid, theta_count(c), c.toggles.include_d2, options.threads);
    const double mu = mu_from_medium(c.medium);
    const GainExtrema analytic = gain_extrema(mu);

    RecipeOutput out;
    out.table = scan.table;
    out.table.columns.push_back("analytic_gain");
    out.table.columns.push_back("analytic_output_phase");
    for (auto& row : out.table.rows) {
        row.push_back(gain(row[0], mu));
        row.push_back(output_phase(row[0], mu));
    }
    stamp_metadata(out.table, c, "scan-phase", options);
    auto& md = out.table.metadata;
    md["g_max"] = num(scan.extrema.g_max);
    md["theta_max"] = num(scan.extrema.theta_max);
    md["g_min"] = num(scan.extrema.g_min);
    md["theta_min"] = num(scan.extrema.theta_min);
    md["analytic_g_max"] = num(analytic.g_max);
    md["analytic_theta_max"] = num(analytic.theta_max);
    md["analytic_g_min"] = num(analytic.g_min);
    md["analytic_theta_min"] = num(analytic.theta_min);
    md["output_phase_spread"] = num(output_phase_spread(scan.table.column("theta"),
                                                        scan.table.column("output_phase"), scan.extrema.theta_min,
                                                        0.2));
    out.plot = {"Probe gain vs relative phase", "theta", {"gain", "analytic_gain"}, std::nullopt,
                "input relative phase (rad)", "gain"};
    return {out};
}

std::vector<RecipeOutput> run_heatmap(const ExperimentConfig& c, const RunOptions& options) {
    std::vector<double> ratios;
    if (const SweepAxis* a = c.axis("zeta_over_gamma_raman")) {
        ratios = a->values();
    } else if (const SweepAxis* g = c.axis("gamma_raman")) {
        for (double gr : g->values()) ratios.push_back(c.zeta() / gr);
    } else {
        throw ConfigError("sweep: heatmap needs a 'zeta_over_gamma_raman' or 'gamma_raman' axis");
    }
    const int n_theta = theta_count(c);

    RecipeOutput map;
    map.table = ScanResult({"zeta_over_gamma_raman", "include_d2", "theta", "gain", "output_phase",
                            "coupling_transmission"});
    RecipeOutput summary;
    summary.suffix = "summary";
    summary.table = ScanResult({"zeta_over_gamma_raman", "log10_ratio", "include_d2", "g_max", "theta_max", "g_min",
                                "theta_min", "max_gain_over_theta", "output_phase_spread"});

    for (int d2 : {1, 0}) {
        for (double r : ratios) {
            MediumParams m = c.medium;
            m.gamma_raman = c.zeta() / r;
            const PhaseScan s = scan_phase(c.field_state(), m, c.grid, n_theta, d2 == 1, options.threads);
            const auto th = s.table.column("theta");
            const auto g = s.table.column("gain");
            const auto ph = s.table.column("output_phase");
            const auto tc = s.table.column("coupling_transmission");
            double gmax = 0.0;
            for (std::size_t k = 0; k < th.size(); ++k) {
                map.table.add_row({r, static_cast<double>(d2), th[k], g[k], ph[k], tc[k]});
                gmax = std::max(gmax, g[k]);
            }
            summary.table.add_row({r, std::log10(r), static_cast<double>(d2), s.extrema.g_max, s.extrema.theta_max,
                                   s.extrema.g_min, s.extrema.theta_min, gmax,
                                   output_phase_spread(th, ph, s.extrema.theta_min, 0.2)});
        }
    }
    stamp_metadata(map.table, c, "heatmap", options);
    stamp_metadata(summary.table, c, "heatmap", options);
    map.plot = {"Gain vs relative phase for each zeta/gamma_R", "theta", {"gain"}, "zeta_over_gamma_raman",
                "input relative phase (rad)", "gain"};
    summary.plot = {"Extremal gains vs CPT ratio", "log10_ratio", {"g_max", "g_min"}, "include_d2",
                    "log10(zeta / gamma_R)", "gain"};
    return {map, summary};
}

std::vector<RecipeOutput> run_zprofile(const ExperimentConfig& c, const RunOptions& options) {
    const double mu = mu_from_medium(c.medium);
    const GainExtrema e = gain_extrema(mu);
    RecipeOutput out;
    out.table = ScanResult({"z", "branch", "theta_in", "probe_intensity", "coupling_intensity", "relative_phase",
                            "coupling_phase", "dark_population", "analytic_probe_intensity",
                            "analytic_relative_phase", "analytic_coupling_phase"});
    const double thetas[2] = {e.theta_max, e.theta_min};
    for (int branch = 0; branch < 2; ++branch) {
        ExperimentConfig cc = c;
        cc.fields.theta = thetas[branch];
        cc.fields.delta_split = 0.0;
        PropagationOptions o;
        o.include_d2 = c.toggles.include_d2;
        const ZProfile p = propagate_degenerate(cc.field_state(), c.medium, c.grid, o);
        for (const ZSlice& s : p.slices) {
            const double mz = mu * s.z / c.medium.length;
            out.table.add_row({s.z, static_cast<double>(branch), thetas[branch], s.probe_intensity,
                               s.coupling_intensity, s.relative_phase, s.coupling_phase, s.dark_population,
                               gain(thetas[branch], mz), output_phase(thetas[branch], mz), mz});
        }
    }
    stamp_metadata(out.table, c, "zprofile", options);
    out.table.metadata["theta_max"] = num(e.theta_max);
    out.table.metadata["theta_min"] = num(e.theta_min);
    out.table.metadata["branch"] = "0 = Theta_MAX, 1 = Theta_MIN";
    out.plot = {"Intensities along the cell",
                "z",
                {"probe_intensity", "analytic_probe_intensity", "coupling_intensity"},
                "branch",
                "z (m)",
                "intensity / input"};
    return {out};
}

std::vector<RecipeOutput> run_spectrum(const ExperimentConfig& c, const RunOptions& options) {
    const SweepAxis& axis = require_axis(c, "delta_split", "spectrum");
    const auto deltas = axis.values();
    const SidebandScan s = scan_sidebands(c.fields.omega_c, deltas, c.medium, c.grid, theta_count(c, 0),
                                          c.toggles.include_d2, options.threads);
    RecipeOutput spec;
    spec.table = s.spectrum;
    stamp_metadata(spec.table, c, "spectrum", options);
    spec.table.metadata["pia_fwhm"] = num(peak_fwhm(deltas, s.spectrum.column("pia_gain")));
    spec.table.metadata["psa_fwhm"] = num(peak_fwhm(deltas, s.spectrum.column("psa_gain_max")));
    spec.plot = {"Signal gain vs detuning", "delta", {"pia_gain", "psa_gain_max", "psa_gain_min"}, std::nullopt,
                 "signal detuning delta (rad/s)", "gain"};
    std::vector<RecipeOutput> out{spec};
    if (!s.phase_table.rows.empty()) {
        RecipeOutput phase;
        phase.suffix = "phase";
        phase.table = s.phase_table;
        stamp_metadata(phase.table, c, "spectrum", options);
        phase.plot = {"PSA gain vs relative phase", "theta", {"psa_gain"}, "delta", "relative phase (rad)", "gain"};
        out.push_back(std::move(phase));
    }
    return out;
}

std::vector<RecipeOutput> run_cpt_scan(const ExperimentConfig& c, const RunOptions& options) {
    const SweepAxis& axis = require_axis(c, "zeeman_nu", "cpt-scan");
    RecipeOutput out;
    out.table =
        cpt_resonance(c.fields.omega_c, c.medium, c.grid, axis.values(), c.toggles.include_d2, options.threads);
    stamp_metadata(out.table, c, "cpt-scan", options);
    out.table.metadata["fwhm_two_photon"] =
        num(peak_fwhm(out.table.column("two_photon_detuning"), out.table.column("transmission")));
    out.plot = {"Coupling transmission vs two-photon detuning", "two_photon_detuning", {"transmission"},
                std::nullopt, "two-photon detuning 2 nu_B (rad/s)", "transmission"};
    return {out};
}

std::vector<RecipeOutput> run_fit_mu(const ScanResult& scan, const FitOptions& fit) {
    if (!scan.has_column("theta") || !scan.has_column("gain")) {
        throw ConfigError("fit-mu: input needs 'theta' and 'gain' columns");
    }
    PhaseScanData data;
    data.theta_in = scan.column("theta");
    data.gain = scan.column("gain");
    if (scan.has_column("output_phase")) data.theta_out = scan.column("output_phase");
    const FitResult r = fit_mu(data, fit);

    RecipeOutput out;
    out.table = ScanResult({"mu", "theta_offset", "rms", "gain_rms", "n_points"});
    out.table.add_row({r.mu, r.theta_offset, r.rms, r.gain_rms, static_cast<double>(data.theta_in.size())});
    out.table.metadata["subcommand"] = "fit-mu";
    out.table.metadata["version"] = kLibraryVersion;
    out.table.metadata["used_phase"] = data.theta_out ? "true" : "false";
    if (auto it = scan.metadata.find("config_hash"); it != scan.metadata.end()) {
        out.table.metadata["source_config_hash"] = it->second;
    }
    if (auto it = scan.metadata.find("mu_medium"); it != scan.metadata.end()) {
        const double ref = parse_double(it->second);
        out.table.metadata["mu_medium"] = it->second;
        out.table.metadata["relative_error"] = num(std::abs(r.mu - ref) / ref);
    }
    out.plot = {"Fitted mu", "n_points", {"mu"}, std::nullopt, "points", "mu"};
    return {out};
}

} // namespace cptpsa
