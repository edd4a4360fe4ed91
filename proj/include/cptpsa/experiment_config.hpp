// Experiment description shared by the CLI recipes:
// medium, input fields, sweep axes, toggles and output settings, plus the
// named presets.
//
// A config is a JSON object with the top-level keys
//   medium, fields, sweep, toggles, output
// and optionally `preset` (a named base that the other keys override),
// `units` ("rad/s", default, or "2pi*Hz" for values given as ordinary
// frequencies) and `grid` (z-discretisation). Unknown keys are rejected.

#pragma once

#include "cptpsa/atomic_model.hpp"
#include "cptpsa/propagation.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cptpsa {

struct SweepAxis {
    enum class Scale { kLinear, kLog };

    std::string parameter;
    double start = 0.0;
    double stop = 0.0;
    int count = 2;
    Scale scale = Scale::kLinear;

    // `count` values from start to stop inclusive.
    std::vector<double> values() const;
    // `count` values in [start, stop), for periodic axes.
    std::vector<double> periodic_values() const;
};

// Intensities (W cm^-2) convert to Rabi frequencies as
// Omega = rabi_per_sqrt_intensity * sqrt(I); the constant must be given
// alongside any intensity input.
struct FieldsConfig {
    double omega_c = 0.0;      // rad/s, real (sets the phase reference)
    double probe_ratio = 0.05; // |Omega_p| / |Omega_c|
    double theta = 0.0;        // input relative phase for single-point recipes
    double delta_split = 0.0;  // signal/idler detuning (rad/s)
};

struct Toggles {
    bool include_d2 = true;
    bool idler_on = true;
};

enum class OutputFormat { kCsv, kStructured, kPlot };

struct OutputConfig {
    std::string directory = ".";
    OutputFormat format = OutputFormat::kCsv;
};

struct ExperimentConfig {
    std::string preset; // empty when built from scratch
    MediumParams medium;
    FieldsConfig fields;
    std::vector<SweepAxis> sweep;
    Toggles toggles;
    OutputConfig output;
    PropagationGrid grid;

    // Derived medium inputs, re-applied whenever the quantities they depend
    // on change: eta from the optical depth, gamma_R from zeta / gamma_R.
    std::optional<double> optical_depth;
    std::optional<double> raman_ratio;

    // Recomputes eta, gamma_R and the grid length from the derived inputs.
    void resolve();

    // Axis by parameter name, if present.
    const SweepAxis* axis(const std::string& parameter) const;

    // zeta = |Omega_c|^2 / Gamma and the corresponding ratio to gamma_R.
    double zeta() const;
    double zeta_over_gamma_raman() const;

    FieldState field_state() const;

    // Throws ConfigError naming the offending key.
    void validate() const;
};

// Parameter names a sweep axis may refer to.
const std::vector<std::string>& sweep_parameters();

// Named presets: "paper-exp" and "analytic-regime". Throws ConfigError for
// unknown names.
ExperimentConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

// Builds a config from JSON, starting from the named preset when `preset`
// is given. Throws ConfigError on unknown keys, wrong types or invalid values.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

// Fully resolved config in rad/s with sorted keys; two configs that differ in
// any field give different canonical forms.
nlohmann::json canonical_json(const ExperimentConfig& config);

// 64-bit FNV-1a of the canonical JSON text.
std::uint64_t config_hash(const ExperimentConfig& config);
std::string config_hash_hex(const ExperimentConfig& config);

} // namespace cptpsa
