#include "cptpsa/experiment_config.hpp"

#include "cptpsa/analytic.hpp"
#include "cptpsa/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace cptpsa {

using nlohmann::json;

namespace {

const char* scale_name(SweepAxis::Scale s) {
    return s == SweepAxis::Scale::kLog ? "log" : "linear";
}

const char* format_name(OutputFormat f) {
    switch (f) {
    case OutputFormat::kStructured:
        return "structured";
    case OutputFormat::kPlot:
        return "plot";
    default:
        return "csv";
    }
}

// Sweep parameters measured in angular frequency (scaled by the unit factor).
bool is_frequency_parameter(const std::string& name) {
    return name == "gamma_raman" || name == "delta_split" || name == "zeeman_nu" || name == "omega_c";
}

double number(const json& value, const std::string& key) {
    if (!value.is_number()) throw ConfigError(key + ": expected a number");
    const double v = value.get<double>();
    if (!std::isfinite(v)) throw ConfigError(key + ": must be finite");
    return v;
}

bool boolean(const json& value, const std::string& key) {
    if (!value.is_boolean()) throw ConfigError(key + ": expected true or false");
    return value.get<bool>();
}

std::string text(const json& value, const std::string& key) {
    if (!value.is_string()) throw ConfigError(key + ": expected a string");
    return value.get<std::string>();
}

const json& object(const json& value, const std::string& key) {
    if (!value.is_object()) throw ConfigError(key + ": expected an object");
    return value;
}

// Calls handlers[key] for every key of `obj`; anything else is an error.
void dispatch(const json& obj, const std::string& section,
              const std::map<std::string, std::function<void(const json&, const std::string&)>>& handlers) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const std::string path = section.empty() ? it.key() : section + "." + it.key();
        const auto h = handlers.find(it.key());
        if (h == handlers.end()) throw ConfigError("unknown key '" + path + "'");
        h->second(it.value(), path);
    }
}

SweepAxis parse_axis(const json& j, const std::string& path, double unit) {
    object(j, path);
    SweepAxis a;
    bool has_parameter = false;
    bool has_start = false;
    bool has_stop = false;
    dispatch(j, path,
             {{"parameter",
               [&](const json& v, const std::string& k) {
                   a.parameter = text(v, k);
                   has_parameter = true;
               }},
              {"start",
               [&](const json& v, const std::string& k) {
                   a.start = number(v, k);
                   has_start = true;
               }},
              {"stop",
               [&](const json& v, const std::string& k) {
                   a.stop = number(v, k);
                   has_stop = true;
               }},
              {"count",
               [&](const json& v, const std::string& k) {
                   if (!v.is_number_integer()) throw ConfigError(k + ": expected an integer");
                   a.count = v.get<int>();
               }},
              {"scale", [&](const json& v, const std::string& k) {
                   const std::string s = text(v, k);
                   if (s == "linear") {
                       a.scale = SweepAxis::Scale::kLinear;
                   } else if (s == "log") {
                       a.scale = SweepAxis::Scale::kLog;
                   } else {
                       throw ConfigError(k + ": expected \"linear\" or \"log\"");
                   }
               }}});
    if (!has_parameter) throw ConfigError(path + ".parameter: missing");
    const auto& known = sweep_parameters();
    if (std::find(known.begin(), known.end(), a.parameter) == known.end()) {
        throw ConfigError(path + ".parameter: unknown sweep parameter '" + a.parameter + "'");
    }
    if (a.parameter == "theta") {
        if (!has_start) a.start = 0.0;
        if (!has_stop) a.stop = kTwoPi;
    } else if (!has_start || !has_stop) {
        throw ConfigError(path + ": start and stop are required for '" + a.parameter + "'");
    }
    if (is_frequency_parameter(a.parameter)) {
        a.start *= unit;
        a.stop *= unit;
    }
    return a;
}

void set_axis(std::vector<SweepAxis>& axes, SweepAxis a) {
    for (auto& existing : axes) {
        if (existing.parameter == a.parameter) {
            existing = std::move(a);
            return;
        }
    }
    axes.push_back(std::move(a));
}

std::vector<double> spaced(double start, double stop, int count, SweepAxis::Scale scale, bool endpoint) {
    std::vector<double> v(static_cast<std::size_t>(count));
    const int denom = endpoint ? count - 1 : count;
    for (int k = 0; k < count; ++k) {
        const double t = static_cast<double>(k) / denom;
        if (scale == SweepAxis::Scale::kLog) {
            v[k] = std::exp(std::log(start) + t * (std::log(stop) - std::log(start)));
        } else {
            v[k] = start + t * (stop - start);
        }
    }
    if (endpoint && count > 1) v.back() = stop;
    return v;
}

// Preset shared by both named regimes: sweeps sized to the CPT linewidth zeta.
void default_sweeps(ExperimentConfig& c) {
    const double z = c.zeta();
    c.sweep = {
        {"theta", 0.0, kTwoPi, 32, SweepAxis::Scale::kLinear},
        {"zeta_over_gamma_raman", 0.1, 1e4, 11, SweepAxis::Scale::kLog},
        {"delta_split", -3.0 * z, 3.0 * z, 41, SweepAxis::Scale::kLinear},
        {"zeeman_nu", -1.5 * z, 1.5 * z, 41, SweepAxis::Scale::kLinear},
    };
}

} // namespace

// ---------------------------------------------------------------------------

std::vector<double> SweepAxis::values() const {
    return spaced(start, stop, count, scale, true);
}

std::vector<double> SweepAxis::periodic_values() const {
    return spaced(start, stop, count, scale, false);
}

const std::vector<std::string>& sweep_parameters() {
    static const std::vector<std::string> names{"theta",       "zeta_over_gamma_raman", "gamma_raman",
                                                "delta_split", "zeeman_nu",             "omega_c"};
    return names;
}

const SweepAxis* ExperimentConfig::axis(const std::string& parameter) const {
    for (const auto& a : sweep) {
        if (a.parameter == parameter) return &a;
    }
    return nullptr;
}

double ExperimentConfig::zeta() const {
    return fields.omega_c * fields.omega_c / medium.gamma_opt;
}

double ExperimentConfig::zeta_over_gamma_raman() const {
    return zeta() / medium.gamma_raman;
}

FieldState ExperimentConfig::field_state() const {
    FieldState f = FieldState::from_phase(fields.omega_c, fields.probe_ratio * fields.omega_c, fields.theta);
    if (fields.delta_split != 0.0) {
        // Equal signal and idler whose sum is the degenerate probe above.
        f.sidebands = Sidebands{0.5 * f.omega_p, 0.5 * f.omega_p, fields.delta_split};
    }
    return f;
}

void ExperimentConfig::resolve() {
    if (medium.gamma_opt == 0.0) medium.gamma_opt = medium.doppler_w;
    if (optical_depth) {
        medium.eta = MediumParams::eta_for_optical_depth(*optical_depth, medium.gamma_opt, medium.length);
    }
    if (raman_ratio) {
        medium.gamma_raman = zeta() / *raman_ratio;
    }
    grid.length = medium.length;
}

void ExperimentConfig::validate() const {
    medium.validate();
    if (!(medium.gamma_opt > 0.0)) throw ConfigError("medium.gamma_opt must be > 0 (or give medium.doppler_w)");
    if (!(fields.omega_c > 0.0)) throw ConfigError("fields.omega_c must be > 0");
    if (!(fields.probe_ratio >= 0.0) || !std::isfinite(fields.probe_ratio)) {
        throw ConfigError("fields.probe_ratio must be finite and >= 0");
    }
    if (optical_depth && !(*optical_depth >= 0.0)) throw ConfigError("medium.optical_depth must be >= 0");
    if (raman_ratio && !(*raman_ratio > 0.0)) throw ConfigError("medium.zeta_over_gamma_raman must be > 0");
    for (const auto& a : sweep) {
        const std::string key = "sweep[" + a.parameter + "]";
        if (a.count < 2) throw ConfigError(key + ".count must be >= 2");
        if (!std::isfinite(a.start) || !std::isfinite(a.stop)) throw ConfigError(key + ": range must be finite");
        if (a.scale == SweepAxis::Scale::kLog && !(a.start > 0.0 && a.stop > 0.0)) {
            throw ConfigError(key + ": log scale needs start and stop > 0");
        }
        if ((a.parameter == "zeta_over_gamma_raman" || a.parameter == "gamma_raman" || a.parameter == "omega_c") &&
            !(a.start > 0.0 && a.stop > 0.0)) {
            throw ConfigError(key + ": values must be > 0");
        }
    }
    grid.validate();
}

// ---------------------------------------------------------------------------

std::vector<std::string> preset_names() {
    return {"paper-exp", "analytic-regime"};
}

ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig c;
    c.preset = name;
    if (name == "paper-exp") {
        c.medium.delta = kTwoPi * 2.29e9;
        c.medium.doppler_w = kTwoPi * 0.9e9;
        c.medium.gamma_opt = c.medium.doppler_w;
        c.medium.gamma_d2 = kTwoPi * 23e6;
        c.medium.gamma0 = kTwoPi * 1.6e6;
        c.medium.length = 0.06;
        c.optical_depth = 4.5;
        c.raman_ratio = 1e3;
        c.fields.omega_c = kTwoPi * 10e6;
        c.fields.probe_ratio = 0.05;
    } else if (name == "analytic-regime") {
        // nu << zeta << Gamma << Delta with mu = 1.18
        c.medium.delta = kTwoPi * 2.0e9;
        c.medium.doppler_w = kTwoPi * 100e6;
        c.medium.gamma_opt = c.medium.doppler_w;
        c.medium.gamma_d2 = kTwoPi * 5e6;
        c.medium.gamma0 = kTwoPi * 1.6e6;
        c.medium.length = 0.06;
        c.medium.eta = 1.18 * 3.0 * c.medium.delta / (4.0 * c.medium.length);
        c.raman_ratio = 1e3;
        c.fields.omega_c = kTwoPi * 10e6;
        c.fields.probe_ratio = 0.01;
    } else {
        std::string known;
        for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
        throw ConfigError("preset: unknown preset '" + name + "' (known: " + known + ")");
    }
    c.resolve();
    default_sweeps(c);
    return c;
}

// ---------------------------------------------------------------------------

ExperimentConfig parse_config(const json& doc) {
    object(doc, "config");
    ExperimentConfig c;
    if (doc.contains("preset")) {
        c = preset_config(text(doc.at("preset"), "preset"));
    }

    double unit = 1.0;
    if (doc.contains("units")) {
        const std::string u = text(doc.at("units"), "units");
        if (u == "2pi*Hz") {
            unit = kTwoPi;
        } else if (u != "rad/s") {
            throw ConfigError("units: expected \"rad/s\" or \"2pi*Hz\"");
        }
    }

    std::optional<double> intensity_c, intensity_p, rabi_constant, omega_p;

    using Handler = std::function<void(const json&, const std::string&)>;
    auto freq = [&](double& target) {
        return Handler([&target, &unit](const json& v, const std::string& k) { target = number(v, k) * unit; });
    };

    std::map<std::string, Handler> top{
        {"preset", [](const json&, const std::string&) {}},
        {"units", [](const json&, const std::string&) {}},
        {"medium",
         [&](const json& v, const std::string& k) {
             object(v, k);
             dispatch(v, k,
                      {{"eta",
                        [&](const json& x, const std::string& p) {
                            c.medium.eta = number(x, p) * unit;
                            c.optical_depth.reset();
                        }},
                       {"optical_depth", [&](const json& x, const std::string& p) { c.optical_depth = number(x, p); }},
                       {"delta", freq(c.medium.delta)},
                       {"gamma_opt", freq(c.medium.gamma_opt)},
                       {"gamma0", freq(c.medium.gamma0)},
                       {"gamma_raman",
                        [&](const json& x, const std::string& p) {
                            c.medium.gamma_raman = number(x, p) * unit;
                            c.raman_ratio.reset();
                        }},
                       {"zeta_over_gamma_raman",
                        [&](const json& x, const std::string& p) { c.raman_ratio = number(x, p); }},
                       {"doppler_w", freq(c.medium.doppler_w)},
                       {"gamma_d2",
                        [&](const json& x, const std::string& p) {
                            if (x.is_null()) {
                                c.medium.gamma_d2.reset();
                            } else {
                                c.medium.gamma_d2 = number(x, p) * unit;
                            }
                        }},
                       {"length", [&](const json& x, const std::string& p) { c.medium.length = number(x, p); }}});
         }},
        {"fields",
         [&](const json& v, const std::string& k) {
             object(v, k);
             dispatch(v, k,
                      {{"omega_c", freq(c.fields.omega_c)},
                       {"omega_p", [&](const json& x, const std::string& p) { omega_p = number(x, p) * unit; }},
                       {"probe_ratio",
                        [&](const json& x, const std::string& p) { c.fields.probe_ratio = number(x, p); }},
                       {"theta", [&](const json& x, const std::string& p) { c.fields.theta = number(x, p); }},
                       {"delta_split", freq(c.fields.delta_split)},
                       {"intensity_c", [&](const json& x, const std::string& p) { intensity_c = number(x, p); }},
                       {"intensity_p", [&](const json& x, const std::string& p) { intensity_p = number(x, p); }},
                       {"rabi_per_sqrt_intensity",
                        [&](const json& x, const std::string& p) { rabi_constant = number(x, p) * unit; }}});
         }},
        {"sweep",
         [&](const json& v, const std::string& k) {
             if (!v.is_array()) throw ConfigError(k + ": expected an array of axes");
             for (std::size_t i = 0; i < v.size(); ++i) {
                 set_axis(c.sweep, parse_axis(v[i], k + "[" + std::to_string(i) + "]", unit));
             }
         }},
        {"toggles",
         [&](const json& v, const std::string& k) {
             object(v, k);
             dispatch(v, k,
                      {{"include_d2",
                        [&](const json& x, const std::string& p) { c.toggles.include_d2 = boolean(x, p); }},
                       {"idler_on", [&](const json& x, const std::string& p) { c.toggles.idler_on = boolean(x, p); }}});
         }},
        {"output",
         [&](const json& v, const std::string& k) {
             object(v, k);
             dispatch(v, k,
                      {{"directory",
                        [&](const json& x, const std::string& p) { c.output.directory = text(x, p); }},
                       {"format", [&](const json& x, const std::string& p) {
                            const std::string f = text(x, p);
                            if (f == "csv") {
                                c.output.format = OutputFormat::kCsv;
                            } else if (f == "structured") {
                                c.output.format = OutputFormat::kStructured;
                            } else if (f == "plot") {
                                c.output.format = OutputFormat::kPlot;
                            } else {
                                throw ConfigError(p + ": expected csv, structured or plot");
                            }
                        }}});
         }},
        {"grid",
         [&](const json& v, const std::string& k) {
             object(v, k);
             dispatch(v, k,
                      {{"n_steps",
                        [&](const json& x, const std::string& p) {
                            if (!x.is_number_integer()) throw ConfigError(p + ": expected an integer");
                            c.grid.n_steps = x.get<int>();
                        }},
                       {"tolerance", [&](const json& x, const std::string& p) { c.grid.tolerance = number(x, p); }},
                       {"max_refinements", [&](const json& x, const std::string& p) {
                            if (!x.is_number_integer()) throw ConfigError(p + ": expected an integer");
                            c.grid.max_refinements = x.get<int>();
                        }}});
         }},
    };
    dispatch(doc, "", top);

    if (intensity_c || intensity_p) {
        if (!rabi_constant) {
            throw ConfigError("fields.rabi_per_sqrt_intensity: required when intensities are given");
        }
        if (intensity_c) {
            if (*intensity_c < 0.0) throw ConfigError("fields.intensity_c must be >= 0");
            c.fields.omega_c = *rabi_constant * std::sqrt(*intensity_c);
        }
    }
    if (intensity_p) {
        if (*intensity_p < 0.0) throw ConfigError("fields.intensity_p must be >= 0");
        omega_p = *rabi_constant * std::sqrt(*intensity_p);
    }
    if (omega_p) {
        if (!(c.fields.omega_c > 0.0)) throw ConfigError("fields.omega_p: needs fields.omega_c > 0");
        c.fields.probe_ratio = *omega_p / c.fields.omega_c;
    }

    c.resolve();
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    json doc;
    try {
        doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

// ---------------------------------------------------------------------------

json canonical_json(const ExperimentConfig& c) {
    json j;
    j["preset"] = c.preset;
    j["medium"] = {{"eta", c.medium.eta},
                   {"delta", c.medium.delta},
                   {"gamma_opt", c.medium.gamma_opt},
                   {"gamma0", c.medium.gamma0},
                   {"gamma_raman", c.medium.gamma_raman},
                   {"doppler_w", c.medium.doppler_w},
                   {"length", c.medium.length},
                   {"gamma_d2", c.medium.gamma_d2 ? json(*c.medium.gamma_d2) : json(nullptr)}};
    j["fields"] = {{"omega_c", c.fields.omega_c},
                   {"probe_ratio", c.fields.probe_ratio},
                   {"theta", c.fields.theta},
                   {"delta_split", c.fields.delta_split}};
    json axes = json::array();
    std::vector<SweepAxis> sorted = c.sweep;
    std::sort(sorted.begin(), sorted.end(),
              [](const SweepAxis& a, const SweepAxis& b) { return a.parameter < b.parameter; });
    for (const auto& a : sorted) {
        axes.push_back({{"parameter", a.parameter},
                        {"start", a.start},
                        {"stop", a.stop},
                        {"count", a.count},
                        {"scale", scale_name(a.scale)}});
    }
    j["sweep"] = axes;
    j["toggles"] = {{"include_d2", c.toggles.include_d2}, {"idler_on", c.toggles.idler_on}};
    j["output"] = {{"directory", c.output.directory}, {"format", format_name(c.output.format)}};
    j["grid"] = {{"n_steps", c.grid.n_steps},
                 {"tolerance", c.grid.tolerance},
                 {"max_refinements", c.grid.max_refinements}};
    return j;
}

std::uint64_t config_hash(const ExperimentConfig& config) {
    const std::string s = canonical_json(config).dump();
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string config_hash_hex(const ExperimentConfig& config) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash(config)));
    return buf;
}

} // namespace cptpsa
