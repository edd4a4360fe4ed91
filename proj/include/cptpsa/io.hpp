// ScanResult serialisation.
//
// Text format: '#'-prefixed "key: value" metadata lines, a comma-separated
// header row, then one row per record. Numbers are written in shortest
// round-trip form so that parse(emit(r)) reproduces every double exactly.
// Structured format: a JSON object {"schema": {"columns": [...]}, "metadata":
// {...}, "rows": [[...], ...]} with non-finite values stored as strings.

#pragma once

#include "cptpsa/experiment_config.hpp"
#include "cptpsa/scan_result.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cptpsa {

void write_csv(const ScanResult& result, std::ostream& out);
ScanResult read_csv(std::istream& in);

void write_structured(const ScanResult& result, std::ostream& out);
ScanResult read_structured(std::istream& in);

// One polyline per y column, split further into one series per distinct
// value of `group` when given.
struct PlotSpec {
    std::string title;
    std::string x;
    std::vector<std::string> y;
    std::optional<std::string> group;
    std::string x_label;
    std::string y_label;
};

void write_svg(const ScanResult& result, const PlotSpec& spec, std::ostream& out);

// Writes `result` to <directory>/<stem>.<ext>; csv and plot formats both
// write the .csv, plot adds an .svg next to it. Returns the paths written.
// Throws IoError on any filesystem failure.
std::vector<std::filesystem::path> emit(const ScanResult& result, OutputFormat format,
                                        const std::filesystem::path& directory, const std::string& stem,
                                        const PlotSpec* plot = nullptr);

// Reads a ScanResult file, choosing the format from its extension (.json is
// structured, anything else text). Throws IoError.
ScanResult load_scan_result(const std::filesystem::path& path);

// Shortest round-trip decimal form of a double ("nan", "inf", "-inf" for non-finite values).
std::string format_double(double value);
double parse_double(const std::string& text);

} // namespace cptpsa
