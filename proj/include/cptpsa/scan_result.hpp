#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace cptpsa {

// Tabular sweep output: named columns, row-major records, and a metadata
// block that always travels with the data.
struct ScanResult {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::map<std::string, std::string> metadata;

    ScanResult() = default;
    explicit ScanResult(std::vector<std::string> cols) : columns(std::move(cols)) {}

    // Throws std::invalid_argument when the row width does not match the schema.
    void add_row(std::vector<double> row);

    // Index of a column; throws std::out_of_range for unknown names.
    std::size_t column_index(const std::string& name) const;
    bool has_column(const std::string& name) const;
    std::vector<double> column(const std::string& name) const;

    bool valid() const;
};

} // namespace cptpsa
