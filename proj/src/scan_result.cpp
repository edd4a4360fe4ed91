#include "cptpsa/scan_result.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cptpsa {

void ScanResult::add_row(std::vector<double> row) {
    if (row.size() != columns.size()) {
        throw std::invalid_argument("ScanResult: row has " + std::to_string(row.size()) + " values, schema has " +
                                    std::to_string(columns.size()) + " columns");
    }
    rows.push_back(std::move(row));
}

std::size_t ScanResult::column_index(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) {
        throw std::out_of_range("ScanResult: no column named '" + name + "'");
    }
    return static_cast<std::size_t>(it - columns.begin());
}

bool ScanResult::has_column(const std::string& name) const {
    return std::find(columns.begin(), columns.end(), name) != columns.end();
}

std::vector<double> ScanResult::column(const std::string& name) const {
    const std::size_t k = column_index(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[k]);
    return out;
}

bool ScanResult::valid() const {
    if (columns.empty()) return false;
    return std::all_of(rows.begin(), rows.end(), [&](const auto& r) { return r.size() == columns.size(); });
}

} // namespace cptpsa
