#include "cptpsa/io.hpp"

#include "cptpsa/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace cptpsa {

using nlohmann::json;

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
    if (text == "nan" || text == "-nan") return std::numeric_limits<double>::quiet_NaN();
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) {
        throw IoError("not a number: '" + text + "'");
    }
    return v;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::string strip(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && s[i] == ' ') ++i;
    return s.substr(i);
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '&':
            out += "&amp;";
            break;
        case '"':
            out += "&quot;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

// Round tick positions (1, 2 or 5 times a power of ten) covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi) {
    const double raw = (hi - lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double frac = raw / mag;
    const double step = (frac < 1.5 ? 1.0 : frac < 3.5 ? 2.0 : frac < 7.5 ? 5.0 : 10.0) * mag;
    std::vector<double> ticks;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) {
        ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    }
    return ticks;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

json number_to_json(double v) {
    return std::isfinite(v) ? json(v) : json(format_double(v));
}

double json_to_number(const json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_double(v.get<std::string>());
    if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
    throw IoError("structured scan: non-numeric cell");
}

} // namespace

// ---------------------------------------------------------------------------

void write_csv(const ScanResult& result, std::ostream& out) {
    for (const auto& [key, value] : result.metadata) {
        out << "# " << key << ": " << value << '\n';
    }
    for (std::size_t k = 0; k < result.columns.size(); ++k) {
        out << (k ? "," : "") << result.columns[k];
    }
    out << '\n';
    for (const auto& row : result.rows) {
        for (std::size_t k = 0; k < row.size(); ++k) {
            out << (k ? "," : "") << format_double(row[k]);
        }
        out << '\n';
    }
}

ScanResult read_csv(std::istream& in) {
    ScanResult r;
    std::string line;
    bool have_header = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip(line);
        if (line.empty()) continue;
        if (line.front() == '#') {
            const std::string body = strip(line.substr(1));
            const auto colon = body.find(':');
            if (colon == std::string::npos) {
                r.metadata[body] = "";
            } else {
                r.metadata[strip(body.substr(0, colon))] = strip(body.substr(colon + 1));
            }
            continue;
        }
        const auto cells = split(line, ',');
        if (!have_header) {
            r.columns = cells;
            have_header = true;
            continue;
        }
        std::vector<double> row;
        row.reserve(cells.size());
        try {
            for (const auto& c : cells) row.push_back(parse_double(strip(c)));
            r.add_row(std::move(row));
        } catch (const std::exception& e) {
            throw IoError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!have_header) throw IoError("scan file has no header row");
    return r;
}

void write_structured(const ScanResult& result, std::ostream& out) {
    json j;
    j["schema"] = {{"columns", result.columns}};
    j["metadata"] = result.metadata;
    json rows = json::array();
    for (const auto& row : result.rows) {
        json r = json::array();
        for (double v : row) r.push_back(number_to_json(v));
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    out << j.dump(1) << '\n';
}

ScanResult read_structured(std::istream& in) {
    json j;
    try {
        j = json::parse(in);
        ScanResult r(j.at("schema").at("columns").get<std::vector<std::string>>());
        r.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
        for (const auto& row : j.at("rows")) {
            std::vector<double> v;
            for (const auto& cell : row) v.push_back(json_to_number(cell));
            r.add_row(std::move(v));
        }
        return r;
    } catch (const IoError&) {
        throw;
    } catch (const std::exception& e) {
        throw IoError(std::string("structured scan: ") + e.what());
    }
}

// ---------------------------------------------------------------------------

void write_svg(const ScanResult& result, const PlotSpec& spec, std::ostream& out) {
    constexpr double width = 820.0, height = 480.0;
    constexpr double left = 80.0, right = 250.0, top = 40.0, bottom = 60.0;
    const double pw = width - left - right;
    const double ph = height - top - bottom;
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

    const auto x = result.column(spec.x);
    std::vector<double> groups(x.size(), 0.0);
    if (spec.group) groups = result.column(*spec.group);
    std::vector<double> keys = groups;
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

    struct Series {
        std::string label;
        std::vector<std::pair<double, double>> points;
    };
    std::vector<Series> series;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const auto& col : spec.y) {
        const auto y = result.column(col);
        for (double key : keys) {
            Series s;
            s.label = col;
            if (spec.group) s.label += " (" + *spec.group + "=" + format_double(key) + ")";
            for (std::size_t i = 0; i < x.size(); ++i) {
                if (groups[i] != key || !std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
                s.points.emplace_back(x[i], y[i]);
                xmin = std::min(xmin, x[i]);
                xmax = std::max(xmax, x[i]);
                ymin = std::min(ymin, y[i]);
                ymax = std::max(ymax, y[i]);
            }
            if (!s.points.empty()) series.push_back(std::move(s));
        }
    }
    if (series.empty()) {
        xmin = ymin = 0.0;
        xmax = ymax = 1.0;
    }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    auto sx = [&](double v) { return left + (v - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double v) { return top + (1.0 - (v - ymin) / (ymax - ymin)) * ph; };

    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
        << xml_escape(spec.title) << "</text>\n";
    out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double xv : nice_ticks(xmin, xmax)) {
        out << "<line x1=\"" << sx(xv) << "\" y1=\"" << top + ph << "\" x2=\"" << sx(xv) << "\" y2=\""
            << top + ph + 5 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << sx(xv) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
            << tick_label(xv) << "</text>\n";
    }
    for (double yv : nice_ticks(ymin, ymax)) {
        out << "<line x1=\"" << left - 5 << "\" y1=\"" << sy(yv) << "\" x2=\"" << left << "\" y2=\"" << sy(yv)
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << left - 8 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">"
            << tick_label(yv) << "</text>\n";
    }
    out << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 15 << "\" text-anchor=\"middle\">"
        << xml_escape(spec.x_label.empty() ? spec.x : spec.x_label) << "</text>\n";
    out << "<text transform=\"translate(20," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
        << xml_escape(spec.y_label) << "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const char* color = palette[k % (sizeof palette / sizeof *palette)];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [px, py] : series[k].points) out << sx(px) << ',' << sy(py) << ' ';
        out << "\"/>\n";
        const double ly = top + 14.0 + 16.0 * static_cast<double>(k);
        out << "<line x1=\"" << left + pw + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << left + pw + 30 << "\" y2=\""
            << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << left + pw + 35 << "\" y=\"" << ly << "\" font-size=\"10\">"
            << xml_escape(series[k].label) << "</text>\n";
    }
    out << "</svg>\n";
}

// ---------------------------------------------------------------------------

std::vector<std::filesystem::path> emit(const ScanResult& result, OutputFormat format,
                                        const std::filesystem::path& directory, const std::string& stem,
                                        const PlotSpec* plot) {
    namespace fs = std::filesystem;
    if (!result.valid()) throw IoError("emit: result does not match its column schema");
    std::error_code ec;
    fs::create_directories(directory, ec);
    if (ec) throw IoError("emit: cannot create '" + directory.string() + "': " + ec.message());

    std::vector<fs::path> written;
    auto open = [&](const fs::path& p) {
        std::ofstream f(p, std::ios::binary);
        if (!f) throw IoError("emit: cannot open '" + p.string() + "' for writing");
        return f;
    };
    auto finish = [&](std::ofstream& f, const fs::path& p) {
        f.flush();
        if (!f) throw IoError("emit: write to '" + p.string() + "' failed");
        written.push_back(p);
    };

    if (format == OutputFormat::kStructured) {
        const fs::path p = directory / (stem + ".json");
        auto f = open(p);
        write_structured(result, f);
        finish(f, p);
        return written;
    }
    const fs::path p = directory / (stem + ".csv");
    auto f = open(p);
    write_csv(result, f);
    finish(f, p);
    if (format == OutputFormat::kPlot && plot) {
        const fs::path s = directory / (stem + ".svg");
        auto g = open(s);
        write_svg(result, *plot, g);
        finish(g, s);
    }
    return written;
}

ScanResult load_scan_result(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    if (path.extension() == ".json") return read_structured(in);
    return read_csv(in);
}

} // namespace cptpsa
