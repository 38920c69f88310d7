#include "fif/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace fif {

namespace {

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) raise(ErrorCode::IoError, "cannot write " + path.string());
    return out;
}

void write_header(std::ofstream& out, int dimension) {
    for (int k = 1; k <= dimension; ++k) out << "x" << k << ",";
    out << "value\n";
}

}  // namespace

void write_lattice_csv(const SampledFunction& s, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    const int n = s.grid().dimension();
    write_header(out, n);
    std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
    auto shape = s.shape();
    auto values = s.values();
    for (std::size_t flat = 0; flat < values.size(); ++flat) {
        for (int k = 0; k < n; ++k) {
            out << format_value(s.axis_coordinates(k)[idx[static_cast<std::size_t>(k)]]) << ",";
        }
        out << format_value(values[flat]) << "\n";
        int k = n - 1;
        while (k >= 0) {
            if (++idx[static_cast<std::size_t>(k)] < shape[static_cast<std::size_t>(k)]) break;
            idx[static_cast<std::size_t>(k)] = 0;
            --k;
        }
    }
    if (!out) raise(ErrorCode::IoError, "write failed for " + path.string());
}

void write_attractor_csv(const AttractorSamples& points, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    const int n = points.dimension;
    write_header(out, n);
    for (std::size_t p = 0; p < points.point_count(); ++p) {
        for (int k = 0; k < n; ++k) {
            out << format_value(
                       points.coordinates[p * static_cast<std::size_t>(n) + static_cast<std::size_t>(k)])
                << ",";
        }
        out << format_value(points.values[p]) << "\n";
    }
    if (!out) raise(ErrorCode::IoError, "write failed for " + path.string());
}

void write_study_csv(std::span<const StudyRow> rows, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "index,parameter_norm,error,bound\n";
    for (const StudyRow& row : rows) {
        out << row.index << "," << format_value(row.parameter_norm) << ","
            << format_value(row.error) << "," << format_value(row.bound) << "\n";
    }
    if (!out) raise(ErrorCode::IoError, "write failed for " + path.string());
}

std::vector<double> read_values_csv(const std::filesystem::path& path, int dimension) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open " + path.string());
    std::vector<double> values;
    std::string line;
    bool first = true;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (first) {
            first = false;
            continue;  // header
        }
        std::istringstream row(line);
        std::string field;
        std::string last;
        int count = 0;
        while (std::getline(row, field, ',')) {
            last = field;
            ++count;
        }
        if (count != dimension + 1) {
            raise(ErrorCode::IoError, path.string() + ":" + std::to_string(line_no) +
                                          ": expected " + std::to_string(dimension + 1) +
                                          " columns, got " + std::to_string(count));
        }
        try {
            values.push_back(std::stod(last));
        } catch (const std::exception&) {
            raise(ErrorCode::IoError,
                  path.string() + ":" + std::to_string(line_no) + ": bad value '" + last + "'");
        }
    }
    return values;
}

}  // namespace fif
