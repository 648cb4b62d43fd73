#include "ubi/csvio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ubi {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out << ',';
        out << table.header[i];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << row[i];
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path, std::size_t expected_fields) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (cells.size() != expected_fields) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": expected " + std::to_string(expected_fields) +
                                     " fields, got " + std::to_string(cells.size()));
        }
        if (line_no == 1) {
            table.header = std::move(cells);
        } else {
            table.rows.push_back(std::move(cells));
        }
    }
    if (table.header.empty()) {
        throw std::runtime_error(path.string() + ": empty file");
    }
    return table;
}

double parse_double(const std::string& cell, const std::filesystem::path& path,
                    std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(path.string() + ":" + std::to_string(line) +
                                 ": not a number: '" + cell + "'");
    }
}

long long parse_int(const std::string& cell, const std::filesystem::path& path,
                    std::size_t line) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(path.string() + ":" + std::to_string(line) +
                                 ": not an integer: '" + cell + "'");
    }
}

}  // namespace ubi
