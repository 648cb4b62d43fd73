#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ubi {

// Full-precision decimal form (17 significant digits) so reruns and
// downstream diffs are byte-stable.
std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);

// Strict reader for the project's simple comma-separated files: no quoting,
// fixed field count. Malformed rows are reported with their line number.
CsvTable read_csv(const std::filesystem::path& path, std::size_t expected_fields);

double parse_double(const std::string& cell, const std::filesystem::path& path, std::size_t line);
long long parse_int(const std::string& cell, const std::filesystem::path& path, std::size_t line);

}  // namespace ubi
