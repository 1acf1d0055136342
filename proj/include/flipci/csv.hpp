#pragma once

#include <string>
#include <vector>

namespace flipci {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;  // each row sized like header
};

// Plain comma-separated values, no quoting; leading '#' lines are skipped so
// outputs carrying a config echo can be re-read. Ragged rows are an error.
CsvTable read_csv(const std::string& path);

// Formats a double with 9 significant digits ("inf"/"-inf" for infinities);
// the single float format keeps every output byte-reproducible.
std::string fmt_double(double value);

// Strict numeric parsers that report the offending cell as row/column
// (1-based, header = row 1).
double parse_double_cell(const std::string& cell, std::size_t row, std::size_t col);
long long parse_count_cell(const std::string& cell, std::size_t row, std::size_t col);

}  // namespace flipci
