#pragma once

#include <string>
#include <vector>

#include "mica/common.hpp"

namespace mica {

/// Malformed CSV or config input; the message carries the line number.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CsvTable {
    std::vector<std::string> header;
    Matrix values;
};

/// Strict numeric CSV: one header row, comma separators, LF or CRLF line
/// endings, equal field counts on every row.
CsvTable read_csv(const std::string& path);

/// Writes with 17 significant digits (round-trip exact for doubles) and LF
/// line endings.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Matrix& values);

/// %.17g rendering used for every numeric field the tools emit.
std::string format_double(double v);

}  // namespace mica
