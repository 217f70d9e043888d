#include "mica/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace mica {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    CsvTable table;
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (table.header.empty()) {
            table.header = fields;
            continue;
        }
        if (fields.size() != table.header.size())
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": expected " + std::to_string(table.header.size()) +
                             " fields, got " + std::to_string(fields.size()));
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) {
            try {
                std::size_t used = 0;
                const double v = std::stod(f, &used);
                if (used != f.size()) throw std::invalid_argument(f);
                row.push_back(v);
            } catch (const std::exception&) {
                throw ParseError(path + ":" + std::to_string(lineno) +
                                 ": not a number: '" + f + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    if (table.header.empty()) throw ParseError(path + ": empty file");
    table.values.resize(static_cast<Index>(rows.size()),
                        static_cast<Index>(table.header.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            table.values(static_cast<Index>(i), static_cast<Index>(j)) =
                rows[i][j];
    return table;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Matrix& values) {
    if (static_cast<Index>(header.size()) != values.cols())
        throw std::invalid_argument("write_csv: header/column count mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(path + ": cannot open file for writing");
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j) out << ',';
        out << header[j];
    }
    out << '\n';
    for (Index i = 0; i < values.rows(); ++i) {
        for (Index j = 0; j < values.cols(); ++j) {
            if (j) out << ',';
            out << format_double(values(i, j));
        }
        out << '\n';
    }
    if (!out) throw ParseError(path + ": write failed");
}

}  // namespace mica
