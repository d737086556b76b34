#ifndef COSETICA_CSV_IO_HPP
#define COSETICA_CSV_IO_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "cosetica/types.hpp"

// CSV interchange: rows = samples, columns = channels (the transpose of the
// internal SignalMatrix layout), header "c1..cN", LF line endings.  Values are
// written with the shortest decimal representation that round-trips exactly
// (std::to_chars) and read back with std::from_chars.

namespace cosetica {

struct CsvError : std::runtime_error {
    std::size_t row, col;  // 1-based; row 1 is the header
    CsvError(const std::string& what, std::size_t r, std::size_t c)
        : std::runtime_error(what + " at row " + std::to_string(r) + ", column " +
                             std::to_string(c)),
          row(r),
          col(c) {}
};

inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline void write_csv(const std::string& path, const Matrix& rows_by_cols) {
    std::ofstream out(path, std::ios::binary);  // binary: keep LF on every platform
    if (!out) throw std::runtime_error("write_csv: cannot open " + path);
    for (Index j = 0; j < rows_by_cols.cols(); ++j)
        out << (j ? "," : "") << "c" << (j + 1);
    out << "\n";
    for (Index i = 0; i < rows_by_cols.rows(); ++i) {
        for (Index j = 0; j < rows_by_cols.cols(); ++j)
            out << (j ? "," : "") << format_double(rows_by_cols(i, j));
        out << "\n";
    }
    if (!out) throw std::runtime_error("write_csv: write failed for " + path);
}

inline Matrix read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_csv: cannot open " + path);

    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1) {  // header
            width = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
            continue;
        }
        if (line.empty()) continue;
        std::vector<double> vals;
        std::size_t pos = 0, col = 0;
        while (pos <= line.size()) {
            ++col;
            std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos) comma = line.size();
            double v = 0.0;
            const auto res = std::from_chars(line.data() + pos, line.data() + comma, v);
            if (res.ec != std::errc{} || res.ptr != line.data() + comma)
                throw CsvError("read_csv: malformed number", lineno, col);
            if (!std::isfinite(v)) throw CsvError("read_csv: non-finite value", lineno, col);
            vals.push_back(v);
            pos = comma + 1;
            if (comma == line.size()) break;
        }
        if (vals.size() != width)
            throw CsvError("read_csv: expected " + std::to_string(width) + " fields", lineno,
                           vals.size());
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw CsvError("read_csv: no data rows", lineno, 0);

    Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < width; ++j)
            out(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    return out;
}

}  // namespace cosetica

#endif
