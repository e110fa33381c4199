#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sysrisk/errors.hpp"

namespace sysrisk {

// In-memory CSV table. Header row required; fields are plain (no quoting).
struct CsvTable {
    std::string source;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<long> line_numbers; // per row, 1-based

    // Index of a column; throws ParseError naming the column when missing.
    std::size_t column(const std::string& name) const;
    bool has_column(const std::string& name) const;

    // Field accessors with location-carrying errors.
    const std::string& field(std::size_t row, std::size_t col) const;
    double number(std::size_t row, std::size_t col) const;
};

CsvTable read_csv(const std::filesystem::path& path);

// Formats a double so the value round-trips exactly; keeps file output
// byte-stable across runs.
std::string format_double(double v);

class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void write_row(const std::vector<std::string>& fields);

private:
    struct Impl;
    Impl* impl_;
};

} // namespace sysrisk
