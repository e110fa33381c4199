#include "sysrisk/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>

namespace sysrisk {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    // tolerate CRLF line endings
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r')
        out.back().pop_back();
    return out;
}

} // namespace

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw ParseError(source, 1, "missing required column '" + name + "'");
}

bool CsvTable::has_column(const std::string& name) const {
    for (const auto& c : columns)
        if (c == name) return true;
    return false;
}

const std::string& CsvTable::field(std::size_t row, std::size_t col) const {
    return rows[row][col];
}

double CsvTable::number(std::size_t row, std::size_t col) const {
    const std::string& s = rows[row][col];
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError(source, line_numbers[row],
                         "field '" + s + "' in column '" + columns[col] +
                             "' is not a number");
    return v;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string(), 0, "cannot open file");

    CsvTable table;
    table.source = path.string();

    std::string line;
    long line_no = 0;
    if (!std::getline(in, line))
        throw ParseError(table.source, 1, "empty file, header row required");
    ++line_no;
    table.columns = split_line(line);

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split_line(line);
        if (fields.size() != table.columns.size())
            throw ParseError(table.source, line_no,
                             "expected " + std::to_string(table.columns.size()) +
                                 " fields, got " + std::to_string(fields.size()));
        table.rows.push_back(std::move(fields));
        table.line_numbers.push_back(line_no);
    }
    return table;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct CsvWriter::Impl {
    std::ofstream out;
};

CsvWriter::CsvWriter(const std::filesystem::path& path) : impl_(new Impl) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    impl_->out.open(path, std::ios::binary); // binary: stable line endings
    if (!impl_->out)
        throw Error("cannot open '" + path.string() + "' for writing");
}

CsvWriter::~CsvWriter() { delete impl_; }

void CsvWriter::write_row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) impl_->out << ',';
        impl_->out << fields[i];
    }
    impl_->out << '\n';
}

} // namespace sysrisk
