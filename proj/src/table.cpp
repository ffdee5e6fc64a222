#include "nklab/table.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nklab/errors.hpp"

namespace nklab {

void Table::add_row(std::vector<Cell> row) {
    if (row.size() != columns_.size()) throw UsageError("table row width mismatch");
    rows_.push_back(std::move(row));
}

std::size_t Table::column_index(const std::string& column) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
        if (columns_[i] == column) return i;
    throw UsageError("table: no column named " + column);
}

double Table::number(std::size_t row, const std::string& column) const {
    const auto& c = rows_.at(row).at(column_index(column));
    if (const auto* d = std::get_if<double>(&c)) return *d;
    if (const auto* i = std::get_if<long long>(&c)) return double(*i);
    throw UsageError("table: column " + column + " is not numeric");
}

std::string Table::text(std::size_t row, const std::string& column) const {
    const auto& c = rows_.at(row).at(column_index(column));
    if (const auto* s = std::get_if<std::string>(&c)) return *s;
    return format_cell(c);
}

std::string format_cell(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.12g", *d);
        return buf;
    }
    if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
    return std::get<std::string>(c);
}

std::string Table::to_csv() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < columns_.size(); ++i)
        os << columns_[i] << (i + 1 < columns_.size() ? ',' : '\n');
    for (const auto& row : rows_)
        for (std::size_t i = 0; i < row.size(); ++i)
            os << format_cell(row[i]) << (i + 1 < row.size() ? ',' : '\n');
    return os.str();
}

std::string Table::to_json() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        os << (r ? ",\n " : "\n ") << "{";
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            os << (i ? "," : "") << '"' << columns_[i] << "\":";
            const auto& c = rows_[r][i];
            if (std::holds_alternative<std::string>(c))
                os << '"' << std::get<std::string>(c) << '"';
            else
                os << format_cell(c);
        }
        os << "}";
    }
    os << "\n]\n";
    return os.str();
}

void write_atomic(const std::string& path, const std::string& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw UsageError("cannot open " + tmp + " for writing");
        os << bytes;
    }
    std::filesystem::rename(tmp, path);
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace nklab
