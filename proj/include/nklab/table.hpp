#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace nklab {

using Cell = std::variant<double, long long, std::string>;

/// Column-named result table. Cell formatting is fixed (%.12g for doubles) so
/// identical runs produce identical bytes.
class Table {
public:
    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add_row(std::vector<Cell> row);
    const std::vector<std::string>& columns() const { return columns_; }
    const std::vector<std::vector<Cell>>& rows() const { return rows_; }
    std::size_t size() const { return rows_.size(); }

    double number(std::size_t row, const std::string& column) const;
    std::string text(std::size_t row, const std::string& column) const;

    std::string to_csv() const;
    std::string to_json() const;

private:
    std::size_t column_index(const std::string& column) const;
    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

std::string format_cell(const Cell& c);

/// Write via temp file + rename so readers never observe partial output.
void write_atomic(const std::string& path, const std::string& bytes);

/// FNV-1a, used to stamp tables with their config.
std::uint64_t fnv1a(const std::string& bytes);

} // namespace nklab
