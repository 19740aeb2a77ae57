#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gridagg::csv {

/// Parsed comma-separated table with a mandatory header row. Double-quoted
/// fields may contain commas and doubled quotes.
class Table {
public:
    static Table read(const std::filesystem::path& path);
    static Table parse(std::string_view text, std::string source_name);

    const std::string& source() const { return source_; }
    const std::vector<std::string>& header() const { return header_; }
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }

    /// Column index; throws DataError naming the file if absent.
    std::size_t column(std::string_view name) const;
    void require_columns(const std::vector<std::string_view>& names) const;

    const std::string& cell(std::size_t row, std::size_t col) const;
    double number(std::size_t row, std::size_t col) const;
    bool boolean(std::size_t row, std::size_t col) const;

private:
    std::string source_;
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// Six significant figures, the on-disk precision of every numeric field.
std::string format_number(double value);

/// Full round-trip precision for values that must survive exactly.
std::string format_exact(double value);

std::string quote_if_needed(std::string_view field);

class Writer {
public:
    void row(const std::vector<std::string>& fields);
    const std::string& str() const { return buffer_; }
    void save(const std::filesystem::path& path) const;

private:
    std::string buffer_;
};

}  // namespace gridagg::csv
