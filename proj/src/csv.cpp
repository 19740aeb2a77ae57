#include "gridagg/csv.hpp"

#include "gridagg/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gridagg::csv {

namespace {

std::vector<std::vector<std::string>> split_records(std::string_view text, const std::string& source) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                any = true;
                break;
            case ',':
                fields.push_back(std::move(field));
                field.clear();
                any = true;
                break;
            case '\r':
                break;
            case '\n':
                if (any || !field.empty()) {
                    fields.push_back(std::move(field));
                    records.push_back(std::move(fields));
                }
                fields.clear();
                field.clear();
                any = false;
                break;
            default:
                field.push_back(c);
                any = true;
        }
    }
    if (in_quotes) throw DataError(source + ": unterminated quoted field");
    if (any || !field.empty()) {
        fields.push_back(std::move(field));
        records.push_back(std::move(fields));
    }
    return records;
}

}  // namespace

Table Table::read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("missing file: " + path.filename().string() + " (" + path.string() + ")");
    std::ostringstream text;
    text << in.rdbuf();
    return parse(text.str(), path.filename().string());
}

Table Table::parse(std::string_view text, std::string source_name) {
    Table table;
    table.source_ = std::move(source_name);
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
    auto records = split_records(text, table.source_);
    if (records.empty()) throw DataError(table.source_ + ": missing header row");
    table.header_ = std::move(records.front());
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != table.header_.size()) {
            std::ostringstream msg;
            msg << table.source_ << " row " << r << ": expected " << table.header_.size() << " fields, got "
                << records[r].size();
            throw DataError(msg.str());
        }
        table.rows_.push_back(std::move(records[r]));
    }
    return table;
}

std::size_t Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header_.size(); ++i)
        if (header_[i] == name) return i;
    throw DataError(source_ + ": schema mismatch, missing column '" + std::string(name) + "'");
}

void Table::require_columns(const std::vector<std::string_view>& names) const {
    for (auto name : names) column(name);
}

const std::string& Table::cell(std::size_t row, std::size_t col) const { return rows_.at(row).at(col); }

double Table::number(std::size_t row, std::size_t col) const {
    const std::string& s = cell(row, col);
    double value = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first < last && *first == ' ') ++first;
    if (first < last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        std::ostringstream msg;
        msg << source_ << " row " << (row + 1) << ": column '" << header_[col] << "' is not a number: '" << s << "'";
        throw DataError(msg.str());
    }
    return value;
}

bool Table::boolean(std::size_t row, std::size_t col) const {
    const std::string& s = cell(row, col);
    if (s == "true") return true;
    if (s == "false") return false;
    std::ostringstream msg;
    msg << source_ << " row " << (row + 1) << ": column '" << header_[col] << "' must be true/false, got '" << s
        << "'";
    throw DataError(msg.str());
}

std::string format_number(double value) {
    if (value == 0.0) return "0";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", value);
    return buf;
}

std::string format_exact(double value) {
    if (value == 0.0) return "0";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string quote_if_needed(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void Writer::row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) buffer_.push_back(',');
        buffer_ += quote_if_needed(fields[i]);
    }
    buffer_.push_back('\n');
}

void Writer::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << buffer_;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace gridagg::csv
