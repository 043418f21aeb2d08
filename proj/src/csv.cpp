#include "engine/csv.hpp"

#include <algorithm>
#include <cstdio>

#include "engine/errors.hpp"

namespace engine::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_escape(const std::string& field) {
    const bool needs_quotes =
        field.find_first_of(",\"\r\n") != std::string::npos;
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (const char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

CsvWriter::CsvWriter(const std::filesystem::path& path) : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw IoError("cannot open '" + path.string() + "' for writing");
}

void CsvWriter::write_row(std::span<const std::string> fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ << ',';
        out_ << csv_escape(fields[i]);
    }
    out_ << "\r\n";
}

void CsvWriter::close() {
    out_.close();
    if (!out_) throw IoError("failed writing '" + path_.string() + "'");
}

std::size_t CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw IoError("csv is missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    CsvTable table;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool row_started = false;
    auto end_field = [&]() {
        row.push_back(std::move(field));
        field.clear();
    };
    auto end_row = [&]() {
        if (!row_started && row.empty()) return;
        end_field();
        if (table.header.empty()) {
            table.header = std::move(row);
        } else {
            table.rows.push_back(std::move(row));
        }
        row.clear();
        row_started = false;
    };
    for (std::size_t i = 0; i < content.size(); ++i) {
        const char c = content[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
        case '"': in_quotes = true; row_started = true; break;
        case ',': end_field(); row_started = true; break;
        case '\r': break;
        case '\n': end_row(); break;
        default: field += c; row_started = true; break;
        }
    }
    if (row_started || !field.empty()) end_row();
    return table;
}

} // namespace engine::io
