#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace engine::io {

// Doubles are printed with enough digits to round-trip exactly.
std::string format_double(double v);

std::string csv_escape(const std::string& field);

class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path);
    void write_row(std::span<const std::string> fields);
    void close();

private:
    std::ofstream out_;
    std::filesystem::path path_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

} // namespace engine::io
