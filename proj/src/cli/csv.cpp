#include "nclab/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace nclab::cli {

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

double parse_double(const std::string& field) {
    double value = 0.0;
    const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc() || end != field.data() + field.size())
        throw std::runtime_error("csv: not a number: '" + field + "'");
    return value;
}

namespace {

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> out;
    std::string::size_type start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    // Fields are never quoted, so a comma or newline inside one would corrupt the file.
    auto check = [&](const std::string& field) {
        if (field.find_first_of(",\n\r") != std::string::npos)
            throw std::invalid_argument("csv: field contains a separator: '" + field + "'");
    };
    for (const std::string& h : table.header) check(h);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("csv: cannot write " + path.string());
    for (const std::string& c : table.comments) out << "# " << c << "\n";
    auto emit = [&](const std::vector<std::string>& row) {
        if (row.size() != table.header.size()) throw std::invalid_argument("csv: row width does not match header");
        for (std::size_t i = 0; i < row.size(); ++i) {
            check(row[i]);
            out << (i ? "," : "") << row[i];
        }
        out << "\n";
    };
    emit(table.header);
    for (const auto& row : table.rows) emit(row);
    if (!out) throw std::runtime_error("csv: write failed for " + path.string());
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("csv: cannot read " + path.string());
    CsvTable table;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            table.comments.push_back(line.size() > 1 && line[1] == ' ' ? line.substr(2) : line.substr(1));
            continue;
        }
        std::vector<std::string> fields = split_row(line);
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size())
            throw std::runtime_error("csv: ragged row in " + path.string());
        table.rows.push_back(std::move(fields));
    }
    if (!have_header) throw std::runtime_error("csv: no header in " + path.string());
    return table;
}

}  // namespace nclab::cli
