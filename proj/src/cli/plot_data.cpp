#include "nclab/cli.hpp"

#include <algorithm>
#include <fstream>
#include <map>

namespace nclab::cli {

namespace {

const std::vector<std::string> kSweepHeader = {"d", "n", "K", "sigma", "trials", "successes",
                                               "rate", "union_sigma_star", "gordon_min_d_over_n"};
const std::vector<std::string> kTrajectoryHeader = {"epoch", "objective", "nc1", "nc2_h", "nc2_w", "nc3"};

std::string joined(const std::vector<std::string>& fields) {
    std::string out;
    for (const std::string& f : fields) out += (out.empty() ? "" : " ") + (f.empty() ? std::string("\"\"") : f);
    return out;
}

void require_header(const CsvTable& table, const std::vector<std::string>& expected, const std::string& kind) {
    if (table.header != expected) throw ConfigError("plot-data: header does not match the " + kind + " layout");
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
    return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
}

void emit_sweep(const CsvTable& table, std::ostream& out) {
    require_header(table, kSweepHeader, "sweep");
    const std::size_t cd = column(table.header, "d"), cn = column(table.header, "n"), cs = column(table.header, "sigma"),
                      cr = column(table.header, "rate"), cu = column(table.header, "union_sigma_star"),
                      cg = column(table.header, "gordon_min_d_over_n");
    // Keys are parsed doubles; the text of the first occurrence is kept so labels print exactly as read.
    std::map<double, std::string> ratios, sigmas;
    std::map<std::pair<double, double>, std::string> rate;
    std::map<double, std::pair<std::string, std::string>> overlay;
    for (const auto& row : table.rows) {
        const double ratio = parse_double(row[cd]) / parse_double(row[cn]);
        const double sigma = parse_double(row[cs]);
        ratios.emplace(ratio, format_double(ratio));
        sigmas.emplace(sigma, row[cs]);
        if (!rate.emplace(std::make_pair(sigma, ratio), row[cr]).second)
            throw std::runtime_error("plot-data: duplicate (d/n, sigma) cell in sweep");
        overlay.emplace(ratio, std::make_pair(row[cu], row[cg]));
    }

    out << "# success rate; first row holds d/n, first column sigma\n" << ratios.size();
    for (const auto& [ratio, label] : ratios) out << " " << label;
    out << "\n";
    for (const auto& [sigma, label] : sigmas) {
        out << label;
        for (const auto& [ratio, unused] : ratios) {
            const auto it = rate.find({sigma, ratio});
            out << " " << (it == rate.end() ? std::string("nan") : it->second);
        }
        out << "\n";
    }
    out << "\n\n# d_over_n union_sigma_star gordon_min_d_over_n\n";
    for (const auto& [ratio, label] : ratios)
        out << label << " " << overlay.at(ratio).first << " " << overlay.at(ratio).second << "\n";
}

void emit_trajectory(const CsvTable& table, std::ostream& out) {
    require_header(table, kTrajectoryHeader, "trajectory");
    out << "# epoch nc1 nc2_h nc2_w nc3\n";
    for (const auto& row : table.rows) out << joined({row[0], row[2], row[3], row[4], row[5]}) << "\n";
    out << "\n\n# epoch objective\n";
    for (const auto& row : table.rows) out << joined({row[0], row[1]}) << "\n";
}

void emit_table(const CsvTable& table, std::ostream& out) {
    for (const std::string& c : table.comments) out << "# " << c << "\n";
    out << "# " << joined(table.header) << "\n";
    for (const auto& row : table.rows) out << joined(row) << "\n";
}

}  // namespace

PlotKind parse_plot_kind(const std::string& name) {
    if (name == "sweep") return PlotKind::Sweep;
    if (name == "trajectory") return PlotKind::Trajectory;
    if (name == "table") return PlotKind::Table;
    throw ConfigError("plot-data: unknown kind '" + name + "' (sweep, trajectory, table)");
}

void plot_data(const std::filesystem::path& csv_path, PlotKind kind, const std::filesystem::path& out_path) {
    const CsvTable table = read_csv(csv_path);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("plot-data: cannot write " + out_path.string());
    switch (kind) {
    case PlotKind::Sweep: emit_sweep(table, out); break;
    case PlotKind::Trajectory: emit_trajectory(table, out); break;
    case PlotKind::Table: emit_table(table, out); break;
    }
    if (!out) throw std::runtime_error("plot-data: write failed for " + out_path.string());
}

}  // namespace nclab::cli
