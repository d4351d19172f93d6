#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace nclab::cli {

/// Malformed config, unknown key or out-of-range value. Maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

/// A fully resolved run: every key of the command's section is present, defaults filled in.
struct RunConfig {
    std::string command;
    std::uint64_t seed = 1;
    std::filesystem::path output_dir = "out";
    int threads = 0;
    std::map<std::string, std::string> params;

    std::string text(const std::string& key) const;
    long integer(const std::string& key) const;
    double real(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::vector<double> reals(const std::string& key) const;
    std::vector<long> integers(const std::string& key) const;
};

/// Experiment commands; plot-data is handled separately because it takes no config.
const std::vector<std::string>& command_names();

/// Overrides from the command line; unset fields keep the config value.
struct Overrides {
    std::string command;  // empty: take [run] command from the file
    bool has_seed = false;
    std::uint64_t seed = 0;
    std::string output_dir;
    bool has_threads = false;
    int threads = 0;
};

/// INI grammar: a [run] section (command, seed, output_dir, threads) and one section named after the
/// command. Lines starting with ';' or '#' are comments. Unknown sections or keys raise ConfigError.
RunConfig load_config(const std::filesystem::path& path, const Overrides& overrides = {});
RunConfig parse_config(const std::string& text, const Overrides& overrides = {});

/// The resolved config in the same grammar, keys sorted; feeding it back reproduces the run.
std::string manifest_text(const RunConfig& cfg);

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// 17 significant digits so every double round-trips; NaN prints as "nan", infinities as "inf"/"-inf".
std::string format_double(double value);

struct CsvTable {
    std::vector<std::string> comments;  // lines starting with '#', without the marker
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);
double parse_double(const std::string& field);

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

/// Runs the experiment, writing CSV outputs and manifest.ini under cfg.output_dir.
/// Throws ConfigError for invalid parameters and nclab::NumericalError for numerical failures.
void run(const RunConfig& cfg, std::ostream& log);

enum class PlotKind { Sweep, Trajectory, Table };
PlotKind parse_plot_kind(const std::string& name);

/// Whitespace-separated data for gnuplot. Sweep: a nonuniform matrix (sigma rows, d/n columns) then,
/// after two blank lines, the overlay columns d/n, union-bound sigma and Gordon d/n. Trajectory: epoch
/// and the four metrics, then epoch and objective as a second block. Table: the CSV verbatim.
void plot_data(const std::filesystem::path& csv_path, PlotKind kind, const std::filesystem::path& out_path);

/// Exit codes: 0 success, 1 I/O or unexpected failure, 2 config or validation error, 3 numerical failure.
int main_entry(int argc, char** argv);

}  // namespace nclab::cli
