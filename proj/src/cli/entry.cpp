#include "nclab/cli.hpp"
#include "nclab/core.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace nclab::cli {

int main_entry(int argc, char** argv) {
    CLI::App app{"nclab: collapse feasibility, generalization and probe experiments"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    int threads = 0;
    auto add_run_flags = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "INI config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "overrides [run] seed");
        sub->add_option("--out", out_dir, "overrides [run] output_dir");
        sub->add_option("--threads", threads, "overrides [run] threads; 0 uses all cores")->check(CLI::NonNegativeNumber);
    };

    std::vector<std::pair<std::string, CLI::App*>> experiments;
    for (const std::string& name : command_names()) {
        CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
        add_run_flags(sub);
        experiments.emplace_back(name, sub);
    }
    CLI::App* run_cmd = app.add_subcommand("run", "run the command named in [run] command");
    add_run_flags(run_cmd);

    std::string csv_path, kind, plot_out;
    CLI::App* plot = app.add_subcommand("plot-data", "convert a CSV written by this tool into gnuplot data");
    plot->add_option("--csv", csv_path, "input CSV")->required()->check(CLI::ExistingFile);
    plot->add_option("--kind", kind, "sweep, trajectory or table")->required();
    plot->add_option("--out", plot_out, "output file; defaults to the CSV path with extension .dat");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (plot->parsed()) {
            const std::filesystem::path out = plot_out.empty() ? std::filesystem::path(csv_path).replace_extension(".dat")
                                                               : std::filesystem::path(plot_out);
            plot_data(csv_path, parse_plot_kind(kind), out);
            std::cout << "wrote " << out.string() << "\n";
            return 0;
        }
        Overrides overrides;
        for (const auto& [name, sub] : experiments)
            if (sub->parsed()) overrides.command = name;
        CLI::App* active = run_cmd->parsed() ? run_cmd : app.get_subcommands().front();
        overrides.has_seed = active->count("--seed") > 0;
        overrides.seed = seed;
        overrides.output_dir = out_dir;
        overrides.has_threads = active->count("--threads") > 0;
        overrides.threads = threads;
        const RunConfig cfg = load_config(config_path, overrides);
        run(cfg, std::cout);
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace nclab::cli
