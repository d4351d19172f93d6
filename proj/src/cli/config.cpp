#include "nclab/cli.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace nclab::cli {

namespace {

enum class KeyType { Integer, Real, Flag, Text, Reals, Integers };

struct KeySpec {
    const char* name;
    KeyType type;
    const char* default_value;
    std::vector<std::string> choices = {};  // Text only; empty accepts anything
};

using Schema = std::vector<KeySpec>;

// Every key a command accepts, with its default. The resolved config always carries all of them.
const std::map<std::string, Schema>& schemas() {
    static const std::map<std::string, Schema> table = {
        {"upfm-solve",
         {{"loss", KeyType::Text, "ce", {"ce", "l2"}},
          {"n", KeyType::Integer, "10"},
          {"K", KeyType::Integer, "3"},
          {"D", KeyType::Integer, "5"},
          {"lambda_W", KeyType::Real, "1e-3"},
          {"lambda_H", KeyType::Real, "1e-3"},
          {"numeric_iters", KeyType::Integer, "0"},
          {"numeric_restarts", KeyType::Integer, "5"}}},
        {"feasibility-sweep",
         {{"n", KeyType::Integer, "50"},
          {"K", KeyType::Integer, "2"},
          {"d_over_n", KeyType::Reals, "1.1,1.5,2,3,4"},
          {"sigma", KeyType::Reals, "0.18,0.5,1,1.42"},
          {"trials", KeyType::Integer, "20"},
          {"means", KeyType::Text, "antipodal", {"antipodal", "axes", "angle"}},
          {"mean_norm", KeyType::Real, "1"},
          {"theta_deg", KeyType::Real, "90"},
          {"all_classes", KeyType::Flag, "false"},
          {"epsilon", KeyType::Real, "0"},
          {"constant_c", KeyType::Real, "1"},
          {"tol", KeyType::Real, "1e-7"}}},
        {"train",
         {{"n", KeyType::Integer, "50"},
          {"K", KeyType::Integer, "2"},
          {"d", KeyType::Integer, "100"},
          {"sigma", KeyType::Real, "0.18"},
          {"means", KeyType::Text, "antipodal", {"antipodal", "axes"}},
          {"mean_norm", KeyType::Real, "1"},
          {"depth", KeyType::Integer, "2"},
          {"d1", KeyType::Integer, "0"},
          {"D", KeyType::Integer, "0"},
          {"loss", KeyType::Text, "ce", {"ce", "l2"}},
          {"lambda_W", KeyType::Real, "1e-3"},
          {"lambda_H", KeyType::Real, "1e-6"},
          {"lr", KeyType::Real, "0.1"},
          {"decay_factor", KeyType::Real, "10"},
          {"epochs", KeyType::Integer, "100"},
          {"batch", KeyType::Integer, "0"},
          {"freeze_first_layer", KeyType::Flag, "false"},
          {"checkpoints", KeyType::Integers, ""},
          {"save_weights", KeyType::Flag, "true"}}},
        {"rf-rank",
         {{"N", KeyType::Integer, "40"},
          {"d", KeyType::Integer, "10"},
          {"d1", KeyType::Integers, ""},
          {"trials", KeyType::Integer, "100"},
          {"centering", KeyType::Text, "analytic_relu_mean", {"analytic_relu_mean", "paper_constant"}},
          {"kernel_mc_samples", KeyType::Integer, "0"},
          {"width_constant", KeyType::Real, "8"}}},
        {"gen-analysis",
         {{"regime", KeyType::Text, "low_noise", {"low_noise", "min_norm"}},
          {"n", KeyType::Integer, "50"},
          {"d", KeyType::Integers, "75"},
          {"sigma_over_mu", KeyType::Reals, "0.1"},
          {"mu_norm", KeyType::Real, "1"},
          {"trials", KeyType::Integer, "10"},
          {"mc_samples", KeyType::Integer, "100000"},
          {"c1", KeyType::Real, "1"},
          {"c2", KeyType::Real, "1"}}},
        {"probe",
         {{"kind", KeyType::Text, "gordon", {"jl_angle", "jl_singular", "gordon", "lipschitz"}},
          {"n", KeyType::Integer, "50"},
          {"d", KeyType::Integer, "200"},
          {"m", KeyType::Integer, "100"},
          {"K", KeyType::Integer, "3"},
          {"epsilon", KeyType::Real, "0.3"},
          {"t", KeyType::Reals, "1,2,3"},
          {"trials", KeyType::Integer, "500"}}},
    };
    return table;
}

const KeySpec& spec_of(const std::string& command, const std::string& key) {
    const Schema& schema = schemas().at(command);
    const auto it = std::find_if(schema.begin(), schema.end(), [&](const KeySpec& s) { return key == s.name; });
    if (it == schema.end()) throw ConfigError("[" + command + "] unknown key '" + key + "'");
    return *it;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    if (trim(value).empty()) return out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

template <class T>
T parse_number(const std::string& where, const std::string& raw) {
    const std::string s = trim(raw);
    T value{};
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc() || end != s.data() + s.size())
        throw ConfigError(where + ": cannot parse '" + raw + "'");
    return value;
}

bool parse_flag(const std::string& where, const std::string& raw) {
    const std::string s = trim(raw);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError(where + ": expected true or false, got '" + raw + "'");
}

// Checks the value against the key's type and returns it in canonical form, so manifests are stable.
std::string canonical(const std::string& command, const KeySpec& spec, const std::string& raw) {
    const std::string where = "[" + command + "] " + spec.name;
    switch (spec.type) {
    case KeyType::Integer: return std::to_string(parse_number<long>(where, raw));
    case KeyType::Real: return format_double(parse_number<double>(where, raw));
    case KeyType::Flag: return parse_flag(where, raw) ? "true" : "false";
    case KeyType::Text: {
        const std::string s = trim(raw);
        if (!spec.choices.empty() && std::find(spec.choices.begin(), spec.choices.end(), s) == spec.choices.end())
            throw ConfigError(where + ": '" + s + "' is not one of the accepted values");
        return s;
    }
    case KeyType::Reals:
    case KeyType::Integers: {
        std::string out;
        for (const std::string& item : split_list(raw)) {
            if (!out.empty()) out += ",";
            out += spec.type == KeyType::Reals ? format_double(parse_number<double>(where, item))
                                               : std::to_string(parse_number<long>(where, item));
        }
        return out;
    }
    }
    return raw;
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [name, schema] : schemas()) out.push_back(name);
        return out;
    }();
    return names;
}

std::string RunConfig::text(const std::string& key) const {
    const auto it = params.find(key);
    if (it == params.end()) throw ConfigError("[" + command + "] missing key '" + key + "'");
    return it->second;
}

long RunConfig::integer(const std::string& key) const { return parse_number<long>("[" + command + "] " + key, text(key)); }

double RunConfig::real(const std::string& key) const { return parse_number<double>("[" + command + "] " + key, text(key)); }

bool RunConfig::flag(const std::string& key) const { return parse_flag("[" + command + "] " + key, text(key)); }

std::vector<double> RunConfig::reals(const std::string& key) const {
    std::vector<double> out;
    for (const std::string& item : split_list(text(key))) out.push_back(parse_number<double>("[" + command + "] " + key, item));
    return out;
}

std::vector<long> RunConfig::integers(const std::string& key) const {
    std::vector<long> out;
    for (const std::string& item : split_list(text(key))) out.push_back(parse_number<long>("[" + command + "] " + key, item));
    return out;
}

RunConfig parse_config(const std::string& text, const Overrides& overrides) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    RunConfig cfg;
    std::string file_command;
    if (const auto run = tree.get_child_optional("run")) {
        for (const auto& [key, node] : *run) {
            const std::string value = node.data();
            if (key == "command") file_command = trim(value);
            else if (key == "seed") cfg.seed = parse_number<std::uint64_t>("[run] seed", value);
            else if (key == "output_dir") cfg.output_dir = trim(value);
            else if (key == "threads") cfg.threads = parse_number<int>("[run] threads", value);
            else throw ConfigError("[run] unknown key '" + key + "'");
        }
    }
    if (!overrides.command.empty() && !file_command.empty() && overrides.command != file_command)
        throw ConfigError("config: [run] command '" + file_command + "' does not match '" + overrides.command + "'");
    cfg.command = overrides.command.empty() ? file_command : overrides.command;
    if (cfg.command.empty()) throw ConfigError("config: no command given and [run] command is missing");
    if (!schemas().count(cfg.command)) throw ConfigError("config: unknown command '" + cfg.command + "'");

    for (const auto& [section, node] : tree) {
        if (section == "run") continue;
        if (section != cfg.command) throw ConfigError("config: unknown section [" + section + "]");
        if (!node.data().empty()) throw ConfigError("config: key '" + section + "' outside any section");
        for (const auto& [key, value] : node) {
            const KeySpec& spec = spec_of(cfg.command, key);
            cfg.params[key] = canonical(cfg.command, spec, value.data());
        }
    }
    for (const KeySpec& spec : schemas().at(cfg.command))
        if (!cfg.params.count(spec.name)) cfg.params[spec.name] = canonical(cfg.command, spec, spec.default_value);

    if (overrides.has_seed) cfg.seed = overrides.seed;
    if (!overrides.output_dir.empty()) cfg.output_dir = overrides.output_dir;
    if (overrides.has_threads) cfg.threads = overrides.threads;
    if (cfg.threads < 0) throw ConfigError("[run] threads must be >= 0");
    if (cfg.output_dir.empty()) throw ConfigError("[run] output_dir must not be empty");
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const Overrides& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot read " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), overrides);
}

std::string manifest_text(const RunConfig& cfg) {
    std::ostringstream out;
    out << "[run]\n"
        << "command = " << cfg.command << "\n"
        << "seed = " << cfg.seed << "\n"
        << "output_dir = " << cfg.output_dir.string() << "\n"
        << "threads = " << cfg.threads << "\n\n"
        << "[" << cfg.command << "]\n";
    for (const auto& [key, value] : cfg.params) out << key << " = " << value << "\n";
    return out.str();
}

}  // namespace nclab::cli
