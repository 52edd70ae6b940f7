#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

#include "cli_commands.hpp"
#include "cli_config.hpp"

using namespace spheroidal;
using namespace spheroidal::cli;

namespace {

struct FlagHelp {
    const char* key;
    const char* help;
};

// One entry per config key; the flag is --<key>.
const FlagHelp kFlags[] = {
    {"k", "azimuthal index"},
    {"omega", "Omega grid: comma list or start:stop:step"},
    {"parity", "even, odd or both"},
    {"nodes", "node counts: list and ranges, e.g. 0..4,7"},
    {"lambda", "certify: use this lambda instead of the branch eigenvalue"},
    {"rtol", "integrator relative tolerance"},
    {"atol", "integrator absolute tolerance"},
    {"eig-tol", "eigenvalue tolerance (relative)"},
    {"trunc-tol", "oracle truncation tolerance (relative)"},
    {"kappa", "certify: fixed kappa (default: ladder 4, 2, 1, 0.5)"},
    {"Lambda", "certify: range constant Lambda"},
    {"Omega0", "certify: range constant Omega0"},
    {"delta", "certify: bound for K on S regions"},
    {"epsilon", "certify: bound for the integral of Im y_lambda"},
    {"gamma", "gap-scan: gap threshold for the empirical N"},
    {"slope-lo", "gap-scan: slope fit window start"},
    {"slope-hi", "gap-scan: slope fit window end"},
    {"c", "continue: strip constant"},
    {"omega-start", "continue: real start of the path (default: first omega)"},
    {"omega-end", "continue: complex end of the path, e.g. 3+0.3i"},
    {"steps", "continue: number of path steps"},
    {"circle-radius", "continue: holomorphy circle radius around omega-end (0: skip)"},
    {"circle-nodes", "continue: holomorphy circle nodes"},
    {"conj", "continue: also continue the conjugate path"},
    {"projectors", "continue: projector diagnostics at omega-end"},
    {"truncation", "continue: truncation size for projector diagnostics"},
    {"random", "eigen: draw this many Omega uniformly in the grid's range"},
    {"seed", "eigen: random seed"},
    {"format", "json or csv"},
    {"output", "output path, - for stdout"},
    {"jobs", "worker threads"},
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral solver for the oblate spheroidal wave operator"};
    app.fallthrough();
    app.require_subcommand(0, 1);
    std::string configPath;
    app.add_option("--config", configPath, "JSON file with any of the options below; flags win");
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
    for (const auto& f : kFlags)
        options[f.key] = app.add_option(std::string("--") + f.key, values[f.key], f.help);
    for (const char* name : {"eigen", "gap-scan", "certify", "continue", "oracle"})
        app.add_subcommand(name, std::string("run ") + name);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        configure_logging();
        OptionMap merged;
        if (!configPath.empty()) merged = read_config_file(configPath);
        for (const auto& [key, opt] : options)
            if (opt->count() > 0) merged[key] = values[key];
        if (!app.get_subcommands().empty()) merged["command"] = app.get_subcommands().front()->get_name();
        const RunConfig cfg = build_config(merged);
        return run(cfg, std::cout);
    } catch (const SolverError& e) {
        std::cerr << to_json_line({{"type", std::string("error")},
                                   {"kind", std::string(kind_name(e.kind()))},
                                   {"message", std::string(e.what())}})
                  << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << to_json_line({{"type", std::string("error")}, {"kind", std::string("numerical")},
                                   {"message", std::string(e.what())}})
                  << '\n';
        return kNumerical;
    }
}
