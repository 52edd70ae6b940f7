#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spheroidal/types.hpp"

namespace spheroidal::cli {

/// Every run parameter. Keys of the JSON config file are the long flag
/// names without the leading dashes; see README for the schema.
struct RunConfig {
    std::string command;

    int k = 0;
    std::vector<double> omegas{0.0};
    std::vector<Parity> parities{Parity::Even};
    std::vector<int> nodes{0};
    std::optional<double> lambda;  ///< certify: fixed lambda instead of the branch eigenvalue

    double rtol = 1e-10;      ///< integrator relative tolerance
    double atol = 1e-12;      ///< integrator absolute tolerance
    double eigTol = 1e-11;    ///< eigenvalue Newton tolerance (relative)
    double truncTol = 1e-9;   ///< oracle truncation tolerance (relative)

    std::optional<double> kappa;  ///< certify: fixed kappa instead of the ladder
    double Lambda = 64.0;
    double Omega0 = 16.0;
    double delta = 1.0;
    double epsilon = 1.0;

    double gamma = 1.0;
    double slopeLo = 100.0;
    double slopeHi = 200.0;

    double c = 2.0;
    cplx omegaStart = 0.0;
    cplx omegaEnd = 0.0;
    int steps = 30;
    double circleRadius = 0.1;
    int circleNodes = 16;
    bool conj = true;
    bool projectors = false;
    int truncation = 60;

    int random = 0;           ///< eigen: draw this many Omega uniformly in the grid's range
    std::uint64_t seed = 0;

    std::string format = "json";
    std::string output = "-";
    int jobs = 1;
};

/// Raw option values by key. Flags given on the command line override the
/// values read from the config file.
using OptionMap = std::map<std::string, std::string>;

/// Reads a JSON object file into an OptionMap. Throws a Config error.
OptionMap read_config_file(const std::string& path);

/// Validates and converts merged options. Throws a Config error naming the key.
RunConfig build_config(const OptionMap& options);

/// Keys accepted by build_config.
const std::vector<std::string>& known_keys();

std::vector<double> parse_grid(const std::string& s);
std::vector<int> parse_nodes(const std::string& s);
std::vector<Parity> parse_parities(const std::string& s);
cplx parse_complex(const std::string& s);

}  // namespace spheroidal::cli
