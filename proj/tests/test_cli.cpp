#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "cli_commands.hpp"
#include "cli_config.hpp"

using namespace spheroidal;
using namespace spheroidal::cli;

namespace {

std::string temp_path(const char* name) {
    const char* dir = std::getenv("TMPDIR");
    return std::string(dir ? dir : "/tmp") + "/" + name;
}

std::string run_to_string(const RunConfig& cfg, int* code = nullptr) {
    std::ostringstream os;
    const int c = run(cfg, os);
    if (code) *code = c;
    return os.str();
}

}  // namespace

TEST_CASE("grid parsing") {
    CHECK(parse_grid("0,1.5,3") == std::vector<double>{0.0, 1.5, 3.0});
    const auto g = parse_grid("0:1:0.25");
    REQUIRE(g.size() == 5);
    CHECK(g.back() == doctest::Approx(1.0));
    CHECK(parse_grid("0:500:0.5").size() == 1001);
    CHECK_THROWS_AS(parse_grid(""), SolverError);
    CHECK_THROWS_AS(parse_grid("1:0:1"), SolverError);
    CHECK_THROWS_AS(parse_grid("a,b"), SolverError);
    CHECK_THROWS_AS(parse_grid("1,nan"), SolverError);
}

TEST_CASE("node list parsing") {
    CHECK(parse_nodes("0..4") == std::vector<int>{0, 1, 2, 3, 4});
    CHECK(parse_nodes("2,5..6") == std::vector<int>{2, 5, 6});
    CHECK_THROWS_AS(parse_nodes("4..2"), SolverError);
    CHECK_THROWS_AS(parse_nodes("-1"), SolverError);
}

TEST_CASE("parity and complex parsing") {
    CHECK(parse_parities("both").size() == 2);
    CHECK(parse_parities("odd") == std::vector<Parity>{Parity::Odd});
    CHECK_THROWS_AS(parse_parities("up"), SolverError);
    CHECK(parse_complex("3+0.3i") == cplx(3.0, 0.3));
    CHECK(parse_complex("3 - 0.3i") == cplx(3.0, -0.3));
    CHECK(parse_complex("0.3i") == cplx(0.0, 0.3));
    CHECK(parse_complex("-i") == cplx(0.0, -1.0));
    CHECK(parse_complex("1e-3+2e-2i") == cplx(1e-3, 2e-2));
    CHECK(parse_complex("7") == cplx(7.0, 0.0));
    CHECK_THROWS_AS(parse_complex("3+xi"), SolverError);
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(build_config({}), SolverError);
    CHECK_THROWS_AS(build_config({{"command", "eigen"}, {"rtol", "-1"}}), SolverError);
    CHECK_THROWS_AS(build_config({{"command", "eigen"}, {"format", "xml"}}), SolverError);
    CHECK_THROWS_AS(build_config({{"command", "continue"}, {"c", "0"}}), SolverError);
    CHECK_THROWS_AS(build_config({{"command", "eigen"}, {"bogus", "1"}}), SolverError);
    CHECK_THROWS_AS(build_config({{"command", "continue"}, {"omega-start", "1+1i"}}), SolverError);
    try {
        build_config({{"command", "eigen"}, {"k", "x"}});
    } catch (const SolverError& e) {
        CHECK(e.kind() == ErrorKind::Config);
        CHECK(exit_code(e.kind()) == 4);
        CHECK(std::string(e.what()).find("k:") == 0);
    }
    const RunConfig c = build_config({{"command", "gap-scan"}});
    CHECK(c.parities.size() == 2);
    CHECK(c.nodes.size() == 5);
}

TEST_CASE("config file with flag precedence") {
    const std::string path = temp_path("spheroidal_test_config.json");
    {
        std::ofstream f(path);
        f << R"({"command": "eigen", "k": 2, "omega": [0, 1.5], "parity": "odd", "rtol": 1e-11, "conj": false})";
    }
    OptionMap m = read_config_file(path);
    CHECK(m.at("k") == "2");
    CHECK(m.at("omega") == "0,1.5");
    m["k"] = "1";  // a flag given on the command line
    const RunConfig c = build_config(m);
    CHECK(c.k == 1);
    CHECK(c.omegas == std::vector<double>{0.0, 1.5});
    CHECK(c.parities == std::vector<Parity>{Parity::Odd});
    CHECK(c.rtol == 1e-11);
    CHECK_FALSE(c.conj);
    {
        std::ofstream f(path);
        f << R"({"command": "eigen", "nonsense": 1})";
    }
    CHECK_THROWS_AS(read_config_file(path), SolverError);
    {
        std::ofstream f(path);
        f << "{not json";
    }
    CHECK_THROWS_AS(read_config_file(path), SolverError);
    std::remove(path.c_str());
}

TEST_CASE("%.17g output round-trips") {
    for (double x : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-310, 72.000000000561556, 1e300}) {
        const std::string s = format_double(x);
        CHECK(std::strtod(s.c_str(), nullptr) == x);
    }
}

TEST_CASE("JSON and CSV writers") {
    const Record r{{"a", 1LL}, {"b", 0.1}, {"c", std::string("x\"y")}, {"d", true}, {"e", std::monostate{}}};
    CHECK(to_json_line(r) == R"({"a":1,"b":0.10000000000000001,"c":"x\"y","d":true,"e":null})");
    std::ostringstream os;
    RecordWriter w(os, "csv");
    w.write({{"a", 1LL}, {"b", 2.5}});
    w.write({{"a", 2LL}, {"b", 3.5}});
    w.write({{"z", 1LL}});
    // A changed column set starts a new table after a blank line.
    CHECK(os.str() == "a,b\n1,2.5\n2,3.5\n\nz\n1\n");
}

TEST_CASE("eigen command: Legendre values") {
    RunConfig cfg = build_config({{"command", "eigen"}, {"k", "0"}, {"omega", "0"}, {"nodes", "0..4"}});
    const CommandResult r = cmd_eigen(cfg);
    CHECK(r.exitCode == 0);
    REQUIRE(r.records.size() == 5);
    const double expect[] = {0, 6, 20, 42, 72};
    for (int i = 0; i < 5; ++i) {
        double lam = 0.0;
        for (const auto& [key, v] : r.records[i])
            if (key == "lambda") lam = std::get<double>(v);
        CHECK(std::abs(lam - expect[i]) <= 1e-8 * std::max(1.0, expect[i]));
    }
}

TEST_CASE("eigen and oracle commands agree") {
    auto lambda_of = [](const CommandResult& r) {
        for (const auto& [key, v] : r.records.front())
            if (key == "lambda") return std::get<double>(v);
        return 0.0;
    };
    const RunConfig e = build_config({{"command", "eigen"}, {"omega", "10"}});
    const RunConfig o = build_config({{"command", "oracle"}, {"omega", "10"}});
    CHECK(lambda_of(cmd_eigen(e)) == doctest::Approx(lambda_of(cmd_oracle(o))).epsilon(1e-6));
}

TEST_CASE("exit codes") {
    int code = -1;
    run_to_string(build_config({{"command", "certify"}, {"k", "1"}, {"omega", "0.1"}}), &code);
    CHECK(code == 2);
    const std::string out = run_to_string(build_config({{"command", "eigen"}, {"omega", "1"}}), &code);
    CHECK(code == 0);
    CHECK(out.find("\"lambda\":") != std::string::npos);
    CHECK(exit_code(ErrorKind::Numerical) == 3);
    CHECK(exit_code(ErrorKind::Hypothesis) == 2);
    CHECK(exit_code(ErrorKind::Config) == 4);
}

TEST_CASE("jobs do not change the output") {
    OptionMap m{{"command", "eigen"}, {"k", "1"}, {"omega", "0:8:2"}, {"parity", "both"}, {"nodes", "0..2"}};
    const std::string one = run_to_string(build_config(m));
    m["jobs"] = "4";
    CHECK(run_to_string(build_config(m)) == one);
}
