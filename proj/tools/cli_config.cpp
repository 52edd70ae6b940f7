#include "cli_config.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace spheroidal::cli {

namespace {

std::string trim(std::string s) {
    const auto notSpace = [](unsigned char ch) { return !std::isspace(ch); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), notSpace));
    s.erase(std::find_if(s.rbegin(), s.rend(), notSpace).base(), s.end());
    return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    return out;
}

double to_double(const std::string& key, const std::string& s) {
    double v = 0.0;
    const std::string t = trim(s);
    const char* b = t.data();
    const char* e = b + t.size();
    if (!t.empty() && *b == '+') ++b;
    auto [p, ec] = std::from_chars(b, e, v);
    if (t.empty() || ec != std::errc() || p != e || !std::isfinite(v))
        throw config_error(key + ": expected a finite number, got '" + s + "'");
    return v;
}

long long to_int(const std::string& key, const std::string& s) {
    long long v = 0;
    const std::string t = trim(s);
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || p != t.data() + t.size())
        throw config_error(key + ": expected an integer, got '" + s + "'");
    return v;
}

bool to_bool(const std::string& key, const std::string& s) {
    const std::string t = trim(s);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw config_error(key + ": expected a boolean, got '" + s + "'");
}

double positive(const std::string& key, double v) {
    if (!(v > 0.0)) throw config_error(key + " must be positive");
    return v;
}

std::string json_to_option(const std::string& key, const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
        return buf;
    }
    if (v.is_array()) {
        std::string out;
        for (const auto& e : v) {
            if (!out.empty()) out += ",";
            out += json_to_option(key, e);
        }
        return out;
    }
    throw config_error("config key '" + key + "' has an unsupported value type");
}

}  // namespace

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys{
        "command", "k",         "omega",      "parity",        "nodes",        "lambda",
        "rtol",    "atol",      "eig-tol",    "trunc-tol",     "kappa",        "Lambda",
        "Omega0",  "delta",     "epsilon",    "gamma",         "slope-lo",     "slope-hi",
        "c",       "omega-start", "omega-end", "steps",        "circle-radius", "circle-nodes",
        "conj",    "projectors", "truncation", "random",       "seed",         "format",
        "output",  "jobs"};
    return keys;
}

std::vector<double> parse_grid(const std::string& s) {
    const std::string t = trim(s);
    if (t.empty()) throw config_error("omega: empty grid");
    std::vector<double> out;
    if (t.find(':') != std::string::npos) {
        const auto parts = split(t, ':');
        if (parts.size() != 3) throw config_error("omega: range must be start:stop:step, got '" + s + "'");
        const double a = to_double("omega", parts[0]);
        const double b = to_double("omega", parts[1]);
        const double h = to_double("omega", parts[2]);
        if (!(h > 0.0) || b < a) throw config_error("omega: range needs step > 0 and stop >= start");
        const double n = (b - a) / h;
        const long count = static_cast<long>(std::floor(n + 1e-9));
        if (count > 10'000'000) throw config_error("omega: range has too many points");
        for (long i = 0; i <= count; ++i) out.push_back(a + static_cast<double>(i) * h);
    } else {
        for (const auto& p : split(t, ',')) out.push_back(to_double("omega", p));
    }
    if (out.empty()) throw config_error("omega: empty grid");
    return out;
}

std::vector<int> parse_nodes(const std::string& s) {
    const std::string t = trim(s);
    std::vector<int> out;
    for (const auto& part : split(t, ',')) {
        const auto dots = part.find("..");
        if (dots != std::string::npos) {
            const long long a = to_int("nodes", part.substr(0, dots));
            const long long b = to_int("nodes", part.substr(dots + 2));
            if (a < 0 || b < a || b > 100000) throw config_error("nodes: invalid range '" + part + "'");
            for (long long m = a; m <= b; ++m) out.push_back(static_cast<int>(m));
        } else {
            const long long m = to_int("nodes", part);
            if (m < 0 || m > 100000) throw config_error("nodes: node count out of range");
            out.push_back(static_cast<int>(m));
        }
    }
    if (out.empty()) throw config_error("nodes: empty list");
    return out;
}

std::vector<Parity> parse_parities(const std::string& s) {
    const std::string t = trim(s);
    if (t == "even") return {Parity::Even};
    if (t == "odd") return {Parity::Odd};
    if (t == "both") return {Parity::Even, Parity::Odd};
    throw config_error("parity: expected even, odd or both, got '" + s + "'");
}

cplx parse_complex(const std::string& s) {
    std::string t;
    for (char ch : s)
        if (!std::isspace(static_cast<unsigned char>(ch))) t += ch;
    if (t.empty()) throw config_error("expected a complex number, got ''");
    if (t.back() != 'i' && t.back() != 'j') return {to_double("complex", t), 0.0};
    t.pop_back();
    // Split at the last sign that is not an exponent sign.
    std::size_t cut = std::string::npos;
    for (std::size_t i = t.size(); i-- > 1;) {
        if ((t[i] == '+' || t[i] == '-') && t[i - 1] != 'e' && t[i - 1] != 'E') {
            cut = i;
            break;
        }
    }
    auto imag_of = [&](const std::string& x) {
        if (x.empty() || x == "+") return 1.0;
        if (x == "-") return -1.0;
        return to_double("complex", x);
    };
    if (cut == std::string::npos) return {0.0, imag_of(t)};
    return {to_double("complex", t.substr(0, cut)), imag_of(t.substr(cut))};
}

OptionMap read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw config_error("config file '" + path + "': " + e.what());
    }
    if (!j.is_object()) throw config_error("config file '" + path + "' must hold a JSON object");
    const auto& keys = known_keys();
    OptionMap out;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(keys.begin(), keys.end(), it.key()) == keys.end())
            throw config_error("config file: unknown key '" + it.key() + "'");
        if (it.value().is_null()) continue;
        out[it.key()] = json_to_option(it.key(), it.value());
    }
    return out;
}

RunConfig build_config(const OptionMap& o) {
    RunConfig c;
    const auto& keys = known_keys();
    for (const auto& [k, v] : o)
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) throw config_error("unknown option '" + k + "'");
    auto has = [&](const char* k) { return o.count(k) > 0; };
    auto str = [&](const char* k) { return o.at(k); };
    auto num = [&](const char* k) { return to_double(k, o.at(k)); };
    auto integer = [&](const char* k) { return to_int(k, o.at(k)); };

    if (has("command")) c.command = trim(str("command"));
    static const std::set<std::string> commands{"eigen", "gap-scan", "certify", "continue", "oracle"};
    if (!commands.count(c.command)) throw config_error("unknown or missing command '" + c.command + "'");

    if (has("k")) {
        const long long k = integer("k");
        if (std::llabs(k) > 10000) throw config_error("k out of range");
        c.k = static_cast<int>(k);
    }
    if (has("omega")) c.omegas = parse_grid(str("omega"));
    if (c.command == "gap-scan") c.parities = {Parity::Even, Parity::Odd};
    if (has("parity")) c.parities = parse_parities(str("parity"));
    if (c.command == "gap-scan" && !has("nodes")) c.nodes = {0, 1, 2, 3, 4};
    if (has("nodes")) c.nodes = parse_nodes(str("nodes"));
    if (has("lambda")) c.lambda = num("lambda");

    if (has("rtol")) c.rtol = positive("rtol", num("rtol"));
    if (has("atol")) c.atol = positive("atol", num("atol"));
    if (has("eig-tol")) c.eigTol = positive("eig-tol", num("eig-tol"));
    if (has("trunc-tol")) c.truncTol = positive("trunc-tol", num("trunc-tol"));

    if (has("kappa")) c.kappa = positive("kappa", num("kappa"));
    if (has("Lambda")) c.Lambda = positive("Lambda", num("Lambda"));
    if (has("Omega0")) c.Omega0 = positive("Omega0", num("Omega0"));
    if (has("delta")) c.delta = positive("delta", num("delta"));
    if (has("epsilon")) c.epsilon = positive("epsilon", num("epsilon"));

    if (has("gamma")) c.gamma = positive("gamma", num("gamma"));
    if (has("slope-lo")) c.slopeLo = num("slope-lo");
    if (has("slope-hi")) c.slopeHi = num("slope-hi");
    if (c.slopeHi < c.slopeLo) throw config_error("slope-hi must not be below slope-lo");

    if (has("c")) c.c = num("c");
    if (c.command == "continue" && !(c.c > 0.0)) throw config_error("c must be positive for continue");
    if (has("omega-start")) {
        c.omegaStart = parse_complex(str("omega-start"));
        if (c.omegaStart.imag() != 0.0) throw config_error("omega-start must be real");
    } else {
        c.omegaStart = c.omegas.front();
    }
    c.omegaEnd = has("omega-end") ? parse_complex(str("omega-end")) : c.omegaStart;
    if (has("steps")) c.steps = static_cast<int>(integer("steps"));
    if (c.steps < 1 || c.steps > 1000000) throw config_error("steps must lie in [1, 1e6]");
    if (has("circle-radius")) c.circleRadius = num("circle-radius");
    if (c.circleRadius < 0.0) throw config_error("circle-radius must be non-negative");
    if (has("circle-nodes")) c.circleNodes = static_cast<int>(integer("circle-nodes"));
    if (c.circleNodes < 4 || c.circleNodes > 4096) throw config_error("circle-nodes must lie in [4, 4096]");
    if (has("conj")) c.conj = to_bool("conj", str("conj"));
    if (has("projectors")) c.projectors = to_bool("projectors", str("projectors"));
    if (has("truncation")) c.truncation = static_cast<int>(integer("truncation"));
    if (c.truncation < 4 || c.truncation > 2000) throw config_error("truncation must lie in [4, 2000]");

    if (has("random")) c.random = static_cast<int>(integer("random"));
    if (c.random < 0) throw config_error("random must be non-negative");
    if (has("seed")) {
        const long long s = integer("seed");
        if (s < 0) throw config_error("seed must be non-negative");
        c.seed = static_cast<std::uint64_t>(s);
    }

    if (has("format")) c.format = trim(str("format"));
    if (c.format != "json" && c.format != "csv") throw config_error("format must be json or csv");
    if (has("output")) c.output = str("output");
    if (c.output.empty()) throw config_error("output path is empty");
    if (has("jobs")) c.jobs = static_cast<int>(integer("jobs"));
    if (c.jobs < 1 || c.jobs > 1024) throw config_error("jobs must lie in [1, 1024]");
    return c;
}

}  // namespace spheroidal::cli
