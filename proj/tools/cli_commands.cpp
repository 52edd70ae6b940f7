#include "cli_commands.hpp"

#include <json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <regex>
#include <set>

#include "spheroidal/continuation.hpp"
#include "spheroidal/eigensolver.hpp"
#include "spheroidal/invariant_disk.hpp"
#include "spheroidal/oracle.hpp"
#include "spheroidal/parallel.hpp"

namespace spheroidal::cli {

const char* kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::Hypothesis: return "hypothesis";
        case ErrorKind::Numerical: return "numerical";
        case ErrorKind::Config: return "config";
    }
    return "numerical";
}

namespace {

Value opt(const std::optional<double>& x) {
    if (x) return *x;
    return std::monostate{};
}

EigenOptions eigen_options(const RunConfig& c) {
    EigenOptions e;
    e.shoot.riccati.step.rtol = c.rtol;
    e.shoot.riccati.step.atol = c.atol;
    e.tol = c.eigTol;
    return e;
}

// Region name from messages of the form "... region X: ...".
std::optional<std::string> region_of(const std::string& msg) {
    static const std::regex re(R"(region ([A-Za-z0-9+\-]+):)");
    std::smatch m;
    if (!std::regex_search(msg, m, re)) return std::nullopt;
    return m[1].str();
}

Record error_record(const SolverError& e, Record context) {
    Record r{{"type", std::string("error")}, {"kind", std::string(kind_name(e.kind()))}};
    for (auto& kv : context) r.push_back(std::move(kv));
    if (auto reg = region_of(e.what())) r.emplace_back("region", *reg);
    r.emplace_back("message", std::string(e.what()));
    return r;
}

// Collects per-task record lists in task order and the first failure code.
struct Slots {
    std::vector<std::vector<Record>> records;
    std::vector<int> codes;
    explicit Slots(std::size_t n) : records(n), codes(n, kOk) {}

    CommandResult merge() const {
        CommandResult out;
        for (std::size_t i = 0; i < records.size(); ++i) {
            out.records.insert(out.records.end(), records[i].begin(), records[i].end());
            if (out.exitCode == kOk && codes[i] != kOk) out.exitCode = codes[i];
        }
        return out;
    }
};

std::vector<double> omega_grid(const RunConfig& c) {
    if (c.random == 0) return c.omegas;
    const auto [lo, hi] = std::minmax_element(c.omegas.begin(), c.omegas.end());
    std::mt19937_64 gen(c.seed);
    std::vector<double> out;
    for (int i = 0; i < c.random; ++i) {
        // 53 random bits mapped to [0, 1); independent of the library's distributions.
        const double t = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        out.push_back(*lo + (*hi - *lo) * t);
    }
    return out;
}

}  // namespace

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Hypothesis: return kHypothesis;
        case ErrorKind::Numerical: return kNumerical;
        case ErrorKind::Config: return kConfig;
    }
    return kNumerical;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::string json_value(const Value& v) {
    struct Visitor {
        std::string operator()(std::monostate) const { return "null"; }
        std::string operator()(bool b) const { return b ? "true" : "false"; }
        std::string operator()(long long i) const { return std::to_string(i); }
        std::string operator()(double d) const { return std::isfinite(d) ? format_double(d) : "null"; }
        std::string operator()(const std::string& s) const { return nlohmann::json(s).dump(); }
    };
    return std::visit(Visitor{}, v);
}

std::string csv_value(const Value& v) {
    struct Visitor {
        std::string operator()(std::monostate) const { return ""; }
        std::string operator()(bool b) const { return b ? "true" : "false"; }
        std::string operator()(long long i) const { return std::to_string(i); }
        std::string operator()(double d) const {
            if (std::isnan(d)) return "nan";
            if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
            return format_double(d);
        }
        std::string operator()(const std::string& s) const {
            if (s.find_first_of(",\"\n") == std::string::npos) return s;
            std::string q = "\"";
            for (char ch : s) {
                if (ch == '"') q += '"';
                q += ch;
            }
            return q + "\"";
        }
    };
    return std::visit(Visitor{}, v);
}

}  // namespace

std::string to_json_line(const Record& r) {
    std::string s = "{";
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) s += ",";
        s += nlohmann::json(r[i].first).dump();
        s += ":";
        s += json_value(r[i].second);
    }
    return s + "}";
}

void RecordWriter::write(const Record& r) {
    if (format_ == "json") {
        out_ << to_json_line(r) << '\n';
        return;
    }
    std::vector<std::string> keys;
    for (const auto& kv : r) keys.push_back(kv.first);
    if (keys != header_) {
        if (!header_.empty()) out_ << '\n';
        for (std::size_t i = 0; i < keys.size(); ++i) out_ << (i ? "," : "") << keys[i];
        out_ << '\n';
        header_ = keys;
    }
    for (std::size_t i = 0; i < r.size(); ++i) out_ << (i ? "," : "") << csv_value(r[i].second);
    out_ << '\n';
}

CommandResult cmd_eigen(const RunConfig& c) {
    const std::vector<double> omegas = omega_grid(c);
    const std::size_t nO = omegas.size(), nP = c.parities.size();
    Slots slots(nP * nO);
    const int mMax = *std::max_element(c.nodes.begin(), c.nodes.end());
    parallel_for(nP * nO, c.jobs, [&](std::size_t task) {
        const Parity par = c.parities[task / nO];
        const double om = omegas[task % nO];
        auto& out = slots.records[task];
        Record ctx{{"k", static_cast<long long>(c.k)}, {"parity", std::string(to_string(par))},
                   {"omega", om}};
        try {
            OracleOptions oo;
            oo.tol = c.truncTol;
            const OracleResult orc = oracle_eigenvalues(c.k, om, par, mMax + 2, oo);
            std::map<int, EigenvalueRecord> solved;
            auto solve = [&](int m) -> const EigenvalueRecord& {
                auto it = solved.find(m);
                if (it != solved.end()) return it->second;
                EigenOptions eo = eigen_options(c);
                eo.guess = orc.values[m];
                spdlog::debug("eigen k={} {} m={} omega={}", c.k, to_string(par), m, om);
                return solved.emplace(m, find_eigenvalue(m, par, c.k, om, eo)).first->second;
            };
            for (int m : c.nodes) {
                try {
                    const EigenvalueRecord r = solve(m);
                    std::optional<double> gap;
                    try {
                        gap = solve(m + 1).lambda - r.lambda;
                    } catch (const SolverError& e) {
                        spdlog::warn("gap_to_next unavailable for m={}: {}", m, e.what());
                    }
                    out.push_back({{"k", static_cast<long long>(c.k)},
                                   {"parity", std::string(to_string(par))},
                                   {"m", static_cast<long long>(m)},
                                   {"omega", om},
                                   {"lambda", r.lambda},
                                   {"residual", r.residual},
                                   {"nodes_verified", r.nodeCountVerified},
                                   {"gap_to_next", opt(gap)}});
                } catch (const SolverError& e) {
                    Record ctxm = ctx;
                    ctxm.emplace_back("m", static_cast<long long>(m));
                    out.push_back(error_record(e, ctxm));
                    if (slots.codes[task] == kOk) slots.codes[task] = exit_code(e.kind());
                }
            }
        } catch (const SolverError& e) {
            out.push_back(error_record(e, ctx));
            slots.codes[task] = exit_code(e.kind());
        }
    });
    return slots.merge();
}

CommandResult cmd_gap_scan(const RunConfig& c) {
    GapScanConfig g;
    g.k = c.k;
    g.omegas = c.omegas;
    g.mMin = *std::min_element(c.nodes.begin(), c.nodes.end());
    g.mMax = *std::max_element(c.nodes.begin(), c.nodes.end());
    g.parities = c.parities;
    g.gamma = c.gamma;
    g.slopeLo = c.slopeLo;
    g.slopeHi = c.slopeHi;
    g.jobs = c.jobs;
    g.eigen = eigen_options(c);
    spdlog::info("gap-scan k={} over {} Omega values, m {}..{}", c.k, g.omegas.size(), g.mMin, g.mMax);
    const GapScanResult res = gap_scan(g);
    CommandResult out;
    for (const GapRow& row : res.rows) {
        const std::size_t ip = std::find(g.parities.begin(), g.parities.end(), row.parity) - g.parities.begin();
        Value en = std::monostate{};
        if (res.empiricalN[ip]) en = static_cast<long long>(*res.empiricalN[ip]);
        out.records.push_back({{"k", static_cast<long long>(c.k)},
                               {"parity", std::string(to_string(row.parity))},
                               {"m", static_cast<long long>(row.m)},
                               {"min_gap", row.minGap},
                               {"argmin_omega", row.argminOmega},
                               {"lipschitz_violations", static_cast<long long>(row.lipschitzViolations)},
                               {"lipschitz_violated", row.lipschitzViolations > 0},
                               {"max_lipschitz_ratio", row.maxLipschitzRatio},
                               {"slope", opt(row.slope)},
                               {"predicted_slope", row.predictedSlope},
                               {"slope_rel_error", opt(row.slopeRelError)},
                               {"nodes_verified", row.nodesVerified},
                               {"gamma", c.gamma},
                               {"empirical_N", en}});
    }
    return out;
}

namespace {

Record region_record(const Record& ctx, const RegionCertificate& rc) {
    Record r{{"type", std::string("region")}};
    r.insert(r.end(), ctx.begin(), ctx.end());
    r.insert(r.end(), {{"region", rc.region.name},
                       {"method", rc.method},
                       {"a", rc.region.a},
                       {"b", rc.region.b},
                       {"hypotheses_met", rc.hypothesesMet},
                       {"lemma_only", rc.lemmaOnly},
                       {"contained", rc.contained},
                       {"min_slack", rc.minSlack},
                       {"bounds_hold", rc.boundsHold},
                       {"worst_bound_ratio", rc.worstBoundRatio},
                       {"certified", rc.certified()},
                       {"K", opt(rc.K)},
                       {"L", opt(rc.L)},
                       {"c1", opt(rc.c1)},
                       {"c2", opt(rc.c2)},
                       {"C", opt(rc.C)},
                       {"T0", opt(rc.T0)},
                       {"Bcond", opt(rc.Bcond)},
                       {"note", rc.hypothesisNote}});
    return r;
}

}  // namespace

CommandResult cmd_certify(const RunConfig& c) {
    struct Target {
        Parity par;
        int m;
        double omega;
    };
    std::vector<Target> targets;
    for (Parity par : c.parities)
        for (double om : c.omegas) {
            if (c.lambda) {
                targets.push_back({par, -1, om});
                continue;
            }
            for (int m : c.nodes) targets.push_back({par, m, om});
        }
    if (c.lambda && c.parities.size() > 1) targets.resize(c.omegas.size());

    CertifyOptions co;
    co.partition.LambdaBig = c.Lambda;
    co.partition.Omega0 = c.Omega0;
    if (c.kappa) co.kappaLadder = {*c.kappa};
    co.delta = c.delta;
    co.epsilon = c.epsilon;

    Slots slots(targets.size());
    parallel_for(targets.size(), c.jobs, [&](std::size_t i) {
        const Target& t = targets[i];
        Record ctx{{"k", static_cast<long long>(c.k)}, {"omega", t.omega}};
        if (!c.lambda) {
            ctx.emplace_back("parity", std::string(to_string(t.par)));
            ctx.emplace_back("m", static_cast<long long>(t.m));
        }
        auto& out = slots.records[i];
        try {
            double lam = c.lambda.value_or(0.0);
            if (!c.lambda) lam = find_eigenvalue(t.m, t.par, c.k, t.omega, eigen_options(c)).lambda;
            ctx.emplace_back("lambda", lam);
            spdlog::info("certify k={} omega={} lambda={}", c.k, t.omega, lam);
            const CertifyReport rep = certify(real_params(c.k, t.omega, lam), co);
            bool numericalFail = false;
            for (const auto& rc : rep.regions) {
                out.push_back(region_record(ctx, rc));
                if ((rc.hypothesesMet || rc.lemmaOnly) && !(rc.contained && rc.boundsHold)) numericalFail = true;
            }
            Record s{{"type", std::string("summary")}};
            s.insert(s.end(), ctx.begin(), ctx.end());
            s.insert(s.end(), {{"kappa", rep.kappa},
                               {"in_range", rep.inRange},
                               {"all_certified", rep.allCertified},
                               {"k_within_delta", rep.kWithinDelta},
                               {"l_within_omega0", rep.lWithinOmega0},
                               {"sensitivity_total", rep.sensitivityTotal},
                               {"epsilon", c.epsilon},
                               {"sensitivity_within_epsilon", rep.sensitivityWithinEpsilon},
                               {"re_im_min", rep.reImMin},
                               {"phase_separation", rep.phaseSeparation},
                               {"gap_lower_bound", rep.gapLowerBound}});
            out.push_back(std::move(s));
            if (numericalFail)
                slots.codes[i] = kNumerical;
            else if (!rep.allCertified)
                slots.codes[i] = kHypothesis;
        } catch (const SolverError& e) {
            out.push_back(error_record(e, ctx));
            slots.codes[i] = exit_code(e.kind());
        }
    });
    return slots.merge();
}

CommandResult cmd_continue(const RunConfig& c) {
    const Branch br{c.nodes.front(), c.parities.front(), c.k};
    const StripSpec strip{c.c};
    ContinuationOptions co;
    co.eigen = eigen_options(c);
    co.requireStrip = true;
    const std::vector<cplx> pathPts = linear_path(c.omegaStart, c.omegaEnd, c.steps);
    if (c.circleRadius > 0.0) {
        for (int j = 0; j < c.circleNodes; ++j) {
            const cplx z = c.omegaEnd + c.circleRadius * std::polar(1.0, 2.0 * kPi * j / c.circleNodes);
            if (!strip.contains(z))
                throw hypothesis_error("holomorphy circle leaves the strip at Omega = " + format_double(z.real()) +
                                       (z.imag() < 0 ? "" : "+") + format_double(z.imag()) + "i");
        }
    }

    // The path, its conjugate and the circle are independent continuations.
    ComplexEigenPath path, conjPath;
    std::optional<HolomorphyReport> holo;
    std::optional<ProjectorReport> proj;
    std::optional<double> realAxisRel;
    parallel_for(4, c.jobs, [&](std::size_t task) {
        if (task == 0) {
            path = continue_eigenvalue(br, pathPts, strip, co);
            const auto rec = find_eigenvalue(br.m, br.parity, br.k, c.omegaStart.real(), co.eigen);
            realAxisRel = std::abs(path.samples.front().lambda - rec.lambda) / std::max(1.0, std::abs(rec.lambda));
        } else if (task == 1 && c.conj) {
            std::vector<cplx> cp;
            for (cplx z : pathPts) cp.push_back(std::conj(z));
            conjPath = continue_eigenvalue(br, cp, strip, co);
        } else if (task == 2 && c.circleRadius > 0.0) {
            holo = branch_holomorphy(br, c.omegaEnd, c.circleRadius, c.circleNodes, strip, co);
        } else if (task == 3 && c.projectors) {
            proj = projector_diagnostics(c.k, c.omegaEnd, br.parity, c.truncation, c.c);
        }
    });

    CommandResult out;
    const Record ctx{{"k", static_cast<long long>(c.k)},
                     {"parity", std::string(to_string(br.parity))},
                     {"m", static_cast<long long>(br.m)}};
    double conjMax = 0.0;
    bool newtonOk = true;
    for (std::size_t i = 0; i < path.samples.size(); ++i) {
        const PathSample& s = path.samples[i];
        Value cd = std::monostate{};
        if (c.conj) {
            const double d = std::abs(conjPath.samples[i].lambda - std::conj(s.lambda));
            conjMax = std::max(conjMax, d);
            cd = d;
        }
        const bool ok = s.newtonResidual <= 1e-9 * (1.0 + std::abs(s.lambda));
        newtonOk = newtonOk && ok;
        Record r{{"type", std::string("path")}};
        r.insert(r.end(), ctx.begin(), ctx.end());
        r.insert(r.end(), {{"omega_re", s.omega.real()},
                           {"omega_im", s.omega.imag()},
                           {"lambda_re", s.lambda.real()},
                           {"lambda_im", s.lambda.imag()},
                           {"newton_residual", s.newtonResidual},
                           {"newton_ok", ok},
                           {"in_strip", s.inStrip},
                           {"strip_load", s.stripLoad},
                           {"oracle_distance", s.oracleDistance},
                           {"nearest_other", s.nearestOther},
                           {"collision", s.collision},
                           {"conj_diff", cd}});
        out.records.push_back(std::move(r));
    }
    if (holo) {
        Record r{{"type", std::string("holomorphy")}};
        r.insert(r.end(), ctx.begin(), ctx.end());
        r.insert(r.end(), {{"center_re", holo->center.real()},
                           {"center_im", holo->center.imag()},
                           {"radius", holo->radius},
                           {"nodes", static_cast<long long>(holo->nodes)},
                           {"dbar_residual", holo->dbarResidual},
                           {"cauchy_integral", holo->cauchyIntegral},
                           {"mean_value_residual", opt(holo->meanValueResidual)}});
        out.records.push_back(std::move(r));
    }
    if (proj) {
        Record r{{"type", std::string("projectors")}, {"k", static_cast<long long>(c.k)},
                 {"parity", std::string(to_string(br.parity))}};
        r.insert(r.end(), {{"omega_re", proj->omega.real()},
                           {"omega_im", proj->omega.imag()},
                           {"size", static_cast<long long>(proj->size)},
                           {"in_strip", proj->inStrip},
                           {"norm_W", proj->normW},
                           {"rho", proj->split.rho},
                           {"gamma", proj->split.gamma},
                           {"N", static_cast<long long>(proj->split.N)},
                           {"contours", static_cast<long long>(proj->contours)},
                           {"quadrature_nodes", static_cast<long long>(proj->quadratureNodes)},
                           {"max_idempotency", proj->maxIdempotency},
                           {"rank_Q0", static_cast<long long>(proj->rankQ0)},
                           {"ranks_ok", proj->ranksOk},
                           {"gap_condition", proj->gapConditionHolds},
                           {"max_projector_distance", proj->maxProjectorDistance},
                           {"completeness", proj->completeness},
                           {"tails_decrease", proj->tailsDecrease},
                           {"pass", proj->pass}});
        out.records.push_back(std::move(r));
    }
    Record s{{"type", std::string("summary")}};
    s.insert(s.end(), ctx.begin(), ctx.end());
    s.insert(s.end(), {{"c", c.c},
                       {"rho", path.split.rho},
                       {"gamma", path.split.gamma},
                       {"N", static_cast<long long>(path.split.N)},
                       {"cluster_regime", path.clusterRegime},
                       {"fitted_C", path.fittedC},
                       {"fitted_eps", opt(path.fittedEps)},
                       {"max_im_on_axis", path.maxImOnAxis},
                       {"conj_max", c.conj ? Value(conjMax) : Value(std::monostate{})},
                       {"real_axis_rel", opt(realAxisRel)},
                       {"newton_ok", newtonOk}});
    out.records.push_back(std::move(s));
    if (proj && !proj->pass) out.exitCode = kNumerical;
    return out;
}

CommandResult cmd_oracle(const RunConfig& c) {
    const std::size_t nO = c.omegas.size(), nP = c.parities.size();
    Slots slots(nP * nO);
    const int mMax = *std::max_element(c.nodes.begin(), c.nodes.end());
    parallel_for(nP * nO, c.jobs, [&](std::size_t task) {
        const Parity par = c.parities[task / nO];
        const double om = c.omegas[task % nO];
        try {
            OracleOptions oo;
            oo.tol = c.truncTol;
            const OracleResult r = oracle_eigenvalues(c.k, om, par, mMax + 1, oo);
            for (int m : c.nodes) {
                const double v = r.values[m], p = r.previous[m];
                slots.records[task].push_back({{"k", static_cast<long long>(c.k)},
                                               {"parity", std::string(to_string(par))},
                                               {"m", static_cast<long long>(m)},
                                               {"omega", om},
                                               {"lambda", v},
                                               {"lambda_previous", p},
                                               {"size", static_cast<long long>(r.size)},
                                               {"previous_size", static_cast<long long>(r.size - 16)},
                                               {"rel_change", std::abs(v - p) / std::max(1.0, std::abs(v))},
                                               {"converged", r.converged}});
            }
        } catch (const SolverError& e) {
            slots.records[task].push_back(error_record(
                e, {{"k", static_cast<long long>(c.k)}, {"parity", std::string(to_string(par))}, {"omega", om}}));
            slots.codes[task] = exit_code(e.kind());
        }
    });
    return slots.merge();
}

int run(const RunConfig& cfg, std::ostream& stdoutStream) {
    CommandResult res;
    try {
        if (cfg.command == "eigen") res = cmd_eigen(cfg);
        else if (cfg.command == "gap-scan") res = cmd_gap_scan(cfg);
        else if (cfg.command == "certify") res = cmd_certify(cfg);
        else if (cfg.command == "continue") res = cmd_continue(cfg);
        else if (cfg.command == "oracle") res = cmd_oracle(cfg);
        else throw config_error("unknown command '" + cfg.command + "'");
    } catch (const SolverError& e) {
        res.records = {error_record(e, {{"command", cfg.command}})};
        res.exitCode = exit_code(e.kind());
    }
    std::ofstream file;
    std::ostream* os = &stdoutStream;
    if (cfg.output != "-") {
        file.open(cfg.output, std::ios::binary | std::ios::trunc);
        if (!file) {
            std::cerr << to_json_line({{"type", std::string("error")}, {"kind", std::string("config")},
                                       {"message", "cannot write '" + cfg.output + "'"}})
                      << '\n';
            return kConfig;
        }
        os = &file;
    }
    RecordWriter w(*os, cfg.format);
    for (const auto& r : res.records) {
        w.write(r);
        if (!r.empty() && r.front().first == "type" && std::get<std::string>(r.front().second) == "error")
            std::cerr << to_json_line(r) << '\n';
    }
    os->flush();
    return res.exitCode;
}

void configure_logging() {
    auto logger = spdlog::stderr_logger_mt("spheroidal");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("SPHEROIDAL_LOG")) {
        static const std::set<std::string> names{"trace", "debug", "info", "warn", "warning", "error", "critical", "off"};
        std::string s(env);
        if (!names.count(s)) throw config_error("SPHEROIDAL_LOG: unknown level '" + s + "'");
        if (s == "warning") s = "warn";
        spdlog::set_level(spdlog::level::from_str(s));
    }
}

}  // namespace spheroidal::cli
