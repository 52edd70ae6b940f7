#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cli_config.hpp"

namespace spheroidal::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int { kOk = 0, kHypothesis = 2, kNumerical = 3, kConfig = 4 };

int exit_code(ErrorKind kind);
const char* kind_name(ErrorKind kind);

using Value = std::variant<std::monostate, bool, long long, double, std::string>;
using Record = std::vector<std::pair<std::string, Value>>;

/// %.17g rendering, which reparses to the identical double.
std::string format_double(double x);

/// JSON lines, or CSV with a header line whenever the column set changes.
class RecordWriter {
public:
    RecordWriter(std::ostream& out, std::string format) : out_(out), format_(std::move(format)) {}
    void write(const Record& r);

private:
    std::ostream& out_;
    std::string format_;
    std::vector<std::string> header_;
};

std::string to_json_line(const Record& r);

struct CommandResult {
    std::vector<Record> records;
    int exitCode = kOk;
};

CommandResult cmd_eigen(const RunConfig& cfg);
CommandResult cmd_gap_scan(const RunConfig& cfg);
CommandResult cmd_certify(const RunConfig& cfg);
CommandResult cmd_continue(const RunConfig& cfg);
CommandResult cmd_oracle(const RunConfig& cfg);

/// Dispatches on cfg.command and writes every record to cfg.output ("-" is
/// stdout). Solver failures become error records; the exit code is that of
/// the first failure in output order.
int run(const RunConfig& cfg, std::ostream& stdoutStream);

/// Log level from SPHEROIDAL_LOG (trace, debug, info, warn, error, off).
void configure_logging();

}  // namespace spheroidal::cli
