#pragma once

// Command-line front end: flag parsing into a RunConfig and execution into
// JSON lines, CSV or text records.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace roskit::cli {

/// Malformed command line or inconsistent flags.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// --help was given; what() is the usage text.
class HelpRequested : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Format { json, csv, text };

struct RunConfig {
    std::string command;  // constant, sup, extremal, match, verify, table
    std::string suite;    // verify suite name
    std::optional<double> p;
    std::optional<double> p_min, p_max, p_step;
    std::string V = "rademacher";
    double A = 1.0;
    double B = 1.0;
    std::vector<double> a, b;
    std::string family;
    std::optional<long> n;
    std::optional<std::size_t> trials;
    std::uint64_t seed = 0;
    std::optional<double> tol;
    Format format = Format::json;
    std::string out;
    bool positive = false;
};

/// Parses argv. Throws UsageError on bad flags and HelpRequested for --help.
RunConfig parse_args(int argc, const char* const* argv);

/// Checks the RunConfig invariants; throws UsageError.
void validate(const RunConfig& config);

/// Executes the command, writing records to `out` (or config.out when set).
/// Returns 0 on success, 2 on bad or infeasible input (one-line JSON reason
/// on `err`), 1 on internal errors.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_args + run with the process streams.
int main_entry(int argc, const char* const* argv);

/// The fixed CSV header.
const std::vector<std::string>& csv_columns();

}  // namespace roskit::cli
