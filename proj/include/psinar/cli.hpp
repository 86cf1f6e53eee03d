#pragma once

#include "psinar/process.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace psinar::cli {

inline constexpr std::uint64_t kDefaultSeed = 20240607;

enum class Command { Simulate, Fit, Compare, Predict, McStudy, Describe };
enum class OutputFormat { Json, Csv, Text };

enum ExitCode : int {
    kSuccess = 0,
    kInputError = 2,
    kEstimationFailure = 3,
    kConfigurationError = 4,
};

struct RunConfig {
    Command command = Command::Describe;
    std::string input_path;
    std::string output_path;  // empty: standard output
    /// Unset: csv for simulate and predict, text otherwise.
    std::optional<OutputFormat> format;
    std::string family = "bernoulli";
    std::string innovation = "pl";
    std::optional<double> alpha;
    std::optional<double> theta;
    std::optional<double> lambda;
    std::optional<double> p;
    std::uint64_t seed = kDefaultSeed;
    std::size_t length = 100;
    std::size_t burn_in = kDefaultBurnIn;
    std::size_t replicates = 1000;
    std::vector<std::size_t> lengths{100, 200, 300};
    std::string method = "all";
    std::string prediction_mode = "observed";
    unsigned threads = 0;
};

/// Bad input data: parse failure, negative or non-integer value, too short.
class InputError : public std::runtime_error {
public:
    InputError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Inconsistent or invalid options.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SeriesSummary {
    std::size_t length;
    double mean;
    double variance;  // T - 1 denominator
    double lag1_autocorrelation;
    std::uint64_t checksum;  // FNV-1a 64 of the values, one per line
};

struct IngestResult {
    CountSeries series;
    SeriesSummary summary;
};

/**
 * Reads counts from a single-column CSV (optional header line) or from
 * whitespace/newline separated integers. Lines starting with '#' are
 * comments. Blank lines are allowed only at the end.
 *
 * @throws InputError with the offending line number.
 */
CountSeries parse_series(std::istream& in);

/// parse_series on a file plus its summary; requires T >= 3.
IngestResult ingest_series(const std::string& path);

SeriesSummary summarize(const CountSeries& series);

[[nodiscard]] std::string_view to_string(Command command) noexcept;
[[nodiscard]] std::string_view to_string(OutputFormat format) noexcept;
[[nodiscard]] OutputFormat resolved_format(const RunConfig& config) noexcept;

/// Executes an already-parsed configuration. Errors are reported on `err`
/// as a JSON record and mapped to the documented exit codes.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses the command line and runs it.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace psinar::cli
