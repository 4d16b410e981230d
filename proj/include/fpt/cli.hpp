#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fpt/montecarlo.hpp"
#include "fpt/quadrature.hpp"

namespace fpt::cli {

enum class Command { density, cdf, bridge_expectation, residual_report, cross_validate };
enum class Format { csv, json };

std::string to_string(Command c);

/// Exit codes of the fpt tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitBoundary = 3;
inline constexpr int kExitNonconvergent = 4;
inline constexpr int kExitNumeric = 5;

/// Uniform grid: `count` points from start to stop (start == stop when count == 1).
struct GridSpec {
    double start = 1.0;
    double stop = 1.0;
    long long count = 1;

    std::vector<double> values() const;
};

struct RunConfig {
    std::string boundary;
    /// Run cross-validate over the built-in boundary corpus instead of `boundary`.
    bool corpus = false;
    GridSpec grid;
    QuadratureSpec quadrature;
    McParams mc;
    std::optional<std::uint64_t> seed;
    std::string out;  ///< empty writes to stdout
    Format format = Format::csv;
    /// auto: v = 1 when f'' ≡ 0, otherwise the ε-limit. limit: always the ε-limit.
    VPolicy v_policy = VPolicy::exact_when_linear;

    /// Throws ConfigError.
    void validate(Command c) const;
};

/// Overlay the keys of a JSON config document onto `cfg`. Throws ConfigError.
void apply_json(RunConfig& cfg, const std::string& json_text);

/// Boundaries used by the validation suite and `cross-validate --corpus`.
const std::vector<std::string>& boundary_corpus();

struct CommandOutput {
    std::string content;  ///< file payload (CSV or JSON)
    std::string summary;  ///< human-readable text
    int exit_code = kExitOk;
};

/// Runs a command with a validated config. Library errors propagate.
CommandOutput run_command(Command c, const RunConfig& cfg);

/// Maps an exception to the exit-code contract.
int exit_code_for(const std::exception& e);

/// Full command-line entry point: parses args (args[0] is the program name),
/// runs, writes outputs and returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fpt::cli
