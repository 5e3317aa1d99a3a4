#pragma once

#include "fdiff/coefficients.hpp"
#include "fdiff/eidf.hpp"
#include "fdiff/mc.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fdiff {

enum class Mode { Coeffs, Series, Dio, Mc, Tgk, Report };

std::optional<Mode> parse_mode(const std::string& text);
std::string mode_name(Mode m);

struct RunConfig {
    // Empty until set by the file or a command-line override.
    std::optional<Mode> mode;
    double v = 1.0;
    double dcoeff = 1.0;
    // Sweep over xi (or built from the focusing-length list).
    std::vector<double> xi;
    CoefficientOptions coefficients;
    std::vector<double> series_grid = default_series_grid();
    int series_terms = 3;
    int ntz_max = 7;
    int dio_max_weight = 4;
    // Catalog script names; empty together with no custom steps means the whole catalog.
    std::vector<std::string> dio_scripts;
    std::vector<DioStep> dio_steps;
    SimConfig mc;
    std::filesystem::path out_dir = ".";
};

// Schema documented in the README. Throws ConfigError.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

struct Overrides {
    std::optional<Mode> mode;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out_dir;
    std::optional<int> threads;
};

void apply_overrides(RunConfig& config, const Overrides& overrides);

// Runs the configured mode, writes its artifacts and prints one summary line per output to `log`.
// Returns 0 on success, 1 for configuration errors, 2 for numerical failures, 3 for invariant violations.
int run(const RunConfig& config, std::ostream& log, std::ostream& err);
int run(const std::filesystem::path& config_path, const Overrides& overrides, std::ostream& log, std::ostream& err);

using Series = std::vector<std::pair<double, double>>;

// Two whitespace-separated columns, 17 significant digits. Throws ConfigError on an empty series
// (no file is written) and std::runtime_error on I/O failure.
void emit_plotdata(const Series& series, const std::filesystem::path& path);

// Round-trip-exact decimal representation.
std::string format_double(double x);

}  // namespace fdiff
