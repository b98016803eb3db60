#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "viewcal/spec_file.hpp"

namespace viewcal {

struct RunOptions {
    std::filesystem::path out_dir = ".";
    std::optional<std::uint64_t> seed;     ///< overrides solver and task seeds
    std::optional<std::size_t> samples;    ///< overrides var task sample counts
};

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitNotConverged = 2, kExitValidation = 3 };

struct RunResult {
    int exit_code = kExitOk;
    std::map<std::string, std::string> files;  ///< file name -> content, as committed
    std::string message;
};

/// Executes the spec's tasks in order. Reports are staged in memory and
/// committed only on success, or (calibration.json alone) on NotConverged.
RunResult run(const RunSpec& spec, const RunOptions& options, std::ostream& log);

/// Loads, validates and runs a spec file; validation failures return exit 3
/// without touching the output directory.
RunResult run_spec_file(const std::filesystem::path& spec_path, const RunOptions& options, std::ostream& log);

/// Locale-independent shortest round-trip form with at most 17 significant digits.
std::string format_number(double v);

/// Writes `content` to `dir/name` through a temporary file and rename.
void write_atomic(const std::filesystem::path& dir, const std::string& name, const std::string& content);

}  // namespace viewcal
