#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lram/config.hpp"
#include "lram/errors.hpp"

namespace lram {

struct RunOptions {
    // Progress lines; nothing is printed when empty.
    std::function<void(const std::string&)> log;
};

struct RunResult {
    bool ok = true;
    std::optional<ErrorKind> error_kind;
    std::string error;
    std::optional<Stage> failed_stage;
    std::vector<Stage> completed;
    std::vector<std::string> files;  // relative to the output dir, manifest excluded
    double wall_seconds = 0.0;
};

// Runs the configured stages in order and writes artifacts plus manifest.txt
// into config.out_dir. Numerical failures do not throw: the result and the
// manifest carry them, and everything written before the failure stays.
RunResult run_pipeline(const PipelineConfig& config, const RunOptions& options = {});

// File-name tag for a viscosity value, e.g. "mu0", "mu0.5".
std::string viscosity_tag(double mu);

const char* library_version();

}  // namespace lram
