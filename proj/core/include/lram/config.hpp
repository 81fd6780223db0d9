#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lram/homogenize.hpp"
#include "lram/materials.hpp"
#include "lram/panel_tl.hpp"
#include "lram/rve.hpp"
#include "lram/topopt.hpp"

namespace lram {

enum class Stage { Optimize, Homogenize, Dispersion, Transmission };
const char* to_string(Stage s);
// Accepts "optimize", "homogenize", "dispersion", "transmission".
bool parse_stage(const std::string& name, Stage& out);
std::vector<Stage> all_stages();

enum class Severity { Note, Warning, Error };

struct Diagnostic {
    Severity severity = Severity::Error;
    std::string source;
    int line = 0;  // 0 when not tied to a line
    std::string message;

    std::string str() const;
};

bool has_errors(const std::vector<Diagnostic>& d);

struct PipelineConfig {
    std::string source;  // config path, for messages
    std::string text;    // raw config, echoed into the manifest

    // [materials]
    std::filesystem::path material_card;  // empty: built-in table
    std::string frame_name = "epoxy";
    std::string dense_name = "steel";
    std::string soft_name = "silicone_rubber";
    PhaseSet phases;  // resolved from the names

    // [grid]
    int nx = 60;
    int ny = 60;
    double cell_size = 0.01;  // m

    // [optimization]
    OptimizerSettings optimizer;

    // [homogenization]
    std::vector<double> viscosities{0.0, 10.0};  // Pa*s, applied to the soft phase
    InertialOptions inertial;
    std::filesystem::path phi_file;  // design used when optimize is not run

    // [frequencies]
    std::vector<double> frequencies_hz;

    // [dispersion]
    bool bloch = true;
    std::vector<double> bloch_k{0.0, 0.002, 0.01, 0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0};
    int bloch_branches = 8;

    // [transmission]
    double panel_thickness = 0.01;
    int macro_nx = 4;
    int macro_ny = 4;
    AirProperties air;
    double tl_threshold_db = 40.0;

    // [output]
    std::filesystem::path out_dir = "lram_out";
    int snapshot_every = 10;
    std::vector<Stage> stages = all_stages();
    bool deterministic = true;  // informational, nothing here is random

    bool runs(Stage s) const;
};

struct ConfigResult {
    PipelineConfig config;
    std::vector<Diagnostic> diagnostics;
    bool ok() const { return !has_errors(diagnostics); }
};

// Relative paths in the config resolve against `base_dir`.
ConfigResult parse_config(const std::string& text, const std::string& source,
                          const std::filesystem::path& base_dir = {});
ConfigResult load_config(const std::filesystem::path& path);

// "name=steel rho=7900 K=1.67e11 G=7.69e10 mu=0" per line, '#' comments.
MaterialRegistry parse_material_card(const std::string& text, const std::string& source,
                                     std::vector<Diagnostic>& diagnostics);

// Physics-level checks on a parsed config: target feasibility and the
// instability note. Never throws.
std::vector<Diagnostic> validate(const PipelineConfig& config);

}  // namespace lram
