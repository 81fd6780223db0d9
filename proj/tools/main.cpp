#include <algorithm>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lram/config.hpp"
#include "lram/pipeline.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kNumericFailure = 2;

struct Args {
    std::string config;
    std::string out;
    std::vector<std::string> stages;
    int snapshot_every = 0;
    bool quiet = false;
};

void print(const std::vector<lram::Diagnostic>& d) {
    for (const auto& x : d) std::cerr << x.str() << '\n';
}

// Parses, applies command-line overrides and validates. Returns false on errors.
bool load(const Args& a, lram::PipelineConfig& cfg, std::vector<lram::Diagnostic>& diags) {
    auto r = lram::load_config(a.config);
    diags = r.diagnostics;
    cfg = std::move(r.config);
    if (!a.out.empty()) cfg.out_dir = a.out;
    if (a.snapshot_every > 0) cfg.snapshot_every = a.snapshot_every;
    if (!a.stages.empty()) {
        std::vector<lram::Stage> st;
        for (const auto& s : a.stages) {
            lram::Stage v;
            if (!lram::parse_stage(s, v)) {
                diags.push_back({lram::Severity::Error, "--stage", 0, "unknown stage '" + s + "'"});
                return false;
            }
            st.push_back(v);
        }
        std::sort(st.begin(), st.end());
        st.erase(std::unique(st.begin(), st.end()), st.end());
        if (static_cast<int>(st.back()) - static_cast<int>(st.front()) + 1 != static_cast<int>(st.size())) {
            diags.push_back({lram::Severity::Error, "--stage", 0, "stages must be contiguous in pipeline order"});
            return false;
        }
        cfg.stages = st;
        if (!cfg.runs(lram::Stage::Optimize) && cfg.runs(lram::Stage::Homogenize) && cfg.phi_file.empty()) {
            diags.push_back({lram::Severity::Error, "--stage", 0,
                             "homogenize without optimize needs [homogenization] phi_file"});
        }
    }
    if (lram::has_errors(diags)) return false;
    const auto v = lram::validate(cfg);
    diags.insert(diags.end(), v.begin(), v.end());
    return !lram::has_errors(diags);
}

int run(const Args& a, const std::vector<std::string>& forced_stages) {
    Args args = a;
    if (!forced_stages.empty()) args.stages = forced_stages;
    lram::PipelineConfig cfg;
    std::vector<lram::Diagnostic> diags;
    const bool ok = load(args, cfg, diags);
    print(diags);
    if (!ok) return kConfigError;
    lram::RunOptions opts;
    if (!a.quiet) opts.log = [](const std::string& s) { std::cerr << s << '\n'; };
    const auto res = lram::run_pipeline(cfg, opts);
    if (!res.ok) {
        std::cerr << "error: " << res.error << '\n';
        return kNumericFailure;
    }
    std::cout << "wrote " << res.files.size() + 1 << " files to " << cfg.out_dir.string() << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Design and analysis of locally resonant acoustic metamaterial cells"};
    app.require_subcommand(1);
    Args a;

    auto add_common = [&](CLI::App* sub, bool stages) {
        sub->add_option("--config", a.config, "Configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", a.out, "Output directory (overrides [output] dir)");
        sub->add_option("--snapshot-every", a.snapshot_every, "Level-set snapshot cadence")
            ->check(CLI::PositiveNumber);
        sub->add_flag("-q,--quiet", a.quiet, "No progress output");
        if (stages) {
            sub->add_option("--stage", a.stages, "Stages to run (optimize, homogenize, dispersion, transmission)")
                ->delimiter(',');
        }
    };

    auto* validate = app.add_subcommand("validate", "Check a configuration and report diagnostics");
    validate->add_option("--config", a.config, "Configuration file")->required()->check(CLI::ExistingFile);
    auto* pipeline = app.add_subcommand("pipeline", "Run the configured stages");
    add_common(pipeline, true);
    std::vector<std::pair<CLI::App*, std::string>> single;
    for (const char* name : {"optimize", "homogenize", "dispersion", "transmission"}) {
        auto* sub = app.add_subcommand(name, std::string("Run only the ") + name + " stage");
        add_common(sub, false);
        single.emplace_back(sub, name);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    if (validate->parsed()) {
        lram::PipelineConfig cfg;
        std::vector<lram::Diagnostic> diags;
        const bool ok = load(a, cfg, diags);
        print(diags);
        std::cout << (ok ? "config ok" : "config has errors") << '\n';
        return ok ? kOk : kConfigError;
    }
    if (pipeline->parsed()) return run(a, {});
    for (const auto& [sub, name] : single) {
        if (sub->parsed()) return run(a, {name});
    }
    return kConfigError;
}
