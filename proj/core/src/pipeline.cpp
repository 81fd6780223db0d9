#include "lram/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <map>

#include "lram/dispersion.hpp"
#include "lram/homogenize.hpp"
#include "lram/io.hpp"
#include "lram/panel_tl.hpp"
#include "lram/rve.hpp"
#include "lram/topopt.hpp"

#ifndef LRAM_VERSION
#define LRAM_VERSION "unknown"
#endif

namespace lram {

namespace fs = std::filesystem;

namespace {

class Artifacts {
public:
    explicit Artifacts(fs::path root) : root_(std::move(root)) {}

    void write(const std::string& rel, const std::string& content) {
        io::write_file(root_ / rel, content);
        hashes_[rel] = io::sha256_hex(content);
    }
    const fs::path& root() const { return root_; }
    const std::map<std::string, std::string>& hashes() const { return hashes_; }

private:
    fs::path root_;
    std::map<std::string, std::string> hashes_;
};

std::string snapshot_name(int iter) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "phi/phi_%05d.txt", iter);
    return buf;
}

std::string summary_line(const char* key, double v) { return std::string(key) + " = " + io::fmt(v) + "\n"; }

struct Context {
    const PipelineConfig& cfg;
    const RunOptions& opts;
    Artifacts& out;
    StructuredGrid grid;
    std::optional<RveLayout> layout;
    std::vector<EffectiveMaterial> effective;  // one per viscosity

    void log(const std::string& s) const {
        if (opts.log) opts.log(s);
    }

    RveLayout& design() {
        if (layout) return *layout;
        fs::path src = cfg.phi_file;
        if (src.empty() && fs::exists(out.root() / "phi_final.txt")) src = out.root() / "phi_final.txt";
        if (src.empty()) throw Error(ErrorKind::StateError, "no design available: run optimize or set phi_file");
        RveLayout l = make_layout(grid, cfg.optimizer.frame_fraction);
        l.phi = io::parse_phi(grid, io::read_file(src));
        log("design read from " + src.string());
        layout = std::move(l);
        return *layout;
    }

    MaterialField field(double mu, bool viscous) {
        PhaseSet ps = cfg.phases;
        ps.soft.mu = mu;
        return material_field(grid, gauss_phases(design()), scale_phases(ps, {}), viscous);
    }

    const std::vector<EffectiveMaterial>& materials() {
        if (effective.empty()) {
            for (double mu : cfg.viscosities) {
                const fs::path p = out.root() / ("effective_" + viscosity_tag(mu) + ".txt");
                if (!fs::exists(p)) {
                    throw Error(ErrorKind::StateError, "missing " + p.string() + "; run the homogenize stage");
                }
                effective.push_back(parse_report(io::read_file(p)));
            }
        }
        return effective;
    }
};

void stage_optimize(Context& c) {
    const auto& cfg = c.cfg;
    int last_written = -1;
    const auto observer = [&](const LevelSetState& st, const DesignEvaluation& ev) {
        if (st.iteration % cfg.snapshot_every == 0) {
            c.out.write(snapshot_name(st.iteration), io::format_phi(c.grid, st.layout.phi));
            last_written = st.iteration;
        }
        char buf[160];
        std::snprintf(buf, sizeof buf, "iter %4d  Pi %.4e  f* %.2f Hz  f1 %.2f Hz", st.iteration, ev.cost.pi,
                      rad_to_hz(std::sqrt(ev.lambda_star)), rad_to_hz(std::sqrt(ev.lambda)));
        c.log(buf);
    };
    const OptimizationResult r = optimize(c.grid, cfg.phases, cfg.optimizer, observer);
    const auto& st = r.state;
    if (last_written != st.iteration) c.out.write(snapshot_name(st.iteration), io::format_phi(c.grid, st.layout.phi));
    c.out.write("iterations.csv", io::iteration_log_csv(st.history));
    c.out.write("phi_final.txt", io::format_phi(c.grid, st.layout.phi));

    std::string s = "# optimization summary\n";
    s += "iterations = " + std::to_string(st.iteration) + "\n";
    s += "stop_reason = " + st.stop_reason + "\n";
    s += std::string("stagnated = ") + (st.stagnated ? "true" : "false") + "\n";
    s += std::string("instability_warning = ") + (st.instability_warning ? "true" : "false") + "\n";
    s += summary_line("c1", r.c1);
    s += summary_line("Pi", r.final_eval.cost.pi);
    s += summary_line("restricted_first_relevant_Hz", rad_to_hz(std::sqrt(r.final_eval.lambda_star)));
    s += summary_line("unrestricted_first_relevant_Hz", rad_to_hz(std::sqrt(r.final_eval.lambda)));
    s += summary_line("vol_frac_dense", r.final_eval.volumes.dense);
    s += summary_line("vol_frac_soft", r.final_eval.volumes.soft);
    c.out.write("optimization.txt", s);
    if (st.instability_warning) c.log("warning: unstable design history detected");
    c.layout = st.layout;
}

void stage_homogenize(Context& c) {
    c.effective.clear();
    for (double mu : c.cfg.viscosities) {
        const EffectiveMaterial em = homogenize(c.grid, c.field(mu, true), c.cfg.inertial);
        c.out.write("effective_" + viscosity_tag(mu) + ".txt", format_report(em));
        c.log("homogenized mu = " + io::fmt(mu) + " Pa s: " + std::to_string(em.mode_count()) + " relevant modes");
        c.effective.push_back(em);
    }
}

void stage_dispersion(Context& c) {
    const auto& cfg = c.cfg;
    const auto& ems = c.materials();
    for (std::size_t i = 0; i < ems.size(); ++i) {
        const auto f = nudge_off_poles(cfg.frequencies_hz, ems[i]);
        c.out.write("dispersion_" + viscosity_tag(cfg.viscosities[i]) + ".csv",
                    dispersion_csv(effective_dispersion(ems[i], f, cfg.cell_size)));
    }
    // Undamped gaps do not depend on the viscosity.
    std::string g = "# source lower_Hz upper_Hz\n";
    for (const auto& gap : effective_bandgaps(ems.front())) {
        g += "effective " + io::fmt(gap.lower_hz) + " " + io::fmt(gap.upper_hz) + "\n";
    }
    if (cfg.bloch) {
        const BlochBranches b = bloch_oracle(c.grid, c.field(0.0, false), cfg.bloch_k, cfg.bloch_branches);
        c.out.write("bloch.csv", bloch_csv(b));
        if (auto bg = bloch_bandgap(b)) g += "bloch " + io::fmt(bg->lower_hz) + " " + io::fmt(bg->upper_hz) + "\n";
        c.log("bloch oracle done");
    }
    c.out.write("bandgaps.txt", g);
}

void stage_transmission(Context& c) {
    const auto& cfg = c.cfg;
    const auto& ems = c.materials();
    for (std::size_t i = 0; i < ems.size(); ++i) {
        PanelModel pm;
        pm.material = ems[i];
        pm.thickness = cfg.panel_thickness;
        pm.nx = cfg.macro_nx;
        pm.ny = cfg.macro_ny;
        pm.air = cfg.air;
        const TLResult r = tl_sweep(pm, nudge_off_poles(cfg.frequencies_hz, ems[i]));
        const std::string tag = viscosity_tag(cfg.viscosities[i]);
        c.out.write("tl_" + tag + ".csv", tl_csv(r));
        c.out.write("tl_band_" + tag + ".txt", band_report(first_band_above(r, cfg.tl_threshold_db), cfg.tl_threshold_db));
        for (const auto& s : r.samples) {
            if (!s.ok) c.log("warning: " + tag + " at " + io::fmt(s.f_hz) + " Hz: " + s.error);
        }
    }
}

std::string manifest(const PipelineConfig& cfg, const RunResult& r, const Artifacts& out) {
    std::string m = "# lram run manifest\n";
    m += std::string("status = ") + (r.ok ? "ok" : "failed") + "\n";
    if (!r.ok) {
        if (r.failed_stage) m += std::string("failed_stage = ") + to_string(*r.failed_stage) + "\n";
        m += "error = " + r.error + "\n";
    }
    m += std::string("version = ") + library_version() + "\n";
    m += "eigen = " + std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
         std::to_string(EIGEN_MINOR_VERSION) + "\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "wall_time_s = %.3f\n", r.wall_seconds);
    m += buf;
    m += "stages =";
    for (Stage s : cfg.stages) m += std::string(" ") + to_string(s);
    m += "\ncompleted =";
    for (Stage s : r.completed) m += std::string(" ") + to_string(s);
    m += std::string("\ndeterministic = ") + (cfg.deterministic ? "true" : "false") + "\n";
    m += "\n[files]\n";
    for (const auto& [name, hash] : out.hashes()) m += hash + "  " + name + "\n";
    m += "\n[config]\n" + cfg.text;
    if (!cfg.text.empty() && cfg.text.back() != '\n') m += '\n';
    return m;
}

}  // namespace

std::string viscosity_tag(double mu) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "mu%g", mu);
    return buf;
}

const char* library_version() { return LRAM_VERSION; }

RunResult run_pipeline(const PipelineConfig& cfg, const RunOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    RunResult res;
    Artifacts out(cfg.out_dir);
    Context c{cfg, opts, out, build_grid(cfg.nx, cfg.ny, cfg.cell_size), std::nullopt, {}};
    for (Stage s : cfg.stages) {
        c.log(std::string("stage ") + to_string(s));
        try {
            switch (s) {
                case Stage::Optimize: stage_optimize(c); break;
                case Stage::Homogenize: stage_homogenize(c); break;
                case Stage::Dispersion: stage_dispersion(c); break;
                case Stage::Transmission: stage_transmission(c); break;
            }
            res.completed.push_back(s);
        } catch (const Error& e) {
            res.ok = false;
            res.error_kind = e.kind();
            res.error = e.what();
        } catch (const std::exception& e) {
            res.ok = false;
            res.error_kind = ErrorKind::SolverFailure;
            res.error = e.what();
        }
        if (!res.ok) {
            res.failed_stage = s;
            c.log(std::string("stage ") + to_string(s) + " failed: " + res.error);
            break;
        }
    }
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const auto& [name, hash] : out.hashes()) res.files.push_back(name);
    io::write_file(cfg.out_dir / "manifest.txt", manifest(cfg, res, out));
    return res;
}

}  // namespace lram
