#include "lram/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "lram/errors.hpp"
#include "lram/io.hpp"

namespace lram {

namespace {

std::string trim(std::string_view s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string_view::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return std::string(s.substr(a, b - a + 1));
}

std::string strip_comment(const std::string& line) {
    const auto p = line.find_first_of("#;");
    return p == std::string::npos ? line : line.substr(0, p);
}

bool to_double(const std::string& s, double& out) {
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e && std::isfinite(out);
}

bool to_int(const std::string& s, int& out) {
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e;
}

bool to_bool(const std::string& s, bool& out) {
    if (s == "true" || s == "yes" || s == "on" || s == "1") return out = true, true;
    if (s == "false" || s == "no" || s == "off" || s == "0") return out = false, true;
    return false;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

struct Entry {
    std::string value;
    int line = 0;
};

struct Parser {
    std::string source;
    std::vector<Diagnostic>& diags;

    void error(int line, const std::string& msg) { diags.push_back({Severity::Error, source, line, msg}); }
    void warn(int line, const std::string& msg) { diags.push_back({Severity::Warning, source, line, msg}); }

    bool number(const Entry& e, const std::string& key, double& out, bool positive = false) {
        double v;
        if (!to_double(e.value, v)) {
            error(e.line, key + ": expected a number, got '" + e.value + "'");
            return false;
        }
        if (positive && !(v > 0.0)) {
            error(e.line, key + " must be positive");
            return false;
        }
        out = v;
        return true;
    }

    bool integer(const Entry& e, const std::string& key, int& out, int min_value) {
        int v;
        if (!to_int(e.value, v)) {
            error(e.line, key + ": expected an integer, got '" + e.value + "'");
            return false;
        }
        if (v < min_value) {
            error(e.line, key + " must be at least " + std::to_string(min_value));
            return false;
        }
        out = v;
        return true;
    }

    bool number_list(const Entry& e, const std::string& key, std::vector<double>& out, bool nonneg) {
        std::vector<double> v;
        for (const auto& tok : split_list(e.value)) {
            double x;
            if (!to_double(tok, x)) {
                error(e.line, key + ": '" + tok + "' is not a number");
                return false;
            }
            if (nonneg && x < 0.0) {
                error(e.line, key + ": values must be non-negative");
                return false;
            }
            v.push_back(x);
        }
        out = std::move(v);
        return true;
    }
};

using Section = std::map<std::string, Entry>;

}  // namespace

const char* to_string(Stage s) {
    switch (s) {
        case Stage::Optimize: return "optimize";
        case Stage::Homogenize: return "homogenize";
        case Stage::Dispersion: return "dispersion";
        case Stage::Transmission: return "transmission";
    }
    return "?";
}

bool parse_stage(const std::string& name, Stage& out) {
    for (Stage s : all_stages()) {
        if (name == to_string(s)) {
            out = s;
            return true;
        }
    }
    return false;
}

std::vector<Stage> all_stages() {
    return {Stage::Optimize, Stage::Homogenize, Stage::Dispersion, Stage::Transmission};
}

std::string Diagnostic::str() const {
    const char* sev = severity == Severity::Error ? "error" : severity == Severity::Warning ? "warning" : "note";
    std::string out = source.empty() ? std::string("config") : source;
    if (line > 0) out += ":" + std::to_string(line);
    return out + ": " + sev + ": " + message;
}

bool has_errors(const std::vector<Diagnostic>& d) {
    return std::any_of(d.begin(), d.end(), [](const Diagnostic& x) { return x.severity == Severity::Error; });
}

bool PipelineConfig::runs(Stage s) const { return std::find(stages.begin(), stages.end(), s) != stages.end(); }

MaterialRegistry parse_material_card(const std::string& text, const std::string& source,
                                     std::vector<Diagnostic>& diagnostics) {
    Parser p{source, diagnostics};
    MaterialRegistry reg;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string body = trim(strip_comment(raw));
        if (body.empty()) continue;
        MaterialPhase m;
        bool have[5] = {false, false, false, false, false};
        bool bad = false;
        for (const auto& tok : split_list(body)) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos) {
                p.error(line, "material field '" + tok + "' is not key=value");
                bad = true;
                break;
            }
            const std::string k = tok.substr(0, eq), v = tok.substr(eq + 1);
            static const char* keys[5] = {"name", "rho", "K", "G", "mu"};
            const int idx = static_cast<int>(std::find(keys, keys + 5, k) - keys);
            if (idx == 5) {
                p.error(line, "unknown material field '" + k + "'");
                bad = true;
                break;
            }
            have[idx] = true;
            if (idx == 0) {
                m.name = v;
                continue;
            }
            double x;
            if (!to_double(v, x)) {
                p.error(line, std::string(keys[idx]) + ": '" + v + "' is not a number");
                bad = true;
                break;
            }
            (idx == 1 ? m.rho : idx == 2 ? m.bulk : idx == 3 ? m.shear : m.mu) = x;
        }
        if (bad) continue;
        if (!have[0] || !have[1] || !have[2] || !have[3]) {
            p.error(line, "material card needs name, rho, K and G");
            continue;
        }
        if (reg.find(m.name)) {
            p.error(line, "material '" + m.name + "' defined twice");
            continue;
        }
        try {
            reg.add(m);
        } catch (const Error& e) {
            p.error(line, e.what());
        }
    }
    return reg;
}

ConfigResult parse_config(const std::string& text, const std::string& source,
                          const std::filesystem::path& base_dir) {
    ConfigResult res;
    auto& cfg = res.config;
    cfg.source = source;
    cfg.text = text;
    Parser p{source, res.diagnostics};

    static const std::map<std::string, std::vector<std::string>> schema = {
        {"materials", {"card", "frame", "dense", "soft"}},
        {"grid", {"nx", "ny", "cell_size"}},
        {"optimization",
         {"target_hz", "alpha", "dt", "c1", "max_iters", "delta_tol", "stop_tol", "frame_fraction", "mode_count",
          "frame_stiffness_scale", "soft_density_scale", "interp_exponent", "rigid_frame"}},
        {"homogenization", {"viscosities", "cutoff_hz", "phi_file"}},
        {"frequencies", {"min_hz", "max_hz", "count", "list_hz"}},
        {"dispersion", {"bloch", "bloch_k", "bloch_branches"}},
        {"transmission", {"thickness", "macro_nx", "macro_ny", "air_rho", "air_speed", "threshold_db"}},
        {"output", {"dir", "snapshot_every", "stages", "deterministic"}},
    };

    std::map<std::string, Section> sections;
    std::istringstream in(text);
    std::string raw, current;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string body = trim(strip_comment(raw));
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']') {
                p.error(line, "malformed section header");
                continue;
            }
            current = trim(body.substr(1, body.size() - 2));
            if (!schema.count(current)) {
                p.error(line, "unknown section [" + current + "]");
                current = "?";
            }
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            p.error(line, "expected key = value");
            continue;
        }
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (current.empty()) {
            p.error(line, "'" + key + "' appears before any section");
            continue;
        }
        if (current == "?") continue;
        const auto& allowed = schema.at(current);
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            p.error(line, "unknown key '" + key + "' in [" + current + "]");
            continue;
        }
        auto& sec = sections[current];
        if (sec.count(key)) {
            p.error(line, "duplicate key '" + key + "' (first on line " + std::to_string(sec[key].line) + ")");
            continue;
        }
        sec[key] = {value, line};
    }

    auto get = [&](const std::string& s, const std::string& k) -> const Entry* {
        auto it = sections.find(s);
        if (it == sections.end()) return nullptr;
        auto jt = it->second.find(k);
        return jt == it->second.end() ? nullptr : &jt->second;
    };
    auto resolve = [&](const std::string& v) {
        std::filesystem::path path(v);
        return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
    };

    // materials
    MaterialRegistry reg = MaterialRegistry::builtin();
    int card_line = 0;
    bool card_missing = false;
    if (const Entry* e = get("materials", "card")) {
        card_line = e->line;
        cfg.material_card = resolve(e->value);
        if (!std::filesystem::exists(cfg.material_card)) {
            p.error(e->line, "material card not found: " + cfg.material_card.string());
            card_missing = true;
        } else {
            std::vector<Diagnostic> card_diags;
            reg = parse_material_card(io::read_file(cfg.material_card), cfg.material_card.string(), card_diags);
            res.diagnostics.insert(res.diagnostics.end(), card_diags.begin(), card_diags.end());
        }
    }
    for (auto [key, name, slot] : {std::tuple{"frame", &cfg.frame_name, &cfg.phases.frame},
                                   std::tuple{"dense", &cfg.dense_name, &cfg.phases.dense},
                                   std::tuple{"soft", &cfg.soft_name, &cfg.phases.soft}}) {
        const Entry* e = get("materials", key);
        if (e) *name = e->value;
        if (auto m = reg.find(*name)) {
            *slot = *m;
        } else if (!card_missing) {
            p.error(e ? e->line : card_line, std::string(key) + " material '" + *name + "' is not defined" +
                                                 (cfg.material_card.empty() ? std::string()
                                                                            : " in " + cfg.material_card.string()));
        }
    }

    // grid
    if (const Entry* e = get("grid", "nx")) p.integer(*e, "nx", cfg.nx, 2);
    if (const Entry* e = get("grid", "ny")) p.integer(*e, "ny", cfg.ny, 2);
    if (const Entry* e = get("grid", "cell_size")) p.number(*e, "cell_size", cfg.cell_size, true);

    // optimization
    auto& o = cfg.optimizer;
    if (const Entry* e = get("optimization", "target_hz")) p.number(*e, "target_hz", o.target_hz, true);
    if (const Entry* e = get("optimization", "alpha")) {
        double a;
        if (p.number(*e, "alpha", a)) {
            if (a < 0.0 || a > 1.0) p.error(e->line, "alpha must lie in [0, 1], got " + e->value);
            else o.alpha = a;
        }
    }
    if (const Entry* e = get("optimization", "dt")) p.number(*e, "dt", o.dt, true);
    if (const Entry* e = get("optimization", "c1")) {
        if (e->value != "auto") {
            double c;
            if (p.number(*e, "c1", c, true)) o.c1 = c;
        }
    }
    if (const Entry* e = get("optimization", "max_iters")) p.integer(*e, "max_iters", o.max_iters, 0);
    if (const Entry* e = get("optimization", "delta_tol")) p.number(*e, "delta_tol", o.delta_tol, true);
    if (const Entry* e = get("optimization", "stop_tol")) p.number(*e, "stop_tol", o.stop_tol, true);
    if (const Entry* e = get("optimization", "frame_fraction")) {
        if (p.number(*e, "frame_fraction", o.frame_fraction, true) && o.frame_fraction >= 0.5) {
            p.error(e->line, "frame_fraction must be below 0.5");
        }
    }
    if (const Entry* e = get("optimization", "mode_count")) p.integer(*e, "mode_count", o.mode_count, 1);
    if (const Entry* e = get("optimization", "frame_stiffness_scale")) {
        p.number(*e, "frame_stiffness_scale", o.scaling.frame_stiffness, true);
    }
    if (const Entry* e = get("optimization", "soft_density_scale")) {
        p.number(*e, "soft_density_scale", o.scaling.soft_density, true);
    }
    if (const Entry* e = get("optimization", "interp_exponent")) {
        p.number(*e, "interp_exponent", o.interp_exponent, true);
    }
    if (const Entry* e = get("optimization", "rigid_frame")) {
        if (!to_bool(e->value, o.rigid_frame)) p.error(e->line, "rigid_frame: expected true or false");
    }

    // homogenization
    if (const Entry* e = get("homogenization", "viscosities")) {
        if (p.number_list(*e, "viscosities", cfg.viscosities, true) && cfg.viscosities.empty()) {
            p.error(e->line, "viscosities: list is empty");
        }
    }
    if (const Entry* e = get("homogenization", "cutoff_hz")) {
        p.number(*e, "cutoff_hz", cfg.inertial.cutoff_hz, true);
    }
    if (const Entry* e = get("homogenization", "phi_file")) cfg.phi_file = resolve(e->value);
    cfg.inertial.delta_tol = o.delta_tol;

    // frequencies
    if (const Entry* e = get("frequencies", "list_hz")) {
        if (get("frequencies", "count") || get("frequencies", "min_hz") || get("frequencies", "max_hz")) {
            p.error(e->line, "list_hz cannot be combined with min_hz/max_hz/count");
        }
        std::vector<double> f;
        if (p.number_list(*e, "list_hz", f, false)) {
            if (f.empty()) p.error(e->line, "frequency list is empty");
            for (double v : f) {
                if (!(v > 0.0)) {
                    p.error(e->line, "frequencies must be positive");
                    break;
                }
            }
            cfg.frequencies_hz = f;
        }
    } else {
        double fmin = 5.0, fmax = 3000.0;
        int count = 600;
        int line_no = 0;
        if (const Entry* e = get("frequencies", "min_hz")) p.number(*e, "min_hz", fmin, true), line_no = e->line;
        if (const Entry* e = get("frequencies", "max_hz")) p.number(*e, "max_hz", fmax, true), line_no = e->line;
        const Entry* ce = get("frequencies", "count");
        bool count_ok = true;
        if (ce) count_ok = p.integer(*ce, "count", count, 0);
        if (count_ok && count == 0) {
            p.error(ce->line, "frequency list is empty (count = 0)");
        } else if (fmax < fmin) {
            p.error(line_no, "max_hz is below min_hz");
        } else if (count_ok) {
            cfg.frequencies_hz.resize(count);
            for (int i = 0; i < count; ++i) {
                cfg.frequencies_hz[i] = count == 1 ? fmin : fmin + (fmax - fmin) * i / (count - 1);
            }
        }
    }

    // dispersion
    if (const Entry* e = get("dispersion", "bloch")) {
        if (!to_bool(e->value, cfg.bloch)) p.error(e->line, "bloch: expected true or false");
    }
    if (const Entry* e = get("dispersion", "bloch_k")) {
        if (p.number_list(*e, "bloch_k", cfg.bloch_k, true)) {
            if (cfg.bloch_k.empty()) p.error(e->line, "bloch_k: list is empty");
            for (double k : cfg.bloch_k) {
                if (k > 1.0) {
                    p.error(e->line, "bloch_k values are k l / pi and must lie in [0, 1]");
                    break;
                }
            }
        }
    }
    if (const Entry* e = get("dispersion", "bloch_branches")) p.integer(*e, "bloch_branches", cfg.bloch_branches, 1);

    // transmission
    if (const Entry* e = get("transmission", "thickness")) p.number(*e, "thickness", cfg.panel_thickness, true);
    if (const Entry* e = get("transmission", "macro_nx")) p.integer(*e, "macro_nx", cfg.macro_nx, 2);
    if (const Entry* e = get("transmission", "macro_ny")) p.integer(*e, "macro_ny", cfg.macro_ny, 2);
    if (const Entry* e = get("transmission", "air_rho")) p.number(*e, "air_rho", cfg.air.rho, true);
    if (const Entry* e = get("transmission", "air_speed")) p.number(*e, "air_speed", cfg.air.speed, true);
    if (const Entry* e = get("transmission", "threshold_db")) p.number(*e, "threshold_db", cfg.tl_threshold_db);

    // output
    if (const Entry* e = get("output", "dir")) {
        if (e->value.empty()) p.error(e->line, "output dir is empty");
        else cfg.out_dir = resolve(e->value);
    }
    if (const Entry* e = get("output", "snapshot_every")) p.integer(*e, "snapshot_every", cfg.snapshot_every, 1);
    if (const Entry* e = get("output", "deterministic")) {
        if (!to_bool(e->value, cfg.deterministic)) p.error(e->line, "deterministic: expected true or false");
    }
    if (const Entry* e = get("output", "stages")) {
        std::vector<Stage> st;
        bool ok = true;
        for (const auto& tok : split_list(e->value)) {
            Stage s;
            if (!parse_stage(tok, s)) {
                p.error(e->line, "unknown stage '" + tok + "'");
                ok = false;
            } else {
                st.push_back(s);
            }
        }
        if (ok) {
            std::sort(st.begin(), st.end());
            st.erase(std::unique(st.begin(), st.end()), st.end());
            if (st.empty()) {
                p.error(e->line, "stage list is empty");
            } else if (static_cast<int>(st.back()) - static_cast<int>(st.front()) + 1 != static_cast<int>(st.size())) {
                p.error(e->line, "stages must be a contiguous run of optimize, homogenize, dispersion, transmission");
            } else {
                cfg.stages = st;
            }
        }
    }
    if (!cfg.runs(Stage::Optimize) && cfg.runs(Stage::Homogenize) && cfg.phi_file.empty()) {
        const Entry* e = get("output", "stages");
        p.error(e ? e->line : 0, "homogenize without optimize needs [homogenization] phi_file");
    }
    return res;
}

ConfigResult load_config(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        ConfigResult r;
        r.diagnostics.push_back({Severity::Error, path.string(), 0, "config file not found"});
        return r;
    }
    return parse_config(io::read_file(path), path.string(), path.parent_path());
}

std::vector<Diagnostic> validate(const PipelineConfig& cfg) {
    std::vector<Diagnostic> out;
    auto add = [&](Severity s, const std::string& m) { out.push_back({s, cfg.source, 0, m}); };
    try {
        const double limit_hz = rad_to_hz(feasibility_lower_limit(
            {cfg.phases.frame, cfg.phases.dense, cfg.phases.soft}, cfg.cell_size));
        char buf[256];
        if (cfg.optimizer.target_hz < limit_hz) {
            std::snprintf(buf, sizeof buf,
                          "target %.6g Hz is below the feasibility lower limit of %.4g Hz for this cell; "
                          "the optimizer will refuse it",
                          cfg.optimizer.target_hz, limit_hz);
            add(Severity::Warning, buf);
        } else {
            std::snprintf(buf, sizeof buf, "feasibility lower limit %.4g Hz, target %.6g Hz", limit_hz,
                          cfg.optimizer.target_hz);
            add(Severity::Note, buf);
        }
    } catch (const Error& e) {
        add(Severity::Error, e.what());
    }
    if (cfg.runs(Stage::Optimize)) {
        add(Severity::Note,
            "targets close to the feasibility limit can drive the optimizer into unstable designs; watch for "
            "the instability warning (first resonance jumping by a decade and back)");
    }
    if (!cfg.phi_file.empty() && !cfg.runs(Stage::Optimize) && !std::filesystem::exists(cfg.phi_file)) {
        add(Severity::Error, "phi_file not found: " + cfg.phi_file.string());
    }
    return out;
}

}  // namespace lram
