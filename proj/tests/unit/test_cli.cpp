#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "lram/config.hpp"
#include "lram/errors.hpp"
#include "lram/io.hpp"
#include "lram/pipeline.hpp"
#include "lram/rve.hpp"

using namespace lram;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("lram_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

bool mentions(const std::vector<Diagnostic>& d, Severity s, const std::string& needle, int line = -1) {
    for (const auto& x : d) {
        if (x.severity == s && x.message.find(needle) != std::string::npos && (line < 0 || x.line == line))
            return true;
    }
    return false;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(LRAM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

// Steel disc in rubber inside the frame, 16x16 elements.
std::string resonator_phi(const StructuredGrid& g) {
    Vec phi(g.node_count());
    for (int j = 0; j <= g.ny; ++j) {
        for (int i = 0; i <= g.nx; ++i) {
            const double x = i - g.nx / 2.0, y = j - g.ny / 2.0;
            phi(g.node(i, j)) = 4.5 - std::sqrt(x * x + y * y);
        }
    }
    return io::format_phi(g, phi);
}

std::map<std::string, std::string> manifest_hashes(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    bool files = false;
    while (std::getline(in, line)) {
        if (line.rfind("[", 0) == 0) {
            files = line == "[files]";
            continue;
        }
        if (!files || line.empty()) continue;
        const auto sep = line.find("  ");
        out[line.substr(sep + 2)] = line.substr(0, sep);
    }
    return out;
}

}  // namespace

TEST(Config, ShippedConfigsParse) {
    for (const char* name : {"default.ini", "quick.ini"}) {
        const auto r = load_config(fs::path(LRAM_SOURCE_DIR) / "configs" / name);
        EXPECT_TRUE(r.ok()) << name;
        EXPECT_FALSE(has_errors(validate(r.config))) << name;
    }
    const auto d = load_config(fs::path(LRAM_SOURCE_DIR) / "configs" / "default.ini").config;
    EXPECT_EQ(d.nx, 60);
    EXPECT_EQ(d.phases.dense.rho, 7780.0);
    EXPECT_EQ(d.frequencies_hz.size(), 600u);
}

TEST(Config, AlphaOutOfRangeReportsLine) {
    const auto r = parse_config("[optimization]\ntarget_hz = 1000\nalpha = 1.5\n", "bad.ini");
    EXPECT_FALSE(r.ok());
    EXPECT_TRUE(mentions(r.diagnostics, Severity::Error, "alpha must lie in [0, 1]", 3));
    bool formatted = false;
    for (const auto& d : r.diagnostics) formatted |= d.str().rfind("bad.ini:3: error:", 0) == 0;
    EXPECT_TRUE(formatted);
}

TEST(Config, MissingMaterialCardNamesPath) {
    const auto r = parse_config("[materials]\ncard = nowhere/cards.txt\n", "m.ini", "/tmp/lram_cfg");
    EXPECT_FALSE(r.ok());
    EXPECT_TRUE(mentions(r.diagnostics, Severity::Error, "/tmp/lram_cfg/nowhere/cards.txt"));
}

TEST(Config, InfeasibleTargetWarns) {
    const auto r = parse_config("[optimization]\ntarget_hz = 50\n", "low.ini");
    ASSERT_TRUE(r.ok());
    const auto v = validate(r.config);
    EXPECT_FALSE(has_errors(v));
    EXPECT_TRUE(mentions(v, Severity::Warning, "below the feasibility lower limit of 14"));
}

TEST(Config, EmptyFrequencyListFailsBeforeAnyOutput) {
    const fs::path dir = scratch("empty_freq");
    const fs::path out = dir / "out";
    std::ofstream(dir / "c.ini") << "[frequencies]\nlist_hz =\n[output]\ndir = " << out.string() << "\n";
    const auto r = load_config(dir / "c.ini");
    EXPECT_TRUE(mentions(r.diagnostics, Severity::Error, "frequency list is empty", 2));
    const auto r2 = parse_config("[frequencies]\ncount = 0\n", "c.ini");
    EXPECT_TRUE(mentions(r2.diagnostics, Severity::Error, "frequency list is empty"));
    EXPECT_EQ(run_cli("pipeline --config " + (dir / "c.ini").string()), 1);
    EXPECT_FALSE(fs::exists(out));
}

TEST(Config, UnknownAndDuplicateKeys) {
    auto r = parse_config("[grid]\nnx = 10\nnx = 12\n", "d.ini");
    EXPECT_TRUE(mentions(r.diagnostics, Severity::Error, "duplicate", 3));
    r = parse_config("[grid]\nsize = 3\n", "u.ini");
    EXPECT_TRUE(mentions(r.diagnostics, Severity::Error, "size", 2));
    r = parse_config("[nope]\n", "s.ini");
    EXPECT_FALSE(r.ok());
    r = parse_config("; comment\n# other\n[grid]\nnx = 10 ; trailing\n", "c.ini");
    EXPECT_TRUE(r.ok());
    EXPECT_EQ(r.config.nx, 10);
}

TEST(Config, StageLists) {
    auto r = parse_config("[output]\nstages = optimize, dispersion\n", "s.ini");
    EXPECT_FALSE(r.ok());
    r = parse_config("[output]\nstages = homogenize\n", "s.ini");
    EXPECT_FALSE(r.ok());  // no design available
    r = parse_config("[homogenization]\nphi_file = phi.txt\n[output]\nstages = homogenize\n", "s.ini");
    EXPECT_TRUE(r.ok());
    EXPECT_TRUE(r.config.runs(Stage::Homogenize));
    EXPECT_FALSE(r.config.runs(Stage::Optimize));
    Stage s;
    EXPECT_TRUE(parse_stage("transmission", s));
    EXPECT_EQ(s, Stage::Transmission);
    EXPECT_FALSE(parse_stage("tl", s));
}

TEST(Config, MaterialCard) {
    std::vector<Diagnostic> d;
    const auto reg = parse_material_card("# c\nname=lead rho=11340 K=4.6e10 G=1.3e10 mu=0\n", "card", d);
    EXPECT_TRUE(d.empty());
    EXPECT_EQ(reg.get("lead").rho, 11340.0);
    parse_material_card("name=x rho=-1 K=1 G=1 mu=0\n", "card", d);
    EXPECT_TRUE(has_errors(d));
}

TEST(Io, PhiRoundTripAndShape) {
    const auto g = build_grid(5, 3, 0.01);
    Vec phi(g.node_count());
    for (int n = 0; n < phi.size(); ++n) phi(n) = std::sin(0.7 * n) / 3.0;
    EXPECT_EQ(io::parse_phi(g, io::format_phi(g, phi)), phi);
    EXPECT_THROW(io::parse_phi(build_grid(4, 3, 0.01), io::format_phi(g, phi)), Error);
    try {
        io::parse_phi(build_grid(5, 4, 0.01), io::format_phi(g, phi));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MeshIncompatibility);
    }
}

TEST(Io, Sha256AndLogHeader) {
    EXPECT_EQ(io::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    EXPECT_EQ(io::sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(io::iteration_log_csv({}), "iter,Pi,f,g,lambda_star1,lambda1,vol_frac_dense,vol_frac_soft\n");
    EXPECT_EQ(viscosity_tag(0.0), "mu0");
    EXPECT_EQ(viscosity_tag(0.5), "mu0.5");
}

TEST(Pipeline, HomogenizeFromPhiIsDeterministic) {
    const fs::path dir = scratch("pipeline");
    const auto g = build_grid(16, 16, 0.01);
    io::write_file(dir / "phi.txt", resonator_phi(g));
    std::ostringstream cfg;
    cfg << "[grid]\nnx = 16\nny = 16\n"
        << "[homogenization]\nviscosities = 0, 10\nphi_file = phi.txt\n"
        << "[frequencies]\nmin_hz = 50\nmax_hz = 3000\ncount = 40\n"
        << "[dispersion]\nbloch = false\n"
        << "[output]\nstages = homogenize, dispersion, transmission\ndir = out\n";
    io::write_file(dir / "c.ini", cfg.str());

    std::map<std::string, std::string> first;
    for (int run = 0; run < 2; ++run) {
        const auto r = load_config(dir / "c.ini");
        ASSERT_TRUE(r.ok());
        auto c = r.config;
        c.out_dir = dir / ("out" + std::to_string(run));
        const auto res = run_pipeline(c);
        ASSERT_TRUE(res.ok) << res.error;
        EXPECT_EQ(res.completed.size(), 3u);
        const auto hashes = manifest_hashes(io::read_file(c.out_dir / "manifest.txt"));
        EXPECT_EQ(hashes.size(), res.files.size());
        for (const auto& f : res.files) {
            ASSERT_TRUE(hashes.count(f)) << f;
            EXPECT_EQ(hashes.at(f), io::sha256_hex(io::read_file(c.out_dir / f))) << f;
        }
        EXPECT_TRUE(hashes.count("effective_mu10.txt"));
        EXPECT_TRUE(hashes.count("tl_mu0.csv"));
        if (run == 0) first = hashes;
        else EXPECT_EQ(first, hashes);
    }
    EXPECT_EQ(run_cli("homogenize --config " + (dir / "c.ini").string() + " --out " + (dir / "cli").string() + " -q"),
              0);
    EXPECT_EQ(io::read_file(dir / "cli" / "effective_mu0.txt"), io::read_file(dir / "out0" / "effective_mu0.txt"));
}

TEST(Pipeline, FailureIsRecordedInManifest) {
    const fs::path dir = scratch("failure");
    io::write_file(dir / "phi.txt", resonator_phi(build_grid(16, 16, 0.01)));
    io::write_file(dir / "c.ini",
                   "[grid]\nnx = 16\nny = 16\n[homogenization]\nphi_file = phi.txt\n"
                   "[frequencies]\nlist_hz = 100, 200\n[output]\nstages = dispersion\ndir = out\n");
    const auto r = load_config(dir / "c.ini");
    ASSERT_TRUE(r.ok());
    const auto res = run_pipeline(r.config);
    EXPECT_FALSE(res.ok);
    ASSERT_TRUE(res.failed_stage.has_value());
    EXPECT_EQ(*res.failed_stage, Stage::Dispersion);
    const auto m = io::read_file(dir / "out" / "manifest.txt");
    EXPECT_NE(m.find("status = failed"), std::string::npos);
    EXPECT_NE(m.find("failed_stage = dispersion"), std::string::npos);
    EXPECT_EQ(run_cli("dispersion --config " + (dir / "c.ini").string() + " --out " + (dir / "cli").string() + " -q"),
              2);
    EXPECT_TRUE(fs::exists(dir / "cli" / "manifest.txt"));
}

TEST(Cli, BadArguments) {
    EXPECT_EQ(run_cli("validate --config /nonexistent.ini"), 1);
    EXPECT_EQ(run_cli("frobnicate"), 1);
    EXPECT_EQ(run_cli("validate --config " + std::string(LRAM_SOURCE_DIR) + "/configs/quick.ini"), 0);
}
