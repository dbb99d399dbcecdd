#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "json.hpp"
#include "qbm/run.hpp"

using namespace qbm;
namespace fs = std::filesystem;

namespace {

const char* kBase = R"(# quick ohmic run
[meta]
name = quick

[environment]
n = 1
gamma0 = 0.01
cutoff = 50
temperature = high
kT = 100

[system]
mass = 1
omega = 1

[initial]
kind = superposition
L0 = 1

[run]
t_end = 1
dt = 0.005
samples = 200
outputs = coefficients, trajectory, decoherence, timescales
)";

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("qbm_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_file(const fs::path& dir, const std::string& text) {
    const auto p = dir / "run.ini";
    std::ofstream(p) << text;
    return p;
}

int cli(const std::string& args) {
    const std::string cmd = std::string(QBM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Config, ParsesAllSections) {
    const auto c = parse_config_string(kBase);
    EXPECT_EQ(c.name, "quick");
    EXPECT_TRUE(c.env.is_high_temperature());
    EXPECT_DOUBLE_EQ(c.env.high_kT(), 100.0);
    EXPECT_DOUBLE_EQ(c.initial.half_separation(), 1.0);
    EXPECT_EQ(c.outputs.size(), 4u);
    EXPECT_EQ(c.samples, 200u);
    EXPECT_FALSE(c.sweep);
    EXPECT_DOUBLE_EQ(c.env.mass_ref, 1.0);
}

TEST(Config, RoundTrip) {
    auto c = parse_config_string(std::string(kBase) + "\n[sweep]\naxis = kT\nvalues = 10, 100\n");
    c.env.mass_ref = 2.0;
    const auto text = serialize_config(c);
    const auto d = parse_config_string(text);
    EXPECT_EQ(serialize_config(d), text);
    EXPECT_DOUBLE_EQ(d.env.mass_ref, 2.0);
    ASSERT_TRUE(d.sweep);
    EXPECT_EQ(d.sweep->values, (std::vector<double>{10.0, 100.0}));
}

TEST(Config, RejectsUnknownKeysAndValues) {
    EXPECT_THROW(parse_config_string("[environment]\nfoo = 1\n"), ConfigError);
    EXPECT_THROW(parse_config_string("[bogus]\nn = 1\n"), ConfigError);
    EXPECT_THROW(parse_config_string("[environment]\ngamma0 = abc\n"), ConfigError);
    EXPECT_THROW(parse_config_string("[environment]\ntemperature = warm\n"), ConfigError);
    EXPECT_THROW(parse_config_string("[run]\nengine = magic\n"), ConfigError);
    EXPECT_THROW(parse_config_string("[run]\noutputs = trajectory, movie\n"), ConfigError);
}

TEST(Config, Validation) {
    auto c = parse_config_string(kBase);
    EXPECT_NO_THROW(validate_config(c));
    auto empty = c;
    empty.outputs.clear();
    EXPECT_THROW(validate_config(empty), ConfigError);
    auto longrun = c;
    longrun.t_end = 200.0;
    EXPECT_THROW(validate_config(longrun), ConfigError);
    longrun.allow_long = true;
    EXPECT_NO_THROW(validate_config(longrun));
    auto fp = c;
    fp.engine = Engine::FokkerPlanck;
    EXPECT_THROW(validate_config(fp), ConfigError);
    auto axis = c;
    axis.sweep = SweepSettings{"colour", {1.0}};
    EXPECT_THROW(validate_config(axis), ConfigError);
    auto bad = c;
    bad.env.gamma0 = -1.0;
    EXPECT_THROW(validate_config(bad), ConfigError);
}

TEST(Run, WritesArtifactsWithUnitsHeader) {
    auto c = parse_config_string(kBase);
    c.output_dir = scratch("artifacts").string();
    std::ostringstream log;
    RunResult r;
    ASSERT_EQ(run(c, log, &r), kExitOk) << log.str();
    for (const char* f : {"coefficients.csv", "trajectory.csv", "decoherence.csv", "timescales.json"}) {
        const auto text = slurp(fs::path(c.output_dir) / f);
        ASSERT_FALSE(text.empty()) << f;
        if (std::string(f).ends_with(".csv")) {
            EXPECT_EQ(text.rfind("# units", 0), 0u) << f;
        }
    }
    const auto j = nlohmann::json::parse(slurp(fs::path(c.output_dir) / "timescales.json"));
    EXPECT_EQ(j["regime"], "OhmicHighT");
    EXPECT_FALSE(j["t_dec_measured"].is_null());
    EXPECT_TRUE(r.decoherence.has_value());
}

TEST(Run, DeterministicOutput) {
    auto c = parse_config_string(kBase);
    const auto a = scratch("det_a"), b = scratch("det_b");
    std::ostringstream log;
    c.output_dir = a.string();
    ASSERT_EQ(run(c, log), kExitOk);
    c.output_dir = b.string();
    ASSERT_EQ(run(c, log), kExitOk);
    for (const char* f : {"coefficients.csv", "trajectory.csv", "decoherence.csv"})
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(Run, NumericFailureWritesErrorJson) {
    auto c = parse_config_string(kBase);
    c.engine = Engine::Grid;
    c.grid.n = 128;
    c.dt = 0.1;
    c.output_dir = scratch("numeric").string();
    std::ostringstream log;
    EXPECT_EQ(run(c, log), kExitNumeric);
    const auto j = nlohmann::json::parse(slurp(fs::path(c.output_dir) / "error.json"));
    EXPECT_EQ(j["status"], "numeric_error");
}

TEST(Sweep, WritesManifestAndMemberDirectories) {
    auto c = parse_config_string(std::string(kBase) + "\n[sweep]\naxis = kT\nvalues = 10, 100\n");
    c.output_dir = scratch("sweep").string();
    c.outputs = {Output::Timescales};
    std::ostringstream log;
    ASSERT_EQ(sweep(c, log, 2), kExitOk) << log.str();
    const auto m = nlohmann::json::parse(slurp(fs::path(c.output_dir) / "manifest.json"));
    EXPECT_EQ(m["axis"], "kT");
    ASSERT_EQ(m["runs"].size(), 2u);
    for (const auto& r : m["runs"]) {
        EXPECT_EQ(r["exit_code"], 0);
        EXPECT_TRUE(fs::exists(fs::path(c.output_dir) / r["directory"].get<std::string>() / "timescales.json"));
    }
    const auto member = sweep_member(c, 100.0);
    EXPECT_DOUBLE_EQ(member.env.high_kT(), 100.0);
    EXPECT_FALSE(member.sweep);
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch("cli");
    const auto ok = write_file(dir, kBase);
    EXPECT_EQ(cli("coefficients --config " + ok.string() + " --out " + (dir / "a").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "a" / "coefficients.csv"));
    EXPECT_EQ(cli("decohere --config " + ok.string() + " --out " + (dir / "b").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "b" / "decoherence.csv"));

    const auto empty = dir / "empty.ini";
    {
        auto text = std::string(kBase);
        text.replace(text.find("outputs = "), std::string("outputs = coefficients, trajectory, decoherence, timescales").size(),
                     "outputs =");
        std::ofstream(empty) << text;
    }
    EXPECT_EQ(cli("evolve --config " + empty.string() + " --out " + (dir / "c").string()), 2);

    const auto axis = dir / "axis.ini";
    std::ofstream(axis) << kBase << "\n[sweep]\naxis = colour\nvalues = 1, 2\n";
    EXPECT_EQ(cli("sweep --config " + axis.string() + " --out " + (dir / "d").string()), 2);

    EXPECT_EQ(cli("evolve --config " + (dir / "missing.ini").string()), 2);
    EXPECT_EQ(cli("evolve --config " + ok.string() + " --engine warp"), 2);
    EXPECT_EQ(cli("preset no_such_preset --out " + (dir / "e").string()), 2);
    EXPECT_EQ(cli("frobnicate"), 2);

    const auto longrun = dir / "long.ini";
    {
        auto text = std::string(kBase);
        text.replace(text.find("t_end = 1"), 9, "t_end = 150");
        text.replace(text.find("dt = 0.005"), 10, "dt = 0.05");
        std::ofstream(longrun) << text;
    }
    EXPECT_EQ(cli("evolve --config " + longrun.string() + " --out " + (dir / "f").string()), 2);
}

TEST(Cli, ClassicalEngineDropsQuantumOutputs) {
    const auto dir = scratch("classical");
    const auto ok = write_file(dir, kBase);
    EXPECT_EQ(cli("classical --config " + ok.string() + " --out " + (dir / "a").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "a" / "trajectory.csv"));
    EXPECT_FALSE(fs::exists(dir / "a" / "decoherence.csv"));
}

TEST(Cli, KernelDump) {
    const auto dir = scratch("kernels");
    const auto ok = write_file(dir, kBase);
    EXPECT_EQ(cli("coefficients --kernels --config " + ok.string() + " --out " + dir.string()), 0);
    const auto text = slurp(dir / "kernels.csv");
    EXPECT_EQ(text.rfind("t,eta,nu\n", 0), 0u);
}

TEST(Presets, AllParseAndValidate) {
    std::size_t count = 0;
    for (const auto& e : fs::directory_iterator(QBM_PRESET_DIR)) {
        if (e.path().extension() != ".ini") continue;
        ++count;
        const auto c = load_config(e.path().string());
        EXPECT_NO_THROW(validate_config(c)) << e.path();
        if (!c.sweep) continue;
        for (double v : c.sweep->values) EXPECT_NO_THROW(validate_config(sweep_member(c, v))) << e.path();
    }
    EXPECT_GE(count, 10u);
}
