// qbm: command-line front end

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>

#include "CLI11.hpp"

#include "qbm/qbm.hpp"

#ifndef QBM_PRESET_DIR
#define QBM_PRESET_DIR "presets"
#endif

namespace {

struct Flags {
    std::string config;
    std::string out;
    std::string engine;
    std::string presets{QBM_PRESET_DIR};
    bool allow_long{false};
    bool kernels{false};
};

void apply_flags(qbm::RunConfig& c, const Flags& f) {
    if (!f.out.empty()) c.output_dir = f.out;
    if (!f.engine.empty()) c.engine = qbm::parse_engine(f.engine);
    if (f.allow_long) c.allow_long = true;
}

// (t, eta, nu) on the coefficient time grid.
void dump_kernels(const qbm::RunConfig& c) {
    qbm::BathKernels k(c.env);
    const auto t = qbm::coefficient_time_grid(c.t_end, c.samples, c.env.cutoff);
    std::ofstream os(std::filesystem::path(c.output_dir) / "kernels.csv");
    os << "t,eta,nu\n";
    os.precision(17);
    for (double s : t) os << s << ',' << k.eta(s) << ',' << k.nu(s) << '\n';
}

int dispatch(const std::string& command, const std::string& preset, const Flags& f) {
    qbm::RunConfig c;
    try {
        if (command == "preset") {
            if (preset.empty()) throw qbm::ConfigError("preset name missing");
            c = qbm::load_config((std::filesystem::path(f.presets) / (preset + ".ini")).string());
            if (f.out.empty()) c.output_dir = "out/" + preset;
        } else {
            if (f.config.empty()) throw qbm::ConfigError("--config is required");
            c = qbm::load_config(f.config);
        }
        apply_flags(c, f);
        if (command == "coefficients") {
            c.outputs = {qbm::Output::Coefficients};
        } else if (command == "decohere") {
            c.engine = qbm::Engine::Moments;
            c.outputs = {qbm::Output::Decoherence, qbm::Output::Timescales};
        } else if (command == "classical") {
            c.engine = qbm::Engine::FokkerPlanck;
            c.outputs.erase(std::remove(c.outputs.begin(), c.outputs.end(), qbm::Output::Decoherence),
                            c.outputs.end());
        }
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return qbm::kExitConfig;
    }

    if (command == "sweep" || (command == "preset" && c.sweep)) return qbm::sweep(c, std::cerr);
    if (c.sweep && command != "coefficients") c.sweep.reset();
    const int code = qbm::run(c, std::cerr);
    if (code == qbm::kExitOk && command == "coefficients" && f.kernels) {
        try {
            dump_kernels(c);
        } catch (const std::exception& e) {
            std::cerr << "numeric error: " << e.what() << '\n';
            return qbm::kExitNumeric;
        }
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum Brownian motion: coefficients, evolution, decoherence and activation"};
    app.require_subcommand(1);
    Flags f;
    std::string preset;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", f.config, "run configuration (INI)");
        sub->add_option("--out", f.out, "output directory");
        sub->add_option("--engine", f.engine, "moments | grid | fokker_planck");
        sub->add_flag("--allow-long", f.allow_long, "allow t_end beyond 1/gamma0");
        sub->add_option("--presets", f.presets, "preset directory");
    };
    const std::pair<const char*, const char*> subs[] = {
        {"coefficients", "tabulate delta_omega_sq, gamma, D, f"},
        {"evolve", "evolve the state (engine from config or --engine)"},
        {"decohere", "decoherence factor and timescales"},
        {"classical", "classical Fokker-Planck comparator"},
        {"sweep", "run the [sweep] section of the config"}};
    for (const auto& [name, help] : subs) {
        auto* sub = app.add_subcommand(name, help);
        common(sub);
        if (std::string(name) == "coefficients")
            sub->add_flag("--kernels", f.kernels, "also write kernels.csv (t, eta, nu)");
    }
    auto* p = app.add_subcommand("preset", "run a shipped preset");
    p->add_option("name", preset, "preset name")->required();
    common(p);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return qbm::kExitConfig;
    }
    return dispatch(app.get_subcommands().front()->get_name(), preset, f);
}
