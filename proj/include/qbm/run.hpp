// run.hpp: run orchestration, artifact emission and parameter sweeps

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "qbm/classical.hpp"
#include "qbm/coefficients.hpp"
#include "qbm/config.hpp"
#include "qbm/diagnostics.hpp"
#include "qbm/evolution.hpp"
#include "qbm/parallel.hpp"

namespace qbm {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

struct RunResult {
    CoefficientSeries coefficients;
    ObservableTrajectory trajectory;
    std::optional<DecoherenceTrace> decoherence;
    TimescaleReport report;
    std::vector<std::string> files;
    std::vector<std::string> warnings;
};

namespace detail {

inline std::string units_header(const RunConfig& c) {
    std::ostringstream os;
    os << std::setprecision(10) << "# units: hbar = k_B = 1; times in 1/Omega_unit, energies in "
       << "Omega_unit (omega = " << c.sys.omega_bare << " in these units)\n";
    if (!c.name.empty()) os << "# run: " << c.name << '\n';
    return os.str();
}

inline std::ofstream open_output(const RunConfig& c, const std::string& file, RunResult& r) {
    const auto path = std::filesystem::path(c.output_dir) / file;
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path.string());
    r.files.push_back(path.string());
    return os;
}

inline double isolated_energy(const MomentState& m, const OscillatorSpec& sys) {
    return m.pp / (2.0 * sys.mass) + 0.5 * sys.mass * sys.omega_bare * sys.omega_bare * m.xx;
}

inline double max_xx(const MomentTrajectory& tr) {
    double v = 0.0;
    for (const auto& m : tr) v = std::max(v, m.xx);
    return v;
}

inline double max_pp(const MomentTrajectory& tr) {
    double v = 0.0;
    for (const auto& m : tr) v = std::max(v, m.pp);
    return v;
}

}  // namespace detail

// Runs one validated configuration. Throws ConfigError (exit 2) or a
// NumericError / DomainError (exit 3).
inline RunResult execute(const RunConfig& c) {
    validate_config(c);
    std::error_code ec;
    std::filesystem::create_directories(c.output_dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + c.output_dir);

    RunResult r;
    CoefficientOptions copt;
    copt.samples = c.samples;
    copt.counterterm = c.counterterm;
    copt.renormalized_frequency = c.renormalized_frequency;
    r.coefficients = compute_coefficients(c.env, c.sys, c.t_end, copt);
    const auto& series = r.coefficients;
    if (series.beyond_validity()) r.warnings.push_back("t_end exceeds the saturation time 1/gamma0");
    if (series.weak_coupling_warning())
        r.warnings.push_back("coupling outside the weak-coupling regime");

    const auto m0 = initial_moments(c.initial);
    const double L0 = c.initial.half_separation();
    const double sigma = c.initial.sigma();
    MomentOptions mopt;
    mopt.record_every = c.record_every;

    switch (c.engine) {
        case Engine::Moments: {
            r.trajectory = moment_observables(evolve_moments(m0, series, c.t_end, c.dt, mopt), series,
                                              c.bare_energy);
            break;
        }
        case Engine::Grid: {
            double l_box = c.grid.l_box;
            const auto probe = evolve_moments(m0, series, c.t_end, c.dt, mopt);
            if (l_box == 0.0) l_box = std::max(4.0 * sigma + L0, 5.0 * std::sqrt(detail::max_xx(probe)));
            const double dx = 2.0 * l_box / static_cast<double>(c.grid.n - 1);
            const double p_max = std::max(L0 / (sigma * sigma), std::sqrt(detail::max_pp(probe)));
            if (dx > sigma / 4.0 || dx > std::numbers::pi / (4.0 * p_max))
                throw ConfigError("grid too coarse: dx = " + std::to_string(dx) +
                                  " must resolve sigma/4 and the fringe scale; raise grid.n");
            GridOptions gopt;
            gopt.record_every = c.record_every;
            gopt.bare_energy = c.bare_energy;
            auto run = evolve_grid(make_grid_state(c.initial, c.grid.n, l_box), series, c.t_end, c.dt,
                                   gopt);
            if (run.boundary_warning)
                r.warnings.push_back("density matrix reaches the box edge (weight " +
                                     std::to_string(run.max_boundary_weight) + "); enlarge grid.l_box");
            r.trajectory = std::move(run.observables);
            break;
        }
        case Engine::FokkerPlanck: {
            FpCoefficients mode = c.fp.coefficients;
            if (mode == FpCoefficients::Auto)
                mode = c.env.is_high_temperature() && c.env.n == 1.0 ? FpCoefficients::HighT
                                                                     : FpCoefficients::Series;
            const double w2 = c.sys.omega_bare * c.sys.omega_bare;
            FokkerPlanckCoefficients k{w2, c.env.gamma0, 0.0, 0.0};
            if (mode == FpCoefficients::HighT) {
                const auto h = hight_constants(c.env, c.sys);
                k.d_pp = c.sys.mass * h.d_const;
            } else if (mode == FpCoefficients::ClassicalZero) {
                k = classical_zero_temperature(c.env, c.sys);
            }
            MomentTrajectory probe;
            if (mode == FpCoefficients::Series) probe = evolve_moments(m0, series, c.t_end, c.dt, mopt);
            else probe = integrate_classical_moments(m0, c.sys, k.gamma, k.d_pp, c.t_end, c.dt);
            const double x_max = c.fp.x_max > 0 ? c.fp.x_max : 6.0 * std::sqrt(detail::max_xx(probe));
            const double p_max = c.fp.p_max > 0 ? c.fp.p_max : 6.0 * std::sqrt(detail::max_pp(probe));
            const auto w0 = make_phase_space_state(c.initial, c.fp.nx, c.fp.np, x_max, p_max);
            FokkerPlanckOptions fo;
            fo.anomalous = c.fp.anomalous;
            fo.record_every = c.record_every;
            FokkerPlanckRun run;
            if (mode == FpCoefficients::Series) run = evolve_fokker_planck(w0, series, c.t_end, c.dt, fo);
            else run = evolve_fokker_planck(w0, c.sys, [k](double) { return k; }, c.t_end, c.dt, fo);
            r.trajectory = std::move(run.observables);
            break;
        }
    }

    // Diagnostics.
    r.report.regime = classify(c.env);
    r.report.t_sat = saturation_time(c.env);
    r.report.t_dec_estimate = decoherence_time_estimate(c.env, c.sys, L0);
    if (c.engine != Engine::FokkerPlanck && L0 > 0.0) {
        r.decoherence = fringe_visibility(series, L0);
        r.report.t_dec_measured = r.decoherence->t_dec_measured;
    }
    const double jolt_end = 10.0 / c.env.cutoff;
    const double e_iso = detail::isolated_energy(m0, c.sys);
    if (!r.trajectory.empty() && r.trajectory.back().t > jolt_end)
        r.report.t_act_measured = activation_onset(r.trajectory, e_iso, jolt_end);
    if (c.env.is_high_temperature() && c.env.high_kT() > 0.0 && c.env.gamma0 > 0.0) {
        const double gap = c.activation_gap > 0.0 ? c.activation_gap : c.sys.omega_bare;
        r.report.t_th = thermal_activation_time(e_iso + gap, e_iso, c.env.gamma0, c.env.high_kT());
    }

    // Artifacts.
    const std::string header = detail::units_header(c);
    if (c.wants(Output::Coefficients)) {
        auto os = detail::open_output(c, "coefficients.csv", r);
        os << header;
        write_csv(os, series);
    }
    if (c.wants(Output::Trajectory)) {
        auto os = detail::open_output(c, "trajectory.csv", r);
        os << header << "# engine: " << to_string(c.engine) << '\n';
        write_trajectory_csv(os, r.trajectory, c.engine != Engine::FokkerPlanck);
    }
    if (c.wants(Output::Decoherence)) {
        auto os = detail::open_output(c, "decoherence.csv", r);
        os << header << "# L0 = " << L0 << '\n' << "t,A_int,Gamma\n" << std::setprecision(17);
        if (r.decoherence)
            for (std::size_t i = 0; i < r.decoherence->times.size(); ++i)
                os << r.decoherence->times[i] << ',' << r.decoherence->a_int[i] << ','
                   << r.decoherence->gamma_factor[i] << '\n';
    }
    if (c.wants(Output::Timescales)) {
        auto os = detail::open_output(c, "timescales.json", r);
        auto j = to_json(r.report, c.env, c.sys, L0);
        j["units"] = "hbar = k_B = 1; times in 1/Omega_unit";
        j["warnings"] = r.warnings;
        os << j.dump(2) << '\n';
    }
    return r;
}

// Runs a configuration and maps failures to exit codes; numeric failures
// leave an error.json diagnostic in the output directory.
inline int run(const RunConfig& c, std::ostream& log, RunResult* result = nullptr) {
    try {
        auto r = execute(c);
        for (const auto& w : r.warnings) log << "warning: " << w << '\n';
        if (result) *result = std::move(r);
        return kExitOk;
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        log << "numeric error: " << e.what() << '\n';
        nlohmann::json j{{"status", "numeric_error"}, {"message", e.what()}};
        if (auto* q = dynamic_cast<const QuadratureError*>(&e)) {
            j["achieved_error"] = q->achieved();
            j["requested_error"] = q->requested();
        }
        std::error_code ec;
        std::filesystem::create_directories(c.output_dir, ec);
        std::ofstream os(std::filesystem::path(c.output_dir) / "error.json");
        if (os) os << j.dump(2) << '\n';
        return kExitNumeric;
    }
}

inline std::string sweep_directory_name(const std::string& axis, double value) {
    std::ostringstream os;
    os << axis << '_' << std::setprecision(12) << value;
    return os.str();
}

// Configuration of one sweep member: the template with axis = value.
inline RunConfig sweep_member(const RunConfig& base, double value) {
    if (!base.sweep) throw ConfigError("configuration has no [sweep] section");
    const std::string path = sweep_axis_path(base.sweep->axis);
    auto tree = config_to_ptree(base);
    tree.erase("sweep");
    tree.put(path, detail::format_number(value));
    auto member = config_from_ptree(tree);
    member.output_dir =
        (std::filesystem::path(base.output_dir) / sweep_directory_name(base.sweep->axis, value))
            .string();
    if (!base.name.empty()) member.name = base.name + " " + sweep_directory_name(base.sweep->axis, value);
    return member;
}

// One run per sweep value on a worker pool, then a manifest.json.
inline int sweep(const RunConfig& base, std::ostream& log, std::size_t workers = 0) {
    try {
        if (!base.sweep) throw ConfigError("configuration has no [sweep] section");
        sweep_axis_path(base.sweep->axis);
        if (base.sweep->values.empty()) throw ConfigError("sweep.values is empty");
        std::vector<RunConfig> members;
        for (double v : base.sweep->values) members.push_back(sweep_member(base, v));
        for (const auto& m : members) validate_config(m);
        std::filesystem::create_directories(base.output_dir);

        std::vector<int> codes(members.size(), 0);
        std::vector<std::string> logs(members.size());
        parallel_for(
            0, members.size(),
            [&](std::size_t i) {
                std::ostringstream os;
                codes[i] = run(members[i], os);
                logs[i] = os.str();
            },
            workers);

        nlohmann::json manifest;
        manifest["name"] = base.name;
        manifest["axis"] = base.sweep->axis;
        manifest["values"] = base.sweep->values;
        manifest["runs"] = nlohmann::json::array();
        int worst = kExitOk;
        for (std::size_t i = 0; i < members.size(); ++i) {
            log << logs[i];
            manifest["runs"].push_back(
                {{"value", base.sweep->values[i]},
                 {"directory", sweep_directory_name(base.sweep->axis, base.sweep->values[i])},
                 {"exit_code", codes[i]}});
            worst = std::max(worst, codes[i]);
        }
        std::ofstream os(std::filesystem::path(base.output_dir) / "manifest.json");
        os << manifest.dump(2) << '\n';
        return worst;
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::filesystem::filesystem_error& e) {
        log << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path);
    return parse_config(is);
}

}  // namespace qbm
