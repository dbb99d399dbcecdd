// Acceptance criteria: one PASS/FAIL line per criterion.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "qbm/qbm.hpp"

using namespace qbm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass{false};
    std::string detail;
};

double slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

std::vector<RunConfig> expand(const RunConfig& c) {
    if (!c.sweep) return {c};
    std::vector<RunConfig> out;
    for (double v : c.sweep->values) out.push_back(sweep_member(c, v));
    return out;
}

RunConfig preset(const std::string& name) {
    auto c = load_config((fs::path(QBM_PRESET_DIR) / (name + ".ini")).string());
    c.output_dir = (fs::temp_directory_path() / "qbm_acceptance" / name).string();
    return c;
}

// HighT ohmic reference run shared by criteria 1 and 2.
const EnvironmentSpec kHot{1.0, 0.001, 2000.0, HighTemperature{1e5}};
const OscillatorSpec kSlow{1.0, 0.1};

const CoefficientSeries& hot_series() {
    static const CoefficientSeries s = compute_coefficients(kHot, kSlow, 0.5 / kHot.gamma0);
    return s;
}

Outcome energy_growth() {
    const auto& s = hot_series();
    const InitialState init{SymmetricSuperposition{2.0, 0.0}, kSlow};
    MomentOptions opt;
    opt.record_every = 10;
    const auto traj = moment_observables(evolve_moments(initial_moments(init), s, s.t_max(), 0.01, opt), s);
    std::vector<double> t, e;
    for (const auto& p : traj)
        if (p.t >= 20.0 / kHot.cutoff && p.t <= 0.5 / kHot.gamma0) {
            t.push_back(p.t);
            e.push_back(p.energy);
        }
    const double target = 2.0 * kHot.gamma0 * kHot.high_kT();
    const double k = slope(t, e);
    return {std::abs(k - target) <= 0.05 * target,
            "fitted dE/dt = " + fmt(k) + " vs 2 gamma0 kT = " + fmt(target)};
}

Outcome diffusion_constant() {
    const auto& s = hot_series();
    const double target = 2.0 * kHot.gamma0 * kHot.high_kT() * kSlow.mass;
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = 0; i < s.times().size(); ++i)
        if (s.times()[i] > 10.0 / kHot.cutoff) {
            lo = std::min(lo, s.d_normal()[i]);
            hi = std::max(hi, s.d_normal()[i]);
        }
    const bool flat = hi - lo <= 0.05 * target;
    const bool value = std::abs(lo - target) <= 0.05 * target && std::abs(hi - target) <= 0.05 * target;
    return {flat && value, "D(t > 10/cutoff) in [" + fmt(lo) + ", " + fmt(hi) + "] vs " + fmt(target)};
}

Outcome supraohmic_short_time() {
    const double g = 0.01, L = 2000.0, W = 0.1, M = 1.0;
    const auto s = compute_coefficients(EnvironmentSpec{3.0, g, L}, {M, W}, 0.05 / W);
    std::vector<double> t, d, f;
    for (std::size_t i = 0; i < s.times().size(); ++i)
        if (s.times()[i] >= 10.0 / L && W * s.times()[i] < 0.05) {
            t.push_back(s.times()[i]);
            d.push_back(s.d_normal()[i]);
            f.push_back(s.f_anomalous()[i]);
        }
    const double kd = slope(t, d), kf = slope(t, f);
    const double pd = 2.0 * M * g / (std::numbers::pi * L * L) * std::pow(W, 4);
    const double pf = -2.0 * g / std::numbers::pi * W;
    const bool ok = std::abs(kd - pd) <= 0.1 * std::abs(pd) && std::abs(kf - pf) <= 0.1 * std::abs(pf);
    return {ok, "slope D = " + fmt(kd) + " vs " + fmt(pd) + ", slope f = " + fmt(kf) + " vs " + fmt(pf)};
}

Outcome supraohmic_plateau() {
    const double g = 0.01, L0 = 2.0, L = 2000.0, W = 0.1, M = 1.0;
    const auto s = compute_coefficients(EnvironmentSpec{3.0, g, L}, {M, W}, 1.0 / W);
    const auto tr = fringe_visibility(s, L0);
    const double target = std::exp(-2.0 * M * L0 * L0 * g);
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = 0; i < tr.times.size(); ++i)
        if (tr.times[i] >= 20.0 / L) {
            lo = std::min(lo, tr.gamma_factor[i]);
            hi = std::max(hi, tr.gamma_factor[i]);
        }
    return {std::abs(lo - target) <= 0.05 && std::abs(hi - target) <= 0.05,
            "Gamma on [20/cutoff, 1/Omega] in [" + fmt(lo) + ", " + fmt(hi) + "] vs " + fmt(target)};
}

Outcome subohmic_bound() {
    struct Set {
        double g, L;
    };
    const double L0 = 2.0, W = 1.0;
    bool ok = true;
    std::string detail;
    for (const Set& p : {Set{0.01, 200.0}, Set{0.001, 2000.0}}) {
        const double bound = W / (p.g * p.L);
        const auto s = compute_coefficients(EnvironmentSpec{0.5, p.g, p.L}, {1.0, W}, 4.0 * bound);
        const auto tr = fringe_visibility(s, L0);
        const bool this_ok = tr.t_dec_measured && *tr.t_dec_measured <= 2.0 * bound;
        ok = ok && this_ok;
        detail += "gamma0=" + fmt(p.g) + " cutoff=" + fmt(p.L) + ": t_dec = " +
                  (tr.t_dec_measured ? fmt(*tr.t_dec_measured) : "none") + " vs bound " + fmt(bound) + "; ";
    }
    return {ok, detail};
}

Outcome mimic_identity() {
    double worst = 0.0;
    for (double n : {0.5, 1.0, 3.0}) {
        EnvironmentSpec q{n, 0.01, 2000.0};
        EnvironmentSpec c = q;
        c.temperature = zero_point_mimic();
        BathKernels kq(q), kc(c);
        const double scale = kq.nu(0.0);
        for (int i = 0; i < 200; ++i) {
            const double t = 0.05 * i / 199.0;
            worst = std::max(worst, std::abs(kq.nu(t) - kc.nu(t)) / scale);
        }
    }
    return {worst <= 1e-8, "max relative difference " + fmt(worst)};
}

Outcome post_decoherence_ordering() {
    bool ok = true;
    std::string detail;
    for (const char* name : {"fig3a", "fig4c", "fig6b", "fig7b", "fig9b"}) {
        for (auto c : expand(preset(name))) {
            if (c.initial.half_separation() == 0.0) continue;
            c.outputs = {Output::Timescales};
            const auto r = execute(c);
            const auto& td = r.report.t_dec_measured;
            const auto& ta = r.report.t_act_measured;
            if (!td) continue;  // no decoherence within the run
            const bool good = ta && *ta > *td;
            ok = ok && good;
            detail += c.name + ": t_dec=" + fmt(*td) + " t_act=" + (ta ? fmt(*ta) : "none") +
                      (good ? "" : " (violated)") + "; ";
        }
    }
    for (auto c : expand(preset("fig1a"))) {
        if (c.env.gamma0 * c.sys.mass * std::pow(c.initial.half_separation(), 2) >= 1.0) continue;
        c.outputs = {Output::Timescales};
        const auto r = execute(c);
        const bool none = !r.report.t_act_measured;
        ok = ok && none;
        detail += c.name + ": t_act=" + (none ? "none" : fmt(*r.report.t_act_measured)) + "; ";
    }
    return {ok, detail};
}

Outcome engine_equivalence() {
    const EnvironmentSpec env{1.0, 0.01, 20.0, HighTemperature{100.0}};
    const OscillatorSpec sys{};
    const double T = 2.0, dt = 1e-3;
    const auto s = compute_coefficients(env, sys, T);
    const InitialState init{SingleGaussian{1.0, 0.0, 0.0}, sys};
    GridOptions go;
    go.record_every = 100;
    const auto grid = evolve_grid(make_grid_state(init, 256, 10.0), s, T, dt, go);
    MomentOptions mo;
    mo.record_every = 100;
    const auto mom = moment_observables(evolve_moments(initial_moments(init), s, T, dt, mo), s);
    double worst = 0.0;
    const std::size_t n = std::min(grid.observables.size(), mom.size());
    for (std::size_t i = 0; i < n; ++i) {
        worst = std::max(worst, std::abs(grid.observables[i].xx - mom[i].xx) / mom[i].xx);
        worst = std::max(worst, std::abs(grid.observables[i].pp - mom[i].pp) / mom[i].pp);
    }
    const bool aligned = grid.observables.size() == mom.size() &&
                         std::abs(grid.observables.back().t - mom.back().t) < 1e-12;
    return {aligned && worst <= 0.01,
            "max relative deviation of <x^2>, <p^2> = " + fmt(worst) + " over " + std::to_string(n) + " samples"};
}

Outcome closed_system() {
    const EnvironmentSpec env{1.0, 0.0, 100.0};
    const OscillatorSpec sys{};
    const double T = 10.0 * 2.0 * std::numbers::pi;
    const auto s = compute_coefficients(env, sys, T, CoefficientOptions{.samples = 50});
    const InitialState init{SingleGaussian{1.0, 0.5, 0.0}, sys};

    MomentOptions mo;
    mo.record_every = 100;
    const auto m = moment_observables(evolve_moments(initial_moments(init), s, T, 1e-3, mo), s);
    double de_m = 0.0, dp_m = 0.0;
    for (const auto& p : m) {
        de_m = std::max(de_m, std::abs(p.energy - m.front().energy) / m.front().energy);
        dp_m = std::max(dp_m, std::abs(p.linear_entropy - m.front().linear_entropy));
    }

    GridOptions go;
    go.record_every = 200;
    const auto g = evolve_grid(make_grid_state(init, 128, 8.0), s, T, 5e-3, go).observables;
    double de_g = 0.0, dp_g = 0.0;
    const double p0 = 1.0 - g.front().linear_entropy;
    for (const auto& p : g) {
        de_g = std::max(de_g, std::abs(p.energy - g.front().energy) / g.front().energy);
        dp_g = std::max(dp_g, std::abs((1.0 - p.linear_entropy) - p0) / p0);
    }
    const bool ok = de_m <= 1e-8 && dp_m <= 1e-8 && de_g <= 1e-6 && dp_g <= 1e-6;
    return {ok, "moments: dE/E = " + fmt(de_m) + ", dP = " + fmt(dp_m) + "; grid: dE/E = " + fmt(de_g) +
                    ", dP/P = " + fmt(dp_g)};
}

Outcome classical_correspondence() {
    const EnvironmentSpec env{1.0, 0.01, 100.0, HighTemperature{100.0}};
    const OscillatorSpec sys{};
    const auto h = hight_constants(env, sys);
    const double d_pp = sys.mass * h.d_const, T = 2.0, dt = 2e-3;
    const InitialState init{SingleGaussian{1.0, 0.0, 0.0}, sys};
    const auto m0 = initial_moments(init);
    const auto ref = integrate_classical_moments(m0, sys, h.gamma0, d_pp, T, dt);
    double xmax = 0, pmax = 0;
    for (const auto& m : ref) {
        xmax = std::max(xmax, m.xx);
        pmax = std::max(pmax, m.pp);
    }
    const auto w0 = make_phase_space_state(init, 160, 160, 6.0 * std::sqrt(xmax), 6.0 * std::sqrt(pmax));
    const auto run = evolve_fokker_planck(w0, sys, h.gamma0, d_pp, T, dt);
    double worst = 0.0;
    for (std::size_t i = 0; i < run.observables.size(); ++i) {
        worst = std::max(worst, std::abs(run.observables[i].xx - ref[i].xx) / ref[i].xx);
        worst = std::max(worst, std::abs(run.observables[i].pp - ref[i].pp) / ref[i].pp);
    }
    std::vector<double> t, e;
    for (const auto& p : run.observables)
        if (p.t <= 0.02) {
            t.push_back(p.t);
            e.push_back(p.energy);
        }
    const double rate = slope(t, e), target = 2.0 * env.gamma0 * env.high_kT();
    const bool ok = worst <= 0.01 && std::abs(rate - target) <= 0.02 * target;
    return {ok, "max moment deviation " + fmt(worst) + ", early dE/dt = " + fmt(rate) + " vs " + fmt(target)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"1 energy growth law", energy_growth},
        {"2 high-T diffusion constant", diffusion_constant},
        {"3 supraohmic short-time slopes", supraohmic_short_time},
        {"4 supraohmic zero-T plateau", supraohmic_plateau},
        {"5 subohmic zero-T decoherence bound", subohmic_bound},
        {"6 zero-point mimic identity", mimic_identity},
        {"7 post-decoherence ordering", post_decoherence_ordering},
        {"8 grid/moment engine equivalence", engine_equivalence},
        {"9 closed-system conservation", closed_system},
        {"10 classical correspondence", classical_correspondence},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << name << ": " << o.detail << std::endl;
    }
    std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failures == 0 ? 0 : 1;
}
