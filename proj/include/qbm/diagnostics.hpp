// diagnostics.hpp: fringe visibility, timescale estimates, activation onset

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "qbm/coefficients.hpp"
#include "qbm/errors.hpp"
#include "qbm/evolution.hpp"

namespace qbm {

// --------------------------- fringe visibility ------------------------------

struct DecoherenceTrace {
    std::vector<double> times;
    std::vector<double> a_int;
    std::vector<double> gamma_factor;
    std::optional<double> t_dec_measured;  // first time with A_int = 1
    double half_separation{0.0};
};

inline constexpr double kDecoherenceThreshold = 1.0;  // A_int at t_dec (Γ = 1/e)

// A_int(t) = ∫₀ᵗ (4 M L₀² D − 2 f) ds, integrating the coefficient
// interpolants exactly; Γ = exp(−A_int).
inline DecoherenceTrace fringe_visibility(const CoefficientSeries& coeffs, double L0) {
    if (!(L0 >= 0.0)) throw DomainError("half separation L0 must be >= 0");
    const double wd = 4.0 * coeffs.sys().mass * L0 * L0;
    const auto& D = coeffs.d_interpolant();
    const auto& F = coeffs.f_interpolant();
    DecoherenceTrace tr;
    tr.half_separation = L0;
    tr.times = coeffs.times();
    const std::size_t n = tr.times.size();
    tr.a_int.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i)
        tr.a_int[i + 1] = tr.a_int[i] + wd * D.segment_integral(i) - 2.0 * F.segment_integral(i);
    tr.gamma_factor.resize(n);
    for (std::size_t i = 0; i < n; ++i) tr.gamma_factor[i] = std::exp(-tr.a_int[i]);

    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (tr.a_int[i + 1] < kDecoherenceThreshold) continue;
        auto partial = [&](double s) {
            return tr.a_int[i] + wd * D.partial_integral(i, s) - 2.0 * F.partial_integral(i, s) -
                   kDecoherenceThreshold;
        };
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 100; ++it) {
            const double mid = 0.5 * (lo + hi);
            (partial(mid) < 0.0 ? lo : hi) = mid;
        }
        tr.t_dec_measured = tr.times[i] + 0.5 * (lo + hi) * (tr.times[i + 1] - tr.times[i]);
        break;
    }
    return tr;
}

// A_int at an arbitrary time by linear interpolation of the trace.
inline double trace_value(const DecoherenceTrace& tr, double t) {
    if (t < tr.times.front() || t > tr.times.back())
        throw RangeError("time outside the decoherence trace");
    auto it = std::upper_bound(tr.times.begin(), tr.times.end(), t);
    std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - tr.times.begin()),
                                          tr.times.size() - 1);
    if (i == 0) i = 1;
    const double s = (t - tr.times[i - 1]) / (tr.times[i] - tr.times[i - 1]);
    return tr.a_int[i - 1] + s * (tr.a_int[i] - tr.a_int[i - 1]);
}

// --------------------------- regimes and estimates --------------------------

enum class Regime {
    OhmicHighT,
    SupraohmicHighT,
    SubohmicHighT,
    OhmicZeroT,
    SupraohmicZeroT,
    SubohmicZeroT
};

inline std::string to_string(Regime r) {
    switch (r) {
        case Regime::OhmicHighT: return "OhmicHighT";
        case Regime::SupraohmicHighT: return "SupraohmicHighT";
        case Regime::SubohmicHighT: return "SubohmicHighT";
        case Regime::OhmicZeroT: return "OhmicZeroT";
        case Regime::SupraohmicZeroT: return "SupraohmicZeroT";
        case Regime::SubohmicZeroT: return "SubohmicZeroT";
    }
    return "unknown";
}

// Effective temperature used for classification; finite T counts as high
// when k_BT exceeds the cutoff.
inline double effective_kT(const EnvironmentSpec& env) {
    struct V {
        double cutoff;
        double operator()(const ZeroTemperature&) const { return 0.0; }
        double operator()(const FiniteTemperature& f) const { return 1.0 / f.beta; }
        double operator()(const HighTemperature& h) const { return h.kT; }
        double operator()(const ClassicalProfile& c) const { return c.temperature(cutoff); }
    };
    return std::visit(V{env.cutoff}, env.temperature);
}

inline Regime classify(const EnvironmentSpec& env) {
    const bool hot = env.is_high_temperature() ||
                     (!env.is_zero_temperature() && effective_kT(env) > env.cutoff);
    if (env.n < 1.0) return hot ? Regime::SubohmicHighT : Regime::SubohmicZeroT;
    if (env.n > 1.0) return hot ? Regime::SupraohmicHighT : Regime::SupraohmicZeroT;
    return hot ? Regime::OhmicHighT : Regime::OhmicZeroT;
}

struct TimeEstimate {
    enum class Kind { Estimate, Bound, None };
    Kind kind{Kind::None};
    double value{0.0};
    bool warning{false};
    std::string note;
};

inline std::string to_string(TimeEstimate::Kind k) {
    switch (k) {
        case TimeEstimate::Kind::Estimate: return "estimate";
        case TimeEstimate::Kind::Bound: return "upper_bound";
        case TimeEstimate::Kind::None: return "none";
    }
    return "none";
}

inline TimeEstimate decoherence_time_estimate(const EnvironmentSpec& env, const OscillatorSpec& sys,
                                              double L0) {
    using K = TimeEstimate::Kind;
    const double M = sys.mass, g = env.gamma0, L2 = L0 * L0, kT = effective_kT(env);
    const double W = sys.omega_bare, Lam = env.cutoff;
    if (g <= 0.0 || L0 <= 0.0) return {K::None, 0.0, false, "no coupling or no separation"};
    switch (classify(env)) {
        case Regime::OhmicHighT:
            if (kT <= 0.0) return {K::None, 0.0, false, "zero temperature"};
            return {K::Estimate, 1.0 / (2.0 * M * g * kT * L2), false, "1/(2 M gamma0 kT L0^2)"};
        case Regime::SupraohmicHighT:
            if (kT <= 0.0) return {K::None, 0.0, false, "zero temperature"};
            return {K::Estimate, 1.0 / std::sqrt(Lam * M * kT * L2 * g), false,
                    "(cutoff M kT L0^2 gamma0)^(-1/2)"};
        case Regime::SubohmicHighT:
            if (kT <= 0.0) return {K::None, 0.0, false, "zero temperature"};
            return {K::Estimate, 1.0 / (M * g * L2 * kT), false, "1/(M gamma0 L0^2 kT)"};
        case Regime::SubohmicZeroT:
            return {K::Bound, W / (g * Lam), W / g <= 1.0, "Omega/(gamma0 cutoff)"};
        case Regime::OhmicZeroT:
            return {K::Bound, 1.0 / g, false, "1/gamma0"};
        case Regime::SupraohmicZeroT:
            if (M * L2 * g < 1.0) return {K::None, 0.0, false, "M L0^2 gamma0 < 1"};
            return {K::Estimate, 1.0 / Lam, false, "decoheres during the initial jolt"};
    }
    return {};
}

// --------------------------- activation -------------------------------------

inline constexpr double kActivationRise = 0.05;    // relative rise over the running minimum
inline constexpr std::size_t kActivationWindow = 10;

// First time after the jolt window at which ⟨E⟩ rises 5% above the larger of
// its post-jolt running minimum and the isolated energy, while still
// increasing over the next ten samples.
inline std::optional<double> activation_onset(const ObservableTrajectory& traj, double isolated_E,
                                              double jolt_end) {
    if (traj.empty() || traj.back().t <= jolt_end)
        throw RangeError("trajectory does not extend past the jolt window");
    double running_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (traj[i].t <= jolt_end) continue;
        running_min = std::min(running_min, traj[i].energy);
        const double ref = std::max(running_min, isolated_E);
        if (traj[i].energy > ref + kActivationRise * std::abs(ref) &&
            i + kActivationWindow < traj.size() &&
            traj[i + kActivationWindow].energy > traj[i].energy)
            return traj[i].t;
    }
    return std::nullopt;
}

inline double thermal_activation_time(double E_target, double E0, double gamma0, double kT) {
    if (!(kT > 0.0)) throw DomainError("thermal_activation_time requires kT > 0");
    if (!(gamma0 > 0.0)) throw DomainError("thermal_activation_time requires gamma0 > 0");
    return (E_target - E0) / (2.0 * gamma0 * kT);
}

// --------------------------- report -----------------------------------------

struct TimescaleReport {
    TimeEstimate t_dec_estimate;
    std::optional<double> t_dec_measured;
    std::optional<double> t_act_measured;
    std::optional<double> t_th;
    double t_sat{0.0};
    Regime regime{Regime::OhmicZeroT};
};

inline double saturation_time(const EnvironmentSpec& env) {
    return env.gamma0 > 0.0 ? 1.0 / env.gamma0 : std::numeric_limits<double>::infinity();
}

inline nlohmann::json to_json(const TimescaleReport& r, const EnvironmentSpec& env,
                              const OscillatorSpec& sys, double L0) {
    auto opt = [](const std::optional<double>& v) {
        return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    nlohmann::json j;
    j["regime"] = to_string(r.regime);
    j["t_dec_estimate"] = {{"kind", to_string(r.t_dec_estimate.kind)},
                           {"value", r.t_dec_estimate.kind == TimeEstimate::Kind::None
                                         ? nlohmann::json(nullptr)
                                         : nlohmann::json(r.t_dec_estimate.value)},
                           {"formula", r.t_dec_estimate.note},
                           {"warning", r.t_dec_estimate.warning}};
    j["t_dec_measured"] = opt(r.t_dec_measured);
    j["t_act_measured"] = opt(r.t_act_measured);
    j["t_th"] = opt(r.t_th);
    j["t_sat"] = std::isfinite(r.t_sat) ? nlohmann::json(r.t_sat) : nlohmann::json(nullptr);
    j["parameters"] = {{"n", env.n},
                       {"gamma0", env.gamma0},
                       {"cutoff", env.cutoff},
                       {"temperature", temperature_label(env.temperature)},
                       {"mass", sys.mass},
                       {"omega", sys.omega_bare},
                       {"L0", L0}};
    return j;
}

}  // namespace qbm
