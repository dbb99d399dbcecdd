// spectral.hpp: bath spectral density and the dissipation/noise kernels
//
//   I(ω)  = (2/π) M γ₀ ω (ω/Λ)^{n-1} exp(-ω²/Λ²)
//   η(t)  = ∫₀^∞ dω I(ω) sin ωt
//   ν(t)  = ∫₀^∞ dω I(ω) w(ω) cos ωt
//
// with the thermal weight w(ω) = 1 (T = 0), coth(βω/2) (finite T),
// 2k_BT/ω (high T) or 2T(ω)/ω for a classical bath with a
// frequency-dependent temperature profile. Units: ħ = k_B = 1.

#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qbm/errors.hpp"
#include "qbm/quadrature.hpp"

namespace qbm {

// --------------------------- Environment ------------------------------------

struct ZeroTemperature {};

struct FiniteTemperature {
    double beta{1.0};
};

struct HighTemperature {
    double kT{1.0};
};

// Classical oscillator bath whose mode at frequency ω sits at temperature T(ω).
struct ClassicalProfile {
    std::function<double(double)> temperature;
    std::string label{"custom"};
};

using Temperature =
    std::variant<ZeroTemperature, FiniteTemperature, HighTemperature, ClassicalProfile>;

struct EnvironmentSpec {
    double n{1.0};        // ohmicity exponent: 1/2 subohmic, 1 ohmic, 3 supraohmic
    double gamma0{0.0};   // coupling strength
    double cutoff{1.0};   // Λ
    Temperature temperature{ZeroTemperature{}};
    double mass_ref{1.0};  // M entering I(ω)

    // Throws DomainError on invalid parameters. γ₀ = 0 is accepted and
    // describes the closed system.
    void validate() const {
        if (!(n > 0.0)) throw DomainError("ohmicity exponent n must be > 0");
        if (!(gamma0 >= 0.0)) throw DomainError("gamma0 must be >= 0");
        if (!(cutoff > 0.0)) throw DomainError("cutoff must be > 0");
        if (!(mass_ref > 0.0)) throw DomainError("mass_ref must be > 0");
        if (auto* f = std::get_if<FiniteTemperature>(&temperature); f && !(f->beta > 0.0))
            throw DomainError("inverse temperature beta must be > 0");
        if (auto* h = std::get_if<HighTemperature>(&temperature); h && !(h->kT >= 0.0))
            throw DomainError("high-temperature kT must be >= 0");
        if (auto* c = std::get_if<ClassicalProfile>(&temperature); c && !c->temperature)
            throw DomainError("classical temperature profile is empty");
    }

    // Weak-coupling warning: the second-order coefficients assume γ₀ ≪ 1.
    bool weak_coupling_warning() const { return gamma0 >= 0.1; }

    bool is_zero_temperature() const {
        return std::holds_alternative<ZeroTemperature>(temperature);
    }
    bool is_high_temperature() const {
        return std::holds_alternative<HighTemperature>(temperature);
    }
    double high_kT() const {
        if (auto* h = std::get_if<HighTemperature>(&temperature)) return h->kT;
        throw UnsupportedRegime("environment is not in the high-temperature regime");
    }

    static EnvironmentSpec ohmic(double gamma0, double cutoff, Temperature t = ZeroTemperature{}) {
        return {1.0, gamma0, cutoff, std::move(t), 1.0};
    }
    static EnvironmentSpec subohmic(double gamma0, double cutoff, Temperature t = ZeroTemperature{}) {
        return {0.5, gamma0, cutoff, std::move(t), 1.0};
    }
    static EnvironmentSpec supraohmic(double gamma0, double cutoff, Temperature t = ZeroTemperature{}) {
        return {3.0, gamma0, cutoff, std::move(t), 1.0};
    }
};

inline std::string temperature_label(const Temperature& t) {
    struct V {
        std::string operator()(const ZeroTemperature&) const { return "zero"; }
        std::string operator()(const FiniteTemperature& f) const {
            return "finite(beta=" + std::to_string(f.beta) + ")";
        }
        std::string operator()(const HighTemperature& h) const {
            return "high(kT=" + std::to_string(h.kT) + ")";
        }
        std::string operator()(const ClassicalProfile& c) const { return "classical(" + c.label + ")"; }
    };
    return std::visit(V{}, t);
}

// --------------------------- I(ω) and w(ω) ----------------------------------

inline double spectral_density(double omega, const EnvironmentSpec& env) {
    if (omega < 0.0) throw DomainError("spectral_density: omega must be >= 0");
    if (omega == 0.0) return 0.0;
    const double x = omega / env.cutoff;
    return 2.0 / std::numbers::pi * env.mass_ref * env.gamma0 * omega * std::pow(x, env.n - 1.0) *
           std::exp(-x * x);
}

// Thermal weight multiplying I(ω) inside the noise kernel.
inline double thermal_weight(double omega, const Temperature& temperature) {
    struct V {
        double omega;
        double operator()(const ZeroTemperature&) const { return 1.0; }
        double operator()(const FiniteTemperature& f) const {
            const double y = 0.5 * f.beta * omega;
            return y > 20.0 ? 1.0 : 1.0 / std::tanh(y);
        }
        double operator()(const HighTemperature& h) const { return 2.0 * h.kT / omega; }
        double operator()(const ClassicalProfile& c) const {
            const double T = c.temperature(omega);
            if (!(T >= 0.0))
                throw DomainError("classical temperature profile returned a negative value");
            return 2.0 * T / omega;
        }
    };
    return std::visit(V{omega}, temperature);
}

// --------------------------- kernels ----------------------------------------

struct KernelSample {
    double t{0.0};
    double eta{0.0};
    double nu{0.0};
};

struct KernelOptions {
    quad::Options quadrature{};
    double filon_switch{50.0};  // Λ|t| above which the Filon rule takes over
};

// Precomputed quadrature data for one environment. Immutable after
// construction; evaluations are safe from any number of threads.
class BathKernels {
public:
    explicit BathKernels(EnvironmentSpec env, KernelOptions opt = {})
        : env_(std::move(env)), opt_(opt) {
        env_.validate();
        const double lambda = env_.cutoff;
        const double eps = std::max(opt_.quadrature.rel_tol, 1e-300);
        omega_max_ = lambda * std::max(6.0, std::sqrt(std::log(1.0 / eps)));

        // Head [0, h0], geometric panels up to Λ/4, then uniform Λ/4 panels.
        const double h0 = 1e-9 * lambda;
        breaks_.push_back(h0);
        for (double w = 2.0 * h0; w < 0.25 * lambda; w *= 2.0) breaks_.push_back(w);
        for (double w = 0.25 * lambda; w < omega_max_ - 1e-12 * lambda; w += 0.25 * lambda)
            breaks_.push_back(w);
        breaks_.push_back(omega_max_);

        auto g_eta = [this](double w) { return spectral_density(w, env_); };
        auto g_nu = [this](double w) { return noise_amplitude(w); };
        head_eta_ = quad::PowerLawHead::fit(g_eta, h0);
        head_nu_ = quad::PowerLawHead::fit(g_nu, h0);
        filon_eta_ = quad::FilonLegendre<>(g_eta, breaks_);
        filon_nu_ = quad::FilonLegendre<>(g_nu, breaks_);
        scale_eta_ = std::abs(filon_eta_.transform(0.0).real()) + head_eta_.cosine(0.0);
        scale_nu_ = std::abs(filon_nu_.transform(0.0).real()) + head_nu_.cosine(0.0);
    }

    const EnvironmentSpec& environment() const noexcept { return env_; }
    double omega_max() const noexcept { return omega_max_; }
    // ∫|I| and ∫|I w|: bounds on |η(t)| and |ν(t)| for all t.
    double eta_bound() const noexcept { return scale_eta_; }
    double nu_bound() const noexcept { return scale_nu_; }

    // I(ω) w(ω): the amplitude of the cosine transform defining ν.
    double noise_amplitude(double omega) const {
        return spectral_density(omega, env_) * thermal_weight(omega, env_.temperature);
    }

    quad::Result eta_with_error(double t) const {
        if (t < 0.0) {
            auto r = eta_with_error(-t);
            return {-r.value, r.error};
        }
        if (t == 0.0) return {0.0, 0.0};
        return transform(t, /*sine=*/true);
    }

    quad::Result nu_with_error(double t) const {
        return transform(std::abs(t), /*sine=*/false);
    }

    double eta(double t) const { return eta_with_error(t).value; }
    double nu(double t) const { return nu_with_error(t).value; }
    KernelSample sample(double t) const { return {t, eta(t), nu(t)}; }

    // Adaptive Gauss–Kronrod route, valid for any t but only economical for
    // Λ|t| below the Filon switch. Exposed for cross-checks.
    quad::Result adaptive(double t, bool sine) const {
        const auto& head = sine ? head_eta_ : head_nu_;
        const double head_value = sine ? head.sine(t) : head.cosine(t);
        quad::Result r;
        if (sine) {
            r = quad::integrate(
                [&](double w) { return spectral_density(w, env_) * std::sin(w * t); }, breaks_,
                opt_.quadrature);
        } else {
            r = quad::integrate([&](double w) { return noise_amplitude(w) * std::cos(w * t); },
                                breaks_, opt_.quadrature);
        }
        return {r.value + head_value, r.error};
    }

    // Filon–Legendre route.
    quad::Result filon(double t, bool sine) const {
        double err = 0.0;
        const auto z = (sine ? filon_eta_ : filon_nu_).transform(t, &err);
        const double head = sine ? head_eta_.sine(t) : head_nu_.cosine(t);
        return {(sine ? z.imag() : z.real()) + head, err};
    }

private:
    quad::Result transform(double t, bool sine) const {
        if (env_.gamma0 == 0.0) return {0.0, 0.0};
        if (env_.cutoff * t <= opt_.filon_switch) return adaptive(t, sine);
        auto r = filon(t, sine);
        const double scale = sine ? scale_eta_ : scale_nu_;
        if (r.error > std::max(opt_.quadrature.abs_tol, 1e3 * opt_.quadrature.rel_tol * scale))
            throw QuadratureError("Filon rule did not resolve the kernel amplitude", r.error,
                                  opt_.quadrature.rel_tol * scale);
        return r;
    }

    EnvironmentSpec env_;
    KernelOptions opt_;
    double omega_max_{0.0};
    std::vector<double> breaks_;
    double scale_eta_{0.0}, scale_nu_{0.0};  // ∫|amplitude| dω
    quad::PowerLawHead head_eta_, head_nu_;
    quad::FilonLegendre<> filon_eta_, filon_nu_;
};

inline double dissipation_kernel(double t, const EnvironmentSpec& env) {
    if (t < 0.0) throw DomainError("dissipation_kernel: t must be >= 0");
    return BathKernels(env).eta(t);
}

inline double noise_kernel(double t, const EnvironmentSpec& env) {
    if (t < 0.0) throw DomainError("noise_kernel: t must be >= 0");
    return BathKernels(env).nu(t);
}

// ν(t) for a classical bath whose oscillators sit at temperature T(ω).
template <class Profile>
double classical_noise_kernel(double t, const EnvironmentSpec& env, Profile&& profile) {
    if (t < 0.0) throw DomainError("classical_noise_kernel: t must be >= 0");
    EnvironmentSpec classical = env;
    classical.temperature = ClassicalProfile{std::forward<Profile>(profile), "profile"};
    return BathKernels(std::move(classical)).nu(t);
}

// T(ω) = ω/2: the classical bath that mimics the zero-temperature quantum one.
inline ClassicalProfile zero_point_mimic() {
    return {[](double omega) { return 0.5 * omega; }, "omega/2"};
}

}  // namespace qbm
