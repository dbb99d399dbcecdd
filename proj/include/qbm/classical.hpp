// classical.hpp: classical Fokker–Planck comparator
//
//   ∂ₜW = −(p/M)∂ₓW + MΩ²x ∂ₚW + 2γ ∂ₚ(pW) + d_pp ∂²ₚW  [− f ∂²ₓₚW]
//
// The bracketed cross-diffusion term is the Wigner image of the anomalous
// term of the quantum equation; it is off unless requested.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "qbm/coefficients.hpp"
#include "qbm/errors.hpp"
#include "qbm/evolution.hpp"
#include "qbm/parallel.hpp"

namespace qbm {

struct PhaseSpaceState {
    std::size_t nx{0}, np{0};
    double x_max{0.0}, p_max{0.0};
    double t{0.0};
    std::vector<double> w;  // row-major, w[i*np + j] = W(x_i, p_j)

    double dx() const { return 2.0 * x_max / static_cast<double>(nx - 1); }
    double dp() const { return 2.0 * p_max / static_cast<double>(np - 1); }
    double x(std::size_t i) const { return -x_max + dx() * static_cast<double>(i); }
    double p(std::size_t j) const { return -p_max + dp() * static_cast<double>(j); }
    double& operator()(std::size_t i, std::size_t j) { return w[i * np + j]; }
    double operator()(std::size_t i, std::size_t j) const { return w[i * np + j]; }

    double norm() const {
        double s = 0.0;
        for (double v : w) s += v;
        return s * dx() * dp();
    }
    double min_value() const { return *std::min_element(w.begin(), w.end()); }
};

// Normalized Gaussian with the given means and variances (uncorrelated).
inline PhaseSpaceState make_phase_space_gaussian(std::size_t nx, std::size_t np, double x_max,
                                                 double p_max, double x0, double p0,
                                                 double var_x, double var_p) {
    if (nx < 8 || np < 8) throw DomainError("phase-space grid needs at least 8 points per axis");
    if (!(x_max > 0.0 && p_max > 0.0)) throw DomainError("phase-space box must be positive");
    if (!(var_x > 0.0 && var_p > 0.0)) throw DomainError("variances must be > 0");
    PhaseSpaceState s{nx, np, x_max, p_max, 0.0, std::vector<double>(nx * np)};
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < np; ++j) {
            const double u = s.x(i) - x0, v = s.p(j) - p0;
            s(i, j) = std::exp(-u * u / (2 * var_x) - v * v / (2 * var_p));
        }
    const double z = s.norm();
    for (double& v : s.w) v /= z;
    return s;
}

// Classical analogue of a quantum initial state: same means and variances.
inline PhaseSpaceState make_phase_space_state(const InitialState& init, std::size_t nx,
                                              std::size_t np, double x_max, double p_max) {
    const auto m = initial_moments(init);
    return make_phase_space_gaussian(nx, np, x_max, p_max, m.mean_x, m.mean_p, m.cxx(), m.cpp());
}

struct FokkerPlanckCoefficients {
    double omega_sq{1.0};
    double gamma{0.0};
    double d_pp{0.0};
    double f{0.0};
};

// d/dt of (xx, xp, pp) under the printed classical observable flow
//   ∂ₜ⟨A⟩ = −⟨{H, A}⟩ + d_pp⟨∂²ₚA⟩ − 2γ⟨p∂ₚA⟩,
// with the means carried along.
inline MomentState classical_moment_flow(const MomentState& m, const OscillatorSpec& sys,
                                         double gamma0, double d_pp) {
    const double M = sys.mass, w2 = sys.omega_bare * sys.omega_bare;
    MomentState d;
    d.t = 1.0;
    d.xx = 2.0 * m.xp / M;
    d.xp = m.pp / M - M * w2 * m.xx - 2.0 * gamma0 * m.xp;
    d.pp = -2.0 * M * w2 * m.xp - 4.0 * gamma0 * m.pp + 2.0 * d_pp;
    d.mean_x = m.mean_p / M;
    d.mean_p = -M * w2 * m.mean_x - 2.0 * gamma0 * m.mean_p;
    return d;
}

inline MomentTrajectory integrate_classical_moments(const MomentState& m0,
                                                    const OscillatorSpec& sys, double gamma0,
                                                    double d_pp, double t_end, double dt,
                                                    std::size_t record_every = 1) {
    if (!(dt > 0.0) || !(t_end > 0.0)) throw DomainError("t_end and dt must be > 0");
    const auto n = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
    const double h = t_end / static_cast<double>(n);
    MomentTrajectory out{m0};
    MomentState m = m0;
    m.t = 0.0;
    out.front().t = 0.0;
    auto f = [&](const MomentState& s) { return classical_moment_flow(s, sys, gamma0, d_pp); };
    for (std::size_t k = 1; k <= n; ++k) {
        const auto k1 = f(m), k2 = f(detail::axpy(m, 0.5 * h, k1)),
                   k3 = f(detail::axpy(m, 0.5 * h, k2)), k4 = f(detail::axpy(m, h, k3));
        m = detail::axpy(m, h / 6.0, k1);
        m = detail::axpy(m, h / 3.0, k2);
        m = detail::axpy(m, h / 3.0, k3);
        m = detail::axpy(m, h / 6.0, k4);
        m.t = h * static_cast<double>(k);
        if (k % std::max<std::size_t>(record_every, 1) == 0 || k == n) out.push_back(m);
    }
    return out;
}

// Moments and classical energy of a phase-space density.
inline ObservablePoint phase_space_observables(const PhaseSpaceState& s, const OscillatorSpec& sys,
                                               double omega_sq) {
    const double M = sys.mass, a = 1.0 / (2.0 * M), b = 0.5 * M * omega_sq;
    double z = 0, xx = 0, pp = 0, xp = 0, h1 = 0, h2 = 0;
    for (std::size_t i = 0; i < s.nx; ++i)
        for (std::size_t j = 0; j < s.np; ++j) {
            const double x = s.x(i), p = s.p(j), w = s(i, j);
            const double H = a * p * p + b * x * x;
            z += w;
            xx += x * x * w;
            pp += p * p * w;
            xp += x * p * w;
            h1 += H * w;
            h2 += H * H * w;
        }
    const double c = s.dx() * s.dp();
    ObservablePoint o{s.t, xx * c, pp * c, xp * c, h1 * c};
    o.energy_spread = std::sqrt(std::max(h2 * c - o.energy * o.energy, 0.0));
    return o;
}

struct FokkerPlanckOptions {
    bool anomalous{false};  // include the −f ∂²ₓₚW term
    std::size_t record_every{1};
    std::size_t workers{0};
};

struct FokkerPlanckRun {
    ObservableTrajectory observables;
    PhaseSpaceState final_state;
};

namespace detail {

inline void fokker_planck_rhs(const PhaseSpaceState& s, const OscillatorSpec& sys,
                              const FokkerPlanckCoefficients& c, bool anomalous,
                              std::vector<double>& out, std::size_t workers) {
    const std::size_t nx = s.nx, np = s.np;
    const double dx = s.dx(), dp = s.dp(), M = sys.mass;
    auto at = [&](std::ptrdiff_t i, std::ptrdiff_t j) {
        if (i < 0 || j < 0 || i >= static_cast<std::ptrdiff_t>(nx) ||
            j >= static_cast<std::ptrdiff_t>(np))
            return 0.0;
        return s.w[static_cast<std::size_t>(i) * np + static_cast<std::size_t>(j)];
    };
    auto c1 = [](double m2, double m1, double p1, double p2, double h) {
        return (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
    };
    parallel_for(
        0, nx,
        [&](std::size_t iu) {
            const auto i = static_cast<std::ptrdiff_t>(iu);
            const double x = s.x(iu);
            for (std::size_t ju = 0; ju < np; ++ju) {
                const auto j = static_cast<std::ptrdiff_t>(ju);
                const double p = s.p(ju);
                // −(p/M)∂ₓW
                double r = -(p / M) * c1(at(i - 2, j), at(i - 1, j), at(i + 1, j), at(i + 2, j), dx);
                // ∂ₚ[(MΩ²x + 2γp)W]
                auto flux = [&](std::ptrdiff_t jj) {
                    return (M * c.omega_sq * x + 2.0 * c.gamma * s.p(0) +
                            2.0 * c.gamma * dp * static_cast<double>(jj)) *
                           at(i, jj);
                };
                r += c1(flux(j - 2), flux(j - 1), flux(j + 1), flux(j + 2), dp);
                r += c.d_pp *
                     (-at(i, j + 2) + 16.0 * at(i, j + 1) - 30.0 * at(i, j) + 16.0 * at(i, j - 1) -
                      at(i, j - 2)) /
                     (12.0 * dp * dp);
                if (anomalous && c.f != 0.0) {
                    auto dpx = [&](std::ptrdiff_t ii) {
                        return c1(at(ii, j - 2), at(ii, j - 1), at(ii, j + 1), at(ii, j + 2), dp);
                    };
                    r -= c.f * c1(dpx(i - 2), dpx(i - 1), dpx(i + 1), dpx(i + 2), dx);
                }
                out[iu * np + ju] = r;
            }
        },
        workers);
}

}  // namespace detail

// dt ≤ min(dx/v_max, dp/F_max, dp²/(2 d_pp)).
inline double fokker_planck_max_step(const PhaseSpaceState& s, const OscillatorSpec& sys,
                                     const FokkerPlanckCoefficients& c) {
    const double vmax = s.p_max / sys.mass;
    const double fmax = sys.mass * std::abs(c.omega_sq) * s.x_max + 2.0 * std::abs(c.gamma) * s.p_max;
    double bound = std::numeric_limits<double>::infinity();
    if (vmax > 0) bound = std::min(bound, s.dx() / vmax);
    if (fmax > 0) bound = std::min(bound, s.dp() / fmax);
    if (c.d_pp > 0) bound = std::min(bound, s.dp() * s.dp() / (2.0 * c.d_pp));
    if (c.f != 0) bound = std::min(bound, s.dx() * s.dp() / (2.0 * std::abs(c.f)));
    return bound;
}

// General driver: coefficients supplied as a function of time.
template <class CoefFn>
FokkerPlanckRun evolve_fokker_planck(const PhaseSpaceState& w0, const OscillatorSpec& sys,
                                     CoefFn&& coef, double t_end, double dt,
                                     const FokkerPlanckOptions& opt = {}) {
    sys.validate();
    if (!(dt > 0.0) || !(t_end > 0.0)) throw DomainError("t_end and dt must be > 0");
    const auto n = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
    const double h = t_end / static_cast<double>(n);
    for (std::size_t k = 0; k <= n; ++k) {
        const double t = h * static_cast<double>(k);
        if (h > fokker_planck_max_step(w0, sys, coef(t)) * (1.0 + 1e-12))
            throw StabilityError("Fokker-Planck step exceeds the stability bound at t = " +
                                 std::to_string(t));
    }
    FokkerPlanckRun run;
    PhaseSpaceState s = w0, tmp = w0;
    s.t = 0.0;
    const std::size_t nn = s.w.size();
    std::vector<double> k1(nn), k2(nn), k3(nn), k4(nn);
    run.observables.push_back(phase_space_observables(s, sys, coef(0.0).omega_sq));
    for (std::size_t k = 1; k <= n; ++k) {
        const double t0 = h * static_cast<double>(k - 1);
        auto stage = [&](const std::vector<double>& d, double a) {
            for (std::size_t q = 0; q < nn; ++q) tmp.w[q] = s.w[q] + a * d[q];
        };
        detail::fokker_planck_rhs(s, sys, coef(t0), opt.anomalous, k1, opt.workers);
        stage(k1, 0.5 * h);
        detail::fokker_planck_rhs(tmp, sys, coef(t0 + 0.5 * h), opt.anomalous, k2, opt.workers);
        stage(k2, 0.5 * h);
        detail::fokker_planck_rhs(tmp, sys, coef(t0 + 0.5 * h), opt.anomalous, k3, opt.workers);
        stage(k3, h);
        detail::fokker_planck_rhs(tmp, sys, coef(t0 + h), opt.anomalous, k4, opt.workers);
        for (std::size_t q = 0; q < nn; ++q)
            s.w[q] += h / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
        s.t = t0 + h;
        if (!std::isfinite(s.w[nn / 2])) throw IntegratorError("Fokker-Planck integration diverged");
        if (k % std::max<std::size_t>(opt.record_every, 1) == 0 || k == n)
            run.observables.push_back(phase_space_observables(s, sys, coef(s.t).omega_sq));
    }
    run.final_state = std::move(s);
    return run;
}

// Constant coefficients: friction γ₀ and momentum diffusion d_pp.
inline FokkerPlanckRun evolve_fokker_planck(const PhaseSpaceState& w0, const OscillatorSpec& sys,
                                            double gamma0, double d_pp, double t_end, double dt,
                                            const FokkerPlanckOptions& opt = {}) {
    if (!(d_pp >= 0.0)) throw DomainError("momentum diffusion must be >= 0");
    const FokkerPlanckCoefficients c{sys.omega_bare * sys.omega_bare, gamma0, d_pp, 0.0};
    return evolve_fokker_planck(w0, sys, [c](double) { return c; }, t_end, dt, opt);
}

// Time-dependent coefficients from a table: d_pp = M·D(t), f(t), Ω̃²(t).
inline FokkerPlanckRun evolve_fokker_planck(const PhaseSpaceState& w0,
                                            const CoefficientSeries& coeffs, double t_end,
                                            double dt, const FokkerPlanckOptions& opt = {}) {
    detail::require_cover(coeffs, t_end);
    const double M = coeffs.sys().mass, tmax = coeffs.t_max();
    auto coef = [&](double t) {
        t = std::min(t, tmax);
        const auto v = coeffs.at(t);
        return FokkerPlanckCoefficients{coeffs.omega_sq(t), v.gamma, M * v.d_normal,
                                        v.f_anomalous};
    };
    return evolve_fokker_planck(w0, coeffs.sys(), coef, t_end, dt, opt);
}

// Strictly classical bath at T = 0: no fluctuations at all.
inline FokkerPlanckCoefficients classical_zero_temperature(const EnvironmentSpec& env,
                                                           const OscillatorSpec& sys) {
    return {sys.omega_bare * sys.omega_bare, env.gamma0, 0.0, 0.0};
}

}  // namespace qbm
