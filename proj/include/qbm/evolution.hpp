// evolution.hpp: moment ODEs and the grid density-matrix solver
//
// Master equation in operator form (ħ = 1):
//   ρ̇ = −i[H, ρ] − iγ[x, {p, ρ}] − MD[x, [x, ρ]] − f[x, [p, ρ]],
//   H  = p²/2M + MΩ̃²(t)x²/2.
// On the (x, x′) grid this reads
//   ∂ₜρ = (i/2M)(∂²ₓ − ∂²ₓ′)ρ − i(M/2)Ω̃²(x² − x′²)ρ − γ(x − x′)(∂ₓ − ∂ₓ′)ρ
//         − MD(x − x′)²ρ + i f (x − x′)(∂ₓ + ∂ₓ′)ρ.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "qbm/coefficients.hpp"
#include "qbm/errors.hpp"
#include "qbm/parallel.hpp"

namespace qbm {

// --------------------------- initial states ---------------------------------

struct SingleGaussian {
    double x0{0.0};
    double p0{0.0};
    double sigma{0.0};  // 0: ground-state width
};

struct SymmetricSuperposition {
    double half_separation{0.0};
    double sigma{0.0};
};

struct InitialState {
    std::variant<SingleGaussian, SymmetricSuperposition> kind{SingleGaussian{}};
    OscillatorSpec sys{};

    double sigma() const {
        const double s = std::visit([](const auto& k) { return k.sigma; }, kind);
        return s > 0.0 ? s : std::sqrt(1.0 / (2.0 * sys.mass * sys.omega_bare));
    }
    bool is_superposition() const {
        return std::holds_alternative<SymmetricSuperposition>(kind);
    }
    double half_separation() const {
        if (auto* s = std::get_if<SymmetricSuperposition>(&kind)) return s->half_separation;
        return 0.0;
    }
    void validate() const {
        sys.validate();
        const double s = std::visit([](const auto& k) { return k.sigma; }, kind);
        if (s < 0.0 || !std::isfinite(s)) throw DomainError("packet width sigma must be > 0");
        if (auto* c = std::get_if<SymmetricSuperposition>(&kind); c && !(c->half_separation >= 0.0))
            throw DomainError("half separation L0 must be >= 0");
    }

    // Unnormalized wavefunction.
    std::complex<double> psi(double x) const {
        const double s = sigma();
        auto g = [s](double y) { return std::exp(-y * y / (4.0 * s * s)); };
        if (auto* c = std::get_if<SymmetricSuperposition>(&kind))
            return g(x - c->half_separation) + g(x + c->half_separation);
        const auto& k = std::get<SingleGaussian>(kind);
        return g(x - k.x0) * std::polar(1.0, k.p0 * x);
    }
};

// Raw second moments; xp is the symmetrized ⟨xp + px⟩/2.
struct MomentState {
    double xx{0.0};
    double pp{0.0};
    double xp{0.0};
    double mean_x{0.0};
    double mean_p{0.0};
    double t{0.0};
    bool gaussian{true};

    double cxx() const { return xx - mean_x * mean_x; }
    double cpp() const { return pp - mean_p * mean_p; }
    double cxp() const { return xp - mean_x * mean_p; }
    double determinant() const { return cxx() * cpp() - cxp() * cxp(); }
};

inline MomentState initial_moments(const InitialState& s) {
    s.validate();
    const double s2 = s.sigma() * s.sigma();
    if (auto* c = std::get_if<SymmetricSuperposition>(&s.kind)) {
        const double L2 = c->half_separation * c->half_separation;
        const double S = std::exp(-L2 / (2.0 * s2));
        MomentState m;
        m.xx = (s2 + L2 + S * s2) / (1.0 + S);
        m.pp = (1.0 / (4.0 * s2) + S * (s2 - L2) / (4.0 * s2 * s2)) / (1.0 + S);
        m.gaussian = c->half_separation == 0.0;
        return m;
    }
    const auto& g = std::get<SingleGaussian>(s.kind);
    MomentState m;
    m.mean_x = g.x0;
    m.mean_p = g.p0;
    m.xx = s2 + g.x0 * g.x0;
    m.pp = 1.0 / (4.0 * s2) + g.p0 * g.p0;
    m.xp = g.x0 * g.p0;
    return m;
}

// --------------------------- observables ------------------------------------

struct ObservablePoint {
    double t{0.0};
    double xx{0.0};
    double pp{0.0};
    double xp{0.0};
    double energy{0.0};
    double energy_spread{std::numeric_limits<double>::quiet_NaN()};
    double linear_entropy{std::numeric_limits<double>::quiet_NaN()};
};

using ObservableTrajectory = std::vector<ObservablePoint>;

// Ω̃²(t) entering H; the bare value when requested or t lies outside the table.
inline double hamiltonian_omega_sq(const CoefficientSeries& c, double t, bool bare) {
    const double w = c.sys().omega_bare;
    return bare ? w * w : c.omega_sq(t);
}

inline ObservablePoint observables(const MomentState& m, const OscillatorSpec& sys,
                                   const CoefficientSeries& coeffs, bool bare_energy = false) {
    const double M = sys.mass;
    const double a = 1.0 / (2.0 * M), b = 0.5 * M * hamiltonian_omega_sq(coeffs, m.t, bare_energy);
    ObservablePoint o{m.t, m.xx, m.pp, m.xp, a * m.pp + b * m.xx};
    if (m.gaussian) {
        const double cxx = m.cxx(), cpp = m.cpp(), cxp = m.cxp();
        double var = 2 * a * a * cpp * cpp + 2 * b * b * cxx * cxx + 2 * a * b * (2 * cxp * cxp - 0.5);
        var += 4 * a * a * m.mean_p * m.mean_p * cpp + 4 * b * b * m.mean_x * m.mean_x * cxx +
               8 * a * b * m.mean_x * m.mean_p * cxp;
        o.energy_spread = std::sqrt(std::max(var, 0.0));
        o.linear_entropy = 1.0 - 1.0 / (2.0 * std::sqrt(std::max(m.determinant(), 0.0)));
    }
    return o;
}

inline void write_trajectory_csv(std::ostream& os, const ObservableTrajectory& traj,
                                 bool with_entropy = true) {
    os << (with_entropy ? "t,xx,pp,xp,E,dE,Sl\n" : "t,xx,pp,xp,E,dE\n");
    os.precision(17);
    for (const auto& p : traj) {
        os << p.t << ',' << p.xx << ',' << p.pp << ',' << p.xp << ',' << p.energy << ','
           << p.energy_spread;
        if (with_entropy) os << ',' << p.linear_entropy;
        os << '\n';
    }
}

// --------------------------- moment engine ----------------------------------

struct MomentOptions {
    bool refine_jolt{true};       // dt ≤ 0.1/Λ for t < 10/Λ
    std::size_t record_every{1};  // keep every k-th step (the final state is always kept)
    double uncertainty_tol{1e-6};
    // The second-order equation is not exactly positivity preserving; the
    // uncertainty check also allows a relative defect of
    // slack·(max|γ| + 2 max|f|)/Ω, the size of the stationary shifts they cause.
    // Steps that break the covariance outright are still caught.
    double perturbative_slack{1.0};
};

using MomentTrajectory = std::vector<MomentState>;

// Time derivative of (xx, xp, pp, ⟨x⟩, ⟨p⟩) for given coefficient values.
inline MomentState moment_flow(const MomentState& m, const OscillatorSpec& sys, double omega_sq,
                               const CoefficientValues& c) {
    const double M = sys.mass;
    MomentState d;
    d.t = 1.0;
    d.xx = 2.0 * m.xp / M;
    d.xp = m.pp / M - M * omega_sq * m.xx - 2.0 * c.gamma * m.xp - c.f_anomalous;
    d.pp = -2.0 * M * omega_sq * m.xp - 4.0 * c.gamma * m.pp + 2.0 * M * c.d_normal;
    d.mean_x = m.mean_p / M;
    d.mean_p = -M * omega_sq * m.mean_x - 2.0 * c.gamma * m.mean_p;
    return d;
}

namespace detail {

inline MomentState axpy(const MomentState& m, double h, const MomentState& d) {
    MomentState r = m;
    r.xx += h * d.xx;
    r.pp += h * d.pp;
    r.xp += h * d.xp;
    r.mean_x += h * d.mean_x;
    r.mean_p += h * d.mean_p;
    r.t += h * d.t;
    return r;
}

// Step sequence covering [0, t_end]: dt, refined to 0.1/Λ inside the jolt window.
inline std::vector<double> step_times(double t_end, double dt, double cutoff, bool refine) {
    if (!(dt > 0.0)) throw DomainError("time step must be > 0");
    if (!(t_end > 0.0)) throw DomainError("t_end must be > 0");
    std::vector<double> ts{0.0};
    const double jolt_end = refine ? std::min(t_end, 10.0 / cutoff) : 0.0;
    const double dj = std::min(dt, 0.1 / cutoff);
    if (jolt_end > 0.0) {
        const auto nj = static_cast<std::size_t>(std::ceil(jolt_end / dj - 1e-9));
        for (std::size_t k = 1; k <= nj; ++k) ts.push_back(jolt_end * k / nj);
    }
    const double rest = t_end - ts.back();
    if (rest > 0.0) {
        const auto n = static_cast<std::size_t>(std::ceil(rest / dt - 1e-9));
        const double t0 = ts.back();
        for (std::size_t k = 1; k <= n; ++k) ts.push_back(k == n ? t_end : t0 + rest * k / n);
    }
    return ts;
}

inline void require_cover(const CoefficientSeries& c, double t_end) {
    if (t_end > c.t_max() * (1.0 + 1e-12))
        throw RangeError("coefficient table does not cover the requested time span");
}

}  // namespace detail

inline MomentTrajectory evolve_moments(const MomentState& m0, const CoefficientSeries& coeffs,
                                       double t_end, double dt, const MomentOptions& opt = {}) {
    detail::require_cover(coeffs, t_end);
    const auto& sys = coeffs.sys();
    const auto ts = detail::step_times(t_end, dt, coeffs.env().cutoff, opt.refine_jolt);
    const double tmax = coeffs.t_max();
    double g_max = 0.0, f_max = 0.0;
    for (double g : coeffs.gamma()) g_max = std::max(g_max, std::abs(g));
    for (double f : coeffs.f_anomalous()) f_max = std::max(f_max, std::abs(f));
    const double defect = opt.perturbative_slack * (g_max + 2.0 * f_max) / sys.omega_bare;
    const double floor = 0.25 * std::max(0.0, 1.0 - defect);
    auto rhs = [&](const MomentState& m) {
        const double t = std::min(m.t, tmax);
        return moment_flow(m, sys, coeffs.omega_sq(t), coeffs.at(t));
    };
    MomentTrajectory out{m0};
    out.front().t = 0.0;
    MomentState m = out.front();
    const std::size_t stride = std::max<std::size_t>(opt.record_every, 1);
    for (std::size_t k = 1; k < ts.size(); ++k) {
        const double h = ts[k] - ts[k - 1];
        const auto k1 = rhs(m);
        const auto k2 = rhs(detail::axpy(m, 0.5 * h, k1));
        const auto k3 = rhs(detail::axpy(m, 0.5 * h, k2));
        const auto k4 = rhs(detail::axpy(m, h, k3));
        m.xx += h / 6.0 * (k1.xx + 2 * k2.xx + 2 * k3.xx + k4.xx);
        m.pp += h / 6.0 * (k1.pp + 2 * k2.pp + 2 * k3.pp + k4.pp);
        m.xp += h / 6.0 * (k1.xp + 2 * k2.xp + 2 * k3.xp + k4.xp);
        m.mean_x += h / 6.0 * (k1.mean_x + 2 * k2.mean_x + 2 * k3.mean_x + k4.mean_x);
        m.mean_p += h / 6.0 * (k1.mean_p + 2 * k2.mean_p + 2 * k3.mean_p + k4.mean_p);
        m.t = ts[k];
        if (!std::isfinite(m.xx) || !std::isfinite(m.pp) || !std::isfinite(m.xp))
            throw IntegratorError("moment integration produced non-finite values at t = " +
                                  std::to_string(m.t));
        if (m.determinant() < floor - opt.uncertainty_tol * std::max(1.0, m.cxx() * m.cpp()))
            throw IntegratorError("uncertainty relation violated at t = " + std::to_string(m.t) +
                                  " (xx*pp - xp^2 = " + std::to_string(m.determinant()) +
                                  "); reduce dt or the coupling");
        if (k % stride == 0 || k + 1 == ts.size()) out.push_back(m);
    }
    return out;
}

inline ObservableTrajectory moment_observables(const MomentTrajectory& traj,
                                               const CoefficientSeries& coeffs,
                                               bool bare_energy = false) {
    ObservableTrajectory out;
    out.reserve(traj.size());
    for (const auto& m : traj) out.push_back(observables(m, coeffs.sys(), coeffs, bare_energy));
    return out;
}

// --------------------------- grid engine ------------------------------------

struct GridState {
    std::size_t n{0};
    double l_box{0.0};
    double t{0.0};
    std::vector<std::complex<double>> rho;  // row-major, rho[i*n + j] = ρ(x_i, x′_j)

    double dx() const { return 2.0 * l_box / static_cast<double>(n - 1); }
    double x(std::size_t i) const { return -l_box + dx() * static_cast<double>(i); }
    std::complex<double>& operator()(std::size_t i, std::size_t j) { return rho[i * n + j]; }
    const std::complex<double>& operator()(std::size_t i, std::size_t j) const {
        return rho[i * n + j];
    }

    std::complex<double> trace() const {
        std::complex<double> s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += (*this)(i, i);
        return s * dx();
    }
    double purity() const {
        double s = 0.0;
        for (const auto& z : rho) s += std::norm(z);
        return s * dx() * dx();
    }
    double hermiticity_defect() const {
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j)
                d = std::max(d, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
        return d;
    }
};

// Pure state |ψ⟩⟨ψ| sampled on the grid and normalized to unit discrete trace.
inline GridState make_grid_state(const InitialState& s, std::size_t n, double l_box) {
    s.validate();
    if (n < 8) throw DomainError("grid needs at least 8 points per axis");
    if (!(l_box > 0.0)) throw DomainError("box half-width must be > 0");
    GridState g{n, l_box, 0.0, std::vector<std::complex<double>>(n * n)};
    std::vector<std::complex<double>> psi(n);
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        psi[i] = s.psi(g.x(i));
        norm += std::norm(psi[i]);
    }
    norm *= g.dx();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) g(i, j) = psi[i] * std::conj(psi[j]) / norm;
    return g;
}

namespace detail {

// Fourth-order central stencils with zero values outside the box.
template <class Get>
std::complex<double> d1(Get&& v, std::size_t k, std::size_t n, double dx) {
    auto at = [&](std::ptrdiff_t i) {
        return (i < 0 || i >= static_cast<std::ptrdiff_t>(n)) ? std::complex<double>{} : v(i);
    };
    const auto i = static_cast<std::ptrdiff_t>(k);
    return (-at(i + 2) + 8.0 * at(i + 1) - 8.0 * at(i - 1) + at(i - 2)) / (12.0 * dx);
}

template <class Get>
std::complex<double> d2(Get&& v, std::size_t k, std::size_t n, double dx) {
    auto at = [&](std::ptrdiff_t i) {
        return (i < 0 || i >= static_cast<std::ptrdiff_t>(n)) ? std::complex<double>{} : v(i);
    };
    const auto i = static_cast<std::ptrdiff_t>(k);
    return (-at(i + 2) + 16.0 * at(i + 1) - 30.0 * at(i) + 16.0 * at(i - 1) - at(i - 2)) /
           (12.0 * dx * dx);
}

struct GridCoefficients {
    double omega_sq, gamma, d, f;
};

inline void grid_rhs(const GridState& s, const OscillatorSpec& sys, const GridCoefficients& c,
                     std::vector<std::complex<double>>& out, std::size_t workers) {
    const std::size_t n = s.n;
    const double dx = s.dx(), M = sys.mass;
    const std::complex<double> I(0.0, 1.0);
    parallel_for(
        0, n,
        [&](std::size_t i) {
            const double xi = s.x(i);
            for (std::size_t j = 0; j < n; ++j) {
                const double xj = s.x(j);
                auto col = [&](std::ptrdiff_t k) { return s.rho[k * n + j]; };
                auto row = [&](std::ptrdiff_t k) { return s.rho[i * n + k]; };
                const auto dxx = d2(col, i, n, dx), dyy = d2(row, j, n, dx);
                const auto dx1 = d1(col, i, n, dx), dy1 = d1(row, j, n, dx);
                const auto r = s.rho[i * n + j];
                const double u = xi - xj;
                out[i * n + j] = I / (2.0 * M) * (dxx - dyy) -
                                 I * (0.5 * M * c.omega_sq * (xi * xi - xj * xj)) * r -
                                 c.gamma * u * (dx1 - dy1) - M * c.d * u * u * r +
                                 I * c.f * u * (dx1 + dy1);
            }
        },
        workers);
}

}  // namespace detail

// ⟨x²⟩, ⟨p²⟩, ⟨xp⟩_sym, ⟨H⟩, ΔE and S_l from the discrete density matrix.
inline ObservablePoint observables(const GridState& s, const OscillatorSpec& sys,
                                   const CoefficientSeries& coeffs, bool bare_energy = false,
                                   double hermiticity_tol = 1e-8) {
    const std::size_t n = s.n;
    const double dx = s.dx(), M = sys.mass;
    double peak = 0.0;
    for (const auto& z : s.rho) peak = std::max(peak, std::abs(z));
    if (s.hermiticity_defect() > hermiticity_tol * std::max(peak, 1.0))
        throw NumericError("density matrix is not Hermitian within tolerance");
    const double w2 = hamiltonian_omega_sq(coeffs, std::min(s.t, coeffs.t_max()), bare_energy);
    const double a = 1.0 / (2.0 * M), b = 0.5 * M * w2;

    double xx = 0, pp = 0, xp = 0;
    for (std::size_t i = 0; i < n; ++i) {
        auto col = [&](std::ptrdiff_t k) { return s.rho[k * n + i]; };
        const double x = s.x(i);
        xx += x * x * s(i, i).real();
        pp -= detail::d2(col, i, n, dx).real();
        xp += x * detail::d1(col, i, n, dx).imag();
    }
    xx *= dx;
    pp *= dx;
    xp *= dx;
    const double E = a * pp + b * xx;

    // ⟨H²⟩ = Tr(H H ρ), applying H along the first index twice.
    std::vector<std::complex<double>> h1(n * n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
            auto col = [&](std::ptrdiff_t k) { return s.rho[k * n + j]; };
            const double x = s.x(i);
            h1[i * n + j] = -a * detail::d2(col, i, n, dx) + b * x * x * s.rho[i * n + j];
        }
    double h2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        auto col = [&](std::ptrdiff_t k) { return h1[k * n + i]; };
        const double x = s.x(i);
        h2 += (-a * detail::d2(col, i, n, dx) + b * x * x * h1[i * n + i]).real();
    }
    h2 *= dx;
    ObservablePoint o{s.t, xx, pp, xp, E};
    o.energy_spread = std::sqrt(std::max(h2 - E * E, 0.0));
    o.linear_entropy = 1.0 - s.purity();
    return o;
}

struct GridOptions {
    bool refine_jolt{true};
    std::size_t record_every{1};      // observables every k-th step
    std::size_t snapshot_every{0};    // 0: keep only the final state
    double boundary_tolerance{1e-4};  // relative weight near the box edge
    double stability_margin{2.5};     // |λ|·dt bound for RK4
    bool bare_energy{false};
    std::size_t workers{0};
};

struct GridRun {
    ObservableTrajectory observables;
    std::vector<GridState> snapshots;
    GridState final_state;
    bool boundary_warning{false};
    double max_boundary_weight{0.0};
};

// Upper bound on the spectral radius of the grid generator.
inline double grid_spectral_radius(const GridState& s, const OscillatorSpec& sys,
                                   const detail::GridCoefficients& c) {
    const double dx = s.dx(), L = s.l_box, M = sys.mass;
    const double kinetic = 16.0 / (3.0 * M * dx * dx);
    const double potential = 0.5 * M * std::abs(c.omega_sq) * L * L;
    const double drift = 1.3722 / dx;  // max |symbol| of the 4th-order first derivative
    return kinetic + potential + std::abs(c.gamma) * 2.0 * L * 2.0 * drift +
           M * std::abs(c.d) * 4.0 * L * L + std::abs(c.f) * 2.0 * L * 2.0 * drift;
}

// Weight of |ρ| within four points of the box edge, relative to the total.
inline double boundary_weight(const GridState& s) {
    const std::size_t n = s.n, w = 4;
    double edge = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double a = std::abs(s(i, j));
            total += a;
            if (i < w || j < w || i >= n - w || j >= n - w) edge += a;
        }
    return total > 0.0 ? edge / total : 0.0;
}

inline GridRun evolve_grid(const GridState& rho0, const CoefficientSeries& coeffs, double t_end,
                           double dt, const GridOptions& opt = {}) {
    detail::require_cover(coeffs, t_end);
    const auto& sys = coeffs.sys();
    const auto ts = detail::step_times(t_end, dt, coeffs.env().cutoff, opt.refine_jolt);
    const double tmax = coeffs.t_max();
    auto coef = [&](double t) {
        t = std::min(t, tmax);
        const auto v = coeffs.at(t);
        return detail::GridCoefficients{coeffs.omega_sq(t), v.gamma, v.d_normal, v.f_anomalous};
    };

    // Stability over the coefficient table, before any stepping.
    double worst = 0.0;
    for (std::size_t k = 1; k < ts.size(); ++k) {
        const double h = ts[k] - ts[k - 1];
        for (double t : {ts[k - 1], 0.5 * (ts[k - 1] + ts[k]), ts[k]})
            worst = std::max(worst, grid_spectral_radius(rho0, sys, coef(t)) * h);
    }
    if (worst > opt.stability_margin)
        throw StabilityError("grid time step exceeds the RK4 stability bound (|lambda| dt = " +
                             std::to_string(worst) + ")");

    GridRun run;
    GridState s = rho0;
    s.t = 0.0;
    const std::size_t nn = s.n * s.n;
    std::vector<std::complex<double>> k1(nn), k2(nn), k3(nn), k4(nn);
    GridState tmp = s;
    auto stage = [&](const std::vector<std::complex<double>>& k, double h, double t) {
        for (std::size_t q = 0; q < nn; ++q) tmp.rho[q] = s.rho[q] + h * k[q];
        tmp.t = t;
    };
    const std::size_t stride = std::max<std::size_t>(opt.record_every, 1);
    run.observables.push_back(observables(s, sys, coeffs, opt.bare_energy));
    for (std::size_t k = 1; k < ts.size(); ++k) {
        const double t0 = ts[k - 1], h = ts[k] - t0;
        detail::grid_rhs(s, sys, coef(t0), k1, opt.workers);
        stage(k1, 0.5 * h, t0 + 0.5 * h);
        detail::grid_rhs(tmp, sys, coef(t0 + 0.5 * h), k2, opt.workers);
        stage(k2, 0.5 * h, t0 + 0.5 * h);
        detail::grid_rhs(tmp, sys, coef(t0 + 0.5 * h), k3, opt.workers);
        stage(k3, h, t0 + h);
        detail::grid_rhs(tmp, sys, coef(t0 + h), k4, opt.workers);
        for (std::size_t q = 0; q < nn; ++q)
            s.rho[q] += h / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
        s.t = ts[k];
        // Restore exact Hermiticity lost to rounding.
        for (std::size_t i = 0; i < s.n; ++i)
            for (std::size_t j = i; j < s.n; ++j) {
                const auto avg = 0.5 * (s(i, j) + std::conj(s(j, i)));
                s(i, j) = avg;
                s(j, i) = std::conj(avg);
            }
        const bool last = k + 1 == ts.size();
        if (k % stride == 0 || last) {
            if (!std::isfinite(s.trace().real()))
                throw IntegratorError("grid integration produced non-finite values");
            const double bw = boundary_weight(s);
            run.max_boundary_weight = std::max(run.max_boundary_weight, bw);
            if (bw > opt.boundary_tolerance) run.boundary_warning = true;
            run.observables.push_back(observables(s, sys, coeffs, opt.bare_energy));
        }
        if (opt.snapshot_every > 0 && k % opt.snapshot_every == 0) run.snapshots.push_back(s);
    }
    run.final_state = std::move(s);
    return run;
}

// Interference contrast: weight of the x > 0 > x′ quadrant relative to the
// geometric mean of the two diagonal quadrants. Validation aid only.
inline double grid_coherence(const GridState& s) {
    double off = 0.0, pos = 0.0, neg = 0.0;
    for (std::size_t i = 0; i < s.n; ++i)
        for (std::size_t j = 0; j < s.n; ++j) {
            const double xi = s.x(i), xj = s.x(j), a = std::abs(s(i, j));
            if (xi > 0 && xj < 0) off += a;
            else if (xi > 0 && xj > 0) pos += a;
            else if (xi < 0 && xj < 0) neg += a;
        }
    return pos > 0 && neg > 0 ? off / std::sqrt(pos * neg) : 0.0;
}

// --------------------------- snapshots --------------------------------------

static_assert(std::endian::native == std::endian::little,
              "snapshot I/O assumes a little-endian host");

inline void write_snapshot(std::ostream& os, const GridState& s) {
    char header[32] = {'Q', 'B', 'M', 'G'};
    const auto n = static_cast<std::uint32_t>(s.n);
    std::memcpy(header + 4, &n, 4);
    std::memcpy(header + 8, &s.l_box, 8);
    std::memcpy(header + 16, &s.t, 8);
    os.write(header, 32);
    for (const auto& z : s.rho) {
        const float re = static_cast<float>(z.real()), im = static_cast<float>(z.imag());
        os.write(reinterpret_cast<const char*>(&re), 4);
        os.write(reinterpret_cast<const char*>(&im), 4);
    }
    if (!os) throw std::runtime_error("failed to write grid snapshot");
}

inline GridState read_snapshot(std::istream& is) {
    char header[32];
    if (!is.read(header, 32) || std::memcmp(header, "QBMG", 4) != 0)
        throw DomainError("not a grid snapshot");
    std::uint32_t n = 0;
    GridState s;
    std::memcpy(&n, header + 4, 4);
    std::memcpy(&s.l_box, header + 8, 8);
    std::memcpy(&s.t, header + 16, 8);
    s.n = n;
    s.rho.resize(static_cast<std::size_t>(n) * n);
    for (auto& z : s.rho) {
        float re = 0, im = 0;
        is.read(reinterpret_cast<char*>(&re), 4);
        is.read(reinterpret_cast<char*>(&im), 4);
        z = {re, im};
    }
    if (!is) throw DomainError("truncated grid snapshot");
    return s;
}

}  // namespace qbm
