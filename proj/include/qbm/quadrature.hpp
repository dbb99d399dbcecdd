// quadrature.hpp: adaptive Gauss–Kronrod and Filon–Legendre rules for
// smooth and oscillatory integrals on finite panels.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <queue>
#include <span>
#include <vector>

#include "qbm/errors.hpp"

namespace qbm::quad {

struct Result {
    double value{0.0};
    double error{0.0};
};

struct Options {
    double rel_tol{1e-10};            // relative to the integral of |f|
    double abs_tol{0.0};
    std::size_t max_intervals{4000};
};

// --------------------------- Gauss–Legendre ---------------------------------

template <std::size_t N>
struct GaussLegendre {
    std::array<double, N> nodes{};
    std::array<double, N> weights{};

    GaussLegendre() {
        for (std::size_t i = 0; i < (N + 1) / 2; ++i) {
            double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                                (static_cast<double>(N) + 0.5));
            double dp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0, p1 = x;
                for (std::size_t k = 2; k <= N; ++k) {
                    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = pk;
                }
                if constexpr (N == 1) p0 = 1.0;
                dp = N * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            nodes[i] = -x;
            nodes[N - 1 - i] = x;
            weights[i] = weights[N - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }

    static const GaussLegendre& instance() {
        static const GaussLegendre rule;
        return rule;
    }
};

// --------------------------- Gauss–Kronrod 7/15 -----------------------------

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error, abs_value;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double k = fc * kWgk[7];
    double g = fc * kWg[3];
    double kabs = std::abs(k);
    for (std::size_t j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const double f1 = f(c - dx);
        const double f2 = f(c + dx);
        k += kWgk[j] * (f1 + f2);
        kabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
        if (j % 2 == 1) g += kWg[j / 2] * (f1 + f2);
    }
    return {a, b, k * h, std::abs((k - g) * h), kabs * std::abs(h)};
}

}  // namespace detail

// Globally adaptive Gauss–Kronrod over the panels defined by `breaks`.
// Convergence is measured against the integral of |f| so that integrals with
// heavy cancellation still terminate.
template <class F>
Result integrate(F&& f, std::span<const double> breaks, const Options& opt = {}) {
    std::priority_queue<detail::Segment> heap;
    double value = 0.0, error = 0.0, scale = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (!(breaks[i + 1] > breaks[i])) continue;
        auto s = detail::gk15(f, breaks[i], breaks[i + 1]);
        value += s.value;
        error += s.error;
        scale += s.abs_value;
        heap.push(s);
    }
    auto tolerance = [&] { return std::max(opt.abs_tol, opt.rel_tol * scale); };
    while (error > tolerance() && !heap.empty()) {
        if (heap.size() >= opt.max_intervals)
            throw QuadratureError("adaptive quadrature did not converge", error, tolerance());
        auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b))
            throw QuadratureError("adaptive quadrature hit floating-point resolution", error,
                                  tolerance());
        auto left = detail::gk15(f, worst.a, mid);
        auto right = detail::gk15(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        scale += left.abs_value + right.abs_value - worst.abs_value;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the drift of the incremental updates.
    double v = 0.0, e = 0.0;
    while (!heap.empty()) {
        v += heap.top().value;
        e += heap.top().error;
        heap.pop();
    }
    return {v, e};
}

template <class F>
Result integrate(F&& f, double a, double b, const Options& opt = {}) {
    const std::array<double, 2> breaks{a, b};
    return integrate(std::forward<F>(f), std::span<const double>(breaks), opt);
}

// Adaptive Gauss–Kronrod for K integrands sharing one abscissa set, so that
// an expensive common factor is evaluated once per node. Each component must
// meet its own tolerance relative to the integral of its absolute value.
template <std::size_t K, class F>
std::array<Result, K> integrate_array(F&& f, double a, double b, const Options& opt = {}) {
    using Vec = std::array<double, K>;
    struct Seg {
        double a, b;
        Vec value, error, scale;
        double worst;
        bool operator<(const Seg& o) const { return worst < o.worst; }
    };
    auto eval = [&](double lo, double hi) {
        const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
        Seg s{lo, hi, {}, {}, {}, 0.0};
        Vec kr{}, ga{}, ab{};
        const Vec fc = f(c);
        for (std::size_t i = 0; i < K; ++i) {
            kr[i] = fc[i] * detail::kWgk[7];
            ga[i] = fc[i] * detail::kWg[3];
            ab[i] = std::abs(kr[i]);
        }
        for (std::size_t j = 0; j < 7; ++j) {
            const double dx = h * detail::kXgk[j];
            const Vec f1 = f(c - dx), f2 = f(c + dx);
            for (std::size_t i = 0; i < K; ++i) {
                kr[i] += detail::kWgk[j] * (f1[i] + f2[i]);
                ab[i] += detail::kWgk[j] * (std::abs(f1[i]) + std::abs(f2[i]));
                if (j % 2 == 1) ga[i] += detail::kWg[j / 2] * (f1[i] + f2[i]);
            }
        }
        for (std::size_t i = 0; i < K; ++i) {
            s.value[i] = kr[i] * h;
            s.error[i] = std::abs((kr[i] - ga[i]) * h);
            s.scale[i] = ab[i] * std::abs(h);
        }
        return s;
    };
    std::priority_queue<Seg> heap;
    Vec scale{};
    auto push = [&](Seg s) {
        s.worst = 0.0;
        for (std::size_t i = 0; i < K; ++i) {
            const double tol = std::max(opt.abs_tol, opt.rel_tol * scale[i]);
            s.worst = std::max(s.worst, tol > 0.0 ? s.error[i] / tol : (s.error[i] > 0.0 ? 1e300 : 0.0));
        }
        heap.push(s);
    };
    Seg first = eval(a, b);
    scale = first.scale;
    Vec total = first.error;
    push(first);
    auto converged = [&] {
        for (std::size_t i = 0; i < K; ++i)
            if (total[i] > std::max(opt.abs_tol, opt.rel_tol * scale[i])) return false;
        return true;
    };
    while (!converged()) {
        if (heap.size() >= opt.max_intervals)
            throw QuadratureError("adaptive quadrature did not converge", heap.top().worst, 1.0);
        Seg w = heap.top();
        heap.pop();
        const double mid = 0.5 * (w.a + w.b);
        if (!(mid > w.a && mid < w.b))
            throw QuadratureError("adaptive quadrature hit floating-point resolution", w.worst, 1.0);
        Seg l = eval(w.a, mid), r = eval(mid, w.b);
        for (std::size_t i = 0; i < K; ++i) {
            scale[i] += l.scale[i] + r.scale[i] - w.scale[i];
            total[i] += l.error[i] + r.error[i] - w.error[i];
        }
        push(l);
        push(r);
    }
    std::array<Result, K> out{};
    while (!heap.empty()) {
        for (std::size_t i = 0; i < K; ++i) {
            out[i].value += heap.top().value[i];
            out[i].error += heap.top().error[i];
        }
        heap.pop();
    }
    return out;
}

// --------------------------- spherical Bessel -------------------------------

// j_0(x) ... j_{n-1}(x) into `out`. Upward recurrence when x exceeds the
// order range, Miller's downward recurrence otherwise.
inline void spherical_bessel_sequence(double x, std::span<double> out) {
    const std::size_t n = out.size();
    if (n == 0) return;
    if (x < 0.0) {
        spherical_bessel_sequence(-x, out);
        for (std::size_t k = 1; k < n; k += 2) out[k] = -out[k];
        return;
    }
    if (x < 1e-6) {
        double term = 1.0;  // x^k / (2k+1)!!
        for (std::size_t k = 0; k < n; ++k) {
            if (k > 0) term *= x / (2.0 * k + 1.0);
            out[k] = term * (1.0 - x * x / (2.0 * (2.0 * k + 3.0)));
        }
        return;
    }
    const double s = std::sin(x), c = std::cos(x);
    const double j0 = s / x;
    const double j1 = s / (x * x) - c / x;
    if (x >= static_cast<double>(n)) {
        out[0] = j0;
        if (n > 1) out[1] = j1;
        for (std::size_t k = 1; k + 1 < n; ++k)
            out[k + 1] = (2.0 * k + 1.0) / x * out[k] - out[k - 1];
        return;
    }
    const std::size_t top =
        n + 20 + static_cast<std::size_t>(std::sqrt(40.0 * static_cast<double>(n)));
    double jp1 = 0.0, jk = 1e-300;
    std::vector<double> buf(n, 0.0);
    for (std::size_t k = top; k > 0; --k) {
        const double jm1 = (2.0 * k + 1.0) / x * jk - jp1;
        jp1 = jk;
        jk = jm1;
        if (k - 1 < n) buf[k - 1] = jk;
        if (std::abs(jk) > 1e250) {
            jk *= 1e-250;
            jp1 *= 1e-250;
            for (auto& b : buf) b *= 1e-250;
        }
    }
    // jk now holds the unnormalised j_0; normalise on the larger of j_0, j_1.
    const double norm =
        (std::abs(j0) >= std::abs(j1) || n < 2) ? j0 / buf[0] : j1 / buf[1];
    for (std::size_t k = 0; k < n; ++k) out[k] = buf[k] * norm;
}

// --------------------------- Filon–Legendre ---------------------------------

// Panel-wise Legendre expansion of a smooth amplitude g(ω). Fourier integrals
// ∫ g(ω) e^{iωt} dω then reduce to sums of spherical Bessel functions,
//   ∫_{-1}^{1} P_k(u) e^{iθu} du = 2 i^k j_k(θ),
// which stay exact however many oscillations fall inside a panel.
template <std::size_t Degree = 24>
class FilonLegendre {
public:
    FilonLegendre() = default;

    template <class G>
    FilonLegendre(G&& g, std::span<const double> breaks) {
        constexpr std::size_t Q = Degree + 8;
        const auto& rule = GaussLegendre<Q>::instance();
        std::array<std::array<double, Degree>, Q> legendre{};
        for (std::size_t q = 0; q < Q; ++q) {
            const double u = rule.nodes[q];
            double p0 = 1.0, p1 = u;
            legendre[q][0] = 1.0;
            if (Degree > 1) legendre[q][1] = u;
            for (std::size_t k = 2; k < Degree; ++k) {
                const double pk = ((2.0 * k - 1.0) * u * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
                legendre[q][k] = pk;
            }
        }
        for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
            Panel panel;
            panel.center = 0.5 * (breaks[i] + breaks[i + 1]);
            panel.half = 0.5 * (breaks[i + 1] - breaks[i]);
            if (!(panel.half > 0.0)) continue;
            panel.coef.fill(0.0);
            for (std::size_t q = 0; q < Q; ++q) {
                const double gv = g(panel.center + panel.half * rule.nodes[q]);
                for (std::size_t k = 0; k < Degree; ++k)
                    panel.coef[k] += rule.weights[q] * gv * legendre[q][k];
            }
            for (std::size_t k = 0; k < Degree; ++k) panel.coef[k] *= (2.0 * k + 1.0) / 2.0;
            panel.tail = std::abs(panel.coef[Degree - 1]) + std::abs(panel.coef[Degree - 2]);
            panels_.push_back(panel);
        }
    }

    // Returns ∫ g(ω) e^{iωt} dω over all panels; real part is the cosine
    // transform, imaginary part the sine transform.
    std::complex<double> transform(double t, double* error = nullptr) const {
        std::array<double, Degree> jk{};
        std::complex<double> total{0.0, 0.0};
        double err = 0.0;
        for (const auto& p : panels_) {
            spherical_bessel_sequence(p.half * t, jk);
            double re = 0.0, im = 0.0;
            for (std::size_t k = 0; k < Degree; k += 4) {
                re += p.coef[k] * jk[k];
                if (k + 1 < Degree) im += p.coef[k + 1] * jk[k + 1];
                if (k + 2 < Degree) re -= p.coef[k + 2] * jk[k + 2];
                if (k + 3 < Degree) im -= p.coef[k + 3] * jk[k + 3];
            }
            const std::complex<double> phase{std::cos(p.center * t), std::sin(p.center * t)};
            total += phase * std::complex<double>(re, im) * (2.0 * p.half);
            err += 2.0 * p.half * p.tail;
        }
        if (error) *error = err;
        return total;
    }

    std::size_t size() const noexcept { return panels_.size(); }

private:
    struct Panel {
        double center{0.0};
        double half{0.0};
        double tail{0.0};
        std::array<double, Degree> coef{};
    };
    std::vector<Panel> panels_;
};

// --------------------------- power-law head ---------------------------------

// Closed-form contribution of [0, h] when g(ω) ≈ A ω^p there (p > -1), with
// the oscillatory factor expanded to second order in h·t.
struct PowerLawHead {
    double h{0.0};
    double amplitude{0.0};
    double power{0.0};

    template <class G>
    static PowerLawHead fit(G&& g, double h) {
        const double g1 = g(h);
        const double g2 = g(0.5 * h);
        PowerLawHead head{h, 0.0, 0.0};
        if (g1 == 0.0 || g2 == 0.0) return head;
        if ((g1 > 0.0) != (g2 > 0.0))
            throw DomainError("integrand changes sign at the origin");
        head.power = std::log2(g1 / g2);
        if (!(head.power > -1.0))
            throw DomainError("integrand is not integrable at the origin");
        head.amplitude = g1;
        return head;
    }

    double cosine(double t) const {
        const double p = power;
        return amplitude * h * (1.0 / (p + 1.0) - (h * t) * (h * t) / (2.0 * (p + 3.0)));
    }
    double sine(double t) const {
        const double p = power, x = h * t;
        return amplitude * h * (x / (p + 2.0) - x * x * x / (6.0 * (p + 4.0)));
    }
};

}  // namespace qbm::quad
