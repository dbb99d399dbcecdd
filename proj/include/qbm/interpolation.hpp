// interpolation.hpp: monotone piecewise-cubic Hermite interpolation

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "qbm/errors.hpp"

namespace qbm {

// Fritsch–Carlson monotone cubic on a strictly increasing grid. Exact at the
// nodes and reproduces linear data.
class MonotoneCubic {
public:
    MonotoneCubic() = default;

    MonotoneCubic(std::span<const double> x, std::span<const double> y)
        : x_(x.begin(), x.end()), y_(y.begin(), y.end()), m_(x.size(), 0.0) {
        const std::size_t n = x_.size();
        if (n != y_.size()) throw DomainError("MonotoneCubic: size mismatch");
        if (n < 2) throw DomainError("MonotoneCubic: need at least two nodes");
        std::vector<double> delta(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double h = x_[i + 1] - x_[i];
            if (!(h > 0.0)) throw DomainError("MonotoneCubic: grid not strictly increasing");
            delta[i] = (y_[i + 1] - y_[i]) / h;
        }
        if (n == 2) {
            m_[0] = m_[1] = delta[0];
            return;
        }
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (delta[i - 1] * delta[i] <= 0.0) {
                m_[i] = 0.0;
                continue;
            }
            // Weighted harmonic mean (Fritsch–Butland), keeps monotonicity.
            const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
            const double w1 = 2.0 * h1 + h0, w2 = h1 + 2.0 * h0;
            m_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
        m_[0] = end_slope(x_[1] - x_[0], x_[2] - x_[1], delta[0], delta[1]);
        m_[n - 1] = end_slope(x_[n - 1] - x_[n - 2], x_[n - 2] - x_[n - 3], delta[n - 2],
                              delta[n - 3]);
    }

    double operator()(double t) const {
        const std::size_t i = locate(t);
        const double h = x_[i + 1] - x_[i];
        const double s = (t - x_[i]) / h;
        const double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * y_[i] + (s3 - 2 * s2 + s) * h * m_[i] +
               (-2 * s3 + 3 * s2) * y_[i + 1] + (s3 - s2) * h * m_[i + 1];
    }

    // Exact integral of the interpolant over [x_i, x_{i+1}].
    double segment_integral(std::size_t i) const {
        const double h = x_[i + 1] - x_[i];
        return h * (y_[i] + y_[i + 1]) / 2.0 + h * h * (m_[i] - m_[i + 1]) / 12.0;
    }

    // Integral over [x_i, x_i + s·h], s ∈ [0, 1].
    double partial_integral(std::size_t i, double s) const {
        const double h = x_[i + 1] - x_[i];
        const double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
        return h * ((s - s3 + 0.5 * s4) * y_[i] + h * (0.5 * s2 - 2.0 * s3 / 3.0 + 0.25 * s4) * m_[i] +
                    (s3 - 0.5 * s4) * y_[i + 1] + h * (0.25 * s4 - s3 / 3.0) * m_[i + 1]);
    }

    std::size_t size() const noexcept { return x_.size(); }
    const std::vector<double>& nodes() const noexcept { return x_; }

    // Running integral from the first node, evaluated at every node.
    std::vector<double> cumulative_integral() const {
        std::vector<double> out(x_.size(), 0.0);
        for (std::size_t i = 0; i + 1 < x_.size(); ++i) out[i + 1] = out[i] + segment_integral(i);
        return out;
    }

    double front() const { return x_.front(); }
    double back() const { return x_.back(); }

private:
    static double end_slope(double h0, double h1, double d0, double d1) {
        double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (m * d0 <= 0.0) return 0.0;
        if (d0 * d1 <= 0.0 && std::abs(m) > std::abs(3.0 * d0)) m = 3.0 * d0;
        return m;
    }

    std::size_t locate(double t) const {
        if (!(t >= x_.front() && t <= x_.back()))
            throw RangeError("interpolation point outside the tabulated range");
        auto it = std::upper_bound(x_.begin(), x_.end(), t);
        std::size_t i = static_cast<std::size_t>(it - x_.begin());
        if (i == 0) i = 1;
        if (i >= x_.size()) i = x_.size() - 1;
        return i - 1;
    }

    std::vector<double> x_, y_, m_;
};

}  // namespace qbm
