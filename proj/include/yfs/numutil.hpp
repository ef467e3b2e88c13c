#ifndef YFS_NUMUTIL_HPP
#define YFS_NUMUTIL_HPP

// Small shared numeric helpers: least squares lines, quadrature, finite
// difference stencils, a tridiagonal solve, and a tiny deterministic RNG.

#include <cmath>
#include <cstdint>
#include <vector>

#include "yfs/errors.hpp"

namespace yfs {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms = 0.0; // root mean square residual of the fit
};

// Ordinary least squares y = slope*x + intercept.
inline LineFit ols_line(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    if (n < 2 || y.size() != n)
        throw DomainError("ols_line: need at least two matching samples");
    double sx = 0, sy = 0;
    for (size_t i = 0; i < n; ++i) { sx += x[i]; sy += y[i]; }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0)
        throw DomainError("ols_line: degenerate abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (size_t i = 0; i < n; ++i) {
        const double r = y[i] - (f.slope * x[i] + f.intercept);
        ss += r * r;
    }
    f.rms = std::sqrt(ss / n);
    return f;
}

// Trapezoid rule on a (possibly nonuniform) grid.
inline double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw DomainError("trapezoid: need matching grids with >= 2 points");
    double s = 0;
    for (size_t i = 0; i + 1 < x.size(); ++i)
        s += 0.5 * (y[i] + y[i + 1]) * (x[i + 1] - x[i]);
    return s;
}

// Centered first/second derivatives on a uniform grid, order 6 in the
// interior (falling back to lower order near the ends is the caller's
// business; these assume 3 <= i <= n-4).
inline double d1_o6(const std::vector<double>& f, size_t i, double h) {
    return (-f[i - 3] + 9 * f[i - 2] - 45 * f[i - 1] + 45 * f[i + 1] - 9 * f[i + 2] + f[i + 3]) /
           (60.0 * h);
}
inline double d2_o6(const std::vector<double>& f, size_t i, double h) {
    return (2 * f[i - 3] - 27 * f[i - 2] + 270 * f[i - 1] - 490 * f[i] + 270 * f[i + 1] -
            27 * f[i + 2] + 2 * f[i + 3]) /
           (180.0 * h * h);
}
// Order-2 fallbacks for short grids.
inline double d1_o2(const std::vector<double>& f, size_t i, double h) {
    return (f[i + 1] - f[i - 1]) / (2.0 * h);
}
inline double d2_o2(const std::vector<double>& f, size_t i, double h) {
    return (f[i + 1] - 2 * f[i] + f[i - 1]) / (h * h);
}

// Thomas algorithm; diagonals (a = sub, b = diag, c = super) are modified.
// Solves in place into rhs.
inline void solve_tridiagonal(std::vector<double>& a, std::vector<double>& b,
                              std::vector<double>& c, std::vector<double>& rhs) {
    const size_t n = b.size();
    if (n == 0 || a.size() != n || c.size() != n || rhs.size() != n)
        throw DomainError("solve_tridiagonal: inconsistent sizes");
    for (size_t i = 1; i < n; ++i) {
        const double w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= b[n - 1];
    for (size_t i = n - 1; i-- > 0;)
        rhs[i] = (rhs[i] - c[i] * rhs[i + 1]) / b[i];
}

// splitmix64: tiny deterministic generator for seed jitter. Using our own
// keeps outputs byte-identical across standard libraries (the CSV
// determinism guarantee), which std::uniform_real_distribution would not.
struct SplitMix64 {
    std::uint64_t state;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    // uniform in [0,1)
    double uniform() { return (next() >> 11) * 0x1.0p-53; }
};

// log-spaced grid from a to b inclusive
inline std::vector<double> log_grid(double a, double b, int points) {
    if (!(a > 0.0) || !(b > a) || points < 2)
        throw DomainError("log_grid: need 0 < a < b and points >= 2");
    std::vector<double> g(points);
    const double la = std::log(a), lb = std::log(b);
    for (int i = 0; i < points; ++i)
        g[i] = std::exp(la + (lb - la) * i / double(points - 1));
    g.front() = a;
    g.back() = b;
    return g;
}

} // namespace yfs

#endif
