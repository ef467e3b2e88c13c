#ifndef YFS_TESTS_ORACLES_HPP
#define YFS_TESTS_ORACLES_HPP

// Independent oracles used by the test suites.  Deliberately written against
// the definitions, not against the library code paths they check.

#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace oracle {

// Exact rational arithmetic, enough for the small integers that appear in the
// exponent algebra (N <= 64 keeps every intermediate far below overflow).
struct Rat {
    long long num = 0, den = 1;

    Rat() = default;
    Rat(long long v) : num(v), den(1) {}
    Rat(long long n_, long long d_) : num(n_), den(d_) { normalize(); }

    void normalize() {
        if (den == 0) throw std::domain_error("Rat: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        const long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }

    friend Rat operator+(Rat a, Rat b) { return Rat(a.num * b.den + b.num * a.den, a.den * b.den); }
    friend Rat operator-(Rat a, Rat b) { return Rat(a.num * b.den - b.num * a.den, a.den * b.den); }
    friend Rat operator*(Rat a, Rat b) { return Rat(a.num * b.num, a.den * b.den); }
    friend Rat operator/(Rat a, Rat b) {
        if (b.num == 0) throw std::domain_error("Rat: division by zero");
        return Rat(a.num * b.den, a.den * b.num);
    }
    friend bool operator==(Rat a, Rat b) { return a.num == b.num && a.den == b.den; }

    double value() const { return double(num) / double(den); }
};

// 2((1-m)N - 2)/n with m = (N-2)/(N+2), n = 4/(N+2), computed exactly.
inline Rat c_star_exact(int N) {
    const Rat m(N - 2, N + 2);
    const Rat n(4, N + 2);
    return Rat(2) * ((Rat(1) - m) * Rat(N) - Rat(2)) / n;
}

// Root of x^2 - b x + c = 0 in [lo, hi] by bisection on the (monotone there)
// polynomial; independent of any closed-form root expression.
inline double quadratic_root_bisect(double b, double c, double lo, double hi) {
    auto poly = [&](double x) { return (x - b) * x + c; };
    double flo = poly(lo);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = poly(mid);
        if ((fm <= 0.0) == (flo <= 0.0)) { lo = mid; flo = fm; }
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace oracle

#endif
