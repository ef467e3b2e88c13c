#ifndef YFS_PROFILES_HPP
#define YFS_PROFILES_HPP

#include <optional>
#include <vector>

#include "yfs/model.hpp"

// Self-similar profile families of the normalized fast diffusion flow
// u_t = (1/m) Lap(u^m):
//
//   shrinkers  u(x,t) = (T-t)^alpha f(x (T-t)^beta)   (smooth f, singular g)
//   expanders  u(x,t) = (t-T)^alpha h(x (t-T)^beta)
//
// The profile equations in radial coordinates are
//   (1/m) Lap(f^m) + beta r f' + alpha f = 0        (shrinkers)
//   (1/m) Lap(h^m) - beta r h' - alpha h = 0        (expanders; substituting
//                                                    the forward ansatz flips
//                                                    the drift sign)
// Closed forms: the cylinder (C*/r^2)^{1/n} and, at beta = beta1, the
// Barenblatt family (C*/(lambda^2 + r^2))^{1/n}.

namespace yfs {

enum class ProfileKind { Cylinder, Barenblatt, Smooth, Singular, Expander };
const char* to_string(ProfileKind k);

struct TailFit {
    double gammaHat = 0.0; // fitted decay exponent of the deviation
    double bHat = 0.0;     // fitted amplitude, f-space convention (|d| = bHat * r^-gammaHat)
    int sign = 0;          // sign of the deviation r^{2/n} f (C*)^{-1/n} - 1 in the window
    double windowLo = 0.0, windowHi = 0.0; // fit window in r
    double residual = 0.0; // rms residual of the log-log fit
};

struct RadialProfile {
    ProfileKind kind;
    SimilarityParams params;
    std::vector<double> grid;   // strictly increasing radii > 0
    std::vector<double> values; // f(r_i) > 0
    std::optional<double> valueAtOrigin;   // Smooth only
    std::optional<double> originAmplitude; // K for Singular/Expander
    std::optional<TailFit> tailFit;        // cylindrical tail fit; for Expander
                                           // the far-field fit (gammaHat ~ N+2,
                                           // bHat = D_K)
};

// Evaluate anywhere: closed forms exactly, solver output by log-log
// interpolation (power-law extrapolation beyond the grid ends).
double eval(const RadialProfile& prof, double r);

struct PhasePoint { double s, X, Y; };

// Orbit of the autonomous system (kappa = 1/m normalization)
//   dX/ds = (2-N)X - m X^2 -/+ (alpha + beta X) Y
//   dY/ds = (2 + (1-m) X) Y
// with X = r f'/f, Y = r^2 f^{1-m}.  Critical points: E = (0,0),
// C = (-(N+2), 0), D = (-2/n, C*); the cylinder sits exactly at D.
struct PhaseOrbit {
    std::vector<PhasePoint> samples;
    enum class Endpoint { E, C, D, Escaped } endpoint;
};
const char* to_string(PhaseOrbit::Endpoint e);

struct DeviationPoint { double s, w; };

// w(s) = (C*)^{-m/n} e^{2ms/n} f(e^s)^m - 1; the cylinder maps to w == 0.
struct CylindricalDeviation {
    std::vector<DeviationPoint> samples;
};

struct SolveOptions {
    double sMax = 12.0;        // integrate to r = e^{sMax}
    int points = 4096;         // grid points over the whole span
    double rtol = 1e-12;       // integrator tolerances
    double atol = 1e-13;
    double tailTol = 0.05;     // stabilization criterion for cylindrical tails
    double manifoldOffset = 1e-8; // X-offset delta of the formal start (Singular/Expander)
    double seriesHandoff = 1e-3;  // relative deviation where stepping takes over
                                  // from the local series (below it the series
                                  // itself parametrizes the unstable manifold)
};

RadialProfile cylinder_profile(const ModelParams& mp);
RadialProfile cylinder_profile(const ModelParams& mp, double rLo, double rHi, int points);

RadialProfile barenblatt_profile(const ModelParams& mp, double lambda);
RadialProfile barenblatt_profile(const ModelParams& mp, double lambda, double rLo, double rHi,
                                 int points);

// Smooth shrinker profile with f(0) = f0, f'(0) = 0, integrated outward until
// the cylindrical tail stabilizes.  Requires beta > beta0.
RadialProfile solve_smooth_profile(const SimilarityParams& sp, double f0,
                                   const SolveOptions& opts = {});

// Singular shrinker profile g ~ K r^{-theta} near the origin.  Theorem
// hypothesis is beta > beta1; beta == beta1 is accepted with a warning.
RadialProfile solve_singular_profile(const SimilarityParams& sp, double K,
                                     const SolveOptions& opts = {});

// Expander profile h ~ K r^{-theta} near the origin, h ~ D_K r^{-(N+2)} far
// out.  Requires beta >= beta1.
RadialProfile solve_expander_profile(const SimilarityParams& sp, double K,
                                     const SolveOptions& opts = {});

// Solve a smooth profile whose fitted tail amplitude is close to bTarget,
// using the scaling law B(lambda^{2/n} f0) = B(f0) lambda^{-gamma1}.
RadialProfile smooth_profile_with_tail_amplitude(const SimilarityParams& sp, double bTarget,
                                                 const SolveOptions& opts = {});

PhaseOrbit to_phase_orbit(const RadialProfile& prof);

CylindricalDeviation to_cylindrical_deviation(const RadialProfile& prof);

// Least-squares fit of log|r^{2/n} f (C*)^{-1/n} - 1| against log r over the
// default window [0.55, 0.9]*s_last (auto-shrunk once on sign change).
TailFit fit_tail(const RadialProfile& prof);
TailFit fit_tail(const RadialProfile& prof, double windowLoFrac, double windowHiFrac);

// Max pointwise relative residual of the stationary equation (centered
// differences on the log grid, normalized by the largest term per point).
double ode_residual(const RadialProfile& prof);

struct AmplitudeCheck {
    double predicted; // -C_N A1 I1, the slow-mode amplitude of w
    double fitted;    // amplitude of w from the tail samples at pinned gamma1
    double mismatch;  // |fitted - predicted| / |predicted|
};

// Variation-of-parameters identity for the slow mode: w(s) ~ -C_N A1 I1 e^{-gamma1 s}
// with I1 = Int e^{gamma1 t} phi(w(t)) dt, phi(w) = (1+w)^p - 1 - p w.
// Throws NotApplicable when A1 == 0 (FastBarenblatt) or the deviation is
// degenerate (w == 0).
AmplitudeCheck verify_slow_mode_amplitude(const CylindricalDeviation& dev,
                                          const SimilarityParams& sp);

} // namespace yfs

#endif
