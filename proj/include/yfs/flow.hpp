#ifndef YFS_FLOW_HPP
#define YFS_FLOW_HPP

// Radial evolution of u_t = (1/m) div(r^{N-1} grad u^m) on a truncated domain
// [r_in, R_max] (r_in = 0 allowed), with boundary closures implementing the
// cylindrical tail, exact self-similar traces, or zero flux.  Includes the
// left/right similarity rescalings, L1 / weighted-L1 distances, extinction
// estimation, and tail/rate diagnostics.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "yfs/errors.hpp"
#include "yfs/profiles.hpp"

namespace yfs {

// ------------------------------------------------------------------ closures

enum class BoundaryKind {
    ExactTrace,   // Dirichlet from the self-similar evolution of a profile
    CylinderTail, // Dirichlet (C*(T-t)/R^2)^{1/n} (1 + B R^{-gamma}), B signed
    Neumann,      // zero flux
};

std::string to_string(BoundaryKind k);

struct BoundaryClosure {
    BoundaryKind kind = BoundaryKind::Neumann;
    std::shared_ptr<const RadialProfile> profile; // ExactTrace source
    double B = 0.0;                               // CylinderTail amplitude (signed)
    double gamma = 0.0;                           // CylinderTail decay exponent
};

// ---------------------------------------------------------------------- field

struct RadialField {
    SimilarityParams params;
    double T = 1.0; // extinction horizon of the data's cylindrical tail
    double t = 0.0;
    std::vector<double> grid;   // fixed radii; grid[0] == 0 allowed
    std::vector<double> values; // u_i >= 0
    BoundaryClosure inner, outer;
    double floorEps = 1e-250; // Jacobian regularization only, never stored
                              // state; guards the u = 0 cells, far below any
                              // live value so tail cells keep their exact
                              // (fast-diffusion) derivative and full Newton
                              // convergence speed
};

// Value of the self-similar solution built from `prof` at radius r, time t.
// Shrinker-type profiles give (T-t)^alpha f(r (T-t)^beta) for t < T; from T on
// the singular family pins its power-law cone, the others are extinct (zero,
// an absorbing trace).  Expanders give (t-T)^alpha h(r (t-T)^beta) for t > T.
double self_similar_value(const RadialProfile& prof, double T, double r, double t);

// Closed forms used as oracles and comparison barriers.
double cylinder_solution(const ModelParams& mp, double T, double r, double t);
// The constant-in-time-lambda shrinker written in physical variables:
// (C*(T-t) / (r^2 + lambda^2 (T-t)^{-2 beta1}))^{1/n}; exact solution for t<T.
double barenblatt_solution(const ModelParams& mp, double T, double lambda, double r, double t);

// Dirichlet trace a closure imposes at radius r, time t (Neumann: DomainError).
double closure_value(const BoundaryClosure& c, const SimilarityParams& sp, double T, double r,
                     double t);

// ---------------------------------------------------------------- initial data

struct PerturbationSpec {
    std::string kind = "none"; // "none" | "bump"
    double mass = 0.0;         // signed integral against r^{N-1} dr
    double center = 1.0;       // bump center radius
    double width = 0.5;        // half-width in log r
    std::uint64_t seed = 0;    // deterministic jitter of the bump placement
};

struct GridSpec {
    double rIn = 0.0; // 0 admits smooth-at-origin data
    double rMax = 1e3;
    int points = 2000;
};

struct InitialDataSpec {
    SimilarityParams params;
    double T = 1.0;
    ProfileKind base = ProfileKind::Smooth;
    // Family parameter of the base: tail amplitude B for Smooth, origin
    // coefficient K for Singular, lambda for Barenblatt, unused for Cylinder.
    double amplitude = 1.0;
    int tailSign = 0; // expected deviation sign at the outer boundary; 0 = take the base's
    PerturbationSpec perturbation;
    GridSpec grid;
    // When > 0 (Smooth base): clip the data below the smooth profile with this
    // (smaller) tail amplitude, enforcing 0 <= u0 <= envelope by construction.
    double envelopeB = 0.0;
    BoundaryKind innerBoundary = BoundaryKind::Neumann;
    BoundaryKind outerBoundary = BoundaryKind::CylinderTail;
};

// Assembles data = base profile (+ optional compact perturbation, clipped to
// the envelope) on the requested grid, with boundary closures attached.
RadialField make_initial_data(const InitialDataSpec& spec);

// ------------------------------------------------------------------ stepping

struct StepOptions {
    double newtonTol = 1e-10; // residual tolerance, relative per row to the
                              // magnitudes of the terms entering that row
    int maxNewton = 30;
};

// One backward-Euler step of size dt (finite volumes in r^{N-1} dr, damped
// Newton through w = u^m).  Throws StepError when Newton stalls.
RadialField step(const RadialField& field, double dt, const StepOptions& opts = {});

struct EvolveOptions {
    StepOptions stepOpts;
    double dtMax = 1e-2;
    double supStop = 1e-10;         // stop once sup u drops below this
    long maxSteps = 2000000;
    std::vector<double> snapshotTimes; // strictly increasing; hit exactly
};

struct EvolutionRun {
    std::vector<RadialField> snapshots;
    std::vector<double> historyT, historySup, historyMass;
    double tFinal = 0.0;
    bool supStopped = false; // true when the supStop threshold ended the run
    long steps = 0;
};

// Advances the field to `until`, with dt capped so the sup norm decays at most
// ~1% per step (resolves the approach to extinction without knowing its time
// in advance) and halved on StepError.  Runs may cross T: Dirichlet closures
// then pin the extinct trace (zero, or the frozen cone for singular data).
EvolutionRun evolve(const RadialField& field, double until, const EvolveOptions& opts = {});

// ---------------------------------------------------------------- measurement

// Cell volumes and face radii of the finite-volume scheme (exposed so tests
// can reproduce the discrete flux balance exactly).
struct FaceGeometry {
    std::vector<double> face;   // size M+1; face[0] = inner domain edge
    std::vector<double> volume; // size M
};
FaceGeometry face_geometry(const std::vector<double>& grid, int N);

double sup_norm(const RadialField& f);
double total_mass(const RadialField& f); // finite-volume mass sum(V_i u_i)

// Trapezoidal integral of |a - b| r^{N-1} dr on the common grid.
double l1_distance(const RadialField& a, const RadialField& b);
// Same against a profile target evaluated on the field's grid, restricted to
// grid[i] in [rLo, rHi].
double l1_distance(const RadialField& a, const RadialProfile& target, double rLo = 0.0,
                   double rHi = 1e300);
// Weighted variant: integrand additionally multiplied by the rescaled
// cylinder to the power p0 (integrable at the origin for p0 < 2m).
double weighted_l1_distance(const RadialField& a, const RadialProfile& target, double p0,
                            double rLo = 0.0, double rHi = 1e300);
double weighted_l1_distance(const RadialField& a, const RadialField& b, double p0);
// Sup of |a - target| over grid points in [rLo, rHi].
double sup_distance(const RadialField& a, const RadialProfile& target, double rLo, double rHi);

// -------------------------------------------------------------- rescalings

// Left rescaling: ubar(y) = (T-t)^{-alpha} u(y (T-t)^{-beta}) with
// tau = -log((T-t)/T).  On a fixed radial grid this is a pure relabeling
// y_i = r_i (T-t)^beta, so no resampling error enters.  Requires t < T.
RadialField rescale_left(const RadialField& f, double T);
// Right rescaling: uhat(y) = (t-T)^{-alpha} u(y (t-T)^{-beta}) with
// tau = log((t-T)/T); the expander is its exact fixed point.  Requires t > T.
RadialField rescale_right(const RadialField& f, double T);
// tau <-> t maps for the two rescalings.
double tau_left(double t, double T);
double tau_right(double t, double T);

struct RescaledTrajectory {
    int direction = -1; // -1: left (tau increasing), +1: right (tau decreasing)
    std::vector<double> tau;
    std::vector<double> distances;
};

// Least-squares decay exponent lambda of distance ~ e^{-lambda tau} (left)
// or ~ e^{+lambda tau} (right).  Requires >= 5 samples, strictly decreasing
// toward the trajectory's limit; otherwise Inconclusive.
double convergence_rate(const RescaledTrajectory& traj);

// -------------------------------------------------------------- diagnostics

struct ExtinctionEstimate {
    double tHat = 0.0;
    double halfWidth = 0.0; // extrapolation uncertainty
};

// Extrapolates the decaying stretch of the sup-norm history to zero.  The fit
// runs on sup^{1/p} against t with the decay power p measured from the data
// itself (sup^n is linear in t only for tail-dominated decay).  Throws
// Inconclusive when no decaying stretch is found.
ExtinctionEstimate estimate_extinction_time(const EvolutionRun& run);

// Same fit on a caller-built history (e.g. the sup over a region away from a
// pinned singular boundary, sampled from snapshots).
ExtinctionEstimate estimate_extinction_time(const std::vector<double>& times,
                                            const std::vector<double>& sups);

struct TailConstant {
    double measured = 0.0; // mean of r^{2/n} u over the outer decade
    double expected = 0.0; // (C*(T-t))^{1/n}
    double ratio = 0.0;
};
TailConstant tail_constant(const RadialField& f, double T);

// Local power -d log u / d log r around radius r0 (centered secant).
double local_power(const RadialField& f, double r0);

} // namespace yfs

#endif
