#include "yfs/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "yfs/log.hpp"
#include "yfs/numutil.hpp"

namespace yfs {

std::string to_string(BoundaryKind k) {
    switch (k) {
        case BoundaryKind::ExactTrace: return "ExactTrace";
        case BoundaryKind::CylinderTail: return "CylinderTail";
        case BoundaryKind::Neumann: return "Neumann";
    }
    return "?";
}

// ----------------------------------------------------------- closed forms

double cylinder_solution(const ModelParams& mp, double T, double r, double t) {
    if (!(r > 0.0)) throw DomainError("cylinder_solution: need r > 0");
    const double rem = T - t;
    if (rem <= 0.0) return 0.0;
    return std::pow(mp.cStar * rem / (r * r), 1.0 / mp.n);
}

double barenblatt_solution(const ModelParams& mp, double T, double lambda, double r, double t) {
    if (!(lambda > 0.0)) throw DomainError("barenblatt_solution: need lambda > 0");
    const double rem = T - t;
    if (rem <= 0.0) return 0.0;
    const double beta1 = (mp.N + 2.0) / (2.0 * (mp.N - 2.0));
    const double core = lambda * lambda * std::pow(rem, -2.0 * beta1);
    return std::pow(mp.cStar * rem / (r * r + core), 1.0 / mp.n);
}

namespace {

bool is_shrinker(ProfileKind k) { return k != ProfileKind::Expander; }

// Cone amplitude K r^{-theta} carried by a singular-at-origin profile,
// read off the innermost sample.
double cone_value(const RadialProfile& prof, double theta, double r) {
    const double k = prof.values.front() * std::pow(prof.grid.front(), theta);
    return k * std::pow(r, -theta);
}

} // namespace

double self_similar_value(const RadialProfile& prof, double T, double r, double t) {
    const SimilarityParams& sp = prof.params;
    if (prof.kind == ProfileKind::Cylinder) return cylinder_solution(sp.model, T, r, t);

    if (is_shrinker(prof.kind)) {
        const double rem = T - t;
        if (prof.kind == ProfileKind::Singular) {
            // (T-t)^alpha g(r (T-t)^beta) -> K r^{-theta} as t -> T: evaluate
            // through the cone once the argument leaves the grid, where the
            // (T-t) powers cancel exactly (alpha = beta theta); past T the
            // trace stays frozen at the cone
            if (rem <= 0.0) return cone_value(prof, sp.theta, r);
            const double y = r * std::pow(rem, sp.beta);
            if (!(y > prof.grid.front()))
                return cone_value(prof, sp.theta, r);
            return std::pow(rem, sp.alpha) * eval(prof, y);
        }
        if (rem <= 0.0) return 0.0; // extinct
        return std::pow(rem, sp.alpha) * eval(prof, r * std::pow(rem, sp.beta));
    }

    const double rem = t - T;
    if (rem < 0.0) throw DomainError("self_similar_value: expander evaluated before its birth");
    const double xi = r * std::pow(rem, sp.beta);
    if (!(xi > prof.grid.front())) return cone_value(prof, sp.theta, r);
    return std::pow(rem, sp.alpha) * eval(prof, xi);
}

double closure_value(const BoundaryClosure& c, const SimilarityParams& sp, double T, double r,
                     double t) {
    switch (c.kind) {
        case BoundaryKind::ExactTrace:
            if (!c.profile) throw DomainError("closure_value: ExactTrace without a profile");
            return self_similar_value(*c.profile, T, r, t);
        case BoundaryKind::CylinderTail: {
            const double base = cylinder_solution(sp.model, T, r, t);
            return base * (1.0 + c.B * std::pow(r, -c.gamma));
        }
        case BoundaryKind::Neumann:
            throw DomainError("closure_value: Neumann closure has no trace");
    }
    throw DomainError("closure_value: unknown closure");
}

// -------------------------------------------------------------- initial data

namespace {

std::vector<double> build_grid(const GridSpec& g) {
    if (g.points < 8) throw DomainError("make_initial_data: need at least 8 grid points");
    if (!(g.rMax > 0.0) || g.rIn < 0.0 || g.rIn >= g.rMax)
        throw DomainError("make_initial_data: need 0 <= rIn < rMax");
    if (g.rIn > 0.0) return log_grid(g.rIn, g.rMax, g.points);
    // r = 0 admitted for smooth data: log-spaced bulk over eight decades plus
    // the origin node (the origin cell closes with a zero-area inner face)
    std::vector<double> grid = log_grid(g.rMax * 1e-8, g.rMax, g.points - 1);
    grid.insert(grid.begin(), 0.0);
    return grid;
}

RadialProfile build_base(const InitialDataSpec& spec) {
    switch (spec.base) {
        case ProfileKind::Smooth:
            return smooth_profile_with_tail_amplitude(spec.params, spec.amplitude);
        case ProfileKind::Singular: return solve_singular_profile(spec.params, spec.amplitude);
        case ProfileKind::Barenblatt:
            return barenblatt_profile(spec.params.model, spec.amplitude);
        case ProfileKind::Cylinder: return cylinder_profile(spec.params.model);
        case ProfileKind::Expander:
            throw DomainError("make_initial_data: expanders are not admissible initial data");
    }
    throw DomainError("make_initial_data: unknown base kind");
}

} // namespace

RadialField make_initial_data(const InitialDataSpec& spec) {
    RadialField f;
    f.params = spec.params;
    f.T = spec.T;
    f.t = 0.0;
    if (!(spec.T > 0.0)) throw DomainError("make_initial_data: need T > 0");
    f.grid = build_grid(spec.grid);

    const bool coneAtOrigin =
        spec.base == ProfileKind::Singular || spec.base == ProfileKind::Cylinder;
    if (coneAtOrigin && f.grid.front() == 0.0)
        throw ConstructionError("make_initial_data: singular-at-origin data need rIn > 0");

    RadialProfile base = build_base(spec);
    const size_t M = f.grid.size();
    f.values.resize(M);
    for (size_t i = 0; i < M; ++i)
        f.values[i] = self_similar_value(base, spec.T, f.grid[i], 0.0);

    // compactly supported perturbation, deterministic in the seed
    const PerturbationSpec& p = spec.perturbation;
    if (p.kind == "bump") {
        if (!(p.center > 0.0) || !(p.width > 0.0))
            throw DomainError("make_initial_data: bump needs center > 0 and width > 0");
        SplitMix64 rng(p.seed);
        const double c = std::log(p.center) + (rng.uniform() - 0.5) * 0.25 * p.width;
        std::vector<double> shape(M, 0.0), integrand(M, 0.0);
        for (size_t i = 0; i < M; ++i) {
            if (f.grid[i] <= 0.0) continue;
            const double z = (std::log(f.grid[i]) - c) / p.width;
            if (std::abs(z) >= 1.0) continue;
            const double cz = std::cos(0.5 * M_PI * z);
            shape[i] = cz * cz;
            integrand[i] = shape[i] * std::pow(f.grid[i], spec.params.model.N - 1.0);
        }
        const double unitMass = trapezoid(f.grid, integrand);
        if (!(unitMass > 0.0))
            throw ConstructionError("make_initial_data: bump support misses the grid");
        for (size_t i = 0; i < M; ++i) f.values[i] += (p.mass / unitMass) * shape[i];
    } else if (p.kind != "none") {
        throw DomainError("make_initial_data: unknown perturbation kind '" + p.kind + "'");
    }

    // clip below the requested envelope (a larger profile: smaller tail
    // amplitude), enforcing the two-sided ordering by construction
    if (spec.envelopeB > 0.0) {
        if (spec.base != ProfileKind::Smooth)
            throw DomainError("make_initial_data: envelope clipping applies to smooth bases");
        RadialProfile env = smooth_profile_with_tail_amplitude(spec.params, spec.envelopeB);
        for (size_t i = 0; i < M; ++i) {
            const double cap = self_similar_value(env, spec.T, f.grid[i], 0.0);
            if (cap < f.values[i] - 1e-12 * (1.0 + cap)) {
                const double baseVal = self_similar_value(base, spec.T, f.grid[i], 0.0);
                if (baseVal > cap * (1.0 + 1e-9))
                    throw ConstructionError(
                        "make_initial_data: envelope lies below the base profile");
            }
            f.values[i] = std::min(f.values[i], cap);
        }
    }

    for (size_t i = 0; i < M; ++i) {
        if (!std::isfinite(f.values[i]) || f.values[i] < 0.0)
            throw ConstructionError("make_initial_data: assembled data are not nonnegative");
        f.values[i] = std::max(f.values[i], 0.0);
    }

    // closures
    f.inner.kind = spec.innerBoundary;
    f.outer.kind = spec.outerBoundary;
    auto share = std::make_shared<const RadialProfile>(std::move(base));
    if (f.inner.kind == BoundaryKind::ExactTrace) f.inner.profile = share;
    if (f.outer.kind == BoundaryKind::ExactTrace) f.outer.profile = share;
    if (f.outer.kind == BoundaryKind::CylinderTail) {
        if (share->kind == ProfileKind::Cylinder) {
            f.outer.B = 0.0;
            f.outer.gamma = 0.0;
        } else {
            if (!share->tailFit)
                throw ConstructionError("make_initial_data: base profile has no fitted tail");
            f.outer.B = share->tailFit->sign * share->tailFit->bHat;
            f.outer.gamma = share->tailFit->gammaHat;
        }
        if (spec.tailSign != 0 && f.outer.B != 0.0 &&
            spec.tailSign != (f.outer.B > 0.0 ? 1 : -1))
            throw ConstructionError("make_initial_data: requested tail sign " +
                                    std::to_string(spec.tailSign) +
                                    " contradicts the base profile's tail");
    }
    if (f.inner.kind == BoundaryKind::CylinderTail)
        throw DomainError("make_initial_data: the cylindrical tail closes the outer end only");
    return f;
}

// ------------------------------------------------------------------ stepping

FaceGeometry face_geometry(const std::vector<double>& grid, int N) {
    const size_t M = grid.size();
    if (M < 3) throw DomainError("face_geometry: need at least 3 nodes");
    FaceGeometry fg;
    fg.face.resize(M + 1);
    fg.face[0] = grid[0];
    fg.face[M] = grid[M - 1];
    for (size_t i = 1; i < M; ++i)
        fg.face[i] = grid[i - 1] > 0.0 ? std::sqrt(grid[i - 1] * grid[i]) : 0.5 * grid[i];
    fg.volume.resize(M);
    for (size_t i = 0; i < M; ++i)
        fg.volume[i] = (std::pow(fg.face[i + 1], N) - std::pow(fg.face[i], N)) / N;
    return fg;
}

namespace {

// Closure as seen by the step that ends at time tNew.  Dirichlet traces stay
// Dirichlet past T: extinct kinds pin zero (an absorbing end that lets tail
// mass leave, as it does on the infinite domain), the singular kind pins its
// frozen cone.
BoundaryKind effective_kind(const BoundaryClosure& c, double T, double tNew) {
    if (c.kind == BoundaryKind::ExactTrace) {
        if (!c.profile) throw DomainError("step: ExactTrace closure without a profile");
        if (!is_shrinker(c.profile->kind) && tNew <= T)
            throw DomainError("step: expander trace is defined only past T");
    }
    return c.kind;
}

struct Workspace {
    std::vector<double> w, dwdu, res, rsc;
};

// Residual of the backward-Euler system at state u (unknowns u, diffusion
// through w = u^m).  cf[i] = face[i+1]^{N-1}/(r[i+1]-r[i]).  rsc[i] collects
// the magnitudes of the terms summed into row i: an |res[i]| small against
// rsc[i] is converged in the only sense floating point can offer, and the
// scale is per row, so tail cells twenty orders below the sup norm still get
// solved to relative accuracy.
void residual(const RadialField& fld, const std::vector<double>& uOld,
              const std::vector<double>& u, double dt, const FaceGeometry& fg,
              const std::vector<double>& cf, BoundaryKind bkIn, BoundaryKind bkOut, double bcIn,
              double bcOut, Workspace& ws) {
    const size_t M = u.size();
    const double m = fld.params.model.m;
    for (size_t i = 0; i < M; ++i) ws.w[i] = std::pow(u[i], m);
    for (size_t i = 0; i < M; ++i) {
        if (i == 0 && bkIn != BoundaryKind::Neumann) {
            ws.res[i] = u[i] - bcIn;
            ws.rsc[i] = std::abs(u[i]) + std::abs(bcIn);
            continue;
        }
        if (i == M - 1 && bkOut != BoundaryKind::Neumann) {
            ws.res[i] = u[i] - bcOut;
            ws.rsc[i] = std::abs(u[i]) + std::abs(bcOut);
            continue;
        }
        const double c = dt / (m * fg.volume[i]);
        const double fluxOut = (i + 1 < M) ? cf[i] * (ws.w[i + 1] - ws.w[i]) : 0.0;
        const double fluxIn = (i > 0) ? cf[i - 1] * (ws.w[i] - ws.w[i - 1]) : 0.0;
        // the scale uses the w magnitudes before differencing: where w is
        // nearly flat the flux is a cancellation, and its rounding noise is
        // epsilon * cf * w, not epsilon * |flux|
        const double fluxMagOut = (i + 1 < M) ? cf[i] * (ws.w[i + 1] + ws.w[i]) : 0.0;
        const double fluxMagIn = (i > 0) ? cf[i - 1] * (ws.w[i] + ws.w[i - 1]) : 0.0;
        ws.res[i] = u[i] - uOld[i] - c * (fluxOut - fluxIn);
        ws.rsc[i] = std::abs(u[i]) + std::abs(uOld[i]) + c * (fluxMagOut + fluxMagIn);
    }
}

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

} // namespace

RadialField step(const RadialField& field, double dt, const StepOptions& opts) {
    if (!(dt > 0.0)) throw DomainError("step: need dt > 0");
    const size_t M = field.grid.size();
    if (M < 3 || field.values.size() != M) throw DomainError("step: malformed field");
    const ModelParams& mp = field.params.model;
    const double m = mp.m;
    const double tNew = field.t + dt;

    const FaceGeometry fg = face_geometry(field.grid, mp.N);
    std::vector<double> cf(M - 1);
    for (size_t i = 0; i + 1 < M; ++i)
        cf[i] = std::pow(fg.face[i + 1], mp.N - 1.0) / (field.grid[i + 1] - field.grid[i]);

    const BoundaryKind bkIn = effective_kind(field.inner, field.T, tNew);
    const BoundaryKind bkOut = effective_kind(field.outer, field.T, tNew);
    const double bcIn = bkIn != BoundaryKind::Neumann
                            ? closure_value(field.inner, field.params, field.T,
                                            field.grid.front(), tNew)
                            : 0.0;
    const double bcOut = bkOut != BoundaryKind::Neumann
                             ? closure_value(field.outer, field.params, field.T,
                                             field.grid.back(), tNew)
                             : 0.0;

    std::vector<double> u = field.values;
    if (bkIn != BoundaryKind::Neumann) u.front() = bcIn;
    if (bkOut != BoundaryKind::Neumann) u.back() = bcOut;

    Workspace ws;
    ws.w.resize(M);
    ws.dwdu.resize(M);
    ws.res.resize(M);
    ws.rsc.resize(M);
    std::vector<double> uTry(M);

    // row-relative convergence: achievable everywhere, because the rounding
    // floor of each row is epsilon times that row's own term magnitudes
    const auto rows_converged = [&](double slack) {
        for (size_t i = 0; i < M; ++i)
            if (std::abs(ws.res[i]) > slack * opts.newtonTol * ws.rsc[i] + 1e-300) return false;
        return true;
    };

    auto finish = [&](const std::vector<double>& uFinal) {
        RadialField out = field;
        out.t = tNew;
        out.values = uFinal;
        return out;
    };

    // damped Newton with affine-invariant (simplified-correction) monotonicity:
    // progress is measured in |J^{-1} R| scaled row-by-row, so a tail cell
    // twenty orders below the sup still gets to demand its own progress and a
    // big cell sitting at its rounding floor cannot mask it
    std::vector<double> sub(M), diag(M), sup(M), delta(M), scratch(M), rsc0(M);
    auto solve_with_current_jacobian = [&](const std::vector<double>& rhs,
                                           std::vector<double>& out) {
        std::vector<double> s1 = sub, s2 = diag, s3 = sup;
        out = rhs;
        for (size_t i = 0; i < M; ++i) out[i] = -out[i];
        solve_tridiagonal(s1, s2, s3, out);
    };
    const auto scaled_sup = [&](const std::vector<double>& v) {
        double s = 0.0;
        for (size_t i = 0; i < M; ++i) s = std::max(s, std::abs(v[i]) / (rsc0[i] + 1e-300));
        return s;
    };

    residual(field, field.values, u, dt, fg, cf, bkIn, bkOut, bcIn, bcOut, ws);

    for (int iter = 0; iter < opts.maxNewton; ++iter) {
        if (rows_converged(1.0)) return finish(u);

        // tridiagonal Jacobian; the degeneracy floor enters only here
        for (size_t i = 0; i < M; ++i)
            ws.dwdu[i] = m / std::pow(std::max(u[i], field.floorEps), 1.0 - m);
        for (size_t i = 0; i < M; ++i) {
            sub[i] = sup[i] = 0.0;
            diag[i] = 1.0;
            if ((i == 0 && bkIn != BoundaryKind::Neumann) ||
                (i == M - 1 && bkOut != BoundaryKind::Neumann))
                continue;
            const double c = dt / (m * fg.volume[i]);
            if (i + 1 < M) {
                diag[i] += c * cf[i] * ws.dwdu[i];
                sup[i] = -c * cf[i] * ws.dwdu[i + 1];
            }
            if (i > 0) {
                diag[i] += c * cf[i - 1] * ws.dwdu[i];
                sub[i] = -c * cf[i - 1] * ws.dwdu[i - 1];
            }
        }
        solve_with_current_jacobian(ws.res, delta);
        rsc0 = ws.rsc; // freeze the row scales over this line search
        const double dsup = scaled_sup(delta);

        bool accepted = false;
        if (dsup <= 1e-13) {
            // the whole correction is rounding noise; a monotonicity test
            // cannot certify progress at this scale, but rows far below the
            // sup may still need their (genuinely tiny) share of it
            for (size_t i = 0; i < M; ++i) uTry[i] = std::max(u[i] + delta[i], 0.0);
            residual(field, field.values, uTry, dt, fg, cf, bkIn, bkOut, bcIn, bcOut, ws);
            u = uTry;
            accepted = true;
        } else
            for (double lam = 1.0; lam > 1.0 / 600.0; lam *= 0.5) {
                for (size_t i = 0; i < M; ++i) uTry[i] = std::max(u[i] + lam * delta[i], 0.0);
                residual(field, field.values, uTry, dt, fg, cf, bkIn, bkOut, bcIn, bcOut, ws);
                solve_with_current_jacobian(ws.res, scratch);
                if (scaled_sup(scratch) <= (1.0 - 0.5 * lam) * dsup) {
                    u = uTry;
                    accepted = true;
                    break;
                }
            }
        if (!accepted) {
            if (log_level() >= LogLevel::Debug) {
                size_t wd = 0;
                for (size_t i = 0; i < M; ++i)
                    if (std::abs(delta[i]) / (rsc0[i] + 1e-300) >
                        std::abs(delta[wd]) / (rsc0[wd] + 1e-300))
                        wd = i;
                log_debug("step: linesearch fail, worst delta row " + std::to_string(wd) +
                          ": u = " + sci(u[wd]) + ", delta = " + sci(delta[wd]) +
                          ", rsc = " + sci(rsc0[wd]) + ", dsup = " + sci(dsup));
            }
            residual(field, field.values, u, dt, fg, cf, bkIn, bkOut, bcIn, bcOut, ws);
            if (rows_converged(100.0)) return finish(u); // at the rounding floor
            size_t worst = 0;
            double worstQ = 0.0;
            for (size_t i = 0; i < M; ++i) {
                const double q = std::abs(ws.res[i]) / (ws.rsc[i] + 1e-300);
                if (q > worstQ) {
                    worstQ = q;
                    worst = i;
                }
            }
            log_debug("step: stall at iter " + std::to_string(iter) + ", row " +
                      std::to_string(worst) + " (r = " + std::to_string(field.grid[worst]) +
                      "), |res|/rsc = " + sci(worstQ) + ", u = " + sci(u[worst]));
            throw StepError("step: Newton stalled at t = " + std::to_string(field.t) +
                            ", dt = " + std::to_string(dt));
        }
    }
    residual(field, field.values, u, dt, fg, cf, bkIn, bkOut, bcIn, bcOut, ws);
    if (rows_converged(100.0)) return finish(u);
    size_t worst = 0;
    double worstQ = 0.0;
    for (size_t i = 0; i < M; ++i) {
        const double q = std::abs(ws.res[i]) / (ws.rsc[i] + 1e-300);
        if (q > worstQ) {
            worstQ = q;
            worst = i;
        }
    }
    log_debug("step: out of iterations, row " + std::to_string(worst) +
              " (r = " + std::to_string(field.grid[worst]) + "), |res|/rsc = " +
              sci(worstQ) + ", u = " + sci(u[worst]));
    throw StepError("step: Newton did not converge after " + std::to_string(opts.maxNewton) +
                    " iterations (t = " + std::to_string(field.t) + ")");
}

// -------------------------------------------------------------------- evolve

// Fits sup ~ C (T* - t)^p on a trailing window by scanning candidate roots
// T* and minimizing the rms of the log-log line fit: exact power-law decay
// pins T* sharply, while decay toward a positive floor pushes the best root
// far into the future (no extinction in sight).
ExtinctionEstimate estimate_extinction_time(const std::vector<double>& ts,
                                            const std::vector<double>& sups) {
    const size_t n = ts.size();
    if (n < 8) throw Inconclusive("estimate_extinction_time: too few history samples");

    // trailing strictly decreasing stretch
    size_t lo = n - 1;
    while (lo > 0 && sups[lo - 1] > sups[lo] * (1.0 + 1e-13)) --lo;
    if (n - lo < 8 || !(sups[lo] > 0.0) || !(sups[lo] > sups[n - 1]))
        throw Inconclusive("estimate_extinction_time: no decaying stretch in the history");

    // keep the last two decades of decay so the local power is stable
    size_t win = lo;
    for (size_t i = n - 1; i > lo; --i)
        if (sups[i - 1] > 100.0 * sups[n - 1]) {
            win = i;
            break;
        }
    if (n - win < 8) win = lo;

    const std::vector<double> tw(ts.begin() + win, ts.end());
    std::vector<double> ly(tw.size());
    for (size_t i = 0; i < tw.size(); ++i) ly[i] = std::log(sups[win + i]);
    const double tEnd = tw.back();
    const double span = std::max(tEnd - tw.front(), 1e-300);

    std::vector<double> lx(tw.size());
    const auto rms_at = [&](double delta) {
        for (size_t i = 0; i < tw.size(); ++i) lx[i] = std::log(tEnd + delta - tw[i]);
        return ols_line(lx, ly).rms;
    };
    const auto scan = [&](double dLo, double dHi, int points, double& bestD) {
        double bestR = std::numeric_limits<double>::infinity();
        const double step = std::log(dHi / dLo) / (points - 1);
        for (int j = 0; j < points; ++j) {
            const double d = dLo * std::exp(step * j);
            const double r = rms_at(d);
            if (r < bestR) {
                bestR = r;
                bestD = d;
            }
        }
        return bestR;
    };

    double bestD = span;
    scan(1e-3 * span, 1e3 * span, 241, bestD);
    const double coarseD = bestD;
    const double bestR = scan(coarseD / 3.0, coarseD * 3.0, 121, bestD);

    // half-width from the delta range whose fit quality is within 2x of best
    const double gate = std::max(2.0 * bestR, bestR + 1e-10);
    double dLo = bestD, dHi = bestD;
    for (int j = 0; j < 121; ++j) {
        const double d = bestD / 3.0 * std::exp(std::log(9.0) / 120.0 * j);
        if (rms_at(d) <= gate) {
            dLo = std::min(dLo, d);
            dHi = std::max(dHi, d);
        }
    }
    ExtinctionEstimate est;
    est.tHat = tEnd + bestD;
    est.halfWidth = 0.5 * (dHi - dLo) + 1e-9 * std::max(1.0, std::abs(est.tHat));
    return est;
}

ExtinctionEstimate estimate_extinction_time(const EvolutionRun& run) {
    return estimate_extinction_time(run.historyT, run.historySup);
}

EvolutionRun evolve(const RadialField& field, double until, const EvolveOptions& opts) {
    if (!(until > field.t)) throw DomainError("evolve: need until > current time");
    for (size_t i = 0; i < opts.snapshotTimes.size(); ++i) {
        const double ts = opts.snapshotTimes[i];
        if (ts <= field.t || ts > until * (1.0 + 1e-12) ||
            (i > 0 && ts <= opts.snapshotTimes[i - 1]))
            throw DomainError("evolve: snapshot times must increase within (t, until]");
    }

    EvolutionRun run;
    RadialField cur = field;
    run.historyT.push_back(cur.t);
    run.historySup.push_back(sup_norm(cur));
    run.historyMass.push_back(total_mass(cur));

    // dt controller: cap the sup-norm decay at ~1% per step, so approach to
    // extinction is resolved without knowing the extinction time in advance
    double dtCtrl = opts.dtMax;
    size_t nextSnap = 0;
    const double tEps = 1e-9 * std::max(1.0, std::abs(until));

    while (cur.t < until - tEps) {
        if (run.steps >= opts.maxSteps) break;
        const size_t k = run.historySup.size();
        if (k >= 2 && run.historySup[k - 1] > 0.0 &&
            run.historySup[k - 2] > run.historySup[k - 1]) {
            const double decayRate =
                std::log(run.historySup[k - 2] / run.historySup[k - 1]) /
                (run.historyT[k - 1] - run.historyT[k - 2]);
            dtCtrl = std::min(dtCtrl * 2.0, 0.01 / decayRate);
        } else {
            dtCtrl *= 2.0;
        }
        dtCtrl = std::min(dtCtrl, opts.dtMax);
        double dt = dtCtrl;
        if (nextSnap < opts.snapshotTimes.size())
            dt = std::min(dt, opts.snapshotTimes[nextSnap] - cur.t);
        dt = std::min(dt, until - cur.t);

        RadialField next = cur;
        for (int halve = 0;; ++halve) {
            try {
                next = step(cur, dt, opts.stepOpts);
                break;
            } catch (const StepError&) {
                dt *= 0.5;
                dtCtrl = dt;
                log_debug("evolve: halving dt to " + std::to_string(dt) + " at t = " +
                          std::to_string(cur.t));
                if (halve >= 40 || dt < 1e-15 * std::max(1.0, field.T))
                    throw StepError("evolve: dt underflow at t = " + std::to_string(cur.t));
            }
        }
        cur = std::move(next);
        ++run.steps;
        run.historyT.push_back(cur.t);
        run.historySup.push_back(sup_norm(cur));
        run.historyMass.push_back(total_mass(cur));

        if (nextSnap < opts.snapshotTimes.size() &&
            std::abs(cur.t - opts.snapshotTimes[nextSnap]) <= tEps) {
            run.snapshots.push_back(cur);
            ++nextSnap;
        }
        if (run.historySup.back() < opts.supStop) {
            run.supStopped = true;
            break;
        }
    }
    run.tFinal = cur.t;
    return run;
}

// --------------------------------------------------------------- measurement

double sup_norm(const RadialField& f) {
    double s = 0.0;
    for (double v : f.values) s = std::max(s, v);
    return s;
}

double total_mass(const RadialField& f) {
    const FaceGeometry fg = face_geometry(f.grid, f.params.model.N);
    double s = 0.0;
    for (size_t i = 0; i < f.values.size(); ++i) s += fg.volume[i] * f.values[i];
    return s;
}

namespace {

void require_common_grid(const RadialField& a, const RadialField& b) {
    if (a.grid.size() != b.grid.size())
        throw DomainError("distance: fields live on different grids");
    for (size_t i = 0; i < a.grid.size(); ++i)
        if (std::abs(a.grid[i] - b.grid[i]) > 1e-12 * (1.0 + std::abs(a.grid[i])))
            throw DomainError("distance: fields live on different grids");
}

} // namespace

double l1_distance(const RadialField& a, const RadialField& b) {
    require_common_grid(a, b);
    const double N = a.params.model.N;
    std::vector<double> integrand(a.grid.size());
    for (size_t i = 0; i < a.grid.size(); ++i)
        integrand[i] = std::abs(a.values[i] - b.values[i]) * std::pow(a.grid[i], N - 1.0);
    return trapezoid(a.grid, integrand);
}

double l1_distance(const RadialField& a, const RadialProfile& target, double rLo, double rHi) {
    const double N = a.params.model.N;
    std::vector<double> xs, ys;
    for (size_t i = 0; i < a.grid.size(); ++i) {
        const double r = a.grid[i];
        if (r < rLo || r > rHi) continue;
        xs.push_back(r);
        ys.push_back(r == 0.0 ? 0.0
                              : std::abs(a.values[i] - eval(target, r)) * std::pow(r, N - 1.0));
    }
    if (xs.size() < 2) throw DomainError("l1_distance: fewer than 2 nodes in range");
    return trapezoid(xs, ys);
}

double weighted_l1_distance(const RadialField& a, const RadialProfile& target, double p0,
                            double rLo, double rHi) {
    const ModelParams& mp = a.params.model;
    if (!(p0 > 0.0) || !(p0 < 2.0 * mp.m))
        throw DomainError("weighted_l1_distance: need 0 < p0 < 2m for an integrable weight");
    std::vector<double> xs, ys;
    for (size_t i = 0; i < a.grid.size(); ++i) {
        const double r = a.grid[i];
        if (r < rLo || r > rHi) continue;
        xs.push_back(r);
        if (r == 0.0) {
            ys.push_back(0.0);
            continue;
        }
        const double weight = std::pow(mp.cStar / (r * r), p0 / mp.n);
        ys.push_back(std::abs(a.values[i] - eval(target, r)) * weight *
                     std::pow(r, mp.N - 1.0));
    }
    if (xs.size() < 2) throw DomainError("weighted_l1_distance: fewer than 2 nodes in range");
    return trapezoid(xs, ys);
}

double weighted_l1_distance(const RadialField& a, const RadialField& b, double p0) {
    require_common_grid(a, b);
    const ModelParams& mp = a.params.model;
    if (!(p0 > 0.0) || !(p0 < 2.0 * mp.m))
        throw DomainError("weighted_l1_distance: need 0 < p0 < 2m for an integrable weight");
    std::vector<double> ys(a.grid.size());
    for (size_t i = 0; i < a.grid.size(); ++i) {
        const double r = a.grid[i];
        if (r == 0.0) continue;
        const double weight = std::pow(mp.cStar / (r * r), p0 / mp.n);
        ys[i] = std::abs(a.values[i] - b.values[i]) * weight * std::pow(r, mp.N - 1.0);
    }
    return trapezoid(a.grid, ys);
}

double sup_distance(const RadialField& a, const RadialProfile& target, double rLo, double rHi) {
    double s = -1.0;
    for (size_t i = 0; i < a.grid.size(); ++i) {
        const double r = a.grid[i];
        if (r < rLo || r > rHi || r == 0.0) continue;
        s = std::max(s, std::abs(a.values[i] - eval(target, r)));
    }
    if (s < 0.0) throw DomainError("sup_distance: no nodes in range");
    return s;
}

// ---------------------------------------------------------------- rescalings

double tau_left(double t, double T) {
    if (!(t < T)) throw DomainError("tau_left: need t < T");
    return -std::log((T - t) / T);
}

double tau_right(double t, double T) {
    if (!(t > T)) throw DomainError("tau_right: need t > T");
    return std::log((t - T) / T);
}

namespace {

// Both rescalings are u(y rem^{-beta}) rem^{-alpha}; on a radial grid this is
// the exact relabeling y_i = r_i rem^{beta}, so no interpolation enters.
RadialField rescale_common(const RadialField& f, double rem, double tau) {
    const double a = std::pow(rem, f.params.alpha);
    const double b = std::pow(rem, f.params.beta);
    RadialField out;
    out.params = f.params;
    out.T = f.T;
    out.t = tau;
    out.grid.resize(f.grid.size());
    out.values.resize(f.grid.size());
    for (size_t i = 0; i < f.grid.size(); ++i) {
        out.grid[i] = f.grid[i] * b;
        out.values[i] = f.values[i] / a;
    }
    return out;
}

} // namespace

RadialField rescale_left(const RadialField& f, double T) {
    return rescale_common(f, T - f.t, tau_left(f.t, T));
}

RadialField rescale_right(const RadialField& f, double T) {
    return rescale_common(f, f.t - T, tau_right(f.t, T));
}

double convergence_rate(const RescaledTrajectory& traj) {
    const size_t n = traj.tau.size();
    if (n < 5 || traj.distances.size() != n)
        throw Inconclusive("convergence_rate: need at least 5 tau samples");
    // converging trajectories decay toward the limit: tau -> +inf (left),
    // tau -> -inf (right)
    for (size_t i = 1; i < n; ++i) {
        if (traj.tau[i] <= traj.tau[i - 1])
            throw DomainError("convergence_rate: tau samples must increase");
        const bool ok = traj.direction < 0 ? traj.distances[i] < traj.distances[i - 1]
                                           : traj.distances[i] > traj.distances[i - 1];
        if (!ok) throw Inconclusive("convergence_rate: distances are not monotone");
    }
    std::vector<double> ld(n);
    for (size_t i = 0; i < n; ++i) {
        if (!(traj.distances[i] > 0.0))
            throw Inconclusive("convergence_rate: nonpositive distance");
        ld[i] = std::log(traj.distances[i]);
    }
    const LineFit lf = ols_line(traj.tau, ld);
    return traj.direction < 0 ? -lf.slope : lf.slope;
}

// --------------------------------------------------------------- diagnostics

TailConstant tail_constant(const RadialField& f, double T) {
    if (!(f.t < T)) throw DomainError("tail_constant: need t < T");
    const ModelParams& mp = f.params.model;
    const double rHi = f.grid.back(), rLo = rHi / 10.0;
    double sum = 0.0;
    int count = 0;
    for (size_t i = 0; i < f.grid.size(); ++i) {
        if (f.grid[i] < rLo || f.grid[i] > rHi) continue;
        sum += std::pow(f.grid[i], 2.0 / mp.n) * f.values[i];
        ++count;
    }
    if (count < 2) throw DomainError("tail_constant: outer decade has too few nodes");
    TailConstant tc;
    tc.measured = sum / count;
    tc.expected = std::pow(mp.cStar * (T - f.t), 1.0 / mp.n);
    tc.ratio = tc.measured / tc.expected;
    return tc;
}

double local_power(const RadialField& f, double r0) {
    if (!(r0 > 0.0)) throw DomainError("local_power: need r0 > 0");
    size_t i = 0;
    while (i + 1 < f.grid.size() && f.grid[i + 1] < r0) ++i;
    const size_t k = 3;
    if (i < k || i + k >= f.grid.size())
        throw DomainError("local_power: r0 too close to the grid edge");
    const double uL = f.values[i - k], uR = f.values[i + k];
    if (!(uL > 0.0) || !(uR > 0.0))
        throw DomainError("local_power: field vanishes near r0");
    return -(std::log(uR) - std::log(uL)) /
           (std::log(f.grid[i + k]) - std::log(f.grid[i - k]));
}

} // namespace yfs
