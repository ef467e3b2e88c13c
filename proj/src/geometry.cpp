#include "yfs/geometry.hpp"

#include <cmath>
#include <limits>

#include "yfs/errors.hpp"

namespace yfs {

namespace {

// shared worker: curvature of u on (radii) for dimension N
CurvatureReport curvature_of(const std::vector<double>& radii, const std::vector<double>& u,
                             int N, double mExp) {
    if (radii.size() != u.size())
        throw DomainError("scalar_curvature: grid/value size mismatch");
    if (radii.size() < 3) throw DomainError("scalar_curvature: need at least 3 nodes");

    const size_t M = radii.size();
    CurvatureReport rep;
    rep.minR = std::numeric_limits<double>::infinity();
    rep.maxR = -std::numeric_limits<double>::infinity();

    for (size_t i = 1; i + 1 < M; ++i) {
        if (!(radii[i - 1] > 0.0)) continue; // stencil touches the origin node
        if (!(u[i - 1] > 0.0) || !(u[i] > 0.0) || !(u[i + 1] > 0.0))
            throw DomainError("scalar_curvature: nonpositive value in the evaluation window");

        const double sL = std::log(radii[i - 1]);
        const double s0 = std::log(radii[i]);
        const double sR = std::log(radii[i + 1]);
        const double h1 = s0 - sL, h2 = sR - s0;

        const double wL = std::pow(u[i - 1], mExp);
        const double w0 = std::pow(u[i], mExp);
        const double wR = std::pow(u[i + 1], mExp);

        // second-order non-uniform centered differences in s
        const double denom = h1 * h2 * (h1 + h2);
        const double ws = (h1 * h1 * wR - h2 * h2 * wL + (h2 * h2 - h1 * h1) * w0) / denom;
        const double wss = 2.0 * (h1 * wR + h2 * wL - (h1 + h2) * w0) / denom;

        const double lap = (wss + (N - 2) * ws) / (radii[i] * radii[i]);
        const double R = -(4.0 * (N - 1) / (N - 2)) * lap / u[i];
        rep.radii.push_back(radii[i]);
        rep.R.push_back(R);
        rep.minR = std::min(rep.minR, R);
        rep.maxR = std::max(rep.maxR, R);
    }
    if (rep.R.empty()) throw DomainError("scalar_curvature: no interior node with r > 0");
    rep.signPattern = rep.minR > 0.0 ? +1 : (rep.maxR < 0.0 ? -1 : 0);
    return rep;
}

} // namespace

CurvatureReport scalar_curvature(const RadialField& field) {
    return curvature_of(field.grid, field.values, field.params.model.N, field.params.model.m);
}

CurvatureReport scalar_curvature(const RadialProfile& profile) {
    return curvature_of(profile.grid, profile.values, profile.params.model.N,
                        profile.params.model.m);
}

double cylinder_curvature(int N, double T, double t) {
    if (N < 3) throw DomainError("cylinder_curvature: dimension must be >= 3");
    if (!(t < T)) throw DomainError("cylinder_curvature: defined for t < T only");
    return (N - 1.0) / (T - t);
}

} // namespace yfs
