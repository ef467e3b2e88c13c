#pragma once

#include <vector>

#include "yfs/flow.hpp"
#include "yfs/profiles.hpp"

namespace yfs {

// Scalar curvature of the conformally flat metric g = u^{4/(N+2)} dx^2 carried
// by a positive radial function u:
//
//   R = -(4 (N-1)/(N-2)) u^{-1} Laplacian(u^m),   m = (N-2)/(N+2).
//
// The Laplacian is evaluated by centered differences in s = log r, where the
// radial Laplacian reads r^{-2} (w_ss + (N-2) w_s) for w = u^m.  Evaluation
// nodes are the interior grid nodes whose full stencil has r > 0.
struct CurvatureReport {
    std::vector<double> radii;
    std::vector<double> R;
    double minR = 0.0;
    double maxR = 0.0;
    int signPattern = 0; // +1 all positive, -1 all negative, 0 mixed
};

// curvature of the metric carried by an evolving snapshot
CurvatureReport scalar_curvature(const RadialField& field);

// curvature of the metric carried by a self-similar profile on its own grid
CurvatureReport scalar_curvature(const RadialProfile& profile);

// closed form for the exact shrinking cylinder: R = (N-1)/(T-t)
double cylinder_curvature(int N, double T, double t);

} // namespace yfs
