#ifndef YFS_MODEL_HPP
#define YFS_MODEL_HPP

#include <optional>

#include "yfs/errors.hpp"

// Parameter algebra for the conformally flat Yamabe flow written as the fast
// diffusion equation u_t = kappa * Lap(u^m) with m = (N-2)/(N+2) and the
// normalization kappa = 1/m.  Everything here is closed-form arithmetic; the
// numerics live in profiles.hpp / flow.hpp.

namespace yfs {

struct ModelParams {
    int N;           // spatial dimension, N >= 3
    double m;        // (N-2)/(N+2)
    double n;        // 1 - m = 4/(N+2)
    double p;        // 1/m = (N+2)/(N-2)
    double alphaBar; // (N-2)^2/4, zero-order coefficient of the linearization
    double cStar;    // 2((1-m)N-2)/n; equals N-2 under this normalization
    double kappa;    // 1/m
};

// Throws DomainError for N < 3.
ModelParams derive_exponents(int N);

// Everything attached to one choice of the similarity exponent beta.
// u = (T-t)^alpha f(x (T-t)^beta) turns the PDE into the profile ODE;
// gamma1/gamma2 are the decay exponents of perturbations of the cylinder.
struct SimilarityParams {
    ModelParams model;
    double beta;
    double alpha;  // (1 + 2*beta)/n
    double beta0;  // 2/sqrt(N-2), below it the roots go complex
    double beta1;  // (N+2)/(2(N-2)), the Barenblatt value (alpha = beta*N)
    double theta;  // alpha/beta, origin exponent of singular profiles

    // Present only when beta >= beta0 (real roots).
    std::optional<double> gamma1, gamma2;
    // A_i = p/(p-1) - beta*gamma_i; present with the gammas.
    std::optional<double> A1, A2;
    // (N-2)/(p*(gamma2-gamma1)); absent when gamma1 == gamma2.
    std::optional<double> CN;
    // Weighted-contraction exponents; present only for beta0 < beta < beta1.
    std::optional<double> p0, p1, p2;
};

// Throws DomainError for beta <= 0.
SimilarityParams similarity_params(const ModelParams& mp, double beta);

struct CharacteristicExponents {
    double gamma1, gamma2; // gamma1 <= gamma2, roots of g^2 - beta(N-2)g + (N-2)
};

// Throws OscillatoryRegime for beta < beta0 (message names beta0).
CharacteristicExponents characteristic_exponents(const ModelParams& mp, double beta);

struct LinearizationCoefficients {
    double A1, A2; // p/(p-1) - beta*gamma_i
    double CN;     // (N-2)/(p*(gamma2-gamma1)) > 0
};

// Requires beta > beta0; throws DegenerateRoots at beta == beta0 and
// OscillatoryRegime below it.
LinearizationCoefficients linearization_coefficients(const ModelParams& mp, double beta);

// Tail behaviour of the smooth profile family at (N, beta):
//   SlowNegativeTail  generic e^{-gamma1 s} approach from below (A1 > 0)
//   SlowPositiveTail  approach from above, only for N < 6, beta0 < beta < beta1 (A1 < 0)
//   FastBarenblatt    beta == beta1, N < 6: closed form, tail exponent 2 (A1 == 0)
//   Oscillatory       beta < beta0
//   Degenerate        beta == beta0
enum class Regime {
    SlowNegativeTail,
    SlowPositiveTail,
    FastBarenblatt,
    Oscillatory,
    Degenerate,
};

const char* to_string(Regime r);

Regime regime_classify(const ModelParams& mp, double beta);

struct WeightedContractionParams {
    double p0;     // == p2, the weight exponent actually used
    double p1, p2; // m(1 - beta -/+ sqrt(beta^2 - 4/(N-2))), roots of K_N
    double KNAtP0; // K_N(p0), zero up to rounding
};

// Requires N >= 7 effectively: throws EmptyRegime at N == 6 (beta0 == beta1),
// DomainError for N < 6 or beta outside (beta0, beta1).
WeightedContractionParams weighted_contraction_params(const ModelParams& mp, double beta);

// Drift coefficient of the weighted L1 estimate as a function of the weight
// exponent p; negative strictly between p1 and p2.
double kn_drift_coefficient(const ModelParams& mp, double beta, double p);

} // namespace yfs

#endif
