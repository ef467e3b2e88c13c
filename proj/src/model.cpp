#include "yfs/model.hpp"

#include <cmath>
#include <string>

namespace yfs {

ModelParams derive_exponents(int N) {
    if (N < 3)
        throw DomainError("derive_exponents: need N >= 3, got N = " + std::to_string(N));
    ModelParams mp;
    mp.N = N;
    mp.m = double(N - 2) / double(N + 2);
    mp.n = 4.0 / double(N + 2);
    mp.p = double(N + 2) / double(N - 2);
    mp.alphaBar = 0.25 * double(N - 2) * double(N - 2);
    mp.cStar = 2.0 * ((1.0 - mp.m) * N - 2.0) / mp.n; // = N-2, checked exactly in tests
    mp.kappa = mp.p;
    return mp;
}

static double beta0_of(const ModelParams& mp) { return 2.0 / std::sqrt(double(mp.N - 2)); }
static double beta1_of(const ModelParams& mp) { return double(mp.N + 2) / (2.0 * double(mp.N - 2)); }

CharacteristicExponents characteristic_exponents(const ModelParams& mp, double beta) {
    if (beta <= 0.0)
        throw DomainError("characteristic_exponents: need beta > 0");
    const double b = beta * (mp.N - 2);
    const double disc = b * b - 4.0 * (mp.N - 2);
    if (disc < 0.0)
        throw OscillatoryRegime("characteristic_exponents: beta = " + std::to_string(beta) +
                                " < beta0 = " + std::to_string(beta0_of(mp)) +
                                ", roots are complex (oscillatory regime)");
    const double sq = std::sqrt(disc);
    CharacteristicExponents ce;
    ce.gamma2 = 0.5 * (b + sq);
    // gamma1 via the product gamma1*gamma2 = N-2 to avoid cancellation in b - sq.
    ce.gamma1 = (mp.N - 2) / ce.gamma2;
    return ce;
}

LinearizationCoefficients linearization_coefficients(const ModelParams& mp, double beta) {
    const double beta0 = beta0_of(mp);
    if (beta == beta0)
        throw DegenerateRoots("linearization_coefficients: beta == beta0 = " +
                              std::to_string(beta0) + ", gamma1 == gamma2");
    const CharacteristicExponents ce = characteristic_exponents(mp, beta);
    const double pOverPm1 = 0.25 * (mp.N + 2); // p/(p-1) = 1/n
    LinearizationCoefficients lc;
    lc.A1 = pOverPm1 - beta * ce.gamma1;
    lc.A2 = pOverPm1 - beta * ce.gamma2;
    lc.CN = (mp.N - 2) / (mp.p * (ce.gamma2 - ce.gamma1));
    return lc;
}

SimilarityParams similarity_params(const ModelParams& mp, double beta) {
    if (beta <= 0.0)
        throw DomainError("similarity_params: need beta > 0, got beta = " + std::to_string(beta));
    SimilarityParams sp;
    sp.model = mp;
    sp.beta = beta;
    sp.alpha = (1.0 + 2.0 * beta) / mp.n;
    sp.beta0 = beta0_of(mp);
    sp.beta1 = beta1_of(mp);
    sp.theta = sp.alpha / beta;
    if (beta >= sp.beta0) {
        const CharacteristicExponents ce = characteristic_exponents(mp, beta);
        sp.gamma1 = ce.gamma1;
        sp.gamma2 = ce.gamma2;
        const double pOverPm1 = 0.25 * (mp.N + 2);
        sp.A1 = pOverPm1 - beta * ce.gamma1;
        sp.A2 = pOverPm1 - beta * ce.gamma2;
        if (ce.gamma2 > ce.gamma1)
            sp.CN = (mp.N - 2) / (mp.p * (ce.gamma2 - ce.gamma1));
    }
    if (beta > sp.beta0 && beta < sp.beta1) {
        const double disc = beta * beta - 4.0 / (mp.N - 2);
        const double sq = std::sqrt(disc);
        sp.p1 = mp.m * (1.0 - beta - sq);
        sp.p2 = mp.m * (1.0 - beta + sq);
        sp.p0 = sp.p2;
    }
    return sp;
}

const char* to_string(Regime r) {
    switch (r) {
    case Regime::SlowNegativeTail: return "SlowNegativeTail";
    case Regime::SlowPositiveTail: return "SlowPositiveTail";
    case Regime::FastBarenblatt:   return "FastBarenblatt";
    case Regime::Oscillatory:      return "Oscillatory";
    case Regime::Degenerate:       return "Degenerate";
    }
    return "?";
}

Regime regime_classify(const ModelParams& mp, double beta) {
    if (beta <= 0.0)
        throw DomainError("regime_classify: need beta > 0");
    const double beta0 = beta0_of(mp);
    const double beta1 = beta1_of(mp);
    if (beta < beta0) return Regime::Oscillatory;
    if (beta == beta0) return Regime::Degenerate;
    if (mp.N < 6) {
        if (beta < beta1) return Regime::SlowPositiveTail;
        if (beta == beta1) return Regime::FastBarenblatt;
    }
    // N >= 6: A1 > 0 for every beta > beta0, including beta == beta1 (where the
    // Barenblatt family is the B -> 0 member, with gamma1 = 2 the generic exponent).
    return Regime::SlowNegativeTail;
}

double kn_drift_coefficient(const ModelParams& mp, double beta, double p) {
    const double N = mp.N;
    const double num = (N + 2) * (N + 2) * p * p +
                       2.0 * (beta - 1.0) * (N * N - 4.0) * p +
                       (N * N - 4.0 - 2.0 * beta * (N - 2) * (N - 2));
    return num / (4.0 * (N - 2));
}

WeightedContractionParams weighted_contraction_params(const ModelParams& mp, double beta) {
    if (mp.N == 6)
        throw EmptyRegime("weighted_contraction_params: N == 6 has beta0 == beta1, "
                          "the interval (beta0, beta1) is empty");
    if (mp.N < 6)
        throw DomainError("weighted_contraction_params: requires N >= 6");
    const double beta0 = beta0_of(mp);
    const double beta1 = beta1_of(mp);
    if (!(beta > beta0 && beta < beta1))
        throw DomainError("weighted_contraction_params: requires beta0 < beta < beta1");
    const double disc = beta * beta - 4.0 / (mp.N - 2);
    const double sq = std::sqrt(disc);
    WeightedContractionParams wp;
    wp.p1 = mp.m * (1.0 - beta - sq);
    wp.p2 = mp.m * (1.0 - beta + sq);
    wp.p0 = wp.p2;
    wp.KNAtP0 = kn_drift_coefficient(mp, beta, wp.p0);
    return wp;
}

} // namespace yfs
