#pragma once

#include <optional>
#include <vector>

#include "needle/density1d.hpp"

namespace needle {

class IntervalSet;

// Normalized mass of the window [xi, xi + D] under the model density.
double lambdaOf(double N, double D, double xi);

// Isoperimetric profile of the full model segment [0, pi].
double modelProfilePi(double N, double v);

// Profile of the window density sin^{N-1}(xi + t) / (omega lambda) on [0, D] at v,
// via the smaller of the two one-sided intervals.
double windowProfile(double N, double D, double xi, double v);

struct ModelProfile {
    double N, D, v;
    double value;
    double xi;       // leftmost minimizing offset (0 when D >= pi)
    double lambda;   // window mass at xi
    bool tie;        // another offset attains the minimum within tolerance
};

ModelProfile modelProfile(double N, double D, double v);

struct QuantileRadii {
    double rMinus, rPlus, v;
};
QuantileRadii quantileRadii(const Density1D& h, double v);

// min{h(r-), h(r+)}
double oneSidedProfile(const Density1D& h, double v);

double deficit1d(const Density1D& h, const IntervalSet& E, double v, double volumeTol = 1e-8);

struct IdentityCheck {
    double lhs, rhs, gap;
};
IdentityCheck profileIdentityCheck(double N, double D, double xi, double v);

struct ConcavityGap {
    double gap, bound, constant;
    bool holds;
};
ConcavityGap concavityGap(double N, double D, double xi, double v, double tol = 1e-7);

double solveEtaN(double N);

// lim_{t -> 0} I_pi(t) / t^{(N-1)/N}, extrapolated from t in {1e-3, 1e-4, 1e-5}.
double smallVolumeProfileLimit(double N);
double profileDerivativePi(double N, double v, double step = 1e-5);
// The three-term minimum constant of the concavity estimate.
double concavityConstant(double N, double v);

struct ExponentChoice {
    double alpha, beta, gamma;
    bool riemannian = false;
};

ExponentChoice defaultExponents(double N, bool riemannian = false);
double exponentBound(double N, double beta, double gamma, bool riemannian);
double etaExponent(double N, double beta, double gamma, bool riemannian);
// Throws invalid-parameter unless alpha < (factor) min{gamma, 1-gamma, 1-beta}.
void validateExponents(double N, const ExponentChoice& e);

struct ConstantBundle {
    double N, v;
    double etaN;
    double alpha, beta, gamma, eta;
    bool riemannian;
    double CNv;        // concavity constant
    double C1Nv;       // inf (1 - lambda) / (pi - D)^N over long windows
    double C2Nv;       // 1 / (C * C') at zero deficit
    double CNantipodal;
    double DN;         // shortest window length with lambda above eta_N

    // (1 / (C' (C - delta eta_N^{1/(N-1)}))), infinite once the bracket turns nonpositive.
    ExtReal C2At(double delta) const;
};

ConstantBundle makeConstants(double N, double v, std::optional<ExponentChoice> exps = std::nullopt);

double antipodalConstant(double N);

struct ScalingFit {
    double slope, intercept;
    std::vector<double> logEps, logGap;
};
// Fit of log(I_D(v) - I_pi(v)) against log(pi - D) on `points` log-spaced D values.
ScalingFit diameterGapScaling(double N, double v, double epsLo, double epsHi, int points);

// Unnormalized integral of sin^{N-1} on [0, r].
double rawSinePowerIntegral(double N, double r);
// r_N(v): integral of sin^{N-1} over [0, r] equals v omega_N.
double modelBallRadius(double N, double v);

}  // namespace needle
