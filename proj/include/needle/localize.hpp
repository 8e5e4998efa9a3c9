#pragma once

#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "needle/density1d.hpp"
#include "needle/profile.hpp"
#include "needle/space.hpp"

namespace needle {

// f = 1_E / v - 1_{E^c} / (1 - v)
std::vector<double> localizationFunction(const DiscreteSpace& X, const Mask& E);

struct Potential {
    std::vector<double> phi;  // shifted so that min phi = 0
    double lipschitzSlack = 0.0;
    double primal = 0.0, dual = 0.0, gap = 0.0;
    long pivots = 0;
    int rounds = 0;
    long arcs = 0;
    // Arcs of the optimal plan with positive flow: (from, to, amount).
    std::vector<std::tuple<int, int, double>> flows;
};

double lipschitzSlack(const DiscreteSpace& X, const std::vector<double>& phi);

// Dual of the L1 transport problem for the signed mass f * weight. Starts from the
// k-nearest-neighbour graph and adds violated pairs until every pair is feasible.
Potential kantorovichPotential(const DiscreteSpace& X, const std::vector<double>& f, int knn = 10);
// Same problem with every ordered pair present from the start.
Potential kantorovichPotentialAllPairs(const DiscreteSpace& X, const std::vector<double>& f);

inline bool inGamma(const DiscreteSpace& X, const std::vector<double>& phi, int x, int y, double tol) {
    return x != y && phi[x] - phi[y] >= X.d(x, y) - tol;
}

std::vector<std::pair<int, int>> transportRelation(const DiscreteSpace& X, const std::vector<double>& phi,
                                                    double tolGamma);

struct MonotonicityCheck {
    long cycles;
    double worstExcess;  // max of sum d(x_i,y_i) - sum d(x_i,y_{i+1}) - k tol
    bool ok;
};
MonotonicityCheck monotonicitySpotCheck(const DiscreteSpace& X, const std::vector<std::pair<int, int>>& gamma,
                                        double tol, int samples, unsigned long long seed);

struct Ray {
    std::vector<int> chain;  // point indices ordered by decreasing phi
    std::vector<double> t;   // distance from the south pole, same order
    int south = -1, north = -1;
    double Dq = 0.0;
    double weight = 0.0;  // quotient mass
    double massE = 0.0;   // normalized mass of E on the ray
};

struct LocalizeOptions {
    int knn = 10;
    double tolGammaMesh = 2.0;   // tol_gamma in mesh units
    double hopMesh = 2.5;        // spine step length in mesh units
    double separationMesh = 6.0; // minimal spine spacing in mesh units
    double branchMesh = 0.5;     // radius for discrete branching in mesh units
    double maxBranchMass = 0.02;
    double maxUnassignedMass = 0.05;
    double fTol = 1e-12;
};

struct NeedleDecomposition {
    std::vector<Ray> rays;
    std::vector<int> zeroSet;    // f = 0 and no transport pair
    std::vector<int> branch;     // close to two or more rays
    std::vector<int> branchOwner;
    std::vector<int> rayOf;      // -1 when unassigned
    Mask E;
    std::vector<double> f;
    Potential potential;
    double mesh = 0.0;
    double tolGamma = 0.0;
    double v = 0.0;

    double quotientMass() const;
    double zeroMass(const DiscreteSpace& X) const;
    double branchMass(const DiscreteSpace& X) const;
    double maxMeanDeviation() const;  // max over rays of |m_q(E) - v|
};

NeedleDecomposition extractRays(const DiscreteSpace& X, const std::vector<double>& f, const Potential& pot,
                                const Mask& E, const LocalizeOptions& opt = {});

// localization function, potential, rays.
NeedleDecomposition localize(const DiscreteSpace& X, const Mask& E, const LocalizeOptions& opt = {});

// |sum_q q_q m_q(B) - m(B cap transport set)|
double disintegrationResidual(const DiscreteSpace& X, const NeedleDecomposition& dec, const Mask& B);

// Largest betweenness defect of ray points against the poles.
double rayChainDefect(const DiscreteSpace& X, const std::vector<double>& phi, const Ray& ray);

struct FittedRay {
    Density1D density;
    bool cdOk;
    CdReport report;
};
FittedRay fitRayDensity(const DiscreteSpace& X, const Ray& ray, double N, double mesh);

enum class RayLabel { Short, LongBad1, LongBad2, LongGoodS, LongGoodN, LongGoodOther };
const char* rayLabelName(RayLabel l);

struct RayClassification {
    std::vector<RayLabel> labels;
    std::vector<double> lambda;
    int qBar = -1;
    double poleThreshold = 0.0;  // max(delta^{beta/N}, floor)
    double massThreshold = 0.0;  // max(delta^gamma, floor)
    double mass(RayLabel l, const NeedleDecomposition& dec) const;
};

RayClassification classifyRays(const DiscreteSpace& X, const NeedleDecomposition& dec, double N, double v,
                               const ConstantBundle& constants, double delta, double floor);

// Symmetric difference mass (normalized on the ray) between E on the ray and its
// initial (fromSouth) or final segment of the same mass.
double raySideAsymmetry(const DiscreteSpace& X, const NeedleDecomposition& dec, const Ray& ray, bool fromSouth);

struct PerimeterModel {
    double rho = 0.0;
    double factor = 1.0;  // calibration multiplier
    bool line = false;    // 1D spaces use boundary densities
};

PerimeterModel perimeterModelFor(const DiscreteSpace& X, double rhoMesh = 3.0);
double discretePerimeter(const DiscreteSpace& X, const Mask& E, const PerimeterModel& pm,
                         const Mask* window = nullptr);

// Arc-length coordinate along a 1D space, measured from one end of a diameter.
std::vector<double> lineCoordinates(const DiscreteSpace& X);

struct AntipodalResult {
    double worstRatio;
    double bound;
    long triples;
    bool ok;
};
AntipodalResult antipodalCheck(const DiscreteSpace& X, double threshold, double N, double tol);

struct MarkovResult {
    double measured, bound;
    bool ok;
};
MarkovResult markovBound(const std::vector<double>& values, const std::vector<double>& weights, double a);

struct BallLocalization {
    double perimeterLower;
    double q1barMass;
    double massInside;  // m(E cap B_r)
    double relativePerimeter;  // discrete P(E, B_{3r})
    MarkovResult markov;
    int rays;
};
BallLocalization ballLocalization(const DiscreteSpace& X, const Mask& E, int center, double r, double N,
                                  const LocalizeOptions& opt = {});

struct CheckResult {
    std::string name;
    double measured = 0.0, bound = 0.0;
    bool ok = true;
    bool vacuous = false;
};

struct MainTheoremReport {
    double v = 0.0, N = 0.0;
    double perimeter = 0.0, profile = 0.0;
    double delta = 0.0;
    double asymmetry = 0.0;
    double diamDeficit = 0.0;
    double qShort = 0.0, qBad1 = 0.0, qBad2 = 0.0, qS = 0.0, qN = 0.0, qOther = 0.0;
    long xBar = -1;
    int xBarIndex = -1;
    double rNv = 0.0;
    double eta = 0.0;
    char side = 'S';
    double mesh = 0.0;
    double rayLowerBound = 0.0;  // sum_q q_q (I_{D_q}(v) - I_pi(v))
    double Dqbar = 0.0;
    double transportMass = 0.0, branchMass = 0.0, zeroMass = 0.0;
    double maxMeanDeviation = 0.0;
    double dualityGap = 0.0, lipschitzSlack = 0.0;
    int rays = 0;
    std::vector<CheckResult> checks;
    NeedleDecomposition decomposition;
    RayClassification classification;
};

struct QuantifyOptions {
    LocalizeOptions localize;
    std::optional<ExponentChoice> exponents;
    double floorMesh = 3.0;  // thresholds and check slack, in mesh units
};

MainTheoremReport quantify(const DiscreteSpace& X, const Mask& E, double N, const QuantifyOptions& opt = {});

}  // namespace needle
